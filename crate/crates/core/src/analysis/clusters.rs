use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy::von_neumann_entropy;
use crate::engine::QuantumState;
use crate::error::{invalid, Result};

/// Largest spin count accepted by the exhaustive search.
pub const MAX_CLUSTER_SPINS: usize = 12;

/// Partition of the spins into weakly entangled clusters. Spin indices are
/// zero based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    pub blocks: Vec<Vec<usize>>,
    /// Entropy between each block and the rest, in bits.
    pub entropies: Vec<f64>,
    pub threshold: f64,
}

impl ClusterPartition {
    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }
}

/// Entropy between every subset (bit `q` of the mask is spin `q`) and its
/// complement. The empty and full sets are assigned 0.
pub fn subset_entropies(state: &QuantumState) -> Result<Vec<f64>> {
    let n = state.n_spins();
    let full = (1usize << n) - 1;
    (0..=full)
        .into_par_iter()
        .map(|m| {
            if m == 0 || m == full {
                return Ok(0.0);
            }
            let subset: Vec<usize> = (0..n).filter(|q| m >> q & 1 == 1).collect();
            von_neumann_entropy(state, &subset)
        })
        .collect()
}

type Key = (Vec<usize>, Vec<Vec<usize>>);

fn key_of(blocks: &[usize], n: usize) -> Key {
    let mut sets: Vec<Vec<usize>> =
        blocks.iter().map(|&m| (0..n).filter(|q| m >> q & 1 == 1).collect()).collect();
    sets.sort();
    let mut sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    (sizes, sets)
}

struct Search<'a> {
    n: usize,
    limit: u32,
    by_low: &'a [Vec<usize>],
}

impl Search<'_> {
    fn run(&self, uncovered: usize, chosen: &mut Vec<usize>, best: &mut Option<Key>) {
        if uncovered == 0 {
            let k = key_of(chosen, self.n);
            if best.as_ref().map_or(true, |b| k < *b) {
                *best = Some(k);
            }
            return;
        }
        let q = uncovered.trailing_zeros() as usize;
        for &b in &self.by_low[q] {
            if b & !uncovered == 0 && b.count_ones() <= self.limit {
                chosen.push(b);
                self.run(uncovered & !b, chosen, best);
                chosen.pop();
            }
        }
    }
}

/// Finest partition whose every block has entropy at most `threshold`:
/// the smallest achievable maximum block size, then the lexicographically
/// smallest descending block-size sequence, then the smallest sorted block
/// list.
pub fn cluster_partition(state: &QuantumState, threshold: f64) -> Result<ClusterPartition> {
    let n = state.n_spins();
    if n > MAX_CLUSTER_SPINS {
        return invalid(format!("cluster search supports at most {MAX_CLUSTER_SPINS} spins"));
    }
    let ent = subset_entropies(state)?;
    let full = (1usize << n) - 1;
    let mut by_low = vec![Vec::new(); n];
    for m in 1..=full {
        if m == full || ent[m] <= threshold {
            by_low[m.trailing_zeros() as usize].push(m);
        }
    }
    for level in 1..=n as u32 {
        let search = Search { n, limit: level, by_low: &by_low };
        let best = by_low[0]
            .par_iter()
            .filter(|&&b| b.count_ones() <= level)
            .filter_map(|&b| {
                let mut chosen = vec![b];
                let mut best = None;
                search.run(full & !b, &mut chosen, &mut best);
                best
            })
            .min();
        if let Some((_, blocks)) = best {
            let entropies = blocks
                .iter()
                .map(|blk| ent[blk.iter().fold(0usize, |m, &q| m | 1 << q)])
                .collect();
            return Ok(ClusterPartition { blocks, entropies, threshold });
        }
    }
    unreachable!("the single-block partition is always feasible")
}
