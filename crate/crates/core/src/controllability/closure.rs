use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pauli::{pauli_coefficients, pauli_matrix};
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Which commutators feed each extension round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureStrategy {
    /// `C = [O, B] u [B, B]` with `O` the accepted elements and `B` the
    /// elements added in the previous round.
    AllPairs,
    /// `C = [G, B]` with `G` the generators. Nested brackets of generators
    /// span the generated algebra, so the result is the same.
    Generators,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosureOptions {
    /// A candidate is new when its residual after projection on the current
    /// span exceeds this. Candidates are brackets of unit elements, so this
    /// is relative to the scale of the inputs.
    pub tol: f64,
    /// Candidates with a smaller Pauli-coefficient norm count as zero.
    pub norm_floor: f64,
    pub strategy: ClosureStrategy,
    /// Stop after this many extension rounds and report a lower bound.
    pub max_rounds: Option<usize>,
    /// Stop after evaluating this many commutators and report a lower bound.
    pub max_candidates: Option<usize>,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            tol: 1e-9,
            norm_floor: 1e-10,
            strategy: ClosureStrategy::AllPairs,
            max_rounds: None,
            max_candidates: None,
        }
    }
}

/// Orthonormal basis of a dynamical Lie algebra. Element `k` stands for
/// `-i H_k` with `H_k = sum_P basis[k]_P P` Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieClosure {
    pub n: usize,
    pub basis: Vec<DVector<f64>>,
    /// `false` when a budget stopped the search; the dimension is then a lower bound.
    pub complete: bool,
    pub rounds: usize,
    pub candidates: usize,
}

impl LieClosure {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Weight of the identity string in the span.
    pub fn identity_weight(&self) -> f64 {
        self.basis.iter().map(|b| b[0] * b[0]).sum::<f64>().sqrt()
    }

    pub fn contains_identity(&self) -> bool {
        (self.identity_weight() - 1.0).abs() < 1e-9
    }

    /// Dimension of the span with the identity direction removed.
    pub fn dim_without_identity(&self) -> usize {
        if self.contains_identity() {
            self.dimension() - 1
        } else {
            self.dimension()
        }
    }

    /// Dimension of the span with the identity direction added, the `u(2^n)` convention.
    pub fn dim_with_identity(&self) -> usize {
        self.dim_without_identity() + 1
    }

    /// Hermitian matrix of element `k`.
    pub fn element(&self, k: usize) -> DMatrix<C64> {
        pauli_matrix(&self.basis[k], self.n)
    }
}

struct Span {
    basis: Vec<DVector<f64>>,
    tol: f64,
    floor: f64,
}

impl Span {
    fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
        }
        r
    }

    /// Extend the basis by a maximal independent subset of `cands` and
    /// return the indices taken, in order.
    ///
    /// Candidates are brackets of unit elements (or unit generators), so
    /// residuals are compared with `tol` on that common scale. Selection is
    /// greedy on the largest residual, as in column-pivoted QR: a direction
    /// is taken from its best-conditioned representative, which keeps the
    /// rounding error of the new basis vector small.
    fn extend(&mut self, cands: &[DVector<f64>]) -> Vec<usize> {
        let mut res: Vec<Option<DVector<f64>>> = cands
            .iter()
            .map(|v| (v.norm() >= self.floor).then(|| self.residual(v)))
            .collect();
        let mut taken = Vec::new();
        let full = cands.first().map_or(0, |v| v.len());
        while self.basis.len() < full {
            let best = res
                .iter()
                .enumerate()
                .filter_map(|(i, r)| r.as_ref().map(|r| (i, r.norm())))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            let Some((i, rn)) = best else { break };
            if rn <= self.tol {
                break;
            }
            let r = res[i].take().unwrap();
            let q = self.residual(&(r / rn));
            let q = &q / q.norm();
            for r in res.iter_mut().flatten() {
                for _ in 0..2 {
                    let c = q.dot(r);
                    r.axpy(-c, &q, 1.0);
                }
            }
            self.basis.push(q);
            taken.push(i);
        }
        taken
    }
}

/// `i [A, B]` in Pauli coefficients.
fn bracket(a: &DMatrix<C64>, b: &DMatrix<C64>, n: usize) -> DVector<f64> {
    let c = (a * b - b * a) * C64::new(0.0, 1.0);
    pauli_coefficients(&c, n).expect("commutator of Hermitian matrices is Hermitian")
}

const CHUNK: usize = 1024;

/// Dynamical Lie algebra generated by `{-i H_k}`.
///
/// Each round brackets the elements found in the previous round with the
/// accepted ones (or with the generators, see [`ClosureStrategy`]) and keeps
/// a maximal independent subset. The search ends when a round adds nothing
/// or the span fills `u(2^n)`.
pub fn lie_closure(generators: &[DMatrix<C64>], n: usize, opts: &ClosureOptions) -> Result<LieClosure> {
    if !(1..=5).contains(&n) {
        return invalid(format!("Lie closure supports 1 to 5 spins, got {n}"));
    }
    if generators.is_empty() {
        return invalid("at least one generator is required");
    }
    if !(opts.tol > 0.0 && opts.norm_floor > 0.0) {
        return invalid("closure tolerances must be positive");
    }
    let full = 1usize << (2 * n);
    let mut span = Span { basis: Vec::new(), tol: opts.tol, floor: opts.norm_floor };
    // brackets are taken between unit-normalized nested commutators rather
    // than the orthonormalized residuals, which carry amplified rounding
    let mut mats: Vec<DMatrix<C64>> = Vec::new();
    for g in generators {
        let c = pauli_coefficients(g, n).map_err(|e| match e {
            Error::InvalidArgument(_) => Error::InvalidArgument("non-Hermitian generator".into()),
            other => other,
        })?;
        let norm = c.norm();
        if norm < opts.norm_floor {
            continue;
        }
        let unit = c / norm;
        if !span.extend(std::slice::from_ref(&unit)).is_empty() {
            mats.push(pauli_matrix(&unit, n));
        }
    }
    let n_gen = mats.len();
    // `o_end`: end of O, `b_end`: end of B within `mats`
    let mut o_end = 0;
    let mut b_end = mats.len();
    let mut rounds = 0;
    let mut candidates = 0;
    let mut complete = true;
    while b_end > o_end && span.basis.len() < full {
        if opts.max_rounds.is_some_and(|r| rounds >= r) {
            complete = false;
            break;
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        match opts.strategy {
            ClosureStrategy::AllPairs => {
                for j in o_end..b_end {
                    for i in 0..j {
                        pairs.push((i, j));
                    }
                }
            }
            ClosureStrategy::Generators => {
                for j in o_end..b_end {
                    for i in 0..n_gen {
                        if i != j {
                            pairs.push((i, j));
                        }
                    }
                }
            }
        }
        let mut budget_hit = false;
        for chunk in pairs.chunks(CHUNK) {
            if span.basis.len() >= full {
                break;
            }
            let chunk = match opts.max_candidates {
                Some(cap) if candidates + chunk.len() > cap => {
                    budget_hit = true;
                    &chunk[..cap - candidates]
                }
                _ => chunk,
            };
            let cands: Vec<DVector<f64>> = chunk.par_iter().map(|&(i, j)| bracket(&mats[i], &mats[j], n)).collect();
            candidates += chunk.len();
            for i in span.extend(&cands) {
                mats.push(pauli_matrix(&(&cands[i] / cands[i].norm()), n));
            }
            if budget_hit {
                break;
            }
        }
        rounds += 1;
        o_end = b_end;
        b_end = mats.len();
        if budget_hit {
            complete = false;
            break;
        }
    }
    Ok(LieClosure { n, basis: span.basis, complete, rounds, candidates })
}
