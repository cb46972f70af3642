use nalgebra::{DMatrix, SymmetricEigen};

use crate::bits::mask;
use crate::engine::{QuantumState, StateRepr};
use crate::error::{invalid, Result};
use crate::C64;

const EIG_FLOOR: f64 = 1e-14;

/// Basis index of `(sub, rest)` where `sub` enumerates the spins of
/// `keep` and `rest` the remaining spins, both in ascending spin order.
fn splice(n: usize, keep: &[usize], rest: &[usize], s: usize, r: usize) -> usize {
    let mut idx = 0;
    for (k, &q) in keep.iter().enumerate() {
        if s >> (keep.len() - 1 - k) & 1 == 1 {
            idx |= mask(n, q);
        }
    }
    for (k, &q) in rest.iter().enumerate() {
        if r >> (rest.len() - 1 - k) & 1 == 1 {
            idx |= mask(n, q);
        }
    }
    idx
}

fn normalized_subset(n: usize, subset: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut keep: Vec<usize> = subset.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return invalid("subset must not be empty");
    }
    if keep.len() == n {
        return invalid("subset must be a proper subset of the spins");
    }
    if let Some(&q) = keep.iter().find(|&&q| q >= n) {
        return invalid(format!("spin index {q} out of range for {n} spins"));
    }
    let rest = (0..n).filter(|q| !keep.contains(q)).collect();
    Ok((keep, rest))
}

/// Reduced density matrix on `subset`, rows ordered by the subset spins
/// with the lowest index most significant.
pub fn reduced_density_matrix(state: &QuantumState, subset: &[usize]) -> Result<DMatrix<C64>> {
    let n = state.n_spins();
    let (keep, rest) = normalized_subset(n, subset)?;
    let ds = 1usize << keep.len();
    let dr = 1usize << rest.len();
    Ok(match state.repr() {
        StateRepr::Pure(psi) => {
            let a = DMatrix::from_fn(ds, dr, |s, r| psi[splice(n, &keep, &rest, s, r)]);
            &a * a.adjoint()
        }
        StateRepr::Density(rho) => DMatrix::from_fn(ds, ds, |s, t| {
            (0..dr)
                .map(|r| rho[(splice(n, &keep, &rest, s, r), splice(n, &keep, &rest, t, r))])
                .sum()
        }),
    })
}

/// `-sum lambda log2 lambda` over the eigenvalues of a Hermitian matrix,
/// ignoring eigenvalues below `1e-14`.
pub fn entropy_of(rho: &DMatrix<C64>) -> f64 {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .filter(|&&l| l > EIG_FLOOR)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Von Neumann entropy in bits of the reduced state on `subset`.
pub fn von_neumann_entropy(state: &QuantumState, subset: &[usize]) -> Result<f64> {
    let n = state.n_spins();
    let (keep, rest) = normalized_subset(n, subset)?;
    // for pure states the smaller side has the same spectrum
    let side = if state.is_pure() && rest.len() < keep.len() { rest } else { keep };
    Ok(entropy_of(&reduced_density_matrix(state, &side)?))
}

/// Entropy of every single spin.
pub fn single_spin_entropies(state: &QuantumState) -> Result<Vec<f64>> {
    (0..state.n_spins()).map(|q| von_neumann_entropy(state, &[q])).collect()
}
