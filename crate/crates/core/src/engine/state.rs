use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StateRepr {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// Pure amplitude vector or density operator on `n` spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    n: usize,
    repr: StateRepr,
}

const NORM_TOL: f64 = 1e-10;
const MIN_EIG_TOL: f64 = -1e-9;

impl QuantumState {
    pub fn pure(n: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_len(n, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return invalid(format!("state norm {norm} differs from 1"));
        }
        Ok(QuantumState { n, repr: StateRepr::Pure(amplitudes) })
    }

    /// Normalize and wrap an arbitrary nonzero vector.
    pub fn pure_normalized(n: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_len(n, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        Ok(QuantumState { n, repr: StateRepr::Pure(amplitudes / C64::new(norm, 0.0)) })
    }

    pub fn density(n: usize, rho: DMatrix<C64>) -> Result<Self> {
        if !rho.is_square() {
            return invalid("density matrix must be square");
        }
        check_len(n, rho.nrows())?;
        let s = QuantumState { n, repr: StateRepr::Density(rho) };
        s.validate()?;
        Ok(s)
    }

    #[allow(dead_code)]
    pub(crate) fn from_pure_unchecked(n: usize, amplitudes: DVector<C64>) -> Self {
        QuantumState { n, repr: StateRepr::Pure(amplitudes) }
    }

    pub(crate) fn from_density_unchecked(n: usize, rho: DMatrix<C64>) -> Self {
        QuantumState { n, repr: StateRepr::Density(rho) }
    }

    /// `|0...0>`, all spins up along z.
    pub fn all_up(n: usize) -> Self {
        let mut v = DVector::zeros(1 << n);
        v[0] = C64::new(1.0, 0.0);
        QuantumState { n, repr: StateRepr::Pure(v) }
    }

    /// Product of identical single-spin amplitudes `(a, b)`.
    pub fn product(n: usize, a: C64, b: C64) -> Self {
        let dim = 1usize << n;
        let v = DVector::from_fn(dim, |idx, _| {
            let ones = idx.count_ones() as i32;
            a.powi(n as i32 - ones) * b.powi(ones)
        });
        QuantumState { n, repr: StateRepr::Pure(v) }
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub(crate) fn repr_mut(&mut self) -> &mut StateRepr {
        &mut self.repr
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            StateRepr::Pure(v) => Some(v),
            StateRepr::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.repr {
            StateRepr::Pure(v) => v * v.adjoint(),
            StateRepr::Density(r) => r.clone(),
        }
    }

    pub fn to_density(&self) -> Self {
        QuantumState { n: self.n, repr: StateRepr::Density(self.density_matrix()) }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(v) => v.norm_squared(),
            StateRepr::Density(r) => r.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            StateRepr::Pure(v) => v.norm_squared().powi(2),
            StateRepr::Density(r) => r.iter().map(|x| x.norm_sqr()).sum(),
        }
    }

    /// Diagonal of the state in the computational basis.
    pub fn z_probabilities(&self) -> Vec<f64> {
        match &self.repr {
            StateRepr::Pure(v) => v.iter().map(|a| a.norm_sqr()).collect(),
            StateRepr::Density(r) => (0..r.nrows()).map(|k| r[(k, k)].re).collect(),
        }
    }

    /// `<O>` for a Hermitian operator given as a dense matrix.
    pub fn expectation(&self, op: &DMatrix<C64>) -> Result<f64> {
        check_len(self.n, op.nrows())?;
        Ok(match &self.repr {
            StateRepr::Pure(v) => v.dotc(&(op * v)).re,
            StateRepr::Density(r) => (op * r).trace().re,
        })
    }

    /// Check normalization and, for densities, Hermiticity and positivity.
    pub fn validate(&self) -> Result<()> {
        match &self.repr {
            StateRepr::Pure(v) => {
                let norm = v.norm();
                if (norm - 1.0).abs() > NORM_TOL {
                    return invalid(format!("state norm {norm} differs from 1"));
                }
            }
            StateRepr::Density(r) => {
                let tr = r.trace();
                if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
                    return invalid(format!("density trace {tr} differs from 1"));
                }
                let herm = (r - r.adjoint()).iter().fold(0.0f64, |m, x| m.max(x.norm()));
                if herm > NORM_TOL {
                    return invalid(format!("density matrix not Hermitian ({herm:e})"));
                }
                let min = min_eigenvalue(r);
                if min < MIN_EIG_TOL {
                    return invalid(format!("density matrix has eigenvalue {min:e}"));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn same_size(&self, other: &QuantumState) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }
}

pub(crate) fn min_eigenvalue(r: &DMatrix<C64>) -> f64 {
    let h = (r + r.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check_len(n: usize, len: usize) -> Result<()> {
    if n == 0 || n >= usize::BITS as usize {
        return invalid(format!("unsupported spin count {n}"));
    }
    let dim = 1usize << n;
    if len != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: len });
    }
    Ok(())
}
