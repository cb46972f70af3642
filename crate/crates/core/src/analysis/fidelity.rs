use nalgebra::{DMatrix, SymmetricEigen};

use crate::engine::{QuantumState, StateRepr};
use crate::error::Result;
use crate::C64;

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `|<a|b>|^2` for pure states, `<psi|rho|psi>` for a pure and a mixed
/// state, and the Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2` otherwise.
pub fn state_fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.same_size(b)?;
    let f = match (a.repr(), b.repr()) {
        (StateRepr::Pure(x), StateRepr::Pure(y)) => x.dotc(y).norm_sqr(),
        (StateRepr::Pure(x), StateRepr::Density(r)) | (StateRepr::Density(r), StateRepr::Pure(x)) => {
            x.dotc(&(r * x)).re
        }
        (StateRepr::Density(r), StateRepr::Density(s)) => {
            let sr = hermitian_sqrt(r);
            let m = &sr * s * &sr;
            let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            let tr: f64 = SymmetricEigen::new(h).eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
            tr * tr
        }
    };
    Ok(f.clamp(0.0, 1.0))
}
