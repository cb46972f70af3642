use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::config::InteractionModel;
use super::coupling::CouplingMatrix;
use crate::bits::{mask, z_sign};
use crate::error::{invalid, Result};
use crate::C64;

/// Interaction Hamiltonian in rad/s.
///
/// Every supported model is real symmetric in the computational basis, so
/// the matrix and its eigendecomposition are stored as real.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hamiltonian {
    n: usize,
    matrix: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    model: Option<InteractionModel>,
}

pub fn build_hamiltonian(coupling: &CouplingMatrix, model: InteractionModel) -> Hamiltonian {
    let n = coupling.n_spins();
    let dim = 1usize << n;
    let (a_zz, a_flip) = model.pair_coefficients();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        for j in i + 1..n {
            let v = coupling.v[(i, j)];
            if v == 0.0 {
                continue;
            }
            let mi = mask(n, i);
            let mj = mask(n, j);
            for b in 0..dim {
                h[(b, b)] += 0.25 * a_zz * v * z_sign(n, i, b) * z_sign(n, j, b);
                // SxSx + SySy has element 1/2 between states that swap antiparallel spins i, j
                if a_flip != 0.0 && ((b & mi == 0) != (b & mj == 0)) {
                    h[(b ^ mi ^ mj, b)] += 0.5 * a_flip * v;
                }
            }
        }
    }
    Hamiltonian::with_model(n, h, Some(model))
}

impl Hamiltonian {
    /// Wrap a real symmetric matrix on `n` spins.
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return invalid(format!("expected a {dim}x{dim} matrix"));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return invalid("Hamiltonian matrix is not symmetric");
        }
        Ok(Self::with_model(n, matrix, None))
    }

    fn with_model(n: usize, matrix: DMatrix<f64>, model: Option<InteractionModel>) -> Self {
        let eig = SymmetricEigen::new(matrix.clone());
        Hamiltonian {
            n,
            matrix,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            model,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn complex_matrix(&self) -> DMatrix<C64> {
        self.matrix.map(|x| C64::new(x, 0.0))
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn model(&self) -> Option<InteractionModel> {
        self.model
    }

    /// `exp(-i tau H)` as a dense matrix.
    pub fn propagator(&self, tau: f64) -> DMatrix<C64> {
        let v = self.eigenvectors.map(|x| C64::new(x, 0.0));
        let phases = DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * tau)),
        );
        let mut left = v.clone();
        for (k, mut col) in left.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        left * v.adjoint()
    }

    /// Relative reconstruction error of the cached eigendecomposition.
    pub fn reconstruction_error(&self) -> f64 {
        let d = DMatrix::from_diagonal(&self.eigenvalues);
        let rec = &self.eigenvectors * d * self.eigenvectors.transpose();
        (rec - &self.matrix).amax() / self.matrix.amax().max(f64::MIN_POSITIVE)
    }
}
