use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::engine::{Axis, QuantumState};
use crate::error::{invalid, Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// `|+x>^N`
    Css,
    /// `(|+x>^N + |-x>^N)/sqrt 2`
    GhzX,
    /// `(|+y>^N + i |-y>^N)/sqrt 2`, Heisenberg limited for the `J_y` signal
    /// with z readout.
    GhzY,
    /// `(|0>^N + |1>^N)/sqrt 2`
    GhzZ,
    /// Symmetric z-basis state with `floor(N/2)` spins down.
    Dicke,
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "css" => Ok(ReferenceKind::Css),
            "ghz-x" => Ok(ReferenceKind::GhzX),
            "ghz-y" => Ok(ReferenceKind::GhzY),
            "ghz-z" => Ok(ReferenceKind::GhzZ),
            "dicke" => Ok(ReferenceKind::Dicke),
            other => invalid(format!("unknown reference state '{other}'")),
        }
    }
}

fn eigen_pair(axis: Axis) -> ([C64; 2], [C64; 2]) {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    match axis {
        Axis::X => ([h, h], [h, -h]),
        Axis::Y => ([h, C64::new(0.0, FRAC_1_SQRT_2)], [h, C64::new(0.0, -FRAC_1_SQRT_2)]),
        Axis::Z => ([l, o], [o, l]),
    }
}

/// `(|+a>^N + phase |-a>^N)`, normalized.
pub fn ghz_along(axis: Axis, n: usize, phase: C64) -> Result<QuantumState> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let (up, down) = eigen_pair(axis);
    let a = QuantumState::product(n, up[0], up[1]);
    let b = QuantumState::product(n, down[0], down[1]);
    let v = a.amplitudes().unwrap() + b.amplitudes().unwrap() * phase;
    QuantumState::pure_normalized(n, v)
}

/// Symmetric z-basis state with `k` spins down.
pub fn dicke_state(n: usize, k: usize) -> Result<QuantumState> {
    if n == 0 || k > n {
        return invalid(format!("no Dicke state with n = {n}, k = {k}"));
    }
    let v = DVector::from_fn(1 << n, |b, _| {
        if b.count_ones() as usize == k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    QuantumState::pure_normalized(n, v)
}

pub fn reference_state(kind: ReferenceKind, n: usize) -> Result<QuantumState> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        ReferenceKind::Css => Ok(QuantumState::product(n, h, h)),
        ReferenceKind::GhzX => ghz_along(Axis::X, n, C64::new(1.0, 0.0)),
        ReferenceKind::GhzY => ghz_along(Axis::Y, n, C64::new(0.0, 1.0)),
        ReferenceKind::GhzZ => ghz_along(Axis::Z, n, C64::new(1.0, 0.0)),
        ReferenceKind::Dicke => dicke_state(n, n / 2),
    }
}
