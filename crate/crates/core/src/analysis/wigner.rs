use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::engine::{QuantumState, StateRepr};
use crate::error::{invalid, Result};
use crate::C64;

/// Spherical Wigner function sampled on a Gauss-Legendre (polar) by
/// uniform (azimuthal) grid. `values` is row-major with the polar angle
/// as the slow index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Quadrature weights in `cos(theta)`.
    pub theta_weights: Vec<f64>,
    pub values: Vec<f64>,
    /// Trace of the state projected on the symmetric subspace.
    pub symmetric_trace: f64,
    /// Description of the projection applied before the multipole expansion.
    pub projection: String,
}

impl WignerGrid {
    pub fn value(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.values[i_theta * self.phi.len() + i_phi]
    }

    /// `integral W dOmega` by the grid quadrature.
    pub fn integral(&self) -> f64 {
        let dphi = 2.0 * PI / self.phi.len() as f64;
        self.theta_weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * dphi * (0..self.phi.len()).map(|j| self.value(i, j)).sum::<f64>())
            .sum()
    }

    /// `(theta, phi, value)` at the grid maximum.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let (k, v) = self
            .values
            .iter()
            .cloned()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |a, (k, v)| if v > a.1 { (k, v) } else { a });
        (self.theta[k / self.phi.len()], self.phi[k % self.phi.len()], v)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Projection onto the symmetric subspace in the Dicke basis, index `k`
/// counting down spins (`m = N/2 - k`).
pub fn symmetric_projection(state: &QuantumState) -> DMatrix<C64> {
    let n = state.n_spins();
    let groups: Vec<Vec<usize>> = (0..=n)
        .map(|k| (0..1usize << n).filter(|b| b.count_ones() as usize == k).collect())
        .collect();
    let norms: Vec<f64> = (0..=n).map(|k| binomial(n, k).sqrt()).collect();
    match state.repr() {
        StateRepr::Pure(psi) => {
            let c = DVector::from_fn(n + 1, |k, _| {
                groups[k].iter().map(|&b| psi[b]).sum::<C64>() / norms[k]
            });
            &c * c.adjoint()
        }
        StateRepr::Density(rho) => DMatrix::from_fn(n + 1, n + 1, |k, l| {
            let mut s = C64::new(0.0, 0.0);
            for &a in &groups[k] {
                for &b in &groups[l] {
                    s += rho[(a, b)];
                }
            }
            s / (norms[k] * norms[l])
        }),
    }
}

fn ln_factorial(k: i64) -> f64 {
    (1..=k).map(|x| (x as f64).ln()).sum()
}

/// Wigner 3j symbol with all arguments given as twice their value.
pub fn wigner_3j(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return 0.0;
    }
    if tj3 < (tj1 - tj2).abs() || tj3 > tj1 + tj2 || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i64| x / 2;
    let ln_delta = ln_factorial(h(tj1 + tj2 - tj3)) + ln_factorial(h(tj1 - tj2 + tj3))
        + ln_factorial(h(-tj1 + tj2 + tj3))
        - ln_factorial(h(tj1 + tj2 + tj3) + 1);
    let ln_pref = ln_factorial(h(tj1 + tm1)) + ln_factorial(h(tj1 - tm1)) + ln_factorial(h(tj2 + tm2))
        + ln_factorial(h(tj2 - tm2))
        + ln_factorial(h(tj3 + tm3))
        + ln_factorial(h(tj3 - tm3));
    let t_min = 0.max(h(tj2 - tj3 - tm1)).max(h(tj1 - tj3 + tm2));
    let t_max = h(tj1 + tj2 - tj3).min(h(tj1 - tm1)).min(h(tj2 + tm2));
    let mut sum = 0.0;
    for t in t_min..=t_max {
        let ln_den = ln_factorial(t)
            + ln_factorial(h(tj3 - tj2 + tm1) + t)
            + ln_factorial(h(tj3 - tj1 - tm2) + t)
            + ln_factorial(h(tj1 + tj2 - tj3) - t)
            + ln_factorial(h(tj1 - tm1) - t)
            + ln_factorial(h(tj2 + tm2) - t);
        let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (0.5 * (ln_delta + ln_pref) - ln_den).exp();
    }
    let phase_exp = h(tj1 - tj2 - tm3);
    if phase_exp.rem_euclid(2) == 0 {
        sum
    } else {
        -sum
    }
}

/// Associated Legendre `P_l^m(x)` for `m >= 0`, Condon-Shortley phase included.
fn assoc_legendre(l: usize, m: usize, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm2 = pmm;
    for ll in m + 2..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm2) / (ll - m) as f64;
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

/// Spherical harmonic `Y_l^m(theta, phi)`.
pub fn spherical_harmonic(l: usize, m: i64, theta: f64, phi: f64) -> C64 {
    let am = m.unsigned_abs() as usize;
    if am > l {
        return C64::new(0.0, 0.0);
    }
    let norm = ((2 * l + 1) as f64 / (4.0 * PI)
        * (ln_factorial((l - am) as i64) - ln_factorial((l + am) as i64)).exp())
    .sqrt();
    let y = C64::from_polar(norm * assoc_legendre(l, am, theta.cos()), am as f64 * phi);
    if m >= 0 {
        y
    } else if am % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Gauss-Legendre nodes (descending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Spherical Wigner function of the symmetric-subspace projection of the
/// state, `W = sqrt((2j+1)/4pi) sum_kq rho_kq Y_kq`.
pub fn wigner_distribution(state: &QuantumState, n_theta: usize, n_phi: usize) -> Result<WignerGrid> {
    if n_theta < 2 || n_phi < 2 {
        return invalid("Wigner grid needs at least 2 points per axis");
    }
    let n = state.n_spins() as i64;
    let rho = symmetric_projection(state);
    let tj = n;
    // multipole moments rho_kq = Tr(rho T_kq^dagger)
    let mut moments = Vec::new();
    for k in 0..=n {
        for q in -k..=k {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..=n {
                let tm = tj - 2 * a;
                for b in 0..=n {
                    let tmp = tj - 2 * b;
                    let sign = if ((tj - tm) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    let t = sign * ((2 * k + 1) as f64).sqrt() * wigner_3j(tj, 2 * k, tj, -tm, 2 * q, tmp);
                    if t != 0.0 {
                        s += rho[(a as usize, b as usize)] * t;
                    }
                }
            }
            moments.push((k as usize, q, s));
        }
    }
    let pref = ((tj + 1) as f64 / (4.0 * PI)).sqrt();
    let (x, w) = gauss_legendre(n_theta);
    let theta: Vec<f64> = x.iter().map(|v| v.clamp(-1.0, 1.0).acos()).collect();
    let phi: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
    let mut values = Vec::with_capacity(n_theta * n_phi);
    for &th in &theta {
        for &ph in &phi {
            let v: C64 = moments.iter().map(|&(k, q, r)| r * spherical_harmonic(k, q, th, ph)).sum();
            values.push(pref * v.re);
        }
    }
    Ok(WignerGrid {
        theta,
        phi,
        theta_weights: w,
        values,
        symmetric_trace: rho.trace().re,
        projection: "symmetric (Dicke) subspace".into(),
    })
}
