//! Adaptive Dormand-Prince 5(4) integrator for complex vector ODEs.

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Copy, Debug)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance { rtol: 1e-8, atol: 1e-10, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1`, returning `y(t1)`.
pub fn integrate<F>(f: F, t0: f64, t1: f64, y0: Vec<C64>, tol: OdeTolerance) -> Result<Vec<C64>>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    if t1 < t0 || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Numerical(format!("bad integration interval [{t0}, {t1}]")));
    }
    let len = y0.len();
    let mut y = y0;
    if t1 == t0 || len == 0 {
        return Ok(y);
    }
    let zero = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![zero; len]).collect();
    let mut tmp = vec![zero; len];
    let mut y_new = vec![zero; len];

    let span = t1 - t0;
    let mut t = t0;
    f(t, &y, &mut k[0]);
    let mut h = initial_step(&y, &k[0], span, &tol);
    let mut steps = 0usize;

    while t < t1 {
        if steps >= tol.max_steps {
            return Err(Error::Numerical(format!("integrator exceeded {} steps at t = {t}", tol.max_steps)));
        }
        steps += 1;
        if t + h > t1 {
            h = t1 - t;
        }
        stage(&y, &[(&k[0], A21)], h, &mut tmp);
        f(t + C2 * h, &tmp, &mut k[1]);
        stage(&y, &[(&k[0], A31), (&k[1], A32)], h, &mut tmp);
        f(t + C3 * h, &tmp, &mut k[2]);
        stage(&y, &[(&k[0], A41), (&k[1], A42), (&k[2], A43)], h, &mut tmp);
        f(t + C4 * h, &tmp, &mut k[3]);
        stage(&y, &[(&k[0], A51), (&k[1], A52), (&k[2], A53), (&k[3], A54)], h, &mut tmp);
        f(t + C5 * h, &tmp, &mut k[4]);
        stage(&y, &[(&k[0], A61), (&k[1], A62), (&k[2], A63), (&k[3], A64), (&k[4], A65)], h, &mut tmp);
        f(t + h, &tmp, &mut k[5]);
        stage(&y, &[(&k[0], B1), (&k[2], B3), (&k[3], B4), (&k[4], B5), (&k[5], B6)], h, &mut y_new);
        f(t + h, &y_new, &mut k[6]);

        let mut err_sq = 0.0;
        for i in 0..len {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / sc).powi(2);
        }
        let err = (err_sq / len as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite integrator error at t = {t}")));
        }
        if err <= 1.0 {
            t = if t1 - (t + h) < 1e-15 * span.abs() { t1 } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
        if err > 1.0 && h < 1e-14 * span {
            return Err(Error::Numerical(format!("integrator step underflow at t = {t}")));
        }
    }
    Ok(y)
}

fn stage(y: &[C64], terms: &[(&Vec<C64>, f64)], h: f64, out: &mut [C64]) {
    out.copy_from_slice(y);
    for (kv, a) in terms {
        let ha = h * a;
        for (o, x) in out.iter_mut().zip(kv.iter()) {
            *o += ha * x;
        }
    }
}

fn initial_step(y: &[C64], dy: &[C64], span: f64, tol: &OdeTolerance) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (a, b) in y.iter().zip(dy) {
        let sc = tol.atol + tol.rtol * a.norm();
        d0 += (a.norm() / sc).powi(2);
        d1 += (b.norm() / sc).powi(2);
    }
    let n = y.len() as f64;
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(span).max(1e-12 * span)
}
