use crate::engine::CircuitParams;

/// Dimensionless preparation time `f_dd * sum_i (tau_i + tau'_i)`.
pub fn preparation_time(params: &CircuitParams, f_dd_hz: f64) -> f64 {
    f_dd_hz * params.total_time()
}

/// Preparation time in seconds from its dimensionless value.
pub fn preparation_seconds(fdd_t: f64, f_dd_hz: f64) -> f64 {
    fdd_t / f_dd_hz
}
