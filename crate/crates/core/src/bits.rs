//! Computational-basis index helpers. Qubit 0 is the most significant bit.

#[inline]
pub(crate) fn mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

/// `+1.0` for spin up (bit 0), `-1.0` for spin down.
#[inline]
pub(crate) fn z_sign(n: usize, q: usize, idx: usize) -> f64 {
    if idx & mask(n, q) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sum of `z_i = +-1` over all spins.
#[inline]
pub(crate) fn magnetization(n: usize, idx: usize) -> i64 {
    n as i64 - 2 * idx.count_ones() as i64
}
