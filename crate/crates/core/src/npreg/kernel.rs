//! The single kernel shape used across the crate.

/// Tricube weight `(1 - |u|^3)^3` on `[-1, 1]`, zero outside.
#[inline(always)]
pub fn tricube(u: f64) -> f64 {
    let a = u.abs();
    if a >= 1.0 {
        return 0.0;
    }
    let t = 1.0 - a * a * a;
    t * t * t
}
