//! Small dense helpers shared by the trainers.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Threshold activation. A zero field maps to -1.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else {
        -1
    }
}
