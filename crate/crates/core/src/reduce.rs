//! Deterministic reductions.
//!
//! Every sum in the crate goes through [`pairwise_sum`] or [`dot`]. The
//! association order depends only on the slice length, never on how many
//! worker threads exist, so results are bitwise reproducible.

const LEAF: usize = 64;

/// Pairwise (tree) summation with a fixed split point at each level.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise-summed dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    dot_rec(a, b)
}

fn dot_rec(a: &[f64], b: &[f64]) -> f64 {
    if a.len() <= LEAF {
        let mut acc = 0.0;
        for (x, y) in a.iter().zip(b) {
            acc += x * y;
        }
        return acc;
    }
    let mid = a.len() / 2;
    dot_rec(&a[..mid], &b[..mid]) + dot_rec(&a[mid..], &b[mid..])
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= alpha;
    }
}
