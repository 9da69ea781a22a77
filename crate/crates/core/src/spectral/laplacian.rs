//! Galerkin Hodge Laplacian on 2-forms.
//!
//! On the Nyquist-free subspace `V` of coordinate 2-forms the quadratic form
//!
//! `a(α, α) = ‖dα‖²_{M₃} + ‖δ_V α‖²_{M̄₁}`,
//!
//! with `M₂, M₃` the exact pointwise `L²(g)` Gram matrices and `δ_V` the
//! `M₂`-adjoint of `d` into Nyquist-free 1-forms measured by the
//! constant-coefficient mass `M̄₁` (mean inverse metric, mean volume), gives
//! the pencil `(K, M₂)`. Its kernel is exactly the `M₂`-orthogonal complement
//! of the exact forms inside the closed forms, i.e. the discrete harmonic
//! forms, of dimension 6 for every metric. For constant metrics `K = M₂ Δ_g`.

use std::f64::consts::PI;

use super::eigen::SymmetricOperator;
use crate::exterior::{d_flat, d_transpose_flat};
use crate::grid::{self, GridSpec};
use crate::hermitian::MetricField;
use crate::pointwise::{compound, Mat4, NodeMatrices};

#[derive(Debug)]
pub struct HodgeLaplacian {
    grid: GridSpec,
    m2: NodeMatrices,
    m3: NodeMatrices,
    /// Inverse of the constant 1-form mass.
    m1_inv: [f64; 16],
    /// Inverse of the constant 2-form mass used by the preconditioner.
    m2_mean_inv: [f64; 36],
    mean_inverse: Mat4,
}

fn weighted(gram: &NodeMatrices, w: &[f64]) -> NodeMatrices {
    let dim = gram.rows();
    NodeMatrices::from_fn(w.len(), dim, dim, |x| gram.at(x).iter().map(|v| v * w[x]).collect())
}

/// `y = A x` per node for a constant `dim x dim` matrix on component-major data.
fn apply_constant(a: &[f64], dim: usize, x: &[f64], y: &mut [f64]) {
    let n = x.len() / dim;
    y.fill(0.0);
    for r in 0..dim {
        for c in 0..dim {
            let coef = a[r * dim + c];
            if coef == 0.0 {
                continue;
            }
            let (src, dst) = (&x[c * n..(c + 1) * n], &mut y[r * n..(r + 1) * n]);
            for (d, s) in dst.iter_mut().zip(src) {
                *d += coef * s;
            }
        }
    }
}

fn to_array<const L: usize>(m: &nalgebra::DMatrix<f64>) -> [f64; L] {
    let dim = m.nrows();
    let mut out = [0.0; L];
    for r in 0..dim {
        for c in 0..dim {
            out[r * dim + c] = m[(r, c)];
        }
    }
    out
}

impl HodgeLaplacian {
    pub fn new(g: &MetricField) -> Self {
        let grid = g.grid();
        let w = g.sqrt_det().values();
        let m2 = weighted(g.form_gram(2), w);
        let m3 = weighted(g.form_gram(3), w);
        let mean_inverse = g.mean_inverse();
        let vol = g.sqrt_det().mean();
        let m1 = nalgebra::DMatrix::from_fn(4, 4, |r, c| mean_inverse[(r, c)] * vol);
        let m1_inv = to_array::<16>(&m1.try_inverse().expect("SPD mean metric"));
        let c2 = compound(&mean_inverse, 2);
        let m2_mean = nalgebra::DMatrix::from_fn(6, 6, |r, c| c2[r * 6 + c] * vol);
        let m2_mean_inv = to_array::<36>(&m2_mean.try_inverse().expect("SPD mean metric"));
        Self { grid, m2, m3, m1_inv, m2_mean_inv, mean_inverse }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }
}

impl SymmetricOperator for HodgeLaplacian {
    fn dim(&self) -> usize {
        6 * self.grid.len()
    }

    fn apply(&self, a: &[f64], y: &mut [f64]) {
        let n = self.grid.len();
        let mut x = a.to_vec();
        self.restrict(&mut x);

        // δ_V part: M₂ d M̄₁⁻¹ Π dᵀ M₂ x
        let mut t = vec![0.0; 6 * n];
        self.m2.apply(&x, &mut t);
        let mut s = vec![0.0; 4 * n];
        d_transpose_flat(self.grid, 1, &t, &mut s);
        for c in s.chunks_exact_mut(n) {
            grid::remove_nyquist(self.grid, c);
        }
        let mut s2 = vec![0.0; 4 * n];
        apply_constant(&self.m1_inv, 4, &s, &mut s2);
        d_flat(self.grid, 1, &s2, &mut t);
        self.m2.apply(&t, y);

        // d part: dᵀ M₃ d x
        let mut b = vec![0.0; 4 * n];
        d_flat(self.grid, 2, &x, &mut b);
        let mut b2 = vec![0.0; 4 * n];
        self.m3.apply(&b, &mut b2);
        d_transpose_flat(self.grid, 2, &b2, &mut t);
        for (yi, ti) in y.iter_mut().zip(&t) {
            *yi += ti;
        }
        self.restrict(y);
    }

    fn has_mass(&self) -> bool {
        true
    }

    fn apply_mass(&self, a: &[f64], y: &mut [f64]) {
        let mut x = a.to_vec();
        self.restrict(&mut x);
        self.m2.apply(&x, y);
        self.restrict(y);
    }

    fn precondition(&self, shift: f64, r: &[f64], z: &mut [f64]) {
        let n = self.grid.len();
        apply_constant(&self.m2_mean_inv, 6, r, z);
        let half = self.grid.n() as i64 / 2;
        let h = self.mean_inverse;
        let symbol = |m: [i64; 4]| {
            if m.iter().any(|&k| k.abs() == half) {
                return 0.0;
            }
            let mut q = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    q += m[a] as f64 * h[(a, b)] * m[b] as f64;
                }
            }
            1.0 / (4.0 * PI * PI * q + shift)
        };
        for pair in z.chunks_exact_mut(2 * n) {
            let (p, q) = pair.split_at_mut(n);
            grid::apply_even_multiplier_pair(self.grid, p, Some(q), &symbol);
        }
    }

    fn restrict(&self, x: &mut [f64]) {
        let n = self.grid.len();
        for c in x.chunks_exact_mut(n) {
            grid::remove_nyquist(self.grid, c);
        }
    }

    fn resolution(&self) -> usize {
        self.grid.n()
    }
}
