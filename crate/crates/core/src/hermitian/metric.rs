use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::exterior::{basis, wedge_sign};
use crate::grid::{GridSpec, ScalarField};
use crate::pointwise::{compound, matmul, transpose, Mat4, NodeMatrices};

/// Pointwise symmetric positive-definite covariant metric `g_ij`.
#[derive(Debug)]
pub struct MetricField {
    grid: GridSpec,
    g: Vec<Mat4>,
    sqrt_det: ScalarField,
    tables: OnceLock<Tables>,
}

#[derive(Debug)]
struct Tables {
    gram: Vec<NodeMatrices>,
    star: Vec<NodeMatrices>,
}

impl Clone for MetricField {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            g: self.g.clone(),
            sqrt_det: self.sqrt_det.clone(),
            tables: OnceLock::new(),
        }
    }
}

const SYMMETRY_TOL: f64 = 1e-12;

impl MetricField {
    pub fn new(grid: GridSpec, g: Vec<Mat4>) -> Result<Self> {
        if g.len() != grid.len() {
            return Err(Error::Format(format!("metric has {} nodes, grid {}", g.len(), grid.len())));
        }
        let mut sqrt_det = Vec::with_capacity(g.len());
        for (node, m) in g.iter().enumerate() {
            let asym = (m - m.transpose()).abs().max();
            if asym > SYMMETRY_TOL * (1.0 + m.abs().max()) || !m.iter().all(|v| v.is_finite()) {
                return Err(Error::NotPositiveDefinite(node));
            }
            let chol = m.cholesky().ok_or(Error::NotPositiveDefinite(node))?;
            let l = chol.l();
            sqrt_det.push(l.diagonal().product());
        }
        Ok(Self { grid, g, sqrt_det: ScalarField::from_raw(grid, sqrt_det), tables: OnceLock::new() })
    }

    pub fn flat(grid: GridSpec) -> Self {
        Self::new(grid, vec![Mat4::identity(); grid.len()]).expect("identity is SPD")
    }

    /// Diagonal metric `Σ d_i dx^i ⊗ dx^i`.
    pub fn diagonal(diag: [&ScalarField; 4]) -> Result<Self> {
        let grid = diag[0].grid();
        let g = (0..grid.len())
            .map(|x| Mat4::from_diagonal(&nalgebra::Vector4::new(
                diag[0].values()[x],
                diag[1].values()[x],
                diag[2].values()[x],
                diag[3].values()[x],
            )))
            .collect();
        Self::new(grid, g)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn at(&self, node: usize) -> &Mat4 {
        &self.g[node]
    }

    pub fn matrices(&self) -> &[Mat4] {
        &self.g
    }

    /// Component `g_ij` (0-based indices) as a scalar field.
    pub fn component(&self, i: usize, j: usize) -> ScalarField {
        ScalarField::from_raw(self.grid, self.g.iter().map(|m| m[(i, j)]).collect())
    }

    /// Volume density `√det g`.
    pub fn sqrt_det(&self) -> &ScalarField {
        &self.sqrt_det
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.g.iter().map(|m| m * c).collect())
    }

    /// Sup-norm distance between two metrics on the same grid.
    pub fn sup_distance(&self, other: &MetricField) -> f64 {
        self.g.iter().zip(&other.g).map(|(a, b)| (a - b).abs().max()).fold(0.0, f64::max)
    }

    /// Node average of the inverse metric, used for constant-coefficient operators.
    pub fn mean_inverse(&self) -> Mat4 {
        let mut acc = Mat4::zeros();
        for m in &self.g {
            acc += m.try_inverse().expect("SPD");
        }
        acc / self.g.len() as f64
    }

    fn tables(&self) -> &Tables {
        self.tables.get_or_init(|| build_tables(self))
    }

    /// Pointwise Gram matrices `⟨e^I, e^J⟩_g` on `Λᵏ` (no volume factor).
    pub fn form_gram(&self, k: usize) -> &NodeMatrices {
        &self.tables().gram[k]
    }

    /// Pointwise Hodge star matrices `Λᵏ → Λ⁴⁻ᵏ` on coordinate components.
    pub fn star_matrices(&self, k: usize) -> &NodeMatrices {
        &self.tables().star[k]
    }
}

/// Flat star on an oriented orthonormal frame: `*θ^J = ε_J θ^{J^c}` with
/// `θ^J ∧ *θ^J = θ^1234`. Row-major `C(4,4-k) x C(4,k)`.
pub(crate) fn flat_star(k: usize) -> Vec<f64> {
    let src = basis(k);
    let dst = basis(4 - k);
    let mut s = vec![0.0; src.len() * dst.len()];
    for (c, &j) in src.iter().enumerate() {
        let comp = 0b1111 & !j;
        let r = dst.iter().position(|&m| m == comp).unwrap();
        s[r * src.len() + c] = wedge_sign(j, comp) as f64;
    }
    s
}

fn build_tables(metric: &MetricField) -> Tables {
    let nodes = metric.grid.len();
    let inv: Vec<Mat4> = metric.g.iter().map(|m| m.try_inverse().expect("SPD")).collect();
    // Cholesky of the inverse metric: g⁻¹ = L Lᵀ, orthonormal coframe θ = L⁻¹ dx.
    let lower: Vec<Mat4> = inv.iter().map(|h| h.cholesky().expect("SPD").l()).collect();
    let frame: Vec<Mat4> = lower.iter().map(|l| l.try_inverse().expect("triangular")).collect();

    let gram = (0..=4)
        .map(|k| {
            let dim = basis(k).len();
            NodeMatrices::from_fn(nodes, dim, dim, |x| compound(&inv[x], k))
        })
        .collect();

    let star = (0..=4)
        .map(|k| {
            let (dk, dc) = (basis(k).len(), basis(4 - k).len());
            let flat = flat_star(k);
            NodeMatrices::from_fn(nodes, dc, dk, |x| {
                // coordinate -> frame components: α' = C_k(L)ᵀ α
                let to_frame = transpose(&compound(&lower[x], k), dk);
                // frame -> coordinate components: β = C_{4-k}(E)ᵀ β'
                let from_frame = transpose(&compound(&frame[x], 4 - k), dc);
                let s = matmul(&flat, &to_frame, dc, dk, dk);
                matmul(&from_frame, &s, dc, dc, dk)
            })
        })
        .collect();

    Tables { gram, star }
}
