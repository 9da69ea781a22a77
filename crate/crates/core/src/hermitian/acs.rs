use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::grid::{GridSpec, ScalarField};
use crate::pointwise::{compound, transpose, Mat4, NodeMatrices};

/// Residual tolerance for `J² = -Id` at construction.
pub const SQUARE_TOL: f64 = 1e-10;

/// Almost complex structure stored by its action on covectors:
/// row `i` of the node matrix holds `J dx^i = Σ_j M_ij dx^j`.
///
/// The covector action is `ξ ↦ ξ ∘ J⁻¹`, so the tangent action is `-M`.
#[derive(Debug)]
pub struct AcsField {
    grid: GridSpec,
    m: Vec<Mat4>,
    lambda2: OnceLock<NodeMatrices>,
}

impl Clone for AcsField {
    fn clone(&self) -> Self {
        Self { grid: self.grid, m: self.m.clone(), lambda2: OnceLock::new() }
    }
}

impl AcsField {
    /// Checked constructor: rejects nodes where `J² ≠ -Id`.
    pub fn new(grid: GridSpec, m: Vec<Mat4>) -> Result<Self> {
        let field = Self::from_matrices_unchecked(grid, m)?;
        let r = field.square_residual();
        if r > SQUARE_TOL {
            return Err(Error::InvalidStructure(format!("|J² + Id| = {r:e}")));
        }
        Ok(field)
    }

    /// Accepts arbitrary node matrices; meant for diagnostics on corrupted input.
    pub fn from_matrices_unchecked(grid: GridSpec, m: Vec<Mat4>) -> Result<Self> {
        if m.len() != grid.len() {
            return Err(Error::Format(format!("structure has {} nodes, grid {}", m.len(), grid.len())));
        }
        Ok(Self { grid, m, lambda2: OnceLock::new() })
    }

    /// `J dx¹ = C dx², J dx² = -C⁻¹ dx¹, J dx³ = D dx⁴, J dx⁴ = -D⁻¹ dx³`.
    pub fn diagonal(c: &ScalarField, d: &ScalarField) -> Result<Self> {
        let grid = c.grid();
        if d.grid() != grid {
            return Err(Error::GridMismatch(grid.n(), d.grid().n()));
        }
        let mut m = Vec::with_capacity(grid.len());
        for x in 0..grid.len() {
            let (cv, dv) = (c.values()[x], d.values()[x]);
            if !(cv > 0.0 && dv > 0.0 && cv.is_finite() && dv.is_finite()) {
                return Err(Error::InvalidStructure(format!(
                    "C = {cv}, D = {dv} at node {x}; both must be positive"
                )));
            }
            let mut j = Mat4::zeros();
            j[(0, 1)] = cv;
            j[(1, 0)] = -1.0 / cv;
            j[(2, 3)] = dv;
            j[(3, 2)] = -1.0 / dv;
            m.push(j);
        }
        Self::new(grid, m)
    }

    pub fn standard(grid: GridSpec) -> Self {
        let one = ScalarField::constant(grid, 1.0);
        Self::diagonal(&one, &one).expect("J0 is valid")
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn at(&self, node: usize) -> &Mat4 {
        &self.m[node]
    }

    pub fn matrices(&self) -> &[Mat4] {
        &self.m
    }

    /// Apply `J` to a 1-form.
    pub fn apply_one_form(&self, a: &KForm) -> Result<KForm> {
        if a.degree() != 1 {
            return Err(Error::Degree(format!("expected a 1-form, got degree {}", a.degree())));
        }
        let n = self.grid.len();
        let src = a.to_flat();
        let mut out = vec![0.0; 4 * n];
        for x in 0..n {
            let m = &self.m[x];
            for i in 0..4 {
                for j in 0..4 {
                    out[j * n + x] += src[i * n + x] * m[(i, j)];
                }
            }
        }
        Ok(KForm::from_flat(self.grid, 1, &out))
    }

    /// Induced action on 2-form components: `(Jα)_J = Σ_I α_I det(M[I,J])`.
    pub fn lambda2(&self) -> &NodeMatrices {
        self.lambda2.get_or_init(|| {
            NodeMatrices::from_fn(self.grid.len(), 6, 6, |x| transpose(&compound(&self.m[x], 2), 6))
        })
    }

    /// `max |J² + Id|` over nodes and entries.
    pub fn square_residual(&self) -> f64 {
        self.m.iter().map(|j| (j * j + Mat4::identity()).abs().max()).fold(0.0, f64::max)
    }

    /// Sup-norm distance between node matrices.
    pub fn sup_distance(&self, other: &AcsField) -> f64 {
        self.m.iter().zip(&other.m).map(|(a, b)| (a - b).abs().max()).fold(0.0, f64::max)
    }
}

/// A constant symplectic 2-form on T⁴.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticForm {
    coeffs: [f64; 6],
}

impl SymplecticForm {
    /// Rejects degenerate forms (`ω ∧ ω = 0`).
    pub fn new(coeffs: [f64; 6]) -> Result<Self> {
        let w = Self { coeffs };
        if w.pfaffian().abs() < 1e-12 {
            return Err(Error::InvalidStructure("symplectic form is degenerate".into()));
        }
        Ok(w)
    }

    /// `ω₀ = e12 + e34`.
    pub fn standard() -> Self {
        Self { coeffs: [1.0, 0.0, 0.0, 0.0, 0.0, 1.0] }
    }

    pub fn coeffs(&self) -> [f64; 6] {
        self.coeffs
    }

    /// `ω ∧ ω = 2·pf(ω) e1234`.
    pub fn pfaffian(&self) -> f64 {
        let [w12, w13, w14, w23, w24, w34] = self.coeffs;
        w12 * w34 - w13 * w24 + w14 * w23
    }

    /// Antisymmetric matrix `W_ij = ω(∂_i, ∂_j)`.
    pub fn matrix(&self) -> Mat4 {
        let [w12, w13, w14, w23, w24, w34] = self.coeffs;
        Mat4::new(
            0.0, w12, w13, w14, //
            -w12, 0.0, w23, w24, //
            -w13, -w23, 0.0, w34, //
            -w14, -w24, -w34, 0.0,
        )
    }

    pub fn to_form(&self, grid: GridSpec) -> KForm {
        KForm::constant(grid, 2, &self.coeffs).expect("six coefficients")
    }
}
