//! Harmonic 2-forms, their self-dual/anti-self-dual split, and projections.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::eigen::smallest_eigenpairs;
use super::laplacian::HodgeLaplacian;
use super::{SpectralParams, SpectrumReport};
use crate::error::{Error, Result};
use crate::exterior::{ext_deriv, integrate_top, l2_inner, wedge, KForm};
use crate::grid::GridSpec;
use crate::hermitian::{codifferential, MetricField};

/// Second Betti number of T⁴.
pub const B2: usize = 6;

/// Closedness bound accepted by [`harmonic_projection`].
pub const CLOSED_TOL: f64 = 1e-8;

/// `L²(g)`-orthonormal harmonic 2-forms, self-dual ones first.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    metric: MetricField,
    forms: Vec<KForm>,
    b_plus: usize,
    b_minus: usize,
    star_eigenvalues: Vec<f64>,
    report: SpectrumReport,
}

impl HarmonicBasis {
    pub fn forms(&self) -> &[KForm] {
        &self.forms
    }

    pub fn self_dual(&self) -> &[KForm] {
        &self.forms[..self.b_plus]
    }

    pub fn anti_self_dual(&self) -> &[KForm] {
        &self.forms[self.b_plus..]
    }

    pub fn b_plus(&self) -> usize {
        self.b_plus
    }

    pub fn b_minus(&self) -> usize {
        self.b_minus
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn report(&self) -> &SpectrumReport {
        &self.report
    }

    /// Eigenvalues of `*_g` restricted to the harmonic space, in basis order.
    pub fn star_eigenvalues(&self) -> &[f64] {
        &self.star_eigenvalues
    }

    /// `max |μ ∓ 1|` over the `*_g` eigenvalues.
    pub fn star_residual(&self) -> f64 {
        self.star_eigenvalues.iter().map(|&m| (m.abs() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `L²(g)` Gram matrix of the basis (row-major).
    pub fn gram(&self) -> Vec<f64> {
        let k = self.forms.len();
        let mut out = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                out[i * k + j] = l2_inner(&self.forms[i], &self.forms[j], &self.metric).expect("same grid");
            }
        }
        out
    }

    /// `max_i ‖d hᵢ‖_∞`.
    pub fn d_residual(&self) -> f64 {
        self.forms.iter().map(|h| ext_deriv(h).expect("2-form").max_abs()).fold(0.0, f64::max)
    }

    /// `max_i ‖δ_g hᵢ‖_∞`.
    pub fn delta_residual(&self) -> f64 {
        self.forms
            .iter()
            .map(|h| codifferential(h, &self.metric).expect("2-form").max_abs())
            .fold(0.0, f64::max)
    }

    /// Distance of `α` from the span of `forms` in `L²(g)`, relative to `‖α‖`.
    pub fn span_residual(&self, alpha: &KForm, forms: &[KForm]) -> Result<f64> {
        let mut rest = alpha.clone();
        for h in forms {
            let c = l2_inner(alpha, h, &self.metric)?;
            rest = rest.sub(&h.scale(c))?;
        }
        let num = l2_inner(&rest, &rest, &self.metric)?.max(0.0).sqrt();
        let den = l2_inner(alpha, alpha, &self.metric)?.sqrt();
        Ok(if den > 0.0 { num / den } else { num })
    }
}

/// `(∫ aᵢ ∧ aⱼ)` for 2-forms.
fn cup_matrix(forms: &[KForm]) -> Result<DMatrix<f64>> {
    let k = forms.len();
    let mut q = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = integrate_top(&wedge(&forms[i], &forms[j])?)?;
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    Ok(q)
}

fn combination(grid: GridSpec, forms: &[KForm], coeffs: impl Iterator<Item = f64>) -> KForm {
    let mut out = KForm::zero(grid, 2);
    for (f, c) in forms.iter().zip(coeffs) {
        out = out.add(&f.scale(c)).expect("same grid");
    }
    out
}

/// `harmonic_basis`: kernel of the Galerkin Hodge Laplacian on 2-forms, split
/// by diagonalizing the cup product (equivalently `*_g`) on it.
pub fn harmonic_basis(g: &MetricField, grid: GridSpec, params: &SpectralParams) -> Result<HarmonicBasis> {
    if g.grid() != grid {
        return Err(Error::GridMismatch(g.grid().n(), grid.n()));
    }
    if params.count <= B2 {
        return Err(Error::Config(format!(
            "harmonic_basis needs more than {B2} eigenpairs to see the gap, got {}",
            params.count
        )));
    }
    let op = HodgeLaplacian::new(g);
    let pairs = smallest_eigenpairs(&op, &params.eigen_options_with(params.laplacian_inner_steps))?;
    let report = pairs.report;
    if report.kernel_dim != B2 {
        return Err(Error::HarmonicDimension { found: report.kernel_dim, expected: B2 });
    }
    // solver vectors are M-orthonormal for the summed mass; rescale to mean
    let s = (grid.len() as f64).sqrt();
    let raw: Vec<KForm> = pairs.vectors[..B2].iter().map(|v| KForm::from_flat(grid, 2, v).scale(s)).collect();

    let cup = cup_matrix(&raw)?;
    let eig = SymmetricEigen::new(cup);
    let mut order: Vec<usize> = (0..B2).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut forms = Vec::with_capacity(B2);
    let mut star_eigenvalues = Vec::with_capacity(B2);
    for &i in &order {
        let col = eig.eigenvectors.column(i);
        forms.push(combination(grid, &raw, col.iter().copied()));
        star_eigenvalues.push(eig.eigenvalues[i]);
    }
    let b_plus = star_eigenvalues.iter().filter(|&&m| m > 0.0).count();
    Ok(HarmonicBasis { metric: g.clone(), forms, b_plus, b_minus: B2 - b_plus, star_eigenvalues, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicProjection {
    /// `⟨α, hᵢ⟩_{L²(g)}` in basis order.
    pub coefficients: Vec<f64>,
    #[serde(skip)]
    pub harmonic_part: KForm,
    #[serde(skip)]
    pub remainder: KForm,
    /// `max_i |∫ ρ ∧ hᵢ|`.
    pub cup_residual: f64,
    /// `‖dρ‖_∞`.
    pub remainder_closedness: f64,
}

/// `harmonic_projection`: `α = Σ cᵢhᵢ + ρ` with `ρ` exact.
pub fn harmonic_projection(alpha: &KForm, basis: &HarmonicBasis) -> Result<HarmonicProjection> {
    if alpha.degree() != 2 {
        return Err(Error::Degree(format!("harmonic_projection needs a 2-form, got degree {}", alpha.degree())));
    }
    let closed = ext_deriv(alpha)?.max_abs();
    if !(closed < CLOSED_TOL) {
        return Err(Error::NotClosed(closed));
    }
    let grid = alpha.grid();
    let coefficients: Vec<f64> =
        basis.forms.iter().map(|h| l2_inner(alpha, h, &basis.metric)).collect::<Result<_>>()?;
    let harmonic_part = combination(grid, &basis.forms, coefficients.iter().copied());
    let remainder = alpha.sub(&harmonic_part)?;
    let mut cup_residual = 0.0f64;
    for h in &basis.forms {
        cup_residual = cup_residual.max(integrate_top(&wedge(&remainder, h)?)?.abs());
    }
    let remainder_closedness = ext_deriv(&remainder)?.max_abs();
    Ok(HarmonicProjection { coefficients, harmonic_part, remainder, cup_residual, remainder_closedness })
}

/// Coefficients `c` with `[α] = Σ cⱼ [fⱼ]` in cohomology, from cup products
/// `Σⱼ cⱼ ∫fⱼ∧f_k = ∫α∧f_k`. The representatives must be closed and their
/// cup-product matrix nonsingular.
pub fn cohomology_coefficients(alpha: &KForm, reps: &[KForm]) -> Result<Vec<f64>> {
    let q = cup_matrix(reps)?;
    let rhs: Vec<f64> = reps
        .iter()
        .map(|f| integrate_top(&wedge(alpha, f)?))
        .collect::<Result<_>>()?;
    let lu = q.lu();
    let sol = lu
        .solve(&DVector::from_vec(rhs))
        .ok_or_else(|| Error::InvalidStructure("cup-product matrix of representatives is singular".into()))?;
    Ok(sol.iter().copied().collect())
}
