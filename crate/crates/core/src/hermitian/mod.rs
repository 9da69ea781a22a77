//! Almost-Hermitian structures on T⁴: metrics, almost complex structures,
//! Hodge stars and the `J`/`g` splittings of 2-forms.
//!
//! Conventions:
//! - `J` acts on covectors, `J dx¹ = C dx²` etc.; its tangent action is the
//!   negative of the same matrix.
//! - `g(X, Y) = ω(X, JY)`, which for a diagonal structure gives
//!   `g = C⁻¹dx¹² + C dx²² + D⁻¹dx³² + D dx⁴²` and `det g = 1`.
//! - `e1234` is positively oriented; `δ = -*d*` in every degree.

mod acs;
mod families;
mod metric;

pub use acs::{AcsField, SymplecticForm};
pub use families::{build_named_family, smoothstep_cutoff, torus_offset, StructureSpec};
pub use metric::MetricField;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{self, basis_index, KForm};
use crate::grid::{GridSpec, ScalarField};
use crate::pointwise::Mat4;

/// Selects the `+1` or `-1` eigenspace of an involution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `standard_structure`: the flat Kähler triple `(g₀, J₀, ω₀)`.
pub fn standard_structure(grid: GridSpec) -> (MetricField, AcsField, SymplecticForm) {
    (MetricField::flat(grid), AcsField::standard(grid), SymplecticForm::standard())
}

/// `diagonal_acs`.
pub fn diagonal_acs(c: &ScalarField, d: &ScalarField) -> Result<AcsField> {
    AcsField::diagonal(c, d)
}

const COMPATIBILITY_TOL: f64 = 1e-10;

/// `compatible_metric`: `g(·,·) = ω(·, J·)`.
pub fn compatible_metric(omega: &SymplecticForm, j: &AcsField) -> Result<MetricField> {
    let w = omega.matrix();
    let mut mats = Vec::with_capacity(j.grid().len());
    for (node, m) in j.matrices().iter().enumerate() {
        let g = -(w * m);
        let asym = (g - g.transpose()).abs().max();
        if asym > COMPATIBILITY_TOL {
            return Err(Error::InvalidStructure(format!(
                "ω(·,J·) not symmetric at node {node} (|g - gᵀ| = {asym:e})"
            )));
        }
        let sym = (g + g.transpose()) * 0.5;
        let margin = sym.symmetric_eigenvalues().min();
        if margin <= 0.0 {
            return Err(Error::NotTamed { node, margin });
        }
        mats.push(sym);
    }
    MetricField::new(j.grid(), mats)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CompatibilityReport {
    /// `max |J² + Id|`
    pub square_residual: f64,
    /// `max |ω(J·,J·) - ω|` on coefficients
    pub compatibility_residual: f64,
    /// minimum eigenvalue of the symmetric part of `ω(·, J·)` over nodes
    pub tameness_margin: f64,
}

/// `validate_compatible`: diagnostic residuals, never fails.
pub fn validate_compatible(omega: &SymplecticForm, j: &AcsField) -> CompatibilityReport {
    let w = omega.matrix();
    let coeffs = omega.coeffs();
    let mut compat = 0.0f64;
    let mut margin = f64::INFINITY;
    for m in j.matrices() {
        let c = crate::pointwise::compound(m, 2);
        // (Jω)_J = Σ_I ω_I det(M[I,J])
        for col in 0..6 {
            let jw: f64 = (0..6).map(|row| coeffs[row] * c[row * 6 + col]).sum();
            compat = compat.max((jw - coeffs[col]).abs());
        }
        let g: Mat4 = -(w * m);
        let sym = (g + g.transpose()) * 0.5;
        margin = margin.min(sym.symmetric_eigenvalues().min());
    }
    CompatibilityReport {
        square_residual: j.square_residual(),
        compatibility_residual: compat,
        tameness_margin: margin,
    }
}

fn check_two_form(a: &KForm, grid: GridSpec) -> Result<()> {
    if a.degree() != 2 {
        return Err(Error::Degree(format!("expected a 2-form, got degree {}", a.degree())));
    }
    if a.grid() != grid {
        return Err(Error::GridMismatch(a.grid().n(), grid.n()));
    }
    Ok(())
}

/// `j_act`: the involution `α ↦ α(J·, J·)` on 2-forms.
pub fn j_act(j: &AcsField, a: &KForm) -> Result<KForm> {
    check_two_form(a, j.grid())?;
    let grid = a.grid();
    let mut out = vec![0.0; 6 * grid.len()];
    j.lambda2().apply(&a.to_flat(), &mut out);
    Ok(KForm::from_flat(grid, 2, &out))
}

/// `project_J`: `(α ± α(J·,J·)) / 2`.
pub fn project_j(j: &AcsField, a: &KForm, sign: Sign) -> Result<KForm> {
    let ja = j_act(j, a)?;
    Ok(a.add(&ja.scale(sign.value()))?.scale(0.5))
}

/// `hodge_star` for any degree `0..=4`.
pub fn hodge_star(a: &KForm, g: &MetricField) -> Result<KForm> {
    if a.grid() != g.grid() {
        return Err(Error::GridMismatch(a.grid().n(), g.grid().n()));
    }
    let grid = a.grid();
    let k = a.degree();
    let mut out = vec![0.0; exterior::binomial4(4 - k) * grid.len()];
    g.star_matrices(k).apply(&a.to_flat(), &mut out);
    Ok(KForm::from_flat(grid, 4 - k, &out))
}

/// `project_g`: `(α ± *α) / 2` on 2-forms.
pub fn project_g(a: &KForm, g: &MetricField, sign: Sign) -> Result<KForm> {
    check_two_form(a, g.grid())?;
    let sa = hodge_star(a, g)?;
    Ok(a.add(&sa.scale(sign.value()))?.scale(0.5))
}

/// `codifferential`: `δ_g = -*d*`.
pub fn codifferential(a: &KForm, g: &MetricField) -> Result<KForm> {
    if a.degree() == 0 {
        return Err(Error::Degree("codifferential of a 0-form".into()));
    }
    let s = hodge_star(a, g)?;
    let ds = exterior::ext_deriv(&s)?;
    Ok(hodge_star(&ds, g)?.scale(-1.0))
}

/// Pointwise `g`-orthonormal frame `(σ₁, σ₂)` of `Λ_J^-`.
#[derive(Debug, Clone)]
pub struct AntiInvariantFrame {
    grid: GridSpec,
    sigma: [Vec<f64>; 2],
    /// `G σᵢ` with `G` the pointwise Gram matrix on `Λ²`; `⟨β, σᵢ⟩_g = β · dual_i`.
    dual: [Vec<f64>; 2],
}

const FRAME_SEEDS: [u8; 6] = [0b0101, 0b1001, 0b0011, 0b0110, 0b1010, 0b1100];
const FRAME_DEGENERACY: f64 = 1e-10;

/// `anti_invariant_frame`: Gram–Schmidt on `P_J^-(e13)`, `P_J^-(e14)`, with
/// fallbacks `e12`, `e23`, `e24`, `e34` in that order.
pub fn anti_invariant_frame(j: &AcsField, g: &MetricField) -> Result<AntiInvariantFrame> {
    if j.grid() != g.grid() {
        return Err(Error::GridMismatch(j.grid().n(), g.grid().n()));
    }
    let grid = j.grid();
    let n = grid.len();
    let lambda = j.lambda2();
    let gram = g.form_gram(2);
    let mut sigma = [vec![0.0; 6 * n], vec![0.0; 6 * n]];
    let mut dual = [vec![0.0; 6 * n], vec![0.0; 6 * n]];

    for x in 0..n {
        let l = lambda.at(x);
        let gm = gram.at(x);
        let inner = |a: &[f64; 6], b: &[f64; 6]| -> f64 {
            let mut s = 0.0;
            for r in 0..6 {
                for c in 0..6 {
                    s += a[r] * gm[r * 6 + c] * b[c];
                }
            }
            s
        };
        let mut found: Vec<[f64; 6]> = Vec::with_capacity(2);
        for &seed in &FRAME_SEEDS {
            let i = basis_index(seed);
            let mut v = [0.0; 6];
            for r in 0..6 {
                v[r] = 0.5 * ((r == i) as u8 as f64 - l[r * 6 + i]);
            }
            for f in &found {
                let p = inner(&v, f);
                for r in 0..6 {
                    v[r] -= p * f[r];
                }
            }
            let nrm = inner(&v, &v).max(0.0).sqrt();
            if nrm < FRAME_DEGENERACY {
                continue;
            }
            for r in &mut v {
                *r /= nrm;
            }
            found.push(v);
            if found.len() == 2 {
                break;
            }
        }
        if found.len() < 2 {
            return Err(Error::FrameDegenerate(x));
        }
        for (s, f) in found.iter().enumerate() {
            for r in 0..6 {
                sigma[s][r * n + x] = f[r];
                dual[s][r * n + x] = (0..6).map(|c| gm[r * 6 + c] * f[c]).sum();
            }
        }
    }
    Ok(AntiInvariantFrame { grid, sigma, dual })
}

impl AntiInvariantFrame {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn sigma(&self, i: usize) -> KForm {
        KForm::from_flat(self.grid, 2, &self.sigma[i])
    }

    /// Largest componentwise difference between two frames on one grid.
    pub fn max_difference(&self, other: &AntiInvariantFrame) -> f64 {
        if self.grid != other.grid {
            return f64::INFINITY;
        }
        (0..2)
            .flat_map(|i| self.sigma[i].iter().zip(&other.sigma[i]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// `u₁σ₁ + u₂σ₂` as flat 2-form components.
    pub(crate) fn assemble(&self, u1: &[f64], u2: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        for r in 0..6 {
            let (s1, s2) = (&self.sigma[0][r * n..(r + 1) * n], &self.sigma[1][r * n..(r + 1) * n]);
            let o = &mut out[r * n..(r + 1) * n];
            for x in 0..n {
                o[x] = u1[x] * s1[x] + u2[x] * s2[x];
            }
        }
    }

    /// Frame coordinates `⟨β, σᵢ⟩_g` of flat 2-form components.
    pub(crate) fn coordinates(&self, beta: &[f64], u1: &mut [f64], u2: &mut [f64]) {
        let n = self.grid.len();
        u1.fill(0.0);
        u2.fill(0.0);
        for r in 0..6 {
            let b = &beta[r * n..(r + 1) * n];
            let (d1, d2) = (&self.dual[0][r * n..(r + 1) * n], &self.dual[1][r * n..(r + 1) * n]);
            for x in 0..n {
                u1[x] += b[x] * d1[x];
                u2[x] += b[x] * d2[x];
            }
        }
    }

    pub fn form(&self, u1: &ScalarField, u2: &ScalarField) -> KForm {
        let mut out = vec![0.0; 6 * self.grid.len()];
        self.assemble(u1.values(), u2.values(), &mut out);
        KForm::from_flat(self.grid, 2, &out)
    }

    pub fn coords_of(&self, beta: &KForm) -> (ScalarField, ScalarField) {
        let n = self.grid.len();
        let (mut u1, mut u2) = (vec![0.0; n], vec![0.0; n]);
        self.coordinates(&beta.to_flat(), &mut u1, &mut u2);
        (ScalarField::from_raw(self.grid, u1), ScalarField::from_raw(self.grid, u2))
    }
}
