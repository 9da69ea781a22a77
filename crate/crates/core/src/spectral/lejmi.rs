//! Lejmi's operator `P ψ = P_J^-(d δ_g ψ)` on sections of `Λ_J^-`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::eigen::SymmetricOperator;
use crate::error::{Error, Result};
use crate::exterior::{d_flat, KForm};
use crate::grid::{self, GridSpec, ScalarField};
use crate::hermitian::{anti_invariant_frame, AcsField, AntiInvariantFrame, MetricField};
use crate::pointwise::Mat4;
use crate::reduce;

const FRAME_MATCH_TOL: f64 = 1e-12;

/// `ψ = u₁σ₁ + u₂σ₂` in a fixed anti-invariant frame.
#[derive(Debug, Clone)]
pub struct AntiInvariantSection {
    frame: Arc<AntiInvariantFrame>,
    u1: ScalarField,
    u2: ScalarField,
}

impl AntiInvariantSection {
    pub fn new(frame: Arc<AntiInvariantFrame>, u1: ScalarField, u2: ScalarField) -> Result<Self> {
        let g = frame.grid();
        for u in [&u1, &u2] {
            if u.grid() != g {
                return Err(Error::GridMismatch(u.grid().n(), g.n()));
            }
        }
        Ok(Self { frame, u1, u2 })
    }

    pub fn zero(frame: Arc<AntiInvariantFrame>) -> Self {
        let g = frame.grid();
        Self { frame, u1: ScalarField::zeros(g), u2: ScalarField::zeros(g) }
    }

    pub fn grid(&self) -> GridSpec {
        self.frame.grid()
    }

    pub fn frame(&self) -> &Arc<AntiInvariantFrame> {
        &self.frame
    }

    pub fn u1(&self) -> &ScalarField {
        &self.u1
    }

    pub fn u2(&self) -> &ScalarField {
        &self.u2
    }

    /// The 2-form `u₁σ₁ + u₂σ₂`.
    pub fn to_form(&self) -> KForm {
        self.frame.form(&self.u1, &self.u2)
    }

    /// Stacked coordinates `[u₁; u₂]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.u1.values().to_vec();
        v.extend_from_slice(self.u2.values());
        v
    }

    pub fn from_flat(frame: Arc<AntiInvariantFrame>, v: &[f64]) -> Result<Self> {
        let n = frame.grid().len();
        if v.len() != 2 * n {
            return Err(Error::Format(format!("section vector has length {}, expected {}", v.len(), 2 * n)));
        }
        let g = frame.grid();
        let u1 = ScalarField::from_vec(g, v[..n].to_vec())?;
        let u2 = ScalarField::from_vec(g, v[n..].to_vec())?;
        Ok(Self { frame, u1, u2 })
    }
}

/// Matrix-free Lejmi operator for one `(J, g)`.
///
/// As a [`SymmetricOperator`] it acts on `v = (det g)^{1/4} u`, which makes
/// the `L²(g)` pairing Euclidean, restricted to Nyquist-free coordinates.
#[derive(Debug)]
pub struct LejmiOperator {
    grid: GridSpec,
    metric: MetricField,
    frame: Arc<AntiInvariantFrame>,
    root_weight: Vec<f64>,
    mean_inverse: Mat4,
}

impl LejmiOperator {
    pub fn new(j: &AcsField, g: &MetricField) -> Result<Self> {
        let frame = Arc::new(anti_invariant_frame(j, g)?);
        let metric = g.clone();
        let root_weight = metric.sqrt_det().values().iter().map(|w| w.sqrt()).collect();
        let mean_inverse = metric.mean_inverse();
        Ok(Self { grid: g.grid(), metric, frame, root_weight, mean_inverse })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn frame(&self) -> &Arc<AntiInvariantFrame> {
        &self.frame
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    /// `δ_g ψ = -*d*ψ` on flat 2-form components.
    fn codifferential_flat(&self, psi: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let mut s = vec![0.0; 6 * n];
        self.metric.star_matrices(2).apply(psi, &mut s);
        let mut ds = vec![0.0; 4 * n];
        d_flat(self.grid, 2, &s, &mut ds);
        let mut out = vec![0.0; 4 * n];
        self.metric.star_matrices(3).apply(&ds, &mut out);
        reduce::scale(-1.0, &mut out);
        out
    }

    /// `P` on stacked frame coordinates.
    fn apply_coords(&self, u: &[f64], out: &mut [f64]) {
        let n = self.grid.len();
        let mut psi = vec![0.0; 6 * n];
        self.frame.assemble(&u[..n], &u[n..], &mut psi);
        let delta = self.codifferential_flat(&psi);
        let mut beta = vec![0.0; 6 * n];
        d_flat(self.grid, 1, &delta, &mut beta);
        let (o1, o2) = out.split_at_mut(n);
        self.frame.coordinates(&beta, o1, o2);
    }

    fn check_frame(&self, psi: &AntiInvariantSection) -> Result<()> {
        if Arc::ptr_eq(&self.frame, psi.frame()) {
            return Ok(());
        }
        let diff = self.frame.max_difference(psi.frame());
        if diff > FRAME_MATCH_TOL {
            return Err(Error::InvalidStructure(format!(
                "section frame does not match (J, g): difference {diff:e}"
            )));
        }
        Ok(())
    }

    /// `P ψ` on the full coordinate space (no Nyquist restriction).
    pub fn apply_section(&self, psi: &AntiInvariantSection) -> Result<AntiInvariantSection> {
        self.check_frame(psi)?;
        let mut out = vec![0.0; 2 * self.grid.len()];
        self.apply_coords(&psi.to_flat(), &mut out);
        AntiInvariantSection::from_flat(self.frame.clone(), &out)
    }

    /// `δ_g ψ` as a 1-form.
    pub fn codifferential_of(&self, psi: &AntiInvariantSection) -> Result<KForm> {
        self.check_frame(psi)?;
        Ok(KForm::from_flat(self.grid, 1, &self.codifferential_flat(&psi.to_form().to_flat())))
    }

    /// `L²(g)` pairing of two sections: `∫ (a₁b₁ + a₂b₂) dvol_g`.
    pub fn section_inner(&self, a: &AntiInvariantSection, b: &AntiInvariantSection) -> f64 {
        let w = self.metric.sqrt_det().values();
        let prod: Vec<f64> = (0..self.grid.len())
            .map(|x| w[x] * (a.u1.values()[x] * b.u1.values()[x] + a.u2.values()[x] * b.u2.values()[x]))
            .collect();
        reduce::pairwise_sum(&prod) / self.grid.len() as f64
    }

    /// Section represented by a solver vector.
    pub fn section_from_vector(&self, v: &[f64]) -> Result<AntiInvariantSection> {
        let n = self.grid.len();
        let u: Vec<f64> = v.iter().enumerate().map(|(i, x)| x / self.root_weight[i % n]).collect();
        AntiInvariantSection::from_flat(self.frame.clone(), &u)
    }

    /// Principal symbol of `P + shift` at wavevector `m` (flat mean metric).
    fn symbol(&self, shift: f64, m: [i64; 4]) -> f64 {
        let mut q = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                q += m[a] as f64 * self.mean_inverse[(a, b)] * m[b] as f64;
            }
        }
        2.0 * PI * PI * q + shift
    }
}

impl SymmetricOperator for LejmiOperator {
    fn dim(&self) -> usize {
        2 * self.grid.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.grid.len();
        let mut u = x.to_vec();
        self.restrict(&mut u);
        for (i, v) in u.iter_mut().enumerate() {
            *v /= self.root_weight[i % n];
        }
        self.apply_coords(&u, y);
        for (i, v) in y.iter_mut().enumerate() {
            *v *= self.root_weight[i % n];
        }
        self.restrict(y);
    }

    fn precondition(&self, shift: f64, r: &[f64], z: &mut [f64]) {
        let n = self.grid.len();
        z.copy_from_slice(r);
        let half = self.grid.n() as i64 / 2;
        let (a, b) = z.split_at_mut(n);
        grid::apply_even_multiplier_pair(self.grid, a, Some(b), &|m| {
            if m.iter().any(|&k| k.abs() == half) {
                0.0
            } else {
                1.0 / self.symbol(shift, m)
            }
        });
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

/// `lejmi_apply`: `P ψ` for the structure `(J, g)`; the section's frame
/// must be the anti-invariant frame of `(J, g)`.
pub fn lejmi_apply(psi: &AntiInvariantSection, j: &AcsField, g: &MetricField) -> Result<AntiInvariantSection> {
    let op = LejmiOperator::new(j, g)?;
    op.apply_section(psi)
}
