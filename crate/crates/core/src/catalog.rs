//! Closed-form fields and 2-forms attached to the deformed structure on T⁴.
//!
//! `A = e^{sin 2π(x¹+x³)}`, `B = e^{sin 2π(x¹+x⁴)}`, `c_A = ∫ 1/(1+A)`,
//! `c_B = ∫ 1/(1+B)`, and the self-dual / anti-self-dual harmonic forms
//! `ω₁, ω₂, α₁, α₂` built from them.

use std::f64::consts::PI;

use crate::error::Result;
use crate::exterior::{constant_form, KForm};
use crate::grid::{GridSpec, ScalarField};

pub const E12: u8 = 0b0011;
pub const E13: u8 = 0b0101;
pub const E14: u8 = 0b1001;
pub const E23: u8 = 0b0110;
pub const E24: u8 = 0b1010;
pub const E34: u8 = 0b1100;

pub fn amplitude_a(grid: GridSpec) -> Result<ScalarField> {
    ScalarField::sample(grid, |x| (2.0 * PI * (x[0] + x[2])).sin().exp())
}

pub fn amplitude_b(grid: GridSpec) -> Result<ScalarField> {
    ScalarField::sample(grid, |x| (2.0 * PI * (x[0] + x[3])).sin().exp())
}

/// `1/(1+f)`.
fn reciprocal_shift(f: &ScalarField) -> ScalarField {
    f.map(|v| 1.0 / (1.0 + v))
}

/// Sum of monomials `coeff · e^mask`.
pub fn combine(grid: GridSpec, terms: &[(&ScalarField, u8)]) -> KForm {
    let mut out = KForm::zero(grid, 2);
    for (coeff, mask) in terms {
        out = out.add(&KForm::monomial((*coeff).clone(), *mask)).expect("same grid");
    }
    out
}

/// All named quantities of the deformed example at one resolution.
#[derive(Debug, Clone)]
pub struct ExampleForms {
    pub a: ScalarField,
    pub b: ScalarField,
    pub c_a: f64,
    pub c_b: f64,
    pub omega0: KForm,
    pub alpha0: KForm,
    pub omega1: KForm,
    pub alpha1: KForm,
    pub omega2: KForm,
    pub alpha2: KForm,
}

impl ExampleForms {
    pub fn new(grid: GridSpec) -> Result<Self> {
        let a = amplitude_a(grid)?;
        let b = amplitude_b(grid)?;
        let fa = reciprocal_shift(&a);
        let fb = reciprocal_shift(&b);
        let c_a = fa.mean();
        let c_b = fb.mean();
        let omega0 = constant_form(grid, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0])?;
        let alpha0 = constant_form(grid, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0])?;
        let fa_c = fa.map(|v| v - c_a);
        let fb_c = fb.map(|v| v - c_b);
        let fa_a = fa.mul(&a);
        let fb_b = fb.mul(&b);
        let neg = |f: &ScalarField| f.scale(-1.0);

        // ω₁ = (1/(1+A) - c_A) ω₀ + 1/(1+A) (e14 + A e23)
        let omega1 = omega0.times(&fa_c).add(&combine(grid, &[(&fa, E14), (&fa_a, E23)]))?;
        // α₁ = (c_A - 1/(1+A)) α₀ + 1/(1+A) (e14 - A e23); with the opposite
        // sign on the first term dα₁ = 2 (1/(1+A))' (e123 - e134) ≠ 0
        let alpha1 = alpha0.times(&neg(&fa_c)).add(&combine(grid, &[(&fa, E14), (&neg(&fa_a), E23)]))?;
        // ω₂ = (1/(1+B) - c_B) ω₀ + 1/(1+B) (B e13 - e24)
        let omega2 = omega0.times(&fb_c).add(&combine(grid, &[(&fb_b, E13), (&neg(&fb), E24)]))?;
        // α₂ = (c_B - 1/(1+B)) α₀ + 1/(1+B) (B e13 + e24)
        let alpha2 = alpha0.times(&neg(&fb_c)).add(&combine(grid, &[(&fb_b, E13), (&fb, E24)]))?;

        Ok(Self { a, b, c_a, c_b, omega0, alpha0, omega1, alpha1, omega2, alpha2 })
    }

    /// `a = ∫ (B-1)/(B+1)`.
    pub fn a_value(&self) -> f64 {
        self.b.map(|v| (v - 1.0) / (v + 1.0)).mean()
    }

    /// `b = ∫ (A-1)/(A+1)`.
    pub fn b_value(&self) -> f64 {
        self.a.map(|v| (v - 1.0) / (v + 1.0)).mean()
    }
}

/// Constant 2-form from six coefficients in basis order.
pub fn constant2(grid: GridSpec, coeffs: [f64; 6]) -> KForm {
    constant_form(grid, 2, &coeffs).expect("six coefficients")
}
