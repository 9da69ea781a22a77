//! Named families of ω₀-compatible diagonal structures.

use std::f64::consts::PI;

use serde::Serialize;

use super::AcsField;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

/// Structure selector with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum StructureSpec {
    /// `J₀`.
    Standard,
    /// `C = e^{(s-t)/2}`, `D = e^{-(s+t)/2}` with `s = sin 2π(x¹+x³)`, `t = sin 2π(x¹+x⁴)`.
    Example,
    /// Same profile scaled by `1/k`.
    Tk { k: f64 },
    /// Profile multiplied by a radial cutoff around `center`: 1 inside
    /// `r_inner`, 0 outside `r_outer`, quintic smoothstep in between.
    Localized { r_inner: f64, r_outer: f64, center: [f64; 4] },
    /// `C = D ≡ 1`, the `k → ∞` end of the `Tk` family.
    Limit,
}

impl StructureSpec {
    pub fn label(&self) -> String {
        match self {
            StructureSpec::Standard => "standard".into(),
            StructureSpec::Example => "example".into(),
            StructureSpec::Tk { k } => format!("tk(k={k})"),
            StructureSpec::Localized { r_inner, r_outer, .. } => {
                format!("localized(r_inner={r_inner},r_outer={r_outer})")
            }
            StructureSpec::Limit => "limit".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StructureSpec::Tk { k } if !(k >= 1.0 && k.is_finite()) => {
                Err(Error::InvalidStructure(format!("tk needs k >= 1, got {k}")))
            }
            StructureSpec::Localized { r_inner, r_outer, center } => {
                if !(r_inner > 0.0 && r_inner < r_outer && r_outer <= 0.5) {
                    return Err(Error::InvalidStructure(format!(
                        "localized needs 0 < r_inner < r_outer <= 1/2, got {r_inner}, {r_outer}"
                    )));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidStructure("center must be finite".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Exponent pair `(log C, log D)` at a point.
    fn log_cd(&self, x: [f64; 4]) -> (f64, f64) {
        let s = |x: [f64; 4]| (2.0 * PI * (x[0] + x[2])).sin();
        let t = |x: [f64; 4]| (2.0 * PI * (x[0] + x[3])).sin();
        let profile = |x: [f64; 4], amp: f64| (0.5 * amp * (s(x) - t(x)), -0.5 * amp * (s(x) + t(x)));
        match *self {
            StructureSpec::Standard | StructureSpec::Limit => (0.0, 0.0),
            StructureSpec::Example => profile(x, 1.0),
            StructureSpec::Tk { k } => profile(x, 1.0 / k),
            StructureSpec::Localized { r_inner, r_outer, center } => {
                let xi = torus_offset(x, center);
                let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let phi = smoothstep_cutoff(r, r_inner, r_outer);
                if phi == 0.0 {
                    (0.0, 0.0)
                } else {
                    profile(xi, phi)
                }
            }
        }
    }

    /// The coefficient fields `(C, D)` of the diagonal structure.
    pub fn coefficients(&self, grid: GridSpec) -> Result<(ScalarField, ScalarField)> {
        self.validate()?;
        let c = ScalarField::sample(grid, |x| self.log_cd(x).0.exp())?;
        let d = ScalarField::sample(grid, |x| self.log_cd(x).1.exp())?;
        Ok((c, d))
    }
}

/// Minimal-image offset `x - center` with components in `[-1/2, 1/2)`.
pub fn torus_offset(x: [f64; 4], center: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let d = x[i] - center[i];
        out[i] = d - (d + 0.5).floor();
    }
    out
}

/// `1` for `r ≤ inner`, `0` for `r ≥ outer`, C² quintic smoothstep in between.
pub fn smoothstep_cutoff(r: f64, inner: f64, outer: f64) -> f64 {
    if r <= inner {
        1.0
    } else if r >= outer {
        0.0
    } else {
        let s = (outer - r) / (outer - inner);
        s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }
}

/// `build_named_family`.
pub fn build_named_family(grid: GridSpec, spec: &StructureSpec) -> Result<AcsField> {
    let (c, d) = spec.coefficients(grid)?;
    AcsField::diagonal(&c, &d)
}
