use serde::Serialize;

use super::eigen::smallest_eigenpairs;
use super::harmonic::{harmonic_basis, B2};
use super::kernel::{kernel_dimension, KernelVerdict};
use super::lejmi::{AntiInvariantSection, LejmiOperator};
use super::{SpectralParams, SpectrumReport};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hermitian::{compatible_metric, AcsField, SymplecticForm};

/// Result of [`h_j_minus`].
#[derive(Debug, Clone)]
pub struct HjMinus {
    pub h_minus: usize,
    pub verdict: KernelVerdict,
    pub report: SpectrumReport,
    /// Computed kernel sections (closed anti-invariant forms), one per counted dimension.
    pub kernel: Vec<AntiInvariantSection>,
}

/// `h_j_minus`: kernel dimension of Lejmi's operator for `(ω, J)`.
pub fn h_j_minus(omega: &SymplecticForm, j: &AcsField, grid: GridSpec, params: &SpectralParams) -> Result<HjMinus> {
    if j.grid() != grid {
        return Err(Error::GridMismatch(j.grid().n(), grid.n()));
    }
    let g = compatible_metric(omega, j)?;
    let op = LejmiOperator::new(j, &g)?;
    let pairs = smallest_eigenpairs(&op, &params.eigen_options())?;
    let verdict = kernel_dimension(&pairs.report, &params.policy);
    let kernel = pairs.vectors[..verdict.kernel_dim]
        .iter()
        .map(|v| op.section_from_vector(v))
        .collect::<Result<_>>()?;
    Ok(HjMinus { h_minus: verdict.kernel_dim, verdict, report: pairs.report, kernel })
}

#[derive(Debug, Clone, Serialize)]
pub struct CohomologyReport {
    pub n: usize,
    pub h_minus: usize,
    pub h_plus: usize,
    pub b_plus: usize,
    pub b_minus: usize,
    /// `b^+ - h^-`; negative values are inconsistent and flagged.
    pub dim_h_perp: i64,
    pub confident: bool,
    pub flags: Vec<String>,
    pub star_eigenvalues: Vec<f64>,
    pub lejmi: SpectrumReport,
    pub laplacian: SpectrumReport,
}

/// `cohomology_report`.
pub fn cohomology_report(
    omega: &SymplecticForm,
    j: &AcsField,
    grid: GridSpec,
    params: &SpectralParams,
) -> Result<CohomologyReport> {
    let hj = h_j_minus(omega, j, grid, params)?;
    let g = compatible_metric(omega, j)?;
    let basis = harmonic_basis(&g, grid, params)?;
    let (b_plus, b_minus) = (basis.b_plus(), basis.b_minus());
    let h_minus = hj.h_minus;
    let h_plus = (B2 as i64 - h_minus as i64).max(0) as usize;
    let dim_h_perp = b_plus as i64 - h_minus as i64;

    let mut flags: Vec<String> = hj.verdict.flags.iter().map(|f| format!("lejmi: {f}")).collect();
    flags.extend(basis.report().flags.iter().map(|f| format!("laplacian: {f}")));
    if h_minus > b_plus {
        flags.push("h_minus_exceeds_b_plus".into());
    }
    if h_plus < b_minus {
        flags.push("h_plus_below_b_minus".into());
    }
    Ok(CohomologyReport {
        n: grid.n(),
        h_minus,
        h_plus,
        b_plus,
        b_minus,
        dim_h_perp,
        confident: flags.is_empty(),
        flags,
        star_eigenvalues: basis.star_eigenvalues().to_vec(),
        lejmi: hj.report,
        laplacian: basis.report().clone(),
    })
}
