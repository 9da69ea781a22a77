//! Numerical kernel dimension from a computed low spectrum.

use serde::Serialize;

use super::SpectrumReport;

/// Threshold policy for counting zero eigenvalues.
///
/// `kernel_dim = #{λ < τ}` with `τ = relative_threshold · max(λ_m, 1)`.
/// A verdict is confident when the gap ratio exceeds `min_gap_ratio`, no
/// eigenvalue lies in the gray band `[τ/band_factor, τ·band_factor]`, the
/// window contains at least one non-kernel eigenvalue, and (for several
/// resolutions) all verdicts agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPolicy {
    pub relative_threshold: f64,
    pub min_gap_ratio: f64,
    pub band_factor: f64,
    pub floor: f64,
}

impl Default for KernelPolicy {
    fn default() -> Self {
        Self { relative_threshold: 1e-6, min_gap_ratio: 100.0, band_factor: 100.0, floor: 1e-14 }
    }
}

pub const FLAG_SMALL_GAP: &str = "gap_ratio_below_minimum";
pub const FLAG_GRAY_BAND: &str = "eigenvalue_near_threshold";
pub const FLAG_FULL_WINDOW: &str = "kernel_fills_window";
pub const FLAG_DISAGREE: &str = "resolutions_disagree";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelVerdict {
    pub kernel_dim: usize,
    pub confident: bool,
    /// `λ_{k+1} / max(λ_k, floor)`, with `λ_0 = 0`; 0 when undefined.
    pub gap_ratio: f64,
    pub threshold: f64,
    pub flags: Vec<String>,
}

/// `kernel_dimension` for one report.
pub fn kernel_dimension(report: &SpectrumReport, policy: &KernelPolicy) -> KernelVerdict {
    let lam = &report.eigenvalues;
    let top = lam.last().copied().unwrap_or(0.0);
    let tau = policy.relative_threshold * top.max(1.0);
    let k = lam.iter().filter(|&&l| l < tau).count();
    let mut flags = Vec::new();

    let gap_ratio = if k < lam.len() {
        let below = if k == 0 { 0.0 } else { lam[k - 1] };
        lam[k] / below.max(policy.floor)
    } else {
        flags.push(FLAG_FULL_WINDOW.to_string());
        0.0
    };
    if k < lam.len() && !(gap_ratio > policy.min_gap_ratio) {
        flags.push(FLAG_SMALL_GAP.to_string());
    }
    let (lo, hi) = (tau / policy.band_factor, tau * policy.band_factor);
    if lam.iter().any(|&l| l >= lo && l <= hi) {
        flags.push(FLAG_GRAY_BAND.to_string());
    }
    KernelVerdict { kernel_dim: k, confident: flags.is_empty(), gap_ratio, threshold: tau, flags }
}

/// Verdict across several resolutions: the finest report's count, confident
/// only when every report is confident and all counts agree.
pub fn kernel_dimension_multi(reports: &[SpectrumReport], policy: &KernelPolicy) -> Option<KernelVerdict> {
    let verdicts: Vec<(usize, KernelVerdict)> =
        reports.iter().map(|r| (r.n, kernel_dimension(r, policy))).collect();
    let (_, finest) = verdicts.iter().max_by_key(|(n, _)| *n)?.clone();
    let mut out = finest;
    out.flags.clear();
    let mut agree = true;
    for (n, v) in &verdicts {
        for f in &v.flags {
            out.flags.push(format!("n={n}: {f}"));
        }
        agree &= v.kernel_dim == out.kernel_dim;
    }
    if !agree {
        out.flags.push(FLAG_DISAGREE.to_string());
    }
    out.confident = out.flags.is_empty();
    Some(out)
}
