use std::fmt::Write as _;

use serde::Serialize;

use super::{structure_at, Check, ExperimentConfig, Report};
use crate::error::Result;
use crate::grid::make_grid;
use crate::hermitian::{StructureSpec, SymplecticForm};
use crate::spectral::{cohomology_report, h_j_minus, kernel_dimension_multi, CohomologyReport, KernelVerdict, B2};

#[derive(Debug, Serialize)]
struct HjMinusPayload {
    structure: String,
    reports: Vec<CohomologyReport>,
    verdict: KernelVerdict,
}

/// `run_hjminus`: cohomology report at each `n` and the combined verdict.
pub fn run_hjminus(cfg: &ExperimentConfig) -> Result<Report> {
    let omega = SymplecticForm::standard();
    let params = cfg.spectral_params();
    let mut reports = Vec::new();
    for &n in &cfg.n {
        let grid = make_grid(n)?;
        let j = structure_at(&cfg.structure, grid)?;
        reports.push(cohomology_report(&omega, &j, grid, &params)?);
    }
    let spectra: Vec<_> = reports.iter().map(|r| r.lejmi.clone()).collect();
    let verdict = kernel_dimension_multi(&spectra, &params.policy).expect("at least one resolution");

    let mut failures = Vec::new();
    let mut ambiguous = Vec::new();
    for r in &reports {
        if r.b_plus != 3 || r.b_minus != 3 {
            failures.push(format!("n={}: b+ = {}, b- = {}", r.n, r.b_plus, r.b_minus));
        }
        if r.h_plus + r.h_minus != B2 || r.h_minus > r.b_plus || r.h_plus < r.b_minus {
            failures.push(format!("n={}: inconsistent cohomology counts", r.n));
        }
        for f in &r.flags {
            ambiguous.push(format!("n={}: {f}", r.n));
        }
    }
    if !verdict.confident && ambiguous.is_empty() {
        ambiguous.extend(verdict.flags.iter().cloned());
    }
    let mut report = Report::new(HjMinusPayload { structure: cfg.structure.label(), reports, verdict })?;
    report.failures = failures;
    report.ambiguous = ambiguous;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    /// `None` for the `C = D ≡ 1` limit row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub n: usize,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_3: f64,
    pub kernel_dim: usize,
    pub confident: bool,
    pub flags: Vec<String>,
}

/// CSV with a header row, `.` decimals and LF line endings.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,n,lambda_1,lambda_2,lambda_3,kernel_dim,confident\n");
    for r in rows {
        let k = r.k.map_or_else(|| "inf".to_string(), |k| format!("{k}"));
        writeln!(
            out,
            "{k},{},{:e},{:e},{:e},{},{}",
            r.n, r.lambda_1, r.lambda_2, r.lambda_3, r.kernel_dim, r.confident
        )
        .expect("write to string");
    }
    out
}

/// Bound separating `λ₃` from zero along the sweep.
const LAMBDA3_FLOOR: f64 = 1.0;

#[derive(Debug, Serialize)]
struct SweepPayload {
    rows: Vec<SweepRow>,
    checks: Vec<Check>,
}

fn sweep_row(spec: &StructureSpec, k: Option<f64>, n: usize, cfg: &ExperimentConfig) -> Result<SweepRow> {
    let grid = make_grid(n)?;
    let j = structure_at(spec, grid)?;
    let hj = h_j_minus(&SymplecticForm::standard(), &j, grid, &cfg.spectral_params())?;
    let lam = &hj.report.eigenvalues;
    Ok(SweepRow {
        k,
        n,
        lambda_1: lam[0],
        lambda_2: lam[1],
        lambda_3: lam[2],
        kernel_dim: hj.h_minus,
        confident: hj.verdict.confident,
        flags: hj.verdict.flags,
    })
}

/// `run_sweep`: the `J_k` family over the k-list and n-list, plus the limit row.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let mut ks = cfg.k.clone();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &k in &ks {
            rows.push(sweep_row(&StructureSpec::Tk { k }, Some(k), n, cfg)?);
        }
        rows.push(sweep_row(&StructureSpec::Limit, None, n, cfg)?);
    }

    let mut checks = Vec::new();
    for &n in &cfg.n {
        let finite: Vec<&SweepRow> = rows.iter().filter(|r| r.n == n && r.k.is_some()).collect();
        for r in &finite {
            let k = r.k.unwrap_or(f64::INFINITY);
            checks.push(Check::below(format!("n={n} k={k}: kernel_dim"), r.kernel_dim as f64, 0.5));
            checks.push(Check::above(format!("n={n} k={k}: lambda_2"), r.lambda_2.min(r.lambda_1), 0.0));
            checks.push(Check::above(format!("n={n} k={k}: lambda_3"), r.lambda_3, LAMBDA3_FLOOR));
        }
        for w in finite.windows(2) {
            let (a, b) = (w[0], w[1]);
            let kb = b.k.unwrap_or(f64::INFINITY);
            checks.push(Check::above(format!("n={n} k={kb}: lambda_1 decrease"), a.lambda_1 - b.lambda_1, 0.0));
            checks.push(Check::above(format!("n={n} k={kb}: lambda_2 decrease"), a.lambda_2 - b.lambda_2, 0.0));
        }
        if let Some(limit) = rows.iter().find(|r| r.n == n && r.k.is_none()) {
            checks.push(Check::below(
                format!("n={n} limit: kernel_dim - 2"),
                (limit.kernel_dim as f64 - 2.0).abs(),
                0.5,
            ));
        }
    }

    let failures = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    let ambiguous = rows
        .iter()
        .filter(|r| !r.confident)
        .map(|r| match r.k {
            Some(k) => format!("n={} k={k}: not confident", r.n),
            None => format!("n={} limit: not confident", r.n),
        })
        .collect();
    let csv = sweep_csv(&rows);
    let mut report = Report::new(SweepPayload { rows, checks })?;
    report.failures = failures;
    report.ambiguous = ambiguous;
    report.csv = Some(csv);
    Ok(report)
}
