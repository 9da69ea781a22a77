use nalgebra::DMatrix;
use serde::Serialize;

use super::{structure_at, Check, ExperimentConfig, Report};
use crate::catalog::{constant2, ExampleForms};
use crate::error::Result;
use crate::exterior::{ext_deriv, integrate_top, wedge, KForm};
use crate::grid::{make_grid, GridSpec};
use crate::hermitian::{codifferential, compatible_metric, hodge_star, j_act, AcsField, MetricField, StructureSpec, SymplecticForm};
use crate::spectral::{h_j_minus, SpectrumReport};

/// Bound for the averaged constants.
pub const CONSTANT_TOL: f64 = 1e-10;
/// Bound for constant forms under the flat structure, and for pairings that
/// vanish identically.
pub const FLAT_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
struct Row {
    group: &'static str,
    form: &'static str,
    checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
struct HMinusRow {
    h_minus: usize,
    confident: bool,
    flags: Vec<String>,
    spectrum: SpectrumReport,
}

#[derive(Debug, Serialize)]
struct Table1Block {
    n: usize,
    constants: Vec<Check>,
    rows: Vec<Row>,
    h_j_minus: HMinusRow,
}

/// What to check on a listed form besides closedness.
enum Kind<'a> {
    Harmonic { g: &'a MetricField, dual: f64 },
    Invariant { j: &'a AcsField, sign: f64 },
    /// Only the class is listed; no pointwise condition.
    Class,
}

fn row(group: &'static str, form: &'static str, a: &KForm, kind: Kind, tol: f64) -> Result<Row> {
    let mut checks = vec![Check::below("d", ext_deriv(a)?.max_abs(), tol)];
    match kind {
        Kind::Harmonic { g, dual } => {
            checks.push(Check::below("delta", codifferential(a, g)?.max_abs(), tol));
            let name = if dual > 0.0 { "self_duality" } else { "anti_self_duality" };
            checks.push(Check::below(name, hodge_star(a, g)?.sub(&a.scale(dual))?.max_abs(), tol));
        }
        Kind::Invariant { j, sign } => {
            let name = if sign > 0.0 { "j_invariance" } else { "j_anti_invariance" };
            checks.push(Check::below(name, j_act(j, a)?.sub(&a.scale(sign))?.max_abs(), tol));
        }
        Kind::Class => {}
    }
    Ok(Row { group, form, checks })
}

fn flat(grid: GridSpec, c: [f64; 6]) -> KForm {
    constant2(grid, c)
}

/// Smallest `|eigenvalue|` of the cup-product matrix; nonzero iff the forms
/// are independent in cohomology.
fn cup_rank_margin(forms: &[&KForm]) -> Result<f64> {
    let k = forms.len();
    let mut q = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            q[(a, b)] = integrate_top(&wedge(forms[a], forms[b])?)?;
        }
    }
    Ok(q.symmetric_eigenvalues().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min))
}

fn block(n: usize, cfg: &ExperimentConfig) -> Result<(Table1Block, bool)> {
    let tol = cfg.table_tol;
    let grid = make_grid(n)?;
    let omega = SymplecticForm::standard();
    let j0 = AcsField::standard(grid);
    let g0 = MetricField::flat(grid);
    let j = structure_at(&StructureSpec::Example, grid)?;
    let g = compatible_metric(&omega, &j)?;
    let ex = ExampleForms::new(grid)?;

    let w0 = flat(grid, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let e12m34 = flat(grid, [1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
    let e13m24 = flat(grid, [0.0, 1.0, 0.0, 0.0, -1.0, 0.0]);
    let e13p24 = flat(grid, [0.0, 1.0, 0.0, 0.0, 1.0, 0.0]);
    let e14p23 = flat(grid, [0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    let e14m23 = flat(grid, [0.0, 0.0, 1.0, -1.0, 0.0, 0.0]);

    let sd0 = || Kind::Harmonic { g: &g0, dual: 1.0 };
    let asd0 = || Kind::Harmonic { g: &g0, dual: -1.0 };
    let inv0 = || Kind::Invariant { j: &j0, sign: 1.0 };
    let anti0 = || Kind::Invariant { j: &j0, sign: -1.0 };
    let sd = || Kind::Harmonic { g: &g, dual: 1.0 };
    let asd = || Kind::Harmonic { g: &g, dual: -1.0 };
    let inv = || Kind::Invariant { j: &j, sign: 1.0 };

    let flat_tol = tol.min(FLAT_TOL);
    let rows = vec![
        row("H_g0^+", "omega0", &w0, sd0(), flat_tol)?,
        row("H_g0^+", "e13-e24", &e13m24, sd0(), flat_tol)?,
        row("H_g0^+", "e14+e23", &e14p23, sd0(), flat_tol)?,
        row("H_g0^-", "e12-e34", &e12m34, asd0(), flat_tol)?,
        row("H_g0^-", "e13+e24", &e13p24, asd0(), flat_tol)?,
        row("H_g0^-", "e14-e23", &e14m23, asd0(), flat_tol)?,
        row("H_J0^+", "omega0", &w0, inv0(), flat_tol)?,
        row("H_J0^+", "e12-e34", &e12m34, inv0(), flat_tol)?,
        row("H_J0^+", "e13+e24", &e13p24, inv0(), flat_tol)?,
        row("H_J0^+", "e14-e23", &e14m23, inv0(), flat_tol)?,
        row("H_J0^-", "e13-e24", &e13m24, anti0(), flat_tol)?,
        row("H_J0^-", "e14+e23", &e14p23, anti0(), flat_tol)?,
        row("H_g^+", "omega0", &ex.omega0, sd(), tol)?,
        row("H_g^+", "omega1", &ex.omega1, sd(), tol)?,
        row("H_g^+", "omega2", &ex.omega2, sd(), tol)?,
        row("H_g^-", "alpha0", &ex.alpha0, asd(), tol)?,
        row("H_g^-", "alpha1", &ex.alpha1, asd(), tol)?,
        row("H_g^-", "alpha2", &ex.alpha2, asd(), tol)?,
        row("H_J^+", "omega0", &ex.omega0, inv(), tol)?,
        row("H_J^+", "alpha0", &ex.alpha0, inv(), tol)?,
        row("H_J^+", "alpha1", &ex.alpha1, inv(), tol)?,
        row("H_J^+", "alpha2", &ex.alpha2, inv(), tol)?,
        row("H_J^+", "omega1", &ex.omega1, Kind::Class, tol)?,
        row("H_J^+", "omega2", &ex.omega2, Kind::Class, tol)?,
    ];

    let reps = [&ex.omega0, &ex.alpha0, &ex.alpha1, &ex.alpha2, &ex.omega1, &ex.omega2];
    let pair = |a: &KForm, b: &KForm| -> Result<f64> { integrate_top(&wedge(a, b)?) };
    let constants = vec![
        Check::below("c_A - 1/2", (ex.c_a - 0.5).abs(), CONSTANT_TOL),
        Check::below("c_B - 1/2", (ex.c_b - 0.5).abs(), CONSTANT_TOL),
        Check::below("a", ex.a_value().abs(), CONSTANT_TOL),
        Check::below("b", ex.b_value().abs(), CONSTANT_TOL),
        Check::below("int (e13-e24)^omega2 - 1", (pair(&e13m24, &ex.omega2)? - 1.0).abs(), tol),
        Check::below("int (e13-e24)^omega0", pair(&e13m24, &ex.omega0)?.abs(), FLAT_TOL),
        Check::above("H_J^+ cup matrix min |eigenvalue|", cup_rank_margin(&reps)?, 1e-6),
    ];

    let hj = h_j_minus(&omega, &j, grid, &cfg.spectral_params())?;
    let confident = hj.verdict.confident;
    let h_j_minus = HMinusRow { h_minus: hj.h_minus, confident, flags: hj.verdict.flags, spectrum: hj.report };
    Ok((Table1Block { n, constants, rows, h_j_minus }, confident))
}

/// `run_table1`: every listed form of the flat and deformed examples with its
/// closedness, coclosedness, duality and invariance residuals.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<Report> {
    let mut blocks = Vec::new();
    let mut failures = Vec::new();
    let mut ambiguous = Vec::new();
    for &n in &cfg.n {
        let (b, confident) = block(n, cfg)?;
        for c in b.constants.iter().filter(|c| !c.pass) {
            failures.push(format!("n={n}: {}", c.name));
        }
        for r in &b.rows {
            for c in r.checks.iter().filter(|c| !c.pass) {
                failures.push(format!("n={n}: {} {} {}", r.group, r.form, c.name));
            }
        }
        if !confident {
            ambiguous.push(format!("n={n}: H_J^- verdict"));
        } else if b.h_j_minus.h_minus != 0 {
            failures.push(format!("n={n}: H_J^- has dimension {}", b.h_j_minus.h_minus));
        }
        blocks.push(b);
    }
    let mut report = Report::new(blocks)?;
    report.failures = failures;
    report.ambiguous = ambiguous;
    Ok(report)
}
