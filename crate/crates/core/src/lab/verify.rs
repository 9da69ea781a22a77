use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{random_band_limited_form, structure_at, Check, ExperimentConfig, Report};
use crate::error::Result;
use crate::exterior::{ext_deriv, l2_inner, pointwise_inner, KForm};
use crate::grid::make_grid;
use crate::hermitian::{
    anti_invariant_frame, codifferential, compatible_metric, hodge_star, j_act, project_g, project_j,
    validate_compatible, AcsField, MetricField, Sign, SymplecticForm,
};

const MAX_MODE: i64 = 2;
const TERMS: usize = 3;
const SAMPLES: usize = 4;

#[derive(Debug, Serialize)]
struct IdentityBlock {
    n: usize,
    checks: Vec<Check>,
}

#[derive(Debug, Serialize)]
struct IdentityPayload {
    structure: String,
    blocks: Vec<IdentityBlock>,
}

fn star2(a: &KForm, g: &MetricField, fault: bool) -> Result<KForm> {
    let s = hodge_star(a, g)?;
    if !fault {
        return Ok(s);
    }
    let mut flat = s.to_flat();
    let n = a.grid().len();
    for v in &mut flat[..n] {
        *v = -*v;
    }
    Ok(KForm::from_flat(a.grid(), 2, &flat))
}

fn sup(a: &KForm, b: &KForm) -> f64 {
    a.sub(b).expect("same shape").max_abs()
}

/// Largest pointwise `|⟨a,b⟩_g - c|`.
fn inner_defect(a: &KForm, b: &KForm, g: &MetricField, c: f64) -> f64 {
    pointwise_inner(a, b, g).expect("same shape").values().iter().map(|v| (v - c).abs()).fold(0.0, f64::max)
}

fn projector_checks(x: &KForm, plus: &KForm, minus: &KForm, reproject: &KForm, g: &MetricField) -> (f64, f64) {
    let idem = sup(reproject, plus).max(sup(&plus.add(minus).expect("2-forms"), x));
    let orth = inner_defect(plus, minus, g, 0.0);
    (idem, orth)
}

fn block(n: usize, j: &AcsField, cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<IdentityBlock> {
    let tol = cfg.identity_tol;
    let fault = cfg.fault.as_deref() == Some("star_involution");
    let grid = j.grid();
    let omega = SymplecticForm::standard();
    let g = compatible_metric(&omega, j)?;
    let w = omega.to_form(grid);
    let compat = validate_compatible(&omega, j);
    let frame = anti_invariant_frame(j, &g)?;
    let sigma = [frame.sigma(0), frame.sigma(1)];

    let mut frame_orth = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            frame_orth = frame_orth.max(inner_defect(&sigma[a], &sigma[b], &g, (a == b) as u8 as f64));
        }
    }
    let sigma_asd = sigma.iter().map(|s| project_g(s, &g, Sign::Minus).map(|p| p.max_abs())).collect::<Result<Vec<_>>>()?;
    let omega_asd = project_g(&w, &g, Sign::Minus)?.max_abs();
    let omega_anti = project_j(j, &w, Sign::Minus)?.max_abs();

    let mut asd_anti = 0.0f64;
    let mut involution = 0.0f64;
    let mut isometry = 0.0f64;
    let mut idempotence = 0.0f64;
    let mut orthogonality = 0.0f64;
    let mut dd = 0.0f64;
    let mut star_inv = 0.0f64;
    let mut adjoint = 0.0f64;
    for _ in 0..SAMPLES {
        let x = random_band_limited_form(grid, 2, MAX_MODE, TERMS, rng);
        let y = random_band_limited_form(grid, 2, MAX_MODE, TERMS, rng);

        let asd = project_g(&x, &g, Sign::Minus)?;
        asd_anti = asd_anti.max(project_j(j, &asd, Sign::Minus)?.max_abs());

        let jx = j_act(j, &x)?;
        involution = involution.max(sup(&j_act(j, &jx)?, &x));
        let jy = j_act(j, &y)?;
        let lhs = pointwise_inner(&jx, &jy, &g)?;
        let rhs = pointwise_inner(&x, &y, &g)?;
        isometry = isometry.max(lhs.sub(&rhs).max_abs());

        let (jp, jm) = (project_j(j, &x, Sign::Plus)?, project_j(j, &x, Sign::Minus)?);
        let (i1, o1) = projector_checks(&x, &jp, &jm, &project_j(j, &jp, Sign::Plus)?, &g);
        let (gp, gm) = (project_g(&x, &g, Sign::Plus)?, project_g(&x, &g, Sign::Minus)?);
        let (i2, o2) = projector_checks(&x, &gp, &gm, &project_g(&gp, &g, Sign::Plus)?, &g);
        idempotence = idempotence.max(i1).max(i2);
        orthogonality = orthogonality.max(o1).max(o2);

        for k in 0..3 {
            let a = random_band_limited_form(grid, k, MAX_MODE, TERMS, rng);
            dd = dd.max(ext_deriv(&ext_deriv(&a)?)?.max_abs());
        }
        for k in [0usize, 1, 3, 4] {
            let a = random_band_limited_form(grid, k, MAX_MODE, TERMS, rng);
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            star_inv = star_inv.max(sup(&hodge_star(&hodge_star(&a, &g)?, &g)?, &a.scale(sign)));
        }
        star_inv = star_inv.max(sup(&hodge_star(&star2(&x, &g, fault)?, &g)?, &x));

        // ⟨dα, β⟩ = ⟨α, δβ⟩ in L²(g), relative to the size of either side
        for k in 0..3 {
            let a = random_band_limited_form(grid, k, MAX_MODE, TERMS, rng);
            let b = random_band_limited_form(grid, k + 1, MAX_MODE, TERMS, rng);
            let da = ext_deriv(&a)?;
            let db = codifferential(&b, &g)?;
            let l = l2_inner(&da, &b, &g)?;
            let r = l2_inner(&a, &db, &g)?;
            let norm = |f: &KForm| l2_inner(f, f, &g).map(|v| v.max(0.0).sqrt());
            let scale = (norm(&da)? * norm(&b)?).max(norm(&a)? * norm(&db)?).max(f64::MIN_POSITIVE);
            adjoint = adjoint.max((l - r).abs() / scale);
        }
    }

    let checks = vec![
        Check::below("j_square", compat.square_residual, tol),
        Check::below("omega_compatibility", compat.compatibility_residual, tol),
        Check::above("tameness_margin", compat.tameness_margin, 0.0),
        Check::below("frame_orthonormality", frame_orth, tol),
        Check::below("bundle_frame_self_dual", sigma_asd.iter().copied().fold(0.0, f64::max), tol),
        Check::below("bundle_omega_self_dual", omega_asd, tol),
        Check::below("bundle_omega_invariant", omega_anti, tol),
        Check::below("bundle_anti_self_dual_invariant", asd_anti, tol),
        Check::below("j_involution", involution, tol),
        Check::below("j_isometry", isometry, tol),
        Check::below("projector_idempotence", idempotence, tol),
        Check::below("projector_orthogonality", orthogonality, tol),
        Check::below("d_squared", dd, tol),
        Check::below("star_involution", star_inv, tol),
        Check::below("d_delta_adjointness", adjoint, tol),
    ];
    Ok(IdentityBlock { n, checks })
}

/// `run_verify_identities`: pointwise and differential identities of the
/// configured structure at every requested `n`.
pub fn run_verify_identities(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(7);
    let mut blocks = Vec::new();
    for &n in &cfg.n {
        let grid = make_grid(n)?;
        let j = structure_at(&cfg.structure, grid)?;
        blocks.push(block(n, &j, cfg, &mut rng)?);
    }
    let failures = blocks
        .iter()
        .flat_map(|b| b.checks.iter().filter(|c| !c.pass).map(move |c| format!("n={}: {}", b.n, c.name)))
        .collect();
    let mut report = Report::new(IdentityPayload { structure: cfg.structure.label(), blocks })?;
    report.failures = failures;
    Ok(report)
}
