//! Randomized identities shared by the property suite and the acceptance run.

use std::f64::consts::TAU;

use ajar_core::exterior::{ext_deriv, l2_inner, pointwise_inner, KForm};
use ajar_core::grid::{make_grid, GridSpec};
use ajar_core::hermitian::{
    anti_invariant_frame, codifferential, compatible_metric, hodge_star, j_act, project_g, project_j,
    validate_compatible, AcsField, MetricField, Sign, SymplecticForm,
};
use ajar_core::lab::random_band_limited_form;
use ajar_core::pointwise::Mat4;
use ajar_core::spectral::{AntiInvariantSection, LejmiOperator};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 200 cases from a fixed seed.
pub fn config() -> Config {
    Config { cases: 200, rng_seed: RngSeed::Fixed(0x5eed_a1a5), failure_persistence: None, ..Config::default() }
}

/// Smooth field of symmetric 4x4 matrices: a constant part plus two Fourier modes.
fn symmetric_field(grid: GridSpec, rng: &mut ChaCha8Rng, amplitude: f64) -> Vec<Mat4> {
    let mut sym = || {
        let a = Mat4::from_fn(|_, _| rng.gen_range(-amplitude..amplitude));
        (a + a.transpose()) * 0.5
    };
    let (h0, h1, h2) = (sym(), sym(), sym());
    let m1: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1..=1) as f64);
    let m2: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1..=1) as f64);
    (0..grid.len())
        .map(|node| {
            let x = grid.coords(node);
            let p1: f64 = (0..4).map(|i| m1[i] * x[i]).sum();
            let p2: f64 = (0..4).map(|i| m2[i] * x[i]).sum();
            h0 + h1 * (TAU * p1).sin() + h2 * (TAU * p2).cos()
        })
        .collect()
}

/// Random ω₀-compatible structure `P J₀ P⁻¹` with `P = exp(W H)` symplectic.
fn random_structure(grid: GridSpec, rng: &mut ChaCha8Rng) -> AcsField {
    let w = SymplecticForm::standard().matrix();
    let j0 = AcsField::standard(grid);
    let mats = symmetric_field(grid, rng, 0.4)
        .into_iter()
        .enumerate()
        .map(|(node, h)| {
            let p = (w * h).exp();
            p * j0.at(node) * p.try_inverse().unwrap()
        })
        .collect();
    AcsField::new(grid, mats).unwrap()
}

/// General SPD metric `exp(H)`.
fn random_metric(grid: GridSpec, rng: &mut ChaCha8Rng) -> MetricField {
    let mats = symmetric_field(grid, rng, 0.5).into_iter().map(|h| h.exp()).collect();
    MetricField::new(grid, mats).unwrap()
}

fn l2_norm(a: &KForm, g: &MetricField) -> f64 {
    l2_inner(a, a, g).unwrap().max(0.0).sqrt()
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1e-300)
}

pub fn d_squared_vanishes(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let grid = make_grid(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_band_limited_form(grid, k, 2, 3, &mut rng);
    let dd = ext_deriv(&ext_deriv(&a).unwrap()).unwrap();
    prop_assert!(dd.max_abs() < 1e-10, "{:e}", dd.max_abs());
    Ok(())
}

pub fn star_is_an_involution(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let grid = make_grid(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_metric(grid, &mut rng);
    let a = random_band_limited_form(grid, k, 1, 3, &mut rng);
    let ss = hodge_star(&hodge_star(&a, &g).unwrap(), &g).unwrap();
    let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
    let err = ss.sub(&a.scale(sign)).unwrap().max_abs();
    prop_assert!(rel(err, a.max_abs()) < 1e-12, "{:e}", err);
    // α ∧ *α = |α|² vol
    if k == 2 {
        let top = ajar_core::exterior::wedge(&a, &hodge_star(&a, &g).unwrap()).unwrap();
        let expect = pointwise_inner(&a, &a, &g).unwrap().mul(g.sqrt_det());
        prop_assert!(top.comps()[0].sub(&expect).max_abs() < 1e-12 * expect.max_abs().max(1.0));
    }
    Ok(())
}

pub fn projectors_split_two_forms(seed: u64) -> Result<(), TestCaseError> {
    let grid = make_grid(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = random_structure(grid, &mut rng);
    let g = compatible_metric(&SymplecticForm::standard(), &j).unwrap();
    let a = random_band_limited_form(grid, 2, 1, 3, &mut rng);
    let scale = a.max_abs();
    for (plus, minus) in [
        (project_j(&j, &a, Sign::Plus).unwrap(), project_j(&j, &a, Sign::Minus).unwrap()),
        (project_g(&a, &g, Sign::Plus).unwrap(), project_g(&a, &g, Sign::Minus).unwrap()),
    ] {
        prop_assert!(rel(plus.add(&minus).unwrap().sub(&a).unwrap().max_abs(), scale) < 1e-12);
        prop_assert!(rel(pointwise_inner(&plus, &minus, &g).unwrap().max_abs(), scale * scale) < 1e-12);
    }
    let pj = project_j(&j, &a, Sign::Minus).unwrap();
    prop_assert!(rel(project_j(&j, &pj, Sign::Minus).unwrap().sub(&pj).unwrap().max_abs(), scale) < 1e-12);
    prop_assert!(rel(project_j(&j, &pj, Sign::Plus).unwrap().max_abs(), scale) < 1e-12);
    let pg = project_g(&a, &g, Sign::Plus).unwrap();
    prop_assert!(rel(project_g(&pg, &g, Sign::Plus).unwrap().sub(&pg).unwrap().max_abs(), scale) < 1e-12);
    prop_assert!(rel(project_g(&pg, &g, Sign::Minus).unwrap().max_abs(), scale) < 1e-12);
    Ok(())
}

pub fn d_and_delta_are_adjoint(seed: u64, k: usize) -> Result<(), TestCaseError> {
    let grid = make_grid(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_metric(grid, &mut rng);
    let a = random_band_limited_form(grid, k, 2, 3, &mut rng);
    let b = random_band_limited_form(grid, k + 1, 2, 3, &mut rng);
    let da = ext_deriv(&a).unwrap();
    let db = codifferential(&b, &g).unwrap();
    let lhs = l2_inner(&da, &b, &g).unwrap();
    let rhs = l2_inner(&a, &db, &g).unwrap();
    let scale = l2_norm(&da, &g) * l2_norm(&b, &g) + l2_norm(&a, &g) * l2_norm(&db, &g);
    prop_assert!(rel((lhs - rhs).abs(), scale) < 1e-10, "{} vs {}", lhs, rhs);
    Ok(())
}

pub fn lejmi_quadratic_form(seed: u64) -> Result<(), TestCaseError> {
    let grid = make_grid(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = random_structure(grid, &mut rng);
    let g = compatible_metric(&SymplecticForm::standard(), &j).unwrap();
    let op = LejmiOperator::new(&j, &g).unwrap();
    let u = random_band_limited_form(grid, 1, 2, 3, &mut rng);
    let psi = AntiInvariantSection::new(op.frame().clone(), u.comps()[0].clone(), u.comps()[1].clone()).unwrap();
    let p = op.apply_section(&psi).unwrap();
    let form = op.section_inner(&p, &psi);
    let delta = op.codifferential_of(&psi).unwrap();
    let energy = l2_inner(&delta, &delta, &g).unwrap();
    prop_assert!((form - energy).abs() < 1e-10 * energy.max(1e-300), "{} vs {}", form, energy);
    prop_assert!(form >= -1e-10 * op.section_inner(&psi, &psi));
    // ⟨ψ, ψ⟩ in frame coordinates is the L²(g) norm of the form
    let as_form = psi.to_form();
    let direct = l2_inner(&as_form, &as_form, &g).unwrap();
    prop_assert!((direct - op.section_inner(&psi, &psi)).abs() < 1e-12 * direct);
    Ok(())
}

pub fn pointwise_bundle_relations(seed: u64) -> Result<(), TestCaseError> {
    let grid = make_grid(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = random_structure(grid, &mut rng);
    let omega = SymplecticForm::standard();
    let r = validate_compatible(&omega, &j);
    prop_assert!(r.square_residual < 1e-12 && r.compatibility_residual < 1e-12 && r.tameness_margin > 0.0);
    let g = compatible_metric(&omega, &j).unwrap();
    let w = omega.to_form(grid);
    // ω is self-dual, J-invariant, of length √2
    prop_assert!(project_g(&w, &g, Sign::Minus).unwrap().max_abs() < 1e-12);
    prop_assert!(j_act(&j, &w).unwrap().sub(&w).unwrap().max_abs() < 1e-12);
    prop_assert!(pointwise_inner(&w, &w, &g).unwrap().map(|v| v - 2.0).max_abs() < 1e-12);
    // Λ_J^- is a g-orthonormal pair of self-dual forms orthogonal to ω
    let frame = anti_invariant_frame(&j, &g).unwrap();
    for i in 0..2 {
        let s = frame.sigma(i);
        prop_assert!(project_g(&s, &g, Sign::Minus).unwrap().max_abs() < 1e-12);
        prop_assert!(j_act(&j, &s).unwrap().add(&s).unwrap().max_abs() < 1e-12);
        prop_assert!(pointwise_inner(&s, &w, &g).unwrap().max_abs() < 1e-12);
        for k in 0..2 {
            let expect = if i == k { 1.0 } else { 0.0 };
            let ip = pointwise_inner(&s, &frame.sigma(k), &g).unwrap();
            prop_assert!(ip.map(|v| v - expect).max_abs() < 1e-12);
        }
    }
    // anti-self-dual forms are J-invariant; J is a g-isometry
    let a = random_band_limited_form(grid, 2, 1, 3, &mut rng);
    let asd = project_g(&a, &g, Sign::Minus).unwrap();
    prop_assert!(rel(project_j(&j, &asd, Sign::Minus).unwrap().max_abs(), a.max_abs()) < 1e-12);
    let ja = j_act(&j, &a).unwrap();
    let n0 = pointwise_inner(&a, &a, &g).unwrap();
    let n1 = pointwise_inner(&ja, &ja, &g).unwrap();
    prop_assert!(rel(n0.sub(&n1).max_abs(), n0.max_abs()) < 1e-12);
    prop_assert!(rel(j_act(&j, &ja).unwrap().sub(&a).unwrap().max_abs(), a.max_abs()) < 1e-12);
    Ok(())
}
