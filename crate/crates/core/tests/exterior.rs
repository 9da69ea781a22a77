use std::f64::consts::PI;

use ajar_core::exterior::{
    basis, basis_index, basis_label, binomial4, constant_form, ext_deriv, ext_deriv_transpose, integrate_top, l2_inner,
    pointwise_inner, wedge, wedge_sign, KForm,
};
use ajar_core::grid::{make_grid, ScalarField};
use ajar_core::hermitian::MetricField;
use ajar_core::pointwise::{compound, matmul, Mat4};
use ajar_core::reduce::dot;

const E1: u8 = 0b0001;
const E2: u8 = 0b0010;
const E12: u8 = 0b0011;
const E13: u8 = 0b0101;
const E23: u8 = 0b0110;
const E24: u8 = 0b1010;
const E34: u8 = 0b1100;
const E123: u8 = 0b0111;

fn one(n: usize) -> ScalarField {
    ScalarField::constant(make_grid(n).unwrap(), 1.0)
}

#[test]
fn basis_tables() {
    let sizes: Vec<usize> = (0..=4).map(binomial4).collect();
    assert_eq!(sizes, [1, 4, 6, 4, 1]);
    let labels: Vec<String> = basis(2).iter().map(|&m| basis_label(m)).collect();
    assert_eq!(labels, ["e12", "e13", "e14", "e23", "e24", "e34"]);
    for k in 0..=4 {
        for (i, &m) in basis(k).iter().enumerate() {
            assert_eq!(basis_index(m), i);
            assert_eq!(m.count_ones() as usize, k);
        }
    }
    assert_eq!(basis_label(0b1111), "e1234");
}

#[test]
fn wedge_signs() {
    assert_eq!(wedge_sign(E13, E24), -1);
    assert_eq!(wedge_sign(E12, E34), 1);
    assert_eq!(wedge_sign(E2, E1), -1);
    assert_eq!(wedge_sign(E12, E1), 0);
}

#[test]
fn constant_forms() {
    let g = make_grid(4).unwrap();
    let w0 = constant_form(g, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(w0.comp(E12).values()[7], 1.0);
    assert_eq!(w0.comp(E34).values()[0], 1.0);
    assert!(constant_form(g, 2, &[1.0; 5]).is_err());
    assert_eq!(constant_form(g, 0, &[0.0]).unwrap().max_abs(), 0.0);
}

#[test]
fn wedge_examples() {
    let g = make_grid(4).unwrap();
    let e13 = KForm::monomial(one(4), E13);
    let e24 = KForm::monomial(one(4), E24);
    let top = wedge(&e13, &e24).unwrap();
    assert_eq!(top.comps()[0].values()[0], -1.0);
    let w0 = constant_form(g, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(integrate_top(&wedge(&w0, &w0).unwrap()).unwrap(), 2.0);
    let a = constant_form(g, 2, &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
    assert_eq!(wedge(&a, &w0).unwrap().max_abs(), 0.0);
    assert!(wedge(&top, &a).is_err());
}

#[test]
fn wedge_graded_commutativity() {
    let g = make_grid(4).unwrap();
    let a = KForm::new(1, (0..4).map(|i| ScalarField::sample(g, |x| (x[i] + 0.3 * i as f64).sin()).unwrap()).collect()).unwrap();
    let b = KForm::new(2, (0..6).map(|i| ScalarField::sample(g, |x| (x[0] * i as f64 - x[3]).cos()).unwrap()).collect()).unwrap();
    let c = KForm::new(1, (0..4).map(|i| ScalarField::sample(g, |x| x[1] * i as f64 + 1.0).unwrap()).collect()).unwrap();
    // 1-forms anticommute, 2-forms commute with everything
    assert!(wedge(&a, &c).unwrap().add(&wedge(&c, &a).unwrap()).unwrap().max_abs() < 1e-14);
    assert!(wedge(&a, &b).unwrap().sub(&wedge(&b, &a).unwrap()).unwrap().max_abs() < 1e-14);
    let left = wedge(&wedge(&a, &b).unwrap(), &c).unwrap();
    let right = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
    assert!(left.sub(&right).unwrap().max_abs() < 1e-13);
}

#[test]
fn d_errors_and_constants() {
    let g = make_grid(4).unwrap();
    assert!(ext_deriv(&KForm::zero(g, 4)).is_err());
    let c = constant_form(g, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    assert!(ext_deriv(&c).unwrap().max_abs() < 1e-13);
    assert!(integrate_top(&c).is_err());
}

#[test]
fn d_of_functions_and_one_forms() {
    let g = make_grid(8).unwrap();
    let s = |x: [f64; 4]| (2.0 * PI * x[0]).sin();
    let ds = |x: [f64; 4]| 2.0 * PI * (2.0 * PI * x[0]).cos();
    // d(f e2) = ∂₁f e12 for f = f(x¹)
    let f_e2 = KForm::monomial(ScalarField::sample(g, s).unwrap(), E2);
    let d = ext_deriv(&f_e2).unwrap();
    assert!(d.comp(E12).sub(&ScalarField::sample(g, ds).unwrap()).max_abs() < 1e-12);
    assert!(d.max_abs() - d.comp(E12).max_abs() < 1e-12);
    // d(f dx¹) = 0
    let f_e1 = KForm::monomial(ScalarField::sample(g, s).unwrap(), E1);
    assert!(ext_deriv(&f_e1).unwrap().max_abs() < 1e-12);
    // d of a 0-form is its gradient
    let f = KForm::new(0, vec![ScalarField::sample(g, |x| (2.0 * PI * (x[1] - x[3])).sin()).unwrap()]).unwrap();
    let df = ext_deriv(&f).unwrap();
    assert!(df.comp(E1).max_abs() < 1e-12);
    let expect = ScalarField::sample(g, |x| 2.0 * PI * (2.0 * PI * (x[1] - x[3])).cos()).unwrap();
    assert!(df.comp(E2).sub(&expect).max_abs() < 1e-12);
    assert!(df.comp(0b1000).add(&expect).max_abs() < 1e-12);
}

#[test]
fn d_of_amplitude_times_e23() {
    // d(A e23) = ∂₁A e123; A depends on x¹+x³ only
    let g = make_grid(20).unwrap();
    let amp = |x: [f64; 4]| (2.0 * PI * (x[0] + x[2])).sin().exp();
    let a = ScalarField::sample(g, amp).unwrap();
    let da = ext_deriv(&KForm::monomial(a, E23)).unwrap();
    let expect = ScalarField::sample(g, |x| 2.0 * PI * (2.0 * PI * (x[0] + x[2])).cos() * amp(x)).unwrap();
    assert!(da.comp(E123).sub(&expect).max_abs() < 1e-8);
    for m in [0b1011u8, 0b1101, 0b1110] {
        assert!(da.comp(m).max_abs() < 1e-8);
    }
}

#[test]
fn d_is_a_derivation() {
    let g = make_grid(8).unwrap();
    let f = KForm::new(0, vec![ScalarField::sample(g, |x| (2.0 * PI * x[0]).cos()).unwrap()]).unwrap();
    let b = KForm::monomial(ScalarField::sample(g, |x| (2.0 * PI * x[2]).sin()).unwrap(), E24);
    let lhs = ext_deriv(&wedge(&f, &b).unwrap()).unwrap();
    let rhs = wedge(&ext_deriv(&f).unwrap(), &b).unwrap().add(&wedge(&f, &ext_deriv(&b).unwrap()).unwrap()).unwrap();
    assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-11);
}

#[test]
fn transpose_is_adjoint() {
    let g = make_grid(8).unwrap();
    let a = KForm::new(1, (0..4).map(|i| ScalarField::sample(g, |x| (2.0 * PI * (x[i] + 2.0 * x[(i + 1) % 4])).sin()).unwrap()).collect()).unwrap();
    let b = KForm::new(2, (0..6).map(|i| ScalarField::sample(g, |x| (2.0 * PI * (x[i % 4] - x[(i + 2) % 4])).cos() * (i as f64 + 1.0)).unwrap()).collect()).unwrap();
    let lhs = dot(&ext_deriv(&a).unwrap().to_flat(), &b.to_flat());
    let rhs = dot(&a.to_flat(), &ext_deriv_transpose(&b).unwrap().to_flat());
    assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
}

#[test]
fn flat_inner_products() {
    let g = make_grid(4).unwrap();
    let flat = MetricField::flat(g);
    let w0 = constant_form(g, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(l2_inner(&w0, &w0, &flat).unwrap(), 2.0);
    let p = pointwise_inner(&w0, &KForm::monomial(one(4), E13), &flat).unwrap();
    assert_eq!(p.max_abs(), 0.0);
}

#[test]
fn form_roundtrip_bytes() {
    let g = make_grid(4).unwrap();
    let f = KForm::monomial(ScalarField::sample(g, |x| x[0] + 2.0 * x[3]).unwrap(), E13);
    let mut bytes = Vec::new();
    f.write_to(&mut bytes).unwrap();
    assert_eq!(bytes.len(), 16 + 6 * 8 * 256);
    assert_eq!(KForm::read_from(bytes.as_slice()).unwrap(), f);
    let flat = f.to_flat();
    assert_eq!(KForm::from_flat(g, 2, &flat), f);
}

#[test]
fn compound_of_identity_is_identity() {
    let id = Mat4::identity();
    for k in 0..=4 {
        let c = compound(&id, k);
        let dim = basis(k).len();
        for r in 0..dim {
            for col in 0..dim {
                assert_eq!(c[r * dim + col], if r == col { 1.0 } else { 0.0 });
            }
        }
    }
}

#[test]
fn compound_is_multiplicative() {
    let a = Mat4::new(2.0, 1.0, 0.0, 0.5, 0.0, 1.0, 3.0, 0.0, 1.0, 0.0, 1.0, 2.0, 0.0, 4.0, 0.0, 1.0);
    let b = Mat4::new(1.0, 0.0, 2.0, 0.0, 0.5, 1.0, 0.0, 1.0, 0.0, 2.0, 1.0, 0.0, 1.0, 0.0, 0.0, 3.0);
    for k in 1..=3 {
        let dim = basis(k).len();
        let lhs = compound(&(a * b), k);
        let rhs = matmul(&compound(&a, k), &compound(&b, k), dim, dim, dim);
        for (x, y) in lhs.iter().zip(&rhs) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    assert!((compound(&a, 4)[0] - a.determinant()).abs() < 1e-12);
}
