use std::f64::consts::{E, PI};

use ajar_core::grid::{fourier_power_mean, integrate_mean, make_grid, remove_nyquist, spectral_partial, ScalarField};
use ajar_core::reduce::{dot, max_abs, pairwise_sum};
use ajar_core::Error;

fn amp(x: [f64; 4]) -> f64 {
    (2.0 * PI * (x[0] + x[2])).sin().exp()
}

/// Composite Simpson on [0, 1] with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn grid_validation() {
    assert_eq!(make_grid(8).unwrap().len(), 4096);
    assert_eq!(make_grid(4).unwrap().len(), 256);
    assert!(matches!(make_grid(7), Err(Error::InvalidGrid(_))));
    assert!(make_grid(2).is_err());
    assert!(make_grid(66).is_err());
}

#[test]
fn node_layout_axis4_fastest() {
    let g = make_grid(4).unwrap();
    assert_eq!(g.indices(1), [0, 0, 0, 1]);
    assert_eq!(g.indices(4), [0, 0, 1, 0]);
    assert_eq!(g.coords(64), [0.25, 0.0, 0.0, 0.0]);
}

#[test]
fn sampling_rejects_nan() {
    let g = make_grid(4).unwrap();
    let err = ScalarField::sample(g, |x| if x[0] > 0.5 { f64::NAN } else { 1.0 });
    assert!(matches!(err, Err(Error::NonFinite { .. })));
}

#[test]
fn sine_extremum_on_lattice() {
    let g = make_grid(8).unwrap();
    let f = ScalarField::sample(g, |x| (2.0 * PI * (x[0] + x[2])).sin()).unwrap();
    assert!((f.max() - 1.0).abs() < 1e-15);
    let node = f.values().iter().position(|&v| (v - 1.0).abs() < 1e-15).unwrap();
    let x = g.coords(node);
    assert!(((x[0] + x[2]) % 1.0 - 0.25).abs() < 1e-15);
}

#[test]
fn amplitude_extrema() {
    let g = make_grid(8).unwrap();
    let a = ScalarField::sample(g, amp).unwrap();
    assert!((a.max() - E).abs() < 1e-14);
    assert!((a.min() - (-1.0f64).exp()).abs() < 1e-14);
}

#[test]
fn derivative_of_band_limited_sine() {
    let g = make_grid(8).unwrap();
    let f = ScalarField::sample(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
    let expect = ScalarField::sample(g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos()).unwrap();
    assert!(spectral_partial(&f, 1).sub(&expect).max_abs() < 1e-13);
    assert!(f.partial(2).max_abs() < 1e-13);
    let c = ScalarField::constant(g, 3.5);
    assert!(c.partial(2).max_abs() < 1e-13);
}

#[test]
fn derivative_of_amplitude_field() {
    // n = 16 loses the mode-8 content of A to the zeroed Nyquist bin (~1.1e-6)
    for (n, tol) in [(16usize, 2e-6), (20, 1e-8), (24, 1e-8)] {
        let g = make_grid(n).unwrap();
        let a = ScalarField::sample(g, amp).unwrap();
        let exact = ScalarField::sample(g, |x| 2.0 * PI * (2.0 * PI * (x[0] + x[2])).cos() * amp(x)).unwrap();
        assert!(a.partial(1).sub(&exact).max_abs() < tol);
        assert!(a.partial(3).sub(&exact).max_abs() < tol);
        assert!(a.partial(2).max_abs() < 1e-12);
    }
}

#[test]
fn nyquist_derivative_is_zero() {
    let g = make_grid(8).unwrap();
    let f = ScalarField::sample(g, |x| (PI * 8.0 * x[1]).cos()).unwrap();
    assert!(f.partial(2).max_abs() < 1e-13);
    let mut v = f.into_values();
    remove_nyquist(g, &mut v);
    assert!(max_abs(&v) < 1e-14);
}

#[test]
fn remove_nyquist_keeps_lower_modes() {
    let g = make_grid(8).unwrap();
    let f = ScalarField::sample(g, |x| (2.0 * PI * (3.0 * x[0] - x[3])).cos()).unwrap();
    let mut v = f.values().to_vec();
    remove_nyquist(g, &mut v);
    let diff: Vec<f64> = f.values().iter().zip(&v).map(|(a, b)| a - b).collect();
    assert!(max_abs(&diff) < 1e-14);
}

#[test]
fn partials_commute() {
    let g = make_grid(8).unwrap();
    let f = ScalarField::sample(g, |x| (2.0 * PI * (x[0] + 2.0 * x[1])).sin() * (2.0 * PI * x[3]).cos()).unwrap();
    let a = f.partial(1).partial(4);
    let b = f.partial(4).partial(1);
    assert!(a.sub(&b).max_abs() < 1e-11);
}

#[test]
fn mean_of_one_over_one_plus_a() {
    // the mean of a function of x¹+x³ over T⁴ is its integral over one period
    let exact = simpson(|t| 1.0 / (1.0 + (2.0 * PI * t).sin().exp()), 20_000);
    assert!((exact - 0.5).abs() < 1e-12);
    for n in [8, 12, 16] {
        let g = make_grid(n).unwrap();
        let f = ScalarField::sample(g, |x| 1.0 / (1.0 + amp(x))).unwrap();
        assert!((integrate_mean(&f) - exact).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn mean_of_exponential_sine() {
    // ∫ e^{sin 2πt} dt = I₀(1)
    let i0 = simpson(|t| (2.0 * PI * t).sin().exp(), 20_000);
    assert!((i0 - 1.2660658777520082).abs() < 1e-12);
    let g = make_grid(16).unwrap();
    let a = ScalarField::sample(g, amp).unwrap();
    assert!((integrate_mean(&a) - i0).abs() < 1e-12);
}

#[test]
fn parseval() {
    let g = make_grid(8).unwrap();
    let f = ScalarField::sample(g, |x| 1.5 + (2.0 * PI * x[1]).cos() - 0.5 * (2.0 * PI * (x[0] - x[2])).sin()).unwrap();
    let direct = integrate_mean(&f.mul(&f));
    assert!((fourier_power_mean(&f) - direct).abs() < 1e-12);
    assert!((direct - (2.25 + 0.5 + 0.125)).abs() < 1e-12);
}

#[test]
fn field_roundtrip_bytes() {
    let g = make_grid(4).unwrap();
    let f = ScalarField::sample(g, amp).unwrap();
    let mut bytes = Vec::new();
    f.write_to(&mut bytes).unwrap();
    assert_eq!(&bytes[..4], b"T4SF");
    assert_eq!(bytes.len(), 16 + 8 * 256);
    let back = ScalarField::read_from(bytes.as_slice()).unwrap();
    assert_eq!(back, f);
    bytes[0] = b'X';
    assert!(ScalarField::read_from(bytes.as_slice()).is_err());
    assert!(ScalarField::read_from(&bytes[..20]).is_err());
}

#[test]
fn from_vec_checks_length() {
    let g = make_grid(4).unwrap();
    assert!(ScalarField::from_vec(g, vec![0.0; 255]).is_err());
    assert!(ScalarField::from_vec(g, vec![f64::INFINITY; 256]).is_err());
    assert!(ScalarField::from_vec(g, vec![1.0; 256]).is_ok());
}

#[test]
fn pairwise_matches_naive_on_small_integers() {
    let v: Vec<f64> = (1..=1000).map(f64::from).collect();
    assert_eq!(pairwise_sum(&v), 500_500.0);
    assert_eq!(dot(&v[..3], &v[..3]), 14.0);
}

#[test]
fn reduction_order_is_fixed_by_length() {
    let v: Vec<f64> = (0..4097).map(|i| (i as f64 * 0.37).sin() * 1e-3).collect();
    assert_eq!(pairwise_sum(&v).to_bits(), pairwise_sum(&v.clone()).to_bits());
}
