//! Dense reference assemblies on small grids, built from explicit
//! differentiation and Nyquist-projection matrices and pointwise exterior
//! algebra rather than from the matrix-free kernels.

#![allow(dead_code)]

use std::f64::consts::PI;

use ajar_core::exterior::{basis, binomial4};
use ajar_core::grid::GridSpec;
use ajar_core::hermitian::{AntiInvariantFrame, MetricField};
use nalgebra::{DMatrix, Matrix4};

pub mod props;

/// Spectral derivative on `n` periodic samples of `[0, 1)`, Nyquist mode dropped.
pub fn deriv_1d(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |j, l| {
        let t = j as f64 - l as f64;
        (1..n / 2).map(|k| -4.0 * PI * k as f64 * (2.0 * PI * k as f64 * t / n as f64).sin()).sum::<f64>() / n as f64
    })
}

/// Orthogonal projector removing the alternating mode.
pub fn nyquist_projector_1d(n: usize) -> DMatrix<f64> {
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    DMatrix::from_fn(n, n, |j, l| (j == l) as u8 as f64 - sign(j) * sign(l) / n as f64)
}

/// Orthonormal basis of the range of [`nyquist_projector_1d`].
pub fn nyquist_free_basis_1d(n: usize) -> DMatrix<f64> {
    let eig = nyquist_projector_1d(n).symmetric_eigen();
    let cols: Vec<_> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).map(|i| eig.eigenvectors.column(i).into_owned()).collect();
    DMatrix::from_columns(&cols)
}

/// Node-space operator acting by `op` along `axis` and identity elsewhere.
pub fn along_axis(grid: GridSpec, op: &DMatrix<f64>, axis: usize) -> DMatrix<f64> {
    let nodes = grid.len();
    let mut out = DMatrix::zeros(nodes, nodes);
    for p in 0..nodes {
        let ip = grid.indices(p);
        for q in 0..nodes {
            let iq = grid.indices(q);
            if (0..4).all(|b| b == axis || ip[b] == iq[b]) {
                out[(p, q)] = op[(ip[axis], iq[axis])];
            }
        }
    }
    out
}

/// Tensor product of `op` over all four axes.
pub fn tensor4(grid: GridSpec, op: &DMatrix<f64>) -> DMatrix<f64> {
    let nodes = grid.len();
    let cols = op.ncols().pow(4);
    let c = op.ncols();
    DMatrix::from_fn(nodes, cols, |p, q| {
        let ip = grid.indices(p);
        let iq = [q / (c * c * c), (q / (c * c)) % c, (q / c) % c, q % c];
        (0..4).map(|a| op[(ip[a], iq[a])]).product()
    })
}

/// Block-diagonal copy of a node-space matrix for `k` components.
pub fn block_diag(m: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let (r, c) = m.shape();
    let mut out = DMatrix::zeros(r * copies, c * copies);
    for i in 0..copies {
        out.view_mut((i * r, i * c), (r, c)).copy_from(m);
    }
    out
}

/// Exterior derivative `Λᵏ → Λᵏ⁺¹` on component-major coordinates.
pub fn d_dense(grid: GridSpec, k: usize) -> DMatrix<f64> {
    let nodes = grid.len();
    let partials: Vec<DMatrix<f64>> = (0..4).map(|a| along_axis(grid, &deriv_1d(grid.n()), a)).collect();
    let src = basis(k);
    let mut out = DMatrix::zeros(binomial4(k + 1) * nodes, binomial4(k) * nodes);
    for (r, &target) in basis(k + 1).iter().enumerate() {
        for a in 0..4 {
            if target & (1 << a) == 0 {
                continue;
            }
            let c = src.iter().position(|&m| m == target ^ (1 << a)).unwrap();
            let sign = if (target & ((1u8 << a) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            let mut block = out.view_mut((r * nodes, c * nodes), (nodes, nodes));
            block += &partials[a] * sign;
        }
    }
    out
}

/// Sign of `e^I ∧ e^J` for complementary index sets.
fn shuffle_sign(i: u8, j: u8) -> f64 {
    let seq: Vec<u8> = (0..4).filter(|b| i & (1 << b) != 0).chain((0..4).filter(|b| j & (1 << b) != 0)).collect();
    let inversions = (0..seq.len()).flat_map(|x| (x + 1..seq.len()).map(move |y| (x, y))).filter(|&(x, y)| seq[x] > seq[y]).count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨e^I, e^J⟩_g = det(g⁻¹[I, J])`.
pub fn gram_at(ginv: &Matrix4<f64>, k: usize) -> DMatrix<f64> {
    let b = basis(k);
    DMatrix::from_fn(b.len(), b.len(), |r, c| {
        let rows: Vec<usize> = (0..4).filter(|x| b[r] & (1 << x) != 0).collect();
        let cols: Vec<usize> = (0..4).filter(|x| b[c] & (1 << x) != 0).collect();
        DMatrix::from_fn(k, k, |x, y| ginv[(rows[x], cols[y])]).determinant()
    })
}

/// Star `Λᵏ → Λ⁴⁻ᵏ` from `α ∧ *β = ⟨α, β⟩_g vol_g`.
pub fn star_at(g: &Matrix4<f64>, k: usize) -> DMatrix<f64> {
    let ginv = g.try_inverse().unwrap();
    let w = g.determinant().sqrt();
    let gram = gram_at(&ginv, k);
    let (src, dst) = (basis(k), basis(4 - k));
    let mut out = DMatrix::zeros(dst.len(), src.len());
    for (r, &i) in src.iter().enumerate() {
        let comp = 0b1111 ^ i;
        let row = dst.iter().position(|&m| m == comp).unwrap();
        let eps = shuffle_sign(i, comp);
        for c in 0..src.len() {
            out[(row, c)] = w * gram[(r, c)] / eps;
        }
    }
    out
}

/// Node-diagonal matrix from per-node blocks, component-major.
pub fn pointwise(grid: GridSpec, rows: usize, cols: usize, at: impl Fn(usize) -> DMatrix<f64>) -> DMatrix<f64> {
    let nodes = grid.len();
    let mut out = DMatrix::zeros(rows * nodes, cols * nodes);
    for x in 0..nodes {
        let m = at(x);
        for r in 0..rows {
            for c in 0..cols {
                out[(r * nodes + x, c * nodes + x)] = m[(r, c)];
            }
        }
    }
    out
}

pub fn volume(g: &MetricField, x: usize) -> f64 {
    g.at(x).determinant().sqrt()
}

/// Galerkin Hodge Laplacian pencil `(K, M₂)` on coordinate 2-forms.
pub fn laplacian_dense(g: &MetricField) -> (DMatrix<f64>, DMatrix<f64>) {
    let grid = g.grid();
    let nodes = grid.len();
    let ginv = |x: usize| g.at(x).try_inverse().unwrap();
    let m2 = pointwise(grid, 6, 6, |x| gram_at(&ginv(x), 2) * volume(g, x));
    let m3 = pointwise(grid, 4, 4, |x| gram_at(&ginv(x), 3) * volume(g, x));
    let mean_inv = (0..nodes).map(ginv).fold(Matrix4::zeros(), |a, b| a + b) / nodes as f64;
    let mean_vol = (0..nodes).map(|x| volume(g, x)).sum::<f64>() / nodes as f64;
    let m1_inv = DMatrix::from_fn(4, 4, |r, c| mean_inv[(r, c)] * mean_vol).try_inverse().unwrap();
    let m1_inv = pointwise(grid, 4, 4, |_| m1_inv.clone());
    let r = tensor4_projector(grid);
    let (r1, r2) = (block_diag(&r, 4), block_diag(&r, 6));
    let (d1, d2) = (d_dense(grid, 1), d_dense(grid, 2));
    let a = &m2 * &d1;
    let codiff = &a * &m1_inv * &r1 * a.transpose();
    let curl = d2.transpose() * &m3 * &d2;
    let k = &r2 * (codiff + curl) * &r2;
    let m = &r2 * &m2 * &r2;
    (k, m)
}

/// `R` on node space: the Nyquist projector along every axis.
pub fn tensor4_projector(grid: GridSpec) -> DMatrix<f64> {
    let p = nyquist_projector_1d(grid.n());
    let nodes = grid.len();
    DMatrix::from_fn(nodes, nodes, |a, b| {
        let (ia, ib) = (grid.indices(a), grid.indices(b));
        (0..4).map(|ax| p[(ia[ax], ib[ax])]).product()
    })
}

/// Lejmi's operator on `√vol`-weighted frame coordinates.
pub fn lejmi_dense(g: &MetricField, frame: &AntiInvariantFrame) -> DMatrix<f64> {
    let grid = g.grid();
    let nodes = grid.len();
    let sigma: Vec<Vec<f64>> = (0..2).map(|i| frame.sigma(i).to_flat()).collect();
    let psi = {
        let mut m = DMatrix::zeros(6 * nodes, 2 * nodes);
        for i in 0..2 {
            for r in 0..6 {
                for x in 0..nodes {
                    m[(r * nodes + x, i * nodes + x)] = sigma[i][r * nodes + x];
                }
            }
        }
        m
    };
    let coords = {
        let mut m = DMatrix::zeros(2 * nodes, 6 * nodes);
        for x in 0..nodes {
            let gram = gram_at(&g.at(x).try_inverse().unwrap(), 2);
            for i in 0..2 {
                let s = DMatrix::from_fn(6, 1, |r, _| sigma[i][r * nodes + x]);
                let dual = &gram * s;
                for r in 0..6 {
                    m[(i * nodes + x, r * nodes + x)] = dual[(r, 0)];
                }
            }
        }
        m
    };
    let s2 = pointwise(grid, 6, 6, |x| star_at(g.at(x), 2));
    let s3 = pointwise(grid, 4, 4, |x| star_at(g.at(x), 3));
    let delta = -(s3 * d_dense(grid, 2) * s2);
    let weight = DMatrix::from_fn(2 * nodes, 2 * nodes, |a, b| if a == b { volume(g, a % nodes).sqrt() } else { 0.0 });
    let weight_inv = weight.map(|v| if v != 0.0 { 1.0 / v } else { 0.0 });
    let r2 = block_diag(&tensor4_projector(grid), 2);
    &r2 * weight * coords * d_dense(grid, 1) * delta * psi * weight_inv * &r2
}

/// Orthonormal basis of the Nyquist-free subspace for `copies` components.
pub fn nyquist_free_basis(grid: GridSpec, copies: usize) -> DMatrix<f64> {
    block_diag(&tensor4(grid, &nyquist_free_basis_1d(grid.n())), copies)
}

/// Sorted eigenvalues of `K v = λ M v` restricted to the columns of `q`.
pub fn restricted_spectrum(k: &DMatrix<f64>, m: Option<&DMatrix<f64>>, q: &DMatrix<f64>) -> Vec<f64> {
    let kv = q.transpose() * k * q;
    let kv = (&kv + kv.transpose()) * 0.5;
    let c = match m {
        None => kv,
        Some(m) => {
            let mv = q.transpose() * m * q;
            let mv = (&mv + mv.transpose()) * 0.5;
            let l = mv.cholesky().expect("SPD mass").l();
            let x = l.solve_lower_triangular(&kv).unwrap();
            let c = l.solve_lower_triangular(&x.transpose()).unwrap();
            (&c + c.transpose()) * 0.5
        }
    };
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
