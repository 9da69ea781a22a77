//! Smallest eigenpairs of symmetric positive semi-definite operators.
//!
//! Block iteration with full (two-pass) `M`-orthogonalization and exact
//! Rayleigh–Ritz on the accumulated basis. Without a preconditioner the basis
//! is the block Krylov space of the start block, i.e. block Lanczos with full
//! reorthogonalization; with one, residuals are preconditioned before
//! expansion (Davidson).

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::{kernel_dimension, KernelPolicy};
use super::SpectrumReport;
use crate::error::{Error, Result};
use crate::reduce::{axpy, dot, norm, scale};

/// Largest supported number of requested eigenpairs.
pub const MAX_COUNT: usize = 32;

/// Seed used when none is configured.
pub const DEFAULT_SEED: u64 = 424242;

const SYMMETRY_TOL: f64 = 1e-6;
const DEPENDENCE_TOL: f64 = 1e-10;

/// A symmetric operator `K` (optionally with SPD mass `M`) on `ℝ^dim`.
///
/// The problem solved is `K v = λ M v` on the range of [`restrict`], which
/// must be an orthogonal projection commuting with nothing in particular but
/// leaving `K` and `M` invariant on its range.
///
/// [`restrict`]: SymmetricOperator::restrict
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn has_mass(&self) -> bool {
        false
    }

    fn apply_mass(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }

    /// Approximate inverse of `K + shift·M`.
    fn precondition(&self, _shift: f64, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }

    /// Projection onto the admissible subspace, in place.
    fn restrict(&self, _x: &mut [f64]) {}

    /// Grid resolution recorded in reports; 0 for abstract operators.
    fn resolution(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expansion {
    /// Expand with raw residuals (block Lanczos).
    Krylov,
    /// Expand with `precondition(shift, r)`.
    Preconditioned { shift: f64 },
    /// Expand with `steps` of preconditioned CG on `(K + shift·M) z = r`.
    InnerSolve { shift: f64, steps: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenOptions {
    pub count: usize,
    /// Bound on the scaled residual `‖K v - λ M v‖ / (‖v‖ max(1, |λ|))`.
    pub tol: f64,
    pub seed: u64,
    pub expansion: Expansion,
    /// Extra Ritz pairs iterated beyond `count` to speed up convergence at
    /// the edge of clusters; never reported.
    pub guard: usize,
    /// Basis size that triggers a thick restart.
    pub max_basis: usize,
    pub max_iterations: usize,
    pub policy: KernelPolicy,
}

impl EigenOptions {
    pub fn new(count: usize) -> Self {
        Self {
            count,
            tol: 1e-8,
            seed: DEFAULT_SEED,
            expansion: Expansion::Preconditioned { shift: 1.0 },
            guard: count.max(1),
            max_basis: 0,
            max_iterations: 1000,
            policy: KernelPolicy::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_expansion(mut self, expansion: Expansion) -> Self {
        self.expansion = expansion;
        self
    }
}

/// Eigenvalues with their report and `M`-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub report: SpectrumReport,
    pub vectors: Vec<Vec<f64>>,
}

struct Basis<'a, O: SymmetricOperator + ?Sized> {
    op: &'a O,
    q: Vec<Vec<f64>>,
    kq: Vec<Vec<f64>>,
    /// `M q`; empty when the operator has no mass.
    mq: Vec<Vec<f64>>,
    /// Projected matrix `Qᵀ K Q`, rows of growing length.
    h: Vec<Vec<f64>>,
    applications: usize,
}

impl<'a, O: SymmetricOperator + ?Sized> Basis<'a, O> {
    fn new(op: &'a O) -> Self {
        Self { op, q: Vec::new(), kq: Vec::new(), mq: Vec::new(), h: Vec::new(), applications: 0 }
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    fn mass_of(&self, i: usize) -> &[f64] {
        if self.op.has_mass() {
            &self.mq[i]
        } else {
            &self.q[i]
        }
    }

    fn mass(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.op.apply_mass(x, &mut y);
        y
    }

    /// Orthogonalize `w` against the basis and append it. Returns `false`
    /// when `w` is numerically dependent.
    fn push(&mut self, mut w: Vec<f64>) -> bool {
        self.op.restrict(&mut w);
        let before = if self.op.has_mass() { dot(&w, &self.mass(&w)).max(0.0).sqrt() } else { norm(&w) };
        if !(before > 0.0) || !before.is_finite() {
            return false;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = (0..self.len()).map(|i| dot(self.mass_of(i), &w)).collect();
            for (i, c) in coeffs.iter().enumerate() {
                axpy(-c, &self.q[i], &mut w);
            }
        }
        let mw = if self.op.has_mass() { Some(self.mass(&w)) } else { None };
        let after = match &mw {
            Some(mw) => dot(&w, mw).max(0.0).sqrt(),
            None => norm(&w),
        };
        if after <= DEPENDENCE_TOL * before {
            return false;
        }
        scale(1.0 / after, &mut w);
        let mut kw = vec![0.0; w.len()];
        self.op.apply(&w, &mut kw);
        self.applications += 1;
        let mut row: Vec<f64> = self.q.iter().map(|qi| dot(qi, &kw)).collect();
        row.push(dot(&w, &kw));
        self.h.push(row);
        if let Some(mut mw) = mw {
            scale(1.0 / after, &mut mw);
            self.mq.push(mw);
        }
        self.q.push(w);
        self.kq.push(kw);
        true
    }

    /// Ritz values ascending with coefficient vectors as columns.
    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.len();
        let mut h = DMatrix::zeros(k, k);
        for (i, row) in self.h.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = DMatrix::zeros(k, k);
        for (c, &i) in order.iter().enumerate() {
            vecs.set_column(c, &eig.eigenvectors.column(i));
        }
        (values, vecs)
    }

    fn combine(vectors: &[Vec<f64>], coeffs: &DMatrix<f64>, col: usize) -> Vec<f64> {
        let mut out = vec![0.0; vectors[0].len()];
        for (j, v) in vectors.iter().enumerate() {
            let c = coeffs[(j, col)];
            if c != 0.0 {
                axpy(c, v, &mut out);
            }
        }
        out
    }

    /// Replace the basis by its first `keep` Ritz vectors.
    fn restart(&mut self, values: &[f64], y: &DMatrix<f64>, keep: usize) {
        let q: Vec<_> = (0..keep).map(|c| Self::combine(&self.q, y, c)).collect();
        let kq: Vec<_> = (0..keep).map(|c| Self::combine(&self.kq, y, c)).collect();
        if self.op.has_mass() {
            self.mq = (0..keep).map(|c| Self::combine(&self.mq, y, c)).collect();
        }
        self.q = q;
        self.kq = kq;
        self.h = (0..keep)
            .map(|i| {
                let mut row = vec![0.0; i + 1];
                row[i] = values[i];
                row
            })
            .collect();
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Randomized check `|⟨Kv, w⟩ - ⟨v, Kw⟩| ≤ 1e-6` for unit `v`, `w` (and the
/// same for `M`).
pub fn check_symmetry<O: SymmetricOperator + ?Sized>(op: &O, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let dim = op.dim();
    let mut v = random_vector(&mut rng, dim);
    let mut w = random_vector(&mut rng, dim);
    op.restrict(&mut v);
    op.restrict(&mut w);
    scale(1.0 / norm(&v), &mut v);
    scale(1.0 / norm(&w), &mut w);
    let (mut kv, mut kw) = (vec![0.0; dim], vec![0.0; dim]);
    op.apply(&v, &mut kv);
    op.apply(&w, &mut kw);
    let mut worst = (dot(&kv, &w) - dot(&v, &kw)).abs();
    if op.has_mass() {
        op.apply_mass(&v, &mut kv);
        op.apply_mass(&w, &mut kw);
        worst = worst.max((dot(&kv, &w) - dot(&v, &kw)).abs());
    }
    if !(worst <= SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(worst));
    }
    Ok(worst)
}

/// Fixed number of preconditioned CG steps on `(K + shift·M) x = r`.
fn inner_solve<O: SymmetricOperator + ?Sized>(
    op: &O,
    shift: f64,
    steps: usize,
    r: &[f64],
    applications: &mut usize,
) -> Vec<f64> {
    let dim = r.len();
    let mut x = vec![0.0; dim];
    let mut res = r.to_vec();
    op.restrict(&mut res);
    let mut z = vec![0.0; dim];
    op.precondition(shift, &res, &mut z);
    op.restrict(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&res, &z);
    let (mut ap, mut mp) = (vec![0.0; dim], vec![0.0; dim]);
    for _ in 0..steps {
        if !(rz > 0.0) {
            break;
        }
        op.apply(&p, &mut ap);
        *applications += 1;
        if shift != 0.0 {
            op.apply_mass(&p, &mut mp);
            axpy(shift, &mp, &mut ap);
        }
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut res);
        op.precondition(shift, &res, &mut z);
        op.restrict(&mut z);
        let rz_next = dot(&res, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    x
}

/// `smallest_eigenpairs`.
pub fn smallest_eigenpairs<O: SymmetricOperator + ?Sized>(op: &O, opts: &EigenOptions) -> Result<Eigenpairs> {
    let dim = op.dim();
    let m = opts.count;
    if m == 0 || m > MAX_COUNT || m > dim {
        return Err(Error::Config(format!("eigen count {m} outside 1..={}", MAX_COUNT.min(dim))));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("eigen tolerance {} must be positive", opts.tol)));
    }
    check_symmetry(op, opts.seed)?;

    let active = (m + opts.guard).min(dim);
    let max_basis = opts.max_basis.max(3 * active).min(dim);
    let keep = (2 * active).min(max_basis);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = Basis::new(op);
    let mut attempts = 0;
    while basis.len() < active {
        let v = random_vector(&mut rng, dim);
        basis.push(v);
        attempts += 1;
        if attempts > 4 * m + 16 {
            return Err(Error::NoConvergence(format!(
                "admissible subspace has dimension below {m}"
            )));
        }
    }

    let mut last_residuals = vec![f64::INFINITY; m];
    for iteration in 1..=opts.max_iterations {
        let (values, y) = basis.ritz();
        let mut residuals = Vec::with_capacity(active);
        let mut corrections = Vec::new();
        for i in 0..active.min(basis.len()) {
            let mut r = Basis::<O>::combine(&basis.kq, &y, i);
            let mx = if op.has_mass() {
                Basis::<O>::combine(&basis.mq, &y, i)
            } else {
                Basis::<O>::combine(&basis.q, &y, i)
            };
            axpy(-values[i], &mx, &mut r);
            let v = Basis::<O>::combine(&basis.q, &y, i);
            let res = norm(&r) / (norm(&v) * values[i].abs().max(1.0));
            residuals.push(res);
            if res >= opts.tol {
                corrections.push(r);
            }
        }
        if residuals[..m].iter().all(|&r| r < opts.tol) {
            residuals.truncate(m);
            let vectors = (0..m).map(|i| Basis::<O>::combine(&basis.q, &y, i)).collect();
            let mut report = SpectrumReport {
                n: op.resolution(),
                dim,
                eigenvalues: values[..m].to_vec(),
                residuals,
                kernel_dim: 0,
                confident: false,
                gap_ratio: 0.0,
                threshold: 0.0,
                flags: Vec::new(),
                iterations: iteration,
                operator_applications: basis.applications,
                seed: opts.seed,
            };
            let verdict = kernel_dimension(&report, &opts.policy);
            report.apply_verdict(&verdict);
            return Ok(Eigenpairs { report, vectors });
        }
        last_residuals = residuals;

        if basis.len() + corrections.len() > max_basis {
            basis.restart(&values, &y, keep.min(basis.len()));
        }
        let mut added = 0;
        for r in corrections {
            let w = match opts.expansion {
                Expansion::Krylov => r,
                Expansion::Preconditioned { shift } => {
                    let mut z = vec![0.0; dim];
                    op.precondition(shift, &r, &mut z);
                    z
                }
                Expansion::InnerSolve { shift, steps } => inner_solve(op, shift, steps, &r, &mut basis.applications),
            };
            if basis.len() < max_basis && basis.push(w) {
                added += 1;
            }
        }
        if added == 0 {
            // stagnation: refresh with a random direction
            let v = random_vector(&mut rng, dim);
            if basis.len() >= max_basis {
                basis.restart(&values, &y, keep.min(basis.len()));
            }
            basis.push(v);
        }
    }
    Err(Error::NoConvergence(format!(
        "{} iterations, residuals {:?}",
        opts.max_iterations, last_residuals
    )))
}
