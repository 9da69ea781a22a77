//! Lejmi's operator, the 2-form Hodge Laplacian, harmonic forms and the
//! cohomology counts `h_J^±`, `b^±`.
//!
//! Every eigenproblem lives on the Nyquist-free subspace: fields with no
//! Fourier content at wavenumber `n/2` along any axis. The zeroed Nyquist
//! derivative annihilates those modes, so keeping them would add spurious
//! kernel vectors (16 per field component).

mod cohomology;
mod eigen;
mod harmonic;
mod kernel;
mod laplacian;
mod lejmi;

pub use cohomology::{cohomology_report, h_j_minus, CohomologyReport, HjMinus};
pub use eigen::{
    check_symmetry, smallest_eigenpairs, EigenOptions, Eigenpairs, Expansion, SymmetricOperator,
    DEFAULT_SEED, MAX_COUNT,
};
pub use harmonic::{cohomology_coefficients, harmonic_basis, B2, CLOSED_TOL, harmonic_projection, HarmonicBasis, HarmonicProjection};
pub use kernel::{
    kernel_dimension, kernel_dimension_multi, KernelPolicy, KernelVerdict, FLAG_DISAGREE, FLAG_FULL_WINDOW,
    FLAG_GRAY_BAND, FLAG_SMALL_GAP,
};
pub use laplacian::HodgeLaplacian;
pub use lejmi::{lejmi_apply, AntiInvariantSection, LejmiOperator};

use serde::Serialize;

/// Low end of a computed spectrum with its kernel verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub n: usize,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub kernel_dim: usize,
    pub confident: bool,
    pub gap_ratio: f64,
    pub threshold: f64,
    pub flags: Vec<String>,
    pub iterations: usize,
    pub operator_applications: usize,
    pub seed: u64,
}

impl SpectrumReport {
    /// Report carrying only eigenvalues, e.g. for policy experiments.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Self {
        let m = eigenvalues.len();
        let mut r = Self {
            n: 0,
            dim: m,
            eigenvalues,
            residuals: vec![0.0; m],
            kernel_dim: 0,
            confident: false,
            gap_ratio: 0.0,
            threshold: 0.0,
            flags: Vec::new(),
            iterations: 0,
            operator_applications: 0,
            seed: 0,
        };
        let v = kernel_dimension(&r, &KernelPolicy::default());
        r.apply_verdict(&v);
        r
    }

    pub fn apply_verdict(&mut self, v: &KernelVerdict) {
        self.kernel_dim = v.kernel_dim;
        self.confident = v.confident;
        self.gap_ratio = v.gap_ratio;
        self.threshold = v.threshold;
        self.flags = v.flags.clone();
    }
}

/// Solver settings shared by the Lejmi and Laplacian eigenproblems.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralParams {
    pub count: usize,
    pub tol: f64,
    pub seed: u64,
    pub shift: f64,
    /// Inner CG steps per correction for the Lejmi operator; 0 applies the
    /// preconditioner once.
    pub lejmi_inner_steps: usize,
    /// Same for the Hodge Laplacian, whose variable-coefficient mass makes a
    /// single preconditioner application converge slowly.
    pub laplacian_inner_steps: usize,
    pub max_iterations: usize,
    pub policy: KernelPolicy,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self { count: 8, tol: 1e-8, seed: DEFAULT_SEED, shift: 1.0, lejmi_inner_steps: 0, laplacian_inner_steps: 8, max_iterations: 1000, policy: KernelPolicy::default() }
    }
}

impl SpectralParams {
    pub fn eigen_options(&self) -> EigenOptions {
        self.eigen_options_with(self.lejmi_inner_steps)
    }

    pub fn eigen_options_with(&self, inner_steps: usize) -> EigenOptions {
        let mut o = EigenOptions::new(self.count);
        o.tol = self.tol;
        o.seed = self.seed;
        o.expansion = if inner_steps == 0 {
            Expansion::Preconditioned { shift: self.shift }
        } else {
            Expansion::InnerSolve { shift: self.shift, steps: inner_steps }
        };
        o.max_iterations = self.max_iterations;
        o.policy = self.policy;
        o
    }
}
