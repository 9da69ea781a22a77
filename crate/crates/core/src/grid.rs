//! Periodic scalar fields on the unit 4-torus sampled on a uniform `n⁴` lattice.
//!
//! Storage is lexicographic in `(i1, i2, i3, i4)` with axis 4 fastest, so the
//! flat index of node `(i1, i2, i3, i4)` is `((i1*n + i2)*n + i3)*n + i4` and
//! its coordinates are `(i1/n, i2/n, i3/n, i4/n)`.
//!
//! Differentiation is Fourier-spectral along one axis at a time. The Nyquist
//! mode (`m = n/2`) has zero derivative, which keeps the discrete derivative a
//! real skew-symmetric matrix.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::reduce;

/// Largest admissible points-per-axis (memory guard: 64⁴ nodes per field).
pub const MAX_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} is odd")));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("n = {n} is below 4")));
        }
        if n > MAX_N {
            return Err(Error::InvalidGrid(format!("n = {n} exceeds the maximum {MAX_N}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total node count `n⁴`.
    pub fn len(&self) -> usize {
        self.n.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice indices of a flat node index.
    pub fn indices(&self, node: usize) -> [usize; 4] {
        let n = self.n;
        [node / (n * n * n), (node / (n * n)) % n, (node / n) % n, node % n]
    }

    pub fn coords(&self, node: usize) -> [f64; 4] {
        let h = 1.0 / self.n as f64;
        self.indices(node).map(|i| i as f64 * h)
    }

    /// Flat-index distance between consecutive nodes along `axis` (0-based).
    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.n.pow(3 - axis as u32)
    }

    /// Signed wavenumber of DFT bin `k`; the Nyquist bin maps to `n/2`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.n as i64;
        let k = k as i64;
        if k <= n / 2 {
            k
        } else {
            k - n
        }
    }
}

/// `make_grid`: validated lattice descriptor.
pub fn make_grid(n: usize) -> Result<GridSpec> {
    GridSpec::new(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn from_vec(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "expected {} values for n = {}, got {}",
                grid.len(),
                grid.n(),
                values.len()
            )));
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { node, value });
        }
        Ok(Self { grid, values })
    }

    /// Build without the finiteness scan; used for internal arithmetic results.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    /// `sample_function`: evaluate `f` at every lattice node.
    pub fn sample<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn([f64; 4]) -> f64,
    {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self::from_vec(grid, values)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `spectral_partial` along coordinate axis `axis` in `1..=4`.
    pub fn partial(&self, axis: usize) -> ScalarField {
        assert!((1..=4).contains(&axis), "axis must be in 1..=4");
        let mut out = vec![0.0; self.values.len()];
        partial_into(self.grid, &self.values, axis - 1, &mut out);
        Self::from_raw(self.grid, out)
    }

    /// `integrate_mean`: integral over the unit-volume torus.
    pub fn mean(&self) -> f64 {
        reduce::pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        reduce::max_abs(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Serialize as a `T4SF` record: 16-byte header then `n⁴` little-endian f64.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        write_header(&mut w, FIELD_MAGIC, self.grid.n() as u32, 0)?;
        write_f64s(&mut w, &self.values)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let (n, _) = read_header(&mut r, FIELD_MAGIC)?;
        let grid = GridSpec::new(n as usize)?;
        let values = read_f64s(&mut r, grid.len())?;
        Self::from_vec(grid, values)
    }
}

/// `spectral_partial` as a free function, `axis` in `1..=4`.
pub fn spectral_partial(field: &ScalarField, axis: usize) -> ScalarField {
    field.partial(axis)
}

/// `integrate_mean` as a free function.
pub fn integrate_mean(field: &ScalarField) -> f64 {
    field.mean()
}

// ---------------------------------------------------------------------------
// Serialization helpers

pub(crate) const FIELD_MAGIC: &[u8; 4] = b"T4SF";
pub(crate) const FORM_MAGIC: &[u8; 4] = b"T4KF";
pub(crate) const FORMAT_VERSION: u32 = 1;

/// Header layout: magic (4 bytes), version u32, n u32, extra u32 (all LE).
pub(crate) fn write_header(w: &mut impl Write, magic: &[u8; 4], n: u32, extra: u32) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&extra.to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<(u32, u32)> {
    let mut buf = [0u8; 16];
    r.read_exact(&mut buf)?;
    if &buf[..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&buf[..4]),
            String::from_utf8_lossy(magic)
        )));
    }
    let word = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    if word(4) != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {}", word(4))));
    }
    Ok((word(8), word(12)))
}

pub(crate) fn write_f64s(w: &mut impl Write, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub(crate) fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

// ---------------------------------------------------------------------------
// FFT machinery

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Base flat index of line `line` along `axis`.
#[inline]
fn line_base(grid: GridSpec, axis: usize, line: usize) -> usize {
    let stride = grid.stride(axis);
    let outer = line / stride;
    let inner = line % stride;
    outer * grid.n() * stride + inner
}

// Number of line pairs transformed per FFT batch.
const BATCH_PAIRS: usize = 256;

/// Spectral derivative along 0-based `axis` written into `dst`.
///
/// Two real lines are packed into one complex transform; the derivative
/// operator is real so the packed halves never mix.
pub(crate) fn partial_into(grid: GridSpec, src: &[f64], axis: usize, dst: &mut [f64]) {
    let n = grid.n();
    let stride = grid.stride(axis);
    let lines = grid.len() / n;
    let plans = plans(n);
    let factor: Vec<f64> = (0..n)
        .map(|k| {
            let m = grid.wavenumber(k);
            if 2 * m.unsigned_abs() as usize == n {
                0.0
            } else {
                2.0 * PI * m as f64 / n as f64
            }
        })
        .collect();

    let pairs = lines / 2;
    let mut buf = vec![Complex::new(0.0, 0.0); BATCH_PAIRS.min(pairs) * n];
    let mut scratch = vec![
        Complex::new(0.0, 0.0);
        plans
            .forward
            .get_inplace_scratch_len()
            .max(plans.inverse.get_inplace_scratch_len())
    ];
    let mut start = 0;
    while start < pairs {
        let count = BATCH_PAIRS.min(pairs - start);
        let chunk = &mut buf[..count * n];
        for p in 0..count {
            let b0 = line_base(grid, axis, 2 * (start + p));
            let b1 = line_base(grid, axis, 2 * (start + p) + 1);
            for j in 0..n {
                chunk[p * n + j] = Complex::new(src[b0 + j * stride], src[b1 + j * stride]);
            }
        }
        plans.forward.process_with_scratch(chunk, &mut scratch);
        for line in chunk.chunks_exact_mut(n) {
            for (c, f) in line.iter_mut().zip(&factor) {
                // multiply by i*f (the 1/n normalization is folded into f)
                *c = Complex::new(-c.im * f, c.re * f);
            }
        }
        plans.inverse.process_with_scratch(chunk, &mut scratch);
        for p in 0..count {
            let b0 = line_base(grid, axis, 2 * (start + p));
            let b1 = line_base(grid, axis, 2 * (start + p) + 1);
            for j in 0..n {
                let c = chunk[p * n + j];
                dst[b0 + j * stride] = c.re;
                dst[b1 + j * stride] = c.im;
            }
        }
        start += count;
    }
}

/// Complex FFT along one axis of a full `n⁴` complex array, in place.
fn transform_axis(grid: GridSpec, data: &mut [Complex<f64>], axis: usize, fft: &dyn Fft<f64>) {
    let n = grid.n();
    let stride = grid.stride(axis);
    let lines = grid.len() / n;
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if stride == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let batch = 512.min(lines);
    let mut buf = vec![Complex::new(0.0, 0.0); batch * n];
    let mut start = 0;
    while start < lines {
        let count = batch.min(lines - start);
        let chunk = &mut buf[..count * n];
        for l in 0..count {
            let b = line_base(grid, axis, start + l);
            for j in 0..n {
                chunk[l * n + j] = data[b + j * stride];
            }
        }
        fft.process_with_scratch(chunk, &mut scratch);
        for l in 0..count {
            let b = line_base(grid, axis, start + l);
            for j in 0..n {
                data[b + j * stride] = chunk[l * n + j];
            }
        }
        start += count;
    }
}

/// Unnormalized forward 4-D DFT.
pub(crate) fn fft4_forward(grid: GridSpec, data: &mut [Complex<f64>]) {
    let plans = plans(grid.n());
    for axis in 0..4 {
        transform_axis(grid, data, axis, plans.forward.as_ref());
    }
}

/// Inverse 4-D DFT including the `1/n⁴` normalization.
pub(crate) fn fft4_inverse(grid: GridSpec, data: &mut [Complex<f64>]) {
    let plans = plans(grid.n());
    for axis in 0..4 {
        transform_axis(grid, data, axis, plans.inverse.as_ref());
    }
    let s = 1.0 / grid.len() as f64;
    for c in data.iter_mut() {
        *c *= s;
    }
}

/// Wavenumber vector of a flat DFT index.
pub(crate) fn wavevector(grid: GridSpec, k: usize) -> [i64; 4] {
    grid.indices(k).map(|i| grid.wavenumber(i))
}

/// Apply a real, even Fourier multiplier to two real fields at once.
///
/// `symbol(m)` must satisfy `symbol(m) == symbol(-m)` so the operator is real.
pub(crate) fn apply_even_multiplier_pair(
    grid: GridSpec,
    a: &mut [f64],
    b: Option<&mut [f64]>,
    symbol: &dyn Fn([i64; 4]) -> f64,
) {
    let mut data: Vec<Complex<f64>> = match &b {
        Some(b) => a.iter().zip(b.iter()).map(|(&x, &y)| Complex::new(x, y)).collect(),
        None => a.iter().map(|&x| Complex::new(x, 0.0)).collect(),
    };
    fft4_forward(grid, &mut data);
    for (k, c) in data.iter_mut().enumerate() {
        *c *= symbol(wavevector(grid, k));
    }
    fft4_inverse(grid, &mut data);
    for (x, c) in a.iter_mut().zip(&data) {
        *x = c.re;
    }
    if let Some(b) = b {
        for (y, c) in b.iter_mut().zip(&data) {
            *y = c.im;
        }
    }
}

/// Normalized Fourier power `Σ|f̂_m|² / n⁸`, equal to the mean of `f²`.
pub fn fourier_power_mean(field: &ScalarField) -> f64 {
    let grid = field.grid();
    let mut data: Vec<Complex<f64>> =
        field.values().iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft4_forward(grid, &mut data);
    let power: Vec<f64> = data.iter().map(|c| c.norm_sqr()).collect();
    reduce::pairwise_sum(&power) / (grid.len() as f64).powi(2)
}

/// Orthogonal projection removing every Fourier mode whose wavenumber equals
/// `n/2` along at least one axis.
///
/// Per axis this subtracts the alternating-sign component of each line, so no
/// transform is needed.
pub fn remove_nyquist(grid: GridSpec, data: &mut [f64]) {
    let n = grid.n();
    let lines = grid.len() / n;
    let inv_n = 1.0 / n as f64;
    for axis in 0..4 {
        let stride = grid.stride(axis);
        for line in 0..lines {
            let b = line_base(grid, axis, line);
            let mut c = 0.0;
            for j in 0..n {
                let v = data[b + j * stride];
                c += if j % 2 == 0 { v } else { -v };
            }
            c *= inv_n;
            for j in 0..n {
                let idx = b + j * stride;
                if j % 2 == 0 {
                    data[idx] -= c;
                } else {
                    data[idx] += c;
                }
            }
        }
    }
}
