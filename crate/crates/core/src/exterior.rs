//! Differential forms on T⁴ over the constant coordinate coframe.
//!
//! Basis order (fixed, used by every module and by serialization):
//!
//! | degree | basis                                   |
//! |--------|-----------------------------------------|
//! | 0      | 1                                       |
//! | 1      | e1, e2, e3, e4                          |
//! | 2      | e12, e13, e14, e23, e24, e34            |
//! | 3      | e123, e124, e134, e234                  |
//! | 4      | e1234                                   |
//!
//! A basis element is encoded as a bitmask over the axes (bit `a` = `dx^{a+1}`),
//! and all permutation signs come from [`wedge_sign`] on those masks.

use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{self, GridSpec, ScalarField};
use crate::hermitian::MetricField;
use crate::reduce;

const DEG0: [u8; 1] = [0b0000];
const DEG1: [u8; 4] = [0b0001, 0b0010, 0b0100, 0b1000];
const DEG2: [u8; 6] = [0b0011, 0b0101, 0b1001, 0b0110, 0b1010, 0b1100];
const DEG3: [u8; 4] = [0b0111, 0b1011, 0b1101, 0b1110];
const DEG4: [u8; 1] = [0b1111];

/// Basis masks for degree `k`.
pub fn basis(k: usize) -> &'static [u8] {
    match k {
        0 => &DEG0,
        1 => &DEG1,
        2 => &DEG2,
        3 => &DEG3,
        4 => &DEG4,
        _ => panic!("degree {k} out of range"),
    }
}

/// Position of `mask` within the basis of its degree.
pub fn basis_index(mask: u8) -> usize {
    let k = mask.count_ones() as usize;
    basis(k).iter().position(|&m| m == mask).expect("valid mask")
}

/// Sign of `e^I ∧ e^J` relative to the sorted basis element, or 0 if they share an axis.
pub const fn wedge_sign(i: u8, j: u8) -> i32 {
    if i & j != 0 {
        return 0;
    }
    // count inversions: pairs (a in I, b in J) with a > b
    let mut inv = 0;
    let mut a = 0;
    while a < 4 {
        if i & (1 << a) != 0 {
            let lower = j & ((1u8 << a) - 1);
            inv += lower.count_ones();
        }
        a += 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Label such as `e13` for a basis mask.
pub fn basis_label(mask: u8) -> String {
    if mask == 0 {
        return "1".to_string();
    }
    let digits: String = (0..4).filter(|a| mask & (1 << a) != 0).map(|a| char::from(b'1' + a as u8)).collect();
    format!("e{digits}")
}

pub fn binomial4(k: usize) -> usize {
    basis(k).len()
}

/// Entries `(src component, axis, dst component, sign)` of the exterior
/// derivative on `k`-forms: `(dα)_dst += sign · ∂_axis α_src`.
pub(crate) fn d_table(k: usize) -> Vec<(usize, usize, usize, f64)> {
    let mut out = Vec::new();
    for (src, &mask) in basis(k).iter().enumerate() {
        for axis in 0..4 {
            let bit = 1u8 << axis;
            let s = wedge_sign(bit, mask);
            if s != 0 {
                out.push((src, axis, basis_index(bit | mask), s as f64));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct KForm {
    degree: usize,
    comps: Vec<ScalarField>,
}

impl KForm {
    pub fn new(degree: usize, comps: Vec<ScalarField>) -> Result<Self> {
        if degree > 4 {
            return Err(Error::Degree(format!("degree {degree} > 4")));
        }
        if comps.len() != binomial4(degree) {
            return Err(Error::Degree(format!(
                "degree {degree} needs {} components, got {}",
                binomial4(degree),
                comps.len()
            )));
        }
        let g = comps[0].grid();
        if let Some(c) = comps.iter().find(|c| c.grid() != g) {
            return Err(Error::GridMismatch(g.n(), c.grid().n()));
        }
        Ok(Self { degree, comps })
    }

    pub fn zero(grid: GridSpec, degree: usize) -> Self {
        Self { degree, comps: vec![ScalarField::zeros(grid); binomial4(degree)] }
    }

    /// `constant_form`: one real coefficient per basis element.
    pub fn constant(grid: GridSpec, degree: usize, coeffs: &[f64]) -> Result<Self> {
        if degree > 4 {
            return Err(Error::Degree(format!("degree {degree} > 4")));
        }
        if coeffs.len() != binomial4(degree) {
            return Err(Error::Degree(format!(
                "degree {degree} needs {} coefficients, got {}",
                binomial4(degree),
                coeffs.len()
            )));
        }
        Ok(Self {
            degree,
            comps: coeffs.iter().map(|&c| ScalarField::constant(grid, c)).collect(),
        })
    }

    /// `f · e^I` for the basis element with the given mask.
    pub fn monomial(coeff: ScalarField, mask: u8) -> Self {
        let degree = mask.count_ones() as usize;
        let grid = coeff.grid();
        let mut form = Self::zero(grid, degree);
        form.comps[basis_index(mask)] = coeff;
        form
    }

    /// Rebuild from a component-major flat vector.
    pub fn from_flat(grid: GridSpec, degree: usize, data: &[f64]) -> Self {
        let n = grid.len();
        assert_eq!(data.len(), n * binomial4(degree));
        Self {
            degree,
            comps: data.chunks_exact(n).map(|c| ScalarField::from_raw(grid, c.to_vec())).collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.comps.len() * self.grid().len());
        for c in &self.comps {
            out.extend_from_slice(c.values());
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> GridSpec {
        self.comps[0].grid()
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn comp(&self, mask: u8) -> &ScalarField {
        &self.comps[basis_index(mask)]
    }

    fn check_compatible(&self, other: &KForm) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::Degree(format!("degrees {} and {} differ", self.degree, other.degree)));
        }
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch(self.grid().n(), other.grid().n()));
        }
        Ok(())
    }

    pub fn add(&self, other: &KForm) -> Result<KForm> {
        self.check_compatible(other)?;
        Ok(Self {
            degree: self.degree,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm> {
        self.check_compatible(other)?;
        Ok(Self {
            degree: self.degree,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> KForm {
        Self { degree: self.degree, comps: self.comps.iter().map(|f| f.scale(c)).collect() }
    }

    /// Multiply every component by a scalar field.
    pub fn times(&self, f: &ScalarField) -> KForm {
        Self { degree: self.degree, comps: self.comps.iter().map(|c| c.mul(f)).collect() }
    }

    /// Largest absolute component value over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    /// Header (magic `T4KF`, version, n, degree) then components in basis order.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        grid::write_header(&mut w, grid::FORM_MAGIC, self.grid().n() as u32, self.degree as u32)?;
        for c in &self.comps {
            grid::write_f64s(&mut w, c.values())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let (n, degree) = grid::read_header(&mut r, grid::FORM_MAGIC)?;
        let g = GridSpec::new(n as usize)?;
        let degree = degree as usize;
        if degree > 4 {
            return Err(Error::Format(format!("degree {degree} in header")));
        }
        let comps = (0..binomial4(degree))
            .map(|_| ScalarField::from_vec(g, grid::read_f64s(&mut r, g.len())?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(degree, comps)
    }
}

/// `constant_form` as a free function.
pub fn constant_form(grid: GridSpec, degree: usize, coeffs: &[f64]) -> Result<KForm> {
    KForm::constant(grid, degree, coeffs)
}

/// Pointwise exterior product with exact permutation signs.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    let degree = a.degree + b.degree;
    if degree > 4 {
        return Err(Error::Degree(format!("wedge of degrees {} and {} exceeds 4", a.degree, b.degree)));
    }
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(a.grid().n(), b.grid().n()));
    }
    let grid = a.grid();
    let mut out = vec![vec![0.0; grid.len()]; binomial4(degree)];
    for (ia, &ma) in basis(a.degree).iter().enumerate() {
        for (ib, &mb) in basis(b.degree).iter().enumerate() {
            let s = wedge_sign(ma, mb);
            if s == 0 {
                continue;
            }
            let dst = &mut out[basis_index(ma | mb)];
            let (x, y) = (a.comps[ia].values(), b.comps[ib].values());
            let s = s as f64;
            for ((d, &p), &q) in dst.iter_mut().zip(x).zip(y) {
                *d += s * p * q;
            }
        }
    }
    Ok(KForm { degree, comps: out.into_iter().map(|v| ScalarField::from_raw(grid, v)).collect() })
}

/// Exterior derivative on component-major flat vectors of degree `k`.
pub(crate) fn d_flat(grid: GridSpec, k: usize, src: &[f64], dst: &mut [f64]) {
    let n = grid.len();
    let table = d_table(k);
    let parts = partials(grid, &table, |&(s, axis, _, _)| (&src[s * n..(s + 1) * n], axis));
    dst.fill(0.0);
    for ((_, _, d, sign), p) in table.iter().zip(&parts) {
        reduce::axpy(*sign, p, &mut dst[d * n..(d + 1) * n]);
    }
}

/// Euclidean transpose of [`d_flat`]: maps degree `k+1` to degree `k`.
///
/// The spectral derivative matrix is skew, so `dᵀ` uses `-∂`.
pub(crate) fn d_transpose_flat(grid: GridSpec, k: usize, src: &[f64], dst: &mut [f64]) {
    let n = grid.len();
    let table = d_table(k);
    let parts = partials(grid, &table, |&(_, axis, d, _)| (&src[d * n..(d + 1) * n], axis));
    dst.fill(0.0);
    for ((s, _, _, sign), p) in table.iter().zip(&parts) {
        reduce::axpy(-*sign, p, &mut dst[s * n..(s + 1) * n]);
    }
}

/// Partials for every table entry, computed in parallel; the caller
/// accumulates them in table order so results do not depend on thread count.
fn partials<'a, T: Sync>(
    grid: GridSpec,
    table: &[T],
    pick: impl Fn(&T) -> (&'a [f64], usize) + Sync,
) -> Vec<Vec<f64>> {
    table
        .par_iter()
        .map(|e| {
            let (field, axis) = pick(e);
            let mut out = vec![0.0; grid.len()];
            grid::partial_into(grid, field, axis, &mut out);
            out
        })
        .collect()
}

/// `ext_deriv`.
pub fn ext_deriv(a: &KForm) -> Result<KForm> {
    if a.degree >= 4 {
        return Err(Error::Degree("exterior derivative of a 4-form".into()));
    }
    let grid = a.grid();
    let mut out = vec![0.0; grid.len() * binomial4(a.degree + 1)];
    d_flat(grid, a.degree, &a.to_flat(), &mut out);
    Ok(KForm::from_flat(grid, a.degree + 1, &out))
}

/// Euclidean (coefficient-wise) adjoint of `ext_deriv`, lowering degree by one.
pub fn ext_deriv_transpose(b: &KForm) -> Result<KForm> {
    if b.degree == 0 {
        return Err(Error::Degree("transpose of d on 0-forms".into()));
    }
    let grid = b.grid();
    let mut out = vec![0.0; grid.len() * binomial4(b.degree - 1)];
    d_transpose_flat(grid, b.degree - 1, &b.to_flat(), &mut out);
    Ok(KForm::from_flat(grid, b.degree - 1, &out))
}

/// `integrate_top`: integral of a 4-form, `e1234` positively oriented.
pub fn integrate_top(a: &KForm) -> Result<f64> {
    if a.degree != 4 {
        return Err(Error::Degree(format!("integrate_top needs a 4-form, got degree {}", a.degree)));
    }
    Ok(a.comps[0].mean())
}

/// Pointwise inner product `⟨a, b⟩_g` as a scalar field (no volume factor).
pub fn pointwise_inner(a: &KForm, b: &KForm, g: &MetricField) -> Result<ScalarField> {
    a.check_compatible(b)?;
    if a.grid() != g.grid() {
        return Err(Error::GridMismatch(a.grid().n(), g.grid().n()));
    }
    let grid = a.grid();
    let n = grid.len();
    let gram = g.form_gram(a.degree);
    let mut gb = vec![0.0; b.comps.len() * n];
    gram.apply(&b.to_flat(), &mut gb);
    let af = a.to_flat();
    let mut out = vec![0.0; n];
    for c in 0..a.comps.len() {
        for x in 0..n {
            out[x] += af[c * n + x] * gb[c * n + x];
        }
    }
    Ok(ScalarField::from_raw(grid, out))
}

/// `l2_inner`: `∫ ⟨a, b⟩_g dvol_g`.
pub fn l2_inner(a: &KForm, b: &KForm, g: &MetricField) -> Result<f64> {
    let p = pointwise_inner(a, b, g)?;
    Ok(p.mul(g.sqrt_det()).mean())
}
