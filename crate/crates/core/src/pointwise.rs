//! Node-wise small linear algebra: compound (minor) matrices on `Λᵏ` and
//! batched per-node matrices applied to component-major form vectors.

use nalgebra::Matrix4;

use crate::exterior::basis;

pub type Mat4 = Matrix4<f64>;

fn det_sub(m: &Mat4, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])],
        3 => {
            let a = |i: usize, j: usize| m[(rows[i], cols[j])];
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        4 => m.determinant(),
        _ => unreachable!(),
    }
}

pub(crate) fn axes_of(mask: u8) -> Vec<usize> {
    (0..4).filter(|a| mask & (1 << a) != 0).collect()
}

/// `k`-th compound matrix: entry `[I][J] = det(m[I, J])`, row-major,
/// dimension `C(4,k)`.
pub fn compound(m: &Mat4, k: usize) -> Vec<f64> {
    let b = basis(k);
    let dim = b.len();
    let mut out = vec![0.0; dim * dim];
    for (r, &i_mask) in b.iter().enumerate() {
        let rows = axes_of(i_mask);
        for (c, &j_mask) in b.iter().enumerate() {
            out[r * dim + c] = det_sub(m, &rows, &axes_of(j_mask));
        }
    }
    out
}

/// Row-major `dim x dim` transpose.
pub fn transpose(a: &[f64], dim: usize) -> Vec<f64> {
    let mut t = vec![0.0; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            t[c * dim + r] = a[r * dim + c];
        }
    }
    t
}

pub fn matmul(a: &[f64], b: &[f64], rows: usize, inner: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for k in 0..inner {
            let x = a[r * inner + k];
            if x == 0.0 {
                continue;
            }
            for c in 0..cols {
                out[r * cols + c] += x * b[k * cols + c];
            }
        }
    }
    out
}

/// One small dense matrix per lattice node, all of the same shape.
#[derive(Debug, Clone)]
pub struct NodeMatrices {
    rows: usize,
    cols: usize,
    nodes: usize,
    data: Vec<f64>,
}

impl NodeMatrices {
    pub fn from_fn(nodes: usize, rows: usize, cols: usize, f: impl Fn(usize) -> Vec<f64>) -> Self {
        let mut data = Vec::with_capacity(nodes * rows * cols);
        for node in 0..nodes {
            let m = f(node);
            debug_assert_eq!(m.len(), rows * cols);
            data.extend_from_slice(&m);
        }
        Self { rows, cols, nodes, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let s = self.rows * self.cols;
        &self.data[node * s..(node + 1) * s]
    }

    /// `dst[r*N + x] = Σ_c M_x[r][c] src[c*N + x]` on component-major vectors.
    pub fn apply(&self, src: &[f64], dst: &mut [f64]) {
        let n = self.nodes;
        debug_assert_eq!(src.len(), self.cols * n);
        debug_assert_eq!(dst.len(), self.rows * n);
        let (rows, cols) = (self.rows, self.cols);
        let mut v = [0.0f64; 6];
        for x in 0..n {
            for c in 0..cols {
                v[c] = src[c * n + x];
            }
            let m = &self.data[x * rows * cols..(x + 1) * rows * cols];
            for r in 0..rows {
                let mut acc = 0.0;
                for c in 0..cols {
                    acc += m[r * cols + c] * v[c];
                }
                dst[r * n + x] = acc;
            }
        }
    }

    /// Node-wise product `self * other`.
    pub fn then_after(&self, other: &NodeMatrices) -> NodeMatrices {
        assert_eq!(self.cols, other.rows);
        NodeMatrices::from_fn(self.nodes, self.rows, other.cols, |x| {
            matmul(self.at(x), other.at(x), self.rows, self.cols, other.cols)
        })
    }
}
