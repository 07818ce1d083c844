//! Dense complex tensors over product point sets, with slotwise matrix
//! application. This is the workhorse of the composed quadrature solver: a
//! slot operator is a small complex matrix contracted against one axis.

use crate::Complex64;
use rayon::prelude::*;

/// Row-major complex matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Complex64::new(0.0, 0.0), |acc, (&m, &v)| acc + m * v)
            })
            .collect()
    }
}

/// Dense tensor with row-major (last axis fastest) layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl Tensor {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(shape: Vec<usize>, f: impl Fn(&[usize]) -> Complex64 + Sync) -> Self {
        let n: usize = shape.iter().product();
        let dims = shape.clone();
        let data: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|flat| {
                let mut idx = vec![0usize; dims.len()];
                let mut rest = flat;
                for ax in (0..dims.len()).rev() {
                    idx[ax] = rest % dims[ax];
                    rest /= dims[ax];
                }
                f(&idx)
            })
            .collect();
        Tensor { shape, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (ax, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[ax]);
            flat = flat * self.shape[ax] + i;
        }
        flat
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.flat_index(idx)]
    }

    /// Contract `axis` with the matrix `m` (`m.cols` must equal
    /// `shape[axis]`); the axis length becomes `m.rows`.
    pub fn apply_axis(&self, axis: usize, m: &CMatrix) -> Tensor {
        assert_eq!(self.shape[axis], m.cols, "axis/matrix size mismatch");
        let outer: usize = self.shape[..axis].iter().product();
        let inner: usize = self.shape[axis + 1..].iter().product();
        let nax = self.shape[axis];
        let mut shape = self.shape.clone();
        shape[axis] = m.rows;
        let data: Vec<Complex64> = (0..outer * m.rows)
            .into_par_iter()
            .flat_map_iter(|or| {
                let o = or / m.rows;
                let r = or % m.rows;
                let src_base = o * nax * inner;
                let row = m.row(r);
                (0..inner).map(move |i| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (s, &mv) in row.iter().enumerate() {
                        acc += mv * self.data[src_base + s * inner + i];
                    }
                    acc
                })
            })
            .collect();
        Tensor { shape, data }
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.shape, other.shape);
        Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Weighted `L^p` norm with a tensor-product weight (one weight vector
    /// per axis).
    pub fn lp_norm(&self, p: f64, axis_weights: &[Vec<f64>]) -> f64 {
        assert_eq!(axis_weights.len(), self.shape.len());
        let mut acc = 0.0;
        for (flat, v) in self.data.iter().enumerate() {
            let mut rest = flat;
            let mut w = 1.0;
            for ax in (0..self.shape.len()).rev() {
                w *= axis_weights[ax][rest % self.shape[ax]];
                rest /= self.shape[ax];
            }
            acc += w * v.norm().powf(p);
        }
        acc.powf(1.0 / p)
    }

    /// Weighted inner product `<self, other>` with tensor-product weights.
    pub fn weighted_inner(&self, other: &Tensor, axis_weights: &[Vec<f64>]) -> Complex64 {
        assert_eq!(self.shape, other.shape);
        let mut acc = Complex64::new(0.0, 0.0);
        for (flat, (a, b)) in self.data.iter().zip(&other.data).enumerate() {
            let mut rest = flat;
            let mut w = 1.0;
            for ax in (0..self.shape.len()).rev() {
                w *= axis_weights[ax][rest % self.shape[ax]];
                rest /= self.shape[ax];
            }
            acc += a * b.conj() * w;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn apply_axis_small() {
        // 2x3 tensor, multiply axis 1 by a 2x3 matrix
        let t = Tensor {
            shape: vec![2, 3],
            data: (0..6).map(|i| c(i as f64)).collect(),
        };
        let mut m = CMatrix::zeros(2, 3);
        // row0 = sum, row1 = last entry
        for j in 0..3 {
            m.set(0, j, c(1.0));
        }
        m.set(1, 2, c(1.0));
        let out = t.apply_axis(1, &m);
        assert_eq!(out.shape, vec![2, 2]);
        assert_eq!(out.get(&[0, 0]), c(3.0));
        assert_eq!(out.get(&[0, 1]), c(2.0));
        assert_eq!(out.get(&[1, 0]), c(12.0));
        assert_eq!(out.get(&[1, 1]), c(5.0));
    }

    #[test]
    fn apply_axis_matches_matvec_on_first_axis() {
        let t = Tensor {
            shape: vec![3, 2],
            data: (0..6).map(|i| c((i * i) as f64)).collect(),
        };
        let mut m = CMatrix::zeros(2, 3);
        for (r, row) in [[1.0, 2.0, 3.0], [0.5, 0.0, -1.0]].iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(r, j, c(v));
            }
        }
        let out = t.apply_axis(0, &m);
        for col in 0..2 {
            let x: Vec<Complex64> = (0..3).map(|i| t.get(&[i, col])).collect();
            let y = m.matvec(&x);
            for r in 0..2 {
                assert_eq!(out.get(&[r, col]), y[r]);
            }
        }
    }

    #[test]
    fn lp_norm_tensor_weights() {
        let t = Tensor {
            shape: vec![2, 2],
            data: vec![c(1.0), c(2.0), c(3.0), c(4.0)],
        };
        let w = vec![vec![0.5, 0.5], vec![1.0, 1.0]];
        let n2 = t.lp_norm(2.0, &w);
        let expect = (0.5 * (1.0 + 4.0) + 0.5 * (9.0 + 16.0) as f64).sqrt();
        assert!((n2 - expect).abs() < 1e-14);
    }
}
