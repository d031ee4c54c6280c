//! Small dense complex linear algebra shared by the solvers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A time series of square matrices stored contiguously, row-major per
/// entry. Used for propagators and kernels on the time lattice, where the
/// inner loops run over millions of small products.
#[derive(Debug, Clone, PartialEq)]
pub struct MatSeries {
    dim: usize,
    data: Vec<Complex64>,
}

impl MatSeries {
    pub fn zeros(dim: usize, len: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim * len],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / (self.dim * self.dim)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, k: usize) -> &[Complex64] {
        let s = self.dim * self.dim;
        &self.data[k * s..(k + 1) * s]
    }

    pub fn at_mut(&mut self, k: usize) -> &mut [Complex64] {
        let s = self.dim * self.dim;
        &mut self.data[k * s..(k + 1) * s]
    }

    /// Entry `(i, j)` of the matrix at step `k`.
    pub fn entry(&self, k: usize, i: usize, j: usize) -> Complex64 {
        self.data[k * self.dim * self.dim + i * self.dim + j]
    }

    pub fn matrix(&self, k: usize) -> CMatrix {
        CMatrix::from_row_slice(self.dim, self.dim, self.at(k))
    }

    pub fn set_matrix(&mut self, k: usize, m: &CMatrix) {
        let n = self.dim;
        let dst = self.at_mut(k);
        for i in 0..n {
            for j in 0..n {
                dst[i * n + j] = m[(i, j)];
            }
        }
    }

    pub fn from_matrices(dim: usize, mats: &[CMatrix]) -> Self {
        let mut out = Self::zeros(dim, mats.len());
        for (k, m) in mats.iter().enumerate() {
            out.set_matrix(k, m);
        }
        out
    }

    pub fn to_matrices(&self) -> Vec<CMatrix> {
        (0..self.len()).map(|k| self.matrix(k)).collect()
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Scalar series (only meaningful for `dim == 1`).
    pub fn scalars(&self) -> &[Complex64] {
        debug_assert_eq!(self.dim, 1);
        &self.data
    }
}

/// `out += alpha * a * b` for row-major `n x n` blocks.
#[inline]
pub(crate) fn mul_acc(out: &mut [Complex64], a: &[Complex64], b: &[Complex64], n: usize, alpha: f64) {
    if n == 1 {
        out[0] += a[0] * b[0] * alpha;
        return;
    }
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k] * alpha;
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
}

/// `out += alpha * a * b^dagger`.
#[inline]
pub(crate) fn mul_adj_acc(out: &mut [Complex64], a: &[Complex64], b: &[Complex64], n: usize, alpha: f64) {
    if n == 1 {
        out[0] += a[0] * b[0].conj() * alpha;
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let mut s = ZERO;
            for k in 0..n {
                s += a[i * n + k] * b[j * n + k].conj();
            }
            out[i * n + j] += s * alpha;
        }
    }
}

pub(crate) fn block_to_matrix(n: usize, block: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(n, n, block)
}

pub(crate) fn matrix_to_block(m: &CMatrix, out: &mut [Complex64]) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m[(i, j)];
        }
    }
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest entry of `|m - m^dagger|` relative to the largest entry of `m`
/// (absolute when `m` is tiny).
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let diff = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    diff / scale
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `exp(-i h t)` for Hermitian `h`, via its eigendecomposition.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let n = h.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, Complex64::from_polar(1.0, -h[(0, 0)].re * t));
    }
    let eig = hermitian_part(h).symmetric_eigen();
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

/// Modulus of the determinant.
pub fn abs_determinant(m: &CMatrix) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().lu().determinant().norm()
}

pub(crate) fn require_square(m: &CMatrix, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn block_products_match_nalgebra() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.5, -1.0), c(-0.3, 0.0), c(2.0, 1.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 1.0), c(3.0, -2.0), c(0.2, 0.0)]);
        let mut ab = vec![ZERO; 4];
        let mut abh = vec![ZERO; 4];
        let (mut ba, mut bb) = (vec![ZERO; 4], vec![ZERO; 4]);
        matrix_to_block(&a, &mut ba);
        matrix_to_block(&b, &mut bb);
        mul_acc(&mut ab, &ba, &bb, 2, 2.0);
        mul_adj_acc(&mut abh, &ba, &bb, 2, 1.0);
        assert!(max_abs_diff(&block_to_matrix(2, &ab), &(&a * &b * c(2.0, 0.0))) < 1e-14);
        assert!(max_abs_diff(&block_to_matrix(2, &abh), &(&a * b.adjoint())) < 1e-14);
    }

    #[test]
    fn propagator_is_unitary_and_matches_scalar_phase() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, -0.2), c(0.3, 0.2), c(-0.5, 0.0)]);
        let u = unitary_propagator(&h, 1.7);
        let id = CMatrix::identity(2, 2);
        assert!(max_abs_diff(&(&u * u.adjoint()), &id) < 1e-13);
        let s = unitary_propagator(&CMatrix::from_element(1, 1, c(2.0, 0.0)), 0.5);
        assert!((s[(0, 0)] - Complex64::from_polar(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn series_roundtrip() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let s = MatSeries::from_matrices(2, &[m.clone(), m.adjoint()]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.entry(0, 0, 1), c(2.0, 0.0));
        assert_eq!(s.matrix(1), m.adjoint());
    }
}
