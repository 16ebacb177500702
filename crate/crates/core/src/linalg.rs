//! Small dense complex linear algebra used by the rate formulas.
//!
//! Matrices here stay tiny (a few antennas on each side), with the one
//! exception of full channel matrices whose long dimension is the user count;
//! those are only ever sampled, column-selected, or reduced row by row. The
//! only factorization is a Cholesky of `I + (Gram form)`, whose smallest
//! eigenvalue is at least one by construction, so no pivoting or
//! regularization is needed.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Contiguous view of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        debug_assert!(i < self.rows);
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// New matrix keeping only the listed columns, in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    /// Squared Euclidean norm of row `i`.
    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row(i).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Squared Euclidean norm of column `j`.
    pub fn col_norm_sq(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j).norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Inner product of row `i` with column `j` of `other`:
    /// `sum_k self[i,k] * other[k,j]`.
    pub fn row_dot_col(&self, i: usize, other: &ComplexMatrix, j: usize) -> Complex64 {
        debug_assert_eq!(self.cols, other.rows);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..self.cols {
            acc += self.get(i, k) * other.get(k, j);
        }
        acc
    }
}

/// Hermitian matrix, stored in full.
///
/// Instances are built from identity-plus-Gram accumulations, which keeps the
/// conjugate symmetry exact; positive definiteness then holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(c, 0.0));
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i * self.dim + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    /// `self += c * v v†` for a real coefficient `c`.
    pub fn add_scaled_outer(&mut self, v: &[Complex64], c: f64) {
        assert_eq!(v.len(), self.dim, "outer-product vector length");
        for i in 0..self.dim {
            for j in i..self.dim {
                let inc = v[i] * v[j].conj() * c;
                let cur = self.get(i, j);
                self.set(i, j, cur + inc);
                if i != j {
                    let cur = self.get(j, i);
                    self.set(j, i, cur + inc.conj());
                }
            }
        }
    }

    /// `self += c * A A†` where `A` has `self.dim` rows.
    pub fn add_scaled_gram(&mut self, a: &ComplexMatrix, c: f64) {
        assert_eq!(a.rows(), self.dim, "Gram accumulation row count");
        for k in 0..a.cols() {
            let col = a.col(k);
            self.add_scaled_outer(&col, c);
        }
    }

    /// `diag(A ⊕ B)`: block-diagonal concatenation.
    pub fn block_diag(a: &HermitianMatrix, b: &HermitianMatrix) -> Self {
        let dim = a.dim + b.dim;
        let mut m = Self::zeros(dim);
        for i in 0..a.dim {
            for j in 0..a.dim {
                m.set(i, j, a.get(i, j));
            }
        }
        for i in 0..b.dim {
            for j in 0..b.dim {
                m.set(a.dim + i, a.dim + j, b.get(i, j));
            }
        }
        m
    }
}

/// Log-determinant of a Hermitian positive definite matrix, in nats.
///
/// Cholesky-factorizes `A = L L†` and returns `2 * sum(log diag(L))`. A
/// non-positive pivot signals [`Error::NotPositiveDefinite`].
pub fn logdet_hpd(a: &HermitianMatrix) -> Result<f64> {
    let n = a.dim;
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let root = d.sqrt();
        l[j * n + j] = Complex64::new(root, 0.0);
        logdet += d.ln();
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / root;
        }
    }
    Ok(logdet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_cn_matrix, RandomStream};

    fn gram_plus_identity(g: &ComplexMatrix) -> HermitianMatrix {
        let mut a = HermitianMatrix::identity(g.rows());
        a.add_scaled_gram(g, 1.0);
        a
    }

    /// Log-determinant of a 3x3 Hermitian matrix by cofactor expansion.
    fn logdet3_bruteforce(a: &HermitianMatrix) -> f64 {
        assert_eq!(a.dim(), 3);
        let m = |i: usize, j: usize| a.get(i, j);
        let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        assert!(det.im.abs() < 1e-9 * det.re.abs());
        det.re.ln()
    }

    #[test]
    fn logdet_identity_is_zero() {
        assert_eq!(logdet_hpd(&HermitianMatrix::identity(4)).unwrap(), 0.0);
    }

    #[test]
    fn logdet_diagonal() {
        let a = HermitianMatrix::from_diagonal(&[2.0, 2.0]);
        let v = logdet_hpd(&a).unwrap();
        assert!((v - 2.0 * 2.0_f64.ln()).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn logdet_matches_cofactor_expansion() {
        let g = sample_cn_matrix(RandomStream::new(7), 3, 3);
        let a = gram_plus_identity(&g);
        let fast = logdet_hpd(&a).unwrap();
        let slow = logdet3_bruteforce(&a);
        assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let a = HermitianMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            logdet_hpd(&a),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn logdet_block_diag_is_additive() {
        for seed in 0..20 {
            let s = RandomStream::new(900 + seed);
            let a = gram_plus_identity(&sample_cn_matrix(s.substream(0), 3, 2));
            let b = gram_plus_identity(&sample_cn_matrix(s.substream(1), 4, 5));
            let sum = logdet_hpd(&a).unwrap() + logdet_hpd(&b).unwrap();
            let joint = logdet_hpd(&HermitianMatrix::block_diag(&a, &b)).unwrap();
            assert!((sum - joint).abs() < 1e-10, "seed {seed}: {sum} vs {joint}");
        }
    }

    #[test]
    fn logdet_sylvester_identity() {
        // log det(I + X X†) == log det(I + X† X) for all shapes up to 8x8.
        for m in 1..=8usize {
            for k in 1..=8usize {
                let x = sample_cn_matrix(RandomStream::new((m * 100 + k) as u64), m, k);
                let xt = ComplexMatrix::from_fn(k, m, |i, j| x.get(j, i).conj());
                let left = logdet_hpd(&gram_plus_identity(&x)).unwrap();
                let right = logdet_hpd(&gram_plus_identity(&xt)).unwrap();
                assert!((left - right).abs() < 1e-9, "m={m} k={k}: {left} vs {right}");
            }
        }
    }

    #[test]
    fn select_cols_picks_in_order() {
        let a = ComplexMatrix::from_fn(2, 4, |i, j| Complex64::new(i as f64, j as f64));
        let b = a.select_cols(&[3, 1]);
        assert_eq!(b.rows(), 2);
        assert_eq!(b.cols(), 2);
        assert_eq!(b.get(0, 0), Complex64::new(0.0, 3.0));
        assert_eq!(b.get(1, 1), Complex64::new(1.0, 1.0));
    }

    #[test]
    fn hermitian_gram_accumulation_is_exactly_hermitian() {
        let g = sample_cn_matrix(RandomStream::new(3), 5, 7);
        let a = gram_plus_identity(&g);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(a.get(i, j), a.get(j, i).conj());
            }
        }
    }
}
