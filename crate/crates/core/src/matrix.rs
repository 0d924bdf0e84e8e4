//! Dense complex matrices and the handful of kernels the rest of the crate
//! is built from: Kronecker products, partial traces, Hermitian
//! eigendecomposition and the positivity / projection / unitarity tests.
//!
//! The Kronecker product follows the block convention in which the `(i, j)`
//! block of `a ⊗ b` is `a[i, j] · b`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical thresholds used throughout the crate.
///
/// `eps_eq` is an absolute entrywise comparison bound, `eps_psd` the floor
/// below which an eigenvalue counts as negative, and `eps_rank` the cut above
/// which an eigenvalue (or a probability weight) counts as nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub eps_eq: f64,
    pub eps_psd: f64,
    pub eps_rank: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_eq: 1e-9,
            eps_psd: 1e-9,
            eps_rank: 1e-8,
        }
    }
}

impl Tolerance {
    pub const MAX: f64 = 1e-3;

    pub fn new(eps_eq: f64, eps_psd: f64, eps_rank: f64) -> Result<Self> {
        for (name, v) in [("eps_eq", eps_eq), ("eps_psd", eps_psd), ("eps_rank", eps_rank)] {
            if !(v > 0.0 && v <= Self::MAX) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {v} must lie in (0, {}]",
                    Self::MAX
                )));
            }
        }
        Ok(Tolerance {
            eps_eq,
            eps_psd,
            eps_rank,
        })
    }

    /// Multiplies all three thresholds by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.eps_eq * factor,
            self.eps_psd * factor,
            self.eps_rank * factor,
        )
    }

    /// Bound for residuals of composite computations (`10 · eps_eq`).
    pub fn residual(&self) -> f64 {
        10.0 * self.eps_eq
    }

    /// Whether a probability weight counts as zero.
    pub fn is_null_weight(&self, w: f64) -> bool {
        w <= self.eps_rank
    }
}

#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

/// Result of a Hermitian eigendecomposition, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// Projector onto the span of the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let n = self.vectors.rows();
        let mut p = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            if keep(lambda) {
                let v = self.vectors.0.column(k);
                p.0 += v * v.adjoint();
            }
        }
        p
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    /// The matrix unit `E_ab` of size `n × n`.
    pub fn unit(n: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(a, b)] = ONE;
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(DMatrix::from_fn(rows, cols, f))
    }

    /// Builds a matrix from row vectors, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::BadBlockStructure("ragged matrix rows".into()));
        }
        if rows
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        CMatrix(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self[(i, j)]).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        CMatrix(self.0.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Hilbert–Schmidt inner product `tr(self† · other)`.
    pub fn hs_inner(&self, other: &CMatrix) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise absolute difference; `INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.0.shape() != other.0.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn block(&self, row: usize, col: usize, nrows: usize, ncols: usize) -> CMatrix {
        CMatrix(self.0.view((row, col), (nrows, ncols)).into_owned())
    }

    pub fn set_block(&mut self, row: usize, col: usize, b: &CMatrix) {
        self.0
            .view_mut((row, col), (b.rows(), b.cols()))
            .copy_from(&b.0);
    }

    /// Block-diagonal matrix with the given blocks along the diagonal.
    pub fn block_diag<'a>(blocks: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
        let blocks: Vec<&CMatrix> = blocks.into_iter().collect();
        let r = blocks.iter().map(|b| b.rows()).sum();
        let c = blocks.iter().map(|b| b.cols()).sum();
        let mut out = CMatrix::zeros(r, c);
        let (mut i, mut j) = (0, 0);
        for b in blocks {
            out.set_block(i, j, b);
            i += b.rows();
            j += b.cols();
        }
        out
    }

    pub fn kron(&self, b: &CMatrix) -> CMatrix {
        CMatrix(self.0.kronecker(&b.0))
    }

    /// Traces out the left `M_p` factor of `M_p ⊗ M_n`: the sum of the
    /// diagonal `n × n` blocks.
    pub fn partial_trace_left(&self, p: usize, n: usize) -> Result<CMatrix> {
        if !self.is_square() || self.rows() != p * n || n == 0 {
            return Err(Error::BadBlockStructure(format!(
                "{}x{} matrix is not ({p}·{n})x({p}·{n})",
                self.rows(),
                self.cols()
            )));
        }
        let mut out = CMatrix::zeros(n, n);
        for k in 0..p {
            out.0 += self.0.view((k * n, k * n), (n, n));
        }
        Ok(out)
    }

    /// Max entrywise distance to the adjoint; `INFINITY` when not square.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.hermitian_deviation() <= tol.eps_eq
    }

    pub fn eigh(&self, tol: &Tolerance) -> Result<Eigh> {
        let dev = self.hermitian_deviation();
        if dev > tol.eps_eq {
            return Err(Error::NotHermitian(dev));
        }
        Ok(self.eigh_unchecked())
    }

    /// Eigendecomposition of the Hermitian part `(a + a†)/2`.
    pub(crate) fn eigh_unchecked(&self) -> Eigh {
        let n = self.rows();
        if n == 0 {
            return Eigh {
                values: vec![],
                vectors: CMatrix::zeros(0, 0),
            };
        }
        let herm = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Eigh { values, vectors }
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh_unchecked()
            .values
            .last()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: &Tolerance) -> bool {
        self.is_hermitian(tol) && self.min_eigenvalue() >= -tol.eps_psd
    }

    pub fn is_projection(&self, tol: &Tolerance) -> bool {
        self.is_hermitian(tol) && (self * self).approx_eq(self, tol.eps_eq)
    }

    pub fn is_unitary(&self, tol: &Tolerance) -> bool {
        self.is_square()
            && (self * &self.adjoint()).approx_eq(&CMatrix::identity(self.rows()), tol.eps_eq)
    }

    /// Projector onto the eigenspaces with eigenvalue above `eps_rank`.
    pub fn support_projector(&self, tol: &Tolerance) -> Result<CMatrix> {
        Ok(self.eigh(tol)?.projector(|l| l > tol.eps_rank))
    }

    /// Positive square root of a PSD matrix (negative eigenvalues clipped to zero).
    pub fn psd_sqrt(&self, tol: &Tolerance) -> Result<CMatrix> {
        let e = self.eigh(tol)?;
        let d = CMatrix::from_diag(&e.values.iter().map(|l| l.max(0.0).sqrt()).collect::<Vec<_>>());
        Ok(&(&e.vectors * &d) * &e.vectors.adjoint())
    }

    /// Inverse square root of a positive definite matrix.
    pub fn inv_sqrt(&self, tol: &Tolerance) -> Result<CMatrix> {
        let e = self.eigh(tol)?;
        if let Some(&min) = e.values.last() {
            if min <= tol.eps_rank {
                return Err(Error::NotPsd(min));
            }
        }
        let d = CMatrix::from_diag(&e.values.iter().map(|l| 1.0 / l.sqrt()).collect::<Vec<_>>());
        Ok(&(&e.vectors * &d) * &e.vectors.adjoint())
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 * rhs.0)
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.0 += &rhs.0;
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 - rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}
