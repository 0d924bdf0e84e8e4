//! Finite-dimensional C*-algebras `M_{n_1} ⊕ … ⊕ M_{n_t}`, their elements,
//! and states written in block normal form `ξ(B) = Σ_j q_j tr(σ_j B_j)`.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Tolerance, C64};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Algebra {
    dims: Vec<usize>,
}

impl Algebra {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidAlgebra("at least one block is required".into()));
        }
        if let Some(k) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidAlgebra(format!("block {k} has dimension 0")));
        }
        Ok(Algebra { dims })
    }

    /// The full matrix algebra `M_n`.
    pub fn matrix(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// The commutative algebra `C^k`.
    pub fn commutative(k: usize) -> Result<Self> {
        Self::new(vec![1; k])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, block: usize) -> usize {
        self.dims[block]
    }

    /// Vector-space dimension `Σ n_j²`.
    pub fn linear_dim(&self) -> usize {
        self.dims.iter().map(|n| n * n).sum()
    }

    /// All matrix units `(block, row, col)` in block-major, row-major order.
    pub fn matrix_units(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.dims
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| (0..n).flat_map(move |a| (0..n).map(move |b| (k, a, b))))
    }

    pub(crate) fn check_same(&self, other: &Algebra) -> Result<()> {
        if self != other {
            return Err(Error::AlgebraMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    algebra: Algebra,
    blocks: Vec<CMatrix>,
}

impl AlgebraElement {
    pub fn new(algebra: Algebra, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::AlgebraMismatch(format!(
                "{} blocks for an algebra with {} blocks",
                blocks.len(),
                algebra.num_blocks()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(algebra.dims()).enumerate() {
            if b.rows() != n || b.cols() != n {
                return Err(Error::AlgebraMismatch(format!(
                    "block {k} is {}x{}, expected {n}x{n}",
                    b.rows(),
                    b.cols()
                )));
            }
            if !b.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(AlgebraElement { algebra, blocks })
    }

    pub fn zero(algebra: &Algebra) -> Self {
        let blocks = algebra.dims().iter().map(|&n| CMatrix::zeros(n, n)).collect();
        AlgebraElement {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn unit(algebra: &Algebra) -> Self {
        let blocks = algebra.dims().iter().map(|&n| CMatrix::identity(n)).collect();
        AlgebraElement {
            algebra: algebra.clone(),
            blocks,
        }
    }

    pub fn matrix_unit(algebra: &Algebra, block: usize, a: usize, b: usize) -> Self {
        let mut e = Self::zero(algebra);
        e.blocks[block] = CMatrix::unit(algebra.dim(block), a, b);
        e
    }

    /// Element of `M_n` viewed as a one-block algebra.
    pub fn single(m: CMatrix) -> Result<Self> {
        let alg = Algebra::matrix(m.rows())?;
        Self::new(alg, vec![m])
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    fn zip_with(
        &self,
        other: &AlgebraElement,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> Result<AlgebraElement> {
        self.algebra.check_same(&other.algebra)?;
        Ok(AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: C64) -> AlgebraElement {
        self.map_blocks(|b| b.scale(s))
    }

    pub fn adjoint(&self) -> AlgebraElement {
        self.map_blocks(CMatrix::adjoint)
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> AlgebraElement {
        AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    /// `Σ_j tr(block_j)`.
    pub fn total_trace(&self) -> C64 {
        self.blocks.iter().map(CMatrix::trace).sum()
    }

    /// Hilbert–Schmidt inner product `Σ_j tr(a_j† b_j)`.
    pub fn hs_inner(&self, other: &AlgebraElement) -> Result<C64> {
        self.algebra.check_same(&other.algebra)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.hs_inner(b))
            .sum())
    }

    /// Max entrywise difference over all blocks; `INFINITY` on algebra mismatch.
    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        if self.algebra != other.algebra {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(CMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn is_psd(&self, tol: &Tolerance) -> bool {
        self.blocks.iter().all(|b| b.is_psd(tol))
    }
}

/// A state in normal form: weights `q_j` and one density matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    algebra: Algebra,
    weights: Vec<f64>,
    densities: Vec<CMatrix>,
}

impl State {
    pub fn new(
        algebra: Algebra,
        weights: Vec<f64>,
        densities: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if weights.len() != algebra.num_blocks() || densities.len() != algebra.num_blocks() {
            return Err(Error::AlgebraMismatch(format!(
                "state has {} weights and {} densities for {} blocks",
                weights.len(),
                densities.len(),
                algebra.num_blocks()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -tol.eps_eq) {
            return Err(Error::InvalidProbability(format!("weight {w} is negative")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.eps_eq {
            return Err(Error::TraceNotOne(total));
        }
        let elem = AlgebraElement::new(algebra, densities)?;
        for d in elem.blocks() {
            check_density(d, tol)?;
        }
        let AlgebraElement { algebra, blocks } = elem;
        Ok(State {
            algebra,
            weights: weights.into_iter().map(|w| w.max(0.0)).collect(),
            densities: blocks,
        })
    }

    /// Normalizes a tuple of PSD blocks with total trace one into `(q_j, σ_j)`.
    /// Blocks with weight at most `eps_rank` get the maximally mixed density.
    pub fn from_density(algebra: &Algebra, blocks: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let elem = AlgebraElement::new(algebra.clone(), blocks)?;
        for b in elem.blocks() {
            if !b.is_hermitian(tol) {
                return Err(Error::NotHermitian(b.hermitian_deviation()));
            }
            let min = b.min_eigenvalue();
            if min < -tol.eps_psd {
                return Err(Error::NotPsd(min));
            }
        }
        let total = elem.total_trace().re;
        if (total - 1.0).abs() > tol.eps_eq {
            return Err(Error::TraceNotOne(total));
        }
        let mut weights = Vec::with_capacity(algebra.num_blocks());
        let mut densities = Vec::with_capacity(algebra.num_blocks());
        for b in elem.into_blocks() {
            let q = b.trace().re.max(0.0);
            if tol.is_null_weight(q) {
                densities.push(maximally_mixed(b.rows()));
            } else {
                densities.push(b.scale_real(1.0 / q));
            }
            weights.push(q);
        }
        Ok(State {
            algebra: algebra.clone(),
            weights,
            densities,
        })
    }

    /// The state `tr(ρ ·)` on `M_n`.
    pub fn from_matrix(rho: CMatrix, tol: &Tolerance) -> Result<Self> {
        let alg = Algebra::matrix(rho.rows())?;
        Self::from_density(&alg, vec![rho], tol)
    }

    /// A probability vector as a state on `C^k`.
    pub fn classical(weights: &[f64], tol: &Tolerance) -> Result<Self> {
        let alg = Algebra::commutative(weights.len())?;
        let densities = weights.iter().map(|_| CMatrix::identity(1)).collect();
        Self::new(alg, weights.to_vec(), densities, tol)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn densities(&self) -> &[CMatrix] {
        &self.densities
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn density(&self, j: usize) -> &CMatrix {
        &self.densities[j]
    }

    /// Blocks whose weight counts as zero.
    pub fn null_blocks(&self, tol: &Tolerance) -> Vec<bool> {
        self.weights.iter().map(|&q| tol.is_null_weight(q)).collect()
    }

    /// The tuple `(q_j σ_j)_j`, the Hilbert–Schmidt representative of the state.
    pub fn density_tuple(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self
                .weights
                .iter()
                .zip(&self.densities)
                .map(|(&q, s)| s.scale_real(q))
                .collect(),
        }
    }

    pub fn eval(&self, element: &AlgebraElement) -> Result<C64> {
        self.algebra.check_same(element.algebra())?;
        Ok(self
            .weights
            .iter()
            .zip(&self.densities)
            .zip(element.blocks())
            .map(|((&q, s), b)| (s * b).trace() * q)
            .sum())
    }

    pub fn support(&self, tol: &Tolerance) -> SupportProjection {
        let blocks = self
            .weights
            .iter()
            .zip(&self.densities)
            .map(|(&q, s)| {
                if tol.is_null_weight(q) {
                    CMatrix::zeros(s.rows(), s.rows())
                } else {
                    s.eigh_unchecked().projector(|l| l > tol.eps_rank)
                }
            })
            .collect();
        SupportProjection {
            algebra: self.algebra.clone(),
            blocks,
        }
    }

    /// Membership in `N_ξ = A·(1 − P_ξ)`, tested as `a·P_ξ = 0`.
    pub fn in_null_space(&self, element: &AlgebraElement, tol: &Tolerance) -> Result<bool> {
        self.algebra.check_same(element.algebra())?;
        let p = self.support(tol);
        Ok(p.right_mul(element)?.max_abs() <= tol.eps_eq)
    }

    /// Max entrywise distance between normal forms, ignoring the densities
    /// of null blocks (which carry no information).
    pub fn distance(&self, other: &State) -> f64 {
        if self.algebra != other.algebra {
            return f64::INFINITY;
        }
        self.density_tuple().max_abs_diff(&other.density_tuple())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportProjection {
    algebra: Algebra,
    blocks: Vec<CMatrix>,
}

impl SupportProjection {
    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &CMatrix {
        &self.blocks[j]
    }

    pub fn to_element(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.clone(),
        }
    }

    /// `1 − P`.
    pub fn complement(&self) -> AlgebraElement {
        AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|p| &CMatrix::identity(p.rows()) - p)
                .collect(),
        }
    }

    /// `a · P`.
    pub fn right_mul(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        a.mul(&self.to_element())
    }
}

pub fn maximally_mixed(n: usize) -> CMatrix {
    CMatrix::identity(n).scale_real(1.0 / n as f64)
}

/// Checks that `d` is PSD with unit trace.
pub fn check_density(d: &CMatrix, tol: &Tolerance) -> Result<()> {
    if !d.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            actual: format!("{}x{}", d.rows(), d.cols()),
        });
    }
    if !d.is_hermitian(tol) {
        return Err(Error::NotHermitian(d.hermitian_deviation()));
    }
    let min = d.min_eigenvalue();
    if min < -tol.eps_psd {
        return Err(Error::NotPsd(min));
    }
    let tr = d.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol.eps_eq {
        return Err(Error::TraceNotOne(tr.re));
    }
    Ok(())
}
