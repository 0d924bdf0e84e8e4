//! Unital *-homomorphisms in Bratteli form.
//!
//! A hom `F: M_{n_1} ⊕ … ⊕ M_{n_t} → M_{m_1} ⊕ … ⊕ M_{m_s}` is given by a
//! multiplicity matrix `c_ij` (copies of source block `j` inside target
//! block `i`) and one unitary per target block:
//!
//! ```text
//! F(B)_i = U_i · diag(B_1 × c_i1, …, B_t × c_it) · U_i†,   m_i = Σ_j c_ij n_j.
//! ```

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::maps::BlockMap;
use crate::matrix::{CMatrix, Tolerance};

#[derive(Debug, Clone, PartialEq)]
pub struct BratteliHom {
    source: Algebra,
    target: Algebra,
    multiplicities: Vec<Vec<usize>>,
    unitaries: Vec<CMatrix>,
}

impl BratteliHom {
    pub fn new(
        source: Algebra,
        target: Algebra,
        multiplicities: Vec<Vec<usize>>,
        unitaries: Vec<CMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let (s, t) = (target.num_blocks(), source.num_blocks());
        if multiplicities.len() != s || multiplicities.iter().any(|row| row.len() != t) {
            return Err(Error::DimensionMismatch {
                expected: format!("{s}x{t} multiplicity matrix"),
                actual: format!(
                    "{} rows of lengths {:?}",
                    multiplicities.len(),
                    multiplicities.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            });
        }
        for (i, row) in multiplicities.iter().enumerate() {
            let actual = row
                .iter()
                .zip(source.dims())
                .try_fold(0usize, |acc, (&c, &n)| c.checked_mul(n).and_then(|x| acc.checked_add(x)))
                .unwrap_or(usize::MAX);
            if actual != target.dim(i) {
                return Err(Error::DimensionLaw {
                    block: i,
                    expected: target.dim(i),
                    actual,
                });
            }
        }
        if unitaries.len() != s {
            return Err(Error::DimensionMismatch {
                expected: format!("{s} unitaries"),
                actual: unitaries.len().to_string(),
            });
        }
        for (i, u) in unitaries.iter().enumerate() {
            if u.rows() != target.dim(i) || u.cols() != target.dim(i) {
                return Err(Error::DimensionMismatch {
                    expected: format!("{0}x{0} unitary for block {i}", target.dim(i)),
                    actual: format!("{}x{}", u.rows(), u.cols()),
                });
            }
            if !u.is_finite() {
                return Err(Error::NonFinite);
            }
            if !u.is_unitary(tol) {
                let dev = (u * &u.adjoint()).max_abs_diff(&CMatrix::identity(u.rows()));
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(BratteliHom {
            source,
            target,
            multiplicities,
            unitaries,
        })
    }

    /// Hom in standard form (all unitaries trivial).
    pub fn standard(source: Algebra, multiplicities: Vec<Vec<usize>>) -> Result<Self> {
        let target_dims: Vec<usize> = multiplicities
            .iter()
            .map(|row| row.iter().zip(source.dims()).map(|(c, n)| c * n).sum())
            .collect();
        let target = Algebra::new(target_dims)?;
        let unitaries = target.dims().iter().map(|&m| CMatrix::identity(m)).collect();
        Self::new(source, target, multiplicities, unitaries, &Tolerance::default())
    }

    pub fn identity(algebra: &Algebra) -> Self {
        let t = algebra.num_blocks();
        let c = (0..t).map(|i| (0..t).map(|j| usize::from(i == j)).collect()).collect();
        Self::standard(algebra.clone(), c).expect("identity multiplicities satisfy the dimension law")
    }

    /// The inclusion `B ↦ 1_p ⊗ B` of `M_n` into `M_{pn}`.
    pub fn block_diagonal(n: usize, p: usize) -> Result<Self> {
        Self::standard(Algebra::matrix(n)?, vec![vec![p]])
    }

    pub fn source(&self) -> &Algebra {
        &self.source
    }

    pub fn target(&self) -> &Algebra {
        &self.target
    }

    pub fn multiplicities(&self) -> &[Vec<usize>] {
        &self.multiplicities
    }

    pub fn multiplicity(&self, i: usize, j: usize) -> usize {
        self.multiplicities[i][j]
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn unitary(&self, i: usize) -> &CMatrix {
        &self.unitaries[i]
    }

    /// Row offset of the superblock holding the copies of source block `j`
    /// inside target block `i`.
    pub fn superblock_offset(&self, i: usize, j: usize) -> usize {
        self.multiplicities[i][..j]
            .iter()
            .zip(self.source.dims())
            .map(|(c, n)| c * n)
            .sum()
    }

    pub fn apply(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.check_same(b.algebra())?;
        let blocks = self
            .multiplicities
            .iter()
            .zip(&self.unitaries)
            .map(|(row, u)| {
                let copies: Vec<&CMatrix> = row
                    .iter()
                    .zip(b.blocks())
                    .flat_map(|(&c, bj)| std::iter::repeat_n(bj, c))
                    .collect();
                let d = CMatrix::block_diag(copies);
                &(u * &d) * &u.adjoint()
            })
            .collect();
        AlgebraElement::new(self.target.clone(), blocks)
    }

    pub fn to_blockmap(&self) -> BlockMap {
        BlockMap::from_linear(&self.source, &self.target, |e| self.apply(e))
            .expect("hom output lives in the target algebra")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::verify_hom;
    use crate::matrix::C64;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn dimension_law_is_enforced() {
        let src = Algebra::new(vec![1, 2]).unwrap();
        let tgt = Algebra::new(vec![4]).unwrap();
        let err = BratteliHom::new(src, tgt, vec![vec![1, 1]], vec![CMatrix::identity(4)], &tol()).unwrap_err();
        assert_eq!(err, Error::DimensionLaw { block: 0, expected: 4, actual: 3 });
    }

    #[test]
    fn non_unitary_rejected() {
        let src = Algebra::matrix(2).unwrap();
        let err = BratteliHom::new(src.clone(), src, vec![vec![1]], vec![CMatrix::from_diag(&[1.0, 2.0])], &tol())
            .unwrap_err();
        assert!(matches!(err, Error::NotUnitary(_)));
    }

    #[test]
    fn block_diagonal_inclusion() {
        let f = BratteliHom::block_diagonal(2, 3).unwrap();
        let b = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64 + 2.0 * j as f64, 1.0));
        let out = f.apply(&AlgebraElement::single(b.clone()).unwrap()).unwrap();
        assert!(out.block(0).approx_eq(&CMatrix::identity(3).kron(&b), 0.0));
    }

    #[test]
    fn classical_function_hom() {
        // f: {0,1,2} -> {0,1}, f = (1, 0, 1); c_ij = δ_{f(i) j}
        let f = [1usize, 0, 1];
        let src = Algebra::commutative(2).unwrap();
        let c = f.iter().map(|&fi| (0..2).map(|j| usize::from(fi == j)).collect()).collect();
        let hom = BratteliHom::standard(src.clone(), c).unwrap();
        let b = AlgebraElement::new(src, vec![CMatrix::from_diag(&[2.0]), CMatrix::from_diag(&[5.0])]).unwrap();
        let out = hom.apply(&b).unwrap();
        let vals: Vec<f64> = out.blocks().iter().map(|m| m[(0, 0)].re).collect();
        assert_eq!(vals, vec![5.0, 2.0, 5.0]);
    }

    #[test]
    fn single_copy_is_conjugation() {
        let alg = Algebra::matrix(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_real_rows(&[&[s, s], &[s, -s]]);
        let hom = BratteliHom::new(alg.clone(), alg, vec![vec![1]], vec![u.clone()], &tol()).unwrap();
        let b = CMatrix::from_diag(&[1.0, 0.0]);
        let out = hom.apply(&AlgebraElement::single(b.clone()).unwrap()).unwrap();
        assert!(out.block(0).approx_eq(&(&(&u * &b) * &u.adjoint()), 1e-15));
    }

    #[test]
    fn blockmap_of_hom_is_cpu_hom() {
        let src = Algebra::new(vec![2, 1]).unwrap();
        let hom = BratteliHom::standard(src, vec![vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(hom.target().dims(), &[4, 4, 1]);
        let map = hom.to_blockmap();
        assert!(map.is_cp(&tol()) && map.is_unital(&tol()));
        assert!(verify_hom(&map, &tol()));
        assert!(BratteliHom::identity(hom.source()).to_blockmap().equals(&BlockMap::identity(hom.source()), &tol()));
        assert_eq!(hom.superblock_offset(0, 1), 2);
    }
}
