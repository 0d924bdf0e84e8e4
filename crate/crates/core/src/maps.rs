//! Linear maps between direct-sum algebras, stored canonically as a grid of
//! Choi matrices.
//!
//! For `φ: M_{m_1} ⊕ … ⊕ M_{m_s} → M_{n_1} ⊕ … ⊕ M_{n_t}` the grid has `t`
//! rows and `s` columns. Entry `(j, i)` is the Choi matrix of the component
//! `φ_ji: M_{m_i} → M_{n_j}`,
//!
//! ```text
//! C_ji = Σ_{a,b} E_ab ⊗ φ_ji(E_ab),
//! ```
//!
//! so its `(a, b)` block of size `n_j × n_j` is `φ_ji(E_ab)`.

use rand::Rng;

use crate::algebra::{Algebra, AlgebraElement, State};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Tolerance, C64, ZERO};
use crate::random;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMap {
    source: Algebra,
    target: Algebra,
    choi: Vec<Vec<CMatrix>>,
}

/// Kraus operators per block pair: `kraus[j][i]` holds `n_j × m_i` operators
/// `V` with `φ_ji(A) = Σ V A V†`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    pub source: Algebra,
    pub target: Algebra,
    pub ops: Vec<Vec<Vec<CMatrix>>>,
}

/// Outcome of an almost-everywhere comparison of two maps.
#[derive(Debug, Clone, PartialEq)]
pub struct AeReport {
    /// Largest entry of `(f(E) − g(E))·P_ξ` over the matrix units `E`.
    pub max_residual: f64,
    /// First matrix unit `(block, row, col)` whose residual exceeds the bound.
    pub witness: Option<(usize, usize, usize, f64)>,
}

impl BlockMap {
    pub fn new(source: Algebra, target: Algebra, choi: Vec<Vec<CMatrix>>) -> Result<Self> {
        if choi.len() != target.num_blocks() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} Choi rows", target.num_blocks()),
                actual: choi.len().to_string(),
            });
        }
        for (j, row) in choi.iter().enumerate() {
            if row.len() != source.num_blocks() {
                return Err(Error::DimensionMismatch {
                    expected: format!("{} Choi columns in row {j}", source.num_blocks()),
                    actual: row.len().to_string(),
                });
            }
            for (i, c) in row.iter().enumerate() {
                let d = target.dim(j) * source.dim(i);
                if c.rows() != d || c.cols() != d {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{d}x{d} Choi block ({j},{i})"),
                        actual: format!("{}x{}", c.rows(), c.cols()),
                    });
                }
                if !c.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(BlockMap {
            source,
            target,
            choi,
        })
    }

    /// Builds the map from its block components `φ_ji`, evaluated on matrix units.
    pub fn from_components(
        source: &Algebra,
        target: &Algebra,
        mut component: impl FnMut(usize, usize, &CMatrix) -> CMatrix,
    ) -> Self {
        let choi = (0..target.num_blocks())
            .map(|j| {
                let n = target.dim(j);
                (0..source.num_blocks())
                    .map(|i| {
                        let m = source.dim(i);
                        let mut c = CMatrix::zeros(m * n, m * n);
                        for a in 0..m {
                            for b in 0..m {
                                let img = component(j, i, &CMatrix::unit(m, a, b));
                                c.set_block(a * n, b * n, &img);
                            }
                        }
                        c
                    })
                    .collect()
            })
            .collect();
        BlockMap {
            source: source.clone(),
            target: target.clone(),
            choi,
        }
    }

    /// Builds the map from an arbitrary linear function, evaluated on matrix units.
    pub fn from_linear(
        source: &Algebra,
        target: &Algebra,
        mut f: impl FnMut(&AlgebraElement) -> Result<AlgebraElement>,
    ) -> Result<Self> {
        let mut choi: Vec<Vec<CMatrix>> = (0..target.num_blocks())
            .map(|j| {
                (0..source.num_blocks())
                    .map(|i| {
                        let d = target.dim(j) * source.dim(i);
                        CMatrix::zeros(d, d)
                    })
                    .collect()
            })
            .collect();
        for (i, a, b) in source.matrix_units() {
            let img = f(&AlgebraElement::matrix_unit(source, i, a, b))?;
            target.check_same(img.algebra())?;
            for (j, blk) in img.blocks().iter().enumerate() {
                let n = target.dim(j);
                choi[j][i].set_block(a * n, b * n, blk);
            }
        }
        Ok(BlockMap {
            source: source.clone(),
            target: target.clone(),
            choi,
        })
    }

    pub fn identity(algebra: &Algebra) -> Self {
        Self::from_components(algebra, algebra, |j, i, e| {
            if i == j {
                e.clone()
            } else {
                CMatrix::zeros(algebra.dim(j), algebra.dim(j))
            }
        })
    }

    pub fn from_kraus(kraus: &KrausSet) -> Result<Self> {
        let (source, target) = (&kraus.source, &kraus.target);
        if kraus.ops.len() != target.num_blocks()
            || kraus.ops.iter().any(|row| row.len() != source.num_blocks())
        {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} Kraus grid", target.num_blocks(), source.num_blocks()),
                actual: "ragged grid".into(),
            });
        }
        let mut choi = Vec::with_capacity(target.num_blocks());
        for (j, row) in kraus.ops.iter().enumerate() {
            let n = target.dim(j);
            let mut out = Vec::with_capacity(source.num_blocks());
            for (i, ops) in row.iter().enumerate() {
                let m = source.dim(i);
                let mut c = CMatrix::zeros(m * n, m * n);
                for v in ops {
                    if v.rows() != n || v.cols() != m {
                        return Err(Error::DimensionMismatch {
                            expected: format!("{n}x{m} Kraus operator"),
                            actual: format!("{}x{}", v.rows(), v.cols()),
                        });
                    }
                    c += &CMatrix::outer(&vec_columns(v));
                }
                out.push(c);
            }
            choi.push(out);
        }
        Ok(BlockMap {
            source: source.clone(),
            target: target.clone(),
            choi,
        })
    }

    pub fn source(&self) -> &Algebra {
        &self.source
    }

    pub fn target(&self) -> &Algebra {
        &self.target
    }

    pub fn choi(&self) -> &[Vec<CMatrix>] {
        &self.choi
    }

    pub fn choi_block(&self, j: usize, i: usize) -> &CMatrix {
        &self.choi[j][i]
    }

    /// Evaluates the component `φ_ji` on an `m_i × m_i` matrix.
    pub fn apply_component(&self, j: usize, i: usize, a: &CMatrix) -> CMatrix {
        let (n, m) = (self.target.dim(j), self.source.dim(i));
        let c = &self.choi[j][i];
        let mut out = CMatrix::zeros(n, n);
        for x in 0..m {
            for y in 0..m {
                let s = a[(x, y)];
                if s != ZERO {
                    out += &c.block(x * n, y * n, n, n).scale(s);
                }
            }
        }
        out
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        self.source.check_same(a.algebra())?;
        let blocks = (0..self.target.num_blocks())
            .map(|j| {
                let n = self.target.dim(j);
                let mut acc = CMatrix::zeros(n, n);
                for (i, ai) in a.blocks().iter().enumerate() {
                    acc += &self.apply_component(j, i, ai);
                }
                acc
            })
            .collect();
        AlgebraElement::new(self.target.clone(), blocks)
    }

    /// Images of all matrix units of the source, in `Algebra::matrix_units` order.
    pub fn unit_images(&self) -> Vec<((usize, usize, usize), AlgebraElement)> {
        self.source
            .matrix_units()
            .map(|(i, a, b)| {
                let blocks = (0..self.target.num_blocks())
                    .map(|j| {
                        let n = self.target.dim(j);
                        self.choi[j][i].block(a * n, b * n, n, n)
                    })
                    .collect();
                let img = AlgebraElement::new(self.target.clone(), blocks)
                    .expect("Choi blocks have target shape");
                ((i, a, b), img)
            })
            .collect()
    }

    pub fn is_cp(&self, tol: &Tolerance) -> bool {
        self.choi.iter().flatten().all(|c| c.is_psd(tol))
    }

    /// Most negative Choi eigenvalue (0 when every block is PSD).
    pub fn cp_residual(&self) -> f64 {
        self.choi
            .iter()
            .flatten()
            .map(|c| (-c.min_eigenvalue()).max(c.hermitian_deviation()))
            .fold(0.0, f64::max)
    }

    /// `max |φ(1) − 1|`.
    pub fn unital_residual(&self) -> f64 {
        let one = AlgebraElement::unit(&self.source);
        self.apply(&one)
            .map(|img| img.max_abs_diff(&AlgebraElement::unit(&self.target)))
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_unital(&self, tol: &Tolerance) -> bool {
        self.unital_residual() <= tol.eps_eq
    }

    /// Applies the map to `samples` random PSD inputs and checks that the
    /// outputs are PSD. A `false` is a certificate of non-positivity; a `true`
    /// proves nothing.
    pub fn is_positive_heuristic<R: Rng + ?Sized>(
        &self,
        samples: usize,
        rng: &mut R,
        tol: &Tolerance,
    ) -> bool {
        for _ in 0..samples {
            let a = random::psd_element(rng, &self.source);
            let scale = a.max_abs().max(1.0);
            let Ok(img) = self.apply(&a) else {
                return false;
            };
            for b in img.blocks() {
                if b.hermitian_deviation() > tol.eps_eq * scale
                    || b.min_eigenvalue() < -tol.eps_psd * scale
                {
                    return false;
                }
            }
        }
        true
    }

    /// Kraus operators from the eigendecomposition of each Choi block.
    pub fn kraus(&self, tol: &Tolerance) -> Result<KrausSet> {
        if !self.is_cp(tol) {
            return Err(Error::NotCp);
        }
        let ops = self
            .choi
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let n = self.target.dim(j);
                row.iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let m = self.source.dim(i);
                        let e = c.eigh_unchecked();
                        e.values
                            .iter()
                            .enumerate()
                            .filter(|(_, &l)| l > tol.eps_rank)
                            .map(|(k, &l)| {
                                let s = l.sqrt();
                                CMatrix::from_fn(n, m, |x, a| e.vectors[(a * n + x, k)] * s)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(KrausSet {
            source: self.source.clone(),
            target: self.target.clone(),
            ops,
        })
    }

    /// The Hilbert–Schmidt adjoint: `⟨B, φ(A)⟩ = ⟨φ*(B), A⟩`.
    pub fn adjoint(&self) -> BlockMap {
        let choi = (0..self.source.num_blocks())
            .map(|i| {
                let m = self.source.dim(i);
                (0..self.target.num_blocks())
                    .map(|j| {
                        let n = self.target.dim(j);
                        let c = &self.choi[j][i];
                        CMatrix::from_fn(n * m, n * m, |r, s| {
                            let (x, a) = (r / m, r % m);
                            let (y, b) = (s / m, s % m);
                            c[(a * n + x, b * n + y)].conj()
                        })
                    })
                    .collect()
            })
            .collect();
        BlockMap {
            source: self.target.clone(),
            target: self.source.clone(),
            choi,
        }
    }

    /// Max entrywise difference between Choi grids; `INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &BlockMap) -> f64 {
        if self.source != other.source || self.target != other.target {
            return f64::INFINITY;
        }
        self.choi
            .iter()
            .flatten()
            .zip(other.choi.iter().flatten())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Entrywise equality of the Choi grids within `10 · eps_eq`.
    pub fn equals(&self, other: &BlockMap, tol: &Tolerance) -> bool {
        self.max_abs_diff(other) <= tol.residual()
    }

    /// The state `ω ∘ φ` on the source algebra. Requires a unital map; the
    /// result is a state only when the map is also positive.
    pub fn pullback_state(&self, omega: &State, tol: &Tolerance) -> Result<State> {
        self.target.check_same(omega.algebra())?;
        let r = self.unital_residual();
        if r > tol.residual() {
            return Err(Error::NotUnital(r));
        }
        let d = self.adjoint().apply(&omega.density_tuple())?.adjoint();
        let loose = Tolerance {
            eps_eq: tol.residual(),
            ..*tol
        };
        State::from_density(&self.source, d.into_blocks(), &loose)
    }

    /// `φ` with every output right-multiplied by the given element.
    pub fn right_multiplied(&self, p: &AlgebraElement) -> Result<BlockMap> {
        self.target.check_same(p.algebra())?;
        Ok(BlockMap::from_components(&self.source, &self.target, |j, i, e| {
            &self.apply_component(j, i, e) * p.block(j)
        }))
    }

    pub fn add(&self, other: &BlockMap) -> Result<BlockMap> {
        self.source.check_same(&other.source)?;
        self.target.check_same(&other.target)?;
        let choi = self
            .choi
            .iter()
            .zip(&other.choi)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a + b).collect())
            .collect();
        Ok(BlockMap {
            source: self.source.clone(),
            target: self.target.clone(),
            choi,
        })
    }

    pub fn scale(&self, s: C64) -> BlockMap {
        BlockMap {
            source: self.source.clone(),
            target: self.target.clone(),
            choi: self
                .choi
                .iter()
                .map(|row| row.iter().map(|c| c.scale(s)).collect())
                .collect(),
        }
    }
}

/// Column-stacked vectorization, index `a·n + x` holds `v[x, a]`.
fn vec_columns(v: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(v.rows() * v.cols());
    for a in 0..v.cols() {
        for x in 0..v.rows() {
            out.push(v[(x, a)]);
        }
    }
    out
}

/// `g ∘ f`.
pub fn compose(g: &BlockMap, f: &BlockMap) -> Result<BlockMap> {
    f.target.check_same(&g.source).map_err(|_| {
        Error::AlgebraMismatch(format!(
            "cannot compose: f targets {:?} but g starts at {:?}",
            f.target.dims(),
            g.source.dims()
        ))
    })?;
    BlockMap::from_linear(&f.source, &g.target, |e| g.apply(&f.apply(e)?))
}

/// Compares `f` and `g` on every matrix unit after right multiplication by the
/// support of `xi`, a state on their common codomain.
pub fn ae_report(f: &BlockMap, g: &BlockMap, xi: &State, tol: &Tolerance) -> Result<AeReport> {
    f.source.check_same(&g.source)?;
    f.target.check_same(&g.target)?;
    f.target.check_same(xi.algebra())?;
    let p = xi.support(tol);
    let mut max_residual: f64 = 0.0;
    let mut witness = None;
    for ((u, fe), (_, ge)) in f.unit_images().into_iter().zip(g.unit_images()) {
        let r = p.right_mul(&fe.sub(&ge)?)?.max_abs();
        if r > tol.residual() && witness.is_none() {
            witness = Some((u.0, u.1, u.2, r));
        }
        max_residual = max_residual.max(r);
    }
    Ok(AeReport {
        max_residual,
        witness,
    })
}

/// `f =_ξ g`.
pub fn ae_equal(f: &BlockMap, g: &BlockMap, xi: &State, tol: &Tolerance) -> Result<bool> {
    Ok(ae_report(f, g, xi, tol)?.witness.is_none())
}

/// Residuals of the *-homomorphism conditions on matrix units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomResiduals {
    pub unital: f64,
    pub adjoint: f64,
    pub multiplicative: f64,
}

impl HomResiduals {
    pub fn max(&self) -> f64 {
        self.unital.max(self.adjoint).max(self.multiplicative)
    }
}

pub fn hom_residuals(map: &BlockMap) -> HomResiduals {
    let images = map.unit_images();
    let find = |i: usize, a: usize, b: usize| -> &AlgebraElement {
        let offset: usize = map.source.dims()[..i].iter().map(|n| n * n).sum();
        &images[offset + a * map.source.dim(i) + b].1
    };
    let mut adjoint: f64 = 0.0;
    let mut multiplicative: f64 = 0.0;
    let zero = AlgebraElement::zero(&map.target);
    for ((i, a, b), img) in &images {
        adjoint = adjoint.max(img.adjoint().max_abs_diff(find(*i, *b, *a)));
        for ((k, c, d), img2) in &images {
            let prod = img.mul(img2).expect("same target algebra");
            let expected = if i == k && b == c { find(*i, *a, *d) } else { &zero };
            multiplicative = multiplicative.max(prod.max_abs_diff(expected));
        }
    }
    HomResiduals {
        unital: map.unital_residual(),
        adjoint,
        multiplicative,
    }
}

/// Whether the map is a unital *-homomorphism, checked on all pairs of matrix units.
pub fn verify_hom(map: &BlockMap, tol: &Tolerance) -> bool {
    hom_residuals(map).max() <= tol.residual()
}
