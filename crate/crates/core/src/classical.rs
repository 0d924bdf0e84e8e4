//! Finite probability spaces and stochastic maps.
//!
//! A stochastic map `f: X → Y` is stored as a column-stochastic `|Y| × |X|`
//! matrix `f_yx`. Functions `X → Y` are index lists (0-based here; the JSON
//! layer uses 1-based indices).
//!
//! The embedding into commutative algebras sends `X` to `C^X` with all block
//! dimensions 1, a probability to the state with those weights, and a
//! stochastic map `f: X → Y` to the unital positive map `C^Y → C^X`,
//! `e_y ↦ Σ_x f_yx e_x`.

use nalgebra::DMatrix;

use crate::algebra::{Algebra, State};
use crate::bratteli::BratteliHom;
use crate::disintegration::DisintegrationProblem;
use crate::error::{Error, Result};
use crate::maps::BlockMap;
use crate::matrix::{Tolerance, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct FinProb {
    weights: Vec<f64>,
}

impl FinProb {
    pub fn new(weights: Vec<f64>, tol: &Tolerance) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty sample space".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -tol.eps_eq) {
            return Err(Error::InvalidProbability(format!("weight {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.eps_eq {
            return Err(Error::InvalidProbability(format!("weights sum to {total}")));
        }
        Ok(FinProb {
            weights: weights.into_iter().map(|w| w.max(0.0)).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n], &Tolerance::default())
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn is_null(&self, x: usize, tol: &Tolerance) -> bool {
        tol.is_null_weight(self.weights[x])
    }

    /// Indices with zero probability.
    pub fn null_set(&self, tol: &Tolerance) -> Vec<usize> {
        (0..self.size()).filter(|&x| self.is_null(x, tol)).collect()
    }

    pub fn max_abs_diff(&self, other: &FinProb) -> f64 {
        if self.size() != other.size() {
            return f64::INFINITY;
        }
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Column-stochastic matrix `f_yx` of a Markov kernel `X → Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMap {
    matrix: DMatrix<f64>,
}

impl StochMap {
    pub fn new(matrix: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        if let Some(v) = matrix.iter().find(|v| !v.is_finite() || **v < -tol.eps_eq) {
            return Err(Error::NotStochastic(format!("entry {v} is not a probability")));
        }
        for (x, col) in matrix.column_iter().enumerate() {
            let total = col.sum();
            if (total - 1.0).abs() > tol.eps_eq {
                return Err(Error::NotStochastic(format!("column {x} sums to {total}")));
            }
        }
        Ok(StochMap {
            matrix: matrix.map(|v| v.max(0.0)),
        })
    }

    /// Row-major input: `rows[y][x] = f_yx`.
    pub fn from_rows(rows: &[Vec<f64>], tol: &Tolerance) -> Result<Self> {
        let ny = rows.len();
        let nx = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nx) {
            return Err(Error::NotStochastic("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(ny, nx, |y, x| rows[y][x]), tol)
    }

    pub fn identity(n: usize) -> Self {
        StochMap {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// The 0/1 matrix of a function `X → Y` (`f[x]` is the image of `x`).
    pub fn deterministic(f: &[usize], ny: usize) -> Result<Self> {
        check_function(f, ny)?;
        Ok(StochMap {
            matrix: DMatrix::from_fn(ny, f.len(), |y, x| if f[x] == y { 1.0 } else { 0.0 }),
        })
    }

    /// `|Y|`
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    /// `|X|`
    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, y: usize, x: usize) -> f64 {
        self.matrix[(y, x)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// The image measure `Σ_x f_yx p_x`.
    pub fn apply(&self, p: &FinProb) -> Result<FinProb> {
        if p.size() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: format!("probability on {} points", self.cols()),
                actual: p.size().to_string(),
            });
        }
        let v = &self.matrix * nalgebra::DVector::from_column_slice(p.weights());
        Ok(FinProb {
            weights: v.iter().map(|w| w.max(0.0)).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &StochMap) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        (&self.matrix - &other.matrix).amax()
    }
}

fn check_function(f: &[usize], ny: usize) -> Result<()> {
    if f.is_empty() {
        return Err(Error::InvalidFunction("empty domain".into()));
    }
    if ny == 0 {
        return Err(Error::InvalidFunction("empty codomain".into()));
    }
    if let Some((x, y)) = f.iter().enumerate().find(|(_, &y)| y >= ny) {
        return Err(Error::InvalidFunction(format!("f({x}) = {y} is outside a codomain of size {ny}")));
    }
    Ok(())
}

/// `(g ∘ f)_zx = Σ_y g_zy f_yx`.
pub fn stoch_compose(g: &StochMap, f: &StochMap) -> Result<StochMap> {
    if f.rows() != g.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} intermediate points", f.rows()),
            actual: g.cols().to_string(),
        });
    }
    Ok(StochMap {
        matrix: &g.matrix * &f.matrix,
    })
}

pub fn pushforward(f: &[usize], p: &FinProb, ny: usize) -> Result<FinProb> {
    check_function(f, ny)?;
    if f.len() != p.size() {
        return Err(Error::InvalidFunction(format!(
            "function on {} points, probability on {}",
            f.len(),
            p.size()
        )));
    }
    let mut q = vec![0.0; ny];
    for (x, &y) in f.iter().enumerate() {
        q[y] += p.weight(x);
    }
    Ok(FinProb { weights: q })
}

/// The classical disintegration `r: Y → X` of `f: (X, p) → (Y, q)`:
///
/// ```text
/// r_xy = p_x δ_{y f(x)} / q_y   if q_y > 0
/// r_xy = 1 / |X|                 otherwise
/// ```
pub fn classical_disintegration(f: &[usize], p: &FinProb, q: &FinProb, tol: &Tolerance) -> Result<StochMap> {
    let pushed = pushforward(f, p, q.size())?;
    let residual = pushed.max_abs_diff(q);
    if residual > tol.eps_eq {
        return Err(Error::NotPushforward(residual));
    }
    let nx = p.size();
    let matrix = DMatrix::from_fn(nx, q.size(), |x, y| {
        if q.is_null(y, tol) {
            1.0 / nx as f64
        } else if f[x] == y {
            p.weight(x) / q.weight(y)
        } else {
            0.0
        }
    });
    Ok(StochMap { matrix })
}

/// True iff the columns of `f` and `g` differ only at `p`-null points.
pub fn stoch_ae_equal(f: &StochMap, g: &StochMap, p: &FinProb, tol: &Tolerance) -> Result<bool> {
    if f.matrix.shape() != g.matrix.shape() || p.size() != f.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("two {}x{} maps and a probability on {} points", f.rows(), f.cols(), f.cols()),
            actual: format!("{}x{} and {} points", g.rows(), g.cols(), p.size()),
        });
    }
    Ok((0..f.cols()).filter(|&x| !p.is_null(x, tol)).all(|x| {
        (f.matrix.column(x) - g.matrix.column(x)).amax() <= tol.residual()
    }))
}

/// `C^X` with the state given by `p`.
pub fn embed_to_algebra(p: &FinProb) -> (Algebra, State) {
    let state = State::classical(p.weights(), &Tolerance::default()).expect("validated probability");
    (state.algebra().clone(), state)
}

/// The unital positive map `C^Y → C^X`, `e_y ↦ Σ_x f_yx e_x`.
pub fn embed_stoch(f: &StochMap) -> BlockMap {
    let source = Algebra::commutative(f.rows()).expect("non-empty");
    let target = Algebra::commutative(f.cols()).expect("non-empty");
    BlockMap::from_components(&source, &target, |x, y, e| e.scale_real(f.entry(y, x)))
}

/// The hom `C^Y → C^X` of precomposition with `f: X → Y`, `c_xy = δ_{f(x) y}`.
pub fn embed_function(f: &[usize], ny: usize) -> Result<BratteliHom> {
    check_function(f, ny)?;
    let c = f.iter().map(|&fx| (0..ny).map(|y| usize::from(fx == y)).collect()).collect();
    BratteliHom::standard(Algebra::commutative(ny)?, c)
}

/// The embedded disintegration problem of `f: (X, p) → (Y, pushforward)`.
pub fn embedded_problem(f: &[usize], p: &FinProb, ny: usize, tol: &Tolerance) -> Result<DisintegrationProblem> {
    let hom = embed_function(f, ny)?;
    let (_, omega) = embed_to_algebra(p);
    DisintegrationProblem::from_hom(hom, omega, tol)
}

/// Reads a map between commutative algebras back as a stochastic matrix.
///
/// The map must be `C^Y → C^X` with every Choi block `1 × 1`; entry `(y, x)`
/// is the coefficient of `e_x` in the image of `e_y`.
pub fn blockmap_to_stoch(map: &BlockMap, tol: &Tolerance) -> Result<StochMap> {
    if map.source().dims().iter().chain(map.target().dims()).any(|&d| d != 1) {
        return Err(Error::AlgebraMismatch("map is not between commutative algebras".into()));
    }
    let (ny, nx) = (map.source().num_blocks(), map.target().num_blocks());
    let mut m = DMatrix::zeros(ny, nx);
    for x in 0..nx {
        for y in 0..ny {
            let v: C64 = map.choi_block(x, y)[(0, 0)];
            if v.im.abs() > tol.eps_eq {
                return Err(Error::NotStochastic(format!("entry ({y}, {x}) is complex")));
            }
            m[(y, x)] = v.re;
        }
    }
    StochMap::new(m, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::disintegration::disintegrate;
    use crate::maps::ae_equal;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn prob(w: &[f64]) -> FinProb {
        FinProb::new(w.to_vec(), &tol()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(FinProb::new(vec![0.5, 0.6], &tol()).is_err());
        assert!(FinProb::new(vec![1.5, -0.5], &tol()).is_err());
        assert!(StochMap::from_rows(&[vec![0.5, 1.0], vec![0.4, 0.0]], &tol()).is_err());
        assert!(StochMap::deterministic(&[0, 2], 2).is_err());
    }

    #[test]
    fn composition_examples() {
        let f = StochMap::deterministic(&[1, 0, 1], 2).unwrap();
        let g = StochMap::deterministic(&[2, 0], 3).unwrap();
        // g ∘ f is the function x ↦ g(f(x)) = (0, 2, 0)
        let gf = stoch_compose(&g, &f).unwrap();
        assert_eq!(gf, StochMap::deterministic(&[0, 2, 0], 3).unwrap());
        assert_eq!(stoch_compose(&StochMap::identity(2), &f).unwrap(), f);

        let chain = StochMap::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.8]], &tol()).unwrap();
        let sq = stoch_compose(&chain, &chain).unwrap();
        let hand = [[0.83, 0.34], [0.17, 0.66]];
        for y in 0..2 {
            for x in 0..2 {
                assert!((sq.entry(y, x) - hand[y][x]).abs() < 1e-15);
            }
        }
        assert!(stoch_compose(&f, &f).is_err());
    }

    #[test]
    fn disintegration_examples() {
        let r = classical_disintegration(&[0, 0], &prob(&[0.3, 0.7]), &prob(&[1.0]), &tol()).unwrap();
        assert_eq!(r.to_rows(), vec![vec![0.3], vec![0.7]]);

        let r = classical_disintegration(&[0, 0, 1], &prob(&[0.5, 0.5, 0.0]), &prob(&[1.0, 0.0]), &tol()).unwrap();
        for x in 0..3 {
            assert!((r.entry(x, 1) - 1.0 / 3.0).abs() < 1e-15);
        }

        let r = classical_disintegration(&[0, 0, 1], &prob(&[0.2, 0.3, 0.5]), &prob(&[0.5, 0.5]), &tol()).unwrap();
        let expected = [[0.4, 0.0], [0.6, 0.0], [0.0, 1.0]];
        for x in 0..3 {
            for y in 0..2 {
                assert!((r.entry(x, y) - expected[x][y]).abs() < 1e-15);
            }
        }

        assert!(matches!(
            classical_disintegration(&[0, 0, 1], &prob(&[0.2, 0.3, 0.5]), &prob(&[0.4, 0.6]), &tol()),
            Err(Error::NotPushforward(_))
        ));
    }

    #[test]
    fn disintegration_is_a_section() {
        let f = [0usize, 1, 0, 2];
        let p = prob(&[0.1, 0.4, 0.5, 0.0]);
        let q = pushforward(&f, &p, 3).unwrap();
        let r = classical_disintegration(&f, &p, &q, &tol()).unwrap();
        // r ∘ q = p
        assert!(r.apply(&q).unwrap().max_abs_diff(&p) < 1e-15);
        // f ∘ r = id q-a.e.
        let fr = stoch_compose(&StochMap::deterministic(&f, 3).unwrap(), &r).unwrap();
        assert!(stoch_ae_equal(&fr, &StochMap::identity(3), &q, &tol()).unwrap());
        assert!(fr.max_abs_diff(&StochMap::identity(3)) > 0.5);
    }

    #[test]
    fn ae_equality_of_kernels() {
        let p = prob(&[0.5, 0.5, 0.0]);
        let f = StochMap::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]], &tol()).unwrap();
        let g = StochMap::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]], &tol()).unwrap();
        let h = StochMap::from_rows(&[vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]], &tol()).unwrap();
        assert!(stoch_ae_equal(&f, &f, &p, &tol()).unwrap());
        assert!(stoch_ae_equal(&f, &g, &p, &tol()).unwrap());
        assert!(!stoch_ae_equal(&f, &h, &p, &tol()).unwrap());
        let (_, state) = embed_to_algebra(&p);
        assert!(ae_equal(&embed_stoch(&f), &embed_stoch(&g), &state, &tol()).unwrap());
        assert!(!ae_equal(&embed_stoch(&f), &embed_stoch(&h), &state, &tol()).unwrap());
    }

    #[test]
    fn embedding_evaluates_indicators() {
        let f = StochMap::from_rows(&[vec![0.2, 1.0, 0.5], vec![0.8, 0.0, 0.5]], &tol()).unwrap();
        let map = embed_stoch(&f);
        assert!(map.is_cp(&tol()) && map.is_unital(&tol()));
        for y in 0..2 {
            let e = AlgebraElement::matrix_unit(map.source(), y, 0, 0);
            let img = map.apply(&e).unwrap();
            for x in 0..3 {
                assert!((img.block(x)[(0, 0)].re - f.entry(y, x)).abs() < 1e-15);
            }
        }
        assert_eq!(blockmap_to_stoch(&map, &tol()).unwrap(), f);
        let id = embed_function(&[0, 1, 2], 3).unwrap();
        assert_eq!(id, BratteliHom::identity(&Algebra::commutative(3).unwrap()));
        let hom = embed_function(&[1, 0, 1], 2).unwrap();
        let det = StochMap::deterministic(&[1, 0, 1], 2).unwrap();
        assert!(hom.to_blockmap().equals(&embed_stoch(&det), &tol()));
    }

    #[test]
    fn embedded_solver_reproduces_formula() {
        let f = [0usize, 0, 1, 2, 1];
        let p = prob(&[0.1, 0.2, 0.3, 0.0, 0.4]);
        let problem = embedded_problem(&f, &p, 4, &tol()).unwrap();
        let q = pushforward(&f, &p, 4).unwrap();
        for (y, &qy) in q.weights().iter().enumerate() {
            assert!((problem.xi().weight(y) - qy).abs() < 1e-15);
        }
        let res = disintegrate(&problem, &tol());
        assert!(res.exists);
        let r = classical_disintegration(&f, &p, &q, &tol()).unwrap();
        let nc = blockmap_to_stoch(res.map.as_ref().unwrap(), &tol()).unwrap();
        assert!(nc.max_abs_diff(&r) < 1e-12);
    }
}
