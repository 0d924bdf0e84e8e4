//! Random instances: matrices, densities, states and unital CP maps.
//!
//! Used by the positivity heuristic and by the property and acceptance
//! suites. Entries are drawn uniformly from `[-1, 1]` (real and imaginary
//! parts); nothing here aims at Haar-exact distributions.

use rand::Rng;

use crate::algebra::{Algebra, AlgebraElement, State};
use crate::maps::{BlockMap, KrausSet};
use crate::matrix::{CMatrix, Tolerance, C64};

pub fn complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = matrix(rng, n, n);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// A unitary from the QR factorization of a random matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let g = matrix(rng, n, n);
        let qr = g.into_inner().qr();
        let r = qr.r();
        if (0..n).all(|k| r[(k, k)].norm() > 1e-6) {
            return CMatrix::from_inner(qr.q());
        }
    }
}

/// A density matrix of rank at most `rank` (full rank when `rank >= n`).
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = matrix(rng, n, rank.clamp(1, n));
    let p = &g * &g.adjoint();
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}

pub fn pure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    density(rng, n, 1)
}

/// Probability vector of length `k`; each entry is zeroed with probability
/// `zero_prob`, keeping at least one positive entry.
pub fn probability<R: Rng + ?Sized>(rng: &mut R, k: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k)
            .map(|_| {
                if rng.random_bool(zero_prob) {
                    0.0
                } else {
                    rng.random_range(0.05..1.0)
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

pub fn state<R: Rng + ?Sized>(rng: &mut R, algebra: &Algebra, zero_prob: f64) -> State {
    let weights = probability(rng, algebra.num_blocks(), zero_prob);
    let densities = algebra
        .dims()
        .iter()
        .map(|&n| {
            let rank = rng.random_range(1..=n);
            density(rng, n, rank)
        })
        .collect();
    State::new(algebra.clone(), weights, densities, &Tolerance::default())
        .expect("random weights and densities form a state")
}

/// An element with PSD blocks.
pub fn psd_element<R: Rng + ?Sized>(rng: &mut R, algebra: &Algebra) -> AlgebraElement {
    let blocks = algebra
        .dims()
        .iter()
        .map(|&n| {
            let g = matrix(rng, n, n);
            &g * &g.adjoint()
        })
        .collect();
    AlgebraElement::new(algebra.clone(), blocks).expect("blocks match the algebra")
}

pub fn element<R: Rng + ?Sized>(rng: &mut R, algebra: &Algebra) -> AlgebraElement {
    let blocks = algebra.dims().iter().map(|&n| matrix(rng, n, n)).collect();
    AlgebraElement::new(algebra.clone(), blocks).expect("blocks match the algebra")
}

/// A unital CP map with at least `kraus_per_block` operators per block pair.
///
/// Random Kraus operators `G` are normalized as `V = S^{-1/2} G` with
/// `S_j = Σ_{i,k} G G†`, which forces `Σ V V† = 1` on every target block.
pub fn cpu_map<R: Rng + ?Sized>(
    rng: &mut R,
    source: &Algebra,
    target: &Algebra,
    kraus_per_block: usize,
) -> BlockMap {
    let tol = Tolerance::default();
    let mut ops = Vec::with_capacity(target.num_blocks());
    let columns: usize = source.dims().iter().sum();
    for &n in target.dims() {
        // fewer than n columns in total would leave S singular
        let k = kraus_per_block.max(n.div_ceil(columns)).max(1);
        let raw: Vec<Vec<CMatrix>> = source
            .dims()
            .iter()
            .map(|&m| (0..k).map(|_| matrix(rng, n, m)).collect())
            .collect();
        let mut s = CMatrix::zeros(n, n);
        for g in raw.iter().flatten() {
            s += &(g * &g.adjoint());
        }
        let norm = s.inv_sqrt(&tol).expect("random Gram matrix is positive definite");
        ops.push(
            raw.into_iter()
                .map(|row| row.into_iter().map(|g| &norm * &g).collect())
                .collect(),
        );
    }
    BlockMap::from_kraus(&KrausSet {
        source: source.clone(),
        target: target.clone(),
        ops,
    })
    .expect("Kraus shapes match")
}
