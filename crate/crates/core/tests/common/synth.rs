//! Random disintegrable problems built from their factorized form
//! `p_i U_i† ρ_i U_i = diag(q_1 τ_1i ⊗ σ_1, …, q_t τ_ti ⊗ σ_t)`.

use ncdisint::random;
use ncdisint::{Algebra, BratteliHom, CMatrix, State, Tolerance};
use rand::Rng;

pub struct Synth {
    pub hom: BratteliHom,
    pub omega: State,
    pub q: Vec<f64>,
    pub sigma: Vec<CMatrix>,
    /// `tau[j][i]`, `None` where `c_ij = 0` or `q_j = 0`.
    pub tau: Vec<Vec<Option<CMatrix>>>,
    /// Weighted target blocks `p_i ρ_i`.
    pub blocks: Vec<CMatrix>,
}

pub struct Shape {
    pub max_blocks: usize,
    pub max_dim: usize,
    pub max_mult: usize,
}

pub const SMALL: Shape = Shape {
    max_blocks: 3,
    max_dim: 3,
    max_mult: 2,
};

pub fn multiplicities<R: Rng>(rng: &mut R, s: usize, t: usize, max_mult: usize) -> Vec<Vec<usize>> {
    loop {
        let c: Vec<Vec<usize>> = (0..s)
            .map(|_| (0..t).map(|_| rng.random_range(0..=max_mult)).collect())
            .collect();
        if c.iter().all(|row| row.iter().any(|&x| x > 0)) {
            return c;
        }
    }
}

/// Random hom with the given source algebra and `s` target blocks.
pub fn hom<R: Rng>(rng: &mut R, source: &Algebra, s: usize, max_mult: usize) -> BratteliHom {
    let c = multiplicities(rng, s, source.num_blocks(), max_mult);
    let standard = BratteliHom::standard(source.clone(), c.clone()).unwrap();
    let us = standard
        .target()
        .dims()
        .iter()
        .map(|&m| random::unitary(rng, m))
        .collect();
    BratteliHom::new(source.clone(), standard.target().clone(), c, us, &Tolerance::default()).unwrap()
}

pub fn synth<R: Rng>(rng: &mut R, shape: &Shape) -> Synth {
    let s = rng.random_range(1..=shape.max_blocks);
    let t = rng.random_range(1..=shape.max_blocks);
    let dims: Vec<usize> = (0..t).map(|_| rng.random_range(1..=shape.max_dim)).collect();
    let source = Algebra::new(dims.clone()).unwrap();
    let hom = hom(rng, &source, s, shape.max_mult);
    synth_for(rng, hom)
}

/// A state on the target of `hom` admitting a disintegration.
pub fn synth_for<R: Rng>(rng: &mut R, hom: BratteliHom) -> Synth {
    let (s, t) = (hom.target().num_blocks(), hom.source().num_blocks());
    let dims = hom.source().dims().to_vec();
    // a source block that occurs nowhere must carry zero weight
    let mut q = random::probability(rng, t, 0.3);
    for j in 0..t {
        if (0..s).all(|i| hom.multiplicity(i, j) == 0) {
            q[j] = 0.0;
        }
    }
    let total: f64 = q.iter().sum();
    if total == 0.0 {
        let j = (0..t).find(|&j| (0..s).any(|i| hom.multiplicity(i, j) > 0)).unwrap();
        q[j] = 1.0;
    } else {
        q.iter_mut().for_each(|x| *x /= total);
    }
    let sigma: Vec<CMatrix> = dims
        .iter()
        .map(|&n| {
            let rank = rng.random_range(1..=n);
            random::density(rng, n, rank)
        })
        .collect();

    let mut tau = vec![vec![None; s]; t];
    for j in 0..t {
        if q[j] == 0.0 {
            continue;
        }
        let present: Vec<usize> = (0..s).filter(|&i| hom.multiplicity(i, j) > 0).collect();
        let w = random::probability(rng, present.len(), 0.25);
        for (&i, &wi) in present.iter().zip(&w) {
            let c = hom.multiplicity(i, j);
            let rank = rng.random_range(1..=c);
            tau[j][i] = Some(random::density(rng, c, rank).scale_real(wi));
        }
    }

    let blocks: Vec<CMatrix> = (0..s)
        .map(|i| {
            let m = hom.target().dim(i);
            let mut w = CMatrix::zeros(m, m);
            for j in 0..t {
                if let Some(tji) = &tau[j][i] {
                    w.set_block(hom.superblock_offset(i, j), hom.superblock_offset(i, j), &tji.kron(&sigma[j]).scale_real(q[j]));
                }
            }
            let u = hom.unitary(i);
            &(u * &w) * &u.adjoint()
        })
        .collect();
    let omega = State::from_density(hom.target(), blocks.clone(), &Tolerance::default()).unwrap();
    Synth {
        hom,
        omega,
        q,
        sigma,
        tau,
        blocks,
    }
}
