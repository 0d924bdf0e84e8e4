//! Projective measurement of an observable.
//!
//! An observable `A = Σ_λ λ P_λ` on `M_m` induces the hom `C^{σ(A)} → M_m`,
//! `e_λ ↦ P_λ`. Pulling a state `ρ` back along it gives the outcome
//! distribution `q_λ = tr(ρ P_λ)`, and a disintegration exists exactly when
//! `ρ` equals its Lüders projection `Σ_λ P_λ ρ P_λ`.

use crate::algebra::{check_density, Algebra, State};
use crate::bratteli::BratteliHom;
use crate::classical::FinProb;
use crate::disintegration::{Certificate, Condition, DisintegrationProblem, DisintegrationResult, TauEntry};
use crate::error::{Error, Result};
use crate::maps::BlockMap;
use crate::matrix::{CMatrix, Tolerance};

#[derive(Debug, Clone)]
pub struct Observable {
    matrix: CMatrix,
    spectrum: Vec<f64>,
    projectors: Vec<CMatrix>,
    /// Eigenbasis with columns grouped by spectral point, in spectrum order.
    basis: CMatrix,
    ranks: Vec<usize>,
}

impl Observable {
    /// Diagonalizes `matrix`; eigenvalues closer than `100 · eps_rank` to
    /// their neighbour are merged into one spectral point (their mean).
    pub fn new(matrix: CMatrix, tol: &Tolerance) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: "non-empty square matrix".into(),
                actual: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let eig = matrix.eigh(tol)?;
        let gap = 100.0 * tol.eps_rank;
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in eig.values.iter().enumerate() {
            match clusters.last_mut() {
                Some(c) if eig.values[*c.last().unwrap()] - v <= gap => c.push(k),
                _ => clusters.push(vec![k]),
            }
        }
        let spectrum = clusters
            .iter()
            .map(|c| c.iter().map(|&k| eig.values[k]).sum::<f64>() / c.len() as f64)
            .collect();
        let projectors = clusters
            .iter()
            .map(|c| {
                let v = CMatrix::from_fn(matrix.rows(), c.len(), |r, k| eig.vectors[(r, c[k])]);
                &v * &v.adjoint()
            })
            .collect();
        let ranks = clusters.iter().map(Vec::len).collect();
        Ok(Observable {
            matrix,
            spectrum,
            projectors,
            basis: eig.vectors,
            ranks,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Distinct eigenvalues, descending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }
}

/// The hom `C^{σ(A)} → M_m`, `e_λ ↦ P_λ`.
pub fn spectral_hom(obs: &Observable) -> BratteliHom {
    let source = Algebra::commutative(obs.spectrum.len()).expect("non-empty spectrum");
    let target = Algebra::matrix(obs.dim()).expect("non-empty observable");
    BratteliHom::new(
        source,
        target,
        vec![obs.ranks.clone()],
        vec![obs.basis.clone()],
        &Tolerance::default(),
    )
    .expect("eigenbasis is unitary and ranks add up to m")
}

/// `q_λ = tr(ρ P_λ)`.
pub fn outcome_distribution(obs: &Observable, rho: &CMatrix, tol: &Tolerance) -> Result<FinProb> {
    check_compatible(obs, rho, tol)?;
    let q = obs
        .projectors
        .iter()
        .map(|p| (rho * p).trace().re.max(0.0))
        .collect();
    FinProb::new(q, tol)
}

/// `Σ_λ P_λ ρ P_λ`.
pub fn luders(obs: &Observable, rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.rows(), rho.cols());
    for p in &obs.projectors {
        out += &(&(p * rho) * p);
    }
    out
}

/// The conditional states `P_λ ρ P_λ / q_λ`, `None` where `q_λ = 0`.
pub fn component_states(obs: &Observable, rho: &CMatrix, tol: &Tolerance) -> Result<Vec<Option<CMatrix>>> {
    let q = outcome_distribution(obs, rho, tol)?;
    Ok(obs
        .projectors
        .iter()
        .enumerate()
        .map(|(k, p)| (!q.is_null(k, tol)).then(|| (&(p * rho) * p).scale_real(1.0 / q.weight(k))))
        .collect())
}

/// The disintegration problem `(spectral_hom, tr(ρ ·))`.
pub fn measurement_problem(obs: &Observable, rho: &CMatrix, tol: &Tolerance) -> Result<DisintegrationProblem> {
    check_compatible(obs, rho, tol)?;
    let omega = State::from_matrix(rho.clone(), tol)?;
    DisintegrationProblem::from_hom(spectral_hom(obs), omega, tol)
}

/// Retrodiction along a measurement, without going through the general engine:
///
/// ```text
/// R_λ(B) = tr(P_λ ρ P_λ B) / q_λ   if q_λ > 0
/// R_λ(B) = tr(B) / m               if q_λ = 0
/// ```
pub fn measurement_disintegration(obs: &Observable, rho: &CMatrix, tol: &Tolerance) -> Result<DisintegrationResult> {
    let q = outcome_distribution(obs, rho, tol)?;
    let residual = luders(obs, rho).max_abs_diff(rho);
    let violated = (residual > tol.residual()).then_some((Condition::LudersInvariance, residual));
    let certificate = Certificate {
        reconstruction: residual,
        tau_min_eigenvalue: 0.0,
        trace: 0.0,
        violated,
    };
    if violated.is_some() {
        return Ok(DisintegrationResult {
            exists: false,
            map: None,
            tau: None,
            certificate,
        });
    }

    let m = obs.dim();
    let mut tau = Vec::with_capacity(obs.spectrum.len());
    let mut offset = 0;
    let mut weighted = Vec::with_capacity(obs.spectrum.len());
    for (k, &d) in obs.ranks.iter().enumerate() {
        let v = CMatrix::from_fn(m, d, |r, c| obs.basis[(r, offset + c)]);
        offset += d;
        if q.is_null(k, tol) {
            tau.push(vec![TauEntry::Unconstrained(CMatrix::identity(d).scale_real(1.0 / d as f64))]);
            weighted.push(None);
        } else {
            let local = (&(&v.adjoint() * rho) * &v).scale_real(1.0 / q.weight(k));
            tau.push(vec![TauEntry::Determined(local)]);
            let p = &obs.projectors[k];
            weighted.push(Some((&(p * rho) * p).scale_real(1.0 / q.weight(k))));
        }
    }
    let source = Algebra::matrix(m)?;
    let target = Algebra::commutative(obs.spectrum.len())?;
    let map = BlockMap::from_components(&source, &target, |k, _, b| {
        let v = match &weighted[k] {
            Some(rk) => (rk * b).trace(),
            None => b.trace() / m as f64,
        };
        CMatrix::from_fn(1, 1, |_, _| v)
    });
    Ok(DisintegrationResult {
        exists: true,
        map: Some(map),
        tau: Some(tau),
        certificate,
    })
}

fn check_compatible(obs: &Observable, rho: &CMatrix, tol: &Tolerance) -> Result<()> {
    if rho.rows() != obs.dim() || !rho.is_square() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} density", obs.dim()),
            actual: format!("{}x{}", rho.rows(), rho.cols()),
        });
    }
    check_density(rho, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::disintegration::{disintegrate, verify_disintegration};
    use crate::maps::ae_equal;
    use crate::matrix::C64;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn plus() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])
    }

    #[test]
    fn spectral_decomposition() {
        let obs = Observable::new(CMatrix::from_diag(&[2.0, 1.0]), &tol()).unwrap();
        assert_eq!(obs.spectrum(), &[2.0, 1.0]);
        let hom = spectral_hom(&obs);
        let e0 = AlgebraElement::matrix_unit(hom.source(), 0, 0, 0);
        let img = hom.apply(&e0).unwrap();
        assert!(img.block(0).approx_eq(&CMatrix::from_diag(&[1.0, 0.0]), 1e-15));

        let obs = Observable::new(CMatrix::from_diag(&[1.0, 1.0, 2.0]), &tol()).unwrap();
        assert_eq!(obs.ranks(), &[1, 2]);
        assert!(obs.projectors()[1].approx_eq(&CMatrix::from_diag(&[1.0, 1.0, 0.0]), 1e-15));
        let recon = obs
            .projectors()
            .iter()
            .zip(obs.spectrum())
            .fold(CMatrix::zeros(3, 3), |acc, (p, &l)| &acc + &p.scale_real(l));
        assert!(recon.approx_eq(obs.matrix(), 1e-14));
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let obs = Observable::new(CMatrix::from_diag(&[1.0, 1.0 + 1e-9, 3.0]), &tol()).unwrap();
        assert_eq!(obs.spectrum().len(), 2);
        assert_eq!(obs.ranks(), &[1, 2]);
        let obs = Observable::new(CMatrix::from_diag(&[1.0, 1.0 + 1e-4]), &tol()).unwrap();
        assert_eq!(obs.spectrum().len(), 2);
    }

    #[test]
    fn outcome_distribution_examples() {
        let obs = Observable::new(CMatrix::from_diag(&[1.0, 2.0]), &tol()).unwrap();
        let q = outcome_distribution(&obs, &plus(), &tol()).unwrap();
        assert!((q.weight(0) - 0.5).abs() < 1e-15 && (q.weight(1) - 0.5).abs() < 1e-15);
        let obs = Observable::new(CMatrix::from_diag(&[1.0, 1.0, 2.0]), &tol()).unwrap();
        let q = outcome_distribution(&obs, &CMatrix::identity(3).scale_real(1.0 / 3.0), &tol()).unwrap();
        assert!((q.weight(0) - 1.0 / 3.0).abs() < 1e-15 && (q.weight(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!(outcome_distribution(&obs, &CMatrix::identity(3), &tol()).is_err());
    }

    #[test]
    fn luders_examples() {
        let obs = Observable::new(CMatrix::from_diag(&[1.0, 2.0]), &tol()).unwrap();
        assert!(luders(&obs, &plus()).approx_eq(&CMatrix::from_diag(&[0.5, 0.5]), 1e-15));
        let d = CMatrix::from_diag(&[0.3, 0.7]);
        assert!(luders(&obs, &d).approx_eq(&d, 1e-15));

        // Z ⊗ I on the singlet: keep the two diagonal 2x2 blocks
        let z = CMatrix::from_diag(&[1.0, -1.0]).kron(&CMatrix::identity(2));
        let obs = Observable::new(z, &tol()).unwrap();
        let epr = CMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.5, -0.5, 0.0],
            &[0.0, -0.5, 0.5, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ]);
        let expected = CMatrix::from_diag(&[0.0, 0.5, 0.5, 0.0]);
        assert!(luders(&obs, &epr).approx_eq(&expected, 1e-15));
    }

    #[test]
    fn retrodiction_examples() {
        let obs = Observable::new(CMatrix::from_diag(&[1.0, 1.0, 2.0]), &tol()).unwrap();
        let rho = CMatrix::from_diag(&[0.25, 0.25, 0.5]);
        let res = measurement_disintegration(&obs, &rho, &tol()).unwrap();
        assert!(res.exists);
        let states = component_states(&obs, &rho, &tol()).unwrap();
        assert!(states[1].as_ref().unwrap().approx_eq(&CMatrix::from_diag(&[0.5, 0.5, 0.0]), 1e-15));
        assert!(states[0].as_ref().unwrap().approx_eq(&CMatrix::from_diag(&[0.0, 0.0, 1.0]), 1e-15));
        let problem = measurement_problem(&obs, &rho, &tol()).unwrap();
        let report = verify_disintegration(&problem, res.map.as_ref().unwrap(), &tol()).unwrap();
        assert!(report.passed, "{report:?}");

        let obs = Observable::new(CMatrix::from_diag(&[1.0, 2.0]), &tol()).unwrap();
        let res = measurement_disintegration(&obs, &plus(), &tol()).unwrap();
        assert!(!res.exists);
        assert_eq!(res.certificate.violated.unwrap().0, Condition::LudersInvariance);
    }

    #[test]
    fn agrees_with_general_engine() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_real_rows(&[&[s, s, 0.0], &[s, -s, 0.0], &[0.0, 0.0, 1.0]]);
        let a = &(&h * &CMatrix::from_diag(&[3.0, -1.0, 3.0])) * &h.adjoint();
        let obs = Observable::new(a.clone(), &tol()).unwrap();
        // commutes with A, lives only on the λ = 3 eigenspace
        let rho = &(&h * &CMatrix::from_diag(&[0.6, 0.0, 0.4])) * &h.adjoint();
        let special = measurement_disintegration(&obs, &rho, &tol()).unwrap();
        let problem = measurement_problem(&obs, &rho, &tol()).unwrap();
        let general = disintegrate(&problem, &tol());
        assert!(special.exists && general.exists);
        let (r1, r2) = (special.map.unwrap(), general.map.unwrap());
        assert!(ae_equal(&r1, &r2, problem.xi(), &tol()).unwrap());
        assert!(r1.choi_block(0, 0).approx_eq(r2.choi_block(0, 0), 1e-12));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let out = r1.apply(&AlgebraElement::single(b.clone()).unwrap()).unwrap();
        assert!((out.block(1)[(0, 0)] - b.trace() / 3.0).norm() < 1e-14);
    }
}
