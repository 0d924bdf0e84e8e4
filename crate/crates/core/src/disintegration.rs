//! Existence and construction of disintegrations.
//!
//! Given a state-preserving unital *-homomorphism `F: (B, ξ) → (A, ω)` with
//! `ξ = ω ∘ F`, a disintegration is a CPU map `R: A → B` with `ξ ∘ R = ω`
//! and `R ∘ F = id_B` almost everywhere with respect to `ξ`.
//!
//! Three entry points cover increasing generality:
//!
//! * [`disintegrate_matrix_case`]: `F(B) = 1_p ⊗ B` on matrix algebras. A
//!   disintegration exists iff `ρ = τ ⊗ σ` for a density `τ`, and then
//!   `R(A) = tr_p((τ ⊗ 1) A)`.
//! * [`disintegrate_matrix_unitary_case`]: `F = Ad_U ∘ (1_p ⊗ ·)`.
//! * [`disintegrate`]: direct sums with a hom in Bratteli form. Existence is
//!   decided by factoring every conjugated target density as
//!   `p_i U_i† ρ_i U_i = diag(q_1 τ_1i ⊗ σ_1, …, q_t τ_ti ⊗ σ_t)`.
//!
//! Candidate `τ` matrices are extracted by projecting each sub-block onto
//! `σ_j`, `τ_γη = tr(σ_j · block_γη) / (q_j tr σ_j²)`, which is exact
//! whenever a factorization exists. The verdict then requires the full
//! reconstruction, positivity of every `τ` and the trace normalization.

use crate::algebra::{check_density, State};
use crate::bratteli::BratteliHom;
use crate::error::{Error, Result};
use crate::maps::{ae_report, compose, BlockMap};
use crate::matrix::{CMatrix, Tolerance, C64, ZERO};

/// A state-preserving hom together with the two states it relates.
#[derive(Debug, Clone)]
pub struct DisintegrationProblem {
    hom: BratteliHom,
    omega: State,
    xi: State,
}

impl DisintegrationProblem {
    /// `omega` lives on the hom's target, `xi` on its source, and `xi` must
    /// equal `omega ∘ hom` within `10 · eps_eq`.
    pub fn new(hom: BratteliHom, omega: State, xi: State, tol: &Tolerance) -> Result<Self> {
        hom.target().check_same(omega.algebra())?;
        hom.source().check_same(xi.algebra())?;
        let induced = hom.to_blockmap().pullback_state(&omega, tol)?;
        let residual = induced.distance(&xi);
        if residual > tol.residual() {
            return Err(Error::StateNotPreserved(residual));
        }
        Ok(DisintegrationProblem { hom, omega, xi })
    }

    /// Builds the problem with `xi := omega ∘ hom`.
    pub fn from_hom(hom: BratteliHom, omega: State, tol: &Tolerance) -> Result<Self> {
        hom.target().check_same(omega.algebra())?;
        let xi = hom.to_blockmap().pullback_state(&omega, tol)?;
        Ok(DisintegrationProblem { hom, omega, xi })
    }

    pub fn hom(&self) -> &BratteliHom {
        &self.hom
    }

    pub fn omega(&self) -> &State {
        &self.omega
    }

    pub fn xi(&self) -> &State {
        &self.xi
    }
}

/// One entry of the `τ` grid, indexed `[j][i]` (source block `j`, target block `i`).
#[derive(Debug, Clone, PartialEq)]
pub enum TauEntry {
    /// `c_ij = 0`: there is no such matrix.
    Absent,
    /// `q_j = 0`: any PSD matrix works; a placeholder is stored.
    Unconstrained(CMatrix),
    Determined(CMatrix),
}

impl TauEntry {
    pub fn matrix(&self) -> Option<&CMatrix> {
        match self {
            TauEntry::Absent => None,
            TauEntry::Unconstrained(m) | TauEntry::Determined(m) => Some(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// The conjugated target densities do not have the required block form.
    Reconstruction,
    /// Some `τ` is not positive semidefinite.
    TauPositivity,
    /// `Σ_i tr τ_ji ≠ 1` for some non-null `j`.
    TraceNormalization,
    /// The Lüders projection differs from the state (measurement route).
    LudersInvariance,
}

impl Condition {
    pub fn name(&self) -> &'static str {
        match self {
            Condition::Reconstruction => "reconstruction",
            Condition::TauPositivity => "tau_positivity",
            Condition::TraceNormalization => "trace_normalization",
            Condition::LudersInvariance => "luders_invariance",
        }
    }
}

/// Residuals of the three existence conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Max entrywise distance between the target densities and the block form
    /// rebuilt from the extracted `τ`.
    pub reconstruction: f64,
    /// Smallest eigenvalue over the determined `τ` (`0` if there are none).
    pub tau_min_eigenvalue: f64,
    /// Max `|Σ_i tr τ_ji − 1|` over the non-null `j`.
    pub trace: f64,
    /// First violated condition with its residual.
    pub violated: Option<(Condition, f64)>,
}

#[derive(Debug, Clone)]
pub struct DisintegrationResult {
    pub exists: bool,
    pub map: Option<BlockMap>,
    pub tau: Option<Vec<Vec<TauEntry>>>,
    pub certificate: Certificate,
}

fn verdict(reconstruction: f64, tau_min: f64, trace: f64, tol: &Tolerance) -> Certificate {
    let violated = if reconstruction > tol.residual() {
        Some((Condition::Reconstruction, reconstruction))
    } else if tau_min < -tol.eps_psd {
        Some((Condition::TauPositivity, -tau_min))
    } else if trace > tol.residual() {
        Some((Condition::TraceNormalization, trace))
    } else {
        None
    };
    Certificate {
        reconstruction,
        tau_min_eigenvalue: tau_min,
        trace,
        violated,
    }
}

/// Smallest eigenvalue of the Hermitian part. An extracted `τ` is Hermitian
/// up to rounding because the target densities are validated as Hermitian.
fn tau_min_eigenvalue<'a>(taus: impl IntoIterator<Item = &'a CMatrix>) -> f64 {
    let min = taus.into_iter().map(CMatrix::min_eigenvalue).fold(f64::INFINITY, f64::min);
    // `+ 0.0` turns a negative zero into zero
    if min.is_finite() {
        min + 0.0
    } else {
        0.0
    }
}

/// `τ_γη = tr(σ · W_γη) / (q · tr σ²)` for the `c × c` grid of `n × n`
/// sub-blocks of `w` starting at `offset`.
fn extract_tau(w: &CMatrix, offset: usize, c: usize, sigma: &CMatrix, q: f64) -> CMatrix {
    let n = sigma.rows();
    let norm = q * (sigma * sigma).trace().re;
    CMatrix::from_fn(c, c, |g, h| {
        let blk = w.block(offset + g * n, offset + h * n, n, n);
        (sigma * &blk).trace() / norm
    })
}

/// Matrix-algebra case: `F(B) = 1_p ⊗ B` from `M_n` into `M_{pn}`.
///
/// `rho` is the density on `M_{pn}`, `sigma` the induced density on `M_n`.
pub fn disintegrate_matrix_case(
    rho: &CMatrix,
    sigma: &CMatrix,
    p: usize,
    tol: &Tolerance,
) -> Result<DisintegrationResult> {
    check_density(rho, tol)?;
    check_density(sigma, tol)?;
    let n = sigma.rows();
    if p == 0 || rho.rows() != p * n {
        return Err(Error::BadBlockStructure(format!(
            "{}x{} density is not ({p}·{n})-dimensional",
            rho.rows(),
            rho.cols()
        )));
    }
    let marginal = rho.partial_trace_left(p, n)?;
    let residual = marginal.max_abs_diff(sigma);
    if residual > tol.residual() {
        return Err(Error::StateNotPreserved(residual));
    }

    let tau = extract_tau(rho, 0, p, sigma, 1.0);
    let reconstruction = tau.kron(sigma).max_abs_diff(rho);
    let tau_min = tau_min_eigenvalue([&tau]);
    let trace = (tau.trace() - 1.0).norm();
    let certificate = verdict(reconstruction, tau_min, trace, tol);
    if certificate.violated.is_some() {
        return Ok(DisintegrationResult {
            exists: false,
            map: None,
            tau: None,
            certificate,
        });
    }

    let map = matrix_case_map(&tau, n)?;
    Ok(DisintegrationResult {
        exists: true,
        map: Some(map),
        tau: Some(vec![vec![TauEntry::Determined(tau)]]),
        certificate,
    })
}

/// `R(A) = tr_p((τ ⊗ 1_n) A)` as a map `M_{pn} → M_n`.
pub fn matrix_case_map(tau: &CMatrix, n: usize) -> Result<BlockMap> {
    let p = tau.rows();
    let big = crate::algebra::Algebra::matrix(p * n)?;
    let small = crate::algebra::Algebra::matrix(n)?;
    let lifted = tau.kron(&CMatrix::identity(n));
    Ok(BlockMap::from_components(&big, &small, |_, _, a| {
        (&lifted * a)
            .partial_trace_left(p, n)
            .expect("shape fixed by construction")
    }))
}

/// Matrix-algebra case with `F = Ad_U ∘ (1_p ⊗ ·)`.
///
/// Solves the plain case for `U† ρ U` and returns `R_U = R ∘ Ad_{U†}`.
pub fn disintegrate_matrix_unitary_case(
    rho: &CMatrix,
    sigma: &CMatrix,
    p: usize,
    u: &CMatrix,
    tol: &Tolerance,
) -> Result<DisintegrationResult> {
    if u.rows() != rho.rows() || !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} unitary", rho.rows()),
            actual: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    if !u.is_unitary(tol) {
        return Err(Error::NotUnitary(
            (u * &u.adjoint()).max_abs_diff(&CMatrix::identity(u.rows())),
        ));
    }
    let conjugated = &(&u.adjoint() * rho) * u;
    let mut result = disintegrate_matrix_case(&conjugated, sigma, p, tol)?;
    if let Some(r) = result.map.take() {
        let big = r.source().clone();
        let small = r.target().clone();
        result.map = Some(BlockMap::from_components(&big, &small, |_, _, a| {
            r.apply_component(0, 0, &(&(&u.adjoint() * a) * u))
        }));
    }
    Ok(result)
}

/// General case over direct sums.
#[allow(clippy::needless_range_loop)] // τ is indexed [j][i] against the Bratteli grid
pub fn disintegrate(problem: &DisintegrationProblem, tol: &Tolerance) -> DisintegrationResult {
    let hom = problem.hom();
    let (omega, xi) = (problem.omega(), problem.xi());
    let (a_alg, b_alg) = (hom.target(), hom.source());
    let (s, t) = (a_alg.num_blocks(), b_alg.num_blocks());
    let null = xi.null_blocks(tol);

    let weighted = omega.density_tuple();
    let mut tau: Vec<Vec<TauEntry>> = vec![vec![TauEntry::Absent; s]; t];
    let mut reconstruction: f64 = 0.0;
    for i in 0..s {
        let u = hom.unitary(i);
        let w = &(&u.adjoint() * weighted.block(i)) * u;
        let mut expected = CMatrix::zeros(w.rows(), w.rows());
        for j in 0..t {
            let c = hom.multiplicity(i, j);
            if c == 0 {
                continue;
            }
            let off = hom.superblock_offset(i, j);
            if null[j] {
                tau[j][i] =
                    TauEntry::Unconstrained(CMatrix::identity(c).scale_real(1.0 / (s * c) as f64));
                continue;
            }
            let (q, sigma) = (xi.weight(j), xi.density(j));
            let tji = extract_tau(&w, off, c, sigma, q);
            expected.set_block(off, off, &tji.kron(sigma).scale_real(q));
            tau[j][i] = TauEntry::Determined(tji);
        }
        reconstruction = reconstruction.max(w.max_abs_diff(&expected));
    }

    let tau_min = tau_min_eigenvalue(tau.iter().flatten().filter_map(|e| match e {
        TauEntry::Determined(m) => Some(m),
        _ => None,
    }));
    let trace = (0..t)
        .filter(|&j| !null[j])
        .map(|j| {
            let total: C64 = tau[j]
                .iter()
                .filter_map(TauEntry::matrix)
                .map(CMatrix::trace)
                .sum();
            (total - 1.0).norm()
        })
        .fold(0.0, f64::max);

    let certificate = verdict(reconstruction, tau_min, trace, tol);
    if certificate.violated.is_some() {
        return DisintegrationResult {
            exists: false,
            map: None,
            tau: None,
            certificate,
        };
    }
    let map = canonical_map(hom, &tau, &null);
    DisintegrationResult {
        exists: true,
        map: Some(map),
        tau: Some(tau),
        certificate,
    }
}

/// The canonical disintegration built from a `τ` grid:
///
/// ```text
/// R_ji(A_i) = Σ_{γ,η} τ_ji[η, γ] · (U_i† A_i U_i)_{jj; γη}   if q_j > 0
/// R_ji(A_i) = tr(A_i) / (s · m_i) · 1_{n_j}                   if q_j = 0
/// ```
pub fn canonical_map(hom: &BratteliHom, tau: &[Vec<TauEntry>], null: &[bool]) -> BlockMap {
    let (a_alg, b_alg) = (hom.target(), hom.source());
    let s = a_alg.num_blocks();
    BlockMap::from_components(a_alg, b_alg, |j, i, a| {
        let n = b_alg.dim(j);
        if null[j] {
            let m = a_alg.dim(i);
            return CMatrix::identity(n).scale(a.trace() / (s * m) as f64);
        }
        let Some(tji) = tau[j][i].matrix() else {
            return CMatrix::zeros(n, n);
        };
        let u = hom.unitary(i);
        let conj = &(&u.adjoint() * a) * u;
        let off = hom.superblock_offset(i, j);
        let c = tji.rows();
        let mut out = CMatrix::zeros(n, n);
        for g in 0..c {
            for h in 0..c {
                let coeff = tji[(h, g)];
                if coeff != ZERO {
                    out += &conj.block(off + g * n, off + h * n, n, n).scale(coeff);
                }
            }
        }
        out
    })
}

/// Residuals of the defining conditions of a disintegration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport {
    /// Most negative Choi eigenvalue of the candidate.
    pub cp: f64,
    /// `max |R(1) − 1|`.
    pub unital: f64,
    /// `max |ξ(R(E)) − ω(E)|` over matrix units `E` of `A`.
    pub state: f64,
    /// Largest entry of `(R(F(E)) − E)·P_ξ` over matrix units `E` of `B`.
    pub ae_identity: f64,
    pub passed: bool,
}

pub fn verify_disintegration(
    problem: &DisintegrationProblem,
    candidate: &BlockMap,
    tol: &Tolerance,
) -> Result<VerificationReport> {
    let hom = problem.hom();
    candidate.source().check_same(hom.target())?;
    candidate.target().check_same(hom.source())?;
    let (omega, xi) = (problem.omega(), problem.xi());

    let cp = candidate.cp_residual();
    let unital = candidate.unital_residual();
    let mut state: f64 = 0.0;
    for ((i, a, b), img) in candidate.unit_images() {
        let lhs = xi.eval(&img)?;
        let rhs = omega.density(i)[(b, a)] * omega.weight(i);
        state = state.max((lhs - rhs).norm());
    }
    let round_trip = compose(candidate, &hom.to_blockmap())?;
    let ae_identity = ae_report(&round_trip, &BlockMap::identity(hom.source()), xi, tol)?.max_residual;

    let bound = tol.residual();
    Ok(VerificationReport {
        cp,
        unital,
        state,
        ae_identity,
        passed: cp <= bound && unital <= bound && state <= bound && ae_identity <= bound,
    })
}

/// Two disintegrations agree `ξ`-a.e. and their components coincide on
/// every non-null block row.
pub fn uniqueness_check(
    problem: &DisintegrationProblem,
    r1: &BlockMap,
    r2: &BlockMap,
    tol: &Tolerance,
) -> Result<bool> {
    let xi = problem.xi();
    let ae = ae_report(r1, r2, xi, tol)?.witness.is_none();
    let null = xi.null_blocks(tol);
    let rows_equal = null.iter().enumerate().filter(|(_, &z)| !z).all(|(j, _)| {
        r1.choi()[j]
            .iter()
            .zip(&r2.choi()[j])
            .all(|(a, b)| a.max_abs_diff(b) <= tol.residual())
    });
    Ok(ae && rows_equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Algebra, AlgebraElement};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn epr() -> CMatrix {
        CMatrix::from_real_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.5, -0.5, 0.0],
            &[0.0, -0.5, 0.5, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
        ])
    }

    #[test]
    fn diagonal_product_state() {
        let rho = CMatrix::from_diag(&[0.1, 0.3, 0.15, 0.45]);
        let sigma = CMatrix::from_diag(&[0.25, 0.75]);
        let res = disintegrate_matrix_case(&rho, &sigma, 2, &tol()).unwrap();
        assert!(res.exists);
        let tau = res.tau.unwrap()[0][0].matrix().unwrap().clone();
        assert!(tau.approx_eq(&CMatrix::from_diag(&[0.4, 0.6]), 1e-14));
    }

    #[test]
    fn epr_has_no_disintegration() {
        let sigma = CMatrix::identity(2).scale_real(0.5);
        let res = disintegrate_matrix_case(&epr(), &sigma, 2, &tol()).unwrap();
        assert!(!res.exists);
        assert!(res.map.is_none());
        let (cond, r) = res.certificate.violated.unwrap();
        assert_eq!(cond, Condition::Reconstruction);
        // τ = I/2, so τ ⊗ σ = I/4 misses the off-diagonal coherence of 1/2
        assert!((r - 0.5).abs() < 1e-14);
    }

    #[test]
    fn incompatible_marginal_is_an_error() {
        let rho = CMatrix::from_diag(&[0.1, 0.3, 0.15, 0.45]);
        let sigma = CMatrix::from_diag(&[0.5, 0.5]);
        assert!(matches!(
            disintegrate_matrix_case(&rho, &sigma, 2, &tol()),
            Err(Error::StateNotPreserved(_))
        ));
    }

    #[test]
    fn product_state_gives_left_inverse() {
        let tau0 = CMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
        let sigma0 = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(0.6, 0.0),
            (1, 1) => C64::new(0.4, 0.0),
            (0, 1) => C64::new(0.1, 0.2),
            _ => C64::new(0.1, -0.2),
        });
        let res = disintegrate_matrix_case(&tau0.kron(&sigma0), &sigma0, 2, &tol()).unwrap();
        assert!(res.exists);
        let tau = res.tau.as_ref().unwrap()[0][0].matrix().unwrap();
        assert!(tau.approx_eq(&tau0, 1e-13));
        let r = res.map.unwrap();
        let f = BratteliHom::block_diagonal(2, 2).unwrap().to_blockmap();
        let rf = compose(&r, &f).unwrap();
        assert!(rf.max_abs_diff(&BlockMap::identity(f.source())) < 1e-13);
        // Choi(R) = τ^T ⊗ Choi(id)
        let choi_id = BlockMap::identity(f.source()).choi_block(0, 0).clone();
        assert!(r.choi_block(0, 0).approx_eq(&tau0.transpose().kron(&choi_id), 1e-13));
    }

    #[test]
    fn unitary_case_reduces_and_rotates() {
        let rho = CMatrix::from_diag(&[0.1, 0.3, 0.15, 0.45]);
        let sigma = CMatrix::from_diag(&[0.25, 0.75]);
        let plain = disintegrate_matrix_case(&rho, &sigma, 2, &tol()).unwrap();
        let with_id = disintegrate_matrix_unitary_case(&rho, &sigma, 2, &CMatrix::identity(4), &tol()).unwrap();
        assert!(with_id.map.unwrap().equals(&plain.map.unwrap(), &tol()));
        assert!(disintegrate_matrix_unitary_case(&rho, &sigma, 2, &CMatrix::from_diag(&[1.0, 1.0, 1.0, 2.0]), &tol())
            .is_err());
    }

    #[test]
    fn pure_state_with_mixed_marginal_fails() {
        // |ψ⟩ = (|00⟩ + |11⟩)/√2, marginal I/2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = [C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let rho = CMatrix::outer(&v);
        let sigma = rho.partial_trace_left(2, 2).unwrap();
        assert!(!disintegrate_matrix_case(&rho, &sigma, 2, &tol()).unwrap().exists);
    }

    #[test]
    fn general_engine_matches_matrix_case() {
        let tau0 = CMatrix::from_diag(&[0.4, 0.6]);
        let sigma0 = CMatrix::from_diag(&[0.25, 0.75]);
        let rho = tau0.kron(&sigma0);
        let hom = BratteliHom::block_diagonal(2, 2).unwrap();
        let omega = State::from_matrix(rho.clone(), &tol()).unwrap();
        let problem = DisintegrationProblem::from_hom(hom, omega, &tol()).unwrap();
        assert!(problem.xi().density(0).approx_eq(&sigma0, 1e-14));
        let general = disintegrate(&problem, &tol());
        let matrix = disintegrate_matrix_case(&rho, &sigma0, 2, &tol()).unwrap();
        assert!(general.exists && matrix.exists);
        assert!(general.map.as_ref().unwrap().equals(matrix.map.as_ref().unwrap(), &tol()));
        let report = verify_disintegration(&problem, general.map.as_ref().unwrap(), &tol()).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn classical_fixture_into_m2() {
        // B = C ⊕ C, A = M_2, c = [[1, 1]]: B ↦ diag(b_1, b_2)
        let src = Algebra::commutative(2).unwrap();
        let hom = BratteliHom::standard(src, vec![vec![1, 1]]).unwrap();
        let omega = State::from_matrix(CMatrix::from_diag(&[0.3, 0.7]), &tol()).unwrap();
        let problem = DisintegrationProblem::from_hom(hom, omega, &tol()).unwrap();
        assert_eq!(problem.xi().weights().len(), 2);
        let res = disintegrate(&problem, &tol());
        assert!(res.exists);
        let r = res.map.unwrap();
        // R(A) = (A_11, A_22): the classical conditional of a point mass on each fiber
        let a = AlgebraElement::single(CMatrix::from_real_rows(&[&[2.0, 5.0], &[7.0, 3.0]])).unwrap();
        let out = r.apply(&a).unwrap();
        assert!((out.block(0)[(0, 0)] - 2.0).norm() < 1e-14);
        assert!((out.block(1)[(0, 0)] - 3.0).norm() < 1e-14);
    }

    #[test]
    fn null_block_uses_fallback_and_is_unconstrained() {
        // B = M_1 ⊕ M_2, A = M_1 ⊕ M_2 ⊕ M_2 with c = [[1,0],[0,1],[0,1]],
        // all weight on the first block of A.
        let src = Algebra::new(vec![1, 2]).unwrap();
        let hom = BratteliHom::standard(src, vec![vec![1, 0], vec![0, 1], vec![0, 1]]).unwrap();
        let omega = State::new(
            hom.target().clone(),
            vec![1.0, 0.0, 0.0],
            vec![CMatrix::identity(1), CMatrix::identity(2).scale_real(0.5), CMatrix::identity(2).scale_real(0.5)],
            &tol(),
        )
        .unwrap();
        let problem = DisintegrationProblem::from_hom(hom, omega, &tol()).unwrap();
        let res = disintegrate(&problem, &tol());
        assert!(res.exists);
        let tau = res.tau.unwrap();
        assert!(matches!(tau[0][1], TauEntry::Absent));
        assert!(matches!(tau[1][1], TauEntry::Unconstrained(_)));
        let r = res.map.unwrap();
        assert!(r.is_cp(&tol()) && r.is_unital(&tol()));
        // q_2 = 0 row: tr(A_i)/(3·m_i)·1
        let a = AlgebraElement::new(
            problem.hom().target().clone(),
            vec![CMatrix::from_diag(&[3.0]), CMatrix::from_diag(&[1.0, 2.0]), CMatrix::zeros(2, 2)],
        )
        .unwrap();
        let out = r.apply(&a).unwrap();
        let expected = 3.0 / 3.0 + 3.0 / 6.0;
        assert!(out.block(1).approx_eq(&CMatrix::identity(2).scale_real(expected), 1e-14));
        assert!(verify_disintegration(&problem, &r, &tol()).unwrap().passed);
    }

    #[test]
    fn problem_rejects_wrong_xi() {
        let hom = BratteliHom::block_diagonal(2, 2).unwrap();
        let omega = State::from_matrix(CMatrix::from_diag(&[0.1, 0.3, 0.15, 0.45]), &tol()).unwrap();
        let xi = State::from_matrix(CMatrix::from_diag(&[0.5, 0.5]), &tol()).unwrap();
        assert!(matches!(
            DisintegrationProblem::new(hom, omega, xi, &tol()),
            Err(Error::StateNotPreserved(_))
        ));
    }

    #[test]
    fn rescaled_kraus_fails_verification() {
        let rho = CMatrix::from_diag(&[0.1, 0.3, 0.15, 0.45]);
        let hom = BratteliHom::block_diagonal(2, 2).unwrap();
        let problem = DisintegrationProblem::from_hom(hom, State::from_matrix(rho, &tol()).unwrap(), &tol()).unwrap();
        let r = disintegrate(&problem, &tol()).map.unwrap();
        let mut k = r.kraus(&tol()).unwrap();
        k.ops[0][0][0] = k.ops[0][0][0].scale_real(1.01);
        let bad = BlockMap::from_kraus(&k).unwrap();
        let report = verify_disintegration(&problem, &bad, &tol()).unwrap();
        assert!(!report.passed);
        assert!(report.unital > 1e-3 || report.state > 1e-3);
    }
}
