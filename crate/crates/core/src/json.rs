//! JSON wire format for problem files and results.
//!
//! Complex numbers are `[re, im]` pairs; plain numbers are accepted on input
//! as real entries. Matrices are arrays of rows. Every problem file has the
//! envelope `{"version": "1", "kind": ..., "payload": {...}}` and is decoded
//! straight into validated library objects by [`parse_problem`].

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{Algebra, State};
use crate::bratteli::BratteliHom;
use crate::classical::{FinProb, StochMap};
use crate::disintegration::{DisintegrationResult, TauEntry, VerificationReport};
use crate::error::Error;
use crate::maps::BlockMap;
use crate::matrix::{CMatrix, Tolerance, C64};
use crate::measurement::Observable;

pub const MAX_INPUT_BYTES: usize = 16 << 20;
pub const MAX_BLOCK_DIM: usize = 256;
pub const MAX_BLOCKS: usize = 256;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WireError {
    #[error("input is {0} bytes, limit is {MAX_INPUT_BYTES}")]
    TooLarge(usize),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("unsupported version {0:?}, expected \"1\"")]
    Version(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn schema<T>(e: serde_json::Error) -> Result<T, WireError> {
    Err(WireError::Schema(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexWire {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexWire> for C64 {
    fn from(c: ComplexWire) -> C64 {
        match c {
            ComplexWire::Pair([re, im]) => C64::new(re, im),
            ComplexWire::Real(re) => C64::new(re, 0.0),
        }
    }
}

pub type MatrixWire = Vec<Vec<ComplexWire>>;

pub fn matrix_from_wire(m: &MatrixWire) -> Result<CMatrix, WireError> {
    if m.len() > MAX_BLOCK_DIM * MAX_BLOCKS {
        return Err(WireError::Schema(format!("matrix with {} rows is too large", m.len())));
    }
    let rows: Vec<Vec<C64>> = m.iter().map(|r| r.iter().map(|&c| c.into()).collect()).collect();
    Ok(CMatrix::from_rows(&rows)?)
}

pub fn matrix_to_wire(m: &CMatrix) -> MatrixWire {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|c| ComplexWire::Pair([c.re, c.im])).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraWire {
    pub dims: Vec<usize>,
}

impl AlgebraWire {
    pub fn to_algebra(&self) -> Result<Algebra, WireError> {
        check_dims(&self.dims)?;
        Ok(Algebra::new(self.dims.clone())?)
    }

    pub fn from_algebra(a: &Algebra) -> Self {
        AlgebraWire { dims: a.dims().to_vec() }
    }
}

fn check_dims(dims: &[usize]) -> Result<(), WireError> {
    if dims.len() > MAX_BLOCKS {
        return Err(WireError::Schema(format!("{} blocks exceed the limit of {MAX_BLOCKS}", dims.len())));
    }
    if let Some(d) = dims.iter().find(|&&d| d > MAX_BLOCK_DIM) {
        return Err(WireError::Schema(format!("block dimension {d} exceeds the limit of {MAX_BLOCK_DIM}")));
    }
    Ok(())
}

/// A state, given either normalized (`weights` + `densities`), as the tuple
/// of weighted blocks `q_j σ_j` (`blocks`, together with `dims` implied by
/// the blocks), or as a single density matrix (`density`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateWire {
    Normalized { weights: Vec<f64>, densities: Vec<MatrixWire> },
    Blocks { blocks: Vec<MatrixWire> },
    Density { density: MatrixWire },
}

impl StateWire {
    pub fn to_state(&self, tol: &Tolerance) -> Result<State, WireError> {
        match self {
            StateWire::Normalized { weights, densities } => {
                let mats = densities.iter().map(matrix_from_wire).collect::<Result<Vec<_>, _>>()?;
                let dims: Vec<usize> = mats.iter().map(CMatrix::rows).collect();
                check_dims(&dims)?;
                Ok(State::new(Algebra::new(dims)?, weights.clone(), mats, tol)?)
            }
            StateWire::Blocks { blocks } => {
                let mats = blocks.iter().map(matrix_from_wire).collect::<Result<Vec<_>, _>>()?;
                let dims: Vec<usize> = mats.iter().map(CMatrix::rows).collect();
                check_dims(&dims)?;
                Ok(State::from_density(&Algebra::new(dims)?, mats, tol)?)
            }
            StateWire::Density { density } => {
                let m = matrix_from_wire(density)?;
                check_dims(&[m.rows()])?;
                Ok(State::from_matrix(m, tol)?)
            }
        }
    }

    pub fn from_state(s: &State) -> Self {
        StateWire::Normalized {
            weights: s.weights().to_vec(),
            densities: s.densities().iter().map(matrix_to_wire).collect(),
        }
    }
}

/// A linear map between block algebras as its Choi grid `choi[j][i]`
/// (target block `j`, source block `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockMapWire {
    pub source: AlgebraWire,
    pub target: AlgebraWire,
    pub choi: Vec<Vec<MatrixWire>>,
}

impl BlockMapWire {
    pub fn to_map(&self) -> Result<BlockMap, WireError> {
        let source = self.source.to_algebra()?;
        let target = self.target.to_algebra()?;
        let choi = self
            .choi
            .iter()
            .map(|row| row.iter().map(matrix_from_wire).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BlockMap::new(source, target, choi)?)
    }

    pub fn from_map(m: &BlockMap) -> Self {
        BlockMapWire {
            source: AlgebraWire::from_algebra(m.source()),
            target: AlgebraWire::from_algebra(m.target()),
            choi: m.choi().iter().map(|row| row.iter().map(matrix_to_wire).collect()).collect(),
        }
    }
}

/// A hom in Bratteli form. `target` defaults to the dimensions implied by
/// the multiplicities and `unitaries` to identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomWire {
    pub source: AlgebraWire,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<AlgebraWire>,
    pub multiplicities: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<MatrixWire>>,
}

impl HomWire {
    pub fn to_hom(&self, tol: &Tolerance) -> Result<BratteliHom, WireError> {
        let source = self.source.to_algebra()?;
        let implied: Vec<usize> = self
            .multiplicities
            .iter()
            .map(|row| {
                row.iter()
                    .zip(source.dims())
                    .try_fold(0usize, |acc, (&c, &n)| c.checked_mul(n).and_then(|x| acc.checked_add(x)))
                    .unwrap_or(usize::MAX)
            })
            .collect();
        let target = match &self.target {
            Some(t) => t.to_algebra()?,
            None => {
                check_dims(&implied)?;
                Algebra::new(implied)?
            }
        };
        let unitaries = match &self.unitaries {
            Some(us) => us.iter().map(matrix_from_wire).collect::<Result<Vec<_>, _>>()?,
            None => target.dims().iter().map(|&m| CMatrix::identity(m)).collect(),
        };
        Ok(BratteliHom::new(source, target, self.multiplicities.clone(), unitaries, tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinProbWire {
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochMapWire {
    pub matrix: Vec<Vec<f64>>,
}

impl StochMapWire {
    pub fn from_stoch(f: &StochMap) -> Self {
        StochMapWire { matrix: f.to_rows() }
    }
}

/// A function `X → Y` as 1-based indices into `Y`. The codomain size
/// defaults to the largest index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionWire {
    pub map: Vec<usize>,
    #[serde(default)]
    pub codomain: Option<usize>,
}

impl FunctionWire {
    /// 0-based images and the codomain size.
    pub fn to_function(&self) -> Result<(Vec<usize>, usize), WireError> {
        if self.map.contains(&0) {
            return Err(WireError::Schema("function indices are 1-based".into()));
        }
        let ny = self.codomain.unwrap_or_else(|| self.map.iter().copied().max().unwrap_or(0));
        if ny > MAX_BLOCK_DIM * MAX_BLOCKS || self.map.len() > MAX_BLOCK_DIM * MAX_BLOCKS {
            return Err(WireError::Schema("function is too large".into()));
        }
        Ok((self.map.iter().map(|y| y - 1).collect(), ny))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CheckMap,
    AeEqual,
    Disintegrate,
    Classical,
    Measure,
    Compose,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::CheckMap => "check-map",
            Kind::AeEqual => "ae-equal",
            Kind::Disintegrate => "disintegrate",
            Kind::Classical => "classical",
            Kind::Measure => "measure",
            Kind::Compose => "compose",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    pub kind: Kind,
    pub payload: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckMapPayload {
    map: BlockMapWire,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AeEqualPayload {
    f: BlockMapWire,
    g: BlockMapWire,
    state: StateWire,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralPayload {
    hom: HomWire,
    omega: StateWire,
    #[serde(default)]
    xi: Option<StateWire>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixPayload {
    rho: MatrixWire,
    #[serde(default)]
    sigma: Option<MatrixWire>,
    p: usize,
    #[serde(default)]
    unitary: Option<MatrixWire>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassicalPayload {
    function: FunctionWire,
    p: FinProbWire,
    #[serde(default)]
    q: Option<FinProbWire>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurePayload {
    observable: MatrixWire,
    rho: MatrixWire,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeMaps {
    g: BlockMapWire,
    f: BlockMapWire,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComposeStoch {
    g: StochMapWire,
    f: StochMapWire,
}

/// A disintegration problem in one of its accepted encodings.
#[derive(Debug, Clone)]
pub enum DisintegrateInput {
    /// Hom in Bratteli form with the target state and optionally the source state.
    General {
        hom: BratteliHom,
        omega: State,
        xi: Option<State>,
    },
    /// Inclusion `B ↦ U (1_p ⊗ B) U†` of `M_n` into `M_{pn}`.
    Matrix {
        rho: CMatrix,
        sigma: Option<CMatrix>,
        p: usize,
        unitary: Option<CMatrix>,
    },
}

#[derive(Debug, Clone)]
pub enum ComposeInput {
    Maps { g: BlockMap, f: BlockMap },
    Stoch { g: StochMap, f: StochMap },
}

#[derive(Debug, Clone)]
pub struct ClassicalInput {
    pub function: Vec<usize>,
    pub codomain: usize,
    pub p: FinProb,
    pub q: Option<FinProb>,
}

#[derive(Debug, Clone)]
pub struct MeasureInput {
    pub observable: Observable,
    pub rho: CMatrix,
}

#[derive(Debug, Clone)]
pub enum Problem {
    CheckMap(BlockMap),
    AeEqual { f: BlockMap, g: BlockMap, state: State },
    Disintegrate(DisintegrateInput),
    Classical(ClassicalInput),
    Measure(MeasureInput),
    Compose(ComposeInput),
}

impl Problem {
    pub fn kind(&self) -> Kind {
        match self {
            Problem::CheckMap(_) => Kind::CheckMap,
            Problem::AeEqual { .. } => Kind::AeEqual,
            Problem::Disintegrate(_) => Kind::Disintegrate,
            Problem::Classical(_) => Kind::Classical,
            Problem::Measure(_) => Kind::Measure,
            Problem::Compose(_) => Kind::Compose,
        }
    }
}

pub fn parse_problem_bytes(bytes: &[u8], tol: &Tolerance) -> Result<Problem, WireError> {
    if bytes.len() > MAX_INPUT_BYTES {
        return Err(WireError::TooLarge(bytes.len()));
    }
    let text = std::str::from_utf8(bytes).map_err(|e| WireError::Json(e.to_string()))?;
    parse_problem(text, tol)
}

pub fn parse_problem(text: &str, tol: &Tolerance) -> Result<Problem, WireError> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(WireError::TooLarge(text.len()));
    }
    let file: ProblemFile = match serde_json::from_str(text) {
        Ok(f) => f,
        Err(e) if e.is_data() => return schema(e),
        Err(e) => return Err(WireError::Json(e.to_string())),
    };
    if file.version != "1" {
        return Err(WireError::Version(file.version));
    }
    parse_payload(file.kind, file.payload, tol)
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value) -> Result<T, WireError> {
    serde_json::from_value(v).or_else(schema)
}

fn parse_payload(kind: Kind, payload: Value, tol: &Tolerance) -> Result<Problem, WireError> {
    if !payload.is_object() {
        return Err(WireError::Schema("payload must be an object".into()));
    }
    Ok(match kind {
        Kind::CheckMap => Problem::CheckMap(from_value::<CheckMapPayload>(payload)?.map.to_map()?),
        Kind::AeEqual => {
            let p: AeEqualPayload = from_value(payload)?;
            Problem::AeEqual {
                f: p.f.to_map()?,
                g: p.g.to_map()?,
                state: p.state.to_state(tol)?,
            }
        }
        Kind::Disintegrate => {
            if payload.get("hom").is_some() {
                let p: GeneralPayload = from_value(payload)?;
                Problem::Disintegrate(DisintegrateInput::General {
                    hom: p.hom.to_hom(tol)?,
                    omega: p.omega.to_state(tol)?,
                    xi: p.xi.map(|x| x.to_state(tol)).transpose()?,
                })
            } else if payload.get("rho").is_some() {
                let p: MatrixPayload = from_value(payload)?;
                let rho = matrix_from_wire(&p.rho)?;
                check_dims(&[rho.rows()])?;
                Problem::Disintegrate(DisintegrateInput::Matrix {
                    rho,
                    sigma: p.sigma.as_ref().map(matrix_from_wire).transpose()?,
                    p: p.p,
                    unitary: p.unitary.as_ref().map(matrix_from_wire).transpose()?,
                })
            } else {
                return Err(WireError::Schema(
                    "disintegrate payload needs either \"hom\" and \"omega\" or \"rho\" and \"p\"".into(),
                ));
            }
        }
        Kind::Classical => {
            let p: ClassicalPayload = from_value(payload)?;
            let (function, codomain) = p.function.to_function()?;
            Problem::Classical(ClassicalInput {
                function,
                codomain,
                p: FinProb::new(p.p.weights, tol)?,
                q: p.q.map(|q| FinProb::new(q.weights, tol)).transpose()?,
            })
        }
        Kind::Measure => {
            let p: MeasurePayload = from_value(payload)?;
            let a = matrix_from_wire(&p.observable)?;
            check_dims(&[a.rows()])?;
            Problem::Measure(MeasureInput {
                observable: Observable::new(a, tol)?,
                rho: matrix_from_wire(&p.rho)?,
            })
        }
        Kind::Compose => {
            let is_stoch = payload.get("f").and_then(|f| f.get("matrix")).is_some();
            if is_stoch {
                let p: ComposeStoch = from_value(payload)?;
                Problem::Compose(ComposeInput::Stoch {
                    g: StochMap::from_rows(&p.g.matrix, tol)?,
                    f: StochMap::from_rows(&p.f.matrix, tol)?,
                })
            } else {
                let p: ComposeMaps = from_value(payload)?;
                Problem::Compose(ComposeInput::Maps {
                    g: p.g.to_map()?,
                    f: p.f.to_map()?,
                })
            }
        }
    })
}

// ---- results ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauWire {
    pub matrix: MatrixWire,
    pub unconstrained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationWire {
    pub condition: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateWire {
    pub reconstruction: f64,
    pub tau_min_eigenvalue: f64,
    pub trace: f64,
    pub violated: Option<ViolationWire>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationWire {
    pub cp: f64,
    pub unital: f64,
    pub state: f64,
    pub ae_identity: f64,
    pub passed: bool,
}

impl From<&VerificationReport> for VerificationWire {
    fn from(r: &VerificationReport) -> Self {
        VerificationWire {
            cp: r.cp,
            unital: r.unital,
            state: r.state,
            ae_identity: r.ae_identity,
            passed: r.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisintegrationWire {
    pub exists: bool,
    /// `tau[j][i]`; `null` where source block `j` does not occur in target block `i`.
    pub tau: Option<Vec<Vec<Option<TauWire>>>>,
    pub map: Option<BlockMapWire>,
    pub certificate: CertificateWire,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationWire>,
}

impl DisintegrationWire {
    pub fn new(r: &DisintegrationResult, verification: Option<&VerificationReport>) -> Self {
        let tau = r.tau.as_ref().map(|grid| {
            grid.iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            TauEntry::Absent => None,
                            TauEntry::Unconstrained(m) => Some(TauWire {
                                matrix: matrix_to_wire(m),
                                unconstrained: true,
                            }),
                            TauEntry::Determined(m) => Some(TauWire {
                                matrix: matrix_to_wire(m),
                                unconstrained: false,
                            }),
                        })
                        .collect()
                })
                .collect()
        });
        let c = &r.certificate;
        DisintegrationWire {
            exists: r.exists,
            tau,
            map: r.map.as_ref().map(BlockMapWire::from_map),
            certificate: CertificateWire {
                reconstruction: c.reconstruction,
                tau_min_eigenvalue: c.tau_min_eigenvalue,
                trace: c.trace,
                violated: c.violated.map(|(cond, residual)| ViolationWire {
                    condition: cond.name(),
                    residual,
                }),
            },
            verification: verification.map(VerificationWire::from),
        }
    }
}
