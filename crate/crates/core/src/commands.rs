//! Command implementations behind the `ncdisint` binary.
//!
//! Each command takes the raw bytes of a problem file and returns the exit
//! code, the JSON document for stdout and a one-line report for stderr.
//! Exit codes: 0 analysis completed (whatever the verdict), 2 unreadable or
//! invalid input, 3 ill-posed problem (the given states are not related by
//! the hom or the function).

use serde::Serialize;

use crate::algebra::{Algebra, State};
use crate::bratteli::BratteliHom;
use crate::classical::{classical_disintegration, embedded_problem, pushforward, stoch_compose};
use crate::disintegration::{
    disintegrate, disintegrate_matrix_case, disintegrate_matrix_unitary_case, verify_disintegration,
    DisintegrationProblem, DisintegrationResult,
};
use crate::error::Error;
use crate::json::{
    matrix_to_wire, parse_problem_bytes, BlockMapWire, ClassicalInput, ComposeInput, DisintegrateInput,
    DisintegrationWire, Kind, MatrixWire, MeasureInput, Problem, StochMapWire, WireError,
};
use crate::maps::{ae_report, compose, hom_residuals};
use crate::matrix::{CMatrix, Tolerance};
use crate::measurement::{luders, measurement_disintegration, measurement_problem, outcome_distribution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ILL_POSED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckMap,
    AeEqual,
    Disintegrate,
    Classical,
    Measure,
    Compose,
}

impl Command {
    fn accepts(&self, kind: Kind) -> bool {
        match self {
            Command::CheckMap => kind == Kind::CheckMap,
            Command::AeEqual => kind == Kind::AeEqual,
            Command::Disintegrate => matches!(kind, Kind::Disintegrate | Kind::Classical | Kind::Measure),
            Command::Classical => kind == Kind::Classical,
            Command::Measure => kind == Kind::Measure,
            Command::Compose => kind == Kind::Compose,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::CheckMap => "check-map",
            Command::AeEqual => "ae-equal",
            Command::Disintegrate => "disintegrate",
            Command::Classical => "classical",
            Command::Measure => "measure",
            Command::Compose => "compose",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::StateNotPreserved(_) | Error::NotPushforward(_) => EXIT_ILL_POSED,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<WireError> for Failure {
    fn from(e: WireError) -> Self {
        match e {
            WireError::Invalid(inner) => inner.into(),
            other => Failure {
                code: EXIT_INPUT,
                message: other.to_string(),
            },
        }
    }
}

/// Tolerances for a user-supplied `eps`: all three thresholds are scaled by
/// `eps / 1e-9`, so `eps` becomes the equality threshold.
pub fn tolerance_for(eps: Option<f64>) -> Result<Tolerance, Error> {
    let base = Tolerance::default();
    match eps {
        None => Ok(base),
        Some(e) if e.is_finite() && e > 0.0 => base.scaled(e / base.eps_eq),
        Some(e) => Err(Error::InvalidTolerance(format!("{e} is not a positive number"))),
    }
}

pub fn run(command: Command, input: &[u8], tol: &Tolerance) -> Output {
    match dispatch(command, input, tol) {
        Ok((json, report)) => Output {
            code: EXIT_OK,
            stdout: json,
            stderr: report,
        },
        Err(f) => Output {
            code: f.code,
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn dispatch(command: Command, input: &[u8], tol: &Tolerance) -> Result<(String, String), Failure> {
    let problem = parse_problem_bytes(input, tol)?;
    if !command.accepts(problem.kind()) {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!(
                "`{}` cannot process a problem file of kind \"{}\"",
                command.name(),
                problem.kind().name()
            ),
        });
    }
    match (command, problem) {
        (_, Problem::CheckMap(map)) => check_map(&map, tol),
        (_, Problem::AeEqual { f, g, state }) => ae_equal(&f, &g, &state, tol),
        (_, Problem::Compose(c)) => compose_cmd(c),
        (Command::Classical, Problem::Classical(c)) => classical_cmd(&c, tol),
        (Command::Measure, Problem::Measure(m)) => measure_cmd(&m, tol),
        (_, Problem::Disintegrate(d)) => emit_disintegration(disintegrate_input(d, tol)?),
        (_, Problem::Classical(c)) => emit_disintegration(disintegrate_classical(&c, tol)?),
        (_, Problem::Measure(m)) => emit_disintegration(disintegrate_measure(&m, tol)?),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result types serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CheckMapResiduals {
    cp: f64,
    unital: f64,
    hom: f64,
}

#[derive(Serialize)]
struct CheckMapOut {
    cp: bool,
    unital: bool,
    hom: bool,
    residuals: CheckMapResiduals,
}

fn check_map(map: &crate::maps::BlockMap, tol: &Tolerance) -> Result<(String, String), Failure> {
    let residuals = CheckMapResiduals {
        cp: map.cp_residual(),
        unital: map.unital_residual(),
        hom: hom_residuals(map).max(),
    };
    let bound = tol.residual();
    let out = CheckMapOut {
        cp: residuals.cp <= bound,
        unital: residuals.unital <= bound,
        hom: residuals.hom <= bound,
        residuals,
    };
    let report = format!("cp: {}, unital: {}, hom: {}\n", out.cp, out.unital, out.hom);
    Ok((to_json(&out), report))
}

#[derive(Serialize)]
struct Witness {
    block: usize,
    row: usize,
    col: usize,
    residual: f64,
}

#[derive(Serialize)]
struct AeEqualOut {
    ae_equal: bool,
    equal: bool,
    max_residual: f64,
    max_difference: f64,
    witness: Option<Witness>,
}

fn ae_equal(
    f: &crate::maps::BlockMap,
    g: &crate::maps::BlockMap,
    state: &State,
    tol: &Tolerance,
) -> Result<(String, String), Failure> {
    let rep = ae_report(f, g, state, tol)?;
    let out = AeEqualOut {
        ae_equal: rep.witness.is_none(),
        equal: f.equals(g, tol),
        max_residual: rep.max_residual,
        max_difference: f.max_abs_diff(g),
        witness: rep.witness.map(|(block, row, col, residual)| Witness {
            block,
            row,
            col,
            residual,
        }),
    };
    let report = format!("ae_equal: {}, equal: {}\n", out.ae_equal, out.equal);
    Ok((to_json(&out), report))
}

#[derive(Serialize)]
#[serde(untagged)]
enum ComposeOut {
    Map { map: BlockMapWire },
    Stoch(StochMapWire),
}

fn compose_cmd(c: ComposeInput) -> Result<(String, String), Failure> {
    let out = match c {
        ComposeInput::Maps { g, f } => ComposeOut::Map {
            map: BlockMapWire::from_map(&compose(&g, &f)?),
        },
        ComposeInput::Stoch { g, f } => ComposeOut::Stoch(StochMapWire::from_stoch(&stoch_compose(&g, &f)?)),
    };
    Ok((to_json(&out), "composed\n".into()))
}

/// A solved problem together with what is needed to verify it.
struct Solved {
    result: DisintegrationResult,
    problem: Option<DisintegrationProblem>,
}

fn emit_disintegration(s: Solved) -> Result<(String, String), Failure> {
    let verification = match (&s.result.map, &s.problem) {
        (Some(map), Some(problem)) => Some(verify_disintegration(problem, map, &Tolerance::default())?),
        _ => None,
    };
    let wire = DisintegrationWire::new(&s.result, verification.as_ref());
    let report = match s.result.certificate.violated {
        None => "disintegration exists\n".to_string(),
        Some((cond, r)) => format!("no disintegration: {} fails (residual {r:e})\n", cond.name()),
    };
    Ok((to_json(&wire), report))
}

fn disintegrate_input(d: DisintegrateInput, tol: &Tolerance) -> Result<Solved, Failure> {
    match d {
        DisintegrateInput::General { hom, omega, xi } => {
            let problem = match xi {
                Some(xi) => DisintegrationProblem::new(hom, omega, xi, tol)?,
                None => DisintegrationProblem::from_hom(hom, omega, tol)?,
            };
            Ok(Solved {
                result: disintegrate(&problem, tol),
                problem: Some(problem),
            })
        }
        DisintegrateInput::Matrix { rho, sigma, p, unitary } => {
            if p == 0 || rho.rows() % p != 0 {
                return Err(Error::BadBlockStructure(format!("p = {p} does not divide {}", rho.rows())).into());
            }
            let n = rho.rows() / p;
            let sigma = match sigma {
                Some(s) => s,
                None => rho.partial_trace_left(p, n)?,
            };
            let result = match &unitary {
                Some(u) => disintegrate_matrix_unitary_case(&rho, &sigma, p, u, tol)?,
                None => disintegrate_matrix_case(&rho, &sigma, p, tol)?,
            };
            let problem = if result.exists {
                let u = unitary.unwrap_or_else(|| CMatrix::identity(rho.rows()));
                let hom = BratteliHom::new(Algebra::matrix(n)?, Algebra::matrix(p * n)?, vec![vec![p]], vec![u], tol)?;
                Some(DisintegrationProblem::from_hom(hom, State::from_matrix(rho, tol)?, tol)?)
            } else {
                None
            };
            Ok(Solved { result, problem })
        }
    }
}

fn disintegrate_classical(c: &ClassicalInput, tol: &Tolerance) -> Result<Solved, Failure> {
    if let Some(q) = &c.q {
        classical_disintegration(&c.function, &c.p, q, tol)?;
    }
    let problem = embedded_problem(&c.function, &c.p, c.codomain, tol)?;
    Ok(Solved {
        result: disintegrate(&problem, tol),
        problem: Some(problem),
    })
}

fn disintegrate_measure(m: &MeasureInput, tol: &Tolerance) -> Result<Solved, Failure> {
    let result = measurement_disintegration(&m.observable, &m.rho, tol)?;
    let problem = measurement_problem(&m.observable, &m.rho, tol)?;
    Ok(Solved {
        result,
        problem: Some(problem),
    })
}

#[derive(Serialize)]
struct ClassicalOut {
    q: Vec<f64>,
    /// 1-based points of `Y` with zero probability.
    null: Vec<usize>,
    disintegration: StochMapWire,
}

fn classical_cmd(c: &ClassicalInput, tol: &Tolerance) -> Result<(String, String), Failure> {
    let q = match &c.q {
        Some(q) => q.clone(),
        None => pushforward(&c.function, &c.p, c.codomain)?,
    };
    let r = classical_disintegration(&c.function, &c.p, &q, tol)?;
    let out = ClassicalOut {
        null: q.null_set(tol).into_iter().map(|y| y + 1).collect(),
        q: q.weights().to_vec(),
        disintegration: StochMapWire::from_stoch(&r),
    };
    Ok((to_json(&out), "classical disintegration computed\n".into()))
}

#[derive(Serialize)]
struct MeasureOut {
    spectrum: Vec<f64>,
    ranks: Vec<usize>,
    q: Vec<f64>,
    luders: MatrixWire,
    result: DisintegrationWire,
}

fn measure_cmd(m: &MeasureInput, tol: &Tolerance) -> Result<(String, String), Failure> {
    let q = outcome_distribution(&m.observable, &m.rho, tol)?;
    let solved = disintegrate_measure(m, tol)?;
    let verification = match &solved.result.map {
        Some(map) => Some(verify_disintegration(
            solved.problem.as_ref().expect("measurement problem"),
            map,
            &Tolerance::default(),
        )?),
        None => None,
    };
    let out = MeasureOut {
        spectrum: m.observable.spectrum().to_vec(),
        ranks: m.observable.ranks().to_vec(),
        q: q.weights().to_vec(),
        luders: matrix_to_wire(&luders(&m.observable, &m.rho)),
        result: DisintegrationWire::new(&solved.result, verification.as_ref()),
    };
    let report = if solved.result.exists {
        "state equals its Lüders projection; disintegration exists\n"
    } else {
        "state differs from its Lüders projection; no disintegration\n"
    };
    Ok((to_json(&out), report.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(cmd: Command, text: &str) -> Output {
        run(cmd, text.as_bytes(), &Tolerance::default())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_str(Command::CheckMap, "not json").code, EXIT_INPUT);
        let wrong_sigma = r#"{"version":"1","kind":"disintegrate","payload":{
            "rho":[[0.1,0,0,0],[0,0.3,0,0],[0,0,0.15,0],[0,0,0,0.45]],
            "sigma":[[0.5,0],[0,0.5]],"p":2}}"#;
        assert_eq!(run_str(Command::Disintegrate, wrong_sigma).code, EXIT_ILL_POSED);
        let kind_mismatch = r#"{"version":"1","kind":"classical","payload":{"function":{"map":[1]},"p":{"weights":[1]}}}"#;
        assert_eq!(run_str(Command::CheckMap, kind_mismatch).code, EXIT_INPUT);
        assert_eq!(run_str(Command::Disintegrate, kind_mismatch).code, EXIT_OK);
        let bad_q = r#"{"version":"1","kind":"classical","payload":{"function":{"map":[1,2]},
            "p":{"weights":[0.5,0.5]},"q":{"weights":[0.2,0.8]}}}"#;
        assert_eq!(run_str(Command::Classical, bad_q).code, EXIT_ILL_POSED);
    }

    #[test]
    fn tolerance_flag() {
        let t = tolerance_for(Some(1e-7)).unwrap();
        assert!((t.eps_eq - 1e-7).abs() < 1e-20 && (t.eps_rank - 1e-6).abs() < 1e-19);
        assert!(tolerance_for(Some(-1.0)).is_err());
        assert!(tolerance_for(Some(1.0)).is_err());
    }

    #[test]
    fn matrix_case_reports_tau() {
        let text = r#"{"version":"1","kind":"disintegrate","payload":{
            "rho":[[0.1,0,0,0],[0,0.3,0,0],[0,0,0.15,0],[0,0,0,0.45]],"p":2}}"#;
        let out = run_str(Command::Disintegrate, text);
        assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["exists"], true);
        let tau = &v["tau"][0][0]["matrix"];
        assert!((tau[0][0][0].as_f64().unwrap() - 0.4).abs() < 1e-12);
        assert!((tau[1][1][0].as_f64().unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(v["verification"]["passed"], true);
    }
}
