//! JSON shapes read and written by the command-line front end.
//!
//! State files come in two forms:
//!
//! ```json
//! {"basis":"bell","matrix":[[{"re":0.5,"im":0.0}, ...], ...]}
//! {"x":{"r":[0.7,0.1,0.1,0.1],"r14":{"re":0.0,"im":0.0},"r23":{"re":0.0,"im":0.0}}}
//! ```
//!
//! `basis` defaults to `"bell"`; `"computational"` is also accepted.

use serde::{Deserialize, Serialize};

use crate::bell::{BellDensityMatrix, Matrix4c, XState};
use crate::map::{StateInput, Trajectory};
use crate::measures::MaxEntangledVector;
use crate::{Complex, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for JsonComplex {
    fn from(z: Complex) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for Complex {
    fn from(z: JsonComplex) -> Self {
        Complex::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Bell,
    Computational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XStateJson {
    pub r: [f64; 4],
    pub r14: JsonComplex,
    pub r23: JsonComplex,
}

impl From<&XState> for XStateJson {
    fn from(s: &XState) -> Self {
        XStateJson {
            r: s.r(),
            r14: s.r14().into(),
            r23: s.r23().into(),
        }
    }
}

impl TryFrom<&XStateJson> for XState {
    type Error = Error;

    fn try_from(x: &XStateJson) -> Result<Self> {
        XState::new(x.r, x.r14.into(), x.r23.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Basis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<JsonComplex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<XStateJson>,
}

fn format_err(e: serde_json::Error) -> Error {
    let (line, column) = (e.line(), e.column());
    let msg = e.to_string();
    let msg = msg.strip_suffix(&format!(" at line {line} column {column}")).unwrap_or(&msg);
    Error::Format(format!("line {line} column {column}: {msg}"))
}

fn matrix_from_rows(rows: &[Vec<JsonComplex>]) -> Result<Matrix4c> {
    if rows.len() != 4 {
        return Err(Error::Format(format!("field `matrix`: expected 4 rows, found {}", rows.len())));
    }
    let mut m = Matrix4c::zeros();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 4 {
            return Err(Error::Format(format!(
                "field `matrix[{i}]`: expected 4 entries, found {}",
                row.len()
            )));
        }
        for (j, z) in row.iter().enumerate() {
            m[(i, j)] = (*z).into();
        }
    }
    Ok(m)
}

/// Parses and validates a state file.
pub fn parse_state(text: &str) -> Result<StateInput> {
    let raw: StateFile = serde_json::from_str(text).map_err(format_err)?;
    match (raw.matrix, raw.x) {
        (Some(rows), None) => {
            let m = matrix_from_rows(&rows)?;
            let rho = match raw.basis.unwrap_or(Basis::Bell) {
                Basis::Bell => BellDensityMatrix::new(m)?,
                Basis::Computational => BellDensityMatrix::from_computational(&m)?,
            };
            Ok(rho.into())
        }
        (None, Some(x)) => {
            if raw.basis == Some(Basis::Computational) {
                return Err(Error::Format("field `basis`: the `x` form is always in the Bell basis".into()));
            }
            Ok(StateInput::X(XState::try_from(&x)?))
        }
        (Some(_), Some(_)) => Err(Error::Format("fields `matrix` and `x` are mutually exclusive".into())),
        (None, None) => Err(Error::Format("missing field `matrix` or `x`".into())),
    }
}

/// Bell-basis matrix form of any state.
pub fn state_to_json(rho: &BellDensityMatrix) -> String {
    let m = rho.matrix();
    let rows = (0..4).map(|i| (0..4).map(|j| m[(i, j)].into()).collect()).collect();
    let f = StateFile {
        basis: Some(Basis::Bell),
        matrix: Some(rows),
        x: None,
    };
    serde_json::to_string(&f).expect("plain data")
}

pub fn x_state_to_json(s: &XState) -> String {
    let f = StateFile {
        basis: None,
        matrix: None,
        x: Some(s.into()),
    };
    serde_json::to_string(&f).expect("plain data")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub x: XStateJson,
    #[serde(rename = "N")]
    pub normalization: f64,
    pub p_success: f64,
    pub p_cumulative: f64,
}

pub fn trajectory_records(t: &Trajectory) -> Vec<TrajectoryRecord> {
    t.steps
        .iter()
        .map(|s| TrajectoryRecord {
            step: s.step,
            x: (&s.outcome.state).into(),
            normalization: s.outcome.normalization,
            p_success: s.outcome.success_probability,
            p_cumulative: s.cumulative_probability,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub concurrence: f64,
    pub bell_fidelities: [f64; 4],
    pub max_entangled_fidelity: f64,
    pub argmax: MaxEntangledVector,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{random_density, random_x_state, StateKind};
    use crate::map::iterate;

    #[test]
    fn parse_matrix_form() {
        let text = r#"{"basis":"bell","matrix":[
            [{"re":1.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0}],
            [{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0}],
            [{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0}],
            [{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0},{"re":0.0,"im":0.0}]]}"#;
        match parse_state(text).unwrap() {
            StateInput::X(s) => assert_eq!(s.r(), [1.0, 0.0, 0.0, 0.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_x_form() {
        let text = r#"{"x":{"r":[0.7,0.1,0.1,0.1],"r14":{"re":0.1,"im":0.0},"r23":{"re":0.0,"im":-0.05}}}"#;
        let StateInput::X(s) = parse_state(text).unwrap() else {
            panic!("expected X form")
        };
        assert_eq!(s.r23(), Complex::new(0.0, -0.05));
    }

    #[test]
    fn round_trip_is_exact() {
        for seed in 0..50 {
            let rho = random_density(seed, StateKind::General);
            let back = match parse_state(&state_to_json(&rho)).unwrap() {
                StateInput::General(m) => m,
                StateInput::X(x) => x.to_density(),
            };
            assert_eq!(back.matrix(), rho.matrix());
            let x = random_x_state(seed);
            let StateInput::X(y) = parse_state(&x_state_to_json(&x)).unwrap() else {
                panic!()
            };
            assert_eq!(x, y);
        }
    }

    #[test]
    fn errors_carry_context() {
        let e = parse_state("{\n\"x\":{\"r\":[1,0,0,0],\"r14\":{\"re\":0,\"im\":0},\"r23\":{\"re\":0,\"im\":0},\"q\":1}}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2") && msg.contains("`q`"), "{msg}");
        let e = parse_state(r#"{"matrix":[[{"re":1,"im":0}]]}"#).unwrap_err();
        assert!(e.to_string().contains("4 entries") || e.to_string().contains("4 rows"));
        assert!(matches!(
            parse_state(r#"{"x":{"r":[0.5,0.6,0,-0.1],"r14":{"re":0,"im":0},"r23":{"re":0,"im":0}}}"#),
            Err(Error::InvalidXState(_))
        ));
        assert!(matches!(parse_state("{}"), Err(Error::Format(_))));
    }

    #[test]
    fn trajectory_shape() {
        let s = XState::diagonal([0.7, 0.1, 0.1, 0.1]).unwrap();
        let t = iterate(s, 3, 0.0).unwrap();
        let v = serde_json::to_value(trajectory_records(&t)).unwrap();
        let first = &v[0];
        for key in ["step", "x", "N", "p_success", "p_cumulative"] {
            assert!(first.get(key).is_some(), "{key}");
        }
        assert_eq!(first["step"], 1);
    }
}
