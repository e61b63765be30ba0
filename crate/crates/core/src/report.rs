//! Solver reports and errors shared by all three solution methods.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::Cut;
use crate::lp::LpError;
use crate::model::{parse_json, read_file, write_file, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Benders,
    Subgradient,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Direct, Method::Benders, Method::Subgradient];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Benders => "benders",
            Method::Subgradient => "subgradient",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Method::Direct),
            "benders" => Ok(Method::Benders),
            "subgradient" => Ok(Method::Subgradient),
            other => Err(format!(
                "unknown method `{other}` (expected direct, benders or subgradient)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    GapClosed,
    IterLimit,
    TimeLimit,
    Infeasible,
}

/// One master solve of a decomposition method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    #[serde(with = "float")]
    pub lower_bound: f64,
    /// Absent on iterations that only produced feasibility cuts.
    pub upper_bound: Option<f64>,
    #[serde(with = "float")]
    pub best_upper_bound: f64,
    pub feasibility_cuts: usize,
    pub optimality_cuts: usize,
    pub master_time_s: f64,
    pub sub_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    /// Best upper bound; for `direct` the monolith optimum.
    #[serde(with = "float")]
    pub objective: f64,
    #[serde(with = "float")]
    pub lower_bound: f64,
    pub first_stage: Vec<f64>,
    /// `Q_k` at `first_stage`, empty when unavailable.
    pub recourse: Vec<f64>,
    pub iterations: usize,
    pub feasibility_cuts: usize,
    pub optimality_cuts: usize,
    pub wall_time_s: f64,
    pub master_time_s: f64,
    pub sub_time_s: f64,
    pub termination: Termination,
    #[serde(with = "float")]
    pub final_gap: f64,
    pub epsilon: f64,
    pub trace: Vec<IterationRecord>,
    pub cut_log: Vec<Cut>,
}

impl SolveReport {
    pub(crate) fn empty(method: Method, n1: usize, epsilon: f64) -> Self {
        Self {
            method,
            objective: f64::INFINITY,
            lower_bound: f64::NEG_INFINITY,
            first_stage: vec![0.0; n1],
            recourse: Vec::new(),
            iterations: 0,
            feasibility_cuts: 0,
            optimality_cuts: 0,
            wall_time_s: 0.0,
            master_time_s: 0.0,
            sub_time_s: 0.0,
            termination: Termination::Infeasible,
            final_gap: f64::INFINITY,
            epsilon,
            trace: Vec::new(),
            cut_log: Vec::new(),
        }
    }

    pub fn master_pct(&self) -> f64 {
        pct(self.master_time_s, self.wall_time_s)
    }

    pub fn sub_pct(&self) -> f64 {
        pct(self.sub_time_s, self.wall_time_s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        parse_json(text, Path::new("<string>"))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let mut text = self.to_json();
        text.push('\n');
        write_file(path.as_ref(), &text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        parse_json(&read_file(path)?, path)
    }
}

fn pct(part: f64, whole: f64) -> f64 {
    if whole > 0.0 {
        (100.0 * part / whole).min(100.0)
    } else {
        0.0
    }
}

/// `(UB - LB) / max(|UB|, 1e-9)`, or the absolute difference when `|UB|` is
/// below `1e-9`.
pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if !upper.is_finite() || !lower.is_finite() {
        return f64::INFINITY;
    }
    let diff = (upper - lower).max(0.0);
    if upper.abs() < 1e-9 {
        diff
    } else {
        diff / upper.abs()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("LP kernel failure: {0}")]
    Lp(#[from] LpError),
    #[error("problem is infeasible")]
    Infeasible(Box<SolveReport>),
    #[error("problem is unbounded")]
    Unbounded,
    #[error("iteration limit reached with gap {:.3e}", .0.final_gap)]
    IterationLimit(Box<SolveReport>),
    #[error("time limit reached with gap {:.3e}", .0.final_gap)]
    TimeLimit(Box<SolveReport>),
    #[error("no new cut at gap {:.3e}; decomposition stalled", .0.final_gap)]
    StalledGap(Box<SolveReport>),
    #[error("theta floor {floor} exceeds the observed recourse aggregate {observed}")]
    InvalidThetaFloor { floor: f64, observed: f64 },
    #[error("negative recourse costs present; a valid theta floor must be supplied")]
    MissingThetaFloor,
}

impl SolveError {
    /// The partial report carried by limit and stall errors.
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            SolveError::Infeasible(r)
            | SolveError::IterationLimit(r)
            | SolveError::TimeLimit(r)
            | SolveError::StalledGap(r) => Some(r),
            _ => None,
        }
    }
}

/// JSON has no infinities; non-finite values are written as strings.
pub(crate) mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid number `{other}`"))),
            },
        }
    }
}
