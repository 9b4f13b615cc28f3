//! The JSON report printed by every command. The top-level keys are the
//! same for all commands; `result.kind` names the payload variant.

use hoffman_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::format::CertificateFile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    /// SHA-256 of the input file bytes, or of the arguments for `bench`.
    pub input_digest: String,
    pub result: Payload,
    pub certificate: Option<CertificateFile>,
    pub timing_ms: f64,
}

/// An exact rational with a float annotation. Only `exact` is meant to be
/// parsed back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub approx: f64,
}

impl From<&Scalar> for ExactValue {
    fn from(s: &Scalar) -> Self {
        ExactValue { exact: s.to_string(), approx: s.to_f64() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedSet {
    pub set: Vec<usize>,
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityCount {
    pub size: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: usize,
    pub family_size: usize,
    pub expected: u64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    ErrorBound {
        has_error_bound: bool,
        sigma_sq: Option<ExactValue>,
        /// `sqrt(sigma_sq)` as a float.
        sigma: Option<f64>,
        checked_sets: usize,
        family_size: usize,
    },
    Stability {
        stable: bool,
        violating_set: Option<Vec<usize>>,
        lower_bound_sq: Option<ExactValue>,
        checked_sets: usize,
    },
    Hoffman {
        /// `finite`, `no_error_bound` or `infinite`.
        status: String,
        sigma_sq: Option<ExactValue>,
    },
    Enumerate {
        level: String,
        count: usize,
        sets: Vec<EnumeratedSet>,
        maximal: Vec<Vec<usize>>,
        cardinalities: Vec<CardinalityCount>,
    },
    VerifyCertificate {
        valid: bool,
        reason: Option<String>,
    },
    Perturb {
        output: String,
        epsilon: ExactValue,
    },
    Estimate {
        samples: usize,
        seed: u64,
        box_radius: f64,
        sigma_estimate: Option<f64>,
        note: Option<String>,
    },
    Bench {
        level: String,
        repeats: usize,
        rows: Vec<BenchRow>,
        counts_match: bool,
        /// Least-squares slopes of `ln t` against `ln m` over consecutive
        /// thirds of the range.
        log_log_slopes: Vec<f64>,
        superpolynomial: bool,
    },
}
