//! JSON file formats: inequality systems and certificates. Every exact
//! number travels as a rational string such as `"-2/7"`.

use hoffman_core::{Certificate, IndexSet, InequalitySystem, Matrix, Scalar, Vector};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// `{"A": [["1","1"], ...], "b": ["1", ...]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    pub b: Vec<String>,
}

impl SystemFile {
    pub fn from_system(sys: &InequalitySystem) -> Self {
        SystemFile {
            a: sys
                .a()
                .rows()
                .iter()
                .map(|r| r.iter().map(Scalar::to_string).collect())
                .collect(),
            b: sys.b().iter().map(Scalar::to_string).collect(),
        }
    }

    pub fn to_system(&self) -> Result<InequalitySystem, CliError> {
        if self.a.is_empty() {
            return Err(CliError::Input("A has no rows".into()));
        }
        let n = self.a[0].len();
        if n == 0 {
            return Err(CliError::Input("A has no columns".into()));
        }
        if let Some(i) = self.a.iter().position(|r| r.len() != n) {
            return Err(CliError::Input(format!(
                "A is not rectangular: row {} has {} entries, expected {n}",
                i + 1,
                self.a[i].len()
            )));
        }
        if self.b.len() != self.a.len() {
            return Err(CliError::Input(format!(
                "b has {} entries but A has {} rows",
                self.b.len(),
                self.a.len()
            )));
        }
        let rows = self
            .a
            .iter()
            .map(|r| Vector::parse(r))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Input(e.to_string()))?;
        let b = Vector::parse(&self.b).map_err(|e| CliError::Input(e.to_string()))?;
        let a = Matrix::from_rows(rows).map_err(|e| CliError::Input(e.to_string()))?;
        InequalitySystem::new(a, b).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<InequalitySystem, CliError> {
        let file: SystemFile = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("malformed system file: {e}")))?;
        file.to_system()
    }
}

/// Certificate with a 1-based active set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub point: Vec<String>,
    pub active: Vec<usize>,
    pub hull_multipliers: Vec<String>,
}

impl CertificateFile {
    pub fn from_certificate(cert: &Certificate) -> Self {
        CertificateFile {
            point: cert.point.iter().map(Scalar::to_string).collect(),
            active: cert.active.one_based(),
            hull_multipliers: cert.hull_multipliers.iter().map(Scalar::to_string).collect(),
        }
    }

    /// Unparsable numbers are input errors. An active set that is empty,
    /// unsorted, repeated or out of range cannot describe a certificate for
    /// this system, which yields `None`.
    pub fn to_certificate(&self, m: usize) -> Result<Option<Certificate>, CliError> {
        let bad = |e: hoffman_core::CoreError| CliError::Input(format!("certificate: {e}"));
        let point = Vector::parse(&self.point).map_err(bad)?;
        let hull_multipliers = Vector::parse(&self.hull_multipliers).map_err(bad)?;
        if self.active.windows(2).any(|w| w[0] >= w[1]) {
            return Ok(None);
        }
        let Ok(active) = IndexSet::from_one_based(&self.active, m) else {
            return Ok(None);
        };
        Ok(Some(Certificate { point, active, hull_multipliers }))
    }
}

/// Parses `"1,-2/3,0.5"` into an exact vector.
pub fn parse_csv_vector(text: &str) -> Result<Vector, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    Vector::parse(&parts).map_err(|e| CliError::Input(e.to_string()))
}
