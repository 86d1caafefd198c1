use std::path::Path;

use cholspace::{CholeskyPoint, LowerTri, Matrix, PositiveDiag, SpdPoint};
use serde::Deserialize;

use crate::CliError;

/// Two SPD endpoints, row-major.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairInput {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
}

/// Operands for `eval`. Which fields are needed depends on the operation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalInput {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(rename = "V")]
    pub v: Option<Vec<Vec<f64>>>,
    #[serde(rename = "W")]
    pub w: Option<Vec<Vec<f64>>>,
    pub t: Option<f64>,
    pub points: Option<Vec<Vec<Vec<f64>>>>,
    pub weights: Option<Vec<f64>>,
    /// Diagonal weight of the Bures-Wasserstein family.
    #[serde(rename = "M")]
    pub m: Option<Vec<f64>>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn matrix(name: &str, n: usize, rows: &[Vec<f64>]) -> Result<Matrix, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Parse(format!("{name} must be a {n}x{n} array")));
    }
    Ok(Matrix::from_rows(rows)?)
}

pub fn required<'a, T>(name: &str, field: &'a Option<T>) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| CliError::Parse(format!("input field `{name}` is required for this operation")))
}

impl PairInput {
    pub fn points(&self) -> Result<(SpdPoint, SpdPoint), CliError> {
        let p = SpdPoint::new(matrix("P", self.n, &self.p)?)?;
        let q = SpdPoint::new(matrix("Q", self.n, &self.q)?)?;
        Ok((p, q))
    }
}

impl EvalInput {
    pub fn mat(&self, name: &str, field: &Option<Vec<Vec<f64>>>) -> Result<Matrix, CliError> {
        matrix(name, self.n, required(name, field)?)
    }

    pub fn spd(&self, name: &str, field: &Option<Vec<Vec<f64>>>) -> Result<SpdPoint, CliError> {
        Ok(SpdPoint::new(self.mat(name, field)?)?)
    }

    pub fn chol(&self, name: &str, field: &Option<Vec<Vec<f64>>>) -> Result<CholeskyPoint, CliError> {
        Ok(CholeskyPoint::new(LowerTri::try_from_matrix(self.mat(name, field)?)?)?)
    }

    pub fn tangent(&self, name: &str, field: &Option<Vec<Vec<f64>>>) -> Result<LowerTri, CliError> {
        Ok(LowerTri::try_from_matrix(self.mat(name, field)?)?)
    }

    pub fn t(&self) -> Result<f64, CliError> {
        required("t", &self.t).copied()
    }

    pub fn diag_weights(&self) -> Result<Option<PositiveDiag>, CliError> {
        match &self.m {
            None => Ok(None),
            Some(m) if m.len() != self.n => Err(CliError::Parse(format!("M must have {} entries", self.n))),
            Some(m) => Ok(Some(PositiveDiag::new(m.clone())?)),
        }
    }

    pub fn point_list(&self) -> Result<Vec<Matrix>, CliError> {
        required("points", &self.points)?
            .iter()
            .enumerate()
            .map(|(i, rows)| matrix(&format!("points[{i}]"), self.n, rows))
            .collect()
    }

    pub fn weight_list(&self, count: usize) -> Result<Vec<f64>, CliError> {
        match &self.weights {
            Some(w) => Ok(w.clone()),
            None => Ok(vec![1.0 / count as f64; count]),
        }
    }
}
