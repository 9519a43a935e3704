//! Plain-text matrices and TOML penalty configs.
//!
//! Matrices are one row per line, entries separated by commas and/or whitespace,
//! `.` as decimal point, no header. Blank lines and lines starting with `#` are skipped.
//!
//! A penalty config looks like
//!
//! ```toml
//! kind = "group"            # "lasso" | "group" | "nuclear"
//! groups = [[0, 1], [2, 3, 4]]
//! weights = [1.4142, 1.7321]
//!
//! # nuclear only
//! op_kind = "mask"          # "identity" | "mask" | "matmul"
//! mask = [[0, 0], [1, 2]]
//! shape = [3, 4]
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{GroupSpec, NuclearOp, NuclearSpec, PenaltySpec};

pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {t:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {} has {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// A column, a single row, or a one-column matrix, read as a vector.
pub fn parse_vector(text: &str) -> Result<DVector<f64>> {
    let m = parse_matrix(text)?;
    if m.ncols() == 1 {
        Ok(m.column(0).into_owned())
    } else if m.nrows() == 1 {
        Ok(m.row(0).transpose())
    } else {
        Err(Error::Parse(format!("expected a vector, found a {}x{} matrix", m.nrows(), m.ncols())))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    parse_vector(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    pub kind: String,
    pub groups: Option<Vec<Vec<usize>>>,
    pub weights: Option<Vec<f64>>,
    pub op_kind: Option<String>,
    pub mask: Option<Vec<(usize, usize)>>,
    pub shape: Option<(usize, usize)>,
}

impl PenaltyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Builds the penalty. `design` supplies the matrix of a `matmul` operator;
    /// `response_shape` fills in a missing nuclear `shape`.
    pub fn to_spec(&self, design: Option<&DMatrix<f64>>, response_shape: (usize, usize)) -> Result<PenaltySpec> {
        match self.kind.to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltySpec::Lasso),
            "group" => {
                let groups = self.groups.clone().ok_or_else(|| Error::BadGroups("config has no groups".into()))?;
                let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; groups.len()]);
                Ok(PenaltySpec::Group(GroupSpec { groups, weights }))
            }
            "nuclear" => {
                let op_kind = self.op_kind.as_deref().unwrap_or("identity").to_ascii_lowercase();
                let op = match op_kind.as_str() {
                    "identity" => NuclearOp::Identity,
                    "mask" => NuclearOp::Mask(self.mask.clone().ok_or(Error::InvalidInput {
                        field: "mask",
                        detail: "op_kind = \"mask\" needs a mask".into(),
                    })?),
                    "matmul" => NuclearOp::MatMul(
                        design
                            .ok_or(Error::InvalidInput {
                                field: "X",
                                detail: "op_kind = \"matmul\" needs a design matrix".into(),
                            })?
                            .clone(),
                    ),
                    other => {
                        return Err(Error::InvalidInput {
                            field: "op_kind",
                            detail: format!("unknown operator {other:?}"),
                        })
                    }
                };
                let shape = match (&op, self.shape) {
                    (_, Some(s)) => s,
                    (NuclearOp::MatMul(x), None) => (x.ncols(), response_shape.1),
                    (_, None) => response_shape,
                };
                Ok(PenaltySpec::Nuclear(NuclearSpec { op, shape }))
            }
            other => Err(Error::InvalidInput {
                field: "kind",
                detail: format!("unknown penalty {other:?}"),
            }),
        }
    }
}
