//! JSON ensemble documents:
//!
//! ```json
//! {"dA": 2, "dB": 2, "eta0": 0.5, "rho0": M, "rho1": M}
//! ```
//!
//! where `M` is a row-major nested array of `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::ensemble::TwoStateEnsemble;
use crate::error::{Error, Result};
use crate::operator::{c, BipartiteOperator, CMatrix};

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnsembleDocument {
    #[serde(rename = "dA")]
    pub d_a: usize,
    #[serde(rename = "dB")]
    pub d_b: usize,
    pub eta0: f64,
    pub rho0: MatrixDoc,
    pub rho1: MatrixDoc,
}

fn matrix_from_doc(doc: &MatrixDoc, side: usize, label: &str) -> Result<CMatrix> {
    if doc.len() != side || doc.iter().any(|row| row.len() != side) {
        return Err(Error::Parse(format!("{label} must be a {side}x{side} matrix")));
    }
    let mut m = CMatrix::zeros(side, side);
    for (i, row) in doc.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("{label}[{i}][{j}] is not finite")));
            }
            m[(i, j)] = c(re, im);
        }
    }
    Ok(m)
}

fn matrix_to_doc(m: &CMatrix) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl EnsembleDocument {
    pub fn from_ensemble(e: &TwoStateEnsemble) -> Self {
        Self {
            d_a: e.d_a(),
            d_b: e.d_b(),
            eta0: e.eta0(),
            rho0: matrix_to_doc(e.rho0().grouped().matrix()),
            rho1: matrix_to_doc(e.rho1().grouped().matrix()),
        }
    }

    pub fn to_ensemble(&self) -> Result<TwoStateEnsemble> {
        if self.d_a == 0 || self.d_b == 0 {
            return Err(Error::Parse("dA and dB must be positive".into()));
        }
        if !self.eta0.is_finite() {
            return Err(Error::Parse("eta0 is not finite".into()));
        }
        let side = self.d_a * self.d_b;
        let rho0 = BipartiteOperator::new(self.d_a, self.d_b, matrix_from_doc(&self.rho0, side, "rho0")?)?;
        let rho1 = BipartiteOperator::new(self.d_a, self.d_b, matrix_from_doc(&self.rho1, side, "rho1")?)?;
        TwoStateEnsemble::new(self.eta0, rho0, rho1)
    }
}

pub fn parse_ensemble(json: &str) -> Result<TwoStateEnsemble> {
    let doc: EnsembleDocument =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    doc.to_ensemble()
}

/// Serializes an ensemble; multi-copy operators are written in grouped form.
pub fn ensemble_to_json(e: &TwoStateEnsemble) -> String {
    serde_json::to_string_pretty(&EnsembleDocument::from_ensemble(e))
        .expect("ensemble documents always serialize")
}
