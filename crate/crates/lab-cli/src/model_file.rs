//! JSON model files.
//!
//! ```json
//! {"kind": "two-state", "mu": 0.0, "delta": 1.0, "x": 0.5, "eps": 0.25}
//! {"kind": "n-state", "energies": [-1, 1], "v_real": [0, 1, 1, 0], "v_imag": [0, 0, 0, 0],
//!  "x": 0.5, "eps": 0.1, "ground_index": 0}
//! ```

use std::path::Path;

use adiabatic_core::nstate::NStateModel;
use adiabatic_core::numkit::HermitianMatrix;
use adiabatic_core::twostate::TwoStateModel;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelFile {
    TwoState(TwoStateSpec),
    NState(NStateSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStateSpec {
    #[serde(default)]
    pub mu: f64,
    pub delta: f64,
    pub x: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NStateSpec {
    pub energies: Vec<f64>,
    /// Row-major real part of `V`.
    pub v_real: Vec<f64>,
    /// Row-major imaginary part of `V`; all zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_imag: Option<Vec<f64>>,
    pub x: f64,
    pub eps: f64,
    #[serde(default)]
    pub ground_index: usize,
}

impl TwoStateSpec {
    pub fn build(&self) -> Result<TwoStateModel, CliError> {
        Ok(TwoStateModel::new(self.mu, self.delta, self.x, self.eps)?)
    }
}

impl NStateSpec {
    pub fn build(&self) -> Result<NStateModel, CliError> {
        let n = self.energies.len();
        let bad = |field: &str, reason: String| CliError::Model { source_name: field.into(), message: reason };
        if self.v_real.len() != n * n {
            return Err(bad("v_real", format!("expected {} entries ({n}x{n} row-major), found {}", n * n, self.v_real.len())));
        }
        let zeros;
        let im = match &self.v_imag {
            Some(im) if im.len() != n * n => {
                return Err(bad("v_imag", format!("expected {} entries ({n}x{n} row-major), found {}", n * n, im.len())));
            }
            Some(im) => im.as_slice(),
            None => {
                zeros = vec![0.0; n * n];
                zeros.as_slice()
            }
        };
        let v = HermitianMatrix::from_parts(n, &self.v_real, im)?;
        Ok(NStateModel::new(self.energies.clone(), v, self.x, self.eps, self.ground_index)?)
    }

    pub fn from_model(m: &NStateModel) -> Self {
        NStateSpec {
            energies: m.energies().to_vec(),
            v_real: m.v().entries().iter().map(|z| z.re).collect(),
            v_imag: Some(m.v().entries().iter().map(|z| z.im).collect()),
            x: m.x(),
            eps: m.eps(),
            ground_index: m.ground_index(),
        }
    }
}

pub fn parse(text: &str, source_name: &str) -> Result<ModelFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Model { source_name: source_name.into(), message: e.to_string() })
}

pub fn load(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    parse(&text, &path.display().to_string())
}

pub fn to_text(m: &ModelFile) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("model serializes");
    s.push('\n');
    s
}
