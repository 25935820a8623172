//! Structured model-definition documents.
//!
//! ```json
//! {
//!   "name": "chain",
//!   "dimension": 1,
//!   "rank": 1,
//!   "parameters": 1,
//!   "entries": [
//!     { "n": [0],  "matrix": [[0,0],[1,0],[1,0],[0,0]] },
//!     { "n": [1],  "matrix": [[0,0],[1,0],[0,0],[0,0]], "coeff": "q1" },
//!     { "n": [-1], "matrix": [[0,0],[0,0],[1,0],[0,0]], "coeff": "q1" }
//!   ]
//! }
//! ```
//!
//! Matrices are row-major lists of `[re, im]` pairs. A model may also be
//! given just by preset name (`"uniaxial"`, `"nn-graphene"`).

use serde::{Deserialize, Serialize};

use super::{preset, Expr, HoppingModel, HoppingTerm};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Preset(String),
    Document(ModelDocument),
}

impl ModelSpec {
    pub fn build(&self) -> Result<HoppingModel> {
        match self {
            ModelSpec::Preset(name) => preset(name),
            ModelSpec::Document(doc) => doc.build(),
        }
    }
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Preset("uniaxial".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default = "default_name")]
    pub name: String,
    pub dimension: usize,
    pub rank: usize,
    #[serde(default)]
    pub parameters: usize,
    pub entries: Vec<TermDocument>,
}

fn default_name() -> String {
    "custom".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub n: Vec<i64>,
    pub matrix: Vec<[f64; 2]>,
    #[serde(default = "unit_coeff")]
    pub coeff: Expr,
}

fn unit_coeff() -> Expr {
    Expr::Const(1.0)
}

impl ModelDocument {
    pub fn build(&self) -> Result<HoppingModel> {
        let size = 1usize
            .checked_shl(self.rank as u32)
            .filter(|_| self.rank >= 1 && self.rank <= 8)
            .ok_or_else(|| Error::invalid(format!("unsupported rank {}", self.rank)))?;
        let terms = self
            .entries
            .iter()
            .map(|e| {
                if e.matrix.len() != size * size {
                    return Err(Error::invalid(format!(
                        "entry n = {:?}: expected {} matrix elements, got {}",
                        e.n,
                        size * size,
                        e.matrix.len()
                    )));
                }
                let data: Vec<C64> = e.matrix.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                Ok(HoppingTerm {
                    displacement: e.n.clone(),
                    coeff: e.coeff.clone(),
                    matrix: CMatrix::from_row_slice(size, size, &data),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        HoppingModel::new(self.name.clone(), self.dimension, self.rank, self.parameters, terms)
    }

    /// Serializes an existing model.
    pub fn from_model(model: &HoppingModel) -> Self {
        ModelDocument {
            name: model.name().to_string(),
            dimension: model.dimension(),
            rank: model.rank(),
            parameters: model.parameters(),
            entries: model
                .terms()
                .iter()
                .map(|t| TermDocument {
                    n: t.displacement.clone(),
                    // nalgebra storage is column-major; documents are row-major
                    matrix: t.matrix.transpose().iter().map(|z| [z.re, z.im]).collect(),
                    coeff: t.coeff.clone(),
                })
                .collect(),
        }
    }
}
