//! JSON scenario files.
//!
//! ```json
//! {"kind": "general",
//!  "coordinates": [{"atoms": [{"value": -1, "prob": 0.5}, {"value": 1, "prob": 0.5}]}],
//!  "functions": [[[-1, 1]]]}
//! {"kind": "rademacher", "zeta": [[1, 1], [-1, -1]]}
//! {"kind": "set_indexed", "space_size": 2, "coordinate_probs": [[0.5, 0.5]], "sets": [[1]]}
//! ```
//!
//! `functions[i][k]` lists `s_i^k` at each atom of coordinate `k`, in atom
//! order. Rademacher `coordinates` default to symmetric signs. Unknown keys
//! are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_rademacher, build_set_indexed, Atom, CoordinateDist, Scenario};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateSpec {
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioFile {
    General {
        coordinates: Vec<CoordinateSpec>,
        functions: Vec<Vec<Vec<f64>>>,
    },
    Rademacher {
        zeta: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coordinates: Option<Vec<CoordinateSpec>>,
    },
    SetIndexed {
        space_size: usize,
        coordinate_probs: Vec<Vec<f64>>,
        sets: Vec<Vec<usize>>,
    },
}

fn coordinate_laws(specs: Vec<CoordinateSpec>) -> Result<Vec<CoordinateDist>> {
    specs
        .into_iter()
        .enumerate()
        .map(|(k, c)| CoordinateDist::new(c.atoms).map_err(|e| Error::Scenario(format!("coordinates[{k}]: {e}"))))
        .collect()
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Builds the scenario and rejects any centering or range violation.
    pub fn into_scenario(self) -> Result<Scenario> {
        match self {
            ScenarioFile::General { coordinates, functions } => {
                Scenario::new_validated(coordinate_laws(coordinates)?, functions)
            }
            ScenarioFile::Rademacher { zeta, coordinates } => {
                let laws = coordinates.map(coordinate_laws).transpose()?;
                build_rademacher(&zeta, laws)
            }
            ScenarioFile::SetIndexed {
                space_size,
                coordinate_probs,
                sets,
            } => build_set_indexed(space_size, &coordinate_probs, &sets),
        }
    }

    /// The `general` encoding of an arbitrary scenario.
    pub fn general(s: &Scenario) -> Self {
        ScenarioFile::General {
            coordinates: s
                .coords()
                .iter()
                .map(|c| CoordinateSpec {
                    atoms: c.atoms().to_vec(),
                })
                .collect(),
            functions: (0..s.m())
                .map(|i| (0..s.n()).map(|k| s.values(i, k).to_vec()).collect())
                .collect(),
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    ScenarioFile::parse(text)?.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}
