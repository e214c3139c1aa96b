//! Built-in surface material table used when sampling room absorptions.
//!
//! The table lives in a versioned JSON data file so users can swap in their
//! own coefficients without touching code.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub absorption: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialTable {
    pub version: u32,
    #[serde(default)]
    pub comment: String,
    pub walls: Vec<Material>,
    pub floors: Vec<Material>,
    pub ceilings: Vec<Material>,
}

const BUILTIN: &str = include_str!("../data/materials.json");

impl MaterialTable {
    /// The table shipped with the crate: 13 wall, 7 floor, and 8 ceiling
    /// materials with broadband absorptions in [0.02, 0.9].
    pub fn builtin() -> Self {
        serde_json::from_str(BUILTIN).expect("builtin material table parses")
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let table: MaterialTable = serde_json::from_str(&text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for (group, list) in [
            ("walls", &self.walls),
            ("floors", &self.floors),
            ("ceilings", &self.ceilings),
        ] {
            if list.is_empty() {
                return Err(Error::InvalidConfig(format!("material group {group} is empty")));
            }
            for m in list {
                if !(m.absorption > 0.0 && m.absorption <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "material {} absorption {} outside (0, 1]",
                        m.name, m.absorption
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table_counts() {
        let t = MaterialTable::builtin();
        assert_eq!(t.walls.len(), 13);
        assert_eq!(t.floors.len(), 7);
        assert_eq!(t.ceilings.len(), 8);
        t.validate().unwrap();
    }

    #[test]
    fn builtin_table_spans_expected_range() {
        let t = MaterialTable::builtin();
        let all: Vec<f64> = t
            .walls
            .iter()
            .chain(&t.floors)
            .chain(&t.ceilings)
            .map(|m| m.absorption)
            .collect();
        let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = all.iter().cloned().fold(0.0f64, f64::max);
        assert!((min - 0.02).abs() < 1e-12);
        assert!((max - 0.9).abs() < 1e-12);
    }
}
