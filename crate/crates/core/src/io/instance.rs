use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infrastructure::Station;
use crate::network::{SpaceTimeNetwork, TimeGrid, TrackOutage};
use crate::timetable::{BalanceParams, Train, Weights};

/// A complete problem instance as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub station: Station,
    pub grid: TimeGrid,
    pub trains: Vec<Train>,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalanceParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outages: Vec<TrackOutage>,
}

impl Instance {
    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.station.ensure_valid()?;
        self.grid.validate()?;
        self.weights.validate()?;
        let mut ids = std::collections::HashSet::new();
        for t in &self.trains {
            if !ids.insert(t.id.as_str()) {
                return Err(Error::InvalidTrain { train: t.id.clone(), reason: "duplicate train id".into() });
            }
            t.validate(&self.station)?;
        }
        Ok(())
    }

    pub fn network(&self) -> Result<SpaceTimeNetwork> {
        SpaceTimeNetwork::build_with_outages(&self.station, &self.trains, &self.grid, &self.outages)
    }

    pub fn balance_cap(&self) -> Option<u32> {
        self.balance
            .and_then(|b| b.cap(&self.trains, self.station.sidings().count()))
    }
}
