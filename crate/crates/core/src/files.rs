//! TOML persistence: scenario documents, saved assignments, and the
//! experiment configuration the command-line tools consume.
//!
//! All formats are plain TOML. A scenario document stores the seed,
//! the generating configuration, and the drawn geometry, optionally
//! followed by `[[assignment]]` rows binding each pair to a band. IO
//! and syntax problems keep the offending path in the error.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, BandRef};
use crate::channel::RadioParams;
use crate::harness::{Scheme, SweepParameter, SweepSpec};
use crate::scenario::{Cell, CellConfig, D2dId, Scenario};
use crate::solvers::HeuristicConfig;
use crate::Error;

/// One saved band assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentEntry {
    pub cell: usize,
    pub d2d: usize,
    pub band: BandRef,
}

/// A scenario, optionally bundled with an assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub seed: u64,
    pub config: CellConfig,
    #[serde(rename = "cell")]
    pub cells: Vec<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<AssignmentEntry>>,
}

impl ScenarioDocument {
    pub fn new(scenario: Scenario, allocation: Option<&Allocation>) -> ScenarioDocument {
        ScenarioDocument {
            seed: scenario.seed,
            config: scenario.config,
            cells: scenario.cells,
            assignment: allocation.map(allocation_to_entries),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            seed: self.seed,
            config: self.config.clone(),
            cells: self.cells.clone(),
        }
    }

    pub fn allocation(&self) -> Result<Option<Allocation>, Error> {
        self.assignment
            .as_deref()
            .map(entries_to_allocation)
            .transpose()
    }
}

/// A standalone assignment file: just `[[assignment]]` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationFile {
    pub assignment: Vec<AssignmentEntry>,
}

/// Flattens an allocation to rows in label order.
pub fn allocation_to_entries(alloc: &Allocation) -> Vec<AssignmentEntry> {
    alloc
        .iter()
        .map(|(id, band)| AssignmentEntry {
            cell: id.cell,
            d2d: id.pair,
            band,
        })
        .collect()
}

/// Rebuilds an allocation from rows. Listing the same pair twice is an
/// error.
pub fn entries_to_allocation(entries: &[AssignmentEntry]) -> Result<Allocation, Error> {
    let mut alloc = Allocation::new();
    for e in entries {
        let id = D2dId {
            cell: e.cell,
            pair: e.d2d,
        };
        if alloc.assign(id, e.band).is_some() {
            return Err(Error::InvalidConfig(format!(
                "duplicate assignment for pair {id}"
            )));
        }
    }
    Ok(alloc)
}

fn default_max_iterations() -> u64 {
    1_000_000
}

/// `[heuristic]` section of an experiment configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicSection {
    /// Overrides the per-scenario default stall limit when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stall_limit: Option<u64>,
    pub max_iterations_per_phase: u64,
}

impl Default for HeuristicSection {
    fn default() -> Self {
        HeuristicSection {
            stall_limit: None,
            max_iterations_per_phase: default_max_iterations(),
        }
    }
}

fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Heu, Scheme::Mmw, Scheme::Hcn, Scheme::Mmw1]
}

fn default_seeds() -> Vec<u64> {
    (0..20).collect()
}

fn default_budget() -> u64 {
    10_000_000
}

/// `[sweep]` section of an experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

/// `[oracle_gap]` section: optimality-gap study dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleGapSection {
    /// Mm-wave band counts to measure the gap at.
    pub mmwave_bands: Vec<usize>,
    pub seeds: Vec<u64>,
    pub budget: u64,
}

impl Default for OracleGapSection {
    fn default() -> Self {
        OracleGapSection {
            mmwave_bands: vec![1, 2, 3],
            seeds: default_seeds(),
            budget: default_budget(),
        }
    }
}

/// Top-level experiment configuration file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cell: CellConfig,
    pub radio: RadioParams,
    pub heuristic: HeuristicSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_gap: Option<OracleGapSection>,
}

impl ExperimentConfig {
    /// Heuristic knobs for `scn`, respecting any configured overrides.
    pub fn heuristic_config(&self, scn: &Scenario, seed: u64) -> HeuristicConfig {
        let mut cfg = HeuristicConfig::for_scenario(scn, seed);
        if let Some(stall) = self.heuristic.stall_limit {
            cfg.stall_limit = stall;
        }
        cfg.max_iterations_per_phase = self.heuristic.max_iterations_per_phase;
        cfg
    }

    /// Assembles the sweep this configuration describes, if any.
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        self.sweep.as_ref().map(|s| SweepSpec {
            parameter: s.parameter,
            values: s.values.clone(),
            schemes: s.schemes.clone(),
            seeds: s.seeds.clone(),
            cell: self.cell.clone(),
            radio: self.radio.clone(),
            stall_limit: self.heuristic.stall_limit,
            budget: s.budget,
        })
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Error> {
    toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn to_toml<T: Serialize>(path: &Path, value: &T) -> Result<String, Error> {
    toml::to_string(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig, Error> {
    parse_toml(path, &read_file(path)?)
}

pub fn save_experiment_config(config: &ExperimentConfig, path: &Path) -> Result<(), Error> {
    write_file(path, &to_toml(path, config)?)
}

pub fn load_scenario_document(path: &Path) -> Result<ScenarioDocument, Error> {
    parse_toml(path, &read_file(path)?)
}

pub fn save_scenario_document(doc: &ScenarioDocument, path: &Path) -> Result<(), Error> {
    write_file(path, &to_toml(path, doc)?)
}

pub fn load_allocation_file(path: &Path) -> Result<AllocationFile, Error> {
    parse_toml(path, &read_file(path)?)
}

pub fn save_allocation_file(file: &AllocationFile, path: &Path) -> Result<(), Error> {
    write_file(path, &to_toml(path, file)?)
}
