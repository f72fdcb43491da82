//! Experiment harness: sweeps one scenario or radio parameter across a
//! list of values, runs the selected allocation schemes over a list of
//! seeds, and emits the rates as CSV.
//!
//! Record order is fixed: values in the order given, schemes within a
//! value, seeds within a scheme. Combined with the seeded generators
//! and solvers this makes sweep output byte-identical across runs. Jobs
//! run in parallel; ordering comes from indexed collection, not timing.
//!
//! The exhaustive scheme refuses instances whose search space exceeds
//! the evaluation budget. Refusals do not abort the sweep; they are
//! returned alongside the records, and the affected rows are simply
//! absent from the CSV.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::RadioParams;
use crate::scenario::{generate_scenario, CellConfig};
use crate::solvers::{
    baseline_hcn_random, baseline_mmw, baseline_mmw_one_band, exhaustive_allocate,
    heuristic_allocate, HeuristicConfig,
};
use crate::Error;

/// An allocation scheme the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Two-phase local search.
    Heu,
    /// Random all-mm-wave assignment, the search's starting point.
    Mmw,
    /// Uniform random assignment over all bands.
    Hcn,
    /// Everything on the first mm-wave band.
    Mmw1,
    /// Exhaustive search, budget permitting.
    Oracle,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Heu,
        Scheme::Mmw,
        Scheme::Hcn,
        Scheme::Mmw1,
        Scheme::Oracle,
    ];

    fn name(self) -> &'static str {
        match self {
            Scheme::Heu => "heu",
            Scheme::Mmw => "mmw",
            Scheme::Hcn => "hcn",
            Scheme::Mmw1 => "mmw1",
            Scheme::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown scheme '{s}'")))
    }
}

/// The quantity a sweep varies. The text form doubles as the `param`
/// column of the CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "n_cells")]
    NCells,
    #[serde(rename = "n_cellular_bands")]
    NCellularBands,
    #[serde(rename = "n_mmwave_bands")]
    NMmwaveBands,
    #[serde(rename = "p_m")]
    PM,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "theta_3db")]
    Theta3db,
    #[serde(rename = "cell_radius")]
    CellRadius,
    #[serde(rename = "theta_mis")]
    ThetaMis,
}

impl SweepParameter {
    fn name(self) -> &'static str {
        match self {
            SweepParameter::NCells => "n_cells",
            SweepParameter::NCellularBands => "n_cellular_bands",
            SweepParameter::NMmwaveBands => "n_mmwave_bands",
            SweepParameter::PM => "p_m",
            SweepParameter::Beta => "beta",
            SweepParameter::Theta3db => "theta_3db",
            SweepParameter::CellRadius => "cell_radius",
            SweepParameter::ThetaMis => "theta_mis",
        }
    }

    /// Writes `value` into the configuration field this parameter
    /// controls. Count-valued parameters require non-negative integers.
    pub fn apply(self, value: f64, cell: &mut CellConfig, radio: &mut RadioParams) -> Result<(), Error> {
        let count = |value: f64| -> Result<usize, Error> {
            if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= 1e15 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidSweep(format!(
                    "{} must be a non-negative integer, got {value}",
                    self.name()
                )))
            }
        };
        match self {
            SweepParameter::NCells => cell.n_cells = count(value)?,
            SweepParameter::NCellularBands => cell.n_cellular_bands = count(value)?,
            SweepParameter::NMmwaveBands => cell.n_mmwave_bands = count(value)?,
            SweepParameter::PM => radio.p_m = value,
            SweepParameter::Beta => radio.beta = value,
            SweepParameter::Theta3db => radio.theta_3db = value,
            SweepParameter::CellRadius => cell.cell_radius = value,
            SweepParameter::ThetaMis => radio.theta_mis = value,
        }
        Ok(())
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SweepParameter::NCells,
            SweepParameter::NCellularBands,
            SweepParameter::NMmwaveBands,
            SweepParameter::PM,
            SweepParameter::Beta,
            SweepParameter::Theta3db,
            SweepParameter::CellRadius,
            SweepParameter::ThetaMis,
        ]
        .into_iter()
        .find(|p| p.name() == s)
        .ok_or_else(|| Error::InvalidSweep(format!("unknown sweep parameter '{s}'")))
    }
}

fn default_budget() -> u64 {
    10_000_000
}

/// Full description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    /// Scenario shape before the parameter is applied.
    #[serde(default)]
    pub cell: CellConfig,
    /// Radio constants before the parameter is applied.
    #[serde(default)]
    pub radio: RadioParams,
    /// Overrides the per-scenario default stall limit when set.
    #[serde(default)]
    pub stall_limit: Option<u64>,
    /// Evaluation budget for the exhaustive scheme.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

/// One completed (value, scheme, seed) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub value: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub rate_bps: f64,
    pub iterations: u64,
}

/// A job the exhaustive scheme declined because the search space was
/// over budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub value: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub records: Vec<SweepRecord>,
    pub refusals: Vec<Refusal>,
}

enum JobOutcome {
    Done(SweepRecord),
    Refused(Refusal),
}

fn run_job(
    spec: &SweepSpec,
    value: f64,
    cell: &CellConfig,
    radio: &RadioParams,
    scheme: Scheme,
    seed: u64,
) -> Result<JobOutcome, Error> {
    let scn = generate_scenario(cell, seed)?;
    let result = match scheme {
        Scheme::Heu => {
            let mut cfg = HeuristicConfig::for_scenario(&scn, seed);
            if let Some(stall) = spec.stall_limit {
                cfg.stall_limit = stall;
            }
            heuristic_allocate(&scn, radio, &cfg)
        }
        Scheme::Mmw => baseline_mmw(&scn, radio, seed),
        Scheme::Hcn => baseline_hcn_random(&scn, radio, seed),
        Scheme::Mmw1 => baseline_mmw_one_band(&scn, radio),
        Scheme::Oracle => match exhaustive_allocate(&scn, radio, spec.budget) {
            Err(err @ Error::SearchSpaceExceeded { .. }) => {
                return Ok(JobOutcome::Refused(Refusal {
                    value,
                    scheme,
                    seed,
                    reason: err.to_string(),
                }));
            }
            other => other,
        },
    }?;
    Ok(JobOutcome::Done(SweepRecord {
        value,
        scheme,
        seed,
        rate_bps: result.rate_bps,
        iterations: result.iterations(),
    }))
}

/// Runs every (value, scheme, seed) combination of `spec` in parallel
/// and returns the records in the fixed sweep order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, Error> {
    if spec.values.is_empty() {
        return Err(Error::InvalidSweep("no values to sweep".into()));
    }
    if spec.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSweep("sweep values must be finite".into()));
    }
    if spec.schemes.is_empty() {
        return Err(Error::InvalidSweep("no schemes selected".into()));
    }
    for (i, s) in spec.schemes.iter().enumerate() {
        if spec.schemes[..i].contains(s) {
            return Err(Error::InvalidSweep(format!("duplicate scheme '{s}'")));
        }
    }
    if spec.seeds.is_empty() {
        return Err(Error::InvalidSweep("no seeds given".into()));
    }

    // Resolve each value's configuration up front so bad values fail
    // before any work is spawned.
    let mut configs = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let mut cell = spec.cell.clone();
        let mut radio = spec.radio.clone();
        spec.parameter.apply(value, &mut cell, &mut radio)?;
        cell.validate()?;
        radio.validate()?;
        configs.push((value, cell, radio));
    }

    let mut jobs = Vec::new();
    for (value, cell, radio) in &configs {
        for &scheme in &spec.schemes {
            for &seed in &spec.seeds {
                jobs.push((*value, cell, radio, scheme, seed));
            }
        }
    }

    let outcomes: Result<Vec<JobOutcome>, Error> = jobs
        .par_iter()
        .map(|(value, cell, radio, scheme, seed)| {
            run_job(spec, *value, cell, radio, *scheme, *seed)
        })
        .collect();

    let mut records = Vec::new();
    let mut refusals = Vec::new();
    for outcome in outcomes? {
        match outcome {
            JobOutcome::Done(r) => records.push(r),
            JobOutcome::Refused(r) => refusals.push(r),
        }
    }
    Ok(SweepResult {
        parameter: spec.parameter,
        records,
        refusals,
    })
}

/// Mean relative shortfall of `r_heu` against `r_os`, pairwise:
/// `mean((os - heu) / os)`. Every `r_os` entry must be positive.
pub fn average_deviation(r_os: &[f64], r_heu: &[f64]) -> Result<f64, Error> {
    if r_os.is_empty() || r_os.len() != r_heu.len() {
        return Err(Error::InvalidSweep(format!(
            "deviation needs equal non-empty rate lists, got {} and {}",
            r_os.len(),
            r_heu.len()
        )));
    }
    let mut sum = 0.0;
    for (&os, &heu) in r_os.iter().zip(r_heu) {
        if !(os.is_finite() && os > 0.0) {
            return Err(Error::InvalidSweep(format!(
                "reference rates must be positive and finite, got {os}"
            )));
        }
        sum += (os - heu) / os;
    }
    Ok(sum / r_os.len() as f64)
}

/// Renders a sweep result as CSV. Floats use their shortest
/// round-trippable decimal form.
pub fn to_csv_string(result: &SweepResult) -> String {
    let mut out = String::from("param,value,scheme,seed,rate_bps,iterations\n");
    for r in &result.records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            result.parameter, r.value, r.scheme, r.seed, r.rate_bps, r.iterations
        ));
    }
    out
}

/// Writes [`to_csv_string`] output to `path`.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), Error> {
    std::fs::write(path, to_csv_string(result)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
