//! Command-line front end for the D2D spectrum allocation simulator:
//! single runs, parameter sweeps, optimality-gap studies, and scenario
//! file validation.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use d2dsim::files::{
    load_allocation_file, load_experiment_config, load_scenario_document, save_scenario_document,
    ExperimentConfig, OracleGapSection, ScenarioDocument,
};
use d2dsim::harness::{
    average_deviation, emit_csv, run_sweep, to_csv_string, Scheme, SweepParameter, SweepResult,
    SweepSpec,
};
use d2dsim::scenario::generate_scenario;
use d2dsim::solvers::{
    baseline_hcn_random, baseline_mmw, baseline_mmw_one_band, exhaustive_allocate,
    heuristic_allocate, SolverResult,
};
use d2dsim::{allocation, channel, CellConfig, Scenario};

#[derive(Parser)]
#[command(name = "d2dsim", version, about = "D2D spectrum allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one scenario, allocate with one scheme, print the rates.
    Run(RunArgs),
    /// Run the sweep a configuration file describes and emit CSV.
    Sweep(SweepArgs),
    /// Compare the heuristic against exhaustive search over a range of
    /// mm-wave band counts.
    OracleGap(OracleGapArgs),
    /// Check a scenario document, and its assignment if present, for
    /// violations.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allocation scheme: heu, mmw, hcn, mmw1, oracle.
    #[arg(long, default_value = "heu")]
    scheme: Scheme,
    /// Evaluation budget when the scheme is oracle.
    #[arg(long)]
    budget: Option<u64>,
    /// Write the scenario and final assignment as TOML here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment configuration with a [sweep] section.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the configured seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated schemes overriding the configuration.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<Scheme>>,
    /// Evaluation budget override for the oracle scheme.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct OracleGapArgs {
    /// Experiment configuration; its [oracle_gap] section sets the band
    /// counts, seeds, and budget.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluation budget override.
    #[arg(long)]
    budget: Option<u64>,
    /// Also write the per-instance rates as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario document (TOML).
    scenario: PathBuf,
    /// Standalone assignment file; the document's own assignment is
    /// checked when omitted.
    allocation: Option<PathBuf>,
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run() -> Result<i32> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OracleGap(args) => cmd_oracle_gap(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            load_experiment_config(p).with_context(|| format!("loading {}", p.display()))
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn mbps(bps: f64) -> f64 {
    bps / 1e6
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let config = load_config(args.config.as_deref())?;
    config.cell.validate()?;
    config.radio.validate()?;
    let scn = generate_scenario(&config.cell, args.seed)?;
    let result = run_scheme(&scn, &config, args.scheme, args.seed, args.budget)?;

    println!(
        "scenario: {} cells, {} cellular bands, {} mm-wave bands, {} D2D pairs (seed {})",
        scn.n_cells(),
        config.cell.n_cellular_bands,
        config.cell.n_mmwave_bands,
        scn.d2d_count(),
        args.seed
    );
    println!(
        "scheme: {}  iterations: {} (phase 1: {}, phase 2: {})  switches: {}",
        args.scheme,
        result.iterations(),
        result.iterations_phase1,
        result.iterations_phase2,
        result.switches
    );
    println!("cellular uplinks:");
    for cell in 0..scn.n_cells() {
        for band in 0..config.cell.n_cellular_bands {
            let budget =
                channel::cellular_user_rate(&scn, &result.allocation, cell, band, &config.radio)?;
            println!("  cell {cell} band c{band}: {:.3} Mbps", mbps(budget.rate_bps));
        }
    }
    println!("d2d pairs:");
    for id in scn.d2d_ids() {
        let band = result.allocation.band_of(id)?;
        let rate = channel::d2d_rate(&scn, &result.allocation, id, &config.radio)?;
        println!("  {id} on {band}: {:.3} Mbps", mbps(rate));
    }
    println!(
        "system rate: {:.3} Mbps ({} bps)",
        mbps(result.rate_bps),
        result.rate_bps
    );

    if let Some(out) = args.out {
        let doc = ScenarioDocument::new(scn, Some(&result.allocation));
        save_scenario_document(&doc, &out)?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}

fn run_scheme(
    scn: &Scenario,
    config: &ExperimentConfig,
    scheme: Scheme,
    seed: u64,
    budget: Option<u64>,
) -> Result<SolverResult> {
    let radio = &config.radio;
    let result = match scheme {
        Scheme::Heu => heuristic_allocate(scn, radio, &config.heuristic_config(scn, seed))?,
        Scheme::Mmw => baseline_mmw(scn, radio, seed)?,
        Scheme::Hcn => baseline_hcn_random(scn, radio, seed)?,
        Scheme::Mmw1 => baseline_mmw_one_band(scn, radio)?,
        Scheme::Oracle => exhaustive_allocate(scn, radio, budget.unwrap_or(10_000_000))?,
    };
    Ok(result)
}

fn report_refusals(result: &SweepResult) {
    for refusal in &result.refusals {
        eprintln!(
            "note: {} skipped at {}={}, seed {}: {}",
            refusal.scheme, result.parameter, refusal.value, refusal.seed, refusal.reason
        );
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let config = load_config(Some(&args.config))?;
    let Some(mut spec) = config.sweep_spec() else {
        bail!("{} has no [sweep] section", args.config.display());
    };
    if let Some(seed) = args.seed {
        spec.seeds = vec![seed];
    }
    if let Some(schemes) = args.scheme {
        spec.schemes = schemes;
    }
    if let Some(budget) = args.budget {
        spec.budget = budget;
    }
    let result = run_sweep(&spec)?;
    report_refusals(&result);
    match args.out {
        Some(path) => {
            emit_csv(&result, &path)?;
            eprintln!("wrote {} records to {}", result.records.len(), path.display());
        }
        None => print!("{}", to_csv_string(&result)),
    }
    Ok(0)
}

/// Scenario shape the gap study uses when no configuration is given:
/// small enough that exhaustive search stays cheap.
fn gap_default_cell() -> CellConfig {
    CellConfig {
        n_cells: 2,
        n_cellular_bands: 2,
        n_mmwave_bands: 1,
        max_d2d_per_cell: 4,
        fixed_d2d_per_cell: Some(4),
        ..CellConfig::default()
    }
}

fn cmd_oracle_gap(args: OracleGapArgs) -> Result<i32> {
    let (cell, radio, stall_limit, section) = match &args.config {
        Some(path) => {
            let config = load_config(Some(path))?;
            let section = config.oracle_gap.clone().unwrap_or_default();
            (config.cell.clone(), config.radio.clone(), config.heuristic.stall_limit, section)
        }
        None => (
            gap_default_cell(),
            Default::default(),
            None,
            OracleGapSection::default(),
        ),
    };
    if section.mmwave_bands.is_empty() {
        bail!("oracle_gap.mmwave_bands is empty");
    }
    let values: Vec<f64> = section.mmwave_bands.iter().map(|&b| b as f64).collect();
    let spec = SweepSpec {
        parameter: SweepParameter::NMmwaveBands,
        values: values.clone(),
        schemes: vec![Scheme::Heu, Scheme::Oracle],
        seeds: section.seeds.clone(),
        cell,
        radio,
        stall_limit,
        budget: args.budget.unwrap_or(section.budget),
    };
    let result = run_sweep(&spec)?;
    report_refusals(&result);

    let mean = |scheme: Scheme, value: f64| -> Option<f64> {
        let rates: Vec<f64> = result
            .records
            .iter()
            .filter(|r| r.scheme == scheme && r.value == value)
            .map(|r| r.rate_bps)
            .collect();
        (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
    };
    let mut heu_means = Vec::new();
    let mut oracle_means = Vec::new();
    println!("mm-wave bands  mean heu (Mbps)  mean oracle (Mbps)  gap");
    for &value in &values {
        match (mean(Scheme::Heu, value), mean(Scheme::Oracle, value)) {
            (Some(h), Some(o)) => {
                println!(
                    "{value:>13}  {:>15.3}  {:>18.3}  {:.4}",
                    mbps(h),
                    mbps(o),
                    (o - h) / o
                );
                heu_means.push(h);
                oracle_means.push(o);
            }
            _ => println!("{value:>13}  (no complete data: every exhaustive run refused)"),
        }
    }
    if heu_means.is_empty() {
        bail!("no band count produced both heuristic and exhaustive rates");
    }
    let deviation = average_deviation(&oracle_means, &heu_means)?;
    println!(
        "average deviation from optimal over {} band counts: {deviation:.4}",
        heu_means.len()
    );

    if let Some(path) = args.out {
        emit_csv(&result, &path)?;
        eprintln!("wrote {} records to {}", result.records.len(), path.display());
    }
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let doc = load_scenario_document(&args.scenario)
        .with_context(|| format!("loading {}", args.scenario.display()))?;
    let scn = doc.scenario();
    let mut problems = 0usize;
    for message in scn.validate() {
        println!("scenario: {message}");
        problems += 1;
    }

    let alloc = match &args.allocation {
        Some(path) => {
            let file = load_allocation_file(path)
                .with_context(|| format!("loading {}", path.display()))?;
            Some(d2dsim::files::entries_to_allocation(&file.assignment)?)
        }
        None => doc.allocation()?,
    };
    match alloc {
        Some(alloc) => {
            for violation in allocation::validate(&scn, &alloc) {
                println!("assignment: {violation}");
                problems += 1;
            }
        }
        None => println!("no assignment present; checked the scenario only"),
    }

    if problems == 0 {
        println!("ok");
        Ok(0)
    } else {
        println!("{problems} problem(s) found");
        Ok(1)
    }
}
