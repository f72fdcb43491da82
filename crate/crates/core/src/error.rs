use std::path::PathBuf;

use crate::allocation::Violation;

/// Error type shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A deployment configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A radio parameter or solver setting is outside its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two points coincide where a direction between them is required.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A band reference does not exist in the scenario's band structure.
    #[error("band {band} out of range ({n_cellular} cellular, {n_mmwave} mm-wave bands)")]
    BandOutOfRange {
        band: String,
        n_cellular: usize,
        n_mmwave: usize,
    },

    /// A D2D pair has no band assignment.
    #[error("d2d pair (cell {cell}, pair {pair}) is unassigned")]
    Unassigned { cell: usize, pair: usize },

    /// An operation requires the pair to be in the other transmission mode.
    #[error("d2d pair (cell {cell}, pair {pair}) is on band {actual}, expected a {expected} band")]
    WrongMode {
        cell: usize,
        pair: usize,
        expected: &'static str,
        actual: String,
    },

    /// An allocation failed validation against its scenario.
    #[error("invalid allocation: {}", fmt_violations(.0))]
    InvalidAllocation(Vec<Violation>),

    /// A move targets the band the pair already occupies.
    #[error("move is a no-op: pair already on band {0}")]
    NoOpMove(String),

    /// The exhaustive search space is larger than the evaluation budget.
    #[error("search space of {space} assignments exceeds budget {budget}")]
    SearchSpaceExceeded { space: String, budget: u64 },

    /// A sweep request cannot be run as written.
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    /// Reading or writing a file failed.
    #[error("io error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A structured text file does not parse into the expected schema.
    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

fn fmt_violations(violations: &[Violation]) -> String {
    let parts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    parts.join("; ")
}
