//! System-level simulator and spectrum-allocation solvers for
//! device-to-device (D2D) pairs in multi-cell networks.
//!
//! A [`Scenario`](scenario::Scenario) places base stations, cellular
//! users, and D2D pairs in a square deployment area. Every cell offers
//! `N` cellular uplink sub-channels (one per cellular user) and `N'`
//! mm-wave bands, reused across all cells, and each D2D pair must occupy
//! exactly one band. The [`channel`] module turns geometry into per-link
//! SINRs and Shannon rates: omnidirectional links with a base-station
//! gain on the cellular side, directional antennas with blockage on the
//! mm-wave side. The [`allocation`] module scores whole assignments, and
//! [`solvers`] searches them: a two-phase switch heuristic, an exhaustive
//! oracle, and three baselines. The [`harness`] runs seeded Monte-Carlo
//! parameter sweeps and emits CSV.
//!
//! All randomness derives from explicit `u64` seeds through a pinned
//! generator; see [`rng`]. Identical inputs give identical outputs, down
//! to the bytes of an emitted CSV.

pub mod allocation;
pub mod channel;
pub mod files;
pub mod harness;
pub mod rng;
pub mod scenario;
pub mod solvers;

mod error;

pub use allocation::{Allocation, BandRef, Violation};
pub use channel::{LinkBudget, RadioParams};
pub use error::Error;
pub use harness::{Scheme, SweepParameter, SweepRecord, SweepResult, SweepSpec};
pub use scenario::{CellConfig, D2dId, D2dPair, Point2D, Scenario};
pub use solvers::{HeuristicConfig, SolverResult};
