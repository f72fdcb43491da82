//! Band assignments for D2D pairs and the rate functions defined over
//! them.
//!
//! An [`Allocation`] maps every D2D pair to one band, cellular or
//! mm-wave. Bands are global: pairs in different cells assigned the
//! same band interfere with each other. The system rate is the sum of
//! every cellular user's uplink rate plus every D2D pair's expected
//! rate; moving one pair only disturbs the two bands involved, which
//! [`delta_if_moved`] exploits.
//!
//! All iteration is in label order (cell index, then pair index), so
//! every sum here is deterministic for a given scenario and allocation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{self, Lin, RadioParams};
use crate::scenario::{CellConfig, D2dId, Scenario};
use crate::Error;

/// One spectrum band: cellular sub-channel `j` or mm-wave band `y`.
///
/// Ordering is cellular-first, then by index, matching the flat band
/// numbering used when enumerating assignments. The text form is `c<j>`
/// or `m<y>`, which is also how the variant serializes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BandRef {
    Cellular(usize),
    MmWave(usize),
}

impl BandRef {
    /// Position in the flat cellular-first band numbering.
    pub fn order_index(self, n_cellular: usize) -> usize {
        match self {
            BandRef::Cellular(j) => j,
            BandRef::MmWave(y) => n_cellular + y,
        }
    }

    /// Inverse of [`order_index`](Self::order_index).
    pub fn from_order_index(index: usize, n_cellular: usize) -> BandRef {
        if index < n_cellular {
            BandRef::Cellular(index)
        } else {
            BandRef::MmWave(index - n_cellular)
        }
    }

    pub fn is_mmwave(self) -> bool {
        matches!(self, BandRef::MmWave(_))
    }

    pub fn in_range(self, config: &CellConfig) -> bool {
        match self {
            BandRef::Cellular(j) => j < config.n_cellular_bands,
            BandRef::MmWave(y) => y < config.n_mmwave_bands,
        }
    }
}

impl fmt::Display for BandRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandRef::Cellular(j) => write!(f, "c{j}"),
            BandRef::MmWave(y) => write!(f, "m{y}"),
        }
    }
}

impl FromStr for BandRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidConfig(format!("invalid band reference '{s}'"));
        let (kind, index) = s.split_at(s.len().min(1));
        let index: usize = index.parse().map_err(|_| bad())?;
        match kind {
            "c" => Ok(BandRef::Cellular(index)),
            "m" => Ok(BandRef::MmWave(index)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for BandRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BandRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Assignment of D2D pairs to bands, keyed by label order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allocation {
    map: BTreeMap<D2dId, BandRef>,
}

impl Allocation {
    pub fn new() -> Allocation {
        Allocation::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Assigns `id` to `band`, returning the previous band if any.
    pub fn assign(&mut self, id: D2dId, band: BandRef) -> Option<BandRef> {
        self.map.insert(id, band)
    }

    pub fn get(&self, id: D2dId) -> Option<BandRef> {
        self.map.get(&id).copied()
    }

    /// Like [`get`](Self::get) but missing entries are an error.
    pub fn band_of(&self, id: D2dId) -> Result<BandRef, Error> {
        self.get(id).ok_or(Error::Unassigned {
            cell: id.cell,
            pair: id.pair,
        })
    }

    /// Entries in label order.
    pub fn iter(&self) -> impl Iterator<Item = (D2dId, BandRef)> + '_ {
        self.map.iter().map(|(id, band)| (*id, *band))
    }

    /// Pairs currently assigned to `band`, in label order.
    pub fn assigned_to(&self, band: BandRef) -> impl Iterator<Item = D2dId> + '_ {
        self.map
            .iter()
            .filter(move |(_, b)| **b == band)
            .map(|(id, _)| *id)
    }
}

/// One defect found when checking an allocation against a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A pair in the scenario has no band.
    Unassigned { cell: usize, pair: usize },
    /// A pair references a band index the scenario does not have.
    BandOutOfRange { cell: usize, pair: usize, band: BandRef },
    /// The allocation mentions a pair the scenario does not contain.
    UnknownPair { cell: usize, pair: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unassigned { cell, pair } => {
                write!(f, "pair ({cell},{pair}) has no band assigned")
            }
            Violation::BandOutOfRange { cell, pair, band } => {
                write!(f, "pair ({cell},{pair}) is assigned out-of-range band {band}")
            }
            Violation::UnknownPair { cell, pair } => {
                write!(f, "assignment references unknown pair ({cell},{pair})")
            }
        }
    }
}

/// Checks `alloc` against `scn`: every pair assigned, every band in
/// range, no extraneous pairs. Violations come back in label order,
/// scenario-side defects first.
pub fn validate(scn: &Scenario, alloc: &Allocation) -> Vec<Violation> {
    let mut violations = Vec::new();
    for id in scn.d2d_ids() {
        match alloc.get(id) {
            None => violations.push(Violation::Unassigned {
                cell: id.cell,
                pair: id.pair,
            }),
            Some(band) if !band.in_range(&scn.config) => {
                violations.push(Violation::BandOutOfRange {
                    cell: id.cell,
                    pair: id.pair,
                    band,
                });
            }
            Some(_) => {}
        }
    }
    for (id, _) in alloc.iter() {
        if !scn.contains(id) {
            violations.push(Violation::UnknownPair {
                cell: id.cell,
                pair: id.pair,
            });
        }
    }
    violations
}

fn band_out_of_range(band: BandRef, config: &CellConfig) -> Error {
    Error::BandOutOfRange {
        band: band.to_string(),
        n_cellular: config.n_cellular_bands,
        n_mmwave: config.n_mmwave_bands,
    }
}

/// Sum rate of the whole system under `alloc`: every cell's cellular
/// uplinks plus every D2D pair's expected rate. The allocation is
/// validated first; defects surface as [`Error::InvalidAllocation`].
pub fn system_rate(scn: &Scenario, alloc: &Allocation, params: &RadioParams) -> Result<f64, Error> {
    let violations = validate(scn, alloc);
    if !violations.is_empty() {
        return Err(Error::InvalidAllocation(violations));
    }
    let lin = Lin::new(params)?;
    system_rate_lin(scn, alloc, &lin)
}

/// Summation order: cellular users cell-major then band-major, then D2D
/// pairs in label order.
pub(crate) fn system_rate_lin(scn: &Scenario, alloc: &Allocation, lin: &Lin) -> Result<f64, Error> {
    let mut sum = 0.0;
    for cell in 0..scn.n_cells() {
        for band in 0..scn.config.n_cellular_bands {
            sum += channel::cellular_user_rate_lin(scn, alloc, cell, band, lin)?.rate_bps;
        }
    }
    for id in scn.d2d_ids() {
        sum += channel::d2d_rate_lin(scn, alloc, id, lin)?;
    }
    Ok(sum)
}

/// Rate contributed by one band: its D2D pairs' expected rates, plus
/// every cell's cellular uplink on it when the band is cellular.
///
/// Expects an allocation that is valid for `scn`; an out-of-range
/// `band` argument is rejected directly.
pub fn set_rate(
    scn: &Scenario,
    alloc: &Allocation,
    band: BandRef,
    params: &RadioParams,
) -> Result<f64, Error> {
    let lin = Lin::new(params)?;
    set_rate_lin(scn, alloc, band, &lin)
}

pub(crate) fn set_rate_lin(
    scn: &Scenario,
    alloc: &Allocation,
    band: BandRef,
    lin: &Lin,
) -> Result<f64, Error> {
    if !band.in_range(&scn.config) {
        return Err(band_out_of_range(band, &scn.config));
    }
    let mut sum = 0.0;
    if let BandRef::Cellular(j) = band {
        for cell in 0..scn.n_cells() {
            sum += channel::cellular_user_rate_lin(scn, alloc, cell, j, lin)?.rate_bps;
        }
    }
    for id in alloc.assigned_to(band).collect::<Vec<_>>() {
        sum += channel::d2d_rate_lin(scn, alloc, id, lin)?;
    }
    Ok(sum)
}

/// Change in system rate if `id` moved from its current band to `to`,
/// computed by re-evaluating only the two bands involved. Positive
/// means the move helps. Moving a pair to the band it already occupies
/// is rejected as [`Error::NoOpMove`].
pub fn delta_if_moved(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    to: BandRef,
    params: &RadioParams,
) -> Result<f64, Error> {
    let lin = Lin::new(params)?;
    delta_if_moved_lin(scn, alloc, id, to, &lin)
}

pub(crate) fn delta_if_moved_lin(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    to: BandRef,
    lin: &Lin,
) -> Result<f64, Error> {
    if !to.in_range(&scn.config) {
        return Err(band_out_of_range(to, &scn.config));
    }
    let from = alloc.band_of(id)?;
    if from == to {
        return Err(Error::NoOpMove(format!(
            "pair {id} is already assigned to band {to}"
        )));
    }
    let before = set_rate_lin(scn, alloc, from, lin)? + set_rate_lin(scn, alloc, to, lin)?;
    let mut moved = alloc.clone();
    moved.assign(id, to);
    let after = set_rate_lin(scn, &moved, from, lin)? + set_rate_lin(scn, &moved, to, lin)?;
    Ok(after - before)
}
