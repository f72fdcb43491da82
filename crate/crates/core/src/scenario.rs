//! Seeded generation and representation of the multi-cell geometry.
//!
//! A scenario is a square deployment area holding `n_cells` circular
//! cells. Each cell has a base station, exactly `n_cellular_bands`
//! cellular users (user `j` owns uplink sub-channel `j`), and a random
//! number of D2D transmitter/receiver pairs. Band indices are shared
//! across cells: cellular band `j` means the same frequency in every
//! cell, likewise mm-wave band `y`.
//!
//! Generation is a pure function of `(config, seed)`. Draw order is part
//! of the contract: base stations first (uniform in the square, two
//! coordinates each, skipped entirely in grid mode), then per cell the
//! cellular users, the pair count, and the pair endpoints, each disk
//! point as radius-fraction then angle.

use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::rng::{self, STREAM_SCENARIO};
use crate::Error;

/// A position in the deployment plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Point2D { x, y }
    }
}

impl From<Point2D> for (f64, f64) {
    fn from(p: Point2D) -> Self {
        (p.x, p.y)
    }
}

/// Euclidean distance between two points, in meters.
pub fn distance(a: Point2D, b: Point2D) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// How base stations are placed in the deployment square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BsPlacement {
    /// Uniformly random positions; cells may overlap or be disjoint.
    #[default]
    Uniform,
    /// A deterministic ceil(sqrt(n)) x ceil(sqrt(n)) lattice of cell
    /// centers. Consumes no random draws, so tests can pin geometry
    /// while still drawing user positions from the seed.
    Grid,
}

/// Deployment configuration: cell count, geometry bounds, and band
/// structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    pub n_cells: usize,
    /// Cell radius in meters; every user and D2D endpoint of a cell lies
    /// within this distance of its base station.
    pub cell_radius: f64,
    /// Side length of the square deployment area, in meters.
    pub area_side: f64,
    /// Cellular sub-channel count `N`; also the per-cell user count.
    pub n_cellular_bands: usize,
    /// Mm-wave band count `N'`.
    pub n_mmwave_bands: usize,
    /// Upper bound on the per-cell D2D pair count.
    pub max_d2d_per_cell: usize,
    /// When set, every cell gets exactly this many pairs instead of a
    /// uniform draw from `0..=max_d2d_per_cell`.
    pub fixed_d2d_per_cell: Option<usize>,
    /// Optional cap on the transmitter-to-receiver distance of a pair.
    /// Unset means the receiver is anywhere in the cell disk.
    pub d2d_max_distance: Option<f64>,
    pub bs_placement: BsPlacement,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            n_cells: 2,
            cell_radius: 20.0,
            area_side: 100.0,
            n_cellular_bands: 2,
            n_mmwave_bands: 2,
            max_d2d_per_cell: 4,
            fixed_d2d_per_cell: None,
            d2d_max_distance: None,
            bs_placement: BsPlacement::Uniform,
        }
    }
}

impl CellConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_cells == 0 {
            return Err(Error::InvalidConfig("n_cells must be >= 1".into()));
        }
        if !(self.cell_radius.is_finite() && self.cell_radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cell_radius must be finite and > 0, got {}",
                self.cell_radius
            )));
        }
        if !(self.area_side.is_finite() && self.area_side > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "area_side must be finite and > 0, got {}",
                self.area_side
            )));
        }
        if self.n_cellular_bands + self.n_mmwave_bands == 0 {
            return Err(Error::InvalidConfig(
                "need at least one band (n_cellular_bands + n_mmwave_bands >= 1)".into(),
            ));
        }
        if let Some(fixed) = self.fixed_d2d_per_cell {
            if fixed > self.max_d2d_per_cell {
                return Err(Error::InvalidConfig(format!(
                    "fixed_d2d_per_cell {} exceeds max_d2d_per_cell {}",
                    fixed, self.max_d2d_per_cell
                )));
            }
        }
        if let Some(dmax) = self.d2d_max_distance {
            if !(dmax.is_finite() && dmax > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "d2d_max_distance must be finite and > 0, got {dmax}"
                )));
            }
        }
        Ok(())
    }

    /// Total number of bands a D2D pair can occupy.
    pub fn total_bands(&self) -> usize {
        self.n_cellular_bands + self.n_mmwave_bands
    }
}

/// A D2D transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D2dPair {
    pub tx: Point2D,
    pub rx: Point2D,
}

impl D2dPair {
    /// Transmitter-to-receiver distance in meters.
    pub fn length(&self) -> f64 {
        distance(self.tx, self.rx)
    }
}

/// One cell: its base station, its cellular users (user `j` owns
/// sub-channel `j`), and its D2D pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub bs: Point2D,
    pub users: Vec<Point2D>,
    #[serde(default)]
    pub d2d: Vec<D2dPair>,
}

/// Label of one D2D pair: cell index, then index within the cell.
///
/// The derived ordering (cell first, then pair) is the label order the
/// solvers iterate in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct D2dId {
    pub cell: usize,
    pub pair: usize,
}

impl std::fmt::Display for D2dId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.cell, self.pair)
    }
}

/// Immutable multi-cell geometry plus the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub config: CellConfig,
    #[serde(rename = "cell")]
    pub cells: Vec<Cell>,
}

impl Scenario {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Total D2D pair count across all cells.
    pub fn d2d_count(&self) -> usize {
        self.cells.iter().map(|c| c.d2d.len()).sum()
    }

    /// All pair labels in label order.
    pub fn d2d_ids(&self) -> Vec<D2dId> {
        let mut ids = Vec::with_capacity(self.d2d_count());
        for (cell, c) in self.cells.iter().enumerate() {
            for pair in 0..c.d2d.len() {
                ids.push(D2dId { cell, pair });
            }
        }
        ids
    }

    pub fn pair(&self, id: D2dId) -> &D2dPair {
        &self.cells[id.cell].d2d[id.pair]
    }

    /// True when `id` names a pair that exists in this scenario.
    pub fn contains(&self, id: D2dId) -> bool {
        id.cell < self.cells.len() && id.pair < self.cells[id.cell].d2d.len()
    }

    /// Checks the structural invariants, returning one message per
    /// violation. Useful for scenarios read from files; generated
    /// scenarios always pass.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.cells.len() != self.config.n_cells {
            out.push(format!(
                "cell count {} does not match n_cells {}",
                self.cells.len(),
                self.config.n_cells
            ));
        }
        // Generated coordinates can land a hair past the radius after
        // rounding, so the containment check carries a relative slack.
        let r = self.config.cell_radius;
        let r_tol = r * (1.0 + 1e-9);
        for (i, cell) in self.cells.iter().enumerate() {
            if cell.users.len() != self.config.n_cellular_bands {
                out.push(format!(
                    "cell {} has {} cellular users, expected {}",
                    i,
                    cell.users.len(),
                    self.config.n_cellular_bands
                ));
            }
            if cell.d2d.len() > self.config.max_d2d_per_cell {
                out.push(format!(
                    "cell {} has {} d2d pairs, max is {}",
                    i,
                    cell.d2d.len(),
                    self.config.max_d2d_per_cell
                ));
            }
            for (j, &u) in cell.users.iter().enumerate() {
                if distance(u, cell.bs) > r_tol {
                    out.push(format!("cell {i} user {j} lies outside the cell disk"));
                }
            }
            for (k, p) in cell.d2d.iter().enumerate() {
                if distance(p.tx, cell.bs) > r_tol {
                    out.push(format!("cell {i} d2d {k} tx lies outside the cell disk"));
                }
                if distance(p.rx, cell.bs) > r_tol {
                    out.push(format!("cell {i} d2d {k} rx lies outside the cell disk"));
                }
                if let Some(dmax) = self.config.d2d_max_distance {
                    if p.length() > dmax * (1.0 + 1e-9) {
                        out.push(format!("cell {i} d2d {k} is longer than d2d_max_distance"));
                    }
                }
            }
        }
        out
    }
}

/// Draws a point uniformly in the disk of `radius` around `center`.
/// Two draws: radius fraction first, then angle.
fn point_in_disk(rng: &mut impl Rng, center: Point2D, radius: f64) -> Point2D {
    let r = radius * rng.gen::<f64>().sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    Point2D {
        x: center.x + r * phi.cos(),
        y: center.y + r * phi.sin(),
    }
}

fn grid_positions(n: usize, area_side: f64) -> Vec<Point2D> {
    let per_side = (n as f64).sqrt().ceil() as usize;
    let step = area_side / per_side as f64;
    (0..n)
        .map(|i| {
            let row = i / per_side;
            let col = i % per_side;
            Point2D {
                x: (col as f64 + 0.5) * step,
                y: (row as f64 + 0.5) * step,
            }
        })
        .collect()
}

/// Generates the scenario for `(config, seed)`.
///
/// Deterministic: the same inputs yield a bit-identical scenario. The
/// generator and draw order are documented in the module header.
pub fn generate_scenario(config: &CellConfig, seed: u64) -> Result<Scenario, Error> {
    config.validate()?;
    let mut rng = rng::stream(seed, STREAM_SCENARIO);

    let bs_positions: Vec<Point2D> = match config.bs_placement {
        BsPlacement::Uniform => (0..config.n_cells)
            .map(|_| Point2D {
                x: rng.gen::<f64>() * config.area_side,
                y: rng.gen::<f64>() * config.area_side,
            })
            .collect(),
        BsPlacement::Grid => grid_positions(config.n_cells, config.area_side),
    };

    let mut cells = Vec::with_capacity(config.n_cells);
    for bs in bs_positions {
        let users: Vec<Point2D> = (0..config.n_cellular_bands)
            .map(|_| point_in_disk(&mut rng, bs, config.cell_radius))
            .collect();

        let n_pairs = match config.fixed_d2d_per_cell {
            Some(fixed) => fixed,
            None => rng.gen_range(0..=config.max_d2d_per_cell),
        };

        let mut d2d = Vec::with_capacity(n_pairs);
        for _ in 0..n_pairs {
            let tx = point_in_disk(&mut rng, bs, config.cell_radius);
            let rx = match config.d2d_max_distance {
                None => point_in_disk(&mut rng, bs, config.cell_radius),
                Some(dmax) => {
                    // Uniform on the intersection of the cell disk and the
                    // dmax disk around tx; the intersection has positive
                    // area because tx itself is inside the cell.
                    let mut attempts = 0u32;
                    loop {
                        let p = point_in_disk(&mut rng, tx, dmax);
                        if distance(p, bs) <= config.cell_radius {
                            break p;
                        }
                        attempts += 1;
                        if attempts > 1_000_000 {
                            return Err(Error::InvalidConfig(
                                "d2d_max_distance sampling failed to place a receiver".into(),
                            ));
                        }
                    }
                }
            };
            d2d.push(D2dPair { tx, rx });
        }
        cells.push(Cell { bs, users, d2d });
    }

    Ok(Scenario {
        seed,
        config: config.clone(),
        cells,
    })
}
