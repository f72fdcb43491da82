//! Independent re-implementation of the interference sums, written as
//! direct nested loops over the geometry with its own angle and gain
//! arithmetic (vector rotation and `acos` instead of `atan2`, `hypot`
//! instead of squared sums). The acceptance suite compares the library
//! against this model term by term.

use d2dsim::scenario::{D2dId, Point2D, Scenario};
use d2dsim::{Allocation, BandRef, CellConfig, RadioParams};

pub struct RefModel {
    p_c_w: f64,
    p_m_w: f64,
    g0: f64,
    gb: f64,
    h0_sq: f64,
    k0: f64,
    alpha: f64,
    rho: f64,
    l_min: f64,
    mis_rad: f64,
    theta_3db: f64,
    peak_db: f64,
    side_db: f64,
}

fn db_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn dist(a: Point2D, b: Point2D) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

impl RefModel {
    pub fn new(p: &RadioParams) -> RefModel {
        let half_rad = (p.theta_3db / 2.0).to_radians();
        let peak_db = 20.0 * (1.6162 / half_rad.sin()).log10();
        RefModel {
            p_c_w: db_lin(p.p_c - 30.0),
            p_m_w: db_lin(p.p_m - 30.0),
            g0: db_lin(p.g0),
            gb: db_lin(p.gb),
            h0_sq: p.h0_sq,
            k0: (299_792_458.0 / p.carrier_mmwave / (4.0 * std::f64::consts::PI)).powi(2),
            alpha: p.alpha,
            rho: p.rho,
            l_min: p.l_min,
            mis_rad: p.theta_mis.to_radians(),
            theta_3db: p.theta_3db,
            peak_db,
            side_db: -0.4111 * p.theta_3db.ln() - 10.579,
        }
    }

    fn path(&self, l: f64) -> f64 {
        1.0 / l.max(self.l_min).powf(self.alpha)
    }

    fn gain(&self, theta_deg: f64) -> f64 {
        let t = theta_deg.abs();
        let db = if t <= 1.3 * self.theta_3db {
            self.peak_db - 3.01 * (2.0 * t / self.theta_3db).powi(2)
        } else {
            self.side_db
        };
        db_lin(db)
    }

    /// Angle between the misaligned boresight (toward `target`, rotated
    /// clockwise by the misalignment) and the direction to `other`, via
    /// normalized dot product. Degenerate directions fall back to the
    /// misalignment angle, matching the simulator's convention.
    fn off_axis_deg(&self, ant: Point2D, target: Point2D, other: Point2D) -> f64 {
        let (bx, by) = (target.x - ant.x, target.y - ant.y);
        let (ox, oy) = (other.x - ant.x, other.y - ant.y);
        let bn = bx.hypot(by);
        let on = ox.hypot(oy);
        if bn == 0.0 || on == 0.0 {
            return self.mis_rad.to_degrees();
        }
        let (cos_m, sin_m) = (self.mis_rad.cos(), self.mis_rad.sin());
        let rx = (bx * cos_m + by * sin_m) / bn;
        let ry = (-bx * sin_m + by * cos_m) / bn;
        let cos_t = (rx * ox + ry * oy) / on;
        cos_t.clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// Co-band interference at the base station of `cell` on cellular
    /// band `j`: every sharing D2D transmitter anywhere, plus the other
    /// cells' users of band `j`.
    pub fn bs_interference(&self, scn: &Scenario, alloc: &Allocation, cell: usize, j: usize) -> f64 {
        let bs = scn.cells[cell].bs;
        let mut total = 0.0;
        for (z, other) in scn.cells.iter().enumerate() {
            for (k, pair) in other.d2d.iter().enumerate() {
                if alloc.get(D2dId { cell: z, pair: k }) == Some(BandRef::Cellular(j)) {
                    total += self.h0_sq * self.g0 * self.gb * self.path(dist(pair.tx, bs)) * self.p_c_w;
                }
            }
            if z != cell {
                total += self.h0_sq * self.g0 * self.gb * self.path(dist(other.users[j], bs)) * self.p_c_w;
            }
        }
        total
    }

    /// Interference at the receiver of a cellular-mode D2D pair: each
    /// cell's user of the shared band plus every other sharing pair.
    pub fn d2d_cellular_interference(&self, scn: &Scenario, alloc: &Allocation, id: D2dId) -> f64 {
        let Some(BandRef::Cellular(j)) = alloc.get(id) else {
            panic!("pair {id} is not on a cellular band");
        };
        let rx = scn.pair(id).rx;
        let mut total = 0.0;
        for (z, cell) in scn.cells.iter().enumerate() {
            total += self.h0_sq * self.g0 * self.g0 * self.path(dist(cell.users[j], rx)) * self.p_c_w;
            for (k, pair) in cell.d2d.iter().enumerate() {
                let other = D2dId { cell: z, pair: k };
                if other != id && alloc.get(other) == Some(BandRef::Cellular(j)) {
                    total += self.h0_sq * self.g0 * self.g0 * self.path(dist(pair.tx, rx)) * self.p_c_w;
                }
            }
        }
        total
    }

    /// Interference at the receiver of a mm-wave pair from every other
    /// pair sharing its band, through both directional patterns.
    pub fn d2d_mmwave_interference(&self, scn: &Scenario, alloc: &Allocation, id: D2dId) -> f64 {
        let Some(BandRef::MmWave(y)) = alloc.get(id) else {
            panic!("pair {id} is not on a mm-wave band");
        };
        let victim = scn.pair(id);
        let mut total = 0.0;
        for (z, cell) in scn.cells.iter().enumerate() {
            for (k, pair) in cell.d2d.iter().enumerate() {
                let other = D2dId { cell: z, pair: k };
                if other == id || alloc.get(other) != Some(BandRef::MmWave(y)) {
                    continue;
                }
                let gt = self.gain(self.off_axis_deg(pair.tx, pair.rx, victim.rx));
                let gr = self.gain(self.off_axis_deg(victim.rx, victim.tx, pair.tx));
                total += self.rho * self.k0 * gt * gr * self.path(dist(pair.tx, victim.rx)) * self.p_m_w;
            }
        }
        total
    }
}

/// Small scenario shapes that cycle with `i`, for batches of varied
/// random instances. At most 3 cells, at most 5 pairs per cell, always
/// at least one mm-wave band.
pub fn varied_config(i: u64) -> CellConfig {
    CellConfig {
        n_cells: 1 + (i % 3) as usize,
        n_cellular_bands: ((i / 2) % 3) as usize,
        n_mmwave_bands: 1 + ((i / 3) % 3) as usize,
        max_d2d_per_cell: 2 + (i % 4) as usize,
        ..CellConfig::default()
    }
}

/// Relative closeness with a floor for values near zero.
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}
