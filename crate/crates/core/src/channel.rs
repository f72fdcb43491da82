//! Link-level radio model: unit conversions, the directional antenna
//! pattern, blockage, interference sums, and per-link SINR/Shannon-rate
//! budgets.
//!
//! Two sub-systems coexist on disjoint spectrum. Cellular uplink bands
//! carry one cellular user per cell plus any D2D pairs sharing the band;
//! those links are omnidirectional (device gain `g0`, base-station gain
//! `gb`) with a flat channel power constant `h0_sq`. Mm-wave bands carry
//! only D2D pairs; both ends use the same directional antenna pattern
//! aimed at their own peer, optionally rotated by a global misalignment
//! angle, and the expected rate is discounted by the line-of-sight
//! blockage probability `1 - exp(-beta * length)`.
//!
//! Band indices are shared across cells, so the interference set of a
//! band spans every cell. Interference sums never include the victim
//! link itself. Path loss is `l^(-alpha)` with distances clamped below
//! by `l_min` so coincident points cannot produce infinite power.

use serde::{Deserialize, Serialize};

use crate::allocation::{Allocation, BandRef};
use crate::scenario::{distance, D2dId, Point2D, Scenario};
use crate::Error;

/// Speed of light in m/s, used to derive the mm-wave wavelength.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Radio constants. Powers are dBm, gains dBi, bandwidths Hz, angles
/// degrees; conversion to linear scale happens once per evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    /// Bandwidth of one mm-wave band, Hz.
    pub w_m: f64,
    /// Bandwidth of one cellular sub-channel, Hz.
    pub w_c: f64,
    /// Mm-wave noise power spectral density, dBm per MHz.
    pub n0_m: f64,
    /// Cellular noise power spectral density, dBm per Hz.
    pub n0_c: f64,
    /// Transmit power of mm-wave D2D transmitters, dBm.
    pub p_m: f64,
    /// Transmit power of cellular users and cellular-mode D2D
    /// transmitters, dBm.
    pub p_c: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Multi-user interference factor scaling mm-wave cross-link
    /// interference; 0 removes it, 1 keeps it in full.
    pub rho: f64,
    /// Half-power beamwidth of the mm-wave antennas, degrees.
    pub theta_3db: f64,
    /// Blockage density, 1/m.
    pub beta: f64,
    /// Device antenna gain on cellular bands, dBi.
    pub g0: f64,
    /// Base-station antenna gain, dBi.
    pub gb: f64,
    /// Cellular channel power constant, linear.
    pub h0_sq: f64,
    /// Mm-wave carrier frequency, Hz.
    pub carrier_mmwave: f64,
    /// Beam misalignment of every mm-wave antenna, degrees, clockwise
    /// positive.
    pub theta_mis: f64,
    /// Lower clamp applied to every path-loss distance, meters.
    pub l_min: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            w_m: 1.08e9,
            w_c: 1.5e4,
            n0_m: -134.0,
            n0_c: -174.0,
            p_m: 20.0,
            p_c: 23.0,
            alpha: 2.0,
            rho: 1.0,
            theta_3db: 30.0,
            beta: 0.01,
            g0: 0.5,
            gb: 14.0,
            h0_sq: 1.0,
            carrier_mmwave: 60e9,
            theta_mis: 0.0,
            l_min: 0.1,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), Error> {
        let finite = [
            ("w_m", self.w_m),
            ("w_c", self.w_c),
            ("n0_m", self.n0_m),
            ("n0_c", self.n0_c),
            ("p_m", self.p_m),
            ("p_c", self.p_c),
            ("alpha", self.alpha),
            ("rho", self.rho),
            ("theta_3db", self.theta_3db),
            ("beta", self.beta),
            ("g0", self.g0),
            ("gb", self.gb),
            ("h0_sq", self.h0_sq),
            ("carrier_mmwave", self.carrier_mmwave),
            ("theta_mis", self.theta_mis),
            ("l_min", self.l_min),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.w_m <= 0.0 || self.w_c <= 0.0 {
            return Err(Error::InvalidParameter("bandwidths must be > 0".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "rho must be in [0, 1], got {}",
                self.rho
            )));
        }
        if !(self.theta_3db > 0.0 && self.theta_3db < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "theta_3db must be in (0, 180) degrees, got {}",
                self.theta_3db
            )));
        }
        if self.beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if self.h0_sq < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "h0_sq must be >= 0, got {}",
                self.h0_sq
            )));
        }
        if self.carrier_mmwave <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "carrier_mmwave must be > 0, got {}",
                self.carrier_mmwave
            )));
        }
        if self.l_min <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "l_min must be > 0, got {}",
                self.l_min
            )));
        }
        Ok(())
    }
}

/// One link's power budget and resulting Shannon rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub signal_w: f64,
    pub interference_w: f64,
    pub noise_w: f64,
    /// `signal_w / (interference_w + noise_w)`, linear.
    pub sinr: f64,
    /// `bandwidth * log2(1 + sinr)` for the band the link occupies.
    pub rate_bps: f64,
}

fn make_budget(signal_w: f64, interference_w: f64, noise_w: f64, bandwidth_hz: f64) -> LinkBudget {
    let sinr = signal_w / (interference_w + noise_w);
    LinkBudget {
        signal_w,
        interference_w,
        noise_w,
        sinr,
        rate_bps: bandwidth_hz * (1.0 + sinr).log2(),
    }
}

/// Converts dBm to Watts.
pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts Watts to dBm.
pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Unit a noise power spectral density is quoted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdUnit {
    Hz,
    MHz,
}

impl PsdUnit {
    fn hz_per_unit(self) -> f64 {
        match self {
            PsdUnit::Hz => 1.0,
            PsdUnit::MHz => 1e6,
        }
    }
}

/// Total noise power in Watts over `bandwidth_hz`, from a spectral
/// density in dBm per `unit`. At unit bandwidth this returns the PSD
/// itself in Watts.
pub fn noise_power(psd_dbm: f64, bandwidth_hz: f64, unit: PsdUnit) -> f64 {
    let bw_units = bandwidth_hz / unit.hz_per_unit();
    dbm_to_watt(psd_dbm + 10.0 * bw_units.log10())
}

fn peak_gain_db(theta_3db_deg: f64) -> f64 {
    let half = (theta_3db_deg / 2.0).to_radians();
    10.0 * (1.6162 / half.sin()).powi(2).log10()
}

fn side_lobe_gain_db(theta_3db_deg: f64) -> f64 {
    -0.4111 * theta_3db_deg.ln() - 10.579
}

/// Folds any angle to the absolute separation in [0, 180] degrees.
fn fold_angle(theta_deg: f64) -> f64 {
    let t = theta_deg.abs() % 360.0;
    if t > 180.0 {
        360.0 - t
    } else {
        t
    }
}

fn gain_db_with(theta_deg: f64, theta_3db: f64, peak_db: f64, side_db: f64) -> f64 {
    let theta = fold_angle(theta_deg);
    // The main lobe spans 2.6 half-power beamwidths; inside it the gain
    // falls off as a parabola in the normalized offset, outside it the
    // side-lobe floor applies.
    if theta <= 1.3 * theta_3db {
        peak_db - 3.01 * (2.0 * theta / theta_3db).powi(2)
    } else {
        side_db
    }
}

/// Directional antenna gain in dB at `theta_deg` off boresight.
///
/// `theta_deg` is an absolute angular separation; values outside
/// [0, 180] are folded. For a 30-degree half-power beamwidth the peak
/// gain is 15.910 dB, the half-power point at 15 degrees is 12.900 dB,
/// and the side-lobe floor is -11.977 dB.
pub fn antenna_gain_db(theta_deg: f64, theta_3db_deg: f64) -> Result<f64, Error> {
    if !(theta_3db_deg.is_finite() && theta_3db_deg > 0.0 && theta_3db_deg < 180.0) {
        return Err(Error::InvalidParameter(format!(
            "theta_3db must be in (0, 180) degrees, got {theta_3db_deg}"
        )));
    }
    Ok(gain_db_with(
        theta_deg,
        theta_3db_deg,
        peak_gain_db(theta_3db_deg),
        side_lobe_gain_db(theta_3db_deg),
    ))
}

/// Absolute angle in [0, 180] degrees between an antenna's boresight and
/// the direction toward `other`.
///
/// The boresight points from `ant_pos` toward `boresight_target`,
/// rotated by `mis_deg` with clockwise positive.
pub fn boresight_angle(
    ant_pos: Point2D,
    boresight_target: Point2D,
    other: Point2D,
    mis_deg: f64,
) -> Result<f64, Error> {
    let bx = boresight_target.x - ant_pos.x;
    let by = boresight_target.y - ant_pos.y;
    let ox = other.x - ant_pos.x;
    let oy = other.y - ant_pos.y;
    if bx == 0.0 && by == 0.0 {
        return Err(Error::DegenerateGeometry(
            "boresight target coincides with the antenna position".into(),
        ));
    }
    if ox == 0.0 && oy == 0.0 {
        return Err(Error::DegenerateGeometry(
            "other point coincides with the antenna position".into(),
        ));
    }
    let boresight = by.atan2(bx) - mis_deg.to_radians();
    let toward = oy.atan2(ox);
    let diff = (toward - boresight).rem_euclid(std::f64::consts::TAU);
    let sep = if diff > std::f64::consts::PI {
        std::f64::consts::TAU - diff
    } else {
        diff
    };
    Ok(sep.to_degrees())
}

/// Probability that the line-of-sight path of a link of `length_m`
/// meters is blocked: `1 - exp(-beta * length)`.
pub fn blockage_prob(length_m: f64, beta: f64) -> f64 {
    debug_assert!(length_m >= 0.0 && beta >= 0.0);
    1.0 - (-beta * length_m).exp()
}

/// Mm-wave path-gain constant `(lambda / 4 pi)^2` at `carrier_hz`.
pub fn k0(carrier_hz: f64) -> f64 {
    debug_assert!(carrier_hz > 0.0);
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    (lambda / (4.0 * std::f64::consts::PI)).powi(2)
}

/// Radio parameters converted to linear scale once, with the antenna
/// pattern's fixed pieces precomputed. Shared by every per-link
/// evaluation of one scenario pass.
pub(crate) struct Lin {
    w_c: f64,
    w_m: f64,
    p_c_w: f64,
    p_m_w: f64,
    g0: f64,
    gb: f64,
    h0_sq: f64,
    noise_c_w: f64,
    noise_m_w: f64,
    k0: f64,
    alpha: f64,
    rho: f64,
    beta: f64,
    l_min: f64,
    theta_mis: f64,
    theta_3db: f64,
    peak_db: f64,
    side_db: f64,
}

impl Lin {
    pub(crate) fn new(p: &RadioParams) -> Result<Lin, Error> {
        p.validate()?;
        Ok(Lin {
            w_c: p.w_c,
            w_m: p.w_m,
            p_c_w: dbm_to_watt(p.p_c),
            p_m_w: dbm_to_watt(p.p_m),
            g0: db_to_linear(p.g0),
            gb: db_to_linear(p.gb),
            h0_sq: p.h0_sq,
            noise_c_w: noise_power(p.n0_c, p.w_c, PsdUnit::Hz),
            noise_m_w: noise_power(p.n0_m, p.w_m, PsdUnit::MHz),
            k0: k0(p.carrier_mmwave),
            alpha: p.alpha,
            rho: p.rho,
            beta: p.beta,
            l_min: p.l_min,
            theta_mis: p.theta_mis,
            theta_3db: p.theta_3db,
            peak_db: peak_gain_db(p.theta_3db),
            side_db: side_lobe_gain_db(p.theta_3db),
        })
    }

    fn path(&self, l: f64) -> f64 {
        l.max(self.l_min).powf(-self.alpha)
    }

    fn gain_lin(&self, theta_deg: f64) -> f64 {
        db_to_linear(gain_db_with(theta_deg, self.theta_3db, self.peak_db, self.side_db))
    }

    /// Linear gain of an antenna at `ant` aimed at `boresight_target`
    /// (plus the global misalignment), evaluated toward `other`.
    /// Coincident points leave the direction undefined; such antennas
    /// are treated as aligned up to the misalignment angle.
    fn gain_toward(&self, ant: Point2D, boresight_target: Point2D, other: Point2D) -> f64 {
        match boresight_angle(ant, boresight_target, other, self.theta_mis) {
            Ok(theta) => self.gain_lin(theta),
            Err(_) => self.gain_lin(self.theta_mis),
        }
    }
}

fn band_of(scn: &Scenario, alloc: &Allocation, id: D2dId) -> Result<BandRef, Error> {
    debug_assert!(scn.contains(id));
    alloc.get(id).ok_or(Error::Unassigned {
        cell: id.cell,
        pair: id.pair,
    })
}

fn cellular_band_in_range(scn: &Scenario, band: usize) -> Result<(), Error> {
    if band >= scn.config.n_cellular_bands {
        return Err(Error::BandOutOfRange {
            band: BandRef::Cellular(band).to_string(),
            n_cellular: scn.config.n_cellular_bands,
            n_mmwave: scn.config.n_mmwave_bands,
        });
    }
    Ok(())
}

/// Interference power in Watts at cell `cell`'s base station on cellular
/// band `band`: every D2D transmitter sharing the band (any cell) plus
/// the other cells' cellular users on it.
pub fn cellular_interference_at_bs(
    scn: &Scenario,
    alloc: &Allocation,
    cell: usize,
    band: usize,
    params: &RadioParams,
) -> Result<f64, Error> {
    let lin = Lin::new(params)?;
    cellular_interference_at_bs_lin(scn, alloc, cell, band, &lin)
}

pub(crate) fn cellular_interference_at_bs_lin(
    scn: &Scenario,
    alloc: &Allocation,
    cell: usize,
    band: usize,
    lin: &Lin,
) -> Result<f64, Error> {
    cellular_band_in_range(scn, band)?;
    let bs = scn.cells[cell].bs;
    let target = BandRef::Cellular(band);
    let mut sum = 0.0;
    for (z, other) in scn.cells.iter().enumerate() {
        for (k, pair) in other.d2d.iter().enumerate() {
            let id = D2dId { cell: z, pair: k };
            if band_of(scn, alloc, id)? == target {
                sum += lin.h0_sq * lin.g0 * lin.gb * lin.path(distance(pair.tx, bs)) * lin.p_c_w;
            }
        }
        if z != cell {
            sum += lin.h0_sq
                * lin.g0
                * lin.gb
                * lin.path(distance(other.users[band], bs))
                * lin.p_c_w;
        }
    }
    Ok(sum)
}

/// Budget of cellular user `band` in `cell` (user `j` owns sub-channel
/// `j`): uplink to its own base station against the co-band
/// interference.
pub fn cellular_user_rate(
    scn: &Scenario,
    alloc: &Allocation,
    cell: usize,
    band: usize,
    params: &RadioParams,
) -> Result<LinkBudget, Error> {
    let lin = Lin::new(params)?;
    cellular_user_rate_lin(scn, alloc, cell, band, &lin)
}

pub(crate) fn cellular_user_rate_lin(
    scn: &Scenario,
    alloc: &Allocation,
    cell: usize,
    band: usize,
    lin: &Lin,
) -> Result<LinkBudget, Error> {
    cellular_band_in_range(scn, band)?;
    let c = &scn.cells[cell];
    let signal = lin.h0_sq * lin.g0 * lin.gb * lin.path(distance(c.users[band], c.bs)) * lin.p_c_w;
    let interference = cellular_interference_at_bs_lin(scn, alloc, cell, band, lin)?;
    Ok(make_budget(signal, interference, lin.noise_c_w, lin.w_c))
}

fn expect_cellular(scn: &Scenario, alloc: &Allocation, id: D2dId) -> Result<usize, Error> {
    match band_of(scn, alloc, id)? {
        BandRef::Cellular(j) => Ok(j),
        other @ BandRef::MmWave(_) => Err(Error::WrongMode {
            cell: id.cell,
            pair: id.pair,
            expected: "cellular",
            actual: other.to_string(),
        }),
    }
}

fn expect_mmwave(scn: &Scenario, alloc: &Allocation, id: D2dId) -> Result<usize, Error> {
    match band_of(scn, alloc, id)? {
        BandRef::MmWave(y) => Ok(y),
        other @ BandRef::Cellular(_) => Err(Error::WrongMode {
            cell: id.cell,
            pair: id.pair,
            expected: "mm-wave",
            actual: other.to_string(),
        }),
    }
}

/// Interference power in Watts at the receiver of a cellular-mode D2D
/// pair: the co-band cellular user of every cell plus every other
/// co-band D2D transmitter.
pub fn d2d_cellular_interference(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    params: &RadioParams,
) -> Result<f64, Error> {
    let lin = Lin::new(params)?;
    d2d_cellular_interference_lin(scn, alloc, id, &lin)
}

pub(crate) fn d2d_cellular_interference_lin(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    lin: &Lin,
) -> Result<f64, Error> {
    let band = expect_cellular(scn, alloc, id)?;
    let rx = scn.pair(id).rx;
    let target = BandRef::Cellular(band);
    let mut sum = 0.0;
    for (z, cell) in scn.cells.iter().enumerate() {
        sum += lin.h0_sq * lin.g0 * lin.g0 * lin.path(distance(cell.users[band], rx)) * lin.p_c_w;
        for (k, pair) in cell.d2d.iter().enumerate() {
            let other = D2dId { cell: z, pair: k };
            if other == id {
                continue;
            }
            if band_of(scn, alloc, other)? == target {
                sum += lin.h0_sq * lin.g0 * lin.g0 * lin.path(distance(pair.tx, rx)) * lin.p_c_w;
            }
        }
    }
    Ok(sum)
}

/// Budget of a D2D pair sharing a cellular band: device-to-device link
/// with omnidirectional gains on both ends.
pub fn d2d_cellular_rate(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    params: &RadioParams,
) -> Result<LinkBudget, Error> {
    let lin = Lin::new(params)?;
    d2d_cellular_rate_lin(scn, alloc, id, &lin)
}

pub(crate) fn d2d_cellular_rate_lin(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    lin: &Lin,
) -> Result<LinkBudget, Error> {
    let interference = d2d_cellular_interference_lin(scn, alloc, id, lin)?;
    let pair = scn.pair(id);
    let signal = lin.h0_sq * lin.g0 * lin.g0 * lin.path(pair.length()) * lin.p_c_w;
    Ok(make_budget(signal, interference, lin.noise_c_w, lin.w_c))
}

/// Interference power in Watts at the receiver of a mm-wave D2D pair
/// from every other co-band pair, through both ends' directional
/// patterns and scaled by the multi-user interference factor.
pub fn d2d_mmwave_interference(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    params: &RadioParams,
) -> Result<f64, Error> {
    let lin = Lin::new(params)?;
    d2d_mmwave_interference_lin(scn, alloc, id, &lin)
}

pub(crate) fn d2d_mmwave_interference_lin(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    lin: &Lin,
) -> Result<f64, Error> {
    let band = expect_mmwave(scn, alloc, id)?;
    let victim = scn.pair(id);
    let target = BandRef::MmWave(band);
    let mut sum = 0.0;
    for (z, cell) in scn.cells.iter().enumerate() {
        for (k, pair) in cell.d2d.iter().enumerate() {
            let other = D2dId { cell: z, pair: k };
            if other == id {
                continue;
            }
            if band_of(scn, alloc, other)? == target {
                let gt = lin.gain_toward(pair.tx, pair.rx, victim.rx);
                let gr = lin.gain_toward(victim.rx, victim.tx, pair.tx);
                sum += lin.rho
                    * lin.k0
                    * gt
                    * gr
                    * lin.path(distance(pair.tx, victim.rx))
                    * lin.p_m_w;
            }
        }
    }
    Ok(sum)
}

/// Budget of a mm-wave D2D pair plus its blockage probability.
///
/// Both ends aim at each other, so the useful link sees each antenna at
/// exactly the misalignment angle. The returned rate is the unblocked
/// Shannon rate; the expected rate applies `1 - p_out` on top (see
/// [`d2d_rate`]).
pub fn d2d_mmwave_rate(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    params: &RadioParams,
) -> Result<(LinkBudget, f64), Error> {
    let lin = Lin::new(params)?;
    d2d_mmwave_rate_lin(scn, alloc, id, &lin)
}

pub(crate) fn d2d_mmwave_rate_lin(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    lin: &Lin,
) -> Result<(LinkBudget, f64), Error> {
    let interference = d2d_mmwave_interference_lin(scn, alloc, id, lin)?;
    let pair = scn.pair(id);
    let aligned = lin.gain_lin(lin.theta_mis);
    let signal = lin.k0 * aligned * aligned * lin.path(pair.length()) * lin.p_m_w;
    let budget = make_budget(signal, interference, lin.noise_m_w, lin.w_m);
    let p_out = blockage_prob(pair.length(), lin.beta);
    Ok((budget, p_out))
}

/// Expected rate of a D2D pair under its current assignment: the
/// cellular-mode rate as-is, or the mm-wave rate discounted by the
/// blockage probability.
pub fn d2d_rate(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    params: &RadioParams,
) -> Result<f64, Error> {
    let lin = Lin::new(params)?;
    d2d_rate_lin(scn, alloc, id, &lin)
}

pub(crate) fn d2d_rate_lin(
    scn: &Scenario,
    alloc: &Allocation,
    id: D2dId,
    lin: &Lin,
) -> Result<f64, Error> {
    match band_of(scn, alloc, id)? {
        BandRef::Cellular(_) => Ok(d2d_cellular_rate_lin(scn, alloc, id, lin)?.rate_bps),
        BandRef::MmWave(_) => {
            let (budget, p_out) = d2d_mmwave_rate_lin(scn, alloc, id, lin)?;
            Ok((1.0 - p_out) * budget.rate_bps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Cell, CellConfig, D2dPair};

    fn rel_eq(a: f64, b: f64, tol: f64) {
        let scale = a.abs().max(b.abs()).max(1e-300);
        assert!(
            (a - b).abs() <= tol * scale,
            "relative mismatch: {a} vs {b}"
        );
    }

    /// One cell with its BS at the origin. Band counts follow from the
    /// user list and `n_m`.
    fn one_cell(users: Vec<Point2D>, d2d: Vec<D2dPair>, n_m: usize) -> Scenario {
        let config = CellConfig {
            n_cells: 1,
            n_cellular_bands: users.len(),
            n_mmwave_bands: n_m,
            max_d2d_per_cell: d2d.len(),
            ..CellConfig::default()
        };
        Scenario {
            seed: 0,
            config,
            cells: vec![Cell {
                bs: Point2D::new(0.0, 0.0),
                users,
                d2d,
            }],
        }
    }

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    #[test]
    fn dbm_anchors() {
        assert_eq!(dbm_to_watt(30.0), 1.0);
        rel_eq(dbm_to_watt(20.0), 0.1, 1e-15);
        rel_eq(dbm_to_watt(23.0), 0.199_526_231_496_887_96, 1e-15);
        rel_eq(watt_to_dbm(1.0), 30.0, 1e-15);
        rel_eq(watt_to_dbm(dbm_to_watt(-92.5)), -92.5, 1e-12);
    }

    #[test]
    fn noise_power_values() {
        // Cellular floor: -174 dBm/Hz over 15 kHz.
        let w = noise_power(-174.0, 1.5e4, PsdUnit::Hz);
        rel_eq(w, 5.971_607_558_302_459e-17, 1e-12);
        assert!((watt_to_dbm(w) - -132.239_087_409_443_2).abs() < 1e-9);
        // Mm-wave floor: -134 dBm/MHz over 1080 MHz.
        let w = noise_power(-134.0, 1.08e9, PsdUnit::MHz);
        rel_eq(w, 4.299_557_441_977_77e-14, 1e-12);
        assert!((watt_to_dbm(w) - -103.665_762_445_130_5).abs() < 1e-9);
    }

    #[test]
    fn noise_power_unit_bandwidth_returns_psd() {
        rel_eq(noise_power(-174.0, 1.0, PsdUnit::Hz), dbm_to_watt(-174.0), 1e-15);
        rel_eq(noise_power(-100.0, 1e6, PsdUnit::MHz), dbm_to_watt(-100.0), 1e-15);
        assert_eq!(noise_power(-174.0, 0.0, PsdUnit::Hz), 0.0);
    }

    #[test]
    fn antenna_gain_spot_values() {
        // 30-digit reference evaluation of the pattern at 30 degrees
        // half-power beamwidth.
        let g = antenna_gain_db(0.0, 30.0).unwrap();
        rel_eq(g, 15.909_977_437_209_966, 1e-12);
        let g = antenna_gain_db(15.0, 30.0).unwrap();
        rel_eq(g, 12.899_977_437_209_966, 1e-12);
        assert!((g - (antenna_gain_db(0.0, 30.0).unwrap() - 3.01)).abs() < 1e-12);
        let g = antenna_gain_db(90.0, 30.0).unwrap();
        rel_eq(g, -11.977_232_243_601_312, 1e-12);
        let g = antenna_gain_db(10.0, 30.0).unwrap();
        rel_eq(g, 14.572_199_659_432_188, 1e-12);
        let g = antenna_gain_db(0.0, 60.0).unwrap();
        rel_eq(g, 10.190_501_961_876_372, 1e-12);
    }

    #[test]
    fn antenna_gain_main_lobe_edge() {
        // Main lobe reaches 1.3 beamwidths off boresight; just past it
        // the side-lobe floor applies.
        let edge = antenna_gain_db(39.0, 30.0).unwrap();
        rel_eq(edge, -4.437_622_562_790_034, 1e-12);
        let past = antenna_gain_db(39.0 + 1e-9, 30.0).unwrap();
        rel_eq(past, -11.977_232_243_601_312, 1e-12);
    }

    #[test]
    fn antenna_gain_folds_angles() {
        let a = antenna_gain_db(15.0, 30.0).unwrap();
        assert_eq!(antenna_gain_db(-15.0, 30.0).unwrap(), a);
        assert_eq!(antenna_gain_db(345.0, 30.0).unwrap(), a);
        assert_eq!(
            antenna_gain_db(200.0, 30.0).unwrap(),
            antenna_gain_db(160.0, 30.0).unwrap()
        );
    }

    #[test]
    fn antenna_gain_decreases_across_main_lobe() {
        let mut prev = antenna_gain_db(0.0, 30.0).unwrap();
        for i in 1..=39 {
            let g = antenna_gain_db(i as f64, 30.0).unwrap();
            assert!(g < prev, "gain rose at {i} degrees");
            prev = g;
        }
    }

    #[test]
    fn antenna_gain_rejects_bad_beamwidth() {
        assert!(antenna_gain_db(0.0, 0.0).is_err());
        assert!(antenna_gain_db(0.0, 180.0).is_err());
        assert!(antenna_gain_db(0.0, -30.0).is_err());
        assert!(antenna_gain_db(0.0, f64::NAN).is_err());
    }

    #[test]
    fn boresight_angle_cases() {
        let o = p(0.0, 0.0);
        assert!(boresight_angle(o, p(1.0, 0.0), p(1.0, 0.0), 0.0).unwrap().abs() < 1e-12);
        let g = boresight_angle(o, p(1.0, 0.0), p(0.0, 1.0), 0.0).unwrap();
        assert!((g - 90.0).abs() < 1e-12);
        let g = boresight_angle(o, p(1.0, 0.0), p(1.0, 1.0), 0.0).unwrap();
        assert!((g - 45.0).abs() < 1e-12);
        // Clockwise-positive misalignment swings the boresight away from
        // a counterclockwise target.
        let g = boresight_angle(o, p(1.0, 0.0), p(1.0, 1.0), 45.0).unwrap();
        assert!((g - 90.0).abs() < 1e-12);
        let g = boresight_angle(o, p(1.0, 0.0), p(1.0, 1.0), -45.0).unwrap();
        assert!(g.abs() < 1e-12);
        // Separation folds onto [0, 180].
        let g = boresight_angle(o, p(1.0, 0.0), p(-1.0, -1e-6), 0.0).unwrap();
        assert!(g <= 180.0 && g > 179.0);
    }

    #[test]
    fn boresight_angle_rejects_coincident_points() {
        let o = p(2.0, 3.0);
        assert!(boresight_angle(o, o, p(1.0, 0.0), 0.0).is_err());
        assert!(boresight_angle(o, p(1.0, 0.0), o, 0.0).is_err());
    }

    #[test]
    fn blockage_values() {
        assert_eq!(blockage_prob(0.0, 0.01), 0.0);
        assert_eq!(blockage_prob(17.0, 0.0), 0.0);
        rel_eq(blockage_prob(20.0, 0.01), 0.181_269_246_922_018_14, 1e-12);
        rel_eq(blockage_prob(10.0, 0.01), 0.095_162_581_964_040_43, 1e-12);
        assert!(blockage_prob(1e6, 0.01) > 0.999_999);
        assert!(blockage_prob(5.0, 0.01) < blockage_prob(6.0, 0.01));
    }

    #[test]
    fn k0_values() {
        rel_eq(k0(60e9), 1.580_953_793_650_958_5e-7, 1e-12);
        // Halving the carrier doubles the wavelength: exactly 4x.
        assert_eq!(k0(30e9), 4.0 * k0(60e9));
        // Unit-gain construction: lambda equal to 4 pi.
        let carrier = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI);
        assert!((k0(carrier) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bs_interference_empty_band_is_zero() {
        let mut alloc = Allocation::new();
        let scn = one_cell(
            vec![p(1.0, 0.0)],
            vec![D2dPair { tx: p(10.0, 0.0), rx: p(10.0, 1.0) }],
            1,
        );
        alloc.assign(D2dId { cell: 0, pair: 0 }, BandRef::MmWave(0));
        let i = cellular_interference_at_bs(&scn, &alloc, 0, 0, &RadioParams::default()).unwrap();
        assert_eq!(i, 0.0);
    }

    #[test]
    fn bs_interference_single_term() {
        let mut alloc = Allocation::new();
        let scn = one_cell(
            vec![p(1.0, 0.0)],
            vec![D2dPair { tx: p(10.0, 0.0), rx: p(10.0, 1.0) }],
            1,
        );
        alloc.assign(D2dId { cell: 0, pair: 0 }, BandRef::Cellular(0));
        let i = cellular_interference_at_bs(&scn, &alloc, 0, 0, &RadioParams::default()).unwrap();
        // h0 * g0 * gb * 10^-2 * p_c with the default constants,
        // evaluated independently at 30 digits.
        rel_eq(i, 0.056_234_132_519_034_91, 1e-12);
    }

    #[test]
    fn bs_interference_rejects_out_of_range_band() {
        let scn = one_cell(vec![p(1.0, 0.0)], vec![], 1);
        let alloc = Allocation::new();
        let r = cellular_interference_at_bs(&scn, &alloc, 0, 5, &RadioParams::default());
        assert!(matches!(r, Err(Error::BandOutOfRange { .. })));
    }

    #[test]
    fn cellular_user_rate_interference_free() {
        let scn = one_cell(vec![p(1.0, 0.0)], vec![], 1);
        let alloc = Allocation::new();
        let b = cellular_user_rate(&scn, &alloc, 0, 0, &RadioParams::default()).unwrap();
        assert_eq!(b.interference_w, 0.0);
        rel_eq(b.sinr, 9.416_916_964_151_695e16, 1e-12);
        rel_eq(b.rate_bps, 845_791.564_898_956_6, 1e-12);
    }

    #[test]
    fn vanishing_power_gives_zero_rate() {
        let scn = one_cell(vec![p(1.0, 0.0)], vec![], 1);
        let alloc = Allocation::new();
        let params = RadioParams { p_c: -300.0, ..RadioParams::default() };
        let b = cellular_user_rate(&scn, &alloc, 0, 0, &params).unwrap();
        assert!(b.rate_bps < 1e-9, "rate {} not vanishing", b.rate_bps);
        // Below the noise floor by enough that 1 + sinr rounds to 1.
        let params = RadioParams { p_c: -320.0, ..RadioParams::default() };
        let b = cellular_user_rate(&scn, &alloc, 0, 0, &params).unwrap();
        assert_eq!(b.rate_bps, 0.0);
    }

    #[test]
    fn added_interferer_strictly_lowers_rate() {
        let users = vec![p(1.0, 0.0)];
        let pair = |x: f64| D2dPair { tx: p(x, 0.0), rx: p(x, 1.0) };
        let one = one_cell(users.clone(), vec![pair(10.0)], 1);
        let two = one_cell(users, vec![pair(10.0), pair(-10.0)], 1);
        let mut alloc1 = Allocation::new();
        alloc1.assign(D2dId { cell: 0, pair: 0 }, BandRef::Cellular(0));
        let mut alloc2 = alloc1.clone();
        alloc2.assign(D2dId { cell: 0, pair: 1 }, BandRef::Cellular(0));
        let params = RadioParams::default();
        let r1 = cellular_user_rate(&one, &alloc1, 0, 0, &params).unwrap();
        let r2 = cellular_user_rate(&two, &alloc2, 0, 0, &params).unwrap();
        assert!(r2.interference_w > r1.interference_w);
        assert!(r2.rate_bps < r1.rate_bps);
    }

    #[test]
    fn d2d_cellular_interference_single_user_term() {
        // Victim rx at (0,4); the band's own cellular user at (3,0) is
        // the only interferer, 5 m away: g0^2 * 5^-2 * p_c.
        let scn = one_cell(
            vec![p(3.0, 0.0)],
            vec![D2dPair { tx: p(0.0, 5.0), rx: p(0.0, 4.0) }],
            1,
        );
        let mut alloc = Allocation::new();
        alloc.assign(D2dId { cell: 0, pair: 0 }, BandRef::Cellular(0));
        let i = d2d_cellular_interference(&scn, &alloc, D2dId { cell: 0, pair: 0 }, &RadioParams::default())
            .unwrap();
        rel_eq(i, 0.010_047_545_726_038_32, 1e-12);
    }

    #[test]
    fn d2d_cellular_rate_full_budget() {
        // 5 m link, one co-band cellular user sqrt(10) m from the rx.
        let scn = one_cell(
            vec![p(3.0, 0.0)],
            vec![D2dPair { tx: p(0.0, 6.0), rx: p(0.0, 1.0) }],
            1,
        );
        let mut alloc = Allocation::new();
        let id = D2dId { cell: 0, pair: 0 };
        alloc.assign(id, BandRef::Cellular(0));
        let b = d2d_cellular_rate(&scn, &alloc, id, &RadioParams::default()).unwrap();
        rel_eq(b.signal_w, 0.010_047_545_726_038_32, 1e-12);
        rel_eq(b.interference_w, 0.025_118_864_315_095_8, 1e-12);
        let sinr = b.signal_w / (b.interference_w + b.noise_w);
        assert_eq!(b.sinr, sinr);
        rel_eq(b.rate_bps, 1.5e4 * (1.0 + sinr).log2(), 1e-15);
    }

    #[test]
    fn mmwave_lone_pair_matches_reference() {
        let scn = one_cell(
            vec![p(1.0, 0.0)],
            vec![D2dPair { tx: p(0.0, 0.0), rx: p(10.0, 0.0) }],
            1,
        );
        let mut alloc = Allocation::new();
        let id = D2dId { cell: 0, pair: 0 };
        alloc.assign(id, BandRef::MmWave(0));
        let params = RadioParams::default();
        let (b, p_out) = d2d_mmwave_rate(&scn, &alloc, id, &params).unwrap();
        assert_eq!(b.interference_w, 0.0);
        rel_eq(b.signal_w, 2.403_890_407_686_83e-7, 1e-12);
        rel_eq(b.sinr, 5_591_018.238_800_538, 1e-12);
        rel_eq(b.rate_bps, 24_207_854_268.931_406, 1e-12);
        rel_eq(p_out, 0.095_162_581_964_040_43, 1e-12);
        let expected = d2d_rate(&scn, &alloc, id, &params).unwrap();
        rel_eq(expected, 21_904_172_352.890_675, 1e-12);
    }

    #[test]
    fn mmwave_mui_factor_zero_removes_interference() {
        let scn = one_cell(
            vec![p(1.0, 0.0)],
            vec![
                D2dPair { tx: p(0.0, 0.0), rx: p(5.0, 0.0) },
                D2dPair { tx: p(0.0, 3.0), rx: p(5.0, 3.0) },
            ],
            1,
        );
        let mut alloc = Allocation::new();
        alloc.assign(D2dId { cell: 0, pair: 0 }, BandRef::MmWave(0));
        alloc.assign(D2dId { cell: 0, pair: 1 }, BandRef::MmWave(0));
        let mut params = RadioParams::default();
        let with = d2d_mmwave_interference(&scn, &alloc, D2dId { cell: 0, pair: 0 }, &params).unwrap();
        assert!(with > 0.0);
        params.rho = 0.0;
        let without = d2d_mmwave_interference(&scn, &alloc, D2dId { cell: 0, pair: 0 }, &params).unwrap();
        assert_eq!(without, 0.0);
    }

    #[test]
    fn co_band_pairs_symmetric_about_center_have_equal_rates() {
        let a = D2dPair { tx: p(-5.0, 0.0), rx: p(-5.0, 1.0) };
        let b = D2dPair { tx: p(5.0, 0.0), rx: p(5.0, -1.0) };
        let scn = one_cell(vec![p(1.0, 0.0)], vec![a, b], 1);
        let mut alloc = Allocation::new();
        alloc.assign(D2dId { cell: 0, pair: 0 }, BandRef::MmWave(0));
        alloc.assign(D2dId { cell: 0, pair: 1 }, BandRef::MmWave(0));
        let params = RadioParams::default();
        let (ba, _) = d2d_mmwave_rate(&scn, &alloc, D2dId { cell: 0, pair: 0 }, &params).unwrap();
        let (bb, _) = d2d_mmwave_rate(&scn, &alloc, D2dId { cell: 0, pair: 1 }, &params).unwrap();
        rel_eq(ba.signal_w, bb.signal_w, 1e-14);
        rel_eq(ba.interference_w, bb.interference_w, 1e-12);
        rel_eq(ba.rate_bps, bb.rate_bps, 1e-12);
    }

    #[test]
    fn misalignment_costs_the_pattern_rolloff_twice() {
        let scn = one_cell(
            vec![p(1.0, 0.0)],
            vec![D2dPair { tx: p(0.0, 0.0), rx: p(10.0, 0.0) }],
            1,
        );
        let mut alloc = Allocation::new();
        let id = D2dId { cell: 0, pair: 0 };
        alloc.assign(id, BandRef::MmWave(0));
        let aligned = d2d_mmwave_rate(&scn, &alloc, id, &RadioParams::default()).unwrap().0;
        let mut params = RadioParams { theta_mis: 15.0, ..RadioParams::default() };
        let skewed = d2d_mmwave_rate(&scn, &alloc, id, &params).unwrap().0;
        // Both ends sit at the half-power point: 2 * 3.01 dB down.
        rel_eq(skewed.signal_w / aligned.signal_w, 10f64.powf(-0.602), 1e-12);
        params.theta_mis = -15.0;
        let mirrored = d2d_mmwave_rate(&scn, &alloc, id, &params).unwrap().0;
        assert_eq!(mirrored.signal_w, skewed.signal_w);
    }

    #[test]
    fn mode_and_assignment_errors() {
        let scn = one_cell(
            vec![p(1.0, 0.0)],
            vec![D2dPair { tx: p(0.0, 0.0), rx: p(10.0, 0.0) }],
            1,
        );
        let id = D2dId { cell: 0, pair: 0 };
        let params = RadioParams::default();
        let empty = Allocation::new();
        assert!(matches!(
            d2d_rate(&scn, &empty, id, &params),
            Err(Error::Unassigned { .. })
        ));
        let mut mm = Allocation::new();
        mm.assign(id, BandRef::MmWave(0));
        assert!(matches!(
            d2d_cellular_rate(&scn, &mm, id, &params),
            Err(Error::WrongMode { .. })
        ));
        let mut cel = Allocation::new();
        cel.assign(id, BandRef::Cellular(0));
        assert!(matches!(
            d2d_mmwave_rate(&scn, &cel, id, &params),
            Err(Error::WrongMode { .. })
        ));
    }

    #[test]
    fn coincident_endpoints_use_clamped_distance_and_stay_finite() {
        let spot = p(3.0, 3.0);
        let scn = one_cell(vec![p(1.0, 0.0)], vec![D2dPair { tx: spot, rx: spot }], 1);
        let mut alloc = Allocation::new();
        let id = D2dId { cell: 0, pair: 0 };
        alloc.assign(id, BandRef::MmWave(0));
        let (b, p_out) = d2d_mmwave_rate(&scn, &alloc, id, &RadioParams::default()).unwrap();
        assert!(b.signal_w.is_finite() && b.rate_bps.is_finite());
        assert_eq!(p_out, 0.0);
    }

    #[test]
    fn rejects_invalid_params() {
        let bad = RadioParams { rho: 1.5, ..RadioParams::default() };
        assert!(bad.validate().is_err());
        let bad = RadioParams { alpha: 0.0, ..RadioParams::default() };
        assert!(bad.validate().is_err());
        let bad = RadioParams { theta_3db: 200.0, ..RadioParams::default() };
        assert!(bad.validate().is_err());
        let bad = RadioParams { w_c: 0.0, ..RadioParams::default() };
        assert!(bad.validate().is_err());
        let bad = RadioParams { l_min: 0.0, ..RadioParams::default() };
        assert!(bad.validate().is_err());
        assert!(RadioParams::default().validate().is_ok());
    }
}
