//! Allocation strategies: a stochastic two-phase local search, an
//! exhaustive optimal search for small instances, and fixed baselines.
//!
//! The local search starts from a random all-mm-wave assignment. Phase
//! one visits pairs cyclically in label order and offers each a single
//! random alternative mm-wave band, accepting only strict system-rate
//! improvements. Phase two offers each pair still on mm-wave a single
//! random cellular band under the same acceptance rule; a pair that
//! takes a cellular band is never revisited. Each phase stops after
//! `stall_limit` consecutive rejections, so the run length adapts to
//! how much improvement is left.
//!
//! Every random draw comes from a named stream of the pinned RNG (see
//! [`crate::rng`]), which makes runs reproducible and lets the
//! all-mm-wave baseline share the heuristic's exact starting point.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::allocation::{delta_if_moved_lin, system_rate_lin, Allocation, BandRef};
use crate::channel::{Lin, RadioParams};
use crate::rng::{self, STREAM_HCN, STREAM_PHASE1, STREAM_PHASE2, STREAM_SOLVER_INIT};
use crate::scenario::{D2dId, Scenario};
use crate::Error;

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub allocation: Allocation,
    /// System rate of the final allocation, bps.
    pub rate_bps: f64,
    /// Candidate moves examined in phase one. The exhaustive search
    /// reports its evaluation count here.
    pub iterations_phase1: u64,
    /// Candidate moves examined in phase two.
    pub iterations_phase2: u64,
    /// Accepted moves across both phases.
    pub switches: u64,
}

impl SolverResult {
    pub fn iterations(&self) -> u64 {
        self.iterations_phase1 + self.iterations_phase2
    }
}

/// Knobs of the two-phase local search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicConfig {
    /// Consecutive rejected candidates that end a phase.
    pub stall_limit: u64,
    /// Seed shared by the initializer and both phases, each on its own
    /// stream.
    pub rng_seed: u64,
    /// Hard per-phase cap on candidate evaluations.
    pub max_iterations_per_phase: u64,
}

impl HeuristicConfig {
    /// Defaults for `scn`: the stall limit equals the number of D2D
    /// pairs, so on average every pair gets a look between accepts.
    pub fn for_scenario(scn: &Scenario, seed: u64) -> HeuristicConfig {
        HeuristicConfig {
            stall_limit: (scn.d2d_count() as u64).max(1),
            rng_seed: seed,
            max_iterations_per_phase: 1_000_000,
        }
    }
}

/// Rates observed while the local search ran: the starting rate and the
/// system rate after each accepted move.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicTrace {
    pub initial_rate: f64,
    pub accepted_rates: Vec<f64>,
}

/// Random starting allocation: every pair on a uniform random mm-wave
/// band, one draw per pair in label order. Without mm-wave bands the
/// pairs fall back to uniform random cellular bands.
pub fn initial_allocation(scn: &Scenario, rng: &mut ChaCha8Rng) -> Result<Allocation, Error> {
    let n_c = scn.config.n_cellular_bands;
    let n_m = scn.config.n_mmwave_bands;
    let mut alloc = Allocation::new();
    for id in scn.d2d_ids() {
        let band = if n_m > 0 {
            BandRef::MmWave(rng.gen_range(0..n_m))
        } else if n_c > 0 {
            BandRef::Cellular(rng.gen_range(0..n_c))
        } else {
            return Err(Error::InvalidConfig(
                "scenario has D2D pairs but no bands".into(),
            ));
        };
        alloc.assign(id, band);
    }
    Ok(alloc)
}

/// Runs the two-phase local search.
pub fn heuristic_allocate(
    scn: &Scenario,
    params: &RadioParams,
    config: &HeuristicConfig,
) -> Result<SolverResult, Error> {
    let lin = Lin::new(params)?;
    run_heuristic(scn, &lin, config, None)
}

/// Like [`heuristic_allocate`] but also records the system rate at the
/// start and after every accepted move. Draws identical random numbers,
/// so the result matches the untraced run exactly.
pub fn heuristic_allocate_traced(
    scn: &Scenario,
    params: &RadioParams,
    config: &HeuristicConfig,
) -> Result<(SolverResult, HeuristicTrace), Error> {
    let lin = Lin::new(params)?;
    let mut trace = HeuristicTrace {
        initial_rate: 0.0,
        accepted_rates: Vec::new(),
    };
    let result = run_heuristic(scn, &lin, config, Some(&mut trace))?;
    Ok((result, trace))
}

fn run_heuristic(
    scn: &Scenario,
    lin: &Lin,
    config: &HeuristicConfig,
    mut trace: Option<&mut HeuristicTrace>,
) -> Result<SolverResult, Error> {
    let n_c = scn.config.n_cellular_bands;
    let n_m = scn.config.n_mmwave_bands;
    let ids = scn.d2d_ids();
    let stall_limit = config.stall_limit.max(1);

    let mut init_rng = rng::stream(config.rng_seed, STREAM_SOLVER_INIT);
    let mut alloc = initial_allocation(scn, &mut init_rng)?;
    if let Some(t) = trace.as_deref_mut() {
        t.initial_rate = system_rate_lin(scn, &alloc, lin)?;
    }

    let mut switches = 0u64;
    let mut iterations_phase1 = 0u64;

    // Phase one needs at least two mm-wave bands to have an alternative
    // to offer.
    if n_m >= 2 && !ids.is_empty() {
        let mut rng = rng::stream(config.rng_seed, STREAM_PHASE1);
        let mut stalled = 0u64;
        let mut idx = 0usize;
        while stalled < stall_limit && iterations_phase1 < config.max_iterations_per_phase {
            let id = ids[idx];
            idx = (idx + 1) % ids.len();
            iterations_phase1 += 1;
            let current = match alloc.band_of(id)? {
                BandRef::MmWave(y) => y,
                // Pairs stay on mm-wave throughout this phase.
                BandRef::Cellular(_) => unreachable!("phase one visited a cellular pair"),
            };
            // Uniform draw over the other mm-wave bands.
            let mut candidate = rng.gen_range(0..n_m - 1);
            if candidate >= current {
                candidate += 1;
            }
            let to = BandRef::MmWave(candidate);
            if delta_if_moved_lin(scn, &alloc, id, to, lin)? > 0.0 {
                alloc.assign(id, to);
                switches += 1;
                stalled = 0;
                if let Some(t) = trace.as_deref_mut() {
                    t.accepted_rates.push(system_rate_lin(scn, &alloc, lin)?);
                }
            } else {
                stalled += 1;
            }
        }
    }

    let mut iterations_phase2 = 0u64;
    if n_c >= 1 && !ids.is_empty() {
        let mut rng = rng::stream(config.rng_seed, STREAM_PHASE2);
        let mut eligible: Vec<D2dId> = ids
            .iter()
            .copied()
            .filter(|id| alloc.get(*id).is_some_and(BandRef::is_mmwave))
            .collect();
        let mut stalled = 0u64;
        let mut idx = 0usize;
        while stalled < stall_limit
            && iterations_phase2 < config.max_iterations_per_phase
            && !eligible.is_empty()
        {
            if idx >= eligible.len() {
                idx = 0;
            }
            let id = eligible[idx];
            iterations_phase2 += 1;
            let to = BandRef::Cellular(rng.gen_range(0..n_c));
            if delta_if_moved_lin(scn, &alloc, id, to, lin)? > 0.0 {
                alloc.assign(id, to);
                switches += 1;
                stalled = 0;
                // The pair has left mm-wave for good; drop it from the
                // rotation without disturbing the order.
                eligible.remove(idx);
                if let Some(t) = trace.as_deref_mut() {
                    t.accepted_rates.push(system_rate_lin(scn, &alloc, lin)?);
                }
            } else {
                stalled += 1;
                idx += 1;
            }
        }
    }

    let rate_bps = system_rate_lin(scn, &alloc, lin)?;
    Ok(SolverResult {
        allocation: alloc,
        rate_bps,
        iterations_phase1,
        iterations_phase2,
        switches,
    })
}

/// Exhaustively evaluates every assignment of pairs to bands and
/// returns the best one. Ties keep the assignment that enumerates
/// first, i.e. the lexicographically smallest in label order with
/// cellular-first band numbering.
///
/// The search space is `(N + N')^pairs`; if it exceeds `budget`
/// evaluations the search refuses to start. The evaluation count is
/// reported in `iterations_phase1`.
pub fn exhaustive_allocate(
    scn: &Scenario,
    params: &RadioParams,
    budget: u64,
) -> Result<SolverResult, Error> {
    let lin = Lin::new(params)?;
    let n_c = scn.config.n_cellular_bands;
    let bands = scn.config.total_bands();
    let ids = scn.d2d_ids();
    if !ids.is_empty() && bands == 0 {
        return Err(Error::InvalidConfig(
            "scenario has D2D pairs but no bands".into(),
        ));
    }
    let space = (bands as u128).checked_pow(ids.len() as u32);
    if !space.is_some_and(|s| s <= budget as u128) {
        return Err(Error::SearchSpaceExceeded {
            space: space.map_or_else(|| format!("{bands}^{}", ids.len()), |s| s.to_string()),
            budget,
        });
    }

    let mut digits = vec![0usize; ids.len()];
    let mut alloc = Allocation::new();
    for &id in &ids {
        alloc.assign(id, BandRef::from_order_index(0, n_c));
    }
    let mut best_alloc = alloc.clone();
    let mut best_rate = system_rate_lin(scn, &alloc, &lin)?;
    let mut evaluations = 1u64;
    'search: loop {
        // Advance the odometer; the last pair is the fastest digit.
        let mut pos = ids.len();
        loop {
            if pos == 0 {
                break 'search;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < bands {
                alloc.assign(ids[pos], BandRef::from_order_index(digits[pos], n_c));
                break;
            }
            digits[pos] = 0;
            alloc.assign(ids[pos], BandRef::from_order_index(0, n_c));
        }
        let rate = system_rate_lin(scn, &alloc, &lin)?;
        evaluations += 1;
        if rate > best_rate {
            best_rate = rate;
            best_alloc = alloc.clone();
        }
    }

    Ok(SolverResult {
        allocation: best_alloc,
        rate_bps: best_rate,
        iterations_phase1: evaluations,
        iterations_phase2: 0,
        switches: 0,
    })
}

/// Baseline: the local search's random all-mm-wave starting point,
/// unimproved. Uses the same stream the heuristic initializer uses, so
/// for equal seeds the heuristic starts exactly here.
pub fn baseline_mmw(scn: &Scenario, params: &RadioParams, seed: u64) -> Result<SolverResult, Error> {
    let lin = Lin::new(params)?;
    let mut rng = rng::stream(seed, STREAM_SOLVER_INIT);
    let allocation = initial_allocation(scn, &mut rng)?;
    let rate_bps = system_rate_lin(scn, &allocation, &lin)?;
    Ok(SolverResult {
        allocation,
        rate_bps,
        iterations_phase1: 0,
        iterations_phase2: 0,
        switches: 0,
    })
}

/// Baseline: every pair on a uniform random band over the whole pool,
/// cellular and mm-wave alike.
pub fn baseline_hcn_random(
    scn: &Scenario,
    params: &RadioParams,
    seed: u64,
) -> Result<SolverResult, Error> {
    let lin = Lin::new(params)?;
    let n_c = scn.config.n_cellular_bands;
    let bands = scn.config.total_bands();
    let ids = scn.d2d_ids();
    if !ids.is_empty() && bands == 0 {
        return Err(Error::InvalidConfig(
            "scenario has D2D pairs but no bands".into(),
        ));
    }
    let mut rng = rng::stream(seed, STREAM_HCN);
    let mut allocation = Allocation::new();
    for id in ids {
        allocation.assign(id, BandRef::from_order_index(rng.gen_range(0..bands), n_c));
    }
    let rate_bps = system_rate_lin(scn, &allocation, &lin)?;
    Ok(SolverResult {
        allocation,
        rate_bps,
        iterations_phase1: 0,
        iterations_phase2: 0,
        switches: 0,
    })
}

/// Baseline: every pair crowded onto the first mm-wave band.
pub fn baseline_mmw_one_band(scn: &Scenario, params: &RadioParams) -> Result<SolverResult, Error> {
    let lin = Lin::new(params)?;
    if scn.config.n_mmwave_bands == 0 {
        return Err(Error::InvalidConfig(
            "single-band baseline needs a mm-wave band".into(),
        ));
    }
    let mut allocation = Allocation::new();
    for id in scn.d2d_ids() {
        allocation.assign(id, BandRef::MmWave(0));
    }
    let rate_bps = system_rate_lin(scn, &allocation, &lin)?;
    Ok(SolverResult {
        allocation,
        rate_bps,
        iterations_phase1: 0,
        iterations_phase2: 0,
        switches: 0,
    })
}
