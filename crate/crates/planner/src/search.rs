//! Restarted random search over candidates and the resulting solution set.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use log::{debug, info};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reorg_core::ResourceModel;
use serde::Serialize;

use crate::candidate::SolutionCandidate;
use crate::error::{Error, Result};
use crate::flow::check_flow;
use crate::generate::{Bounds, Planner};
use crate::mission::Mission;
use crate::score::{energy_kwh, score, SolutionScore, Weights};

/// Iterations standing in for one second of search in deterministic mode.
pub const ITERATIONS_PER_SECOND: u64 = 10;
/// An epoch ends early after this many iterations without a new candidate.
pub const STALL_ITERATIONS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    WallClock { epoch: Duration, total: Duration },
    Iterations { per_epoch: u64, total: u64 },
}

impl Budget {
    pub fn wall_clock(epoch_seconds: u64, total_seconds: u64) -> Self {
        Budget::WallClock {
            epoch: Duration::from_secs(epoch_seconds),
            total: Duration::from_secs(total_seconds),
        }
    }

    /// Iteration budget equivalent to the given wall-clock seconds.
    pub fn deterministic(epoch_seconds: u64, total_seconds: u64) -> Self {
        Budget::Iterations {
            per_epoch: epoch_seconds.saturating_mul(ITERATIONS_PER_SECOND).max(1),
            total: total_seconds.saturating_mul(ITERATIONS_PER_SECOND),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::wall_clock(60, 1200)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredCandidate {
    pub id: usize,
    pub score: SolutionScore,
    pub candidate: SolutionCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSet {
    pub bounds: Bounds,
    pub weights: Weights,
    /// Largest energy among the solutions, used to normalize the cost.
    pub e_max: f64,
    pub iterations: u64,
    /// Distinct flow-feasible candidates ordered by their encoding.
    pub solutions: Vec<ScoredCandidate>,
    /// Index of the cheapest solution.
    pub best: usize,
}

impl SolutionSet {
    pub fn best(&self) -> &ScoredCandidate {
        &self.solutions[self.best]
    }

    pub fn max_saf(&self) -> f64 {
        self.solutions.iter().map(|s| s.score.saf).fold(0.0, f64::max)
    }
}

/// Epochs needed to spend the whole budget.
fn epoch_count(budget: &Budget) -> u64 {
    match *budget {
        Budget::WallClock { epoch, total } => {
            if epoch.is_zero() {
                return 0;
            }
            total.as_nanos().div_ceil(epoch.as_nanos()) as u64
        }
        Budget::Iterations { per_epoch, total } => total.div_ceil(per_epoch.max(1)),
    }
}

struct Epoch {
    found: BTreeMap<String, SolutionCandidate>,
    iterations: u64,
}

/// One restart: draws iteration seeds from stream `epoch` of `seed` until
/// the epoch budget is spent or nothing new turned up for a while.
fn run_epoch(
    planner: &Planner,
    bounds: &Bounds,
    budget: &Budget,
    seed: u64,
    epoch: u64,
    start: Instant,
) -> Result<Epoch> {
    let (model, mission) = (planner.model(), planner.mission());
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    seeds.set_stream(epoch);
    let limit = match *budget {
        Budget::Iterations { per_epoch, total } => per_epoch.min(total - epoch * per_epoch),
        Budget::WallClock { .. } => u64::MAX,
    };
    let epoch_start = Instant::now();
    let out_of_time = || match *budget {
        Budget::WallClock { epoch, total } => epoch_start.elapsed() >= epoch || start.elapsed() >= total,
        Budget::Iterations { .. } => false,
    };
    let mut found = BTreeMap::new();
    let mut iterations = 0;
    let mut stall = 0;
    while iterations < limit && stall < STALL_ITERATIONS && !out_of_time() {
        let s = seeds.next_u64();
        iterations += 1;
        stall += 1;
        let candidate = match planner.generate(bounds, s) {
            Ok(c) => c,
            Err(Error::NoCandidate(reason)) => {
                debug!("epoch {epoch} iteration {iterations}: {reason}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let flow = check_flow(model, mission, &candidate)?;
        if !flow.feasible {
            debug!(
                "epoch {epoch} iteration {iterations}: flow infeasible: {:?}",
                flow.violations
            );
            continue;
        }
        let key = candidate.encoding()?;
        if let std::collections::btree_map::Entry::Vacant(slot) = found.entry(key) {
            slot.insert(candidate);
            stall = 0;
        }
    }
    info!("epoch {epoch}: {} candidates in {iterations} iterations", found.len());
    Ok(Epoch { found, iterations })
}

/// Runs epochs of generate, flow check and scoring on all available
/// cores. Each epoch restarts from its own random stream derived from
/// `seed` and the merged set is independent of scheduling, so with an
/// iteration budget the result depends only on the inputs.
pub fn plan(
    model: &ResourceModel,
    mission: &Mission,
    bounds: &Bounds,
    weights: &Weights,
    budget: &Budget,
    seed: u64,
) -> Result<SolutionSet> {
    let planner = Planner::new(model, mission)?;
    let epochs = epoch_count(budget);
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(epochs.max(1) as usize);
    let next = AtomicU64::new(0);
    let start = Instant::now();
    let results: Vec<Result<Epoch>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let e = next.fetch_add(1, Ordering::Relaxed);
                        if e >= epochs {
                            break;
                        }
                        if let Budget::WallClock { total, .. } = budget {
                            if start.elapsed() >= *total {
                                break;
                            }
                        }
                        done.push(run_epoch(&planner, bounds, budget, seed, e, start));
                    }
                    done
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("planner worker panicked"))
            .collect()
    });

    let mut found: BTreeMap<String, SolutionCandidate> = BTreeMap::new();
    let mut iterations = 0;
    for r in results {
        let epoch = r?;
        iterations += epoch.iterations;
        found.extend(epoch.found);
    }
    if found.is_empty() {
        return Err(Error::NoSolution);
    }
    let energies: Vec<f64> = found
        .values()
        .map(|c| energy_kwh(model, mission, c))
        .collect::<Result<_>>()?;
    let e_max = energies.iter().copied().fold(0.0, f64::max);
    let e_max = if e_max > 0.0 { e_max } else { 1.0 };
    let mut solutions = Vec::with_capacity(found.len());
    for (id, candidate) in found.into_values().enumerate() {
        let score = score(model, mission, &candidate, weights, e_max)?;
        solutions.push(ScoredCandidate { id, score, candidate });
    }
    let best = solutions
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.score.cost.total_cmp(&b.score.cost).then(a.id.cmp(&b.id)))
        .map(|(i, _)| i)
        .expect("non-empty");
    Ok(SolutionSet {
        bounds: *bounds,
        weights: *weights,
        e_max,
        iterations,
        solutions,
        best,
    })
}
