//! Energy, fulfilment and safety objectives and the weighted cost.

use reorg_core::{ocost, reliability, GeneralAgentType, ResourceModel};
use serde::{Deserialize, Serialize};

use crate::candidate::SolutionCandidate;
use crate::error::{Error, Result};
use crate::mission::Mission;

const JOULES_PER_KWH: f64 = 3.6e6;

/// Cost weights; the cost is minimized, so `beta` and `epsilon` are
/// usually negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            alpha: 1.0,
            beta: -100.0,
            epsilon: -10.0,
        }
    }
}

impl Weights {
    pub fn new(alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("epsilon", epsilon)] {
            if !v.is_finite() {
                return Err(Error::domain(format!("weight {name} = {v} must be finite")));
            }
        }
        Ok(Weights { alpha, beta, epsilon })
    }

    /// `alpha * energy / e_max + beta * sat + epsilon * saf`.
    pub fn cost(&self, energy: f64, e_max: f64, sat: f64, saf: f64) -> f64 {
        self.alpha * (energy / e_max) + self.beta * sat + self.epsilon * saf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionScore {
    pub energy_kwh: f64,
    pub sat: f64,
    pub saf: f64,
    pub efficacy: u8,
    pub cost: f64,
    pub reconfig_seconds: f64,
}

/// Agents doing anything beyond their starting assignment.
pub fn active_type(mission: &Mission, candidate: &SolutionCandidate) -> GeneralAgentType {
    let initial = |id: &str| mission.requirement(id).is_some_and(|r| mission.is_initial(r));
    let mut t = GeneralAgentType::new();
    for tl in &candidate.timelines {
        let active = tl
            .visits
            .iter()
            .any(|v| v.requirement.as_deref().is_none_or(|id| !initial(id)));
        if active {
            t.add(tl.role.agent_type.clone(), 1);
        }
    }
    t
}

/// Energy in kWh: every active agent operates at nominal power for the
/// whole mission, i.e. the schedule's makespan plus all reconfiguration
/// time.
pub fn energy_kwh(model: &ResourceModel, mission: &Mission, candidate: &SolutionCandidate) -> Result<f64> {
    let t = candidate.makespan() + candidate.reconfig_total();
    Ok(ocost(model, &active_type(mission, candidate), t)? / JOULES_PER_KWH)
}

/// Fraction of satisfied requirements; 1 for a mission without any.
pub fn sat(candidate: &SolutionCandidate) -> f64 {
    if candidate.assignments.is_empty() {
        1.0
    } else {
        candidate.satisfied_count() as f64 / candidate.assignments.len() as f64
    }
}

/// Lowest reliability of the bound agent type over satisfied requirements,
/// excluding the starting assignment. 1 when there is nothing to assess and
/// 0 when no assessed requirement is satisfied.
pub fn saf(model: &ResourceModel, mission: &Mission, candidate: &SolutionCandidate) -> Result<f64> {
    let mut assessed = false;
    let mut worst: Option<f64> = None;
    for a in &candidate.assignments {
        let Some(r) = mission.requirement(&a.requirement) else {
            continue;
        };
        if mission.is_initial(r) {
            continue;
        }
        assessed = true;
        if !a.satisfied {
            continue;
        }
        let fs = mission.effective_functions(r);
        let rel = reliability(model, &a.agent_type, fs.iter().map(String::as_str))?;
        worst = Some(worst.map_or(rel, |w| w.min(rel)));
    }
    Ok(match (assessed, worst) {
        (false, _) => 1.0,
        (true, None) => 0.0,
        (true, Some(w)) => w,
    })
}

pub fn score(
    model: &ResourceModel,
    mission: &Mission,
    candidate: &SolutionCandidate,
    weights: &Weights,
    e_max: f64,
) -> Result<SolutionScore> {
    if !e_max.is_finite() || e_max <= 0.0 {
        return Err(Error::domain(format!("e_max = {e_max} must be positive")));
    }
    let energy = energy_kwh(model, mission, candidate)?;
    let sat = sat(candidate);
    let saf = saf(model, mission, candidate)?;
    Ok(SolutionScore {
        energy_kwh: energy,
        sat,
        saf,
        efficacy: u8::from(sat >= 1.0),
        cost: weights.cost(energy, e_max, sat, saf),
        reconfig_seconds: candidate.reconfig_total(),
    })
}
