//! Redundancy-based probability of survival.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{type_of, CoalitionStructure, GeneralAgent, GeneralAgentType};
use crate::error::{Error, Result};
use crate::ontology::ResourceModel;

/// One resource block of the demand profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandEntry {
    pub concept: String,
    pub required: u32,
    pub available: u32,
    pub p_survival: f64,
}

/// Flattened per-resource minima across `functionalities`, merged by MAX.
pub fn required_cardinalities<'a>(
    model: &ResourceModel,
    functionalities: impl IntoIterator<Item = &'a str>,
) -> Result<BTreeMap<String, u32>> {
    let mut out: BTreeMap<String, u32> = BTreeMap::new();
    for f in functionalities {
        for (c, n) in model.resource_requirements(f)? {
            if *n > 0 {
                let e = out.entry(c.clone()).or_insert(0);
                *e = (*e).max(*n);
            }
        }
    }
    Ok(out)
}

/// `card_max` for every resource that appears in the requirements.
pub fn available_cardinalities<'a>(
    model: &ResourceModel,
    agent: &GeneralAgentType,
    functionalities: impl IntoIterator<Item = &'a str>,
) -> Result<BTreeMap<String, u32>> {
    let req = required_cardinalities(model, functionalities)?;
    req.keys().map(|c| Ok((c.clone(), model.card_max(c, agent)?))).collect()
}

pub fn demand_profile<'a>(
    model: &ResourceModel,
    agent: &GeneralAgentType,
    functionalities: impl IntoIterator<Item = &'a str>,
) -> Result<Vec<DemandEntry>> {
    let req = required_cardinalities(model, functionalities)?;
    req.into_iter()
        .map(|(concept, required)| {
            Ok(DemandEntry {
                available: model.card_max(&concept, agent)?,
                p_survival: model.effective_survival(&concept, agent)?,
                concept,
                required,
            })
        })
        .collect()
}

/// Survival of a block of `n` instances of which `r` are required:
/// `1 - (1 - p^r)^(n/r)` with a real exponent, 0 when `n < r`.
pub fn rsub(r: u32, n: u32, p: f64) -> Result<f64> {
    if r < 1 {
        return Err(Error::Domain(format!("required count must be >= 1, got {r}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0,1]")));
    }
    if n < r {
        return Ok(0.0);
    }
    let exponent = f64::from(n) / f64::from(r);
    Ok(1.0 - (1.0 - p.powf(f64::from(r))).powf(exponent))
}

pub fn reliability_of_profile(profile: &[DemandEntry]) -> Result<f64> {
    profile
        .iter()
        .try_fold(1.0, |acc, e| Ok(acc * rsub(e.required, e.available, e.p_survival)?))
}

pub fn reliability<'a>(
    model: &ResourceModel,
    agent: &GeneralAgentType,
    functionalities: impl IntoIterator<Item = &'a str>,
) -> Result<f64> {
    reliability_of_profile(&demand_profile(model, agent, functionalities)?)
}

/// Minimum reliability over the operative agents of `cs`, each against its
/// own functionality assignment.
pub fn reliability_cs(
    model: &ResourceModel,
    cs: &CoalitionStructure,
    assignment: &BTreeMap<GeneralAgent, Vec<String>>,
) -> Result<f64> {
    let mut best = 1.0f64;
    for ga in cs.agents() {
        let fs = assignment
            .get(ga)
            .ok_or_else(|| Error::MissingAssignment(ga.to_string()))?;
        let r = reliability(model, &type_of(ga), fs.iter().map(String::as_str))?;
        best = best.min(r);
    }
    Ok(best)
}

/// Resource instance carried by an agent: its concept and survival
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceInstance {
    pub concept: String,
    pub p_survival: f64,
}

/// Every resource instance of `agent`, one entry per physical unit.
pub fn resource_instances(model: &ResourceModel, agent: &GeneralAgentType) -> Result<Vec<ResourceInstance>> {
    let mut out = Vec::new();
    for (ty, count) in agent.iter() {
        for (r, k) in &model.agent_type(ty)?.resources {
            let p = model.survival_probability(r)?;
            for _ in 0..count * k {
                out.push(ResourceInstance {
                    concept: r.clone(),
                    p_survival: p,
                });
            }
        }
    }
    Ok(out)
}

/// Instance-level survival estimate: each resource instance survives
/// independently; a trial succeeds iff every required concept keeps at least
/// its required number of surviving instances. Returns the success fraction
/// and its binomial standard error.
pub fn monte_carlo_reliability<'a>(
    model: &ResourceModel,
    agent: &GeneralAgentType,
    functionalities: impl IntoIterator<Item = &'a str>,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    let req: Vec<(String, u32)> = required_cardinalities(model, functionalities)?.into_iter().collect();
    let instances = resource_instances(model, agent)?;
    // which requirement each instance can serve
    let mut serves: Vec<Vec<usize>> = Vec::with_capacity(instances.len());
    for inst in &instances {
        let mut s = Vec::new();
        for (j, (c, _)) in req.iter().enumerate() {
            if model.is_instance_of(&inst.concept, c)? {
                s.push(j);
            }
        }
        serves.push(s);
    }
    let relevant: Vec<usize> = (0..instances.len()).filter(|&i| !serves[i].is_empty()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alive = vec![0u32; req.len()];
    let mut successes = 0u64;
    for _ in 0..trials {
        alive.iter_mut().for_each(|a| *a = 0);
        for &i in &relevant {
            if rng.gen::<f64>() < instances[i].p_survival {
                for &j in &serves[i] {
                    alive[j] += 1;
                }
            }
        }
        if req.iter().zip(&alive).all(|((_, r), a)| a >= r) {
            successes += 1;
        }
    }
    let n = trials as f64;
    let est = successes as f64 / n;
    let stderr = (est * (1.0 - est) / n).sqrt();
    Ok((est, stderr))
}
