//! Heuristic reconfiguration cost between coalition structures.

use serde::{Deserialize, Serialize};

use crate::agents::{CoalitionStructure, GeneralAgent};
use crate::error::{Error, Result};

/// Time constants in seconds: `t_a` per involved source agent, `t_b` per
/// atom of the formed agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconfigParams {
    pub t_a: f64,
    pub t_b: f64,
}

impl Default for ReconfigParams {
    fn default() -> Self {
        ReconfigParams { t_a: 600.0, t_b: 100.0 }
    }
}

impl ReconfigParams {
    pub fn new(t_a: f64, t_b: f64) -> Result<Self> {
        for (name, v) in [("t_a", t_a), ("t_b", t_b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        Ok(ReconfigParams { t_a, t_b })
    }
}

/// Seconds needed to form `ga` out of `source`. Zero if `ga` is already
/// operative there; otherwise `t_a` per source agent contributing atoms plus
/// `t_b` per atom.
pub fn formation_cost(ga: &GeneralAgent, source: &CoalitionStructure, params: &ReconfigParams) -> Result<f64> {
    let mut involved: Vec<&GeneralAgent> = Vec::new();
    for atom in ga.members() {
        let owner = source
            .agent_of(atom)
            .ok_or_else(|| Error::UnknownAtom(atom.id.clone()))?;
        if !involved.contains(&owner) {
            involved.push(owner);
        }
    }
    if involved.len() == 1 && involved[0] == ga {
        return Ok(0.0);
    }
    Ok(params.t_a * involved.len() as f64 + params.t_b * ga.len() as f64)
}

pub fn transition_cost(from: &CoalitionStructure, to: &CoalitionStructure, params: &ReconfigParams) -> Result<f64> {
    if from.pool() != to.pool() {
        return Err(Error::PoolMismatch);
    }
    to.agents()
        .iter()
        .try_fold(0.0, |acc, ga| Ok(acc + formation_cost(ga, from, params)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AtomicAgent;

    fn atom(id: &str) -> AtomicAgent {
        AtomicAgent::new(id, "X")
    }

    fn ga(ids: &[&str]) -> GeneralAgent {
        GeneralAgent::new(ids.iter().map(|i| atom(i))).unwrap()
    }

    fn cs(blocks: &[&[&str]]) -> CoalitionStructure {
        CoalitionStructure::from_agents(blocks.iter().map(|b| ga(b))).unwrap()
    }

    #[test]
    fn formation_examples() {
        let p = ReconfigParams::default();
        let source = cs(&[&["a1", "a2"], &["a3"]]);
        assert_eq!(formation_cost(&ga(&["a1", "a2", "a3"]), &source, &p).unwrap(), 1500.0);
        assert_eq!(formation_cost(&ga(&["a1", "a2"]), &source, &p).unwrap(), 0.0);
        assert_eq!(formation_cost(&ga(&["a1"]), &source, &p).unwrap(), 700.0);
        assert!(matches!(
            formation_cost(&ga(&["zz"]), &source, &p),
            Err(Error::UnknownAtom(id)) if id == "zz"
        ));
    }

    #[test]
    fn transition_examples() {
        let p = ReconfigParams::default();
        let a = cs(&[&["a1", "a2"], &["a3"]]);
        let b = cs(&[&["a1"], &["a2", "a3"]]);
        assert_eq!(transition_cost(&a, &a, &p).unwrap(), 0.0);
        assert_eq!(transition_cost(&a, &b, &p).unwrap(), 2100.0);
        let singles = cs(&[&["a1"], &["a2"], &["a3"]]);
        let triple = cs(&[&["a1", "a2", "a3"]]);
        assert_eq!(transition_cost(&singles, &triple, &p).unwrap(), 2100.0);
        assert!(matches!(
            transition_cost(&singles, &cs(&[&["a1"]]), &p),
            Err(Error::PoolMismatch)
        ));
    }

    #[test]
    fn params_are_checked() {
        assert!(ReconfigParams::new(-1.0, 0.0).is_err());
        assert!(ReconfigParams::new(0.0, f64::NAN).is_err());
        assert_eq!(ReconfigParams::new(600.0, 100.0).unwrap(), ReconfigParams::default());
    }
}
