//! Solution candidates: per-requirement assignments, role timelines,
//! transfers of immobile roles and the resulting coalition structures.

use reorg_core::{GeneralAgentType, Role};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stay of a role at a location over `[from, to]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    pub location: String,
    pub from: String,
    pub to: String,
    /// Requirement served; `None` for a stop made only to pick up or drop
    /// off cargo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub role: Role,
    pub visits: Vec<Visit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub requirement: String,
    /// Bound agent type, including any extra agents.
    pub agent_type: GeneralAgentType,
    pub roles: Vec<String>,
    pub satisfied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Relocation of an immobile role between two of its visits, carried by a
/// mobile role that departs at `departure` and arrives at `arrival`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub role: String,
    pub origin: String,
    pub release: String,
    pub destination: String,
    pub due: String,
    pub carrier: String,
    pub departure: String,
    pub arrival: String,
}

/// Operative agents at a location and timepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub location: String,
    pub timepoint: String,
    /// Blocks of role names; composite agents serve a requirement with
    /// functionalities, everything else is listed as a singleton.
    pub agents: Vec<Vec<String>>,
    /// Lowest reliability among the composite agents present (1 if none).
    pub safety: f64,
    /// Seconds to reconfigure from the previous timepoint's structure.
    pub reconfig_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionCandidate {
    /// One entry per requirement, in mission order.
    pub assignments: Vec<Assignment>,
    pub timelines: Vec<Timeline>,
    pub transfers: Vec<Transfer>,
    /// Timepoints in a consistent total order with earliest times in seconds.
    pub schedule: Vec<(String, f64)>,
    pub structures: Vec<Snapshot>,
}

impl SolutionCandidate {
    /// Canonical text encoding used for deduplication and tie-breaks.
    pub fn encoding(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn assignment(&self, requirement: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|a| a.requirement == requirement)
    }

    pub fn timeline(&self, role: &str) -> Option<&Timeline> {
        self.timelines.iter().find(|t| t.role.name == role)
    }

    pub fn satisfied_count(&self) -> usize {
        self.assignments.iter().filter(|a| a.satisfied).count()
    }

    /// Position of a timepoint in the schedule.
    pub fn rank(&self, timepoint: &str) -> Option<usize> {
        self.schedule.iter().position(|(t, _)| t == timepoint)
    }

    pub fn time(&self, timepoint: &str) -> Option<f64> {
        self.schedule.iter().find(|(t, _)| t == timepoint).map(|(_, s)| *s)
    }

    pub fn makespan(&self) -> f64 {
        self.schedule.iter().map(|(_, s)| *s).fold(0.0, f64::max)
    }

    pub fn reconfig_total(&self) -> f64 {
        self.structures.iter().map(|s| s.reconfig_seconds).sum()
    }
}
