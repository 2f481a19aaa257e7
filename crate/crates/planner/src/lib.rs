//! Missions for reconfigurable multi-robot teams and a randomized planner
//! that assigns agents to spatio-temporal requirements.

pub mod candidate;
pub mod error;
pub mod flow;
pub mod generate;
pub mod geo;
pub mod mission;
pub mod score;
pub mod search;
pub mod temporal;

#[cfg(test)]
mod testing;

pub use candidate::{Assignment, Snapshot, SolutionCandidate, Timeline, Transfer, Visit};
pub use error::{Error, Result};
pub use flow::{check_flow, ArcUsage, FeasibilityReport, FlowViolation};
pub use generate::{generate_candidate, Bounds, Planner};
pub use geo::{distance, project_location};
pub use mission::{load_mission, parse_mission, Constraint, Location, Mission, MissionDocument};
pub use score::{score, SolutionScore, Weights};
pub use search::{plan, Budget, ScoredCandidate, SolutionSet, ITERATIONS_PER_SECOND};
pub use temporal::{check_temporal_consistency, ConsistencyReport, TemporalNetwork};
