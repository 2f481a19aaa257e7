//! Organization model for reconfigurable multi-robot systems.
//!
//! Agent types are multisets over atomic robot types. From a resource
//! taxonomy with functionality requirements the crate infers which
//! functionalities a (composite) agent provides, how reliably, what it costs
//! to operate, and what it costs to reconfigure one coalition structure into
//! another.

pub mod agents;
pub mod capability;
pub mod csg;
pub mod error;
pub mod formula;
pub mod ontology;
pub mod policies;
pub mod reconfig;
pub mod reliability;
pub mod synth;

#[cfg(test)]
mod testing;

pub use agents::{
    connection_feasible, enumerate_dormant_types, type_of, union_types, AtomicAgent, CoalitionStructure, GeneralAgent,
    GeneralAgentType, Role,
};
pub use capability::{
    efficacy_cs, efficacy_type, has_functionality, support_functionality, support_resource, support_set, SupportLevel,
};
pub use csg::{enumerate_structures, find_feasible_structure, CsgBudget};
pub use error::{Error, Result};
pub use ontology::{load_model, ModelDocument, ResourceModel};
pub use policies::{compose_sum, eval_policy, inverse_policy, ocost, pvalue_composite, SelectionPolicy};
pub use reconfig::{formation_cost, transition_cost, ReconfigParams};
pub use reliability::{
    available_cardinalities, monte_carlo_reliability, reliability, reliability_cs, required_cardinalities, rsub,
};
