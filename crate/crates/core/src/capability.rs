//! Resource support, functionality availability and efficacy.

use num_rational::Ratio;

use crate::agents::{type_of, CoalitionStructure, GeneralAgentType};
use crate::error::Result;
use crate::ontology::ResourceModel;

/// Exact support level: 0 none, in (0,1) partial, >= 1 full.
pub type SupportLevel = Ratio<u64>;

pub fn full_support() -> SupportLevel {
    Ratio::from_integer(1)
}

/// Available over required cardinality of `c` for `f`; 0 when `f` does not
/// require `c`.
pub fn support_resource(model: &ResourceModel, agent: &GeneralAgentType, c: &str, f: &str) -> Result<SupportLevel> {
    let min = model.card_min(c, f)?;
    if min == 0 {
        return Ok(Ratio::from_integer(0));
    }
    let max = model.card_max(c, agent)?;
    Ok(Ratio::new(u64::from(max), u64::from(min)))
}

/// Minimum support over the resources `f` requires; full support when it
/// requires none.
pub fn support_functionality(model: &ResourceModel, agent: &GeneralAgentType, f: &str) -> Result<SupportLevel> {
    let mut best: Option<SupportLevel> = None;
    for (c, min) in model.resource_requirements(f)? {
        if *min == 0 {
            continue;
        }
        let s = Ratio::new(u64::from(model.card_max(c, agent)?), u64::from(*min));
        best = Some(best.map_or(s, |b| b.min(s)));
    }
    Ok(best.unwrap_or_else(full_support))
}

pub fn support_set<'a>(
    model: &ResourceModel,
    agent: &GeneralAgentType,
    functionalities: impl IntoIterator<Item = &'a str>,
) -> Result<SupportLevel> {
    let mut best = full_support();
    let mut first = true;
    for f in functionalities {
        let s = support_functionality(model, agent, f)?;
        best = if first { s } else { best.min(s) };
        first = false;
    }
    Ok(best)
}

pub fn has_functionality(model: &ResourceModel, agent: &GeneralAgentType, f: &str) -> Result<bool> {
    Ok(support_functionality(model, agent, f)? >= full_support())
}

pub fn efficacy_type<'a>(
    model: &ResourceModel,
    agent: &GeneralAgentType,
    functionalities: impl IntoIterator<Item = &'a str>,
) -> Result<u8> {
    Ok(u8::from(support_set(model, agent, functionalities)? >= full_support()))
}

/// 1 iff every operative agent of `cs` supports all of `functionalities`.
pub fn efficacy_cs(model: &ResourceModel, cs: &CoalitionStructure, functionalities: &[&str]) -> Result<u8> {
    for f in functionalities {
        model.resource_requirements(f)?;
    }
    for ga in cs.agents() {
        if efficacy_type(model, &type_of(ga), functionalities.iter().copied())? == 0 {
            return Ok(0);
        }
    }
    Ok(1)
}
