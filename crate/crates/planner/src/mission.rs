//! Missions: an agent pool, spatio-temporal requirements, constraints,
//! qualitative timepoints and named locations.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use reorg_core::{GeneralAgentType, ReconfigParams, ResourceModel, Role};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Permitted relation between two timepoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Before,
    #[serde(rename = "=")]
    Equal,
    #[serde(rename = ">")]
    After,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Before => "<",
            Relation::Equal => "=",
            Relation::After => ">",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Body {
    #[default]
    Moon,
    Earth,
}

impl Body {
    /// Mean radius in meters used for the projection.
    pub fn radius(self) -> f64 {
        match self {
            Body::Moon => 1_737_400.0,
            Body::Earth => 6_378_137.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Location {
    /// Latitude in degrees.
    pub lat: f64,
    /// Longitude in degrees.
    pub lon: f64,
    #[serde(default)]
    pub body: Body,
}

/// Mission constraint. Requirement sets (`str`) hold requirement ids, role
/// sets hold role names of the form `<Type>_<index>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Constraint {
    Temporal {
        lhs: String,
        rel: BTreeSet<Relation>,
        rhs: String,
    },
    /// `lhs - rhs >= value` seconds.
    MinDuration { lhs: String, rhs: String, value: f64 },
    /// `lhs - rhs <= value` seconds.
    MaxDuration { lhs: String, rhs: String, value: f64 },
    MinCard {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        #[serde(rename = "type")]
        agent_type: String,
        value: u32,
    },
    MaxCard {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        #[serde(rename = "type")]
        agent_type: String,
        value: u32,
    },
    AllDistinct {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        #[serde(rename = "type")]
        agent_type: String,
    },
    MinDistinct {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        #[serde(rename = "type")]
        agent_type: String,
        value: u32,
    },
    MaxDistinct {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        #[serde(rename = "type")]
        agent_type: String,
        value: u32,
    },
    MinEqual {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        roles: Vec<String>,
    },
    MaxEqual {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        roles: Vec<String>,
    },
    AllEqual {
        #[serde(rename = "str")]
        requirements: Vec<String>,
        roles: Vec<String>,
    },
    MinFunc {
        #[serde(rename = "str")]
        requirement: String,
        function: String,
    },
    MinProp {
        #[serde(rename = "str")]
        requirement: String,
        function: String,
        property: String,
        value: f64,
    },
    MaxProp {
        #[serde(rename = "str")]
        requirement: String,
        function: String,
        property: String,
        value: f64,
    },
}

impl Constraint {
    pub fn kind(&self) -> &'static str {
        match self {
            Constraint::Temporal { .. } => "temporal",
            Constraint::MinDuration { .. } => "minDuration",
            Constraint::MaxDuration { .. } => "maxDuration",
            Constraint::MinCard { .. } => "minCard",
            Constraint::MaxCard { .. } => "maxCard",
            Constraint::AllDistinct { .. } => "allDistinct",
            Constraint::MinDistinct { .. } => "minDistinct",
            Constraint::MaxDistinct { .. } => "maxDistinct",
            Constraint::MinEqual { .. } => "minEqual",
            Constraint::MaxEqual { .. } => "maxEqual",
            Constraint::AllEqual { .. } => "allEqual",
            Constraint::MinFunc { .. } => "minFunc",
            Constraint::MinProp { .. } => "minProp",
            Constraint::MaxProp { .. } => "maxProp",
        }
    }

    /// Requirement ids the constraint refers to.
    pub fn requirements(&self) -> Vec<&str> {
        match self {
            Constraint::Temporal { .. } | Constraint::MinDuration { .. } | Constraint::MaxDuration { .. } => Vec::new(),
            Constraint::MinCard { requirements, .. }
            | Constraint::MaxCard { requirements, .. }
            | Constraint::AllDistinct { requirements, .. }
            | Constraint::MinDistinct { requirements, .. }
            | Constraint::MaxDistinct { requirements, .. }
            | Constraint::MinEqual { requirements, .. }
            | Constraint::MaxEqual { requirements, .. }
            | Constraint::AllEqual { requirements, .. } => requirements.iter().map(String::as_str).collect(),
            Constraint::MinFunc { requirement, .. }
            | Constraint::MinProp { requirement, .. }
            | Constraint::MaxProp { requirement, .. } => vec![requirement.as_str()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementDoc {
    pub id: String,
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default)]
    pub agents: BTreeMap<String, u32>,
    pub location: String,
    pub from: String,
    pub to: String,
}

/// Serialized form of a [`Mission`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Path of the organization model, relative to the mission file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub pool: BTreeMap<String, u32>,
    #[serde(default)]
    pub requirements: Vec<RequirementDoc>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default)]
    pub timepoints: Vec<String>,
    #[serde(default)]
    pub locations: BTreeMap<String, Location>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconfig: Option<ReconfigParams>,
}

impl MissionDocument {
    pub fn from_yaml(text: &str) -> Result<Self> {
        serde_yaml::from_str(text).map_err(|e| Error::parse(e.to_string()))
    }

    pub fn to_yaml(&self) -> Result<String> {
        serde_yaml::to_string(self).map_err(|e| Error::parse(e.to_string()))
    }
}

/// Functionalities and agent-type cardinalities demanded at a location
/// throughout the interval `[from, to]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatioTemporalRequirement {
    pub id: String,
    pub functionalities: BTreeSet<String>,
    pub agents: GeneralAgentType,
    pub location: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    pub name: Option<String>,
    pub model: Option<String>,
    pub pool: GeneralAgentType,
    pub requirements: Vec<SpatioTemporalRequirement>,
    pub constraints: Vec<Constraint>,
    /// Declared timepoints; the first one is the mission start.
    pub timepoints: Vec<String>,
    pub locations: BTreeMap<String, Location>,
    pub reconfig: ReconfigParams,
}

impl Mission {
    pub fn start(&self) -> &str {
        &self.timepoints[0]
    }

    pub fn requirement(&self, id: &str) -> Option<&SpatioTemporalRequirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    /// Requirements starting at the mission start. They place agents at
    /// their depots and are not part of the safety objective.
    pub fn is_initial(&self, r: &SpatioTemporalRequirement) -> bool {
        r.from == self.start()
    }

    /// Functionalities demanded at `r`, including those added by
    /// `minFunc`, `minProp` and `maxProp` constraints.
    pub fn effective_functions(&self, r: &SpatioTemporalRequirement) -> BTreeSet<String> {
        let mut out = r.functionalities.clone();
        for c in &self.constraints {
            match c {
                Constraint::MinFunc { requirement, function }
                | Constraint::MinProp {
                    requirement, function, ..
                }
                | Constraint::MaxProp {
                    requirement, function, ..
                } if *requirement == r.id => {
                    out.insert(function.clone());
                }
                _ => {}
            }
        }
        out
    }

    /// One role per pool atom, named `<Type>_<index>`, sorted by type.
    pub fn roles(&self) -> Vec<Role> {
        role_names(&self.pool)
    }

    pub fn to_document(&self) -> MissionDocument {
        MissionDocument {
            name: self.name.clone(),
            model: self.model.clone(),
            pool: self.pool.iter().map(|(t, c)| (t.to_string(), c)).collect(),
            requirements: self
                .requirements
                .iter()
                .map(|r| RequirementDoc {
                    id: r.id.clone(),
                    functions: r.functionalities.iter().cloned().collect(),
                    agents: r.agents.iter().map(|(t, c)| (t.to_string(), c)).collect(),
                    location: r.location.clone(),
                    from: r.from.clone(),
                    to: r.to.clone(),
                })
                .collect(),
            constraints: self.constraints.clone(),
            timepoints: self.timepoints.clone(),
            locations: self.locations.clone(),
            reconfig: Some(self.reconfig),
        }
    }

    pub fn to_yaml(&self) -> Result<String> {
        self.to_document().to_yaml()
    }
}

pub fn role_names(pool: &GeneralAgentType) -> Vec<Role> {
    pool.iter()
        .flat_map(|(t, c)| (0..c).map(move |i| Role::new(format!("{t}_{i}"), t)))
        .collect()
}

/// Parse and validate a mission against `model`.
pub fn parse_mission(text: &str, model: &ResourceModel) -> Result<Mission> {
    Mission::from_document(MissionDocument::from_yaml(text)?, model)
}

pub fn load_mission(path: impl AsRef<Path>, model: &ResourceModel) -> std::io::Result<Result<Mission>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_mission(&text, model))
}

impl Mission {
    pub fn from_document(doc: MissionDocument, model: &ResourceModel) -> Result<Self> {
        let v = Validator { model, doc: &doc };
        v.check()?;
        let reconfig = match doc.reconfig {
            Some(p) => ReconfigParams::new(p.t_a, p.t_b).map_err(|e| Error::validation("reconfig", e.to_string()))?,
            None => ReconfigParams::default(),
        };
        let requirements = doc
            .requirements
            .iter()
            .map(|r| SpatioTemporalRequirement {
                id: r.id.clone(),
                functionalities: r.functions.iter().cloned().collect(),
                agents: GeneralAgentType::from_pairs(r.agents.iter().map(|(t, c)| (t.clone(), *c))),
                location: r.location.clone(),
                from: r.from.clone(),
                to: r.to.clone(),
            })
            .collect();
        Ok(Mission {
            name: doc.name,
            model: doc.model,
            pool: GeneralAgentType::from_pairs(doc.pool.iter().map(|(t, c)| (t.clone(), *c))),
            requirements,
            constraints: doc.constraints,
            timepoints: doc.timepoints,
            locations: doc.locations,
            reconfig,
        })
    }
}

struct Validator<'a> {
    model: &'a ResourceModel,
    doc: &'a MissionDocument,
}

impl Validator<'_> {
    fn check(&self) -> Result<()> {
        let doc = self.doc;
        if doc.timepoints.is_empty() {
            return Err(Error::validation("timepoints", "at least one timepoint is required"));
        }
        let mut seen = HashSet::new();
        for (i, t) in doc.timepoints.iter().enumerate() {
            if !seen.insert(t.as_str()) {
                return Err(Error::validation(
                    format!("timepoints[{i}]"),
                    format!("duplicate timepoint '{t}'"),
                ));
            }
        }
        for (id, loc) in &doc.locations {
            let path = format!("locations.{id}");
            if !loc.lat.is_finite() || loc.lat.abs() >= 90.0 {
                return Err(Error::validation(
                    format!("{path}.lat"),
                    format!("latitude {} must lie strictly between -90 and 90", loc.lat),
                ));
            }
            if !loc.lon.is_finite() {
                return Err(Error::validation(format!("{path}.lon"), "longitude must be finite"));
            }
        }
        for t in doc.pool.keys() {
            self.agent_type(&format!("pool.{t}"), t)?;
        }

        let mut ids = HashSet::new();
        for (i, r) in doc.requirements.iter().enumerate() {
            let path = format!("requirements[{i}]");
            if !ids.insert(r.id.as_str()) {
                return Err(Error::validation(
                    format!("{path}.id"),
                    format!("duplicate requirement id '{}'", r.id),
                ));
            }
            if !doc.locations.contains_key(&r.location) {
                return Err(Error::validation(
                    format!("{path}.location"),
                    format!("unknown location '{}'", r.location),
                ));
            }
            self.timepoint(&format!("{path}.from"), &r.from)?;
            self.timepoint(&format!("{path}.to"), &r.to)?;
            if r.from == r.to {
                return Err(Error::validation(
                    format!("{path}.to"),
                    format!("interval [{}, {}] must have from < to", r.from, r.to),
                ));
            }
            for f in &r.functions {
                self.functionality(&format!("{path}.functions"), f)?;
            }
            for t in r.agents.keys() {
                self.agent_type(&format!("{path}.agents.{t}"), t)?;
            }
        }

        for (i, c) in doc.constraints.iter().enumerate() {
            self.constraint(&format!("constraints[{i}]"), c, &ids)?;
        }
        Ok(())
    }

    fn timepoint(&self, path: &str, t: &str) -> Result<()> {
        if self.doc.timepoints.iter().any(|x| x == t) {
            Ok(())
        } else {
            Err(Error::validation(path, format!("unknown timepoint '{t}'")))
        }
    }

    fn agent_type(&self, path: &str, t: &str) -> Result<()> {
        self.model
            .agent_type(t)
            .map(|_| ())
            .map_err(|_| Error::validation(path, format!("unknown agent type '{t}'")))
    }

    fn functionality(&self, path: &str, f: &str) -> Result<()> {
        if self.model.is_functionality(f) {
            Ok(())
        } else {
            Err(Error::validation(path, format!("unknown functionality '{f}'")))
        }
    }

    fn constraint(&self, path: &str, c: &Constraint, ids: &HashSet<&str>) -> Result<()> {
        for r in c.requirements() {
            if !ids.contains(r) {
                return Err(Error::validation(
                    format!("{path}.str"),
                    format!("unknown requirement '{r}'"),
                ));
            }
        }
        match c {
            Constraint::Temporal { lhs, rel, rhs } => {
                self.timepoint(&format!("{path}.lhs"), lhs)?;
                self.timepoint(&format!("{path}.rhs"), rhs)?;
                if rel.is_empty() {
                    return Err(Error::validation(format!("{path}.rel"), "relation set is empty"));
                }
            }
            Constraint::MinDuration { lhs, rhs, value } | Constraint::MaxDuration { lhs, rhs, value } => {
                self.timepoint(&format!("{path}.lhs"), lhs)?;
                self.timepoint(&format!("{path}.rhs"), rhs)?;
                if !value.is_finite() || *value < 0.0 {
                    return Err(Error::validation(
                        format!("{path}.value"),
                        format!("duration {value} must be finite and >= 0"),
                    ));
                }
                if lhs == rhs {
                    return Err(Error::validation(path, "duration bound relates a timepoint to itself"));
                }
            }
            Constraint::MinCard { agent_type, .. }
            | Constraint::MaxCard { agent_type, .. }
            | Constraint::AllDistinct { agent_type, .. }
            | Constraint::MaxDistinct { agent_type, .. } => {
                self.agent_type(&format!("{path}.type"), agent_type)?;
            }
            Constraint::MinDistinct { agent_type, value, .. } => {
                self.agent_type(&format!("{path}.type"), agent_type)?;
                if *value == 0 {
                    return Err(Error::validation(format!("{path}.value"), "minDistinct requires n > 0"));
                }
            }
            Constraint::MinEqual { roles, .. }
            | Constraint::MaxEqual { roles, .. }
            | Constraint::AllEqual { roles, .. } => {
                let known: HashSet<String> = role_names(&self.pool_type()).into_iter().map(|r| r.name).collect();
                for r in roles {
                    if !known.contains(r) {
                        return Err(Error::validation(
                            format!("{path}.roles"),
                            format!("unknown role '{r}'"),
                        ));
                    }
                }
            }
            Constraint::MinFunc { function, .. } => {
                self.functionality(&format!("{path}.function"), function)?;
            }
            Constraint::MinProp { function, value, .. } | Constraint::MaxProp { function, value, .. } => {
                self.functionality(&format!("{path}.function"), function)?;
                if !value.is_finite() {
                    return Err(Error::validation(format!("{path}.value"), "bound must be finite"));
                }
            }
        }
        Ok(())
    }

    fn pool_type(&self) -> GeneralAgentType {
        GeneralAgentType::from_pairs(self.doc.pool.iter().map(|(t, c)| (t.clone(), *c)))
    }
}
