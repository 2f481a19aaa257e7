//! Resource taxonomy, functionality requirements, agent type definitions and
//! data properties.
//!
//! A [`ResourceModel`] is loaded from a [`ModelDocument`] (YAML on disk) and is
//! immutable afterwards. Every query is a pure function of the model, so a
//! shared reference can be handed to any number of worker threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::GeneralAgentType;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::policies::{InferenceRule, SelectionPolicy};

/// Survival probability assumed for resources that declare none, neither
/// directly nor through an ancestor.
pub const DEFAULT_P_SURVIVAL: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConceptKind {
    Resource,
    Functionality,
    Interface,
    AgentType,
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConceptKind::Resource => "resource",
            ConceptKind::Functionality => "functionality",
            ConceptKind::Interface => "interface",
            ConceptKind::AgentType => "agent-type",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    pub id: String,
    pub parent: Option<String>,
    pub kind: ConceptKind,
    pub p_survival: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    #[serde(rename = "type")]
    pub interface: String,
    pub gender: Gender,
    pub count: u32,
}

/// Effective definition of an atomic agent type, parent definitions merged
/// in (child entries override the parent's).
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTypeDefinition {
    pub id: String,
    pub parent: Option<String>,
    pub resources: BTreeMap<String, u32>,
    pub interfaces: Vec<InterfaceSpec>,
    pub properties: BTreeMap<String, f64>,
}

// ---------------------------------------------------------------------------
// Document schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ConceptKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_survival: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalityDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default)]
    pub requires: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentTypeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default)]
    pub resources: BTreeMap<String, u32>,
    #[serde(default)]
    pub interfaces: Vec<InterfaceSpec>,
    #[serde(default)]
    pub properties: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTermDoc {
    pub sign: String,
    pub select: serde_yaml::Value,
    pub property: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesDoc {
    #[serde(default)]
    pub policies: BTreeMap<String, Vec<serde_yaml::Value>>,
    #[serde(default)]
    pub properties: BTreeMap<String, Vec<RuleTermDoc>>,
}

/// Serialized form of a [`ResourceModel`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default)]
    pub concepts: BTreeMap<String, ConceptDoc>,
    #[serde(default)]
    pub functionalities: BTreeMap<String, FunctionalityDoc>,
    #[serde(default)]
    pub agent_types: BTreeMap<String, AgentTypeDoc>,
    #[serde(default)]
    pub formulas: BTreeMap<String, String>,
    #[serde(default)]
    pub rules: RulesDoc,
}

impl ModelDocument {
    pub fn from_yaml(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(ModelDocument::default());
        }
        serde_yaml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_yaml(&self) -> Result<String> {
        serde_yaml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ResourceModel {
    concepts: BTreeMap<String, Concept>,
    requirements: BTreeMap<String, BTreeMap<String, u32>>,
    flat_requirements: BTreeMap<String, BTreeMap<String, u32>>,
    agent_types: BTreeMap<String, AgentTypeDefinition>,
    formulas: BTreeMap<String, Formula>,
    policies: BTreeMap<String, SelectionPolicy>,
    rules: BTreeMap<String, InferenceRule>,
}

/// Load and validate a model from its YAML text.
pub fn load_model(text: &str) -> Result<ResourceModel> {
    ResourceModel::from_document(ModelDocument::from_yaml(text)?)
}

impl ResourceModel {
    pub fn from_path(path: impl AsRef<Path>) -> std::io::Result<Result<Self>> {
        let text = std::fs::read_to_string(path)?;
        Ok(load_model(&text))
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        if doc.agent_types.is_empty() {
            return Err(Error::validation("agent_types", "model defines no agent types"));
        }

        let mut concepts: BTreeMap<String, Concept> = BTreeMap::new();
        let mut declare = |id: &str, parent: Option<String>, kind: Option<ConceptKind>, p: Option<f64>| {
            if concepts.contains_key(id) {
                return Err(Error::validation(id, "concept declared more than once"));
            }
            concepts.insert(
                id.to_string(),
                Concept {
                    id: id.to_string(),
                    parent,
                    // resolved below for concepts that inherit their kind
                    kind: kind.unwrap_or(ConceptKind::Resource),
                    p_survival: p,
                },
            );
            Ok(())
        };
        let mut implicit_kind = BTreeSet::new();
        for (id, c) in &doc.concepts {
            if c.kind.is_none() {
                implicit_kind.insert(id.clone());
            }
            declare(id, c.parent.clone(), c.kind, c.p_survival)?;
        }
        for (id, f) in &doc.functionalities {
            declare(id, f.parent.clone(), Some(ConceptKind::Functionality), None)?;
        }
        for (id, a) in &doc.agent_types {
            declare(id, a.parent.clone(), Some(ConceptKind::AgentType), None)?;
        }

        // parent references and acyclicity of the parent chain
        for c in concepts.values() {
            if let Some(p) = &c.parent {
                if !concepts.contains_key(p) {
                    return Err(Error::validation(&c.id, format!("unknown parent concept '{p}'")));
                }
            }
            let mut seen = BTreeSet::new();
            let mut cur = Some(c.id.as_str());
            while let Some(id) = cur {
                if !seen.insert(id) {
                    return Err(Error::validation(&c.id, "cycle in parent chain"));
                }
                cur = concepts[id].parent.as_deref();
            }
        }

        // concepts without an explicit kind take the kind of the nearest
        // ancestor that declares one
        for id in &implicit_kind {
            let mut kind = ConceptKind::Resource;
            let mut cur = concepts[id].parent.clone();
            while let Some(p) = cur {
                if !implicit_kind.contains(&p) {
                    kind = concepts[&p].kind;
                    break;
                }
                cur = concepts[&p].parent.clone();
            }
            concepts.get_mut(id).expect("declared").kind = kind;
        }
        for c in concepts.values() {
            if let Some(p) = &c.parent {
                if concepts[p].kind != c.kind {
                    return Err(Error::validation(
                        &c.id,
                        format!(
                            "{} concept cannot inherit from {} concept '{p}'",
                            c.kind, concepts[p].kind
                        ),
                    ));
                }
            }
            if let Some(p) = c.p_survival {
                if !(0.0..=1.0).contains(&p) || p.is_nan() {
                    return Err(Error::validation(&c.id, format!("p_survival {p} outside [0,1]")));
                }
            }
        }

        // functionality requirements
        let mut requirements = BTreeMap::new();
        for (id, f) in &doc.functionalities {
            for c in f.requires.keys() {
                match concepts.get(c).map(|c| c.kind) {
                    None => return Err(Error::validation(id, format!("requires unknown concept '{c}'"))),
                    Some(ConceptKind::Resource) | Some(ConceptKind::Functionality) => {}
                    Some(kind) => {
                        return Err(Error::validation(
                            id,
                            format!(
                                "requires {kind} concept '{c}'; only resources and functionalities may be required"
                            ),
                        ))
                    }
                }
            }
            requirements.insert(id.clone(), f.requires.clone());
        }
        for c in concepts.values() {
            if c.kind == ConceptKind::Functionality {
                requirements.entry(c.id.clone()).or_default();
            }
        }
        let flat_requirements = flatten_all(&requirements)?;

        // agent types
        let mut agent_types = BTreeMap::new();
        for id in doc.agent_types.keys() {
            let def = effective_agent_type(id, &doc.agent_types)?;
            for r in def.resources.keys() {
                match concepts.get(r).map(|c| c.kind) {
                    Some(ConceptKind::Resource) => {}
                    Some(kind) => {
                        return Err(Error::validation(
                            id,
                            format!("resource entry '{r}' is a {kind} concept"),
                        ))
                    }
                    None => return Err(Error::validation(id, format!("unknown resource concept '{r}'"))),
                }
            }
            for i in &def.interfaces {
                match concepts.get(&i.interface).map(|c| c.kind) {
                    Some(ConceptKind::Interface) => {}
                    _ => {
                        return Err(Error::validation(
                            id,
                            format!("'{}' is not a declared interface concept", i.interface),
                        ))
                    }
                }
            }
            for (name, value) in &def.properties {
                check_property_range(id, name, *value)?;
            }
            agent_types.insert(id.clone(), def);
        }

        // formulas
        let mut formulas = BTreeMap::new();
        for (target, src) in &doc.formulas {
            let f = Formula::parse(src).map_err(|e| Error::validation(target, e.to_string()))?;
            formulas.insert(target.clone(), f);
        }
        check_formula_cycles(&formulas)?;

        let mut model = ResourceModel {
            concepts,
            requirements,
            flat_requirements,
            agent_types,
            formulas,
            policies: BTreeMap::new(),
            rules: BTreeMap::new(),
        };

        let mut policies = BTreeMap::new();
        for (name, steps) in &doc.rules.policies {
            policies.insert(name.clone(), SelectionPolicy::from_doc(name, steps)?);
        }
        let mut rules = BTreeMap::new();
        for (target, terms) in &doc.rules.properties {
            rules.insert(target.clone(), InferenceRule::from_doc(target, terms)?);
        }
        crate::policies::install_builtins(&model, &mut policies, &mut rules);
        for (name, p) in &policies {
            p.validate(name, &model)?;
        }
        for (target, r) in &rules {
            r.validate(target, &policies)?;
        }
        model.policies = policies;
        model.rules = rules;
        Ok(model)
    }

    // -- concept queries ----------------------------------------------------

    pub fn concept(&self, id: &str) -> Result<&Concept> {
        self.concepts
            .get(id)
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn has_concept(&self, id: &str) -> bool {
        self.concepts.contains_key(id)
    }

    pub fn is_functionality(&self, id: &str) -> bool {
        self.concepts
            .get(id)
            .is_some_and(|c| c.kind == ConceptKind::Functionality)
    }

    pub fn functionalities(&self) -> impl Iterator<Item = &str> {
        self.requirements.keys().map(String::as_str)
    }

    /// True iff `concept` equals `ancestor` or `ancestor` lies on its parent
    /// chain.
    pub fn is_instance_of(&self, concept: &str, ancestor: &str) -> Result<bool> {
        self.concept(ancestor)?;
        let mut cur = Some(self.concept(concept)?);
        while let Some(c) = cur {
            if c.id == ancestor {
                return Ok(true);
            }
            cur = c.parent.as_deref().map(|p| &self.concepts[p]);
        }
        Ok(false)
    }

    /// Survival probability of a resource concept, inherited from the
    /// closest ancestor that declares one.
    pub fn survival_probability(&self, concept: &str) -> Result<f64> {
        let mut cur = Some(self.concept(concept)?);
        while let Some(c) = cur {
            if let Some(p) = c.p_survival {
                return Ok(p);
            }
            cur = c.parent.as_deref().map(|p| &self.concepts[p]);
        }
        Ok(DEFAULT_P_SURVIVAL)
    }

    // -- functionality requirements ----------------------------------------

    fn functionality(&self, f: &str) -> Result<&BTreeMap<String, u32>> {
        match self.concepts.get(f) {
            None => Err(Error::UnknownConcept(f.to_string())),
            Some(c) if c.kind != ConceptKind::Functionality => Err(Error::UnknownFunctionality(f.to_string())),
            Some(_) => Ok(&self.flat_requirements[f]),
        }
    }

    /// Flattened resource requirements of a functionality. Requirements on
    /// the same resource reached through different dependencies are merged
    /// by taking the maximum.
    pub fn resource_requirements(&self, f: &str) -> Result<&BTreeMap<String, u32>> {
        self.functionality(f)
    }

    /// Declared (unflattened) requirements of a functionality.
    pub fn direct_requirements(&self, f: &str) -> Result<&BTreeMap<String, u32>> {
        self.functionality(f)?;
        Ok(&self.requirements[f])
    }

    pub fn card_min(&self, c: &str, f: &str) -> Result<u32> {
        self.concept(c)?;
        Ok(self.functionality(f)?.get(c).copied().unwrap_or(0))
    }

    /// Number of resource instances in `agent` that are instances of `c`
    /// (subconcepts included).
    pub fn card_max(&self, c: &str, agent: &GeneralAgentType) -> Result<u32> {
        self.concept(c)?;
        let mut total = 0u32;
        for (ty, count) in agent.iter() {
            let def = self.agent_type(ty)?;
            let mut per_atom = 0u32;
            for (r, k) in &def.resources {
                if self.is_instance_of(r, c)? {
                    per_atom += k;
                }
            }
            total += count * per_atom;
        }
        Ok(total)
    }

    /// Survival probability used for the resource block `c` of `agent`: the
    /// minimum over all counted instances, or the concept's own value when
    /// the agent carries none.
    pub fn effective_survival(&self, c: &str, agent: &GeneralAgentType) -> Result<f64> {
        let mut p: Option<f64> = None;
        for (ty, count) in agent.iter() {
            if count == 0 {
                continue;
            }
            for (r, k) in &self.agent_type(ty)?.resources {
                if *k > 0 && self.is_instance_of(r, c)? {
                    let pr = self.survival_probability(r)?;
                    p = Some(p.map_or(pr, |q: f64| q.min(pr)));
                }
            }
        }
        match p {
            Some(p) => Ok(p),
            None => self.survival_probability(c),
        }
    }

    // -- agent types and properties ----------------------------------------

    pub fn agent_type(&self, id: &str) -> Result<&AgentTypeDefinition> {
        self.agent_types
            .get(id)
            .ok_or_else(|| Error::UnknownConcept(id.to_string()))
    }

    pub fn agent_types(&self) -> impl Iterator<Item = &AgentTypeDefinition> {
        self.agent_types.values()
    }

    pub fn formula(&self, target: &str) -> Option<&Formula> {
        self.formulas.get(target)
    }

    pub fn policy(&self, name: &str) -> Option<&SelectionPolicy> {
        self.policies.get(name)
    }

    pub fn rule(&self, target: &str) -> Option<&InferenceRule> {
        self.rules.get(target)
    }

    /// Value of a numeric property for an atomic agent type: the directly
    /// assigned value if there is one, otherwise the derivation formula
    /// evaluated on resolved operands.
    pub fn resolve_property(&self, agent_type: &str, property: &str) -> Result<f64> {
        let def = self.agent_type(agent_type)?;
        if let Some(v) = def.properties.get(property) {
            return Ok(*v);
        }
        match self.formulas.get(property) {
            Some(f) => f.eval(&mut |name: &str| self.resolve_property(agent_type, name)),
            None => Err(Error::unresolvable(agent_type, property)),
        }
    }

    /// Mobile agent types have a positive nominal velocity.
    pub fn is_mobile(&self, agent_type: &str) -> Result<bool> {
        match self.resolve_property(agent_type, "v_nom") {
            Ok(v) => Ok(v > 0.0),
            Err(Error::UnresolvableProperty { .. }) => {
                self.agent_type(agent_type)?;
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }
}

fn check_property_range(owner: &str, name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::validation(owner, format!("property {name} is not finite")));
    }
    let nonneg = ["tcap", "tcon", "tload", "esourcecap", "esupply", "pw", "v_nom"];
    if nonneg.contains(&name) && value < 0.0 {
        return Err(Error::validation(
            owner,
            format!("property {name} = {value} must be >= 0"),
        ));
    }
    if name == "probabilityOfSurvival" && !(0.0..=1.0).contains(&value) {
        return Err(Error::validation(
            owner,
            format!("property {name} = {value} outside [0,1]"),
        ));
    }
    Ok(())
}

fn effective_agent_type(id: &str, docs: &BTreeMap<String, AgentTypeDoc>) -> Result<AgentTypeDefinition> {
    // collect the chain root-first; parent existence/acyclicity is already checked
    let mut chain = Vec::new();
    let mut cur = Some(id);
    while let Some(c) = cur {
        let doc = docs
            .get(c)
            .ok_or_else(|| Error::validation(id, format!("parent '{c}' is not an agent type")))?;
        chain.push(doc);
        cur = doc.parent.as_deref();
    }
    let mut def = AgentTypeDefinition {
        id: id.to_string(),
        parent: docs[id].parent.clone(),
        resources: BTreeMap::new(),
        interfaces: Vec::new(),
        properties: BTreeMap::new(),
    };
    for doc in chain.iter().rev() {
        def.resources.extend(doc.resources.iter().map(|(k, v)| (k.clone(), *v)));
        def.properties
            .extend(doc.properties.iter().map(|(k, v)| (k.clone(), *v)));
        for spec in &doc.interfaces {
            def.interfaces
                .retain(|s| !(s.interface == spec.interface && s.gender == spec.gender));
            def.interfaces.push(spec.clone());
        }
    }
    def.resources.retain(|_, v| *v > 0);
    def.interfaces.retain(|s| s.count > 0);
    def.interfaces
        .sort_by(|a, b| (&a.interface, a.gender).cmp(&(&b.interface, b.gender)));
    Ok(def)
}

fn flatten_all(reqs: &BTreeMap<String, BTreeMap<String, u32>>) -> Result<BTreeMap<String, BTreeMap<String, u32>>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }

    fn visit(
        f: &str,
        reqs: &BTreeMap<String, BTreeMap<String, u32>>,
        marks: &mut BTreeMap<String, Mark>,
        out: &mut BTreeMap<String, BTreeMap<String, u32>>,
        stack: &mut Vec<String>,
    ) -> Result<()> {
        match marks.get(f) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Active) => {
                let start = stack.iter().position(|s| s == f).unwrap_or(0);
                let mut cycle: Vec<&str> = stack[start..].iter().map(String::as_str).collect();
                cycle.push(f);
                return Err(Error::validation(
                    f,
                    format!("functionality dependency cycle: {}", cycle.join(" -> ")),
                ));
            }
            None => {}
        }
        marks.insert(f.to_string(), Mark::Active);
        stack.push(f.to_string());
        let mut flat: BTreeMap<String, u32> = BTreeMap::new();
        for (c, n) in &reqs[f] {
            if *n == 0 {
                continue;
            }
            if reqs.contains_key(c) {
                visit(c, reqs, marks, out, stack)?;
                for (r, m) in &out[c] {
                    let e = flat.entry(r.clone()).or_insert(0);
                    *e = (*e).max(*m);
                }
            } else {
                let e = flat.entry(c.clone()).or_insert(0);
                *e = (*e).max(*n);
            }
        }
        stack.pop();
        marks.insert(f.to_string(), Mark::Done);
        out.insert(f.to_string(), flat);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut out = BTreeMap::new();
    for f in reqs.keys() {
        visit(f, reqs, &mut marks, &mut out, &mut Vec::new())?;
    }
    Ok(out)
}

fn check_formula_cycles(formulas: &BTreeMap<String, Formula>) -> Result<()> {
    fn visit<'a>(
        t: &'a str,
        formulas: &'a BTreeMap<String, Formula>,
        active: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Result<()> {
        if done.contains(t) {
            return Ok(());
        }
        if active.contains(&t) {
            return Err(Error::validation(t, "cyclic property derivation"));
        }
        let Some((key, f)) = formulas.get_key_value(t) else {
            return Ok(());
        };
        active.push(key);
        for v in f.variables() {
            if let Some((k, _)) = formulas.get_key_value(v.as_str()) {
                visit(k, formulas, active, done)?;
            }
        }
        active.pop();
        done.insert(key);
        Ok(())
    }
    let mut done = BTreeSet::new();
    for t in formulas.keys() {
        visit(t, formulas, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}
