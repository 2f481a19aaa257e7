//! Atomic, composite and general agents, their types, and coalition
//! structures over an agent pool.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{Gender, ResourceModel};

/// An inseparable physical robot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomicAgent {
    pub id: String,
    pub agent_type: String,
}

impl AtomicAgent {
    pub fn new(id: impl Into<String>, agent_type: impl Into<String>) -> Self {
        AtomicAgent {
            id: id.into(),
            agent_type: agent_type.into(),
        }
    }
}

impl fmt::Display for AtomicAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// A non-empty set of atomic agents forming a physical coalition. Composite
/// iff it has more than one member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneralAgent {
    members: BTreeSet<AtomicAgent>,
}

impl GeneralAgent {
    pub fn new(members: impl IntoIterator<Item = AtomicAgent>) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if members.is_empty() {
            return Err(Error::EmptyAgent);
        }
        Ok(GeneralAgent { members })
    }

    pub fn singleton(agent: AtomicAgent) -> Self {
        GeneralAgent {
            members: BTreeSet::from([agent]),
        }
    }

    pub fn members(&self) -> &BTreeSet<AtomicAgent> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_composite(&self) -> bool {
        self.members.len() > 1
    }

    pub fn contains(&self, agent: &AtomicAgent) -> bool {
        self.members.contains(agent)
    }

    pub fn agent_type(&self) -> GeneralAgentType {
        type_of(self)
    }

    /// Union of two agents (physical join).
    pub fn join(&self, other: &GeneralAgent) -> GeneralAgent {
        GeneralAgent {
            members: self.members.union(&other.members).cloned().collect(),
        }
    }
}

impl fmt::Display for GeneralAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.members.iter().map(|a| a.id.as_str()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

/// Multiset over atomic agent types: the cardinality function γ.
///
/// Zero counts are never stored, so equality and ordering are count-wise.
/// The derived ordering is lexicographic over `(type, count)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneralAgentType(BTreeMap<String, u32>);

impl GeneralAgentType {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, u32)>) -> Self {
        let mut t = Self::default();
        for (ty, c) in pairs {
            t.add(ty, c);
        }
        t
    }

    pub fn single(agent_type: impl Into<String>) -> Self {
        Self::from_pairs([(agent_type.into(), 1)])
    }

    pub fn add(&mut self, agent_type: impl Into<String>, count: u32) {
        if count > 0 {
            *self.0.entry(agent_type.into()).or_insert(0) += count;
        }
    }

    /// Removes up to `count` instances; returns how many were removed.
    pub fn remove(&mut self, agent_type: &str, count: u32) -> u32 {
        let Some(c) = self.0.get_mut(agent_type) else {
            return 0;
        };
        let removed = count.min(*c);
        *c -= removed;
        if *c == 0 {
            self.0.remove(agent_type);
        }
        removed
    }

    pub fn set(&mut self, agent_type: impl Into<String>, count: u32) {
        let agent_type = agent_type.into();
        if count == 0 {
            self.0.remove(&agent_type);
        } else {
            self.0.insert(agent_type, count);
        }
    }

    pub fn count(&self, agent_type: &str) -> u32 {
        self.0.get(agent_type).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Count-wise `self ⊆ other`.
    pub fn is_subset_of(&self, other: &GeneralAgentType) -> bool {
        self.iter().all(|(t, c)| other.count(t) >= c)
    }

    /// Count-wise difference, saturating at zero.
    pub fn saturating_sub(&self, other: &GeneralAgentType) -> GeneralAgentType {
        let mut out = self.clone();
        for (t, c) in other.iter() {
            out.remove(t, c);
        }
        out
    }

    /// The reverse mapping from a type to a representative agent. Members are
    /// named `<type>#<k>`.
    pub fn instantiate(&self) -> Option<GeneralAgent> {
        let members = self
            .iter()
            .flat_map(|(t, c)| (0..c).map(move |k| AtomicAgent::new(format!("{t}#{k}"), t)));
        GeneralAgent::new(members).ok()
    }
}

impl fmt::Display for GeneralAgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(t, c)| format!("({t},{c})")).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for GeneralAgentType {
    type Err = Error;

    /// Parses `SherpaTT,Payload:3` style lists; a bare name counts once and
    /// repeated names accumulate.
    fn from_str(s: &str) -> Result<Self> {
        let mut t = GeneralAgentType::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, count) = match part.split_once(':') {
                Some((n, c)) => {
                    let c = c
                        .trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("invalid count in '{part}'")))?;
                    (n.trim(), c)
                }
                None => (part, 1),
            };
            t.add(name, count);
        }
        Ok(t)
    }
}

/// Counts members per atomic type.
pub fn type_of(agent: &GeneralAgent) -> GeneralAgentType {
    let mut t = GeneralAgentType::default();
    for a in agent.members() {
        t.add(a.agent_type.as_str(), 1);
    }
    t
}

/// Count-wise sum.
pub fn union_types(a: &GeneralAgentType, b: &GeneralAgentType) -> GeneralAgentType {
    let mut out = a.clone();
    for (t, c) in b.iter() {
        out.add(t, c);
    }
    out
}

/// Typed placeholder for an atomic agent instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Role {
    pub name: String,
    pub agent_type: String,
}

impl Role {
    pub fn new(name: impl Into<String>, agent_type: impl Into<String>) -> Self {
        Role {
            name: name.into(),
            agent_type: agent_type.into(),
        }
    }

    pub fn as_atomic(&self) -> AtomicAgent {
        AtomicAgent::new(self.name.clone(), self.agent_type.clone())
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Disjoint partition of an agent pool into operative general agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoalitionStructure {
    agents: Vec<GeneralAgent>,
}

impl CoalitionStructure {
    /// Builds a structure and checks that the agents are pairwise disjoint
    /// and cover `pool` exactly.
    pub fn new(pool: &BTreeSet<AtomicAgent>, agents: impl IntoIterator<Item = GeneralAgent>) -> Result<Self> {
        let cs = Self::from_agents(agents)?;
        let covered = cs.pool();
        if &covered != pool {
            let missing: Vec<_> = pool.difference(&covered).map(|a| a.id.clone()).collect();
            let extra: Vec<_> = covered.difference(pool).map(|a| a.id.clone()).collect();
            return Err(Error::NotAPartition(format!(
                "missing {missing:?}, not in pool {extra:?}"
            )));
        }
        Ok(cs)
    }

    /// Builds a structure over the union of the given agents.
    pub fn from_agents(agents: impl IntoIterator<Item = GeneralAgent>) -> Result<Self> {
        let mut agents: Vec<GeneralAgent> = agents.into_iter().collect();
        let mut seen = HashSet::new();
        for ga in &agents {
            for a in ga.members() {
                if !seen.insert(a) {
                    return Err(Error::NotAPartition(format!(
                        "atom '{}' appears in more than one agent",
                        a.id
                    )));
                }
            }
        }
        agents.sort();
        Ok(CoalitionStructure { agents })
    }

    pub fn singletons(pool: &BTreeSet<AtomicAgent>) -> Self {
        CoalitionStructure {
            agents: pool.iter().cloned().map(GeneralAgent::singleton).collect(),
        }
    }

    pub fn agents(&self) -> &[GeneralAgent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn pool(&self) -> BTreeSet<AtomicAgent> {
        self.agents.iter().flat_map(|ga| ga.members().iter().cloned()).collect()
    }

    pub fn contains(&self, agent: &GeneralAgent) -> bool {
        self.agents.binary_search(agent).is_ok()
    }

    pub fn agent_of(&self, atom: &AtomicAgent) -> Option<&GeneralAgent> {
        self.agents.iter().find(|ga| ga.contains(atom))
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.agents.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

// ---------------------------------------------------------------------------
// Link space
// ---------------------------------------------------------------------------

/// Free interface slots of one placed atom, indexed like the interface list
/// of its type.
type Slots = Vec<u32>;
/// Partial tree and remaining atom counts already known to fail.
type SearchState = (Vec<(usize, Slots)>, Vec<u32>);

struct LinkSearch {
    capacities: Vec<Vec<u32>>,
    /// compat[a][slot_a][b]: slots of type b that can pair with slot_a of type a
    compat: Vec<Vec<Vec<Vec<usize>>>>,
    failed: HashSet<SearchState>,
}

impl LinkSearch {
    fn dfs(&mut self, tree: &mut Vec<(usize, Slots)>, remaining: &mut Vec<u32>) -> bool {
        if remaining.iter().all(|&c| c == 0) {
            return true;
        }
        let mut key_tree = tree.clone();
        key_tree.sort();
        let key = (key_tree, remaining.clone());
        if self.failed.contains(&key) {
            return false;
        }
        for t in 0..remaining.len() {
            if remaining[t] == 0 {
                continue;
            }
            // placed atoms with identical state are interchangeable
            let mut tried: HashSet<(usize, Slots)> = HashSet::new();
            for u in 0..tree.len() {
                if !tried.insert(tree[u].clone()) {
                    continue;
                }
                let tu = tree[u].0;
                for su in 0..tree[u].1.len() {
                    if tree[u].1[su] == 0 {
                        continue;
                    }
                    let partners = self.compat[tu][su][t].clone();
                    for st in partners {
                        let mut fresh = self.capacities[t].clone();
                        if fresh[st] == 0 {
                            continue;
                        }
                        fresh[st] -= 1;
                        tree[u].1[su] -= 1;
                        remaining[t] -= 1;
                        tree.push((t, fresh));
                        let ok = self.dfs(tree, remaining);
                        tree.pop();
                        remaining[t] += 1;
                        tree[u].1[su] += 1;
                        if ok {
                            return true;
                        }
                    }
                }
            }
        }
        self.failed.insert(key);
        false
    }
}

/// True iff the atoms counted by `agent_type` can be linked into one
/// connected structure where every link pairs one free male interface with
/// one free, compatible female interface on two distinct atoms.
///
/// Interfaces are compatible when one concept is an instance of the other.
/// Singletons and the empty type are trivially feasible.
pub fn connection_feasible(model: &ResourceModel, agent_type: &GeneralAgentType) -> Result<bool> {
    let types: Vec<&str> = agent_type.types().collect();
    let mut slot_specs: Vec<Vec<(&str, Gender)>> = Vec::with_capacity(types.len());
    let mut capacities: Vec<Vec<u32>> = Vec::with_capacity(types.len());
    for t in &types {
        let def = model.agent_type(t)?;
        slot_specs.push(
            def.interfaces
                .iter()
                .map(|s| (s.interface.as_str(), s.gender))
                .collect(),
        );
        capacities.push(def.interfaces.iter().map(|s| s.count).collect());
    }
    let n = agent_type.total();
    if n <= 1 {
        return Ok(true);
    }

    // a spanning tree needs n-1 links, each using one male and one female slot
    let (mut males, mut females) = (0u64, 0u64);
    for (i, (_, count)) in agent_type.iter().enumerate() {
        if capacities[i].iter().all(|&c| c == 0) {
            return Ok(false);
        }
        for (spec, cap) in slot_specs[i].iter().zip(&capacities[i]) {
            let total = u64::from(*cap) * u64::from(count);
            match spec.1 {
                Gender::Male => males += total,
                Gender::Female => females += total,
            }
        }
    }
    if males < u64::from(n - 1) || females < u64::from(n - 1) {
        return Ok(false);
    }

    let mut compat = Vec::with_capacity(types.len());
    for specs_a in &slot_specs {
        let mut per_slot = Vec::with_capacity(specs_a.len());
        for (ia, ga) in specs_a {
            let mut per_b = Vec::with_capacity(types.len());
            for specs_b in &slot_specs {
                let mut ok = Vec::new();
                for (sb, (ib, gb)) in specs_b.iter().enumerate() {
                    if ga != gb && (model.is_instance_of(ia, ib)? || model.is_instance_of(ib, ia)?) {
                        ok.push(sb);
                    }
                }
                per_b.push(ok);
            }
            per_slot.push(per_b);
        }
        compat.push(per_slot);
    }

    let mut remaining: Vec<u32> = agent_type.iter().map(|(_, c)| c).collect();
    remaining[0] -= 1;
    let mut tree = vec![(0, capacities[0].clone())];
    let mut search = LinkSearch {
        capacities,
        compat,
        failed: HashSet::new(),
    };
    Ok(search.dfs(&mut tree, &mut remaining))
}

/// All type-distinct sub-multisets of `pool` with between 1 and `bound`
/// atoms that pass [`connection_feasible`], in lexicographic order.
pub fn enumerate_dormant_types(
    model: &ResourceModel,
    pool: &GeneralAgentType,
    bound: u32,
) -> Result<Vec<GeneralAgentType>> {
    let entries: Vec<(&str, u32)> = pool.iter().collect();
    let mut out = Vec::new();
    if bound == 0 {
        return Ok(out);
    }
    let mut counts = vec![0u32; entries.len()];
    loop {
        // odometer increment
        let mut i = 0;
        loop {
            if i == entries.len() {
                out.sort();
                return Ok(out);
            }
            if counts[i] < entries[i].1 {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
        let total: u32 = counts.iter().sum();
        if total == 0 || total > bound {
            continue;
        }
        let t = GeneralAgentType::from_pairs(entries.iter().zip(&counts).map(|((ty, _), c)| (*ty, *c)));
        if connection_feasible(model, &t)? {
            out.push(t);
        }
    }
}
