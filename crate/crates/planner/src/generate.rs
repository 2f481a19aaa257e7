//! Randomized construction of solution candidates.
//!
//! Requirements are handled in temporal order. Each gets one of its minimal
//! agent types (the required cardinalities grown until the functionalities
//! are supported), then free roles of those types are bound to it. Mobile
//! roles drive themselves; immobile roles need a mobile role to carry them,
//! either on a move it already makes or on a detour inserted into its
//! timeline. Travel times enter the temporal network as minimum gaps, so
//! every committed step keeps the network consistent.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use log::trace;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reorg_core::{
    pvalue_composite, reliability, support_set, transition_cost, AtomicAgent, CoalitionStructure, Error as ModelError,
    GeneralAgent, GeneralAgentType, ResourceModel, Role,
};
use serde::{Deserialize, Serialize};

use crate::candidate::{Assignment, Snapshot, SolutionCandidate, Timeline, Transfer, Visit};
use crate::error::{Error, Result};
use crate::geo::distance;
use crate::mission::{Constraint, Mission};
use crate::temporal::{Closure, TemporalNetwork};

/// Extra agents that may be added to requirements which compete with
/// others for the same agents (overlapping in time at different places).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub psi_m: u32,
    pub psi_im: u32,
}

/// Largest number of atoms added to a requirement's agent type to make it
/// support the requested functionalities.
const MAX_ADDED_ATOMS: u32 = 4;
/// Minimal types tried per requirement before giving up on it.
const MAX_TYPE_TRIES: usize = 3;
/// Pickup/drop-off timepoint pairs tried per carrier for a detour.
const MAX_DETOUR_PAIRS: usize = 8;
const CAPACITY_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct StopAt {
    id: u32,
    loc: usize,
    from: usize,
    to: usize,
    req: Option<usize>,
}

#[derive(Debug, Clone)]
struct Carry {
    cargo: usize,
    leg: (u32, u32),
    carrier: usize,
    trip: (u32, u32),
    units: f64,
}

#[derive(Debug, Clone)]
struct State {
    visits: Vec<Vec<StopAt>>,
    carries: Vec<Carry>,
    next_id: u32,
    closure: Closure,
    types: Vec<GeneralAgentType>,
    bound: Vec<Vec<usize>>,
    satisfied: Vec<bool>,
    notes: Vec<Option<String>>,
}

/// Precomputed view of a mission for repeated candidate generation.
pub struct Planner<'a> {
    model: &'a ResourceModel,
    mission: &'a Mission,
    network: TemporalNetwork,
    closure: Closure,
    roles: Vec<Role>,
    mobile: Vec<bool>,
    speed: Vec<f64>,
    capacity: Vec<f64>,
    load: Vec<f64>,
    locations: Vec<String>,
    dist: Vec<Vec<f64>>,
    req_loc: Vec<usize>,
    req_from: Vec<usize>,
    req_to: Vec<usize>,
    functions: Vec<Vec<String>>,
    options: Vec<Vec<GeneralAgentType>>,
    order: Vec<usize>,
    initial: Vec<bool>,
    conflicted: Vec<bool>,
    forced: Vec<Vec<usize>>,
}

impl<'a> Planner<'a> {
    pub fn new(model: &'a ResourceModel, mission: &'a Mission) -> Result<Self> {
        let network = TemporalNetwork::from_mission(mission);
        let closure = network
            .solve()
            .map_err(|w| Error::validation("constraints", format!("temporally inconsistent: {}", w.join("; "))))?;

        let roles = mission.roles();
        let mut mobile = Vec::new();
        let mut speed = Vec::new();
        let mut capacity = Vec::new();
        let mut load = Vec::new();
        for r in &roles {
            let m = model.is_mobile(&r.agent_type)?;
            mobile.push(m);
            speed.push(if m {
                model.resolve_property(&r.agent_type, "v_nom")?
            } else {
                0.0
            });
            capacity.push(optional_property(model, &r.agent_type, "tcap", 0.0)?);
            load.push(optional_property(model, &r.agent_type, "tcon", 1.0)?);
        }

        let locations: Vec<String> = mission.locations.keys().cloned().collect();
        let loc_index: HashMap<&str, usize> = locations.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut dist = vec![vec![0.0; locations.len()]; locations.len()];
        for (i, a) in locations.iter().enumerate() {
            for (j, b) in locations.iter().enumerate() {
                dist[i][j] = distance(&mission.locations[a], &mission.locations[b])?;
            }
        }

        let tp = |t: &str| network.index_of(t).expect("validated timepoint");
        let reqs = &mission.requirements;
        let req_loc: Vec<usize> = reqs.iter().map(|r| loc_index[r.location.as_str()]).collect();
        let req_from: Vec<usize> = reqs.iter().map(|r| tp(&r.from)).collect();
        let req_to: Vec<usize> = reqs.iter().map(|r| tp(&r.to)).collect();
        let initial: Vec<bool> = reqs.iter().map(|r| mission.is_initial(r)).collect();
        let functions: Vec<Vec<String>> = reqs
            .iter()
            .map(|r| mission.effective_functions(r).into_iter().collect())
            .collect();

        let mut order: Vec<usize> = (0..reqs.len()).collect();
        order.sort_by_key(|&s| (closure.rank(req_from[s]), closure.rank(req_to[s]), s));

        let mut conflicted = vec![false; reqs.len()];
        for s in 0..reqs.len() {
            for r in 0..reqs.len() {
                if s != r
                    && req_loc[s] != req_loc[r]
                    && !closure.entails_lt(req_to[s], req_from[r])
                    && !closure.entails_lt(req_to[r], req_from[s])
                {
                    conflicted[s] = true;
                }
            }
        }

        let role_index: HashMap<&str, usize> = roles.iter().enumerate().map(|(i, r)| (r.name.as_str(), i)).collect();
        let req_index: HashMap<&str, usize> = reqs.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
        let mut forced = vec![Vec::new(); reqs.len()];
        for c in &mission.constraints {
            if let Constraint::MinEqual {
                requirements,
                roles: names,
            }
            | Constraint::AllEqual {
                requirements,
                roles: names,
            } = c
            {
                for s in requirements {
                    for n in names {
                        forced[req_index[s.as_str()]].push(role_index[n.as_str()]);
                    }
                }
            }
        }

        let mut planner = Planner {
            model,
            mission,
            network,
            closure,
            roles,
            mobile,
            speed,
            capacity,
            load,
            locations,
            dist,
            req_loc,
            req_from,
            req_to,
            functions,
            options: Vec::new(),
            order,
            initial,
            conflicted,
            forced,
        };
        planner.options = (0..reqs.len())
            .map(|s| planner.type_options(s))
            .collect::<Result<_>>()?;
        Ok(planner)
    }

    pub fn mission(&self) -> &Mission {
        self.mission
    }

    pub fn model(&self) -> &ResourceModel {
        self.model
    }

    /// Minimal agent types able to serve requirement `s`.
    pub fn options(&self, s: usize) -> &[GeneralAgentType] {
        &self.options[s]
    }

    /// Requirements that may overlap in time with another requirement at a
    /// different location.
    pub fn is_conflicted(&self, s: usize) -> bool {
        self.conflicted[s]
    }

    fn cardinality_bounds(&self, s: usize) -> (GeneralAgentType, BTreeMap<String, u32>) {
        let id = &self.mission.requirements[s].id;
        let mut base = self.mission.requirements[s].agents.clone();
        let mut caps: BTreeMap<String, u32> = self.mission.pool.iter().map(|(t, c)| (t.to_string(), c)).collect();
        for c in &self.mission.constraints {
            match c {
                Constraint::MinCard {
                    requirements,
                    agent_type,
                    value,
                } if requirements.contains(id) => {
                    if base.count(agent_type) < *value {
                        base.set(agent_type.clone(), *value);
                    }
                }
                Constraint::MaxCard {
                    requirements,
                    agent_type,
                    value,
                } if requirements.contains(id) => {
                    let cap = caps.entry(agent_type.clone()).or_insert(0);
                    *cap = (*cap).min(*value);
                }
                _ => {}
            }
        }
        (base, caps)
    }

    fn within_caps(t: &GeneralAgentType, caps: &BTreeMap<String, u32>) -> bool {
        t.iter().all(|(ty, c)| c <= caps.get(ty).copied().unwrap_or(0))
    }

    /// Whether `t` provides the requirement's functionalities and meets its
    /// property bounds.
    fn serves(&self, s: usize, t: &GeneralAgentType) -> Result<bool> {
        if t.is_empty() {
            return Ok(self.functions[s].is_empty());
        }
        if !self.functions[s].is_empty() {
            let support = support_set(self.model, t, self.functions[s].iter().map(String::as_str))?;
            if support < reorg_core::capability::full_support() {
                return Ok(false);
            }
        }
        let id = &self.mission.requirements[s].id;
        for c in &self.mission.constraints {
            match c {
                Constraint::MinProp {
                    requirement,
                    property,
                    value,
                    ..
                } if requirement == id && !property_at_least(self.model, t, property, *value, true)? => {
                    return Ok(false);
                }
                Constraint::MaxProp {
                    requirement,
                    property,
                    value,
                    ..
                } if requirement == id && !property_at_least(self.model, t, property, *value, false)? => {
                    return Ok(false);
                }
                _ => {}
            }
        }
        Ok(true)
    }

    fn type_options(&self, s: usize) -> Result<Vec<GeneralAgentType>> {
        let (base, caps) = self.cardinality_bounds(s);
        if !Self::within_caps(&base, &caps) {
            return Ok(Vec::new());
        }
        if self.serves(s, &base)? {
            return Ok(vec![base]);
        }
        let types: Vec<&str> = self.mission.pool.types().collect();
        for k in 1..=MAX_ADDED_ATOMS {
            let mut found = Vec::new();
            let mut add = GeneralAgentType::new();
            self.grow(s, &base, &caps, &types, 0, k, &mut add, &mut found)?;
            if !found.is_empty() {
                found.sort();
                found.dedup();
                return Ok(found);
            }
        }
        Ok(Vec::new())
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &self,
        s: usize,
        base: &GeneralAgentType,
        caps: &BTreeMap<String, u32>,
        types: &[&str],
        start: usize,
        left: u32,
        add: &mut GeneralAgentType,
        found: &mut Vec<GeneralAgentType>,
    ) -> Result<()> {
        if left == 0 {
            let t = reorg_core::union_types(base, add);
            if Self::within_caps(&t, caps) && self.serves(s, &t)? {
                found.push(t);
            }
            return Ok(());
        }
        for i in start..types.len() {
            add.add(types[i], 1);
            self.grow(s, base, caps, types, i, left - 1, add, found)?;
            add.remove(types[i], 1);
        }
        Ok(())
    }

    /// Builds one candidate. The base assignment draws from one random
    /// stream and the extra agents from another, so a candidate generated
    /// with zero extras is also reachable under larger bounds.
    pub fn generate(&self, bounds: &Bounds, seed: u64) -> Result<SolutionCandidate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut extra_rng = ChaCha8Rng::seed_from_u64(seed);
        extra_rng.set_stream(1);

        let n = self.mission.requirements.len();
        let mut st = State {
            visits: vec![Vec::new(); self.roles.len()],
            carries: Vec::new(),
            next_id: 0,
            closure: self.closure.clone(),
            types: vec![GeneralAgentType::new(); n],
            bound: vec![Vec::new(); n],
            satisfied: vec![false; n],
            notes: vec![None; n],
        };
        for &s in &self.order {
            self.assign(&mut st, s, &mut rng)?;
        }
        if bounds.psi_m > 0 || bounds.psi_im > 0 {
            for &s in &self.order {
                if self.conflicted[s] && !self.initial[s] {
                    let km = extra_rng.gen_range(0..=bounds.psi_m);
                    let kim = extra_rng.gen_range(0..=bounds.psi_im);
                    if st.satisfied[s] {
                        self.add_extras(&mut st, s, km, true, &mut extra_rng)?;
                        self.add_extras(&mut st, s, kim, false, &mut extra_rng)?;
                    }
                }
            }
        }
        self.enforce_constraints(&mut st)?;

        let counted: Vec<usize> = if self.initial.iter().all(|&i| i) {
            (0..n).collect()
        } else {
            (0..n).filter(|&s| !self.initial[s]).collect()
        };
        if !counted.is_empty() && counted.iter().all(|&s| !st.satisfied[s]) {
            return Err(Error::NoCandidate(
                "no requirement can be covered by the agent pool under the given bounds".into(),
            ));
        }
        self.finish(st)
    }

    fn assign(&self, st: &mut State, s: usize, rng: &mut ChaCha8Rng) -> Result<()> {
        let mut opts = self.options[s].clone();
        if opts.is_empty() {
            st.notes[s] = Some("no agent type from the pool provides the requirement".into());
            return Ok(());
        }
        opts.shuffle(rng);
        for t in opts.iter().take(MAX_TYPE_TRIES) {
            let saved = st.clone();
            if let Some(roles) = self.bind(st, s, t, rng)? {
                st.types[s] = t.clone();
                st.bound[s] = roles;
                st.satisfied[s] = true;
                return Ok(());
            }
            *st = saved;
        }
        trace!("requirement {} left unassigned", self.mission.requirements[s].id);
        st.types[s] = opts[0].clone();
        st.notes[s] = Some("not enough free agents can reach the requirement".into());
        Ok(())
    }

    fn bind(&self, st: &mut State, s: usize, t: &GeneralAgentType, rng: &mut ChaCha8Rng) -> Result<Option<Vec<usize>>> {
        let mut chosen = Vec::new();
        for (ty, count) in t.iter() {
            let mut forced: Vec<usize> = self.forced[s]
                .iter()
                .copied()
                .filter(|&r| self.roles[r].agent_type == ty)
                .collect();
            forced.sort_unstable();
            forced.dedup();
            forced.shuffle(rng);
            let mut rest: Vec<usize> = (0..self.roles.len())
                .filter(|&r| self.roles[r].agent_type == ty && !forced.contains(&r))
                .collect();
            rest.shuffle(rng);
            let mut got = 0;
            for r in forced.into_iter().chain(rest) {
                if got == count {
                    break;
                }
                if self.distinct_blocked(st, s, r) {
                    continue;
                }
                if self.place(st, r, s, rng)? {
                    chosen.push(r);
                    got += 1;
                }
            }
            if got < count {
                return Ok(None);
            }
        }
        Ok(Some(chosen))
    }

    /// Role `r` is already bound to another requirement that shares an
    /// `allDistinct` constraint on its type with `s`.
    fn distinct_blocked(&self, st: &State, s: usize, r: usize) -> bool {
        let reqs = &self.mission.requirements;
        self.mission.constraints.iter().any(|c| match c {
            Constraint::AllDistinct {
                requirements,
                agent_type,
            } => {
                *agent_type == self.roles[r].agent_type
                    && requirements.contains(&reqs[s].id)
                    && requirements.iter().any(|o| {
                        o != &reqs[s].id
                            && reqs
                                .iter()
                                .position(|x| &x.id == o)
                                .is_some_and(|oi| st.bound[oi].contains(&r))
                    })
            }
            _ => false,
        })
    }

    fn add_extras(&self, st: &mut State, s: usize, k: u32, mobile: bool, rng: &mut ChaCha8Rng) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        let (_, caps) = self.cardinality_bounds(s);
        let mut cands: Vec<usize> = (0..self.roles.len())
            .filter(|&r| self.mobile[r] == mobile && !st.bound[s].contains(&r))
            .collect();
        cands.shuffle(rng);
        let mut added = 0;
        for r in cands {
            if added == k {
                break;
            }
            let ty = self.roles[r].agent_type.as_str();
            if st.types[s].count(ty) + 1 > caps.get(ty).copied().unwrap_or(0) {
                continue;
            }
            if self.distinct_blocked(st, s, r) {
                continue;
            }
            if self.place(st, r, s, rng)? {
                st.bound[s].push(r);
                st.types[s].add(ty, 1);
                added += 1;
            }
        }
        Ok(())
    }

    fn visit_index(st: &State, r: usize, id: u32) -> usize {
        st.visits[r].iter().position(|v| v.id == id).expect("visit id")
    }

    fn carries_on(st: &State, carrier: usize, trip: (u32, u32)) -> f64 {
        st.carries
            .iter()
            .filter(|c| c.carrier == carrier && c.trip == trip)
            .map(|c| c.units)
            .sum()
    }

    /// Binds role `r` to requirement `s` if it can be there in time.
    fn place(&self, st: &mut State, r: usize, s: usize, rng: &mut ChaCha8Rng) -> Result<bool> {
        let saved = st.clone();
        let (loc, a, b) = (self.req_loc[s], self.req_from[s], self.req_to[s]);
        let Some((id, idx)) = self.insert_stop(st, r, loc, a, b, Some(s)) else {
            return Ok(false);
        };
        if !self.mobile[r] && idx > 0 {
            let prev = st.visits[r][idx - 1].clone();
            if prev.loc != loc && !self.arrange_transport(st, r, (prev.id, id), rng) {
                *st = saved;
                return Ok(false);
            }
        }
        match self.solve(st) {
            Some(c) => {
                st.closure = c;
                Ok(true)
            }
            None => {
                *st = saved;
                Ok(false)
            }
        }
    }

    /// Inserts a stay into `r`'s timeline where it fits the current order;
    /// immobile roles only append.
    fn insert_stop(
        &self,
        st: &mut State,
        r: usize,
        loc: usize,
        a: usize,
        b: usize,
        req: Option<usize>,
    ) -> Option<(u32, usize)> {
        let c = &st.closure;
        let vs = &st.visits[r];
        let i = (0..=vs.len())
            .find(|&i| (i == 0 || c.entails_le(vs[i - 1].to, a)) && (i == vs.len() || c.entails_le(b, vs[i].from)))?;
        if i < vs.len() {
            if !self.mobile[r] {
                return None;
            }
            if i > 0 && Self::carries_on(st, r, (vs[i - 1].id, vs[i].id)) > 0.0 {
                return None;
            }
        }
        let id = st.next_id;
        st.next_id += 1;
        st.visits[r].insert(
            i,
            StopAt {
                id,
                loc,
                from: a,
                to: b,
                req,
            },
        );
        Some((id, i))
    }

    /// Finds a mobile role to carry `cargo` between the two visits of `leg`.
    fn arrange_transport(&self, st: &mut State, cargo: usize, leg: (u32, u32), rng: &mut ChaCha8Rng) -> bool {
        let p = st.visits[cargo][Self::visit_index(st, cargo, leg.0)].clone();
        let q = st.visits[cargo][Self::visit_index(st, cargo, leg.1)].clone();
        let (a, e, b, f) = (p.loc, p.to, q.loc, q.from);
        let units = self.load[cargo];
        let c = &st.closure;

        let mut existing = Vec::new();
        for m in (0..self.roles.len()).filter(|&m| self.mobile[m]) {
            for w in st.visits[m].windows(2) {
                if w[0].loc == a
                    && w[1].loc == b
                    && c.entails_le(e, w[0].to)
                    && c.entails_le(w[1].from, f)
                    && Self::carries_on(st, m, (w[0].id, w[1].id)) + units <= self.capacity[m] + CAPACITY_EPS
                {
                    existing.push((m, (w[0].id, w[1].id)));
                }
            }
        }
        if let Some(&(carrier, trip)) = existing.choose(rng) {
            st.carries.push(Carry {
                cargo,
                leg,
                carrier,
                trip,
                units,
            });
            return true;
        }

        let n = self.network.points().len();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for g in (0..n).filter(|&g| c.entails_le(e, g)) {
            for h in (0..n).filter(|&h| c.entails_lt(g, h) && c.entails_le(h, f)) {
                if (g, h) != (e, f) {
                    pairs.push((g, h));
                }
            }
        }
        pairs.shuffle(rng);
        pairs.truncate(MAX_DETOUR_PAIRS - 1);
        if c.entails_lt(e, f) {
            pairs.insert(0, (e, f));
        }
        let mut carriers: Vec<usize> = (0..self.roles.len())
            .filter(|&m| self.mobile[m] && self.capacity[m] + CAPACITY_EPS >= units)
            .collect();
        carriers.shuffle(rng);
        for m in carriers {
            for &(g, h) in &pairs {
                if let Some(trip) = self.try_detour(st, m, (a, g), (b, h), e, f) {
                    st.carries.push(Carry {
                        cargo,
                        leg,
                        carrier: m,
                        trip,
                        units,
                    });
                    return true;
                }
            }
        }
        false
    }

    /// Inserts a trip `a@g -> b@h` into carrier `m`'s timeline, reusing an
    /// adjacent stay at the same location where possible.
    fn try_detour(
        &self,
        st: &mut State,
        m: usize,
        (a, g): (usize, usize),
        (b, h): (usize, usize),
        release: usize,
        due: usize,
    ) -> Option<(u32, u32)> {
        let c = &st.closure;
        let vs = &st.visits[m];
        let i = (0..=vs.len())
            .find(|&i| (i == 0 || c.entails_le(vs[i - 1].to, g)) && (i == vs.len() || c.entails_le(h, vs[i].from)))?;
        let reuse_dep = i > 0 && vs[i - 1].loc == a && c.entails_le(release, vs[i - 1].to);
        let reuse_arr = i < vs.len() && vs[i].loc == b && c.entails_le(vs[i].from, due);
        if reuse_dep && reuse_arr {
            return None;
        }
        if i > 0 && i < vs.len() && Self::carries_on(st, m, (vs[i - 1].id, vs[i].id)) > 0.0 {
            return None;
        }
        let saved = st.visits[m].clone();
        let saved_next = st.next_id;
        let mut at = i;
        let dep = if reuse_dep {
            st.visits[m][i - 1].id
        } else {
            let id = st.next_id;
            st.next_id += 1;
            st.visits[m].insert(
                at,
                StopAt {
                    id,
                    loc: a,
                    from: g,
                    to: g,
                    req: None,
                },
            );
            at += 1;
            id
        };
        let arr = if reuse_arr {
            st.visits[m][at].id
        } else {
            let id = st.next_id;
            st.next_id += 1;
            st.visits[m].insert(
                at,
                StopAt {
                    id,
                    loc: b,
                    from: h,
                    to: h,
                    req: None,
                },
            );
            id
        };
        match self.solve(st) {
            Some(closure) => {
                st.closure = closure;
                Some((dep, arr))
            }
            None => {
                st.visits[m] = saved;
                st.next_id = saved_next;
                None
            }
        }
    }

    /// Mission network plus travel-time gaps of every mobile timeline.
    fn network_of(&self, st: &State) -> TemporalNetwork {
        let mut net = self.network.clone();
        for (r, vs) in st.visits.iter().enumerate() {
            if !self.mobile[r] {
                continue;
            }
            for w in vs.windows(2) {
                if w[0].loc != w[1].loc {
                    let gap = self.dist[w[0].loc][w[1].loc] / self.speed[r];
                    let label = format!(
                        "travel {} {} -> {}",
                        self.roles[r].name, self.locations[w[0].loc], self.locations[w[1].loc]
                    );
                    net.lower_at(w[0].to, w[1].from, gap, label);
                }
            }
        }
        net
    }

    fn solve(&self, st: &State) -> Option<Closure> {
        self.network_of(st).solve().ok()
    }

    /// Marks requirements whose bound agents violate a model constraint.
    fn enforce_constraints(&self, st: &mut State) -> Result<()> {
        let reqs = &self.mission.requirements;
        let idx = |id: &str| reqs.iter().position(|r| r.id == id).expect("validated id");
        let role_set = |st: &State, s: usize| -> BTreeSet<String> {
            st.bound[s].iter().map(|&r| self.roles[r].name.clone()).collect()
        };
        let typed = |st: &State, s: usize, ty: &str| -> BTreeSet<usize> {
            st.bound[s]
                .iter()
                .copied()
                .filter(|&r| self.roles[r].agent_type == ty)
                .collect()
        };
        let mut violated: Vec<(usize, &'static str)> = Vec::new();
        for c in &self.mission.constraints {
            let members: Vec<usize> = c
                .requirements()
                .into_iter()
                .map(idx)
                .filter(|&s| st.satisfied[s])
                .collect();
            let bad = match c {
                Constraint::MinCard { agent_type, value, .. } => {
                    members.iter().any(|&s| st.types[s].count(agent_type) < *value)
                }
                Constraint::MaxCard { agent_type, value, .. } => {
                    members.iter().any(|&s| st.types[s].count(agent_type) > *value)
                }
                Constraint::AllDistinct { agent_type, .. } => {
                    pairs(&members).any(|(x, y)| !typed(st, x, agent_type).is_disjoint(&typed(st, y, agent_type)))
                }
                Constraint::MinDistinct { agent_type, value, .. } => pairs(&members)
                    .any(|(x, y)| st.types[x].count(agent_type).abs_diff(st.types[y].count(agent_type)) < *value),
                Constraint::MaxDistinct { agent_type, value, .. } => pairs(&members)
                    .any(|(x, y)| st.types[x].count(agent_type).abs_diff(st.types[y].count(agent_type)) > *value),
                Constraint::MinEqual { roles, .. }
                | Constraint::MaxEqual { roles, .. }
                | Constraint::AllEqual { roles, .. } => {
                    let all: Vec<usize> = c.requirements().into_iter().map(idx).collect();
                    if members.len() < all.len() {
                        false
                    } else {
                        let common = all
                            .iter()
                            .map(|&s| role_set(st, s))
                            .reduce(|a, b| a.intersection(&b).cloned().collect())
                            .unwrap_or_default();
                        let wanted: BTreeSet<String> = roles.iter().cloned().collect();
                        let min_ok = wanted.is_subset(&common);
                        let max_ok = common.is_subset(&wanted);
                        match c {
                            Constraint::MinEqual { .. } => !min_ok,
                            Constraint::MaxEqual { .. } => !max_ok,
                            _ => !(min_ok && max_ok),
                        }
                    }
                }
                Constraint::MinFunc { .. } | Constraint::MinProp { .. } | Constraint::MaxProp { .. } => {
                    let mut bad = false;
                    for &s in &members {
                        bad |= !self.serves(s, &st.types[s])?;
                    }
                    bad
                }
                _ => false,
            };
            if bad {
                for s in members {
                    violated.push((s, c.kind()));
                }
            }
        }
        for (s, kind) in violated {
            st.satisfied[s] = false;
            st.notes[s] = Some(format!("violates {kind} constraint"));
        }
        Ok(())
    }

    fn finish(&self, st: State) -> Result<SolutionCandidate> {
        let reqs = &self.mission.requirements;
        let points = self.network.points();
        let assignments = reqs
            .iter()
            .enumerate()
            .map(|(s, r)| {
                let mut roles: Vec<String> = st.bound[s].iter().map(|&i| self.roles[i].name.clone()).collect();
                roles.sort();
                Assignment {
                    requirement: r.id.clone(),
                    agent_type: st.types[s].clone(),
                    roles,
                    satisfied: st.satisfied[s],
                    note: st.notes[s].clone(),
                }
            })
            .collect();
        let visit = |v: &StopAt| Visit {
            location: self.locations[v.loc].clone(),
            from: points[v.from].clone(),
            to: points[v.to].clone(),
            requirement: v.req.map(|s| reqs[s].id.clone()),
        };
        let timelines = self
            .roles
            .iter()
            .enumerate()
            .filter(|(r, _)| !st.visits[*r].is_empty())
            .map(|(r, role)| Timeline {
                role: role.clone(),
                visits: st.visits[r].iter().map(visit).collect(),
            })
            .collect();
        let mut transfers: Vec<Transfer> = st
            .carries
            .iter()
            .map(|c| {
                let p = &st.visits[c.cargo][Self::visit_index(&st, c.cargo, c.leg.0)];
                let q = &st.visits[c.cargo][Self::visit_index(&st, c.cargo, c.leg.1)];
                let d = &st.visits[c.carrier][Self::visit_index(&st, c.carrier, c.trip.0)];
                let a = &st.visits[c.carrier][Self::visit_index(&st, c.carrier, c.trip.1)];
                Transfer {
                    role: self.roles[c.cargo].name.clone(),
                    origin: self.locations[p.loc].clone(),
                    release: points[p.to].clone(),
                    destination: self.locations[q.loc].clone(),
                    due: points[q.from].clone(),
                    carrier: self.roles[c.carrier].name.clone(),
                    departure: points[d.to].clone(),
                    arrival: points[a.from].clone(),
                }
            })
            .collect();
        transfers.sort_by(|x, y| (&x.role, &x.due).cmp(&(&y.role, &y.due)));
        let schedule = st
            .closure
            .order()
            .iter()
            .map(|&i| (points[i].clone(), st.closure.earliest(i)))
            .collect();
        let structures = self.structures(&st)?;
        Ok(SolutionCandidate {
            assignments,
            timelines,
            transfers,
            schedule,
            structures,
        })
    }

    /// Coalition structure per location and timepoint, with the
    /// reconfiguration time from the previous timepoint at that location.
    /// Roles arriving or leaving count as singletons on the other side.
    fn structures(&self, st: &State) -> Result<Vec<Snapshot>> {
        let points = self.network.points();
        let c = &st.closure;
        let mut safety: BTreeMap<usize, f64> = BTreeMap::new();
        for s in 0..self.mission.requirements.len() {
            if st.satisfied[s] && !self.initial[s] && !self.functions[s].is_empty() {
                let r = reliability(self.model, &st.types[s], self.functions[s].iter().map(String::as_str))?;
                safety.insert(s, r);
            }
        }
        let atom = |r: usize| AtomicAgent::new(self.roles[r].name.clone(), self.roles[r].agent_type.clone());
        let mut out = Vec::new();
        for loc in 0..self.locations.len() {
            let mut prev: Vec<BTreeSet<usize>> = Vec::new();
            for (k, &tp) in c.order().iter().enumerate() {
                let mut present = BTreeSet::new();
                for (r, vs) in st.visits.iter().enumerate() {
                    if vs
                        .iter()
                        .any(|v| v.loc == loc && c.rank(v.from) <= k && k <= c.rank(v.to))
                    {
                        present.insert(r);
                    }
                }
                let mut blocks: Vec<BTreeSet<usize>> = Vec::new();
                let mut worst: Option<f64> = None;
                let mut covered = BTreeSet::new();
                for (&s, &rel) in &safety {
                    if self.req_loc[s] == loc && c.rank(self.req_from[s]) <= k && k <= c.rank(self.req_to[s]) {
                        let block: BTreeSet<usize> =
                            st.bound[s].iter().copied().filter(|r| present.contains(r)).collect();
                        if !block.is_empty() {
                            covered.extend(block.iter().copied());
                            blocks.push(block);
                            worst = Some(worst.map_or(rel, |w: f64| w.min(rel)));
                        }
                    }
                }
                for &r in &present {
                    if !covered.contains(&r) {
                        blocks.push(BTreeSet::from([r]));
                    }
                }
                let before_pool: BTreeSet<usize> = prev.iter().flatten().copied().collect();
                if present.is_empty() && before_pool.is_empty() {
                    prev = blocks;
                    continue;
                }
                let to_agents = |bs: &[BTreeSet<usize>], extra: &BTreeSet<usize>| -> Result<CoalitionStructure> {
                    let mut agents: Vec<GeneralAgent> = Vec::new();
                    for b in bs {
                        agents.push(GeneralAgent::new(b.iter().map(|&r| atom(r))).map_err(Error::from)?);
                    }
                    for &r in extra {
                        agents.push(GeneralAgent::singleton(atom(r)));
                    }
                    Ok(CoalitionStructure::from_agents(agents)?)
                };
                let arrivals: BTreeSet<usize> = present.difference(&before_pool).copied().collect();
                let departed: BTreeSet<usize> = before_pool.difference(&present).copied().collect();
                let reconfig = if k == 0 {
                    0.0
                } else {
                    let from = to_agents(&prev, &arrivals)?;
                    let to = to_agents(&blocks, &departed)?;
                    transition_cost(&from, &to, &self.mission.reconfig)?
                };
                let mut names: Vec<Vec<String>> = blocks
                    .iter()
                    .map(|b| b.iter().map(|&r| self.roles[r].name.clone()).collect())
                    .collect();
                for n in &mut names {
                    n.sort();
                }
                names.sort();
                if !present.is_empty() || reconfig > 0.0 {
                    out.push(Snapshot {
                        location: self.locations[loc].clone(),
                        timepoint: points[tp].clone(),
                        agents: names,
                        safety: worst.unwrap_or(1.0),
                        reconfig_seconds: reconfig,
                    });
                }
                prev = blocks;
            }
        }
        Ok(out)
    }
}

fn pairs(xs: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    xs.iter()
        .enumerate()
        .flat_map(move |(i, &x)| xs[i + 1..].iter().map(move |&y| (x, y)))
}

fn optional_property(model: &ResourceModel, ty: &str, name: &str, default: f64) -> Result<f64> {
    match model.resolve_property(ty, name) {
        Ok(v) => Ok(v),
        Err(ModelError::UnresolvableProperty { .. }) => Ok(default),
        Err(e) => Err(e.into()),
    }
}

fn property_at_least(model: &ResourceModel, t: &GeneralAgentType, np: &str, bound: f64, min: bool) -> Result<bool> {
    match pvalue_composite(model, t, np, 0) {
        Ok(v) => Ok(if min { v >= bound } else { v <= bound }),
        Err(ModelError::UnresolvableProperty { .. }) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Builds one candidate for `mission` under `bounds`, deterministic in
/// `seed`.
pub fn generate_candidate(
    model: &ResourceModel,
    mission: &Mission,
    bounds: &Bounds,
    seed: u64,
) -> Result<SolutionCandidate> {
    Planner::new(model, mission)?.generate(bounds, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::check_flow;
    use crate::mission::{parse_mission, MissionDocument};
    use crate::score::{saf, sat};
    use crate::testing::{desk_model, DESK_MISSION, SPACE_MISSION};

    fn desk() -> Mission {
        parse_mission(DESK_MISSION, &desk_model()).unwrap()
    }

    fn edited(f: impl FnOnce(&mut MissionDocument)) -> Result<Mission> {
        let mut doc = MissionDocument::from_yaml(DESK_MISSION).unwrap();
        f(&mut doc);
        Mission::from_document(doc, &desk_model())
    }

    fn check_physical(model: &ResourceModel, mission: &Mission, c: &SolutionCandidate) {
        for tl in &c.timelines {
            let v = model.resolve_property(&tl.role.agent_type, "v_nom").unwrap_or(0.0);
            for w in tl.visits.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                assert!(c.rank(&a.from) <= c.rank(&a.to));
                assert!(c.rank(&a.to) <= c.rank(&b.from), "{} overlaps itself", tl.role.name);
                if a.location != b.location {
                    assert!(c.rank(&a.to) < c.rank(&b.from));
                    if v > 0.0 {
                        let d = distance(&mission.locations[&a.location], &mission.locations[&b.location]).unwrap();
                        let gap = c.time(&b.from).unwrap() - c.time(&a.to).unwrap();
                        assert!(gap + 1e-6 >= d / v, "{}: {gap} < {}", tl.role.name, d / v);
                    }
                }
            }
        }
    }

    #[test]
    fn desk_mission_is_fully_satisfied() {
        let (model, mission) = (desk_model(), desk());
        let planner = Planner::new(&model, &mission).unwrap();
        for seed in 0..20 {
            let c = planner.generate(&Bounds::default(), seed).unwrap();
            assert_eq!(sat(&c), 1.0, "seed {seed}");
            assert!(check_flow(&model, &mission, &c).unwrap().feasible);
            check_physical(&model, &mission, &c);
        }
    }

    #[test]
    fn lunar_mission_timelines_are_consistent() {
        let model = desk_model();
        let mission = parse_mission(SPACE_MISSION, &model).unwrap();
        let planner = Planner::new(&model, &mission).unwrap();
        for seed in 0..5 {
            for psi_m in [0, 2] {
                let c = planner.generate(&Bounds { psi_m, psi_im: 1 }, seed).unwrap();
                check_physical(&model, &mission, &c);
                assert!(check_flow(&model, &mission, &c).unwrap().feasible);
            }
        }
    }

    #[test]
    fn overlapping_requirements_share_no_role() {
        let (model, mission) = (desk_model(), desk());
        let planner = Planner::new(&model, &mission).unwrap();
        assert!(planner.is_conflicted(1) && planner.is_conflicted(2));
        assert!(planner.is_conflicted(4) && !planner.is_conflicted(0));
        for seed in 0..10 {
            let c = planner.generate(&Bounds { psi_m: 1, psi_im: 1 }, seed).unwrap();
            let r1 = &c.assignment("r1").unwrap().roles;
            let r2 = &c.assignment("r2").unwrap().roles;
            assert!(r1.iter().all(|r| !r2.contains(r)));
        }
    }

    #[test]
    fn minimal_types_support_the_functions() {
        let (model, mission) = (desk_model(), desk());
        let planner = Planner::new(&model, &mission).unwrap();
        let opts = planner.options(1);
        assert!(!opts.is_empty());
        for t in opts {
            let f = mission.effective_functions(&mission.requirements[1]);
            assert!(
                reliability(&model, t, f.iter().map(String::as_str)).unwrap() > 0.0,
                "{t}"
            );
        }
    }

    #[test]
    fn same_seed_same_candidate() {
        let (model, mission) = (desk_model(), desk());
        let b = Bounds { psi_m: 1, psi_im: 1 };
        let a = generate_candidate(&model, &mission, &b, 7).unwrap();
        let c = generate_candidate(&model, &mission, &b, 7).unwrap();
        assert_eq!(a.encoding().unwrap(), c.encoding().unwrap());
    }

    #[test]
    fn lone_sherpa_safety() {
        let m = edited(|d| {
            d.pool = [("SherpaTT".to_string(), 1)].into();
            d.requirements.retain(|r| r.id == "r1");
        })
        .unwrap();
        let model = desk_model();
        let c = generate_candidate(&model, &m, &Bounds::default(), 0).unwrap();
        assert_eq!(c.assignment("r1").unwrap().roles, ["SherpaTT_0"]);
        let expected = (1.0 - 0.05f64.powi(2)) * 0.95f64.powi(4);
        assert!((saf(&model, &m, &c).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn one_rover_cannot_be_in_two_places() {
        let m = edited(|d| {
            d.pool = [("SherpaTT".to_string(), 1)].into();
            d.requirements.retain(|r| r.id == "r1" || r.id == "r2");
            d.requirements[1].agents.clear();
            d.requirements[1].functions.push("LocationImageProvider".into());
        })
        .unwrap();
        for seed in 0..5 {
            let c = generate_candidate(&desk_model(), &m, &Bounds::default(), seed).unwrap();
            assert_eq!(c.satisfied_count(), 1);
            assert!(sat(&c) < 1.0);
        }
    }

    #[test]
    fn empty_requirement_list() {
        let m = edited(|d| d.requirements.clear()).unwrap();
        let c = generate_candidate(&desk_model(), &m, &Bounds::default(), 0).unwrap();
        assert!(c.assignments.is_empty());
        assert_eq!(sat(&c), 1.0);
    }

    #[test]
    fn uncoverable_mission_has_no_candidate() {
        let m = edited(|d| {
            d.requirements.retain(|r| r.id == "r2");
            d.requirements[0].agents.insert("Payload".into(), 9);
        })
        .unwrap();
        let r = generate_candidate(&desk_model(), &m, &Bounds::default(), 0);
        assert!(matches!(r, Err(Error::NoCandidate(_))), "{r:?}");
    }

    #[test]
    fn cardinality_constraint_is_enforced() {
        let m = edited(|d| {
            d.constraints.push(Constraint::MaxCard {
                requirements: vec!["r2".into()],
                agent_type: "Payload".into(),
                value: 1,
            })
        })
        .unwrap();
        let c = generate_candidate(&desk_model(), &m, &Bounds::default(), 0).unwrap();
        assert!(!c.assignment("r2").unwrap().satisfied);
        assert!(c.assignment("r1").unwrap().satisfied);
    }

    #[test]
    fn inconsistent_mission_is_rejected() {
        let m = edited(|d| {
            d.constraints.push(Constraint::MaxDuration {
                lhs: "t3".into(),
                rhs: "t2".into(),
                value: 10.0,
            })
        });
        let m = m.unwrap();
        assert!(Planner::new(&desk_model(), &m).is_err());
    }
}
