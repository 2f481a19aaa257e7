//! Selection policies, the sum composition operator, inference rules for
//! composite numeric properties, and operation cost.
//!
//! A policy is a chain of steps listed outermost first, so
//! `[random_sel, {prop_sel: [argmax, tcap]}, {size_sel: ["=", 1]}]` reads as
//! `random_sel(prop_sel(size_sel(A)))` and is evaluated right to left.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_yaml::Value;

use crate::agents::{AtomicAgent, GeneralAgentType};
use crate::capability::has_functionality;
use crate::error::{Error, Result};
use crate::ontology::{ResourceModel, RuleTermDoc};

/// Upper bound on candidate subsets a single policy evaluation may touch.
pub const MAX_POLICY_CANDIDATES: usize = 1 << 16;

pub const TRANSPORT_PROVIDER: &str = "TransportProvider";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl SizeOp {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "<" => SizeOp::Lt,
            "<=" | "≤" => SizeOp::Le,
            ">" => SizeOp::Gt,
            ">=" | "≥" => SizeOp::Ge,
            "=" | "==" => SizeOp::Eq,
            _ => return None,
        })
    }

    pub fn holds(self, size: usize, beta: usize) -> bool {
        match self {
            SizeOp::Lt => size < beta,
            SizeOp::Le => size <= beta,
            SizeOp::Gt => size > beta,
            SizeOp::Ge => size >= beta,
            SizeOp::Eq => size == beta,
        }
    }
}

impl fmt::Display for SizeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SizeOp::Lt => "<",
            SizeOp::Le => "<=",
            SizeOp::Gt => ">",
            SizeOp::Ge => ">=",
            SizeOp::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Argmax,
    Argmin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionStep {
    Size(SizeOp, usize),
    Func(String),
    Prop(Extremum, String),
    Random,
}

impl SelectionStep {
    /// Per-subset filters commute with each other.
    fn is_filter(&self) -> bool {
        matches!(self, SelectionStep::Size(..) | SelectionStep::Func(_))
    }

    fn from_value(policy: &str, v: &Value) -> Result<Self> {
        let bad = |msg: String| Error::validation(policy, msg);
        if let Some(s) = v.as_str() {
            return match s {
                "random_sel" => Ok(SelectionStep::Random),
                other => Err(bad(format!("unknown selection step '{other}'"))),
            };
        }
        let Some(map) = v.as_mapping() else {
            return Err(bad(format!("malformed selection step {v:?}")));
        };
        if map.len() != 1 {
            return Err(bad("a selection step must have exactly one key".into()));
        }
        let (k, arg) = map.iter().next().expect("one entry");
        let key = k.as_str().unwrap_or_default();
        let pair = |arg: &Value| -> Option<(String, String)> {
            let seq = arg.as_sequence()?;
            if seq.len() != 2 {
                return None;
            }
            let a = scalar_string(&seq[0])?;
            let b = scalar_string(&seq[1])?;
            Some((a, b))
        };
        match key {
            "size_sel" => {
                let (op, beta) = pair(arg).ok_or_else(|| bad("size_sel expects [op, beta]".into()))?;
                let op = SizeOp::parse(&op).ok_or_else(|| bad(format!("unknown size operator '{op}'")))?;
                let beta = beta
                    .parse::<usize>()
                    .map_err(|_| bad(format!("size_sel bound '{beta}' is not a non-negative integer")))?;
                Ok(SelectionStep::Size(op, beta))
            }
            "func_sel" => arg
                .as_str()
                .map(|f| SelectionStep::Func(f.to_string()))
                .ok_or_else(|| bad("func_sel expects a functionality name".into())),
            "prop_sel" => {
                let (ext, np) = pair(arg).ok_or_else(|| bad("prop_sel expects [argmax|argmin, property]".into()))?;
                let ext = match ext.as_str() {
                    "argmax" => Extremum::Argmax,
                    "argmin" => Extremum::Argmin,
                    other => return Err(bad(format!("unknown prop_sel operator '{other}'"))),
                };
                Ok(SelectionStep::Prop(ext, np))
            }
            "random_sel" => Ok(SelectionStep::Random),
            other => Err(bad(format!("unknown selection step '{other}'"))),
        }
    }
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl fmt::Display for SelectionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionStep::Size(op, b) => write!(f, "size_sel({op},{b})"),
            SelectionStep::Func(x) => write!(f, "func_sel({x})"),
            SelectionStep::Prop(Extremum::Argmax, np) => write!(f, "prop_sel(argmax,{np})"),
            SelectionStep::Prop(Extremum::Argmin, np) => write!(f, "prop_sel(argmin,{np})"),
            SelectionStep::Random => f.write_str("random_sel"),
        }
    }
}

/// Chain of selection steps, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPolicy {
    chain: Vec<SelectionStep>,
}

impl SelectionPolicy {
    pub fn new(chain: Vec<SelectionStep>) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::validation("policy", "selection chain is empty"));
        }
        Ok(SelectionPolicy { chain })
    }

    pub fn from_doc(name: &str, steps: &[Value]) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::validation(name, "selection chain is empty"));
        }
        let chain = steps
            .iter()
            .map(|v| SelectionStep::from_value(name, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(SelectionPolicy { chain })
    }

    pub fn chain(&self) -> &[SelectionStep] {
        &self.chain
    }

    pub fn validate(&self, name: &str, model: &ResourceModel) -> Result<()> {
        for step in &self.chain {
            if let SelectionStep::Func(f) = step {
                if !model.is_functionality(f) {
                    return Err(Error::validation(
                        name,
                        format!("func_sel references unknown functionality '{f}'"),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.chain.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(" ∘ "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selector {
    Policy(String),
    Inverse(String),
}

impl Selector {
    pub fn policy_name(&self) -> &str {
        match self {
            Selector::Policy(p) | Selector::Inverse(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleTerm {
    pub negative: bool,
    pub selector: Selector,
    pub property: String,
}

/// Signed sum of composed property values over policy selections.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceRule {
    pub terms: Vec<RuleTerm>,
}

impl InferenceRule {
    pub fn from_doc(target: &str, terms: &[RuleTermDoc]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::validation(target, "inference rule has no terms"));
        }
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let negative = match t.sign.as_str() {
                "+" => false,
                "-" => true,
                other => return Err(Error::validation(target, format!("unknown sign '{other}'"))),
            };
            let selector = match &t.select {
                Value::String(p) => Selector::Policy(p.clone()),
                Value::Mapping(m) if m.len() == 1 => {
                    let (k, v) = m.iter().next().expect("one entry");
                    match (k.as_str(), v.as_str()) {
                        (Some("not"), Some(p)) => Selector::Inverse(p.to_string()),
                        _ => {
                            return Err(Error::validation(
                                target,
                                "select must be a policy name or {not: policy}",
                            ))
                        }
                    }
                }
                _ => {
                    return Err(Error::validation(
                        target,
                        "select must be a policy name or {not: policy}",
                    ))
                }
            };
            out.push(RuleTerm {
                negative,
                selector,
                property: t.property.clone(),
            });
        }
        Ok(InferenceRule { terms: out })
    }

    pub fn validate(&self, target: &str, policies: &BTreeMap<String, SelectionPolicy>) -> Result<()> {
        for t in &self.terms {
            if !policies.contains_key(t.selector.policy_name()) {
                return Err(Error::validation(
                    target,
                    format!("rule references unknown policy '{}'", t.selector.policy_name()),
                ));
            }
        }
        Ok(())
    }
}

/// Adds the transport-provider policy and the `v_nom` / `tcap` rules unless
/// the document already defines them. Requires a `TransportProvider`
/// functionality in the model.
pub fn install_builtins(
    model: &ResourceModel,
    policies: &mut BTreeMap<String, SelectionPolicy>,
    rules: &mut BTreeMap<String, InferenceRule>,
) {
    if !model.is_functionality(TRANSPORT_PROVIDER) {
        return;
    }
    policies
        .entry(TRANSPORT_PROVIDER.to_string())
        .or_insert_with(|| SelectionPolicy {
            chain: vec![
                SelectionStep::Random,
                SelectionStep::Prop(Extremum::Argmax, "tcap".into()),
                SelectionStep::Size(SizeOp::Eq, 1),
                SelectionStep::Func(TRANSPORT_PROVIDER.into()),
            ],
        });
    let term = |negative, selector, property: &str| RuleTerm {
        negative,
        selector,
        property: property.to_string(),
    };
    rules.entry("v_nom".into()).or_insert_with(|| InferenceRule {
        terms: vec![term(false, Selector::Policy(TRANSPORT_PROVIDER.into()), "v_nom")],
    });
    rules.entry("tcap".into()).or_insert_with(|| InferenceRule {
        terms: vec![
            term(false, Selector::Policy(TRANSPORT_PROVIDER.into()), "tcap"),
            term(true, Selector::Inverse(TRANSPORT_PROVIDER.into()), "tcon"),
        ],
    });
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

type Atoms = BTreeSet<AtomicAgent>;

struct Evaluator<'a> {
    model: &'a ResourceModel,
    seed: u64,
}

impl Evaluator<'_> {
    fn type_of(atoms: &[&AtomicAgent]) -> GeneralAgentType {
        let mut t = GeneralAgentType::new();
        for a in atoms {
            t.add(a.agent_type.as_str(), 1);
        }
        t
    }

    /// Property value of a candidate subset. Composite candidates go through
    /// the inference rule, but never for the full input set, which would
    /// recurse into the same evaluation.
    fn value(&self, subset: &[&AtomicAgent], whole: usize, np: &str) -> Result<f64> {
        if subset.len() == 1 {
            return self.model.resolve_property(&subset[0].agent_type, np);
        }
        if subset.len() >= whole || self.model.rule(np).is_none() {
            return Err(Error::unresolvable(Self::type_of(subset).to_string(), np));
        }
        let atoms: Atoms = subset.iter().map(|a| (*a).clone()).collect();
        self.rule_value(&atoms, np)
    }

    fn rule_value(&self, atoms: &Atoms, np: &str) -> Result<f64> {
        let rule = self
            .model
            .rule(np)
            .ok_or_else(|| Error::unresolvable("composite", np))?;
        let mut total = 0.0;
        for t in &rule.terms {
            let name = t.selector.policy_name();
            let policy = self.model.policy(name).ok_or_else(|| Error::unresolvable(name, np))?;
            let selected = self.eval(policy, atoms)?;
            let chosen: Atoms = match t.selector {
                Selector::Policy(_) => selected,
                Selector::Inverse(_) => atoms.difference(&selected).cloned().collect(),
            };
            let v = compose_sum(self.model, &chosen, &t.property)?;
            total += if t.negative { -v } else { v };
        }
        Ok(total)
    }

    fn eval(&self, policy: &SelectionPolicy, atoms: &Atoms) -> Result<Atoms> {
        let items: Vec<&AtomicAgent> = atoms.iter().collect();
        let n = items.len();
        // right-to-left: the innermost steps come last in the chain
        let mut steps: Vec<&SelectionStep> = policy.chain.iter().rev().collect();
        let lead = steps.iter().take_while(|s| s.is_filter()).count();
        let filters: Vec<&SelectionStep> = steps.drain(..lead).collect();

        let (mut lo, mut hi) = (0usize, n);
        for s in &filters {
            if let SelectionStep::Size(op, b) = s {
                match op {
                    SizeOp::Lt => hi = hi.min(b.saturating_sub(1)),
                    SizeOp::Le => hi = hi.min(*b),
                    SizeOp::Gt => lo = lo.max(b + 1),
                    SizeOp::Ge => lo = lo.max(*b),
                    SizeOp::Eq => {
                        lo = lo.max(*b);
                        hi = hi.min(*b);
                    }
                }
            }
        }

        let mut family: Vec<Vec<usize>> = Vec::new();
        if lo <= hi {
            for k in lo..=hi {
                let mut budget_left = MAX_POLICY_CANDIDATES.saturating_sub(family.len());
                let mut err = None;
                for_each_combination(n, k, |idx| {
                    if budget_left == 0 {
                        err = Some(Error::BudgetExceeded(format!(
                            "policy evaluation over {n} atoms exceeds {MAX_POLICY_CANDIDATES} candidate subsets"
                        )));
                        return false;
                    }
                    budget_left -= 1;
                    family.push(idx.to_vec());
                    true
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }

        let keep = |fam: Vec<Vec<usize>>, step: &SelectionStep| -> Result<Vec<Vec<usize>>> {
            let mut out = Vec::with_capacity(fam.len());
            for idx in fam {
                let sub: Vec<&AtomicAgent> = idx.iter().map(|&i| items[i]).collect();
                let ok = match step {
                    SelectionStep::Size(op, b) => op.holds(sub.len(), *b),
                    SelectionStep::Func(f) => has_functionality(self.model, &Self::type_of(&sub), f)?,
                    _ => unreachable!("only filters"),
                };
                if ok {
                    out.push(idx);
                }
            }
            Ok(out)
        };

        for s in &filters {
            if let SelectionStep::Func(_) = s {
                family = keep(family, s)?;
            }
        }

        for step in steps {
            family = match step {
                SelectionStep::Size(..) | SelectionStep::Func(_) => keep(family, step)?,
                SelectionStep::Prop(ext, np) => {
                    let mut scored = Vec::with_capacity(family.len());
                    for idx in family {
                        let sub: Vec<&AtomicAgent> = idx.iter().map(|&i| items[i]).collect();
                        let v = self.value(&sub, n, np)?;
                        scored.push((idx, v));
                    }
                    let best = scored.iter().map(|(_, v)| *v).fold(None, |acc: Option<f64>, v| {
                        Some(match (acc, ext) {
                            (None, _) => v,
                            (Some(a), Extremum::Argmax) => a.max(v),
                            (Some(a), Extremum::Argmin) => a.min(v),
                        })
                    });
                    match best {
                        None => Vec::new(),
                        Some(b) => scored.into_iter().filter(|(_, v)| *v == b).map(|(i, _)| i).collect(),
                    }
                }
                SelectionStep::Random => {
                    if family.is_empty() {
                        family
                    } else {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                        let pick = rng.gen_range(0..family.len());
                        vec![family.swap_remove(pick)]
                    }
                }
            };
        }

        Ok(family.into_iter().flatten().map(|i| items[i].clone()).collect())
    }
}

/// Calls `f` with every k-subset of `0..n` in lexicographic order until it
/// returns false.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // rightmost position that can still advance
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Atoms selected by `policy` from `atoms`. Deterministic under `seed`.
pub fn eval_policy(
    model: &ResourceModel,
    policy: &SelectionPolicy,
    atoms: &BTreeSet<AtomicAgent>,
    seed: u64,
) -> Result<BTreeSet<AtomicAgent>> {
    Evaluator { model, seed }.eval(policy, atoms)
}

/// Complement of [`eval_policy`] under the same seed.
pub fn inverse_policy(
    model: &ResourceModel,
    policy: &SelectionPolicy,
    atoms: &BTreeSet<AtomicAgent>,
    seed: u64,
) -> Result<BTreeSet<AtomicAgent>> {
    let sel = eval_policy(model, policy, atoms, seed)?;
    Ok(atoms.difference(&sel).cloned().collect())
}

/// Sum of `np` over `atoms`.
pub fn compose_sum<'a>(
    model: &ResourceModel,
    atoms: impl IntoIterator<Item = &'a AtomicAgent>,
    np: &str,
) -> Result<f64> {
    atoms
        .into_iter()
        .try_fold(0.0, |acc, a| Ok(acc + model.resolve_property(&a.agent_type, np)?))
}

/// Numeric property of a general agent type: direct lookup for a single
/// atom, otherwise the inference rule for `np` evaluated on a representative
/// instance.
pub fn pvalue_composite(model: &ResourceModel, agent: &GeneralAgentType, np: &str, seed: u64) -> Result<f64> {
    if agent.total() == 1 {
        let ty = agent.types().next().expect("one type");
        return model.resolve_property(ty, np);
    }
    let Some(ga) = agent.instantiate() else {
        return Err(Error::unresolvable(agent.to_string(), np));
    };
    if model.rule(np).is_none() {
        return Err(Error::unresolvable(agent.to_string(), np));
    }
    Evaluator { model, seed }.rule_value(ga.members(), np)
}

/// Energy in joules for operating `agent` for `t` seconds at nominal power.
pub fn ocost(model: &ResourceModel, agent: &GeneralAgentType, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("operation time {t} must be >= 0")));
    }
    agent.iter().try_fold(0.0, |acc, (ty, c)| {
        Ok(acc + f64::from(c) * model.resolve_property(ty, "pw")? * t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::load_model;
    use crate::testing::SHERPA_MODEL;

    fn ty(pairs: &[(&str, u32)]) -> GeneralAgentType {
        GeneralAgentType::from_pairs(pairs.iter().map(|(t, c)| (*t, *c)))
    }

    fn atoms(t: &GeneralAgentType) -> Atoms {
        t.instantiate().unwrap().members().clone()
    }

    fn ids(a: &Atoms) -> Vec<String> {
        a.iter().map(|x| x.id.clone()).collect()
    }

    #[test]
    fn combinations_in_order() {
        let mut seen = Vec::new();
        for_each_combination(4, 2, |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut count = 0;
        for_each_combination(3, 0, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
        for_each_combination(2, 3, |_| panic!("k > n"));
    }

    #[test]
    fn transport_provider_policy() {
        let m = load_model(SHERPA_MODEL).unwrap();
        let p = m.policy(TRANSPORT_PROVIDER).unwrap();
        let a = atoms(&ty(&[("SherpaTT", 1), ("Payload", 2)]));
        assert_eq!(ids(&eval_policy(&m, p, &a, 0).unwrap()), vec!["SherpaTT#0"]);
        let a3 = atoms(&ty(&[("SherpaTT", 1), ("Payload", 3)]));
        assert_eq!(
            ids(&inverse_policy(&m, p, &a3, 0).unwrap()),
            vec!["Payload#0", "Payload#1", "Payload#2"]
        );
        let single = atoms(&ty(&[("SherpaTT", 1)]));
        assert!(inverse_policy(&m, p, &single, 0).unwrap().is_empty());
        // no provider at all
        assert!(eval_policy(&m, p, &atoms(&ty(&[("Payload", 2)])), 0)
            .unwrap()
            .is_empty());
        // the larger capacity wins
        let mixed = atoms(&ty(&[("SherpaTT", 1), ("CoyoteIII", 1)]));
        assert_eq!(ids(&eval_policy(&m, p, &mixed, 3).unwrap()), vec!["SherpaTT#0"]);
    }

    #[test]
    fn ties_are_kept_until_random() {
        let m = load_model(SHERPA_MODEL).unwrap();
        let a = atoms(&ty(&[("SherpaTT", 2)]));
        let keep_ties = SelectionPolicy::new(vec![
            SelectionStep::Prop(Extremum::Argmax, "tcap".into()),
            SelectionStep::Size(SizeOp::Eq, 1),
        ])
        .unwrap();
        assert_eq!(eval_policy(&m, &keep_ties, &a, 0).unwrap().len(), 2);
        let p = m.policy(TRANSPORT_PROVIDER).unwrap();
        let mut picked = BTreeSet::new();
        for seed in 0..64 {
            let s = eval_policy(&m, p, &a, seed).unwrap();
            assert_eq!(s.len(), 1);
            picked.insert(ids(&s)[0].clone());
        }
        assert_eq!(picked.len(), 2);
    }

    #[test]
    fn random_on_empty_is_empty() {
        let m = load_model(SHERPA_MODEL).unwrap();
        let p = SelectionPolicy::new(vec![SelectionStep::Random, SelectionStep::Size(SizeOp::Gt, 5)]).unwrap();
        assert!(eval_policy(&m, &p, &atoms(&ty(&[("Payload", 2)])), 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn size_filters_without_pushdown() {
        let m = load_model(SHERPA_MODEL).unwrap();
        // prop_sel first, then a size filter applied afterwards
        let p = SelectionPolicy::new(vec![
            SelectionStep::Size(SizeOp::Le, 1),
            SelectionStep::Prop(Extremum::Argmin, "pw".into()),
            SelectionStep::Size(SizeOp::Eq, 1),
        ])
        .unwrap();
        let a = atoms(&ty(&[("SherpaTT", 1), ("Payload", 1)]));
        assert_eq!(ids(&eval_policy(&m, &p, &a, 0).unwrap()), vec!["Payload#0"]);
    }

    #[test]
    fn composite_properties() {
        let m = load_model(SHERPA_MODEL).unwrap();
        assert_eq!(
            pvalue_composite(&m, &ty(&[("SherpaTT", 1), ("Payload", 3)]), "tcap", 0).unwrap(),
            7.0
        );
        assert_eq!(pvalue_composite(&m, &ty(&[("Payload", 3)]), "v_nom", 0).unwrap(), 0.0);
        assert_eq!(pvalue_composite(&m, &ty(&[("SherpaTT", 1)]), "v_nom", 0).unwrap(), 0.5);
        assert_eq!(
            pvalue_composite(&m, &ty(&[("SherpaTT", 1), ("Payload", 1)]), "v_nom", 0).unwrap(),
            0.5
        );
        assert!(matches!(
            pvalue_composite(&m, &ty(&[("SherpaTT", 1), ("Payload", 1)]), "pw", 0),
            Err(Error::UnresolvableProperty { .. })
        ));
    }

    #[test]
    fn sums_and_costs() {
        let m = load_model(SHERPA_MODEL).unwrap();
        let three = atoms(&ty(&[("Payload", 3)]));
        assert_eq!(compose_sum(&m, &three, "tcon").unwrap(), 3.0);
        assert_eq!(compose_sum(&m, &Atoms::new(), "tcon").unwrap(), 0.0);
        assert_eq!(compose_sum(&m, &atoms(&ty(&[("SherpaTT", 2)])), "pw").unwrap(), 200.0);

        let two = ty(&[("SherpaTT", 2)]);
        assert_eq!(ocost(&m, &two, 3600.0).unwrap(), 720_000.0);
        assert_eq!(ocost(&m, &two, 0.0).unwrap(), 0.0);
        assert_eq!(ocost(&m, &GeneralAgentType::new(), 10.0).unwrap(), 0.0);
        assert!(ocost(&m, &two, -1.0).is_err());
    }

    #[test]
    fn rule_documents() {
        let doc = format!(
            "{}rules:\n  policies:\n    Heaviest: [{{prop_sel: [argmax, pw]}}, {{size_sel: ['=', 1]}}]\n  properties:\n    lead_pw:\n      - {{sign: '+', select: Heaviest, property: pw}}\n",
            SHERPA_MODEL
        );
        let m = load_model(&doc).unwrap();
        assert_eq!(
            pvalue_composite(&m, &ty(&[("SherpaTT", 1), ("Payload", 2)]), "lead_pw", 0).unwrap(),
            100.0
        );

        let bad_fn = format!("{}rules:\n  policies:\n    X: [{{func_sel: Flying}}]\n", SHERPA_MODEL);
        assert!(matches!(load_model(&bad_fn), Err(Error::Validation { .. })));
        let bad_ref = format!(
            "{}rules:\n  properties:\n    y: [{{sign: '+', select: {{not: Missing}}, property: pw}}]\n",
            SHERPA_MODEL
        );
        assert!(matches!(load_model(&bad_ref), Err(Error::Validation { .. })));
        let bad_step = format!("{}rules:\n  policies:\n    X: [shuffle]\n", SHERPA_MODEL);
        assert!(load_model(&bad_step).is_err());
    }
}
