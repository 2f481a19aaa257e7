//! Point-algebra relations and duration bounds as a simple temporal network.
//!
//! Every constraint becomes an edge `a -> b` meaning `t_b - t_a <= w`, or
//! `< w` when strict. Path lengths compare lexicographically on the weight
//! and then on the number of strict edges, so a zero-weight cycle through a
//! strict edge counts as negative. The relation set `{<, >}` is not convex
//! and is only checked after closure.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::mission::{Constraint, Mission, Relation};

const EPS: f64 = 1e-6;

/// Length of a path: total weight plus number of strict edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub weight: f64,
    pub strict: u32,
}

impl Bound {
    const ZERO: Bound = Bound { weight: 0.0, strict: 0 };
    const INF: Bound = Bound {
        weight: f64::INFINITY,
        strict: 0,
    };

    fn plus(self, o: Bound) -> Bound {
        Bound {
            weight: self.weight + o.weight,
            strict: self.strict.saturating_add(o.strict),
        }
    }

    fn cmp(self, o: Bound) -> Ordering {
        if self.weight.is_infinite() || o.weight.is_infinite() {
            return self.weight.partial_cmp(&o.weight).unwrap_or(Ordering::Equal);
        }
        if (self.weight - o.weight).abs() > EPS {
            return self.weight.partial_cmp(&o.weight).unwrap_or(Ordering::Equal);
        }
        o.strict.cmp(&self.strict)
    }

    fn lt(self, o: Bound) -> bool {
        self.cmp(o) == Ordering::Less
    }

    fn is_finite(self) -> bool {
        self.weight.is_finite()
    }
}

#[derive(Debug, Clone)]
struct Edge {
    from: usize,
    to: usize,
    bound: Bound,
    label: String,
}

#[derive(Debug, Clone)]
pub struct TemporalNetwork {
    points: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    distinct: Vec<(usize, usize, String)>,
}

/// Outcome of a consistency check. When consistent, `order` lists all
/// timepoints in a total order compatible with every constraint and
/// `earliest` holds the earliest time of each point in seconds after the
/// first one. When inconsistent, `witness` lists the constraints on a
/// contradictory cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub witness: Vec<String>,
    pub order: Vec<String>,
    pub earliest: BTreeMap<String, f64>,
}

/// All-pairs shortest paths of a consistent network.
#[derive(Debug, Clone)]
pub struct Closure {
    dist: Vec<Vec<Bound>>,
    order: Vec<usize>,
    rank: Vec<usize>,
    earliest: Vec<f64>,
}

impl TemporalNetwork {
    pub fn new(points: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let points: Vec<String> = points.into_iter().map(Into::into).collect();
        let index = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        TemporalNetwork {
            points,
            index,
            edges: Vec::new(),
            distinct: Vec::new(),
        }
    }

    /// Network of a mission: its temporal constraints, `from < to` for every
    /// requirement and the first timepoint before all others.
    pub fn from_mission(mission: &Mission) -> Self {
        let mut net = TemporalNetwork::new(mission.timepoints.iter().cloned());
        let t0 = 0;
        for i in 1..net.points.len() {
            let label = format!("{} < {} (mission start)", net.points[t0], net.points[i]);
            net.push(i, t0, Bound { weight: 0.0, strict: 1 }, label);
        }
        for r in &mission.requirements {
            let (a, b) = (net.index[&r.from], net.index[&r.to]);
            net.push(
                b,
                a,
                Bound { weight: 0.0, strict: 1 },
                format!("{} < {} ({})", r.from, r.to, r.id),
            );
        }
        for c in &mission.constraints {
            match c {
                Constraint::Temporal { lhs, rel, rhs } => {
                    let rel: Vec<Relation> = rel.iter().copied().collect();
                    net.relation(lhs, &rel, rhs);
                }
                Constraint::MinDuration { lhs, rhs, value } => {
                    let label = format!("minDuration({lhs}, {rhs}, {value})");
                    net.lower(rhs, lhs, *value, true, &label);
                }
                Constraint::MaxDuration { lhs, rhs, value } => {
                    let label = format!("maxDuration({lhs}, {rhs}, {value})");
                    let (a, b) = (net.index[rhs], net.index[lhs]);
                    net.push(
                        a,
                        b,
                        Bound {
                            weight: *value,
                            strict: 0,
                        },
                        label.clone(),
                    );
                    net.push(b, a, Bound { weight: 0.0, strict: 1 }, label);
                }
                _ => {}
            }
        }
        net
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn index_of(&self, point: &str) -> Option<usize> {
        self.index.get(point).copied()
    }

    fn push(&mut self, from: usize, to: usize, bound: Bound, label: String) {
        self.edges.push(Edge { from, to, bound, label });
    }

    /// Adds `lhs REL rhs` for a set of permitted point relations.
    pub fn relation(&mut self, lhs: &str, rel: &[Relation], rhs: &str) {
        let (a, b) = (self.index[lhs], self.index[rhs]);
        let names: Vec<String> = rel.iter().map(Relation::to_string).collect();
        let label = format!("{lhs} {{{}}} {rhs}", names.join(","));
        let has = |r| rel.contains(&r);
        let (lt, eq, gt) = (has(Relation::Before), has(Relation::Equal), has(Relation::After));
        match (lt, eq, gt) {
            (true, true, true) => {}
            (false, false, false) => {
                // The empty relation: a zero-length strict self loop.
                self.push(a, a, Bound { weight: 0.0, strict: 1 }, label);
            }
            (true, false, true) => self.distinct.push((a, b, label)),
            (true, eq, false) => self.push(
                b,
                a,
                Bound {
                    weight: 0.0,
                    strict: u32::from(!eq),
                },
                label,
            ),
            (false, eq, true) => self.push(
                a,
                b,
                Bound {
                    weight: 0.0,
                    strict: u32::from(!eq),
                },
                label,
            ),
            (false, true, false) => {
                self.push(a, b, Bound::ZERO, label.clone());
                self.push(b, a, Bound::ZERO, label);
            }
        }
    }

    /// `t_b - t_a >= gap`; with `strict_order` also `t_a < t_b`.
    pub fn lower(&mut self, a: &str, b: &str, gap: f64, strict_order: bool, label: &str) {
        let (ia, ib) = (self.index[a], self.index[b]);
        self.push(
            ib,
            ia,
            Bound {
                weight: -gap,
                strict: 0,
            },
            label.to_string(),
        );
        if strict_order {
            self.push(ib, ia, Bound { weight: 0.0, strict: 1 }, label.to_string());
        }
    }

    /// Index-based form of [`lower`](Self::lower) without the strict order.
    pub(crate) fn lower_at(&mut self, a: usize, b: usize, gap: f64, label: String) {
        self.push(
            b,
            a,
            Bound {
                weight: -gap,
                strict: 0,
            },
            label,
        );
    }

    pub fn check(&self) -> ConsistencyReport {
        match self.solve() {
            Ok(c) => ConsistencyReport {
                consistent: true,
                witness: Vec::new(),
                order: c.order.iter().map(|&i| self.points[i].clone()).collect(),
                earliest: self
                    .points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (p.clone(), c.earliest[i]))
                    .collect(),
            },
            Err(witness) => ConsistencyReport {
                consistent: false,
                witness,
                order: Vec::new(),
                earliest: BTreeMap::new(),
            },
        }
    }

    /// Closure of a consistent network, or the labels of a contradictory
    /// cycle.
    pub fn solve(&self) -> Result<Closure, Vec<String>> {
        let n = self.points.len();
        if n == 0 {
            return Ok(Closure {
                dist: Vec::new(),
                order: Vec::new(),
                rank: Vec::new(),
                earliest: Vec::new(),
            });
        }
        if let Some(w) = self.negative_cycle() {
            return Err(w);
        }
        let mut dist = vec![vec![Bound::INF; n]; n];
        for (i, row) in dist.iter_mut().enumerate() {
            row[i] = Bound::ZERO;
        }
        for e in &self.edges {
            if e.bound.lt(dist[e.from][e.to]) {
                dist[e.from][e.to] = e.bound;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if !dist[i][k].is_finite() {
                    continue;
                }
                for j in 0..n {
                    if !dist[k][j].is_finite() {
                        continue;
                    }
                    let via = dist[i][k].plus(dist[k][j]);
                    if via.lt(dist[i][j]) {
                        dist[i][j] = via;
                    }
                }
            }
        }
        for (a, b, label) in &self.distinct {
            let (a, b) = (*a, *b);
            if !Bound::ZERO.lt(dist[a][b]) && !Bound::ZERO.lt(dist[b][a]) {
                return Err(vec![
                    label.clone(),
                    format!(
                        "{} = {} is forced by the other constraints",
                        self.points[a], self.points[b]
                    ),
                ]);
            }
        }
        // Earliest solution relative to a virtual origin before every point:
        // t_v = -min_u d(v, u); the strict count of that path orders ties.
        let key: Vec<Bound> = (0..n)
            .map(|v| {
                dist[v]
                    .iter()
                    .copied()
                    .fold(Bound::ZERO, |best, d| if d.lt(best) { d } else { best })
            })
            .collect();
        let earliest: Vec<f64> = key
            .iter()
            .map(|k| if k.weight.abs() < EPS { 0.0 } else { -k.weight })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            earliest[a]
                .partial_cmp(&earliest[b])
                .unwrap_or(Ordering::Equal)
                .then(key[a].strict.cmp(&key[b].strict))
                .then(a.cmp(&b))
        });
        let mut rank = vec![0; n];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        Ok(Closure {
            dist,
            order,
            rank,
            earliest,
        })
    }

    /// Bellman-Ford from a virtual source; returns the labels along a
    /// negative cycle if there is one.
    fn negative_cycle(&self) -> Option<Vec<String>> {
        let n = self.points.len();
        let mut d = vec![Bound::ZERO; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut last = None;
        for _ in 0..=n {
            last = None;
            for (ei, e) in self.edges.iter().enumerate() {
                let via = d[e.from].plus(e.bound);
                if via.lt(d[e.to]) {
                    d[e.to] = via;
                    pred[e.to] = Some(ei);
                    last = Some(e.to);
                }
            }
            last?;
        }
        let mut v = last?;
        for _ in 0..n {
            v = self.edges[pred[v]?].from;
        }
        let start = v;
        let mut labels = Vec::new();
        loop {
            let e = &self.edges[pred[v]?];
            labels.push(e.label.clone());
            v = e.from;
            if v == start {
                break;
            }
        }
        labels.reverse();
        Some(labels)
    }
}

impl Closure {
    /// `t_a <= t_b` holds in every solution.
    pub fn entails_le(&self, a: usize, b: usize) -> bool {
        !Bound::ZERO.lt(self.dist[b][a])
    }

    /// `t_a < t_b` holds in every solution.
    pub fn entails_lt(&self, a: usize, b: usize) -> bool {
        self.dist[b][a].lt(Bound::ZERO)
    }

    /// Position of `v` in the total order.
    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn earliest(&self, v: usize) -> f64 {
        self.earliest[v]
    }

    /// Latest earliest time over all points.
    pub fn makespan(&self) -> f64 {
        self.earliest.iter().copied().fold(0.0, f64::max)
    }
}

pub fn check_temporal_consistency(mission: &Mission) -> ConsistencyReport {
    TemporalNetwork::from_mission(mission).check()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mission::parse_mission;
    use crate::testing::{desk_model, SPACE_MISSION};

    fn chain(n: usize) -> TemporalNetwork {
        let pts: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
        let mut net = TemporalNetwork::new(pts.clone());
        for w in pts.windows(2) {
            net.relation(&w[0], &[Relation::Before], &w[1]);
        }
        net
    }

    #[test]
    fn lunar_chain_is_consistent_in_order() {
        let m = parse_mission(SPACE_MISSION, &desk_model()).unwrap();
        let r = check_temporal_consistency(&m);
        assert!(r.consistent, "{:?}", r.witness);
        let expected: Vec<String> = (0..15).map(|i| format!("t{i}")).collect();
        assert_eq!(r.order, expected);
        assert!(r.earliest.values().all(|&t| t == 0.0));
    }

    #[test]
    fn two_cycle_is_rejected() {
        let mut net = TemporalNetwork::new(["t0", "t1"]);
        net.relation("t0", &[Relation::Before], "t1");
        net.relation("t1", &[Relation::Before], "t0");
        let r = net.check();
        assert!(!r.consistent);
        assert_eq!(r.witness.len(), 2);
        assert!(r.witness.contains(&"t0 {<} t1".to_string()));
        assert!(r.witness.contains(&"t1 {<} t0".to_string()));
    }

    #[test]
    fn contradictory_durations_form_negative_cycle() {
        let mut net = chain(2);
        net.lower("t0", "t1", 100.0, true, "minDuration(t1, t0, 100)");
        net.push(
            0,
            1,
            Bound {
                weight: 50.0,
                strict: 0,
            },
            "maxDuration(t1, t0, 50)".into(),
        );
        let r = net.check();
        assert!(!r.consistent);
        assert!(r.witness.contains(&"minDuration(t1, t0, 100)".to_string()));
        assert!(r.witness.contains(&"maxDuration(t1, t0, 50)".to_string()));
    }

    #[test]
    fn durations_give_earliest_times() {
        let mut net = chain(3);
        net.lower("t0", "t1", 100.0, true, "d1");
        net.lower("t1", "t2", 20.0, true, "d2");
        net.lower("t0", "t2", 150.0, true, "d3");
        let r = net.check();
        assert!(r.consistent);
        assert_eq!(r.earliest["t1"], 100.0);
        assert_eq!(r.earliest["t2"], 150.0);
    }

    #[test]
    fn equality_and_nonstrict_relations() {
        let mut net = TemporalNetwork::new(["a", "b", "c"]);
        net.relation("a", &[Relation::Equal], "b");
        net.relation("b", &[Relation::Before, Relation::Equal], "c");
        let c = net.solve().unwrap();
        assert!(c.entails_le(0, 1) && c.entails_le(1, 0));
        assert!(c.entails_le(0, 2));
        assert!(!c.entails_lt(0, 2));
        net.relation("c", &[Relation::Before], "a");
        assert!(!net.check().consistent);
    }

    #[test]
    fn distinct_is_checked_after_closure() {
        let mut net = TemporalNetwork::new(["a", "b"]);
        net.relation("a", &[Relation::Before, Relation::After], "b");
        assert!(net.check().consistent);
        net.relation("a", &[Relation::Equal], "b");
        let r = net.check();
        assert!(!r.consistent);
        assert_eq!(r.witness[0], "a {<,>} b");
    }

    #[test]
    fn unconstrained_and_empty_relations() {
        let mut net = TemporalNetwork::new(["a", "b"]);
        net.relation("a", &[Relation::Before, Relation::Equal, Relation::After], "b");
        assert!(net.check().consistent);
        net.relation("a", &[], "b");
        assert!(!net.check().consistent);
    }

    #[test]
    fn order_respects_strict_relations() {
        let mut net = TemporalNetwork::new(["x", "y", "z"]);
        net.relation("z", &[Relation::Before], "y");
        net.relation("y", &[Relation::Before], "x");
        let r = net.check();
        assert_eq!(r.order, vec!["z", "y", "x"]);
    }
}
