//! Transport feasibility of a candidate on the time-expanded graph.
//!
//! Nodes are (location, timepoint) pairs in schedule order. Waiting at a
//! location is free and unbounded; every move of a mobile role adds its
//! transport capacity to the arc between its departure and arrival nodes.
//! Each relocation of an immobile role is a unit commodity of size `tcon`.
//! Relocations with an assigned carrier are checked on that carrier's arc;
//! the rest are routed one at a time along shortest residual paths.

use std::collections::{BTreeMap, HashMap, VecDeque};

use reorg_core::{Error as ModelError, ResourceModel};
use serde::Serialize;

use crate::candidate::SolutionCandidate;
use crate::error::Result;
use crate::mission::Mission;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcUsage {
    /// `origin@departure -> destination@arrival`.
    pub arc: String,
    pub capacity: f64,
    pub load: f64,
}

impl ArcUsage {
    pub fn residual(&self) -> f64 {
        self.capacity - self.load
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowViolation {
    pub role: String,
    /// Saturated or missing arc blocking the relocation.
    pub arc: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub arcs: Vec<ArcUsage>,
    pub violations: Vec<FlowViolation>,
}

impl FeasibilityReport {
    pub fn arc(&self, label: &str) -> Option<&ArcUsage> {
        self.arcs.iter().find(|a| a.arc == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    loc: usize,
    rank: usize,
}

struct Arc {
    from: Node,
    to: Node,
    capacity: f64,
    load: f64,
}

fn property_or(model: &ResourceModel, ty: &str, name: &str, default: f64) -> Result<f64> {
    match model.resolve_property(ty, name) {
        Ok(v) => Ok(v),
        Err(ModelError::UnresolvableProperty { .. }) => Ok(default),
        Err(e) => Err(e.into()),
    }
}

pub fn check_flow(
    model: &ResourceModel,
    mission: &Mission,
    candidate: &SolutionCandidate,
) -> Result<FeasibilityReport> {
    let locs: Vec<&String> = mission.locations.keys().collect();
    let loc_index: HashMap<&str, usize> = locs.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let rank: HashMap<&str, usize> = candidate
        .schedule
        .iter()
        .enumerate()
        .map(|(i, (t, _))| (t.as_str(), i))
        .collect();
    let node = |loc: &str, tp: &str| Node {
        loc: loc_index[loc],
        rank: rank[tp],
    };
    let at = |n: Node| format!("{}@{}", locs[n.loc], candidate.schedule[n.rank].0);
    let label = |a: Node, b: Node| format!("{} -> {}", at(a), at(b));

    let mut arcs: Vec<Arc> = Vec::new();
    let mut arc_of: BTreeMap<(Node, Node), usize> = BTreeMap::new();
    let mut demands: Vec<(String, Node, Node, f64)> = Vec::new();
    for tl in &candidate.timelines {
        let ty = &tl.role.agent_type;
        let mobile = model.is_mobile(ty)?;
        for w in tl.visits.windows(2) {
            if w[0].location == w[1].location {
                continue;
            }
            let (a, b) = (node(&w[0].location, &w[0].to), node(&w[1].location, &w[1].from));
            if mobile {
                let cap = property_or(model, ty, "tcap", 0.0)?;
                let i = *arc_of.entry((a, b)).or_insert_with(|| {
                    arcs.push(Arc {
                        from: a,
                        to: b,
                        capacity: 0.0,
                        load: 0.0,
                    });
                    arcs.len() - 1
                });
                arcs[i].capacity += cap;
            } else {
                demands.push((tl.role.name.clone(), a, b, property_or(model, ty, "tcon", 1.0)?));
            }
        }
    }

    let mut violations = Vec::new();
    let mut open = Vec::new();
    for (role, a, b, units) in demands {
        let assigned = candidate
            .transfers
            .iter()
            .find(|t| t.role == role && node(&t.origin, &t.release) == a && node(&t.destination, &t.due) == b);
        let Some(t) = assigned else {
            open.push((role, a, b, units));
            continue;
        };
        let (d, r) = (node(&t.origin, &t.departure), node(&t.destination, &t.arrival));
        let Some(&i) = arc_of.get(&(d, r)) else {
            violations.push(FlowViolation {
                role,
                arc: Some(label(d, r)),
                message: format!("carrier {} makes no such move", t.carrier),
            });
            continue;
        };
        if d.rank < a.rank || r.rank > b.rank {
            violations.push(FlowViolation {
                role,
                arc: Some(label(d, r)),
                message: "carrier move lies outside the relocation window".into(),
            });
            continue;
        }
        arcs[i].load += units;
        if arcs[i].load > arcs[i].capacity + EPS {
            violations.push(FlowViolation {
                role,
                arc: Some(label(d, r)),
                message: format!("load {} exceeds capacity {}", arcs[i].load, arcs[i].capacity),
            });
        }
    }

    for (role, a, b, units) in open {
        match route(&arcs, a, b, units) {
            Ok(path) => {
                for i in path {
                    arcs[i].load += units;
                }
            }
            Err(blocking) => violations.push(FlowViolation {
                role,
                arc: blocking.map(|i| label(arcs[i].from, arcs[i].to)),
                message: format!("no transport from {} to {}", at(a), at(b)),
            }),
        }
    }

    let mut usage: Vec<ArcUsage> = arcs
        .iter()
        .map(|a| ArcUsage {
            arc: label(a.from, a.to),
            capacity: a.capacity,
            load: a.load,
        })
        .collect();
    usage.sort_by(|x, y| x.arc.cmp(&y.arc));
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        arcs: usage,
        violations,
    })
}

/// Breadth-first search for a path from `a` to `b` (or to `b`'s location
/// earlier) using waits and arcs with enough residual capacity. On failure
/// returns a saturated arc leaving the reachable region, if any.
fn route(arcs: &[Arc], a: Node, b: Node, units: f64) -> Result<Vec<usize>, Option<usize>> {
    let mut prev: HashMap<Node, Option<(Node, Option<usize>)>> = HashMap::new();
    let mut queue = VecDeque::from([a]);
    prev.insert(a, None);
    let mut blocking = None;
    while let Some(n) = queue.pop_front() {
        if n.loc == b.loc && n.rank <= b.rank {
            let mut path = Vec::new();
            let mut cur = n;
            while let Some(Some((p, arc))) = prev.get(&cur) {
                if let Some(i) = arc {
                    path.push(*i);
                }
                cur = *p;
            }
            path.reverse();
            return Ok(path);
        }
        let mut next: Vec<(Node, Option<usize>)> = Vec::new();
        if n.rank < b.rank {
            next.push((
                Node {
                    loc: n.loc,
                    rank: n.rank + 1,
                },
                None,
            ));
        }
        for (i, arc) in arcs.iter().enumerate() {
            if arc.from == n && arc.to.rank <= b.rank {
                if arc.capacity - arc.load + EPS >= units {
                    next.push((arc.to, Some(i)));
                } else {
                    blocking.get_or_insert(i);
                }
            }
        }
        for (m, arc) in next {
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(m) {
                e.insert(Some((n, arc)));
                queue.push_back(m);
            }
        }
    }
    Err(blocking)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidate::{Timeline, Transfer, Visit};
    use crate::mission::parse_mission;
    use crate::testing::{desk_model, DESK_MISSION};
    use reorg_core::Role;

    fn stay(loc: &str, from: &str, to: &str) -> Visit {
        Visit {
            location: loc.into(),
            from: from.into(),
            to: to.into(),
            requirement: None,
        }
    }

    fn schedule() -> Vec<(String, f64)> {
        (0..6).map(|i| (format!("t{i}"), 0.0)).collect()
    }

    fn carried(n: usize, carrier: &str, carrier_type: &str, assign: bool) -> SolutionCandidate {
        let mut timelines = vec![Timeline {
            role: Role::new(carrier, carrier_type),
            visits: vec![stay("depot", "t0", "t1"), stay("l1", "t2", "t3")],
        }];
        let mut transfers = Vec::new();
        for i in 0..n {
            let name = format!("Payload_{i}");
            timelines.push(Timeline {
                role: Role::new(name.clone(), "Payload"),
                visits: vec![stay("depot", "t0", "t1"), stay("l1", "t2", "t3")],
            });
            if assign {
                transfers.push(Transfer {
                    role: name,
                    origin: "depot".into(),
                    release: "t1".into(),
                    destination: "l1".into(),
                    due: "t2".into(),
                    carrier: carrier.into(),
                    departure: "t1".into(),
                    arrival: "t2".into(),
                });
            }
        }
        SolutionCandidate {
            assignments: Vec::new(),
            timelines,
            transfers,
            schedule: schedule(),
            structures: Vec::new(),
        }
    }

    fn desk() -> Mission {
        parse_mission(DESK_MISSION, &desk_model()).unwrap()
    }

    #[test]
    fn sherpa_carries_three_payloads() {
        for assign in [true, false] {
            let c = carried(3, "SherpaTT_0", "SherpaTT", assign);
            let r = check_flow(&desk_model(), &desk(), &c).unwrap();
            assert!(r.feasible, "{:?}", r.violations);
            let arc = r.arc("depot@t1 -> l1@t2").unwrap();
            assert_eq!(arc.capacity, 10.0);
            assert_eq!(arc.residual(), 7.0);
        }
    }

    #[test]
    fn coyote_cannot_carry_five() {
        for assign in [true, false] {
            let c = carried(5, "CoyoteIII_0", "CoyoteIII", assign);
            let r = check_flow(&desk_model(), &desk(), &c).unwrap();
            assert!(!r.feasible);
            assert_eq!(r.violations.len(), 1);
            assert_eq!(r.violations[0].arc.as_deref(), Some("depot@t1 -> l1@t2"));
        }
    }

    #[test]
    fn no_relocation_is_trivially_feasible() {
        let c = carried(0, "SherpaTT_0", "SherpaTT", false);
        let r = check_flow(&desk_model(), &desk(), &c).unwrap();
        assert!(r.feasible);
        let empty = SolutionCandidate {
            assignments: Vec::new(),
            timelines: Vec::new(),
            transfers: Vec::new(),
            schedule: schedule(),
            structures: Vec::new(),
        };
        assert!(check_flow(&desk_model(), &desk(), &empty).unwrap().feasible);
    }

    #[test]
    fn unassigned_cargo_changes_carrier_mid_way() {
        let mut c = carried(0, "SherpaTT_0", "SherpaTT", false);
        c.timelines.push(Timeline {
            role: Role::new("CoyoteIII_0", "CoyoteIII"),
            visits: vec![stay("l1", "t3", "t3"), stay("l3", "t4", "t5")],
        });
        c.timelines.push(Timeline {
            role: Role::new("Payload_0", "Payload"),
            visits: vec![stay("depot", "t0", "t1"), stay("l3", "t5", "t5")],
        });
        let r = check_flow(&desk_model(), &desk(), &c).unwrap();
        assert!(r.feasible, "{:?}", r.violations);
        assert_eq!(r.arc("depot@t1 -> l1@t2").unwrap().load, 1.0);
        assert_eq!(r.arc("l1@t3 -> l3@t4").unwrap().load, 1.0);
    }

    #[test]
    fn missing_carrier_move_is_reported() {
        let mut c = carried(1, "SherpaTT_0", "SherpaTT", true);
        c.transfers[0].arrival = "t3".into();
        let r = check_flow(&desk_model(), &desk(), &c).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.violations[0].arc.as_deref(), Some("depot@t1 -> l1@t3"));
    }
}
