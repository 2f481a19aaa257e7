use std::fmt::Write as _;
use std::path::Path;

use reorg_core::reliability::DemandEntry;
use reorg_planner::{Mission, SolutionSet};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct LandscapeRow {
    candidate_id: usize,
    psi_m: u32,
    energy_kwh: f64,
    sat: f64,
    saf: f64,
    efficacy: u8,
    cost: f64,
}

pub fn write_landscape(path: &Path, set: &SolutionSet) -> CliResult {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for s in &set.solutions {
        w.serialize(LandscapeRow {
            candidate_id: s.id,
            psi_m: set.bounds.psi_m,
            energy_kwh: s.score.energy_kwh,
            sat: s.score.sat,
            saf: s.score.saf,
            efficacy: s.score.efficacy,
            cost: s.score.cost,
        })
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn demand_table(profile: &[DemandEntry]) -> String {
    let width = profile
        .iter()
        .map(|d| d.concept.len())
        .max()
        .unwrap_or(0)
        .max("resource".len());
    let mut out = format!("{:<width$}  {:>4}  {:>4}  {:>8}\n", "resource", "req", "avl", "p");
    for d in profile {
        let _ = writeln!(
            out,
            "{:<width$}  {:>4}  {:>4}  {:>8.6}",
            d.concept, d.required, d.available, d.p_survival
        );
    }
    out
}

/// Human-readable account of the cheapest candidate: objectives,
/// assignments and the constellation at every location and timepoint.
pub fn best_report(mission: &Mission, set: &SolutionSet) -> String {
    let best = set.best();
    let (c, s) = (&best.candidate, &best.score);
    let mut out = String::new();
    let _ = writeln!(out, "mission: {}", mission.name.as_deref().unwrap_or("(unnamed)"));
    let _ = writeln!(out, "bounds: psi_m {}, psi_im {}", set.bounds.psi_m, set.bounds.psi_im);
    let _ = writeln!(
        out,
        "weights: alpha {}, beta {}, epsilon {}",
        set.weights.alpha, set.weights.beta, set.weights.epsilon
    );
    let _ = writeln!(out, "candidate: {} of {}", best.id, set.solutions.len());
    let _ = writeln!(
        out,
        "energy: {:.3} kWh (normalized by {:.3} kWh)",
        s.energy_kwh, set.e_max
    );
    let _ = writeln!(out, "sat: {:.6}", s.sat);
    let _ = writeln!(out, "saf: {:.6}", s.saf);
    let _ = writeln!(out, "efficacy: {}", s.efficacy);
    let _ = writeln!(out, "cost: {:.6}", s.cost);
    let _ = writeln!(out, "reconfiguration: {:.0} s", s.reconfig_seconds);
    let _ = writeln!(out, "makespan: {:.0} s", c.makespan());

    let _ = writeln!(out, "\nassignments");
    for a in &c.assignments {
        let (loc, from, to) = mission
            .requirement(&a.requirement)
            .map(|r| (r.location.as_str(), r.from.as_str(), r.to.as_str()))
            .unwrap_or_default();
        let status = if a.satisfied { "satisfied" } else { "unsatisfied" };
        let _ = write!(
            out,
            "  {} at {loc} [{from}, {to}]: {status} {} {}",
            a.requirement,
            a.agent_type,
            a.roles.join(" ")
        );
        if let Some(n) = &a.note {
            let _ = write!(out, " ({n})");
        }
        out.push('\n');
    }

    let _ = writeln!(out, "\nconstellations");
    for snap in &c.structures {
        let blocks: Vec<String> = snap.agents.iter().map(|b| format!("{{{}}}", b.join(","))).collect();
        let _ = writeln!(
            out,
            "  {} @ {} ({:.0} s): {}  safety {:.6}, reconfiguration {:.0} s",
            snap.location,
            snap.timepoint,
            c.time(&snap.timepoint).unwrap_or(0.0),
            blocks.join(" "),
            snap.safety,
            snap.reconfig_seconds
        );
    }

    if !c.transfers.is_empty() {
        let _ = writeln!(out, "\ntransfers");
        for t in &c.transfers {
            let _ = writeln!(
                out,
                "  {} {} -> {} with {} ({} -> {})",
                t.role, t.origin, t.destination, t.carrier, t.departure, t.arrival
            );
        }
    }
    out
}
