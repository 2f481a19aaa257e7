//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reorg_core::agents::connection_feasible;
use reorg_core::capability::{efficacy_type, has_functionality, support_functionality, support_set};
use reorg_core::policies::TRANSPORT_PROVIDER;
use reorg_core::reliability::{monte_carlo_reliability, reliability, resource_instances, rsub};
use reorg_core::synth::{functionality_names, random_model, random_pool, random_type, SynthParams};
use reorg_core::{
    enumerate_structures, eval_policy, find_feasible_structure, inverse_policy, load_model, pvalue_composite,
    transition_cost, union_types, AtomicAgent, CoalitionStructure, CsgBudget, GeneralAgent, GeneralAgentType,
    ReconfigParams, ResourceModel,
};
use reorg_planner::{
    check_flow, check_temporal_consistency, parse_mission, plan, Bounds, Budget, Constraint, Mission, MissionDocument,
    SolutionSet, Weights,
};

const MODEL: &str = include_str!("../../../data/space_model.yaml");
const DESK: &str = include_str!("../../../data/desk_mission.yaml");
const LUNAR: &str = include_str!("../../../data/space_mission.yaml");

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure(
        (got - want).abs() <= tol,
        format!("{what} = {got}, expected {want} ± {tol}"),
    )
}

fn ty(spec: &str) -> GeneralAgentType {
    spec.parse().unwrap()
}

fn model() -> ResourceModel {
    load_model(MODEL).unwrap()
}

fn atoms(names: &[&str]) -> Vec<AtomicAgent> {
    names.iter().map(|n| AtomicAgent::new(*n, "Payload")).collect()
}

fn structure(pool: &[AtomicAgent], blocks: &[&[usize]]) -> CoalitionStructure {
    let set: BTreeSet<AtomicAgent> = pool.iter().cloned().collect();
    let agents = blocks
        .iter()
        .map(|b| GeneralAgent::new(b.iter().map(|&i| pool[i].clone())).unwrap());
    CoalitionStructure::new(&set, agents).unwrap()
}

fn worked_reliability() -> Check {
    let m = model();
    let one = (1.0 - 0.05f64.powi(2)) * 0.95f64.powi(4);
    let two = (1.0 - 0.05f64.powi(2)).powi(2) * 0.95f64.powi(3);
    close(one, 0.812_469_984_375, 1e-12, "oracle")?;
    close(two, 0.853_093_483_593_75, 1e-12, "oracle")?;
    let sherpa = ty("SherpaTT");
    let battery = ty("SherpaTT,PayloadBattery");
    let r1 = reliability(&m, &sherpa, ["LocationImageProvider"]).map_err(|e| e.to_string())?;
    let r2 = reliability(&m, &battery, ["LocationImageProvider"]).map_err(|e| e.to_string())?;
    close(r1, 0.812_469_984_4, 1e-9, "R(SherpaTT)")?;
    close(r2, two, 1e-9, "R(SherpaTT, PayloadBattery)")?;
    let n = 1000;
    let start = Instant::now();
    for _ in 0..n {
        reliability(&m, &battery, ["LocationImageProvider"]).unwrap();
    }
    let per_call = start.elapsed() / n;
    ensure(per_call < Duration::from_millis(1), format!("{per_call:?} per call"))?;
    Ok(format!(
        "R = {r1:.10} and {r2:.10} (stated 0.8530935 rounds the same product), {per_call:?} per call"
    ))
}

/// Probability that every requirement keeps enough surviving instances,
/// summed over all survival states.
fn exact_instancewise(instances: &[(usize, f64)], required: &[u32]) -> f64 {
    let mut total = 0.0;
    for state in 0u64..1 << instances.len() {
        let mut prob = 1.0;
        let mut alive = vec![0u32; required.len()];
        for (i, &(serves, p)) in instances.iter().enumerate() {
            if state >> i & 1 == 1 {
                prob *= p;
                alive[serves] += 1;
            } else {
                prob *= 1.0 - p;
            }
        }
        if alive.iter().zip(required).all(|(a, r)| a >= r) {
            total += prob;
        }
    }
    total
}

fn monte_carlo_oracle() -> Check {
    let m = model();
    let sherpa = ty("SherpaTT");
    let wanted = ["Camera", "Localization", "Locomotion", "Mapping", "PowerSource"];
    let instances: Vec<(usize, f64)> = resource_instances(&m, &sherpa)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter_map(|i| wanted.iter().position(|w| *w == i.concept).map(|j| (j, i.p_survival)))
        .collect();
    ensure(instances.len() == 6, format!("{} relevant instances", instances.len()))?;
    let exact = exact_instancewise(&instances, &[1; 5]);
    let start = Instant::now();
    let (est, se) =
        monte_carlo_reliability(&m, &sherpa, ["LocationImageProvider"], 1_000_000, 2024).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(
        (est - exact).abs() <= 3.0 * se,
        format!("estimate {est} ± {se}, exact {exact}"),
    )?;
    ensure(took < Duration::from_secs(10), format!("took {took:?}"))?;
    let block = reliability(&m, &sherpa, ["LocationImageProvider"]).unwrap();
    Ok(format!(
        "exact {exact:.9}, estimate {est:.6} ± {se:.6} in {took:?}; block formula {block:.9}"
    ))
}

fn rsub_table() -> Check {
    let get = |r, n, p| rsub(r, n, p).map_err(|e| e.to_string());
    close(get(1, 2, 0.95)?, 0.9975, 1e-12, "rsub(1,2,0.95)")?;
    close(get(2, 8, 0.95)?, 0.999_909_63, 1e-8, "rsub(2,8,0.95)")?;
    for p in [0.0, 0.5, 0.95, 1.0] {
        ensure(get(2, 1, p)? == 0.0, format!("rsub(2,1,{p}) is not 0"))?;
    }
    Ok("0.9975, 0.99990963, 0".into())
}

fn composite_tcap() -> Check {
    let m = model();
    let tcap = pvalue_composite(&m, &ty("SherpaTT,Payload:3"), "tcap", 0).map_err(|e| e.to_string())?;
    ensure(tcap == 7.0, format!("tcap = {tcap}"))?;
    Ok(format!("tcap = {tcap}"))
}

fn reconfiguration_costs() -> Check {
    let p = ReconfigParams::default();
    let a = atoms(&["a1", "a2", "a3"]);
    let cost = |from, to| transition_cost(from, to, &p).map_err(|e| e.to_string());
    let singles = structure(&a, &[&[0], &[1], &[2]]);
    let merged = structure(&a, &[&[0, 1, 2]]);
    let before = structure(&a, &[&[0, 1], &[2]]);
    let after = structure(&a, &[&[0], &[1, 2]]);
    let (m, s, i) = (
        cost(&singles, &merged)?,
        cost(&before, &after)?,
        cost(&before, &before)?,
    );
    ensure(m == 2100.0, format!("merge = {m}"))?;
    ensure(s == 2100.0, format!("split = {s}"))?;
    ensure(i == 0.0, format!("identity = {i}"))?;
    Ok(format!("merge {m} s, split {s} s, identity {i} s"))
}

fn bell(n: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    row[0]
}

fn partitions(items: &[AtomicAgent]) -> Vec<Vec<Vec<AtomicAgent>>> {
    let Some((first, rest)) = items.split_first() else {
        return vec![vec![]];
    };
    let mut out = Vec::new();
    for p in partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].push(first.clone());
            out.push(q);
        }
        let mut q = p;
        q.push(vec![first.clone()]);
        out.push(q);
    }
    out
}

fn coalition_structures() -> Check {
    let start = Instant::now();
    let m = model();
    let budget = CsgBudget::default();
    let count = |spec: &str| -> Result<usize, String> {
        let pool = ty(spec).instantiate().unwrap().members().clone();
        Ok(enumerate_structures(&m, &pool, &budget)
            .map_err(|e| e.to_string())?
            .len())
    };
    let (three, six) = (count("SherpaTT,CoyoteIII,Payload")?, count("Payload:6")?);
    ensure(three == bell(3) && three == 5, format!("n=3 gives {three}"))?;
    ensure(six == bell(6) && six == 203, format!("n=6 gives {six}"))?;

    let mut checked = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let rm = random_model(&mut rng, &SynthParams::default()).map_err(|e| e.to_string())?;
        let funcs = functionality_names(&rm);
        for n in 1..=6usize {
            let pool = random_pool(&mut rng, &rm, n);
            let list: Vec<AtomicAgent> = pool.iter().cloned().collect();
            let f = [funcs[rng.gen_range(0..funcs.len())].as_str()];
            let fewest = partitions(&list)
                .into_iter()
                .filter(|p| {
                    p.iter().all(|b| {
                        let t = GeneralAgent::new(b.clone()).unwrap().agent_type();
                        connection_feasible(&rm, &t).unwrap() && efficacy_type(&rm, &t, f).unwrap() == 1
                    })
                })
                .map(|p| p.len())
                .min();
            let got = find_feasible_structure(&rm, &pool, &f, &budget).map_err(|e| e.to_string())?;
            ensure(
                fewest == got.as_ref().map(|cs| cs.len()),
                format!("seed {seed} n {n}: {fewest:?} vs {got:?}"),
            )?;
            checked += 1;
        }
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(30), format!("took {took:?}"))?;
    Ok(format!(
        "Bell 5 and 203; {checked} pools agree with exhaustive search in {took:?}"
    ))
}

fn edited(f: impl FnOnce(&mut MissionDocument)) -> Mission {
    let mut doc = MissionDocument::from_yaml(LUNAR).unwrap();
    f(&mut doc);
    Mission::from_document(doc, &model()).unwrap()
}

fn temporal_consistency() -> Check {
    let chain = check_temporal_consistency(&edited(|_| {}));
    ensure(chain.consistent, format!("lunar chain rejected: {:?}", chain.witness))?;
    let want: Vec<String> = (0..15).map(|i| format!("t{i}")).collect();
    ensure(chain.order == want, format!("order {:?}", chain.order))?;
    let cycle = check_temporal_consistency(&edited(|d| {
        d.constraints.push(Constraint::Temporal {
            lhs: "t5".into(),
            rel: [reorg_planner::mission::Relation::Before].into(),
            rhs: "t4".into(),
        })
    }));
    ensure(!cycle.consistent && !cycle.witness.is_empty(), "two-cycle accepted")?;
    let durations = check_temporal_consistency(&edited(|d| {
        d.constraints.push(Constraint::MinDuration {
            lhs: "t3".into(),
            rhs: "t2".into(),
            value: 100.0,
        });
        d.constraints.push(Constraint::MaxDuration {
            lhs: "t3".into(),
            rhs: "t2".into(),
            value: 50.0,
        });
    }));
    ensure(
        !durations.consistent && !durations.witness.is_empty(),
        "contradictory durations accepted",
    )?;
    Ok(format!(
        "chain t0..t14 valid; cycle witness [{}]; duration witness [{}]",
        cycle.witness.join("; "),
        durations.witness.join("; ")
    ))
}

fn check_set(m: &ResourceModel, mission: &Mission, set: &SolutionSet) -> Result<(), String> {
    for s in &set.solutions {
        let report = check_flow(m, mission, &s.candidate).map_err(|e| e.to_string())?;
        ensure(report.feasible, format!("candidate {} infeasible", s.id))?;
        for arc in &report.arcs {
            ensure(
                arc.load <= arc.capacity + 1e-9,
                format!("arc {} over capacity", arc.arc),
            )?;
        }
    }
    Ok(())
}

struct PlannerRuns {
    retained: usize,
}

fn desk_planning(runs: &mut PlannerRuns) -> Check {
    let m = model();
    let mission = parse_mission(DESK, &m).map_err(|e| e.to_string())?;
    let budget = Budget::deterministic(60, 60);
    let weights = Weights::default();
    let mut best_sat = 0.0f64;
    let mut worse = Vec::new();
    let (mut saf0, mut saf1) = (Vec::new(), Vec::new());
    for seed in 0..20u64 {
        let mut saf = [0.0; 2];
        for psi_m in [0u32, 1] {
            let set = plan(&m, &mission, &Bounds { psi_m, psi_im: 0 }, &weights, &budget, seed)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            check_set(&m, &mission, &set)?;
            runs.retained += set.solutions.len();
            best_sat = set.solutions.iter().map(|s| s.score.sat).fold(best_sat, f64::max);
            saf[psi_m as usize] = set.max_saf();
        }
        if saf[1] < saf[0] {
            worse.push(seed);
        }
        saf0.push(saf[0]);
        saf1.push(saf[1]);
    }
    ensure(best_sat == 1.0, format!("best SAT {best_sat}"))?;
    ensure(
        worse.is_empty(),
        format!("max SAF dropped with psi_m=1 for seeds {worse:?}"),
    )?;
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "SAT = 1 reached; max SAF over 20 seeds: psi_m=0 >= {:.6}, psi_m=1 >= {:.6}, never lower",
        lo(&saf0),
        lo(&saf1)
    ))
}

fn grow(rng: &mut ChaCha8Rng, m: &ResourceModel, t: &GeneralAgentType) -> GeneralAgentType {
    union_types(t, &random_type(rng, m, 3))
}

fn property_suites(runs: &mut PlannerRuns) -> Check {
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let m = random_model(&mut rng, &SynthParams::default()).map_err(|e| e.to_string())?;
        let small = random_type(&mut rng, &m, 4);
        let big = grow(&mut rng, &m, &small);
        for f in functionality_names(&m) {
            let f = f.as_str();
            ensure(
                support_functionality(&m, &big, f).unwrap() >= support_functionality(&m, &small, f).unwrap()
                    && has_functionality(&m, &big, f).unwrap() >= has_functionality(&m, &small, f).unwrap()
                    && support_set(&m, &big, [f]).unwrap() >= support_set(&m, &small, [f]).unwrap(),
                format!("capability not monotone, case {seed}, {f}"),
            )?;
        }
    }

    let params = SynthParams {
        subconcept_p: false,
        ..SynthParams::default()
    };
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + seed);
        let m = random_model(&mut rng, &params).map_err(|e| e.to_string())?;
        let small = random_type(&mut rng, &m, 4);
        let types: Vec<String> = m.agent_types().map(|d| d.id.clone()).collect();
        let mut big = small.clone();
        big.add(types[rng.gen_range(0..types.len())].clone(), 1);
        for f in functionality_names(&m) {
            let a = reliability(&m, &small, [f.as_str()]).unwrap();
            let b = reliability(&m, &big, [f.as_str()]).unwrap();
            ensure(
                b >= a - 1e-12,
                format!("reliability dropped {a} -> {b}, case {seed}, {f}"),
            )?;
        }
    }

    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(30_000 + seed);
        let m = random_model(&mut rng, &SynthParams::default()).map_err(|e| e.to_string())?;
        let mut t = random_type(&mut rng, &m, 6);
        if t.is_empty() {
            t.add("T0", 1);
        }
        let all = t.instantiate().unwrap().members().clone();
        let p = m.policy(TRANSPORT_PROVIDER).ok_or("no transport policy")?;
        let pseed = rng.gen();
        let sel = eval_policy(&m, p, &all, pseed).map_err(|e| e.to_string())?;
        let inv = inverse_policy(&m, p, &all, pseed).map_err(|e| e.to_string())?;
        let union: BTreeSet<AtomicAgent> = sel.union(&inv).cloned().collect();
        ensure(
            sel.is_disjoint(&inv) && union == all,
            format!("policy split is no partition, case {seed}"),
        )?;
    }

    let m = model();
    let lunar = parse_mission(LUNAR, &m).map_err(|e| e.to_string())?;
    for (seed, psi_m, psi_im) in [(1u64, 0u32, 0u32), (2, 1, 1), (3, 2, 0)] {
        let set = plan(
            &m,
            &lunar,
            &Bounds { psi_m, psi_im },
            &Weights::default(),
            &Budget::deterministic(2, 4),
            seed,
        )
        .map_err(|e| e.to_string())?;
        check_set(&m, &lunar, &set)?;
        runs.retained += set.solutions.len();
    }

    let desk = parse_mission(DESK, &m).map_err(|e| e.to_string())?;
    let run = || {
        let set = plan(
            &m,
            &desk,
            &Bounds { psi_m: 1, psi_im: 1 },
            &Weights::default(),
            &Budget::deterministic(10, 20),
            99,
        );
        serde_json::to_string(&set.unwrap()).unwrap()
    };
    ensure(run() == run(), "library plan differs between identical runs")?;
    let cli = cli_landscape()?;
    ensure(cli == cli_landscape()?, "landscape files differ between identical runs")?;

    Ok(format!(
        "capability 500, reliability 500, policy 200 cases; {} retained candidates within capacity; byte-identical reruns",
        runs.retained
    ))
}

fn cli_landscape() -> Result<Vec<u8>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mission = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/desk_mission.yaml");
    let status = Command::new(env!("CARGO_BIN_EXE_reorg"))
        .args([
            "plan",
            "--deterministic",
            "--seed",
            "7",
            "--psi-m",
            "0,1",
            "--total-seconds",
            "20",
            "--out",
        ])
        .arg(dir.path())
        .arg("--mission")
        .arg(&mission)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        status.status.success(),
        String::from_utf8_lossy(&status.stderr).to_string(),
    )?;
    let mut bytes = Vec::new();
    for k in [0, 1] {
        bytes.extend(std::fs::read(dir.path().join(format!("landscape_psi_m{k}.csv"))).map_err(|e| e.to_string())?);
    }
    Ok(bytes)
}

fn main() {
    let mut runs = PlannerRuns { retained: 0 };
    let results: Vec<(&str, Check)> = vec![
        ("1 worked reliability example", worked_reliability()),
        ("2 Monte Carlo oracle", monte_carlo_oracle()),
        ("3 rsub table", rsub_table()),
        ("4 composite tcap", composite_tcap()),
        ("5 reconfiguration costs", reconfiguration_costs()),
        ("6 coalition structure enumeration", coalition_structures()),
        ("7 temporal consistency", temporal_consistency()),
        ("8 desk-scale planning", desk_planning(&mut runs)),
        ("9 property suites", property_suites(&mut runs)),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
