use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use reorg_core::reliability::demand_profile;
use reorg_core::{
    enumerate_structures, find_feasible_structure, monte_carlo_reliability, CsgBudget, GeneralAgentType,
    ReconfigParams, ResourceModel,
};
use reorg_planner::{
    check_temporal_consistency, load_mission, plan as run_plan, Bounds, Budget, Mission, MissionDocument, Weights,
};

use crate::error::{CliError, CliResult};
use crate::report;
use crate::PlanArgs;

fn load_model(path: &Path) -> CliResult<ResourceModel> {
    let model = ResourceModel::from_path(path).map_err(|e| CliError::io(path, e))?;
    model.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// The model given on the command line, or the one the mission names
/// relative to its own directory.
fn model_for(model: Option<&Path>, mission: &Path) -> CliResult<PathBuf> {
    if let Some(m) = model {
        return Ok(m.to_path_buf());
    }
    let text = fs::read_to_string(mission).map_err(|e| CliError::io(mission, e))?;
    let doc =
        MissionDocument::from_yaml(&text).map_err(|e| CliError::Validation(format!("{}: {e}", mission.display())))?;
    let Some(name) = doc.model else {
        return Err(CliError::Validation(format!(
            "{}: model: not named by the mission; pass --model",
            mission.display()
        )));
    };
    let dir = mission.parent().unwrap_or(Path::new("."));
    Ok(dir.join(name))
}

fn load_mission_file(path: &Path, model: &ResourceModel) -> CliResult<Mission> {
    let mission = load_mission(path, model).map_err(|e| CliError::io(path, e))?;
    mission.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Splits `A,B` style arguments and checks each name is a functionality.
fn functionality_list(model: &ResourceModel, args: &[String]) -> CliResult<Vec<String>> {
    let mut out = Vec::new();
    for name in args
        .iter()
        .flat_map(|a| a.split(','))
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        if !model.is_functionality(name) {
            return Err(CliError::Validation(format!("unknown functionality '{name}'")));
        }
        out.push(name.to_string());
    }
    Ok(out)
}

fn agent_type(model: &ResourceModel, spec: &str) -> CliResult<GeneralAgentType> {
    let t: GeneralAgentType = spec.parse()?;
    if t.is_empty() {
        return Err(CliError::Validation(format!("empty agent type '{spec}'")));
    }
    for name in t.types() {
        model.agent_type(name)?;
    }
    Ok(t)
}

pub fn validate(model: Option<&Path>, mission: Option<&Path>) -> CliResult {
    let model_path = match (model, mission) {
        (_, Some(m)) => model_for(model, m)?,
        (Some(m), None) => m.to_path_buf(),
        (None, None) => {
            return Err(CliError::Validation(
                "nothing to validate: give --model or --mission".into(),
            ))
        }
    };
    let model = load_model(&model_path)?;
    println!(
        "model {}: {} agent types, {} functionalities",
        model_path.display(),
        model.agent_types().count(),
        model.functionalities().count()
    );
    let Some(path) = mission else {
        return Ok(());
    };
    let mission = load_mission_file(path, &model)?;
    let report = check_temporal_consistency(&mission);
    if !report.consistent {
        let mut msg = format!("{}: constraints: temporally inconsistent; cycle:", path.display());
        for w in &report.witness {
            msg.push_str("\n  ");
            msg.push_str(w);
        }
        return Err(CliError::Validation(msg));
    }
    println!(
        "mission {}: {} requirements, {} constraints, {} timepoints",
        mission.name.as_deref().unwrap_or("(unnamed)"),
        mission.requirements.len(),
        mission.constraints.len(),
        mission.timepoints.len()
    );
    println!("timepoint order: {}", report.order.join(" < "));
    println!("valid");
    Ok(())
}

pub fn reliability(
    model_path: &Path,
    spec: &str,
    functionalities: &[String],
    monte_carlo: Option<u64>,
    seed: u64,
) -> CliResult {
    let model = load_model(model_path)?;
    let t = agent_type(&model, spec)?;
    let fs = functionality_list(&model, functionalities)?;
    let names = || fs.iter().map(String::as_str);
    let profile = demand_profile(&model, &t, names())?;
    let r = reorg_core::reliability::reliability(&model, &t, names())?;
    println!("agent type: {t}");
    println!("functionalities: {}", fs.join(", "));
    print!("{}", report::demand_table(&profile));
    println!("R = {r:.6}");
    if r == 0.0 {
        println!("efficacy 0: the agent type does not provide every functionality");
    }
    if let Some(n) = monte_carlo {
        let (est, stderr) = monte_carlo_reliability(&model, &t, names(), n, seed)?;
        println!("monte carlo ({n} trials, seed {seed}): {est:.6} ± {stderr:.6}");
    }
    Ok(())
}

pub fn coalitions(model_path: &Path, spec: &str, functionalities: &[String], max_atoms: usize) -> CliResult {
    let model = load_model(model_path)?;
    let t = agent_type(&model, spec)?;
    let fs = functionality_list(&model, functionalities)?;
    let pool = t
        .instantiate()
        .map(|a| a.members().clone())
        .unwrap_or_else(BTreeSet::new);
    let budget = CsgBudget {
        max_atoms,
        deadline: None,
    };
    let hint = |e: reorg_core::Error| match e {
        reorg_core::Error::BudgetExceeded(m) => CliError::Budget(format!(
            "{m}; raise --max-atoms (currently {max_atoms}) to enumerate larger pools"
        )),
        e => e.into(),
    };
    let count = enumerate_structures(&model, &pool, &budget).map_err(hint)?.len();
    let refs: Vec<&str> = fs.iter().map(String::as_str).collect();
    let witness = find_feasible_structure(&model, &pool, &refs, &budget).map_err(hint)?;
    println!("pool: {t}");
    println!("functionalities: {}", fs.join(", "));
    println!("feasible coalition structures: {count}");
    match witness {
        Some(cs) => println!("witness: {cs}"),
        None => println!("witness: none"),
    }
    Ok(())
}

pub fn plan(args: &PlanArgs) -> CliResult {
    let model_path = model_for(args.model.as_deref(), &args.mission)?;
    let model = load_model(&model_path)?;
    let mut mission = load_mission_file(&args.mission, &model)?;
    if args.t_a.is_some() || args.t_b.is_some() {
        let base = mission.reconfig;
        mission.reconfig = ReconfigParams::new(args.t_a.unwrap_or(base.t_a), args.t_b.unwrap_or(base.t_b))?;
    }
    let weights = Weights::new(args.alpha, args.beta, args.epsilon)?;
    let budget = if args.deterministic {
        Budget::deterministic(args.epoch_seconds, args.total_seconds)
    } else {
        Budget::wall_clock(args.epoch_seconds, args.total_seconds)
    };
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;

    let mut values = args.psi_m.clone();
    values.sort_unstable();
    values.dedup();
    for psi_m in values {
        let bounds = Bounds {
            psi_m,
            psi_im: args.psi_im,
        };
        let set = run_plan(&model, &mission, &bounds, &weights, &budget, args.seed)?;
        let stem = format!("psi_m{psi_m}");
        let landscape = args.out.join(format!("landscape_{stem}.csv"));
        report::write_landscape(&landscape, &set)?;
        let best = args.out.join(format!("best_{stem}.txt"));
        fs::write(&best, report::best_report(&mission, &set)).map_err(|e| CliError::io(&best, e))?;
        let json = args.out.join(format!("best_{stem}.json"));
        let text = serde_json::to_string_pretty(set.best()).map_err(|e| CliError::Io(e.to_string()))?;
        fs::write(&json, text).map_err(|e| CliError::io(&json, e))?;
        let b = &set.best().score;
        println!(
            "psi_m={psi_m}: {} candidates in {} iterations; best #{} cost {:.3}, {:.3} kWh, SAT {:.3}, SAF {:.6}",
            set.solutions.len(),
            set.iterations,
            set.best().id,
            b.cost,
            b.energy_kwh,
            b.sat,
            b.saf
        );
        println!("  {}", landscape.display());
        println!("  {}", best.display());
    }
    Ok(())
}
