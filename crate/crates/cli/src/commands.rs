use std::fs;
use std::path::Path;

use boltzmann_fourier::charfn::{
    example_initial_datum, k_alpha_distance, AnalyticCharFn, CharGrid, CharRef,
};
use boltzmann_fourier::collision::{split_i1_i2_i3, QuadratureSettings, SphereQuadrature};
use boltzmann_fourier::diagnostics::{coercivity_margin, smoothing_trace, SmoothingWeight};
use boltzmann_fourier::evolve::{
    cutoff_continuation, evolve, load_states, save_trajectory, stability_experiment, EvolveConfig, Trajectory,
};
use boltzmann_fourier::kernel::{AngularKernel, MomentTable, ScalarRule};
use serde_json::json;

use crate::config::{read_measure, RunConfig};
use crate::{
    CliError, Command, EvolveArgs, ExampleArgs, MomentsArgs, ProbeArgs, SmoothingArgs, StabilityArgs, SweepArgs,
    TrajectoryArgs,
};

const MOMENT_TOL: f64 = 1e-8;
const ORIGIN_TOL: f64 = 1e-12;
const MODULUS_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;

pub fn dispatch(command: Command, oracle: bool) -> Result<(), CliError> {
    match command {
        Command::Moments(a) => moments(a, oracle),
        Command::Probe(a) => probe(a, oracle),
        Command::Evolve(a) => run_evolve(a, oracle),
        Command::Stability(a) => stability(a, oracle),
        Command::CutoffSweep(a) => sweep(a, oracle),
        Command::Coercivity(a) => coercivity(a),
        Command::Smoothing(a) => smoothing(a),
        Command::Example(a) => example(a, oracle),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rule(oracle: bool) -> ScalarRule {
    if oracle {
        ScalarRule::default().doubled()
    } else {
        ScalarRule::default()
    }
}

fn evolve_config(path: &Path, oracle: bool) -> Result<(RunConfig, EvolveConfig), CliError> {
    let run = RunConfig::read(path)?;
    let cfg = run.evolve();
    Ok((run, if oracle { cfg.doubled() } else { cfg }))
}

fn moments(a: MomentsArgs, oracle: bool) -> Result<(), CliError> {
    let s_values = match a.s {
        Some(s) => vec![s],
        None => vec![0.5, 1.0, 2.0, 4.0],
    };
    let table = MomentTable::build(&s_values, &a.alpha_list, rule(oracle))?;
    let mut eps_rows = Vec::new();
    for &s in &s_values {
        let kernel = AngularKernel::new(s, 1.0)?.with_rule(rule(oracle));
        for &eps in &a.eps_list {
            let a_eps = kernel.a_eps(eps)?;
            for &alpha in &a.alpha_list {
                eps_rows.push((s, eps, alpha, a_eps, kernel.lambda_eps_alpha(eps, alpha)?));
            }
        }
    }
    let text = if a.json {
        let eps: Vec<_> = eps_rows
            .iter()
            .map(|(s, eps, alpha, a_eps, l)| json!({"s": s, "eps": eps, "alpha": alpha, "a_eps": a_eps, "lambda_eps_alpha": l}))
            .collect();
        let mut v = serde_json::to_string_pretty(&json!({"moments": table.entries, "eps": eps})).map_err(boltzmann_fourier::Error::from)?;
        v.push('\n');
        v
    } else {
        let mut v = table.to_csv();
        if !eps_rows.is_empty() {
            v.push_str("\ns,eps,alpha,a_eps,lambda_eps_alpha\n");
            for (s, eps, alpha, a_eps, l) in &eps_rows {
                v.push_str(&format!("{s},{eps},{alpha},{a_eps:.17e},{l:.17e}\n"));
            }
        }
        v
    };
    emit(a.out.as_deref(), &text)?;
    let worst = table.max_rel_err();
    if worst > MOMENT_TOL {
        let row = table.entries.iter().find(|r| r.rel_err == worst).expect("worst row exists");
        return Err(CliError::Assertion(format!(
            "moment identity off by {worst:.3e} at alpha = {}, s = {} (quadrature {}, analytic {})",
            row.alpha, row.s, row.quadrature, row.analytic
        )));
    }
    Ok(())
}

fn probe(a: ProbeArgs, oracle: bool) -> Result<(), CliError> {
    let spec = match &a.init {
        Some(path) => read_measure(path)?,
        None => example_initial_datum(),
    };
    let psi = AnalyticCharFn::new(spec)?;
    let kernel = AngularKernel::new(a.s, a.strength)?.with_rule(rule(oracle));
    let settings = if oracle { QuadratureSettings::default().doubled() } else { QuadratureSettings::default() };
    let quad = SphereQuadrature::new(settings)?;
    let xi = match a.xi[..] {
        [x, y, z] => [x, y, z],
        _ => return Err(CliError::Config(format!("--xi needs three comma-separated components, got {}", a.xi.len()))),
    };
    let split = split_i1_i2_i3(&psi, xi, &kernel, a.eps, a.alpha, &quad)?;
    let mut text = serde_json::to_string_pretty(&json!({
        "split": split,
        "decomposition_defect": split.decomposition_defect(),
        "cap_defect": split.cap_defect(),
    }))
    .map_err(boltzmann_fourier::Error::from)?;
    text.push('\n');
    emit(None, &text)?;
    let defect = split.decomposition_defect().max(split.cap_defect());
    if defect > 1e-8 {
        return Err(CliError::Assertion(format!("split parts do not sum to the collision integral: defect {defect:.3e} at xi = {xi:?}")));
    }
    Ok(())
}

fn check_trajectory(traj: &Trajectory, odd: bool) -> Result<(), CliError> {
    for row in &traj.record.rows {
        if odd && row.conservation_residual > ORIGIN_TOL {
            return Err(CliError::Assertion(format!("|psi(t,0) - 1| = {:.3e} at t = {}", row.conservation_residual, row.t)));
        }
        if row.max_modulus > 1.0 + MODULUS_TOL {
            return Err(CliError::Assertion(format!("max |psi| = {:.12} at t = {}", row.max_modulus, row.t)));
        }
        if row.hermitian_defect > HERMITIAN_TOL {
            return Err(CliError::Assertion(format!("Hermitian defect {:.3e} at t = {}", row.hermitian_defect, row.t)));
        }
    }
    Ok(())
}

fn run_evolve(a: EvolveArgs, oracle: bool) -> Result<(), CliError> {
    let (_, cfg) = evolve_config(&a.config, oracle)?;
    let init = read_measure(&a.init)?;
    let traj = evolve(&init, &cfg)?;
    save_trajectory(&a.out_dir, &traj, &cfg)?;
    eprintln!("wrote {} records to {}", traj.states.len(), a.out_dir.display());
    check_trajectory(&traj, cfg.points % 2 == 1)
}

fn stability(a: StabilityArgs, oracle: bool) -> Result<(), CliError> {
    let (run, cfg) = evolve_config(&a.config, oracle)?;
    let init_a = read_measure(&a.init_a)?;
    let init_b = read_measure(&a.init_b)?;
    let report = stability_experiment(&init_a, &init_b, a.alpha, &cfg, run.stability.slack)?;
    emit(a.out.as_deref(), &report.to_csv())?;
    if !report.passed {
        return Err(CliError::Assertion(format!(
            "distance/envelope = {:.6} > 1 + {} at t = {}, xi = {:?}",
            report.worst_ratio, report.slack, report.worst_time, report.worst_xi
        )));
    }
    eprintln!("worst ratio {:.6} at t = {}", report.worst_ratio, report.worst_time);
    Ok(())
}

fn sweep(a: SweepArgs, oracle: bool) -> Result<(), CliError> {
    let (_, cfg) = evolve_config(&a.config, oracle)?;
    if cfg.schedule.is_none() {
        return Err(CliError::Config(format!("{}: kernel.schedule is required for cutoff-sweep", a.config.display())));
    }
    let init = read_measure(&a.init)?;
    let table = cutoff_continuation(&init, &cfg)?;
    let mut text = String::from("k,n_k,n_next,difference\n");
    for (k, d) in table.differences.iter().enumerate() {
        text.push_str(&format!("{k},{},{},{d:.12e}\n", table.levels[k], table.levels[k + 1]));
    }
    emit(a.out.as_deref(), &text)?;
    if !table.tail_decreasing {
        eprintln!("warning: successive differences do not decrease over the tail of the schedule (quadrature under-resolution?)");
    }
    Ok(())
}

fn recorded(dir: &Path) -> Result<Vec<(f64, CharGrid)>, CliError> {
    load_states(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))
}

fn coercivity(a: TrajectoryArgs) -> Result<(), CliError> {
    let states = recorded(&a.trajectory_dir)?;
    let refs: Vec<(f64, &CharGrid)> = states.iter().map(|(t, g)| (*t, g)).collect();
    let report = coercivity_margin(&refs)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(boltzmann_fourier::Error::from)?;
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

fn smoothing(a: SmoothingArgs) -> Result<(), CliError> {
    let states = recorded(&a.trajectory_dir)?;
    let horizon = states.last().map(|s| s.0).unwrap_or(0.0);
    let weight = SmoothingWeight::new(a.n, horizon, a.delta).map_err(|e| CliError::Config(e.to_string()))?;
    let refs: Vec<(f64, &CharGrid)> = states.iter().map(|(t, g)| (*t, g)).collect();
    let trace = smoothing_trace(&refs, &weight)?;
    let text = format!("{}# {}\n", trace.to_csv(), trace.footer());
    emit(a.out.as_deref(), &text)?;
    if !trace.valid {
        return Err(CliError::Assertion(format!("weighted trace leaves the fitted envelope (C = {})", trace.fitted_c)));
    }
    Ok(())
}

fn example(a: ExampleArgs, oracle: bool) -> Result<(), CliError> {
    let spec = example_initial_datum();
    let psi0 = AnalyticCharFn::new(spec.clone())?;
    let mut failures = Vec::new();

    let grid = CharGrid::sample(&psi0, a.radius, a.points)?;
    let c0 = coercivity_margin(&[(0.0, &grid)])?;
    let inner_bound = 1.0 / (3.0 * std::f64::consts::PI.powi(2));
    let outer_bound = 0.5 * (1.0 - (-0.5f64).exp());
    if c0.inner_min < inner_bound - 1e-6 {
        failures.push(format!("(1-|psi0|)/|xi|^2 = {} below 1/(3 pi^2)", c0.inner_min));
    }
    if c0.outer_min < outer_bound - 1e-6 {
        failures.push(format!("1-|psi0| = {} below (1-e^(-1/2))/2 for |xi| > 1", c0.outer_min));
    }
    let k2 = k_alpha_distance(CharRef::Analytic(&psi0), CharRef::Analytic(&AnalyticCharFn::one()), 2.0)?;
    if (k2.value() - 1.0 / 3.0).abs() > 1e-4 {
        failures.push(format!("||psi0 - 1||_2 = {} differs from 1/3", k2.value()));
    }

    let mut cfg = EvolveConfig::new(1.0, a.cutoff, a.radius, a.points, a.horizon);
    if oracle {
        cfg = cfg.doubled();
    }
    let traj = evolve(&spec, &cfg)?;
    if let Err(e) = check_trajectory(&traj, a.points % 2 == 1) {
        failures.push(e.to_string());
    }
    let refs: Vec<(f64, &CharGrid)> = traj.record.rows.iter().map(|r| r.t).zip(traj.states.iter()).collect();
    let coercive = coercivity_margin(&refs)?;
    if !(coercive.d_t > 0.0) {
        failures.push(format!("coercivity constant D_T = {} is not positive", coercive.d_t));
    }
    let weight = SmoothingWeight::new(4, a.horizon, 1e-2).map_err(|e| CliError::Config(e.to_string()))?;
    let trace = smoothing_trace(&refs, &weight)?;
    if !trace.valid {
        failures.push(format!("weighted trace leaves its fitted envelope (C = {})", trace.fitted_c));
    }

    let summary = json!({
        "inner_min": c0.inner_min,
        "inner_bound": inner_bound,
        "outer_min": c0.outer_min,
        "outer_bound": outer_bound,
        "knorm2_minus_one": k2.value(),
        "coercivity": coercive,
        "smoothing": trace.footer(),
        "final_knorms": traj.record.rows.last().map(|r| r.knorms.clone()),
        "failures": failures,
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(boltzmann_fourier::Error::from)?;
    text.push('\n');
    if let Some(dir) = &a.out_dir {
        save_trajectory(dir, &traj, &cfg)?;
        fs::write(dir.join("example.json"), &text).map_err(boltzmann_fourier::Error::from)?;
        fs::write(dir.join("smoothing.csv"), trace.to_csv()).map_err(boltzmann_fourier::Error::from)?;
    }
    emit(None, &text)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}
