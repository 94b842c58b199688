use std::fmt::Write as _;
use std::path::Path;

use cbsim::fockspace::Mode;
use cbsim::generators::Preparation;
use cbsim::noise::{calibrate_motional_dephasing, paper_coherence_data, CoherenceData};
use cbsim::protocols::{
    fit_wigner_mixture, fredkin_table, generate_noon, noon_direct, noon_tomography, overlap_matrix,
    reconstruct_coherent, swap_test, uniform_phases, wigner_scan, RunOptions, WignerSample,
};
use cbsim::seqlang::{execute, parse_bytes};
use cbsim::{ExperimentResult, NoiseParams, ShotPlan, C64};

use crate::args::Command;
use crate::config::{load_named_profile, RunConfig};
use crate::CliError;

/// Result of one subcommand plus any extra files to write.
pub struct Outcome {
    pub result: ExperimentResult,
    pub extra: Vec<(&'static str, String)>,
}

fn options(config: &RunConfig) -> RunOptions {
    RunOptions {
        noise: config.noise.clone(),
        plan: config.plan,
        echo: config.echo,
        xi: config.xi,
        cutoff: config.cutoffs.as_ref().map(|c| c[0]),
    }
}

pub fn run(command: &Command, config: &mut RunConfig) -> Result<Outcome, CliError> {
    let opts = options(config);
    let result = match command {
        Command::Fredkin => fredkin_table(&opts)?.to_experiment_result(&opts),
        Command::Swaptest { psi, m, phases } => {
            swap_test(psi, *m, &uniform_phases(*phases), &opts)?.to_experiment_result(&opts)
        }
        Command::Overlap { n_max } => overlap_matrix(*n_max, &opts)?.to_experiment_result(&opts),
        Command::Coherent { alpha, n_max } => {
            reconstruct_coherent(*alpha, *n_max, &opts)?.to_experiment_result(&opts)
        }
        Command::Wigner {
            fock,
            psi,
            alphas,
            angle,
            fit_n_max,
        } => {
            let prep = match (fock, psi) {
                (Some(n), _) => Preparation::fock(*n),
                (None, Some(p)) => p.clone(),
                (None, None) => Preparation::fock(0),
            };
            let dir = C64::from_polar(1.0, *angle);
            let grid: Vec<C64> = alphas.points().into_iter().map(|r| dir * r).collect();
            let scan = wigner_scan(&prep, &grid, &opts)?;
            let mut r = scan.to_experiment_result(&opts);
            if let Some(n_max) = fit_n_max {
                let samples: Vec<WignerSample> = scan
                    .alphas
                    .iter()
                    .zip(&scan.w)
                    .zip(&scan.std_errors)
                    .map(|((&alpha, &w), &sigma)| WignerSample { alpha, w, sigma })
                    .collect();
                let fit = fit_wigner_mixture(&samples, *n_max)?;
                for (n, (w, se)) in fit.weights.iter().zip(&fit.std_errors).enumerate() {
                    r.derive(&format!("weight_{n}"), *w, Some(*se));
                }
                r.derive("chi2", fit.chi2, None);
            }
            r
        }
        Command::Noon { n, direct } => {
            if *direct {
                let state = generate_noon(*n, &opts, None)?;
                let m = noon_direct(&state)?;
                let mut r = ExperimentResult::new("noon", opts.plan, &["n", "fidelity", "fisher"]);
                r.setting("n", n).setting("echo", opts.echo);
                r.push_row(vec![*n as f64, m.fidelity, m.fisher]);
                r.derive("fidelity", m.fidelity, None)
                    .derive("fisher", m.fisher, None)
                    .derive("diagonal", m.diagonal, None)
                    .derive("offdiagonal", m.offdiagonal, None);
                r.leakage = state.state.leakage();
                r
            } else {
                noon_tomography(*n, &opts)?.to_experiment_result(&opts)
            }
        }
        Command::Run { file } => run_sequence(file, config)?,
        Command::Calibrate { data } => {
            let (result, profile) = calibrate(data.as_deref(), &config.noise, config.plan)?;
            return Ok(Outcome {
                result,
                extra: vec![("calibrated.profile", profile)],
            });
        }
    };
    Ok(Outcome {
        result,
        extra: Vec::new(),
    })
}

fn run_sequence(file: &Path, config: &mut RunConfig) -> Result<ExperimentResult, CliError> {
    let bytes = std::fs::read(file).map_err(|e| CliError::io(file, e))?;
    let program = parse_bytes(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    let h = &program.header;
    if config.noise_profile.is_none() {
        if let Some(name) = &h.noise {
            let beside = file.with_file_name(format!("{name}.profile"));
            config.noise = if beside.exists() {
                load_named_profile(&beside.to_string_lossy())?
            } else {
                load_named_profile(name)?
            };
            config.noise_profile = Some(name.clone());
        }
    }
    if let Some(seed) = h.seed {
        if !config.seed_from_cli {
            config.seed = seed;
        }
    }
    if !config.plan_from_cli {
        let header_plan = program.shot_plan();
        config.plan = ShotPlan {
            seed: config.seed,
            ..header_plan
        };
    } else {
        config.plan.seed = config.seed;
    }
    config.cutoffs = h.cutoffs.clone();
    config.xi = h.xi.unwrap_or(config.xi);
    config.echo = h.echo_dephasing.unwrap_or(false);
    let mut r = execute(&program, &config.noise, &config.plan)
        .map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    r.plan = config.plan;
    Ok(r)
}

/// Reads `mode n time_s` lines.
fn read_coherence(path: &Path) -> Result<CoherenceData, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut data: CoherenceData = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CliError::Input(format!("{} line {}: expected `mode n time_s`, got '{line}'", path.display(), k + 1));
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [m, n, t] = parts[..] else { return Err(bad()) };
        let mode = match m {
            "a" => Mode::A,
            "b" => Mode::B,
            _ => return Err(bad()),
        };
        let n: usize = n.parse().map_err(|_| bad())?;
        let t: f64 = t.parse().map_err(|_| bad())?;
        match data.iter_mut().find(|(dm, _)| *dm == mode) {
            Some((_, pairs)) => pairs.push((n, t)),
            None => data.push((mode, vec![(n, t)])),
        }
    }
    Ok(data)
}

fn calibrate(path: Option<&Path>, base: &NoiseParams, plan: ShotPlan) -> Result<(ExperimentResult, String), CliError> {
    let data = match path {
        Some(p) => read_coherence(p)?,
        None => paper_coherence_data(),
    };
    let fits = calibrate_motional_dephasing(&data)?;
    let mut r = ExperimentResult::new("calibrate", plan, &["mode", "n", "measured_time", "predicted_time"]);
    for (mode, pairs) in &data {
        let fit = &fits[mode];
        for &(n, t) in pairs {
            r.push_row(vec![mode.index() as f64, n as f64, t, fit.predicted_time(n)]);
        }
    }
    let mut profile = base.clone();
    for (mode, fit) in &fits {
        r.derive(&format!("gamma_{mode}"), fit.gamma, None)
            .derive(&format!("rms_residual_{mode}"), fit.rms_residual, None);
        match mode {
            Mode::A => profile.deph_mode_a = fit.gamma,
            Mode::B => profile.deph_mode_b = fit.gamma,
            Mode::C => {}
        }
    }
    Ok((r, profile.to_profile_string()))
}

/// One line per derived value, sorted by key.
pub fn summary(result: &ExperimentResult) -> String {
    let mut out = String::new();
    for (k, v) in &result.derived {
        match result.derived_se.get(k) {
            Some(se) if *se > 0.0 => {
                let _ = writeln!(out, "{k} = {v} ± {se}");
            }
            _ => {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
    }
    if result.leakage > 1e-6 {
        let _ = writeln!(out, "warning: truncation leakage {:.2e}", result.leakage);
    }
    out
}
