use std::path::{Path, PathBuf};

use cbsim::{ExperimentResult, NoiseParams, ShotPlan};
use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Common};
use crate::CliError;

/// Everything needed to replay a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub schema_version: u32,
    pub subcommand: String,
    pub args: Value,
    pub cutoffs: Option<Vec<usize>>,
    /// Profile path or built-in name; absent for noiseless runs.
    pub noise_profile: Option<String>,
    pub noise: NoiseParams,
    pub plan: ShotPlan,
    pub echo: bool,
    pub xi: f64,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    #[serde(skip)]
    pub seed_from_cli: bool,
    #[serde(skip)]
    pub plan_from_cli: bool,
}

impl RunConfig {
    pub fn resolve(common: &Common, command: &Command) -> Result<Self, CliError> {
        let noise = match &common.noise {
            Some(p) if !common.noiseless => load_named_profile(p)?,
            _ => NoiseParams::noiseless(),
        };
        let seed = common.seed.unwrap_or_else(rand::random);
        let plan = match common.shots {
            Some(shots) => ShotPlan::sampled(shots, seed),
            None => ShotPlan {
                seed,
                ..ShotPlan::exact()
            },
        };
        plan.validate()?;
        Ok(RunConfig {
            schema_version: cbsim::protocols::SCHEMA_VERSION,
            subcommand: command.name().to_string(),
            args: serde_json::to_value(command).unwrap_or(Value::Null),
            cutoffs: common.cutoff.map(|c| vec![c, c]),
            noise_profile: common.noise.clone().filter(|_| !common.noiseless),
            noise,
            plan,
            echo: common.echo,
            xi: common.xi.unwrap_or(cbsim::generators::DEFAULT_XI),
            out: common.out.clone(),
            seed,
            seed_from_cli: common.seed.is_some(),
            plan_from_cli: common.shots.is_some() || common.exact,
        })
    }
}

/// Reads a `key = value` noise profile. Absent keys are zero; unknown keys,
/// duplicates and malformed values are errors naming the file and line.
pub fn load_profile(path: &Path) -> Result<NoiseParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    NoiseParams::from_profile_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `paper` and `noiseless` name the built-in profiles unless a file of
/// that name exists.
pub fn load_named_profile(name: &str) -> Result<NoiseParams, CliError> {
    let path = Path::new(name);
    if !path.exists() {
        match name {
            "paper" => return Ok(NoiseParams::paper()),
            "noiseless" => return Ok(NoiseParams::noiseless()),
            _ => {}
        }
    }
    load_profile(path)
}

/// Writes result.json (with the config embedded), result.csv, config.json
/// and any extra files into the output directory.
pub fn write_outputs(
    config: &RunConfig,
    mut result: ExperimentResult,
    extra: &[(&str, String)],
) -> Result<ExperimentResult, CliError> {
    let dir = &config.out;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    result.config = serde_json::to_value(config).unwrap_or(Value::Null);
    let mut config_json = serde_json::to_string_pretty(config).unwrap_or_default();
    config_json.push('\n');
    let files = [
        ("result.json", result.to_json()?),
        ("result.csv", result.to_csv()),
        ("config.json", config_json),
    ];
    for (name, text) in files.iter().map(|(n, t)| (*n, t)).chain(extra.iter().map(|(n, t)| (*n, t))) {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(result)
}
