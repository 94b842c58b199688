use std::path::PathBuf;

use cbsim::generators::Preparation;
use cbsim::C64;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Conditional beam-splitter simulator.
#[derive(Debug, Parser)]
#[command(name = "cbsim", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Noise profile (key = value file), or the built-in `paper`/`noiseless`.
    #[arg(long, global = true, conflicts_with = "noiseless")]
    pub noise: Option<String>,
    /// Run without noise (the default unless --noise is given).
    #[arg(long, global = true)]
    pub noiseless: bool,
    /// Report Born probabilities (the default).
    #[arg(long, global = true, conflicts_with = "shots")]
    pub exact: bool,
    /// Draw this many shots per setting.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    /// RNG seed; drawn from the OS when absent and always recorded.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "cbsim-out")]
    pub out: PathBuf,
    /// Use spin-echoed CBS gates.
    #[arg(long, global = true)]
    pub echo: bool,
    /// Fock cutoff for every mode (chosen per protocol when absent).
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// CBS coupling ξ in rad/s.
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    /// Also write a gnuplot script for the result.
    #[arg(long, global = true)]
    pub plot: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Fredkin truth table over the eight basis inputs.
    Fredkin,
    /// Swap test of a state against a Fock state, swept over the final phase.
    Swaptest {
        /// State on mode a: fock:N, coherent:RE[,IM], thermal:NBAR or mix:W*N+W*N.
        #[arg(long, default_value = "fock:1", value_parser = parse_psi)]
        psi: Preparation,
        /// Fock state on mode b.
        #[arg(long)]
        m: usize,
        /// Number of equally spaced phases.
        #[arg(long, default_value_t = 24)]
        phases: usize,
    },
    /// Swap-test contrast for every pair of Fock states up to n-max.
    Overlap {
        #[arg(long, default_value_t = 5)]
        n_max: usize,
    },
    /// Fock populations of a coherent state from swap tests.
    Coherent {
        #[arg(long, default_value = "1.3416407864998738", value_parser = parse_complex)]
        alpha: C64,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Displaced-parity Wigner scan of mode a.
    Wigner {
        /// Shortcut for --psi fock:N.
        #[arg(long, conflicts_with = "psi")]
        fock: Option<usize>,
        /// State on mode a (see swaptest).
        #[arg(long, value_parser = parse_psi)]
        psi: Option<Preparation>,
        /// Radial grid start:stop:count.
        #[arg(long, default_value = "0:2.5:26", value_parser = parse_grid)]
        alphas: Grid,
        /// Direction of the radial grid in the phase plane, radians.
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        /// Fit a Fock mixture up to this level to the scan.
        #[arg(long)]
        fit_n_max: Option<usize>,
    },
    /// NOON state generation and tomography.
    Noon {
        #[arg(long)]
        n: usize,
        /// Skip tomography and report metrics of the exact state.
        #[arg(long)]
        direct: bool,
    },
    /// Execute a sequence file.
    Run {
        file: PathBuf,
    },
    /// Fit motional dephasing rates to coherence times.
    Calibrate {
        /// Lines `mode n time_s`; defaults to the measured times.
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fredkin => "fredkin",
            Command::Swaptest { .. } => "swaptest",
            Command::Overlap { .. } => "overlap",
            Command::Coherent { .. } => "coherent",
            Command::Wigner { .. } => "wigner",
            Command::Noon { .. } => "noon",
            Command::Run { .. } => "run",
            Command::Calibrate { .. } => "calibrate",
        }
    }
}

/// Evenly spaced radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.start + step * k as f64).collect()
    }
}

fn number(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("malformed number '{s}'"))
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(format!("expected start:stop:count, got '{s}'"));
    };
    let count: usize = count
        .parse()
        .map_err(|_| format!("malformed point count '{count}'"))?;
    if count == 0 {
        return Err("the grid needs at least one point".into());
    }
    Ok(Grid {
        start: number(start)?,
        stop: number(stop)?,
        count,
    })
}

pub fn parse_complex(s: &str) -> Result<C64, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(C64::new(number(re)?, number(im)?)),
        None => Ok(C64::new(number(s)?, 0.0)),
    }
}

pub fn parse_psi(s: &str) -> Result<Preparation, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected kind:value, got '{s}'"))?;
    match kind {
        "fock" => value
            .parse()
            .map(Preparation::fock)
            .map_err(|_| format!("malformed Fock level '{value}'")),
        "coherent" => parse_complex(value).map(Preparation::coherent),
        "thermal" => number(value).map(Preparation::thermal),
        "mix" => {
            let parts = value
                .split('+')
                .map(|term| {
                    let (w, n) = term
                        .split_once('*')
                        .ok_or_else(|| format!("expected W*N, got '{term}'"))?;
                    let n: usize = n.parse().map_err(|_| format!("malformed Fock level '{n}'"))?;
                    Ok((number(w)?, Preparation::fock(n)))
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(Preparation::Mixture { parts })
        }
        _ => Err(format!("unknown state kind '{kind}'")),
    }
}
