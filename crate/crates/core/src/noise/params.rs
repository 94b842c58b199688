use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::calibrate::{calibrate_motional_dephasing, paper_coherence_data};
use crate::fockspace::Mode;
use crate::{Error, Result};

/// Open-system parameters. Rates in s⁻¹, occupations dimensionless.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Heating rate of mode a, quanta/s.
    pub heat_a: f64,
    /// Heating rate of mode b, quanta/s.
    pub heat_b: f64,
    /// Spin dephasing rate `1/T₂` without echo.
    pub deph_spin: f64,
    /// Spin dephasing rate `1/T₂` for echoed sequences.
    pub deph_spin_echo: f64,
    /// Motional dephasing rate γ of mode a (number-operator jump).
    pub deph_mode_a: f64,
    /// Motional dephasing rate γ of mode b.
    pub deph_mode_b: f64,
    /// Initial thermal occupation of mode a.
    pub nbar_a: f64,
    /// Initial thermal occupation of mode b.
    pub nbar_b: f64,
    /// Probability that a spin readout is flipped.
    pub detect_err: f64,
    /// Replace the independent mode-dephasing jumps by one joint
    /// `(n̂_a − n̂_b)` jump at the mean rate.
    pub correlated_mode_dephasing: bool,
}

struct Key {
    name: &'static str,
    unit: &'static str,
    get: fn(&NoiseParams) -> f64,
    set: fn(&mut NoiseParams, f64),
}

const KEYS: &[Key] = &[
    Key {
        name: "heat_a",
        unit: "quanta/s",
        get: |p| p.heat_a,
        set: |p, v| p.heat_a = v,
    },
    Key {
        name: "heat_b",
        unit: "quanta/s",
        get: |p| p.heat_b,
        set: |p, v| p.heat_b = v,
    },
    Key {
        name: "deph_spin",
        unit: "1/s",
        get: |p| p.deph_spin,
        set: |p, v| p.deph_spin = v,
    },
    Key {
        name: "deph_spin_echo",
        unit: "1/s",
        get: |p| p.deph_spin_echo,
        set: |p, v| p.deph_spin_echo = v,
    },
    Key {
        name: "deph_mode_a",
        unit: "1/s",
        get: |p| p.deph_mode_a,
        set: |p, v| p.deph_mode_a = v,
    },
    Key {
        name: "deph_mode_b",
        unit: "1/s",
        get: |p| p.deph_mode_b,
        set: |p, v| p.deph_mode_b = v,
    },
    Key {
        name: "nbar_a",
        unit: "quanta",
        get: |p| p.nbar_a,
        set: |p, v| p.nbar_a = v,
    },
    Key {
        name: "nbar_b",
        unit: "quanta",
        get: |p| p.nbar_b,
        set: |p, v| p.nbar_b = v,
    },
    Key {
        name: "detect_err",
        unit: "probability",
        get: |p| p.detect_err,
        set: |p, v| p.detect_err = v,
    },
];

const CORRELATED: &str = "correlated_mode_dephasing";

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Figures measured on the experiment: heating rates, spin coherence
    /// (1.7 ms plain, 7 ms echoed), sideband-cooled occupations, and
    /// motional dephasing fitted to the (0,1) and (0,2) coherence times.
    pub fn paper() -> Self {
        let fit =
            calibrate_motional_dephasing(&paper_coherence_data()).expect("static calibration data");
        NoiseParams {
            heat_a: 19.9,
            heat_b: 44.0,
            deph_spin: 1.0 / 1.7e-3,
            deph_spin_echo: 1.0 / 7.0e-3,
            deph_mode_a: fit[&Mode::A].gamma,
            deph_mode_b: fit[&Mode::B].gamma,
            nbar_a: 0.004,
            nbar_b: 0.011,
            detect_err: 0.0,
            correlated_mode_dephasing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for key in KEYS {
            let v = (key.get)(self);
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{} must be a finite non-negative number, got {v}",
                    key.name
                )));
            }
        }
        if self.detect_err > 0.5 {
            return Err(Error::InvalidParameter(format!(
                "detect_err must lie in [0, 0.5], got {}",
                self.detect_err
            )));
        }
        Ok(())
    }

    /// Parameters seen by an echoed sequence: the echoed spin dephasing
    /// rate replaces the plain one.
    pub fn for_echo(&self) -> Self {
        NoiseParams {
            deph_spin: self.deph_spin_echo,
            ..self.clone()
        }
    }

    /// True if no dissipative process is active during evolution.
    pub fn is_unitary(&self) -> bool {
        self.heat_a == 0.0
            && self.heat_b == 0.0
            && self.deph_spin == 0.0
            && self.deph_mode_a == 0.0
            && self.deph_mode_b == 0.0
    }

    /// True if every parameter (including preparation and readout) is zero.
    pub fn is_noiseless(&self) -> bool {
        self.is_unitary()
            && self.deph_spin_echo == 0.0
            && self.nbar_a == 0.0
            && self.nbar_b == 0.0
            && self.detect_err == 0.0
    }

    pub fn nbar(&self, mode: Mode) -> f64 {
        match mode {
            Mode::A => self.nbar_a,
            Mode::B => self.nbar_b,
            Mode::C => 0.0,
        }
    }

    pub fn heating(&self, mode: Mode) -> f64 {
        match mode {
            Mode::A => self.heat_a,
            Mode::B => self.heat_b,
            Mode::C => 0.0,
        }
    }

    pub fn mode_dephasing(&self, mode: Mode) -> f64 {
        match mode {
            Mode::A => self.deph_mode_a,
            Mode::B => self.deph_mode_b,
            Mode::C => 0.0,
        }
    }

    /// Multiplies every heating rate by `factor`.
    pub fn scale_heating(&self, factor: f64) -> Self {
        NoiseParams {
            heat_a: self.heat_a * factor,
            heat_b: self.heat_b * factor,
            ..self.clone()
        }
    }

    /// Parses `key = value` lines; `#` starts a comment. Unknown or
    /// repeated keys are errors, absent keys default to zero.
    pub fn from_profile_str(text: &str) -> Result<Self> {
        let mut params = NoiseParams::default();
        let mut seen = BTreeSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Profile { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("missing value for '{key}'")));
            }
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key '{key}'")));
            }
            if key == CORRELATED {
                params.correlated_mode_dephasing = match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(err(format!("malformed boolean '{value}' for '{key}'"))),
                };
                continue;
            }
            let spec = KEYS
                .iter()
                .find(|s| s.name == key)
                .ok_or_else(|| err(format!("unknown key '{key}'")))?;
            let v: f64 = value
                .parse()
                .map_err(|_| err(format!("malformed number '{value}' for '{key}'")))?;
            (spec.set)(&mut params, v);
        }
        params.validate().map_err(|e| Error::Profile {
            line: 0,
            message: e.to_string(),
        })?;
        Ok(params)
    }

    /// Canonical profile text; round-trips through
    /// [`from_profile_str`](Self::from_profile_str).
    pub fn to_profile_string(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{} = {}  # {}", key.name, (key.get)(self), key.unit);
        }
        let _ = writeln!(out, "{CORRELATED} = {}", self.correlated_mode_dephasing);
        out
    }
}
