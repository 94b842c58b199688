use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Report Born probabilities directly.
    #[default]
    Exact,
    /// Draw a finite number of shots per setting.
    Sampled,
}

/// How each setting of a protocol is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub sampling: Sampling,
    /// Shots per setting (ignored in exact mode).
    pub shots: u64,
    pub seed: u64,
}

impl Default for ShotPlan {
    fn default() -> Self {
        ShotPlan::exact()
    }
}

/// Probability estimate for one setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Standard error; zero in exact mode.
    pub se: f64,
    /// Number of positive outcomes when sampled.
    pub count: Option<u64>,
}

impl ShotPlan {
    pub fn exact() -> Self {
        ShotPlan {
            sampling: Sampling::Exact,
            shots: 0,
            seed: 0,
        }
    }

    pub fn sampled(shots: u64, seed: u64) -> Self {
        ShotPlan {
            sampling: Sampling::Sampled,
            shots,
            seed,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.sampling == Sampling::Exact
    }

    pub fn validate(&self) -> Result<()> {
        if self.sampling == Sampling::Sampled && self.shots == 0 {
            return Err(Error::InvalidParameter(
                "sampled mode needs at least one shot".into(),
            ));
        }
        Ok(())
    }

    /// Generator for setting `stream`: independent of every other setting
    /// and of evaluation order.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Estimates a two-outcome probability `p` for setting `stream`.
    pub fn estimate(&self, p: f64, stream: u64) -> Result<Estimate> {
        let p = clamp_probability(p)?;
        match self.sampling {
            Sampling::Exact => Ok(Estimate {
                value: p,
                se: 0.0,
                count: None,
            }),
            Sampling::Sampled => {
                self.validate()?;
                let k = Binomial::new(self.shots, p)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?
                    .sample(&mut self.rng(stream));
                Ok(Estimate {
                    value: k as f64 / self.shots as f64,
                    se: binomial_se(k, self.shots),
                    count: Some(k),
                })
            }
        }
    }

    /// Multinomial counts for setting `stream`; `None` in exact mode.
    pub fn counts(&self, probabilities: &[f64], stream: u64) -> Result<Option<Vec<u64>>> {
        match self.sampling {
            Sampling::Exact => Ok(None),
            Sampling::Sampled => {
                self.validate()?;
                multinomial(probabilities, self.shots, &mut self.rng(stream)).map(Some)
            }
        }
    }
}

/// Standard error of `k/n`, regularised so that `k = 0` or `k = n` still
/// yields a positive uncertainty.
pub fn binomial_se(k: u64, n: u64) -> f64 {
    let p = (k as f64 + 0.5) / (n as f64 + 1.0);
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Rounds tiny excursions outside `[0, 1]` from floating-point error.
pub(crate) fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || !(-1e-9..=1.0 + 1e-9).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Multinomial draw of `shots` over `probabilities`, reproducible per seed.
pub fn sample_counts(probabilities: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    multinomial(probabilities, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn multinomial(probabilities: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative probability {p}")));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    let mut counts = vec![0; probabilities.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (i, &p) in probabilities.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == probabilities.len() {
            counts[i] = remaining;
            break;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(counts)
}
