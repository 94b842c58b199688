use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::least_squares;
use crate::{Error, Result, C64};

/// `offset + amplitude·cos(harmonic·x − phase)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset_se: f64,
    pub amplitude_se: f64,
    pub phase_se: f64,
}

impl SinusoidFit {
    /// Full peak-to-peak swing relative to a unit probability range:
    /// `P = ½(1 ± C cos φ)` gives `C = 2·amplitude`.
    pub fn contrast(&self) -> f64 {
        2.0 * self.amplitude
    }

    pub fn contrast_se(&self) -> f64 {
        2.0 * self.amplitude_se
    }

    pub fn eval(&self, x: f64, harmonic: f64) -> f64 {
        self.offset + self.amplitude * (harmonic * x - self.phase).cos()
    }
}

/// Least-squares fit of `A + B cos(hx − φ₀)` with free offset, amplitude and
/// phase. `errors`, if given and positive, weight the points; otherwise
/// all points count equally and the standard errors come from the residual
/// scatter.
pub fn fit_sinusoid(
    xs: &[f64],
    ys: &[f64],
    errors: Option<&[f64]>,
    harmonic: f64,
) -> Result<SinusoidFit> {
    if xs.len() != ys.len() || errors.is_some_and(|e| e.len() != xs.len()) {
        return Err(Error::Fit("input lengths differ".into()));
    }
    if xs.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points, got {}",
            xs.len()
        )));
    }
    let weights = point_weights(errors);
    let n = xs.len();
    let w = |i: usize| weights.as_ref().map_or(1.0, |w| w[i]);
    let a = DMatrix::from_fn(n, 3, |i, j| {
        let x = harmonic * xs[i];
        w(i) * [1.0, x.cos(), x.sin()][j]
    });
    let b = DVector::from_fn(n, |i, _| w(i) * ys[i]);
    let (p, mut cov) =
        least_squares(&a, &b).ok_or_else(|| Error::Fit("rank-deficient design matrix".into()))?;
    if weights.is_none() {
        let dof = n.saturating_sub(3).max(1) as f64;
        let rss = (&a * &p - &b).norm_squared();
        cov *= rss / dof;
    }
    let (c, s) = (p[1], p[2]);
    let amplitude = c.hypot(s);
    let phase = s.atan2(c);
    // Delta method for (c, s) ↦ (amplitude, phase).
    let (amplitude_se, phase_se) = if amplitude > 0.0 {
        let ga = [c / amplitude, s / amplitude];
        let gp = [-s / (amplitude * amplitude), c / (amplitude * amplitude)];
        let quad = |g: [f64; 2]| {
            (g[0] * g[0] * cov[(1, 1)]
                + 2.0 * g[0] * g[1] * cov[(1, 2)]
                + g[1] * g[1] * cov[(2, 2)])
                .max(0.0)
                .sqrt()
        };
        (quad(ga), quad(gp))
    } else {
        (
            ((cov[(1, 1)] + cov[(2, 2)]) / 2.0).max(0.0).sqrt(),
            f64::INFINITY,
        )
    };
    Ok(SinusoidFit {
        offset: p[0],
        amplitude,
        phase,
        offset_se: cov[(0, 0)].max(0.0).sqrt(),
        amplitude_se,
        phase_se,
    })
}

/// `1/σ` per point, or `None` for an unweighted fit. Non-positive errors
/// are floored at the smallest positive one.
fn point_weights(errors: Option<&[f64]>) -> Option<Vec<f64>> {
    let errors = errors?;
    let floor = errors
        .iter()
        .copied()
        .filter(|e| *e > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !floor.is_finite() {
        return None;
    }
    Some(
        errors
            .iter()
            .map(|&e| 1.0 / if e > 0.0 { e } else { floor })
            .collect(),
    )
}

/// Truncated-Poisson maximum-likelihood estimate of `|α|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonFit {
    pub mean: f64,
    pub mean_se: f64,
}

/// Fits `P(n) ∝ λⁿ/n!` on `n = 0..populations.len()` by maximum likelihood,
/// treating the measured populations as weights. Negative entries (possible
/// after sampling) are clipped to zero. Standard error by the delta method
/// when `errors` are given.
pub fn fit_truncated_poisson(populations: &[f64], errors: Option<&[f64]>) -> Result<PoissonFit> {
    let mean = poisson_mle(populations)?;
    let mean_se = match errors {
        Some(errs) => {
            let mut var = 0.0;
            for (k, &e) in errs.iter().enumerate() {
                if e <= 0.0 {
                    continue;
                }
                let h = 1e-6;
                let mut up = populations.to_vec();
                up[k] += h;
                let mut down = populations.to_vec();
                down[k] = (down[k] - h).max(0.0);
                let step = up[k] - down[k];
                let deriv = match (poisson_mle(&up), poisson_mle(&down)) {
                    (Ok(a), Ok(b)) => (a - b) / step,
                    _ => continue,
                };
                var += (deriv * e).powi(2);
            }
            var.sqrt()
        }
        None => 0.0,
    };
    Ok(PoissonFit { mean, mean_se })
}

fn poisson_mle(populations: &[f64]) -> Result<f64> {
    let w: Vec<f64> = populations.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Fit("all populations are zero".into()));
    }
    let n_max = w.len() - 1;
    let target = w.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / total;
    if target <= 0.0 {
        return Ok(0.0);
    }
    if n_max == 0 || target >= n_max as f64 - 1e-12 {
        return Err(Error::Fit(
            "population sits entirely at the top level; the mean is unbounded".into(),
        ));
    }
    // The truncated mean is increasing in λ, so bisect the score equation.
    let truncated_mean = |lambda: f64| {
        let mut term = 1.0;
        let (mut z, mut m) = (1.0, 0.0);
        for n in 1..=n_max {
            term *= lambda / n as f64;
            z += term;
            m += n as f64 * term;
        }
        m / z
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while truncated_mean(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Fit("Poisson fit did not converge".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if truncated_mean(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `W_n(α) = (2/π)(−1)ⁿ e^{−2|α|²} L_n(4|α|²)`.
pub fn wigner_fock_analytic(n: usize, alpha: C64) -> f64 {
    let x = 4.0 * alpha.norm_sqr();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    std::f64::consts::FRAC_2_PI * sign * (-x / 2.0).exp() * laguerre(n, x)
}

/// Laguerre polynomial by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * cur - k as f64 * prev;
        prev = cur;
        cur = next / (k + 1) as f64;
    }
    cur
}

/// One Wigner-function sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSample {
    pub alpha: C64,
    pub w: f64,
    /// Standard error; zero means "exact" (unit weight).
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub weights: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub chi2: f64,
}

/// Fits `Σ d_n W_n(α)` to `samples` with `d_n ≥ 0` and `Σ d_n = 1` by
/// weighted least squares. Every support set is tried, so the constrained
/// optimum is exact.
pub fn fit_wigner_mixture(samples: &[WignerSample], n_max: usize) -> Result<MixtureFit> {
    let k = n_max + 1;
    if samples.len() < k {
        return Err(Error::Fit(format!(
            "need at least {k} samples, got {}",
            samples.len()
        )));
    }
    if n_max > 16 {
        return Err(Error::Fit("mixture fit supports n_max ≤ 16".into()));
    }
    if samples.iter().all(|s| s.w.abs() < 1e-15) {
        return Err(Error::Fit(
            "all Wigner samples vanish; no mixture is consistent".into(),
        ));
    }
    let sigmas: Vec<f64> = samples.iter().map(|s| s.sigma).collect();
    let weights = point_weights(Some(&sigmas));
    let wt = |i: usize| weights.as_ref().map_or(1.0, |w| w[i]);
    let a = DMatrix::from_fn(samples.len(), k, |i, n| {
        wt(i) * wigner_fock_analytic(n, samples[i].alpha)
    });
    let b = DVector::from_fn(samples.len(), |i, _| wt(i) * samples[i].w);

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for mask in 1u32..(1 << k) {
        let support: Vec<usize> = (0..k).filter(|n| mask & (1 << n) != 0).collect();
        let Some((d, cov)) = constrained_solve(&a, &b, &support) else {
            continue;
        };
        if d.iter().any(|&x| x < -1e-12) {
            continue;
        }
        let mut full = vec![0.0; k];
        let mut se = vec![0.0; k];
        for (i, &n) in support.iter().enumerate() {
            full[n] = d[i].max(0.0);
            se[n] = cov[(i, i)].max(0.0).sqrt();
        }
        let resid = &b - &a * DVector::from_vec(full.clone());
        let chi2 = resid.norm_squared();
        if best.as_ref().is_none_or(|(c, _, _)| chi2 < *c - 1e-15) {
            best = Some((chi2, full, se));
        }
    }
    let (chi2, weights, std_errors) =
        best.ok_or_else(|| Error::Fit("no feasible mixture".into()))?;
    Ok(MixtureFit {
        weights,
        std_errors,
        chi2,
    })
}

/// `min ‖A_S d − b‖²` subject to `Σ d = 1`, returning `d` and its
/// covariance `P − P1(1ᵀP1)⁻¹1ᵀP` with `P = (A_SᵀA_S)⁻¹`.
fn constrained_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    support: &[usize],
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let m = support.len();
    let sub = DMatrix::from_fn(a.nrows(), m, |i, j| a[(i, support[j])]);
    let gram = sub.transpose() * &sub;
    let p = gram.clone().try_inverse()?;
    let smax = gram.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if !p.iter().all(|x| x.is_finite())
        || p.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) * smax > 1e12
    {
        return None;
    }
    let ones = DVector::from_element(m, 1.0);
    let unconstrained = &p * (sub.transpose() * b);
    let p1 = &p * &ones;
    let denom = ones.dot(&p1);
    let d = &unconstrained + &p1 * ((1.0 - ones.dot(&unconstrained)) / denom);
    let cov = &p - &p1 * p1.transpose() / denom;
    Some((d, cov))
}

/// Populations at known Rabi frequencies extracted from `P(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiFit {
    pub frequencies: Vec<f64>,
    pub populations: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub offset: f64,
}

/// Least squares of `P(t) = c − ½ Σ_k p_k cos(ω_k t)` at the given
/// frequencies (plus the free static term `c`). Frequencies must be
/// resolvable on the grid: the smallest separation times the span must
/// reach 2π, and the span must cover at least three periods of the
/// slowest one.
pub fn fit_rabi_populations(
    times: &[f64],
    pe: &[f64],
    errors: Option<&[f64]>,
    frequencies: &[f64],
) -> Result<RabiFit> {
    if times.len() != pe.len() {
        return Err(Error::Fit("input lengths differ".into()));
    }
    if frequencies.is_empty() {
        return Err(Error::Fit("no frequencies to fit".into()));
    }
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = t_max - t_min;
    let mut sorted = frequencies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let slowest = sorted[0];
    if !(slowest > 0.0) {
        return Err(Error::Fit("frequencies must be positive".into()));
    }
    let min_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap <= 0.0 {
        return Err(Error::Unresolvable("duplicate frequencies".into()));
    }
    if span * slowest < 3.0 * 2.0 * std::f64::consts::PI {
        return Err(Error::Unresolvable(format!(
            "time grid spans {span:e} s, less than three periods of the slowest frequency"
        )));
    }
    if min_gap.is_finite() && span * min_gap < 2.0 * std::f64::consts::PI {
        return Err(Error::Unresolvable(format!(
            "time grid spans {span:e} s but the closest frequencies differ by {min_gap:e} rad/s"
        )));
    }
    let k = frequencies.len();
    if times.len() < k + 1 {
        return Err(Error::Fit("not enough time points".into()));
    }
    let weights = point_weights(errors);
    let wt = |i: usize| weights.as_ref().map_or(1.0, |w| w[i]);
    let a = DMatrix::from_fn(times.len(), k + 1, |i, j| {
        wt(i)
            * if j == 0 {
                1.0
            } else {
                -0.5 * (frequencies[j - 1] * times[i]).cos()
            }
    });
    let b = DVector::from_fn(times.len(), |i, _| wt(i) * pe[i]);
    let (x, mut cov) =
        least_squares(&a, &b).ok_or_else(|| Error::Fit("rank-deficient design matrix".into()))?;
    if weights.is_none() {
        let dof = times.len().saturating_sub(k + 1).max(1) as f64;
        cov *= (&a * &x - &b).norm_squared() / dof;
    }
    Ok(RabiFit {
        frequencies: frequencies.to_vec(),
        populations: x.iter().skip(1).copied().collect(),
        std_errors: (1..=k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect(),
        offset: x[0],
    })
}
