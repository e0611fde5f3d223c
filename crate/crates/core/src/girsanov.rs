//! The drift adjustment `q`, the Radon-Nikodym weight `R_t` along Euler paths,
//! and importance-sampling estimators built on it.
//!
//! Under `dQ/dP = R_t` with
//!
//! ```text
//! R_t = exp( int_0^t q(r_s) dB_s - 1/2 int_0^t q(r_s)^2 ds )
//! ```
//!
//! the process `B_t - int_0^t q(r_s) ds` is a Brownian motion, so expectations
//! under the new measure are weighted expectations of paths simulated under
//! the original one.

use serde::Serialize;

use crate::engine::{simulate, NoiseMatrix, Path, Scheme, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{CklsParams, Variant};

/// `q(x)` without argument checks.
///
/// `Paper` multiplies `a/sigma x^-gamma - gamma sigma / 2 x^(gamma-1)` by
/// `sgn(gamma - 1)`. `Derived` always uses the factor `-1`: that is the sign
/// which cancels the `a x^(1-2 gamma)` term in the Ito expansion of `f(r)` for
/// both `gamma < 1` and `gamma > 1`. The two agree for `gamma < 1`.
#[inline]
pub fn q(p: &CklsParams, rule: Variant, x: f64) -> f64 {
    let (a, s, g) = (p.a(), p.sigma(), p.gamma());
    let core = a / s * x.powf(-g) - 0.5 * g * s * x.powf(g - 1.0);
    let sign = match rule {
        Variant::Paper => (g - 1.0).signum(),
        Variant::Derived => -1.0,
    };
    sign * core
}

pub fn drift_adjustment(p: &CklsParams, rule: Variant, x: f64) -> Result<f64> {
    if p.gamma() == 1.0 {
        return Err(Error::DegenerateTransform);
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("drift adjustment evaluated at x = {x} <= 0")));
    }
    Ok(q(p, rule, x))
}

/// Drift of the rate under the new measure: `a - b x + q(x) sigma x^gamma`.
#[inline]
pub fn q_dynamics_drift(p: &CklsParams, rule: Variant, x: f64) -> f64 {
    p.drift(x) + q(p, rule, x) * p.diffusion(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPath {
    pub path: Path,
    /// `log R_t` at the end of the grid.
    pub log_weight: f64,
    /// Left-point estimate of `int_0^t q(r_s)^2 ds`.
    pub q_integral_sq: f64,
}

impl WeightedPath {
    pub fn weight(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// Left-point sums for `log R` and `int q^2 ds` along a path.
pub fn log_weight(p: &CklsParams, rule: Variant, values: &[f64], increments: &[f64], dt: f64) -> (f64, f64) {
    let mut stoch = 0.0;
    let mut qsq = 0.0;
    for (&x, &db) in values.iter().zip(increments) {
        let qx = q(p, rule, x);
        stoch += qx * db;
        qsq += qx * qx * dt;
    }
    (stoch - 0.5 * qsq, qsq)
}

pub fn accumulate_weight(p: &CklsParams, rule: Variant, path: &Path, increments: &[f64]) -> Result<WeightedPath> {
    if p.gamma() == 1.0 {
        return Err(Error::DegenerateTransform);
    }
    if path.values.len() != increments.len() + 1 {
        return Err(Error::Input(format!(
            "path has {} points but noise row has {} increments",
            path.values.len(),
            increments.len()
        )));
    }
    let (lw, qsq) = log_weight(p, rule, &path.values, increments, path.grid.dt());
    Ok(WeightedPath { path: path.clone(), log_weight: lw, q_integral_sq: qsq })
}

/// Per-path output of a weighted run: a functional value and the weight terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedSample {
    pub value: f64,
    pub log_weight: f64,
    pub q_integral_sq: f64,
}

/// Simulate the CKLS equation under the original measure, accumulate `log R`
/// along each path and evaluate `functional` on it. Paths are dropped.
pub fn simulate_weighted<F>(
    p: &CklsParams,
    rule: Variant,
    grid: &TimeGrid,
    noise: &NoiseMatrix,
    workers: usize,
    functional: F,
) -> Result<Vec<WeightedSample>>
where
    F: Fn(&Path) -> f64 + Sync + Send,
{
    if p.gamma() == 1.0 {
        return Err(Error::DegenerateTransform);
    }
    let dt = grid.dt();
    simulate(p, Scheme::Ckls, grid, noise, workers, |_, path, inc| {
        let (lw, qsq) = log_weight(p, rule, &path.values, inc, dt);
        WeightedSample { value: functional(path), log_weight: lw, q_integral_sq: qsq }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedEstimate {
    /// Self-normalised estimate `sum w phi / sum w`.
    pub estimate: f64,
    /// Delta-method standard error of the self-normalised estimate.
    pub std_error: f64,
    /// Unnormalised estimate `mean(w phi)`.
    pub raw_estimate: f64,
    pub raw_std_error: f64,
    /// `(sum w)^2 / sum w^2`.
    pub effective_sample_size: f64,
    pub n: usize,
}

/// Importance-sampling estimates from `(value, log_weight)` pairs. The
/// reduction is an ordered fold, so it is reproducible.
pub fn weighted_estimate(samples: &[WeightedSample]) -> Result<WeightedEstimate> {
    if samples.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    let n = samples.len();
    let nf = n as f64;
    let shift = samples.iter().map(|s| s.log_weight).fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::DegenerateWeights);
    }

    let (mut sw, mut sw2, mut swphi) = (0.0, 0.0, 0.0);
    for s in samples {
        let w = (s.log_weight - shift).exp();
        sw += w;
        sw2 += w * w;
        swphi += w * s.value;
    }
    if sw == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let estimate = swphi / sw;
    let mut resid = 0.0;
    for s in samples {
        let w = (s.log_weight - shift).exp();
        let d = s.value - estimate;
        resid += w * w * d * d;
    }
    let std_error = resid.sqrt() / sw;

    let mut raw_sum = 0.0;
    let mut raw_sq = 0.0;
    for s in samples {
        let y = s.log_weight.exp() * s.value;
        raw_sum += y;
        raw_sq += y * y;
    }
    let raw_estimate = raw_sum / nf;
    let raw_var = if n > 1 { (raw_sq - nf * raw_estimate * raw_estimate) / (nf - 1.0) } else { 0.0 };

    Ok(WeightedEstimate {
        estimate,
        std_error,
        raw_estimate,
        raw_std_error: (raw_var.max(0.0) / nf).sqrt(),
        effective_sample_size: sw * sw / sw2,
        n,
    })
}

pub fn weighted_expectation<F>(wpaths: &[WeightedPath], functional: F) -> Result<WeightedEstimate>
where
    F: Fn(&Path) -> f64,
{
    let samples: Vec<WeightedSample> = wpaths
        .iter()
        .map(|w| WeightedSample { value: functional(&w.path), log_weight: w.log_weight, q_integral_sq: w.q_integral_sq })
        .collect();
    weighted_estimate(&samples)
}

/// Monte Carlo estimate of `E int_0^t q(r_s)^2 ds`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NovikovEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

pub fn novikov_from_samples(samples: &[WeightedSample]) -> NovikovEstimate {
    let n = samples.len();
    let nf = n as f64;
    let mean = samples.iter().map(|s| s.q_integral_sq).sum::<f64>() / nf;
    let var = if n > 1 {
        samples.iter().map(|s| (s.q_integral_sq - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    NovikovEstimate { estimate: mean, std_error: (var / nf).sqrt(), n }
}

pub fn novikov_diagnostic(wpaths: &[WeightedPath]) -> NovikovEstimate {
    let samples: Vec<WeightedSample> = wpaths
        .iter()
        .map(|w| WeightedSample { value: 0.0, log_weight: w.log_weight, q_integral_sq: w.q_integral_sq })
        .collect();
    novikov_from_samples(&samples)
}

/// Machine-readable summary of a weighted run.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedReport {
    pub estimate: f64,
    pub std_error: f64,
    pub ess: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub params: CklsParams,
}

impl WeightedReport {
    pub fn new(est: &WeightedEstimate, seed: u64, params: CklsParams) -> Self {
        Self {
            estimate: est.estimate,
            std_error: est.std_error,
            ess: est.effective_sample_size,
            n_paths: est.n,
            seed,
            params,
        }
    }
}
