use serde::Serialize;

use crate::engine::{simulate, NoiseMatrix, Scheme, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{classify_regime, CklsParams, MomentCase};

/// `E[r_t] = a/b + (r0 - a/b) e^(-bt)`, written as `r0 + (a - b r0)(1 - e^(-bt))/b`
/// so that `b -> 0` gives `r0 + a t`.
pub fn mean_rate(p: &CklsParams, t: f64) -> f64 {
    let (a, b, r0) = (p.a(), p.b(), p.r0());
    let bt = b * t;
    let factor = if bt.abs() < 1e-12 { t * (1.0 - 0.5 * bt) } else { -(-bt).exp_m1() / b };
    r0 + (a - b * r0) * factor
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentKind {
    /// `E[r_t^(-2 gamma)]`
    NegMoment,
    /// `E[r_t^(2 (gamma - 1))]`
    FracMoment,
}

impl MomentKind {
    pub fn exponent(&self, gamma: f64) -> f64 {
        match self {
            MomentKind::NegMoment => -2.0 * gamma,
            MomentKind::FracMoment => 2.0 * (gamma - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentBound {
    pub kind: MomentKind,
    pub t: f64,
    pub bound: f64,
    pub case: MomentCase,
}

/// `Psi(t) + k int_0^t Psi(s) e^(k (t - s)) ds` for affine `Psi(s) = alpha + beta s`,
/// which collapses to `alpha e^(kt) + beta (e^(kt) - 1)/k`.
fn gronwall_affine(alpha: f64, beta: f64, k: f64, t: f64) -> f64 {
    let kt = k * t;
    let growth = if kt.abs() < 1e-12 { t * (1.0 + 0.5 * kt) } else { kt.exp_m1() / k };
    alpha * kt.exp() + beta * growth
}

/// Gronwall upper bound for `E[r_t^kappa]` under the moment hypotheses.
///
/// Case I (`1/2 <= gamma < 1`, `(2 gamma + 1) sigma^2 <= 2a`):
/// * negative moment: `Psi = r0^(-2 gamma) + gamma (2 gamma + 1) sigma^2 s`, rate `2 b gamma`;
/// * fractional moment: `Psi = r0^(2(gamma-1)) + (gamma-1)(2 gamma-3) sigma^2 s`, rate `2 b (1 - gamma)`.
///
/// Case II (`1 < gamma <= 3/2`):
/// * negative moment: same `Psi`, rate `gamma (2b + (2 gamma + 1) sigma^2)`;
/// * fractional moment: `1 + E[r_t]`.
pub fn gronwall_bound(p: &CklsParams, t: f64, kind: MomentKind) -> Result<MomentBound> {
    let (b, s, g, r0) = (p.b(), p.sigma(), p.gamma(), p.r0());
    let case = classify_regime(p).moment_case;
    let s2 = s * s;
    let neg_alpha = r0.powf(-2.0 * g);
    let neg_beta = g * (2.0 * g + 1.0) * s2;
    let bound = match (case, kind) {
        (MomentCase::CaseI, MomentKind::NegMoment) => gronwall_affine(neg_alpha, neg_beta, 2.0 * b * g, t),
        (MomentCase::CaseI, MomentKind::FracMoment) => gronwall_affine(
            r0.powf(2.0 * (g - 1.0)),
            (g - 1.0) * (2.0 * g - 3.0) * s2,
            2.0 * b * (1.0 - g),
            t,
        ),
        (MomentCase::CaseII, MomentKind::NegMoment) => {
            gronwall_affine(neg_alpha, neg_beta, g * (2.0 * b + (2.0 * g + 1.0) * s2), t)
        }
        (MomentCase::CaseII, MomentKind::FracMoment) => 1.0 + mean_rate(p, t),
        (MomentCase::None, _) => {
            return Err(Error::Regime(format!(
                "moment bounds need 1 < gamma <= 3/2, or 1/2 <= gamma < 1 with (2 gamma + 1) sigma^2 <= 2a \
                 (gamma = {g}, sigma = {s}, a = {})",
                p.a()
            )))
        }
    };
    Ok(MomentBound { kind, t, bound, case })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub exponent: f64,
    pub t: f64,
    /// Estimate of `E[r_t^kappa]`.
    pub terminal_estimate: f64,
    pub terminal_std_error: f64,
    /// Estimate of `E int_0^t r_s^kappa ds` (trapezoid rule on the grid).
    pub time_integral_estimate: f64,
    pub time_integral_std_error: f64,
    pub n_paths: usize,
    pub truncated_paths: usize,
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = if n > 1.0 { xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Euler Monte Carlo estimates of `E[r_t^kappa]` and `E int_0^t r_s^kappa ds`.
pub fn mc_moment(
    p: &CklsParams,
    exponent: f64,
    grid: &TimeGrid,
    noise: &NoiseMatrix,
    workers: usize,
) -> Result<MomentEstimate> {
    let dt = grid.dt();
    let per_path = simulate(p, Scheme::Ckls, grid, noise, workers, |_, path, _| {
        let pw: Vec<f64> = path.values.iter().map(|v| v.powf(exponent)).collect();
        let inner: f64 = pw[1..pw.len() - 1].iter().sum();
        let integral = dt * (0.5 * (pw[0] + pw[pw.len() - 1]) + inner);
        (pw[pw.len() - 1], integral, path.is_truncated())
    })?;
    let (tm, tse) = mean_and_se(per_path.iter().map(|x| x.0));
    let (im, ise) = mean_and_se(per_path.iter().map(|x| x.1));
    Ok(MomentEstimate {
        exponent,
        t: grid.t_end(),
        terminal_estimate: tm,
        terminal_std_error: tse,
        time_integral_estimate: im,
        time_integral_std_error: ise,
        n_paths: per_path.len(),
        truncated_paths: per_path.iter().filter(|x| x.2).count(),
    })
}
