//! Non-central chi-square law and the exact time-t distributions of the CIR
//! image `Y_t` and of the rate `r_t` under the new measure.
//!
//! `sqrt(Y_t)` is Gaussian with mean `m = sqrt(Y_0) e^(kappa t)` and variance
//! `v = vol^2/4 * (e^(2 kappa t) - 1) / (2 kappa)`, so `Y_t / L` with `L = v`
//! is non-central chi-square with one degree of freedom and non-centrality
//! `zeta = m^2 / L`.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CirParams, Transform, Variant};
use crate::special::{gamma_p, ln_gamma};

/// Below this `|2 kappa t|` the variance factor switches to its Taylor series.
const SERIES_SWITCH: f64 = 1e-8;

/// `int_0^t e^(2 kappa (t - s)) ds = (e^(2 kappa t) - 1) / (2 kappa)`.
pub fn ou_variance_factor(kappa: f64, t: f64) -> f64 {
    let x = 2.0 * kappa * t;
    if x.abs() < SERIES_SWITCH {
        t * (1.0 + 0.5 * x + x * x / 6.0)
    } else {
        x.exp_m1() / (2.0 * kappa)
    }
}

/// Scale, degrees of freedom and non-centrality of `Y_t / L` at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionSpec {
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub delta: f64,
    pub zeta: f64,
    pub delta_rule: Variant,
}

impl TransitionSpec {
    /// `delta_rule = Derived` sets `delta = 4 drift_const / vol^2` (always 1
    /// here); `Paper` sets `delta = C^2`. The time argument is kept in both
    /// exponentials, so `L` is the variance of `sqrt(Y_t)`.
    pub fn new(cir: &CirParams, t: f64, delta_rule: Variant) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("transition time must be > 0, got {t}")));
        }
        let kappa = cir.ou_rate();
        let l = 0.25 * cir.vol * cir.vol * ou_variance_factor(kappa, t);
        let zeta = cir.y0 * (2.0 * kappa * t).exp() / l;
        let delta = match delta_rule {
            Variant::Derived => 4.0 * cir.drift_const / (cir.vol * cir.vol),
            Variant::Paper => cir.c * cir.c,
        };
        Ok(Self { t, l, delta, zeta, delta_rule })
    }

    pub fn chi_square(&self) -> NoncentralChiSq {
        NoncentralChiSq { delta: self.delta, zeta: self.zeta, series_tol: DEFAULT_SERIES_TOL }
    }

    /// `E[Y_t] = L (delta + zeta)`.
    pub fn mean_y(&self) -> f64 {
        self.l * (self.delta + self.zeta)
    }
}

pub fn transition_spec(cir: &CirParams, t: f64, delta_rule: Variant) -> Result<TransitionSpec> {
    TransitionSpec::new(cir, t, delta_rule)
}

pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
const MAX_TERMS: usize = 1_000_000;
const RESCALE: f64 = 1e250;

/// Non-central chi-square with `delta` degrees of freedom and non-centrality `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoncentralChiSq {
    pub delta: f64,
    pub zeta: f64,
    pub series_tol: f64,
}

impl NoncentralChiSq {
    pub fn new(delta: f64, zeta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParams(format!("delta must be > 0, got {delta}")));
        }
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidParams(format!("zeta must be >= 0, got {zeta}")));
        }
        Ok(Self { delta, zeta, series_tol: DEFAULT_SERIES_TOL })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.series_tol = tol;
        self
    }

    pub fn mean(&self) -> f64 {
        self.delta + self.zeta
    }

    pub fn variance(&self) -> f64 {
        2.0 * (self.delta + 2.0 * self.zeta)
    }

    fn lambda(&self) -> f64 {
        0.5 * self.zeta
    }

    /// Log of the `n`-th Poisson-mixture term of the density.
    fn ln_term(&self, n: usize, x: f64) -> f64 {
        let lambda = self.lambda();
        let nf = n as f64;
        let ln_w = if lambda == 0.0 {
            0.0
        } else {
            -lambda + nf * lambda.ln() - ln_gamma(nf + 1.0)
        };
        let half_k = 0.5 * self.delta + nf;
        ln_w + (half_k - 1.0) * x.ln() - 0.5 * x - half_k * std::f64::consts::LN_2 - ln_gamma(half_k)
    }

    /// Density as a Poisson mixture of central chi-square densities, summed
    /// outward from the Poisson mode until the geometric tail bound drops
    /// below `series_tol` relative to the partial sum.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        if x == 0.0 {
            return if self.delta > 2.0 {
                Ok(0.0)
            } else if self.delta == 2.0 {
                Ok(0.5 * (-self.lambda()).exp())
            } else {
                Err(Error::Domain("density diverges at 0 for delta < 2".into()))
            };
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        let lambda = self.lambda();
        let half_x = 0.5 * x;
        let half_d = 0.5 * self.delta;
        let tol = self.series_tol;
        let start = lambda.floor() as usize;

        let mut log_scale = 0.0;
        let mut sum = 1.0;

        if lambda > 0.0 {
            // upward
            let mut term = 1.0;
            let mut n = start;
            for _ in 0..MAX_TERMS {
                let r = lambda / (n as f64 + 1.0) * half_x / (half_d + n as f64);
                term *= r;
                sum += term;
                n += 1;
                if sum > RESCALE {
                    sum /= RESCALE;
                    term /= RESCALE;
                    log_scale += RESCALE.ln();
                }
                if r < 1.0 && term * r / (1.0 - r) < tol * sum {
                    break;
                }
            }
            // downward, relative to the same start term
            let mut term = (-log_scale).exp();
            let mut n = start;
            while n > 0 {
                let r = n as f64 / lambda * (half_d + n as f64 - 1.0) / half_x;
                term *= r;
                sum += term;
                n -= 1;
                if sum > RESCALE {
                    sum /= RESCALE;
                    term /= RESCALE;
                    log_scale += RESCALE.ln();
                }
                if r < 1.0 && term * r / (1.0 - r) < tol * sum {
                    break;
                }
            }
        }
        Ok((self.ln_term(start, x) + log_scale + sum.ln()).exp())
    }

    /// `P(X <= x)` as a Poisson mixture of regularized lower incomplete gammas.
    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        let lambda = self.lambda();
        let half_x = 0.5 * x;
        let half_d = 0.5 * self.delta;
        let tol = self.series_tol;
        let start = lambda.floor() as usize;
        let s0 = half_d + start as f64;

        let w0 = if lambda == 0.0 {
            1.0
        } else {
            (-lambda + start as f64 * lambda.ln() - ln_gamma(start as f64 + 1.0)).exp()
        };
        let p0 = gamma_p(s0, half_x);
        // g(s) = P(s) - P(s + 1) = (x/2)^s e^(-x/2) / Gamma(s + 1)
        let g0 = (s0 * half_x.ln() - half_x - ln_gamma(s0 + 1.0)).exp();

        let mut total = w0 * p0;

        if lambda > 0.0 {
            let (mut w, mut pn, mut g) = (w0, p0, g0);
            let mut n = start;
            for _ in 0..MAX_TERMS {
                let s = half_d + n as f64;
                pn = (pn - g).max(0.0);
                g *= half_x / (s + 1.0);
                let r = lambda / (n as f64 + 1.0);
                w *= r;
                n += 1;
                total += w * pn;
                if r < 1.0 && w * pn * r / (1.0 - r) < tol {
                    break;
                }
                if pn == 0.0 && r < 1.0 {
                    break;
                }
            }

            let (mut w, mut pn, mut g) = (w0, p0, g0);
            let mut n = start;
            while n > 0 {
                let s = half_d + n as f64;
                // g(s - 1) = g(s) s / (x/2)
                g *= s / half_x;
                pn = (pn + g).min(1.0);
                let r = n as f64 / lambda;
                w *= r;
                n -= 1;
                total += w * pn;
                if r < 1.0 && w * r / (1.0 - r) < tol {
                    break;
                }
            }
        }
        total.clamp(0.0, 1.0)
    }

    /// Draw one variate.
    ///
    /// For `delta >= 1`: `(Z + sqrt(zeta))^2` plus an independent central
    /// chi-square with `delta - 1` degrees of freedom. For `delta < 1`: a
    /// Poisson(`zeta / 2`) mixture of central chi-squares.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.delta >= 1.0 {
            let z: f64 = StandardNormal.sample(rng);
            let shifted = z + self.zeta.sqrt();
            let mut x = shifted * shifted;
            if self.delta > 1.0 {
                x += ChiSquared::new(self.delta - 1.0).expect("positive dof").sample(rng);
            }
            x
        } else {
            let n = if self.zeta > 0.0 {
                Poisson::new(self.lambda()).expect("positive rate").sample(rng)
            } else {
                0.0
            };
            ChiSquared::new(self.delta + 2.0 * n).expect("positive dof").sample(rng)
        }
    }
}

pub fn noncentral_pdf(d: &NoncentralChiSq, x: f64) -> Result<f64> {
    d.pdf(x)
}

pub fn noncentral_cdf(d: &NoncentralChiSq, x: f64) -> f64 {
    d.cdf(x)
}

pub fn noncentral_sample<R: Rng + ?Sized>(d: &NoncentralChiSq, rng: &mut R) -> f64 {
    d.sample(rng)
}

/// Density of `r_t` under the new measure: `g(f(x)/L) |f'(x)| / L`.
pub fn rate_density(tr: &Transform, spec: &TransitionSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("rate density evaluated at x = {x} <= 0")));
    }
    let y = tr.f(x) / spec.l;
    let g = match spec.chi_square().pdf(y) {
        Ok(v) => v,
        // f(x) underflowed to 0; the density is then dominated by |f'| -> 0 as well
        Err(_) => return Ok(0.0),
    };
    let out = g * tr.fprime(x).abs() / spec.l;
    Ok(if out.is_finite() { out } else { 0.0 })
}

/// Distribution function of `r_t` under the new measure. `f` is decreasing
/// for `gamma > 1`, which flips the orientation.
pub fn rate_cdf(tr: &Transform, spec: &TransitionSpec, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let y = tr.f(x) / spec.l;
    let chi = spec.chi_square();
    if tr.is_increasing() {
        chi.cdf(y)
    } else {
        1.0 - chi.cdf(y)
    }
}
