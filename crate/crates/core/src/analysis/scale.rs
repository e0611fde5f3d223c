//! Scale function of the auxiliary diffusion for `1/2 <= gamma < 1`:
//!
//! ```text
//! p(x) = int_1^x y^(-e) exp{ c (y^(2(1-gamma)) - 1) } dy,   c = b / (sigma^2 (1 - gamma))
//! ```
//!
//! with `e = gamma / sigma` for the printed drift `(gamma sigma / 2) x^(2 gamma - 1) - b x`
//! and `e = gamma` for `(gamma sigma^2 / 2) x^(2 gamma - 1) - b x`. The integral is
//! taken in `s = ln y` and in log space, so values far beyond `f64` range are
//! still reported through their logarithm.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CklsParams, Variant};
use crate::quadrature::integrate;

/// `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

const MAX_GRID: usize = 512;

pub fn scale_function_log(p: &CklsParams, x: f64, variant: Variant) -> Result<SignedLog> {
    let g = p.gamma();
    if !(0.5..1.0).contains(&g) {
        return Err(Error::Domain(format!("scale function needs 1/2 <= gamma < 1, got {g}")));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("scale function evaluated at x = {x} <= 0")));
    }
    if x == 1.0 {
        return Ok(SignedLog { sign: 0.0, ln_abs: f64::NEG_INFINITY });
    }
    let s = p.sigma();
    let power = match variant {
        Variant::Paper => g / s,
        Variant::Derived => g,
    };
    let c = p.b() / (s * s * (1.0 - g));
    let k = 2.0 * (1.0 - g);
    // log of the integrand in s = ln y, including the Jacobian y
    let h = |u: f64| (1.0 - power) * u + c * (k * u).exp_m1();

    let end = x.ln();
    let (lo, hi) = if end < 0.0 { (end, 0.0) } else { (0.0, end) };
    let width = hi - lo;
    let (peak, shift) = (0..=MAX_GRID)
        .map(|i| {
            let u = lo + width * i as f64 / MAX_GRID as f64;
            (u, h(u))
        })
        .fold((lo, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
    // the integrand can be a spike of width ~1e-5 at the peak, so split the
    // range at points clustering geometrically around it
    let mut cuts = vec![lo, hi, peak];
    for j in 1..=60 {
        let d = width * 0.5f64.powi(j);
        cuts.extend([peak - d, peak + d].into_iter().filter(|u| *u > lo && *u < hi));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let total: f64 = cuts
        .windows(2)
        .map(|w| integrate(|u| (h(u) - shift).exp(), w[0], w[1], 1e-16 * width, 1e-12).value)
        .sum();
    Ok(SignedLog { sign: end.signum(), ln_abs: shift + total.ln() })
}

/// `p(x)`; may be infinite when the value leaves `f64` range.
pub fn scale_function(p: &CklsParams, x: f64, variant: Variant) -> Result<f64> {
    scale_function_log(p, x, variant).map(|v| v.value())
}

/// Boundary behaviour of `p` sampled at `x = 10^(-2k)` and `x = 10^(2k)`, `k = 1..=4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleTrend {
    pub variant: Variant,
    pub lower_points: Vec<f64>,
    pub lower: Vec<SignedLog>,
    pub upper_points: Vec<f64>,
    pub upper: Vec<SignedLog>,
    /// `|p|` strictly increasing towards 0 with non-shrinking increments.
    pub diverges_at_zero: bool,
    /// Same towards infinity.
    pub diverges_at_infinity: bool,
}

/// Strictly increasing with non-shrinking steps (on the natural scale). A
/// convergent monotone sequence must have steps tending to zero.
fn divergence_trend(vals: &[SignedLog], expected_sign: f64) -> bool {
    if vals.iter().any(|v| v.sign != expected_sign) {
        return false;
    }
    let logs: Vec<f64> = vals.iter().map(|v| v.ln_abs).collect();
    if !logs.windows(2).all(|w| w[1] > w[0]) {
        return false;
    }
    // compare |p_{k+1}| - |p_k| across k in log space:
    // ln(e^{l2} - e^{l1}) = l2 + ln(1 - e^{l1 - l2})
    let steps: Vec<f64> = logs.windows(2).map(|w| w[1] + (-(w[0] - w[1]).exp()).ln_1p()).collect();
    steps.windows(2).all(|w| w[1] >= w[0])
}

pub fn scale_trend(p: &CklsParams, variant: Variant) -> Result<ScaleTrend> {
    let lower_points: Vec<f64> = (1..=4).map(|k| 10f64.powi(-2 * k)).collect();
    let upper_points: Vec<f64> = (1..=4).map(|k| 10f64.powi(2 * k)).collect();
    let lower = lower_points.iter().map(|&x| scale_function_log(p, x, variant)).collect::<Result<Vec<_>>>()?;
    let upper = upper_points.iter().map(|&x| scale_function_log(p, x, variant)).collect::<Result<Vec<_>>>()?;
    Ok(ScaleTrend {
        variant,
        diverges_at_zero: divergence_trend(&lower, -1.0),
        diverges_at_infinity: divergence_trend(&upper, 1.0),
        lower_points,
        lower,
        upper_points,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn low() -> CklsParams {
        CklsParams::reference_low_gamma()
    }

    #[test]
    fn vanishes_at_one() {
        for v in [Variant::Paper, Variant::Derived] {
            assert_eq!(scale_function(&low(), 1.0, v).unwrap(), 0.0);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(scale_function(&low(), 0.0, Variant::Paper).is_err());
        assert!(scale_function(&CklsParams::reference_high_gamma(), 2.0, Variant::Paper).is_err());
    }

    #[test]
    fn matches_direct_quadrature_in_y() {
        // plain Simpson in y on a moderate range, as printed
        let p = low();
        let (g, s, b) = (p.gamma(), p.sigma(), p.b());
        let c = b / (s * s * (1.0 - g));
        let integrand = |y: f64| (-c).exp() * y.powf(-g / s) * (c * y.powf(2.0 * (1.0 - g))).exp();
        let n = 20_000;
        let (a, bnd) = (1.0, 3.0);
        let h = (bnd - a) / n as f64;
        let mut acc = integrand(a) + integrand(bnd);
        for i in 1..n {
            acc += integrand(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = acc * h / 3.0;
        assert_relative_eq!(scale_function(&p, 3.0, Variant::Paper).unwrap(), oracle, max_relative = 1e-10);
    }

    #[test]
    fn strictly_increasing_on_log_grid() {
        for v in [Variant::Paper, Variant::Derived] {
            let vals: Vec<f64> =
                (0..41).map(|k| scale_function(&low(), 10f64.powf(-2.0 + 0.1 * k as f64), v).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "{v}: {vals:?}");
        }
    }

    #[test]
    fn printed_variant_diverges_at_both_ends() {
        let trend = scale_trend(&low(), Variant::Paper).unwrap();
        assert!(trend.diverges_at_zero, "{trend:?}");
        assert!(trend.diverges_at_infinity, "{trend:?}");
        assert!(trend.lower.windows(2).all(|w| w[1].value() < w[0].value()));
    }

    #[test]
    fn derived_variant_has_finite_limit_at_zero() {
        let trend = scale_trend(&low(), Variant::Derived).unwrap();
        assert!(!trend.diverges_at_zero);
        assert!(trend.diverges_at_infinity);
    }
}
