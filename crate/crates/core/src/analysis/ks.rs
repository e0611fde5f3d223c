use serde::Serialize;

use crate::error::{Error, Result};

/// Asymptotic Kolmogorov quantile at the 5% level.
pub const KS_C_05: f64 = 1.358_099;
/// Asymptotic Kolmogorov quantile at the 1% level.
pub const KS_C_01: f64 = 1.627_624;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub n: usize,
    /// Sample size entering the critical values (ESS when weighted).
    pub effective_n: f64,
    pub critical_5: f64,
    pub critical_1: f64,
}

impl KsResult {
    fn new(d: f64, n: usize, effective_n: f64) -> Self {
        let root = effective_n.sqrt();
        Self { d, n, effective_n, critical_5: KS_C_05 / root, critical_1: KS_C_01 / root }
    }

    pub fn passes_1pct(&self) -> bool {
        self.d < self.critical_1
    }

    pub fn passes_5pct(&self) -> bool {
        self.d < self.critical_5
    }
}

/// One-sample statistic `sup |F_n - F|` for sorted `samples`.
///
/// With `weights`, the empirical CDF uses normalised cumulative weights and the
/// critical values use the effective sample size `(sum w)^2 / sum w^2`. The
/// critical values are asymptotic; they are only meaningful for `n >= 10` or so.
pub fn ks_statistic<F>(samples: &[f64], cdf: F, weights: Option<&[f64]>) -> Result<KsResult>
where
    F: Fn(f64) -> f64,
{
    if samples.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    if samples.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Input("samples must be sorted ascending".into()));
    }
    let n = samples.len();
    match weights {
        None => {
            let nf = n as f64;
            let d = samples
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let f = cdf(x);
                    ((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf)
                })
                .fold(0.0, f64::max);
            Ok(KsResult::new(d, n, nf))
        }
        Some(w) => {
            if w.len() != n {
                return Err(Error::Input(format!("{} weights for {n} samples", w.len())));
            }
            if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::Input("weights must be positive and finite".into()));
            }
            let total: f64 = w.iter().sum();
            let sq: f64 = w.iter().map(|v| v * v).sum();
            let mut below = 0.0;
            let mut d: f64 = 0.0;
            for (&x, &wi) in samples.iter().zip(w) {
                let f = cdf(x);
                let above = below + wi / total;
                d = d.max(above - f).max(f - below);
                below = above;
            }
            Ok(KsResult::new(d, n, total * total / sq))
        }
    }
}

/// Two-sample statistic; `effective_n = n m / (n + m)`. Inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult::new(d, xs.len() + ys.len(), n * m / (n + m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point() {
        let r = ks_statistic(&[0.5], |x| x.clamp(0.0, 1.0), None).unwrap();
        assert_relative_eq!(r.d, 0.5);
    }

    #[test]
    fn zero_cdf_is_maximal() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_relative_eq!(ks_statistic(&xs, |_| 0.0, None).unwrap().d, 1.0);
    }

    #[test]
    fn unsorted_and_bad_weights() {
        assert!(ks_statistic(&[2.0, 1.0], |x| x, None).is_err());
        assert!(ks_statistic(&[1.0, 2.0], |x| x, Some(&[1.0])).is_err());
        assert!(ks_statistic(&[1.0, 2.0], |x| x, Some(&[1.0, 0.0])).is_err());
        assert!(ks_statistic(&[], |x| x, None).is_err());
    }

    #[test]
    fn equal_weights_match_unweighted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut xs: Vec<f64> = (0..500).map(|_| rng.random::<f64>()).collect();
        xs.sort_by(f64::total_cmp);
        let a = ks_statistic(&xs, |x| x, None).unwrap();
        let b = ks_statistic(&xs, |x| x, Some(&vec![3.0; 500])).unwrap();
        assert_relative_eq!(a.d, b.d, max_relative = 1e-12);
        assert_relative_eq!(b.effective_n, 500.0, max_relative = 1e-12);
    }

    #[test]
    fn self_test_rejection_rate() {
        // uniforms against their own CDF, 20 seeds: allow at most one rejection at 1%
        let rejections = (0..20)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut xs: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
                xs.sort_by(f64::total_cmp);
                !ks_statistic(&xs, |x| x, None).unwrap().passes_1pct()
            })
            .count();
        assert!(rejections <= 1, "{rejections} rejections");
    }

    #[test]
    fn two_sample() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).unwrap().d, 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().d, 1.0);
    }
}
