//! Exact samplers under the new measure.
//!
//! `sqrt(Y_t)` is an Ornstein-Uhlenbeck process, so `Y_t` and the rate
//! `r_t = f^{-1}(Y_t)` can be drawn from a single standard normal, or followed
//! pathwise on a grid by the exact OU recursion.

use rand::Rng;

use super::noise::stream_rng;
use super::parallel::par_map;
use crate::distribution::{ou_variance_factor, TransitionSpec};
use crate::error::{Error, Result};
use crate::model::{classify_regime, CirParams, CklsParams, Variant};

/// Rate of the OU process `r^(1-gamma)` under the given sign convention.
pub fn ou_rate(p: &CklsParams, rule: Variant) -> f64 {
    match rule {
        Variant::Paper => p.b() * (1.0 - p.gamma()),
        Variant::Derived => p.b() * (p.gamma() - 1.0),
    }
}

/// Signed noise loading of `r^(1-gamma)`: `sigma |gamma - 1|` as printed,
/// `sigma (1 - gamma)` when the driving Brownian motion is followed pathwise.
fn noise_loading(p: &CklsParams, rule: Variant) -> f64 {
    match rule {
        Variant::Paper => p.sigma() * (p.gamma() - 1.0).abs(),
        Variant::Derived => p.sigma() * (1.0 - p.gamma()),
    }
}

fn check_regime(p: &CklsParams) -> Result<()> {
    if p.gamma() == 1.0 {
        return Err(Error::DegenerateTransform);
    }
    match classify_regime(p).girsanov_violation(p) {
        Some(why) => Err(Error::Regime(why)),
        None => Ok(()),
    }
}

/// Signed `sqrt(Y_t)` driven by the standard normal `z`.
pub fn exact_sqrt_y(cir: &CirParams, t: f64, z: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let kappa = cir.ou_rate();
    let mean = cir.y0.sqrt() * (kappa * t).exp();
    let sd = 0.5 * cir.vol * ou_variance_factor(kappa, t).sqrt();
    Ok(mean + cir.noise_sign() * sd * z)
}

/// `r_t = |r0^(1-gamma) e^(kappa t) + loading * G_t|^(1/(1-gamma))` where `G_t`
/// is the Gaussian `int_0^t e^(kappa (t-s)) dB_s` realised as `sd * z`. Does not
/// depend on the transform constant.
pub fn explicit_r(p: &CklsParams, rule: Variant, t: f64, z: f64) -> Result<f64> {
    check_regime(p)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let k = 1.0 - p.gamma();
    let kappa = ou_rate(p, rule);
    let base = p.r0().powf(k) * (kappa * t).exp() + noise_loading(p, rule) * ou_variance_factor(kappa, t).sqrt() * z;
    if base == 0.0 {
        return Err(Error::SingularSample);
    }
    Ok(base.abs().powf(1.0 / k))
}

/// Draw `explicit_r`, redrawing `z` on the measure-zero singular event.
pub fn sample_explicit_r<R: Rng + ?Sized>(p: &CklsParams, rule: Variant, t: f64, rng: &mut R) -> Result<f64> {
    loop {
        let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
        match explicit_r(p, rule, t, z) {
            Err(Error::SingularSample) => continue,
            other => return other,
        }
    }
}

/// `Y_t = L X` with `X` non-central chi-square from the transition spec.
pub fn sample_cir_exact<R: Rng + ?Sized>(spec: &TransitionSpec, rng: &mut R) -> f64 {
    spec.l * spec.chi_square().sample(rng)
}

/// `n` independent draws of `r_t`, draw `i` taken from stream `i` of `seed`.
pub fn explicit_r_batch(p: &CklsParams, rule: Variant, t: f64, n: usize, seed: u64, workers: usize) -> Result<Vec<f64>> {
    check_regime(p)?;
    par_map(n, workers, |i| sample_explicit_r(p, rule, t, &mut stream_rng(seed, i as u64))).into_iter().collect()
}

/// `n` independent draws of `Y_t` from the non-central chi-square law.
pub fn cir_exact_batch(spec: &TransitionSpec, n: usize, seed: u64, workers: usize) -> Vec<f64> {
    par_map(n, workers, |i| sample_cir_exact(spec, &mut stream_rng(seed, i as u64)))
}

/// Exact explicit-solution path on a uniform grid of step `dt`.
///
/// `dw` are the Brownian increments and `aux` independent standard normals,
/// one per step. Each step draws the OU stochastic integral jointly with its
/// Brownian increment, so the path is exact on the grid and consistent with
/// any scheme driven by the same (possibly aggregated) increments.
pub fn explicit_path(p: &CklsParams, rule: Variant, dt: f64, dw: &[f64], aux: &[f64]) -> Result<Vec<f64>> {
    check_regime(p)?;
    if dw.len() != aux.len() {
        return Err(Error::Input("increment and auxiliary rows differ in length".into()));
    }
    let k = 1.0 - p.gamma();
    let kappa = ou_rate(p, rule);
    let loading = noise_loading(p, rule);
    let growth = (kappa * dt).exp();
    let var_i = ou_variance_factor(kappa, dt);
    let cov = if (kappa * dt).abs() < 1e-8 { dt * (1.0 + 0.5 * kappa * dt) } else { (kappa * dt).exp_m1() / kappa };
    let beta = if dt > 0.0 { cov / dt } else { 0.0 };
    let cond_sd = if dt > 0.0 { (var_i - cov * cov / dt).max(0.0).sqrt() } else { 0.0 };

    let mut base = p.r0().powf(k);
    let mut out = Vec::with_capacity(dw.len() + 1);
    out.push(p.r0());
    for (&w, &z) in dw.iter().zip(aux) {
        let integral = beta * w + cond_sd * z;
        base = base * growth + loading * integral;
        out.push(base.abs().powf(1.0 / k));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::transition_spec;
    use crate::model::{derive_cir, make_transform};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn high() -> CklsParams {
        CklsParams::reference_high_gamma()
    }

    #[test]
    fn initial_conditions() {
        let p = high();
        let tr = make_transform(&p, 1.0).unwrap();
        let cir = derive_cir(&p, &tr, Variant::Paper).unwrap();
        for z in [-3.0, 0.0, 2.5] {
            assert_eq!(exact_sqrt_y(&cir, 0.0, z).unwrap(), cir.y0.sqrt());
            for rule in [Variant::Paper, Variant::Derived] {
                assert_relative_eq!(explicit_r(&p, rule, 0.0, z).unwrap(), p.r0(), max_relative = 1e-15);
            }
        }
        assert!(exact_sqrt_y(&cir, -1.0, 0.0).is_err());
    }

    #[test]
    fn driftless_case() {
        // b = 0: variance sigma^2 C^2 t / 4 and r_t = |r0^(-1/2) + sigma/2 sqrt(t) z|^(-2)
        let p = CklsParams::new(1.0, 0.0, 0.5, 1.5, 1.3).unwrap();
        let tr = make_transform(&p, 1.0).unwrap();
        let cir = derive_cir(&p, &tr, Variant::Paper).unwrap();
        let t = 0.8;
        let a = exact_sqrt_y(&cir, t, 1.0).unwrap() - exact_sqrt_y(&cir, t, 0.0).unwrap();
        assert_relative_eq!(a * a, 0.25 * 1.0 * t / 4.0, max_relative = 1e-14);
        let z = 0.7;
        let expected = (p.r0().powf(-0.5) + 0.25 * t.sqrt() * z).abs().powf(-2.0);
        assert_relative_eq!(explicit_r(&p, Variant::Paper, t, z).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn reference_variance() {
        let p = high();
        let tr = make_transform(&p, 1.0).unwrap();
        let cir = derive_cir(&p, &tr, Variant::Paper).unwrap();
        let sd = exact_sqrt_y(&cir, 1.0, 1.0).unwrap() - exact_sqrt_y(&cir, 1.0, 0.0).unwrap();
        assert_relative_eq!(sd * sd, 0.3125 * (1.0 - (-0.2f64).exp()), max_relative = 1e-13);
    }

    #[test]
    fn explicit_r_is_c_independent_and_matches_inverse_of_y() {
        for p in [high(), CklsParams::reference_low_gamma()] {
            for rule in [Variant::Paper, Variant::Derived] {
                for &z in &[-1.3, 0.0, 0.4, 2.2] {
                    let t = 0.6;
                    let r = explicit_r(&p, rule, t, z).unwrap();
                    for c in [1.0, 7.0] {
                        let tr = make_transform(&p, c).unwrap();
                        let cir = derive_cir(&p, &tr, rule).unwrap();
                        let s = exact_sqrt_y(&cir, t, z).unwrap();
                        assert_relative_eq!(tr.inverse(s * s).unwrap(), r, max_relative = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn singular_base_is_reported() {
        let p = high();
        let kappa = ou_rate(&p, Variant::Paper);
        let t = 1.0;
        let z = -(p.r0().powf(-0.5) * (kappa * t).exp()) / (0.25 * ou_variance_factor(kappa, t).sqrt());
        match explicit_r(&p, Variant::Paper, t, z) {
            Err(Error::SingularSample) => {}
            Ok(v) => assert!(v > 1e20),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn invalid_regime_is_rejected() {
        let p = CklsParams::new(1.0, 0.2, 1.0, 0.75, 1.0).unwrap();
        assert!(matches!(explicit_r(&p, Variant::Derived, 1.0, 0.0), Err(Error::Regime(_))));
    }

    #[test]
    fn cir_sampler_mean() {
        let p = high();
        let tr = make_transform(&p, 1.0).unwrap();
        let cir = derive_cir(&p, &tr, Variant::Derived).unwrap();
        let spec = transition_spec(&cir, 0.5, Variant::Derived).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let ys: Vec<f64> = (0..n).map(|_| sample_cir_exact(&spec, &mut rng)).collect();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - spec.mean_y()).abs() < 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn chi_square_sampler_agrees_with_squared_ou_draws() {
        use crate::analysis::ks_two_sample;
        for p in [high(), CklsParams::reference_low_gamma()] {
            let tr = make_transform(&p, p.default_c()).unwrap();
            let cir = derive_cir(&p, &tr, Variant::Derived).unwrap();
            let spec = transition_spec(&cir, 0.5, Variant::Derived).unwrap();
            let n = 100_000;
            let mut a: Vec<f64> = par_map(n, 1, |i| {
                let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut stream_rng(11, i as u64));
                exact_sqrt_y(&cir, 0.5, z).unwrap().powi(2)
            });
            let mut b = cir_exact_batch(&spec, n, 12, 1);
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            let ks = ks_two_sample(&a, &b).unwrap();
            assert!(ks.passes_1pct(), "{ks:?}");
        }
    }

    #[test]
    fn vanishing_noncentrality_gives_central_law() {
        use crate::analysis::ks_statistic;
        use crate::special::gamma_p;
        // f(r) = 1 / r here, so Y0 = 1e-12
        let p = CklsParams::new(1.0, 0.2, 0.5, 1.5, 1e12).unwrap();
        let tr = make_transform(&p, 1.0).unwrap();
        let cir = derive_cir(&p, &tr, Variant::Derived).unwrap();
        assert_relative_eq!(cir.y0, 1e-12, max_relative = 1e-12);
        let spec = transition_spec(&cir, 0.5, Variant::Derived).unwrap();
        assert!(spec.zeta < 1e-9);
        let mut ys = cir_exact_batch(&spec, 20_000, 5, 1);
        ys.sort_by(f64::total_cmp);
        let ks = ks_statistic(&ys, |y| gamma_p(0.5, 0.5 * y / spec.l), None).unwrap();
        assert!(ks.passes_1pct(), "{ks:?}");
    }

    #[test]
    fn explicit_path_with_zero_noise_is_deterministic_ou_mean() {
        let p = CklsParams::reference_low_gamma();
        let n = 16;
        let dt = 1.0 / n as f64;
        let zeros = vec![0.0; n];
        let path = explicit_path(&p, Variant::Derived, dt, &zeros, &zeros).unwrap();
        assert_relative_eq!(*path.last().unwrap(), explicit_r(&p, Variant::Derived, 1.0, 0.0).unwrap(), max_relative = 1e-12);
    }
}
