//! Euler-Maruyama discretisation of the CKLS rate and its drift-adjusted
//! companions, with a hard positivity floor.

use serde::Serialize;

use super::grid::TimeGrid;
use super::noise::NoiseMatrix;
use super::parallel::par_map;
use crate::error::{Error, Result};
use crate::girsanov::q_dynamics_drift;
use crate::model::{CklsParams, Variant};

/// Values that fall below this level are clamped to it and counted.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// A trajectory on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    /// Number of steps clamped at [`POSITIVITY_FLOOR`].
    pub truncations: usize,
}

impl Path {
    pub fn is_truncated(&self) -> bool {
        self.truncations > 0
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths have at least one point")
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Which SDE a scheme integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "scheme", content = "variant", rename_all = "snake_case")]
pub enum Scheme {
    /// The CKLS equation under the original measure.
    Ckls,
    /// The auxiliary equation whose positivity certifies the martingale property.
    ///
    /// For `gamma > 1` the drift is `2a - b x - (gamma sigma^2 / 2) x^(2 gamma - 1)`
    /// regardless of variant. For `gamma < 1`, `Paper` uses
    /// `(gamma sigma / 2) x^(2 gamma - 1) - b x` as printed and `Derived` uses
    /// `(gamma sigma^2 / 2) x^(2 gamma - 1) - b x`, the expansion of
    /// `a - b x + q(x) sigma x^gamma`.
    Auxiliary(Variant),
    /// `a - b x + q(x) sigma x^gamma` with `q` taken under the given sign convention.
    UnderQ(Variant),
}

impl Scheme {
    #[inline]
    pub fn drift(&self, p: &CklsParams, x: f64) -> f64 {
        match *self {
            Scheme::Ckls => p.drift(x),
            Scheme::Auxiliary(v) => auxiliary_drift(p, v, x),
            Scheme::UnderQ(rule) => q_dynamics_drift(p, rule, x),
        }
    }

    fn check(&self, p: &CklsParams) -> Result<()> {
        match self {
            Scheme::Ckls => Ok(()),
            _ if p.gamma() == 1.0 => Err(Error::DegenerateTransform),
            _ => Ok(()),
        }
    }
}

#[inline]
pub fn auxiliary_drift(p: &CklsParams, variant: Variant, x: f64) -> f64 {
    let (a, b, s, g) = (p.a(), p.b(), p.sigma(), p.gamma());
    let power = x.powf(2.0 * g - 1.0);
    if g > 1.0 {
        2.0 * a - b * x - 0.5 * g * s * s * power
    } else {
        let coef = match variant {
            Variant::Paper => 0.5 * g * s,
            Variant::Derived => 0.5 * g * s * s,
        };
        coef * power - b * x
    }
}

/// Integrate one path from `x0` with the given increments, writing into `out`.
/// Returns the number of floor clamps.
pub fn euler_path<D, S>(x0: f64, dt: f64, increments: &[f64], drift: D, diffusion: S, out: &mut Vec<f64>) -> usize
where
    D: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    out.clear();
    out.reserve(increments.len() + 1);
    out.push(x0);
    let mut x = x0;
    let mut clamps = 0;
    for &db in increments {
        let mut next = x + drift(x) * dt + diffusion(x) * db;
        if next < POSITIVITY_FLOOR {
            next = POSITIVITY_FLOOR;
            clamps += 1;
        }
        out.push(next);
        x = next;
    }
    clamps
}

/// Result of a batch Euler run.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerRun {
    pub paths: Vec<Path>,
    /// Total clamp events across all paths.
    pub truncations: usize,
    pub truncated_paths: usize,
}

/// Run `scheme` over every noise row and hand each path, with its increments,
/// to `visit`. Paths are not retained, so memory stays per-worker.
pub fn simulate<T, F>(
    p: &CklsParams,
    scheme: Scheme,
    grid: &TimeGrid,
    noise: &NoiseMatrix,
    workers: usize,
    visit: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Path, &[f64]) -> T + Sync + Send,
{
    scheme.check(p)?;
    if noise.n_steps() != grid.n_steps() {
        return Err(Error::Input(format!(
            "noise has {} steps but grid has {}",
            noise.n_steps(),
            grid.n_steps()
        )));
    }
    let dt = grid.dt();
    Ok(par_map(noise.n_paths(), workers, |i| {
        let inc = noise.row(i);
        let mut values = Vec::new();
        let truncations = euler_path(p.r0(), dt, &inc, |x| scheme.drift(p, x), |x| p.diffusion(x), &mut values);
        let path = Path { grid: *grid, values, truncations };
        visit(i, &path, &inc)
    }))
}

fn collect(p: &CklsParams, scheme: Scheme, grid: &TimeGrid, noise: &NoiseMatrix, workers: usize) -> Result<EulerRun> {
    let paths = simulate(p, scheme, grid, noise, workers, |_, path, _| path.clone())?;
    let truncations = paths.iter().map(|p| p.truncations).sum();
    let truncated_paths = paths.iter().filter(|p| p.is_truncated()).count();
    Ok(EulerRun { paths, truncations, truncated_paths })
}

/// Euler paths of `dr = (a - b r) dt + sigma r^gamma dB`, one per noise row.
pub fn euler_ckls(p: &CklsParams, grid: &TimeGrid, noise: &NoiseMatrix, workers: usize) -> Result<EulerRun> {
    collect(p, Scheme::Ckls, grid, noise, workers)
}

/// Euler paths of the auxiliary equation; see [`Scheme::Auxiliary`].
pub fn euler_auxiliary(
    p: &CklsParams,
    grid: &TimeGrid,
    noise: &NoiseMatrix,
    variant: Variant,
    workers: usize,
) -> Result<EulerRun> {
    collect(p, Scheme::Auxiliary(variant), grid, noise, workers)
}

/// How often the auxiliary equation runs into the positivity floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityReport {
    pub variant: Variant,
    pub dt: f64,
    pub n_paths: usize,
    pub paths_hit_floor: usize,
    pub fraction: f64,
    /// Smallest value seen on any path.
    pub min_value: f64,
    /// Mean over paths of the per-path minimum.
    pub mean_path_min: f64,
}

pub fn positivity_diagnostic(
    p: &CklsParams,
    grid: &TimeGrid,
    noise: &NoiseMatrix,
    variant: Variant,
    workers: usize,
) -> Result<PositivityReport> {
    let stats = simulate(p, Scheme::Auxiliary(variant), grid, noise, workers, |_, path, _| {
        (path.is_truncated(), path.min())
    })?;
    let n = stats.len();
    let hits = stats.iter().filter(|s| s.0).count();
    let min_value = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let mean_path_min = stats.iter().map(|s| s.1).sum::<f64>() / n.max(1) as f64;
    Ok(PositivityReport {
        variant,
        dt: grid.dt(),
        n_paths: n,
        paths_hit_floor: hits,
        fraction: hits as f64 / n.max(1) as f64,
        min_value,
        mean_path_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64, s: f64, g: f64) -> CklsParams {
        CklsParams::new(a, b, s, g, 1.0).unwrap()
    }

    #[test]
    fn zero_noise_single_step_b_zero() {
        let params = p(1.0, 0.0, 0.5, 1.5);
        let grid = TimeGrid::new(0.1, 1).unwrap();
        let run = euler_ckls(&params, &grid, &NoiseMatrix::zeros(&grid, 1), 1).unwrap();
        assert_eq!(run.paths[0].values, vec![1.0, 1.0 + 1.0 * 0.1]);
    }

    #[test]
    fn zero_noise_converges_to_ode_solution() {
        let params = p(1.0, 0.7, 0.5, 1.5);
        let exact = 1.0 / 0.7 + (1.0 - 1.0 / 0.7) * (-0.7f64).exp();
        let mut errs = Vec::new();
        for n in [64, 256, 1024, 4096] {
            let grid = TimeGrid::new(1.0, n).unwrap();
            let run = euler_ckls(&params, &grid, &NoiseMatrix::zeros(&grid, 1), 1).unwrap();
            errs.push((run.paths[0].terminal() - exact).abs());
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
        assert!(errs[3] < 1e-4);
    }

    #[test]
    fn auxiliary_drifts() {
        // gamma > 1: 2 - 1 - 0.75 = 0.25
        let params = p(1.0, 1.0, 1.0, 1.5);
        let grid = TimeGrid::new(0.01, 1).unwrap();
        for v in [Variant::Paper, Variant::Derived] {
            let run = euler_auxiliary(&params, &grid, &NoiseMatrix::zeros(&grid, 1), v, 1).unwrap();
            assert_relative_eq!(run.paths[0].values[1], 1.0 + 0.25 * 0.01, max_relative = 1e-15);
        }
        let low = p(1.0, 0.2, 0.5, 0.75);
        assert_relative_eq!(auxiliary_drift(&low, Variant::Derived, 1.0), -0.10625, max_relative = 1e-14);
        assert_relative_eq!(auxiliary_drift(&low, Variant::Paper, 1.0), -0.0125, max_relative = 1e-13);
    }

    #[test]
    fn auxiliary_rejects_gamma_one() {
        let params = p(1.0, 0.2, 0.5, 1.0);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let noise = NoiseMatrix::zeros(&grid, 1);
        assert!(euler_auxiliary(&params, &grid, &noise, Variant::Derived, 1).is_err());
        assert!(euler_ckls(&params, &grid, &noise, 1).is_ok());
    }

    #[test]
    fn auxiliary_positivity_is_rare_and_improves_with_dt() {
        for params in [CklsParams::reference_high_gamma(), CklsParams::reference_low_gamma()] {
            for v in [Variant::Paper, Variant::Derived] {
                let fraction = |steps: usize| {
                    let grid = TimeGrid::new(1.0, steps).unwrap();
                    positivity_diagnostic(&params, &grid, &NoiseMatrix::new(21, &grid, 10_000), v, 1).unwrap().fraction
                };
                let (coarse, fine) = (fraction(64), fraction(1024));
                assert!(fine < 0.01, "gamma {} {v}: {fine}", params.gamma());
                assert!(fine <= coarse, "gamma {} {v}: {coarse} -> {fine}", params.gamma());
            }
        }
    }

    #[test]
    fn floor_clamps_are_counted() {
        let mut out = Vec::new();
        let n = euler_path(1.0, 1.0, &[-10.0, 0.0], |_| 0.0, |_| 1.0, &mut out);
        assert_eq!(n, 1);
        assert_eq!(out[1], POSITIVITY_FLOOR);
    }

    #[test]
    fn grid_noise_mismatch_is_an_error() {
        let params = p(1.0, 0.2, 0.5, 1.5);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let other = TimeGrid::new(1.0, 8).unwrap();
        assert!(euler_ckls(&params, &grid, &NoiseMatrix::zeros(&other, 1), 1).is_err());
    }

    #[test]
    fn deterministic_across_workers() {
        let params = p(1.0, 0.2, 0.5, 1.5);
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let noise = NoiseMatrix::new(11, &grid, 64);
        let a = euler_ckls(&params, &grid, &noise, 1).unwrap();
        let b = euler_ckls(&params, &grid, &noise, 4).unwrap();
        assert_eq!(a, b);
    }
}
