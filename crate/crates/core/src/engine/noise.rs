//! Reproducible Gaussian increments with one substream per path.
//!
//! Path `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so adding paths
//! never changes the draws of earlier ones, and rows can be generated in any
//! order on any worker.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::TimeGrid;

const AUX_STREAM: u64 = 1 << 63;

/// ChaCha8 keyed by `seed` on stream `index`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Brownian increments `dB_k ~ N(0, dt)` for `n_paths` rows of `n_steps` each.
///
/// Rows are produced on demand rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMatrix {
    seed: u64,
    n_steps: usize,
    n_paths: usize,
    sqrt_dt: f64,
    zero: bool,
}

impl NoiseMatrix {
    pub fn new(seed: u64, grid: &TimeGrid, n_paths: usize) -> Self {
        Self { seed, n_steps: grid.n_steps(), n_paths, sqrt_dt: grid.dt().sqrt(), zero: false }
    }

    /// All increments identically zero.
    pub fn zeros(grid: &TimeGrid, n_paths: usize) -> Self {
        Self { zero: true, ..Self::new(0, grid, n_paths) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Random source dedicated to path `index`.
    pub fn path_rng(&self, index: usize) -> ChaCha8Rng {
        stream_rng(self.seed, index as u64)
    }

    /// Second independent source for path `index`, disjoint from [`Self::path_rng`].
    pub fn aux_rng(&self, index: usize) -> ChaCha8Rng {
        stream_rng(self.seed, index as u64 | AUX_STREAM)
    }

    /// Write the increments of row `index` into `buf` (length `n_steps`).
    pub fn fill_row(&self, index: usize, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.n_steps);
        if self.zero {
            buf.fill(0.0);
            return;
        }
        let mut rng = self.path_rng(index);
        for v in buf.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = self.sqrt_dt * z;
        }
    }

    pub fn row(&self, index: usize) -> Vec<f64> {
        let mut buf = vec![0.0; self.n_steps];
        self.fill_row(index, &mut buf);
        buf
    }

    /// Standard normals from the auxiliary stream of row `index`.
    pub fn fill_aux_normals(&self, index: usize, buf: &mut [f64]) {
        if self.zero {
            buf.fill(0.0);
            return;
        }
        let mut rng = self.aux_rng(index);
        for v in buf.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_reproducible_and_independent_of_path_count() {
        let g = TimeGrid::new(1.0, 16).unwrap();
        let a = NoiseMatrix::new(7, &g, 10);
        let b = NoiseMatrix::new(7, &g, 1000);
        assert_eq!(a.row(3), b.row(3));
        assert_ne!(a.row(3), a.row(4));
        assert_ne!(a.row(3), NoiseMatrix::new(8, &g, 10).row(3));
    }

    #[test]
    fn increments_have_variance_dt() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let m = NoiseMatrix::new(1, &g, 20_000);
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut n = 0.0;
        for i in 0..m.n_paths() {
            for v in m.row(i) {
                sum += v;
                sq += v * v;
                n += 1.0;
            }
        }
        let mean = sum / n;
        let var = sq / n - mean * mean;
        assert!(mean.abs() < 4.0 * (0.25f64 / n).sqrt());
        assert!((var - 0.25).abs() < 0.01);
    }

    #[test]
    fn aux_stream_differs() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let m = NoiseMatrix::new(3, &g, 2);
        let mut aux = vec![0.0; 8];
        m.fill_aux_normals(0, &mut aux);
        let row: Vec<f64> = m.row(0).iter().map(|v| v / (0.125f64).sqrt()).collect();
        assert_ne!(aux, row);
    }

    #[test]
    fn zero_noise() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        assert!(NoiseMatrix::zeros(&g, 2).row(1).iter().all(|&v| v == 0.0));
    }
}
