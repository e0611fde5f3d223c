//! Random-number plumbing, Euler schemes under the original measure and exact
//! samplers under the new one.

mod euler;
mod exact;
mod grid;
pub mod io;
mod noise;
mod parallel;

pub use euler::{
    auxiliary_drift, euler_auxiliary, euler_ckls, euler_path, positivity_diagnostic, simulate, EulerRun, Path,
    PositivityReport, Scheme, POSITIVITY_FLOOR,
};
pub use exact::{
    cir_exact_batch, exact_sqrt_y, explicit_path, explicit_r, explicit_r_batch, ou_rate, sample_cir_exact,
    sample_explicit_r,
};
pub use grid::TimeGrid;
pub use noise::{stream_rng, NoiseMatrix};
pub use parallel::par_map;
