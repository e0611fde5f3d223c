//! CKLS short-rate model `dr = (a - b r) dt + sigma r^gamma dB`, its reduction
//! to a square-root diffusion by a power map and a change of measure, exact
//! samplers and transition laws under the new measure, and a statistical
//! harness that checks each closed form against simulation.

pub mod analysis;
pub mod config;
pub mod distribution;
pub mod engine;
pub mod error;
pub mod girsanov;
pub mod model;
pub mod quadrature;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    classify_regime, derive_cir, make_transform, CirParams, CklsParams, GirsanovBranch, MomentCase, Regime, Transform,
    Variant,
};
