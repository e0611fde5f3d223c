//! Shared fixtures for the benchmarks.

use ckls_core::distribution::{transition_spec, TransitionSpec};
use ckls_core::{derive_cir, make_transform, CklsParams, Transform, Variant};

/// Reference parameter sets with their labels.
pub fn reference_params() -> [(&'static str, CklsParams); 2] {
    [("high_gamma", CklsParams::reference_high_gamma()), ("low_gamma", CklsParams::reference_low_gamma())]
}

/// Transform and time-`t` law for `p` at the default constant.
pub fn exact_law(p: &CklsParams, t: f64) -> (Transform, TransitionSpec) {
    let tr = make_transform(p, p.default_c()).expect("reference gamma is not 1");
    let cir = derive_cir(p, &tr, Variant::Derived).expect("reference regime is valid");
    let spec = transition_spec(&cir, t, Variant::Derived).expect("t > 0");
    (tr, spec)
}
