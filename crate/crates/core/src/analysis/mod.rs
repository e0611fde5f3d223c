//! Closed-form moments and Gronwall bounds, the scale function used in the
//! Feller test, and Kolmogorov-Smirnov statistics.

mod ks;
mod moments;
mod scale;

pub use ks::{ks_statistic, ks_two_sample, KsResult, KS_C_01, KS_C_05};
pub use moments::{gronwall_bound, mc_moment, mean_rate, MomentBound, MomentEstimate, MomentKind};
pub use scale::{scale_function, scale_function_log, scale_trend, ScaleTrend, SignedLog};
