//! Run configuration shared by the command-line tools and the verification
//! harness. Read from and written to JSON; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::engine::TimeGrid;
use crate::error::{Error, Result};
use crate::model::{make_transform, CklsParams, Transform, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_end: f64,
    pub n_steps: usize,
}

impl GridConfig {
    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_end, self.n_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Binary,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Binary => "bin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: CklsParams,
    /// Transform constant; `2 |1 - gamma|` when absent.
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub grid: GridConfig,
    pub n_paths: usize,
    pub seed: u64,
    /// Degrees of freedom of the time-t law: `derived` (1) or `paper` (`C^2`).
    pub delta_rule: Variant,
    /// Sign convention of the drift adjustment and the image OU rate.
    pub drift_rule: Variant,
    /// Drift of the auxiliary equation: `gamma sigma^2 / 2` (`derived`) or `gamma sigma / 2` (`paper`).
    pub aux_variant: Variant,
    /// Exponent in the scale function: `gamma` (`derived`) or `gamma / sigma` (`paper`).
    pub scale_variant: Variant,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: CklsParams::reference_high_gamma(),
            c: None,
            grid: GridConfig { t_end: 0.5, n_steps: 512 },
            n_paths: 10_000,
            seed: 1,
            delta_rule: Variant::Derived,
            drift_rule: Variant::Derived,
            aux_variant: Variant::Derived,
            scale_variant: Variant::Paper,
            output: OutputConfig { format: OutputFormat::Csv, path: None },
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks that do not depend on the model regime.
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidParams(format!("C must be > 0, got {c}")));
            }
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParams("n_paths must be >= 1".into()));
        }
        self.grid.time_grid()?;
        Ok(())
    }

    pub fn resolved_c(&self) -> f64 {
        self.c.unwrap_or_else(|| self.params.default_c())
    }

    /// The same config with `C` filled in, as echoed into output artifacts.
    pub fn resolved(&self) -> Self {
        Self { c: Some(self.resolved_c()), ..self.clone() }
    }

    pub fn transform(&self) -> Result<Transform> {
        make_transform(&self.params, self.resolved_c())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        self.grid.time_grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        assert_eq!(RunConfig::from_json(&cfg.to_json_pretty()).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = RunConfig::from_json(r#"{"params": {"a": 1, "b": 0.2, "sigma": 0.5, "gamma": 0.75, "r0": 1}}"#)
            .unwrap();
        assert_eq!(cfg.params, CklsParams::reference_low_gamma());
        assert_eq!(cfg.seed, RunConfig::default().seed);
        assert_eq!(cfg.resolved_c(), 0.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"seeds": 3}"#).is_err());
        assert!(RunConfig::from_json(r#"{"grid": {"t_end": 1, "n_steps": 4, "dt": 0.25}}"#).is_err());
        assert!(
            RunConfig::from_json(r#"{"params": {"a": 1, "b": 0.2, "sigma": 0.5, "gamma": 0.75, "r0": 1, "x": 0}}"#)
                .is_err()
        );
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::from_json(r#"{"params": {"a": -1, "b": 0.2, "sigma": 0.5, "gamma": 0.75, "r0": 1}}"#)
            .is_err());
        assert!(RunConfig::from_json(r#"{"C": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"n_paths": 0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"delta_rule": "printed"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"output": {"format": "xml"}}"#).is_err());
    }

    #[test]
    fn gamma_one_parses_but_has_no_transform() {
        let cfg = RunConfig::from_json(r#"{"params": {"a": 1, "b": 0.2, "sigma": 0.5, "gamma": 1, "r0": 1}}"#).unwrap();
        assert!(matches!(cfg.transform(), Err(Error::DegenerateTransform)));
    }

    fn variant() -> impl Strategy<Value = Variant> {
        prop_oneof![Just(Variant::Paper), Just(Variant::Derived)]
    }

    proptest! {
        #[test]
        fn arbitrary_configs_round_trip(
            a in 1e-6f64..1e3, b in -10f64..10.0, sigma in 1e-4f64..5.0, gamma in 0.5f64..4.0, r0 in 1e-6f64..10.0,
            c in proptest::option::of(1e-3f64..100.0),
            t_end in 0.0f64..10.0, n_steps in 1usize..100_000, n_paths in 1usize..1_000_000, seed in any::<u64>(),
            v1 in variant(), v2 in variant(), v3 in variant(), v4 in variant(),
            fmt in prop_oneof![Just(OutputFormat::Csv), Just(OutputFormat::Json), Just(OutputFormat::Binary)],
            path in proptest::option::of("[a-z/._-]{1,20}"),
        ) {
            let cfg = RunConfig {
                params: CklsParams::new(a, b, sigma, gamma, r0).unwrap(),
                c,
                grid: GridConfig { t_end, n_steps },
                n_paths,
                seed,
                delta_rule: v1,
                drift_rule: v2,
                aux_variant: v3,
                scale_variant: v4,
                output: OutputConfig { format: fmt, path },
            };
            let back = RunConfig::from_json(&cfg.to_json()).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_json(), cfg.to_json());
        }
    }
}
