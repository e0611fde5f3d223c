//! Subcommand bodies. Each returns the process exit code on success.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ckls_core::analysis::{mean_rate, scale_trend};
use ckls_core::config::{OutputFormat, RunConfig};
use ckls_core::distribution::{rate_cdf, rate_density, transition_spec};
use ckls_core::engine::io::{write_binary, write_csv, PathTable};
use ckls_core::engine::{
    cir_exact_batch, euler_auxiliary, euler_ckls, explicit_r_batch, positivity_diagnostic, NoiseMatrix,
};
use ckls_core::verify::{run_suite, VerifyOptions};
use ckls_core::{classify_regime, derive_cir, Error, Variant};
use serde_json::{json, Value};

use crate::Mode;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_REGIME: u8 = 2;
pub const EXIT_CHECKS_FAILED: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Regime(_)) { EXIT_REGIME } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self { code: EXIT_USAGE, message: format!("i/o: {e}") }
    }
}

type CmdResult = Result<u8, CliError>;

pub struct Context {
    pub cfg: RunConfig,
    pub workers: usize,
}

impl Context {
    fn out_path(&self) -> Option<PathBuf> {
        self.cfg.output.path.as_ref().map(PathBuf::from)
    }

    /// Resolved config, compact JSON, as embedded in every artifact.
    fn echo(&self) -> String {
        self.cfg.resolved().to_json()
    }

    fn require_girsanov(&self) -> Result<(), CliError> {
        let p = &self.cfg.params;
        if p.gamma() == 1.0 {
            return Err(Error::DegenerateTransform.into());
        }
        match classify_regime(p).girsanov_violation(p) {
            Some(why) => Err(Error::Regime(why).into()),
            None => Ok(()),
        }
    }
}

pub fn load_config(path: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<RunConfig, CliError> {
    let mut cfg = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError { code: EXIT_USAGE, message: format!("cannot read {}: {e}", p.display()) })?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output.path = Some(o.to_string_lossy().into_owned());
    }
    Ok(cfg)
}

fn print_json(v: &Value) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, v).map_err(|e| CliError { code: EXIT_USAGE, message: e.to_string() })?;
    writeln!(stdout)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError { code: EXIT_USAGE, message: format!("cannot create {}: {e}", path.display()) })
}

pub fn regime(ctx: &Context) -> CmdResult {
    let p = &ctx.cfg.params;
    if p.gamma() == 1.0 {
        return Err(Error::DegenerateTransform.into());
    }
    let regime = classify_regime(p);
    let violation = regime.girsanov_violation(p);
    let mut report = json!({
        "params": p,
        "regime": regime,
        "girsanov_violation": violation,
        "config": ctx.cfg.resolved(),
    });
    if regime.girsanov_valid {
        let tr = ctx.cfg.transform()?;
        report["cir"] = json!(derive_cir(p, &tr, ctx.cfg.drift_rule)?);
    }
    print_json(&report)?;
    Ok(if regime.girsanov_valid { EXIT_OK } else { EXIT_REGIME })
}

fn write_table(ctx: &Context, table: &PathTable, path: &Path) -> Result<(), CliError> {
    let echo = ctx.echo();
    let mut w = create(path)?;
    match ctx.cfg.output.format {
        OutputFormat::Csv => write_csv(table, Some(&echo), &mut w)?,
        OutputFormat::Binary => write_binary(table, Some(&echo), &mut w)?,
        OutputFormat::Json => {
            let doc = json!({ "config": ctx.cfg.resolved(), "times": table.times, "values": table.rows });
            serde_json::to_writer(&mut w, &doc).map_err(|e| CliError { code: EXIT_USAGE, message: e.to_string() })?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let m = xs.clone().sum::<f64>() / n;
    let v = if n > 1.0 { xs.map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, (v / n).sqrt())
}

pub fn simulate(ctx: &Context, mode: Mode, variant: Option<Variant>) -> CmdResult {
    let cfg = &ctx.cfg;
    let p = &cfg.params;
    let grid = cfg.time_grid()?;
    let t = grid.t_end();
    let start = Instant::now();
    let mut summary = json!({ "mode": mode.as_str(), "n_paths": cfg.n_paths, "seed": cfg.seed, "t_end": t });

    let table = match mode {
        Mode::EulerP => {
            let run = euler_ckls(p, &grid, &NoiseMatrix::new(cfg.seed, &grid, cfg.n_paths), ctx.workers)?;
            let (m, se) = mean_se(run.paths.iter().map(|x| x.terminal()));
            summary["truncations"] = json!(run.truncations);
            summary["truncated_paths"] = json!(run.truncated_paths);
            summary["terminal_mean"] = json!(m);
            summary["terminal_std_error"] = json!(se);
            summary["closed_form_mean"] = json!(mean_rate(p, t));
            PathTable::from_paths(&run.paths)
        }
        Mode::Auxiliary => {
            let v = variant.unwrap_or(cfg.aux_variant);
            let noise = NoiseMatrix::new(cfg.seed, &grid, cfg.n_paths);
            let run = euler_auxiliary(p, &grid, &noise, v, ctx.workers)?;
            let pos = positivity_diagnostic(p, &grid, &noise, v, ctx.workers)?;
            summary["variant"] = json!(v);
            summary["truncations"] = json!(run.truncations);
            summary["truncated_paths"] = json!(run.truncated_paths);
            summary["positivity"] = json!(pos);
            if (0.5..1.0).contains(&p.gamma()) {
                summary["scale_trend"] = json!(scale_trend(p, cfg.scale_variant)?);
            }
            PathTable::from_paths(&run.paths)
        }
        Mode::ExplicitQ | Mode::CirExact => {
            ctx.require_girsanov()?;
            if !(t > 0.0) {
                return Err(Error::Domain("exact samplers need grid.t_end > 0".into()).into());
            }
            let tr = cfg.transform()?;
            let cir = derive_cir(p, &tr, cfg.drift_rule)?;
            let spec = transition_spec(&cir, t, cfg.delta_rule)?;
            let values = if mode == Mode::ExplicitQ {
                explicit_r_batch(p, cfg.drift_rule, t, cfg.n_paths, cfg.seed, ctx.workers)?
            } else {
                cir_exact_batch(&spec, cfg.n_paths, cfg.seed, ctx.workers)
            };
            let (m, se) = mean_se(values.iter().copied());
            summary["drift_rule"] = json!(cfg.drift_rule);
            summary["spec"] = json!(spec);
            summary["sample_mean"] = json!(m);
            summary["sample_std_error"] = json!(se);
            if mode == Mode::CirExact {
                summary["mean_L_delta_plus_zeta"] = json!(spec.mean_y());
            }
            summary["truncations"] = json!(0);
            PathTable::terminal(t, &values)
        }
    };

    summary["n_points"] = json!(table.times.len());
    if let Some(path) = ctx.out_path() {
        write_table(ctx, &table, &path)?;
        summary["output"] = json!({ "path": path.to_string_lossy(), "format": cfg.output.format });
    } else if table.rows.len() == 1 && table.times.len() == 1 {
        summary["value"] = json!(table.rows[0][0]);
    }
    summary["timing_seconds"] = json!(start.elapsed().as_secs_f64());
    summary["config"] = json!(cfg.resolved());
    print_json(&summary)?;
    Ok(EXIT_OK)
}

pub fn density(ctx: &Context, x_min: f64, x_max: f64, points: usize) -> CmdResult {
    if !(x_min > 0.0 && x_max > x_min && x_max.is_finite()) || points < 2 {
        return Err(CliError {
            code: EXIT_USAGE,
            message: format!("need 0 < x-min < x-max and points >= 2 (got {x_min}, {x_max}, {points})"),
        });
    }
    ctx.require_girsanov()?;
    let cfg = &ctx.cfg;
    let t = cfg.grid.t_end;
    let tr = cfg.transform()?;
    let cir = derive_cir(&cfg.params, &tr, cfg.drift_rule)?;
    let spec = transition_spec(&cir, t, cfg.delta_rule)?;

    let mut buf = Vec::new();
    writeln!(buf, "# delta_rule: {}", spec.delta_rule)?;
    writeln!(buf, "# drift_rule: {}", cfg.drift_rule)?;
    writeln!(buf, "# L: {}", spec.l)?;
    writeln!(buf, "# delta: {}", spec.delta)?;
    writeln!(buf, "# zeta: {}", spec.zeta)?;
    writeln!(buf, "# t: {}", spec.t)?;
    writeln!(buf, "# config: {}", ctx.echo())?;
    writeln!(buf, "x,pdf,cdf")?;
    let step = (x_max - x_min) / (points - 1) as f64;
    for i in 0..points {
        let x = if i + 1 == points { x_max } else { x_min + step * i as f64 };
        writeln!(buf, "{x},{},{}", rate_density(&tr, &spec, x)?, rate_cdf(&tr, &spec, x))?;
    }

    match ctx.out_path() {
        Some(path) => {
            let mut w = create(&path)?;
            w.write_all(&buf)?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(EXIT_OK)
}

pub fn verify(ctx: &Context, suite: &str) -> CmdResult {
    let opts = VerifyOptions::from_config(&ctx.cfg, ctx.workers);
    let report = run_suite(suite, &opts)?;
    let doc = json!({ "config": ctx.cfg.resolved(), "report": report });
    if let Some(path) = ctx.out_path() {
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| CliError { code: EXIT_USAGE, message: e.to_string() })?;
        writeln!(w)?;
        w.flush()?;
    }
    print_json(&doc)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECKS_FAILED })
}
