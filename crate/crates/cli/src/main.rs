use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ckls_core::Variant;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "ckls", version, about = "CKLS short-rate simulation, exact laws and verification")]
struct Cli {
    /// JSON run configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output file; overrides `output.path` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the parameters against the change-of-measure and moment hypotheses.
    Regime,
    /// Simulate paths or exact time-t samples.
    Simulate {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Auxiliary drift variant; defaults to `aux_variant` from the config.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Tabulate the exact density and distribution function of `r_t` at `t = grid.t_end`.
    Density {
        #[arg(long, default_value_t = 0.01)]
        x_min: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Run verification checks and print a JSON report.
    Verify {
        /// `default`/`all` or a single check name.
        #[arg(long, default_value = "default")]
        suite: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Euler scheme for the CKLS equation under the original measure.
    EulerP,
    /// Draws of the explicit solution at `t_end` under the new measure.
    ExplicitQ,
    /// Draws of the image CIR process at `t_end` from its non-central chi-square law.
    CirExact,
    /// Euler scheme for the auxiliary equation.
    Auxiliary,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::EulerP => "euler-p",
            Mode::ExplicitQ => "explicit-q",
            Mode::CirExact => "cir-exact",
            Mode::Auxiliary => "auxiliary",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum VariantArg {
    Paper,
    Derived,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Paper => Variant::Paper,
            VariantArg::Derived => Variant::Derived,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE } else { commands::EXIT_OK });
        }
    };
    let result = commands::load_config(cli.config.as_deref(), cli.seed, cli.out.as_deref()).and_then(|cfg| {
        let ctx = commands::Context { cfg, workers: cli.workers };
        match cli.command {
            Command::Regime => commands::regime(&ctx),
            Command::Simulate { mode, variant } => commands::simulate(&ctx, mode, variant.map(Into::into)),
            Command::Density { x_min, x_max, points } => commands::density(&ctx, x_min, x_max, points),
            Command::Verify { suite } => commands::verify(&ctx, &suite),
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ckls: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
