use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use oit_cli::commands::{build, sample, validate_and_report};
use oit_cli::export::{export, ExportKind};
use oit_cli::{CliError, RunConfig};

/// Sample from densities on the flat torus through optimal information
/// transport maps.
#[derive(Parser, Debug)]
#[command(name = "oit", version)]
struct Cli {
    /// key = value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a transport map for a density and write it to --out.
    Build(Flags),
    /// Draw --n samples through --map, as CSV to --out or stdout.
    Sample(Flags),
    /// Test --map samples against --density (χ² GOF and two-sample vs a
    /// rejection oracle). Exit code 3 when either test fails.
    Validate(Flags),
    /// Write a heatmap (PGM), warp mesh (CSV) or scatter subsample (CSV).
    Export {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print the effective configuration in config-file form.
    Config(Flags),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Heatmap,
    Mesh,
    Scatter,
}

/// Every flag is also a config-file key and is validated the same way.
#[derive(Args, Debug, Default)]
struct Flags {
    /// uniform | two-bump[(w1,w2)] | one-gaussian-bump[(cx,cy,sigma,height)]
    /// | sine-perturbation[(s)] | file:PATH
    #[arg(long)]
    density: Option<String>,
    /// Max/min ratio imposed by an additive shift, or `none`.
    #[arg(long, allow_hyphen_values = true)]
    ratio: Option<String>,
    /// Nodes per axis.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Time steps K.
    #[arg(long, allow_hyphen_values = true)]
    steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Sample count (max points for scatter export).
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    /// Histogram bins per axis.
    #[arg(long, allow_hyphen_values = true)]
    bins: Option<String>,
    /// midpoint | euler
    #[arg(long)]
    scheme: Option<String>,
    /// cubic | bilinear (composition inside the transport loop)
    #[arg(long)]
    interpolation: Option<String>,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Sample CSV for scatter export.
    #[arg(long)]
    samples: Option<String>,
    /// Per-bin observed/expected CSV written by validate.
    #[arg(long = "bins-csv")]
    bins_csv: Option<String>,
}

impl Flags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let pairs = [
            ("density", &self.density),
            ("ratio", &self.ratio),
            ("grid", &self.grid),
            ("steps", &self.steps),
            ("seed", &self.seed),
            ("n", &self.n),
            ("bins", &self.bins),
            ("scheme", &self.scheme),
            ("interpolation", &self.interpolation),
            ("map", &self.map),
            ("out", &self.out),
            ("samples", &self.samples),
            ("bins-csv", &self.bins_csv),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    let flags = match &cli.command {
        Command::Build(f) | Command::Sample(f) | Command::Validate(f) | Command::Config(f) => f,
        Command::Export { flags, .. } => flags,
    };
    flags.apply(&mut cfg)?;

    match cli.command {
        Command::Build(_) => {
            let summary = build(&cfg)?;
            print!("{}", summary.to_text());
        }
        Command::Sample(_) => {
            sample(&cfg)?;
        }
        Command::Validate(_) => {
            validate_and_report(&cfg)?;
        }
        Command::Export { kind, .. } => {
            let kind = match kind {
                Kind::Heatmap => ExportKind::Heatmap,
                Kind::Mesh => ExportKind::Mesh,
                Kind::Scatter => ExportKind::Scatter,
            };
            export(kind, &cfg)?;
        }
        Command::Config(_) => print!("{}", cfg.to_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
