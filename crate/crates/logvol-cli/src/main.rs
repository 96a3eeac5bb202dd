//! Command-line driver for the logvol library: reproducible simulations of
//! simplex log-volumes and Gaussian log-determinants, exact moment and bound
//! tables, and limit-law diagnostics.
//!
//! Configuration comes from an optional JSON file plus flags; a flag always
//! overrides the file. Output is a data-only table, CSV by default, with a
//! `#` header block naming the library version, the experiment, and the
//! resolved configuration. Nothing time- or host-dependent is written, so
//! identical configurations produce byte-identical files.
//!
//! Exit status: 0 on success, 2 for configuration problems (bad flags,
//! unreadable or invalid config, unknown experiment, dimensions out of
//! range), 3 for numeric or I/O failures during the run.

mod config;
mod experiments;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{CliError, CliResult, DimsSpec, ExperimentConfig, LawSpec, OutputFormat};
use experiments::{find, run_bounds, run_limits_report, REGISTRY};
use table::Artifact;

#[derive(Parser)]
#[command(
    name = "logvol",
    version,
    about = "Random simplex log-volumes and Gaussian log-determinants",
    long_about = "Monte Carlo experiments, exact moment formulas, normal-approximation \
                  bounds, and limit-law tables for log-volumes of rotationally invariant \
                  random simplices.\n\nFlags override values from --config. Every run \
                  writes one table with a '#' header block; reruns with the same \
                  configuration are byte-identical."
)]
struct Cli {
    /// JSON experiment configuration
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// RNG seed (overrides the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo sample count (overrides the config file)
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,

    /// Worker threads; results do not depend on this
    #[arg(long, global = true, value_name = "K", value_parser = clap::value_parser!(usize))]
    workers: Option<usize>,

    /// Output path; stdout when omitted
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment end to end
    Simulate {
        /// Experiment id (see --list)
        #[arg(long)]
        experiment: Option<String>,
        /// List registered experiments and exit
        #[arg(long)]
        list: bool,
    },
    /// Exact moments of log-volumes (with --p) or log-determinants
    Moments(DimArgs),
    /// Kolmogorov-Smirnov bound forms across dimensions
    Bounds {
        #[command(flatten)]
        dims: DimArgs,
        /// Aspect-ratio ceiling for the uniform-theta form
        #[arg(long, default_value_t = 0.9)]
        phi: f64,
    },
    /// Universal constants of the log-determinant expansions
    Constants,
    /// Centering sequences and limit-regime conditions for a radial law
    Limits {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum)]
        law: LawKind,
        /// Tail index for pareto-log-radius
        #[arg(long)]
        alpha: Option<f64>,
        /// Scale for pareto-log-radius
        #[arg(long)]
        scale: Option<f64>,
        /// Shape for beta-prime
        #[arg(long)]
        phi: Option<f64>,
        /// Scaling sequence; solved from the truncated-variance equation
        /// when omitted
        #[arg(long)]
        sigma: Option<f64>,
        /// Epsilons for the small-jump tail condition
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0])]
        epsilons: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Regime::Normal)]
        regime: Regime,
    },
    /// Two-sample check of a distributional identity
    Ks {
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long)]
        n: u32,
        /// Number of simplex vertices besides the origin (spherical only)
        #[arg(long)]
        p: Option<u32>,
    },
}

#[derive(Args)]
struct DimArgs {
    /// Ambient dimension or matrix order; omit for the default table
    #[arg(long)]
    n: Option<u32>,
    /// Simplex vertex count; omit for a square-matrix row
    #[arg(long)]
    p: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Regime {
    Normal,
    Stable,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LawKind {
    SphericalUnit,
    ScaledGaussian,
    BetaPrime,
    ParetoLogRadius,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Identity {
    /// Gram-determinant simplex volume vs the beta product
    Spherical,
    /// Gaussian matrix |det| vs the gamma product
    Gaussian,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    if let Some(k) = cli.workers {
        if k == 0 {
            return Err(CliError::config("--workers must be at least 1"));
        }
        // Ignore the error from a pool that is already running; the worker
        // count never changes results, only wall time.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }

    let file_cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let cfg = file_cfg.override_with(cli.seed, cli.samples, cli.out.clone(), cli.format);
    let format = cfg.format.unwrap_or(OutputFormat::Csv);
    let out = cfg.out.clone();

    let artifact: Artifact = match cli.command {
        Command::Simulate { experiment, list } => {
            if list {
                for spec in REGISTRY {
                    println!("{:<16} {}", spec.id, spec.computes);
                }
                return Ok(());
            }
            let id = experiment
                .or_else(|| cfg.experiment.clone())
                .ok_or_else(|| {
                    CliError::config(
                        "no experiment named; pass --experiment or set it in the config",
                    )
                })?;
            let spec = find(&id)?;
            (spec.run)(&cfg)?
        }
        Command::Moments(dims) => {
            let cfg = with_dims(cfg, &dims)?;
            (find("moments-exact")?.run)(&cfg)?
        }
        Command::Bounds { dims, phi } => {
            if !(phi.is_finite() && (0.0..1.0).contains(&phi)) {
                return Err(CliError::config("--phi must lie in [0, 1)"));
            }
            let cfg = with_dims(cfg, &dims)?;
            run_bounds(&cfg, phi)?
        }
        Command::Constants => (find("constants")?.run)(&cfg)?,
        Command::Limits {
            n,
            p,
            law,
            alpha,
            scale,
            phi,
            sigma,
            epsilons,
            regime,
        } => {
            let law_spec = law_spec_from_flags(law, alpha, scale, phi)?;
            run_limits_report(
                law_spec,
                DimsSpec::simplex(n, p),
                sigma,
                &epsilons,
                regime == Regime::Stable,
            )?
        }
        Command::Ks { identity, n, p } => {
            let (id, dims) = match identity {
                Identity::Spherical => {
                    let p = p.ok_or_else(|| {
                        CliError::config("--identity spherical needs --p")
                    })?;
                    ("miles-ks", DimsSpec::simplex(n, p))
                }
                Identity::Gaussian => {
                    if p.is_some() {
                        return Err(CliError::config(
                            "--identity gaussian takes --n only",
                        ));
                    }
                    ("goodman-ks", DimsSpec::matrix(n))
                }
            };
            let cfg = ExperimentConfig {
                dims: None,
                dims_grid: Some(vec![dims]),
                ..cfg
            };
            (find(id)?.run)(&cfg)?
        }
    };

    artifact.write(out.as_deref(), format)
}

/// Applies --n/--p to the config: both present selects one simplex row, only
/// --n one matrix row, neither leaves the config (or defaults) in charge.
fn with_dims(mut cfg: ExperimentConfig, dims: &DimArgs) -> CliResult<ExperimentConfig> {
    match (dims.n, dims.p) {
        (Some(n), Some(p)) => {
            cfg.dims = None;
            cfg.dims_grid = Some(vec![DimsSpec::simplex(n, p)]);
        }
        (Some(n), None) => {
            cfg.dims = None;
            cfg.dims_grid = Some(vec![DimsSpec::matrix(n)]);
        }
        (None, Some(_)) => {
            return Err(CliError::config("--p needs --n"));
        }
        (None, None) => {}
    }
    Ok(cfg)
}

fn law_spec_from_flags(
    kind: LawKind,
    alpha: Option<f64>,
    scale: Option<f64>,
    phi: Option<f64>,
) -> CliResult<LawSpec> {
    let reject_extra = |used: &str| -> CliResult<()> {
        if alpha.is_some() || scale.is_some() || phi.is_some() {
            return Err(CliError::config(format!(
                "law '{used}' takes no --alpha/--scale/--phi parameters"
            )));
        }
        Ok(())
    };
    match kind {
        LawKind::SphericalUnit => {
            reject_extra("spherical-unit")?;
            Ok(LawSpec::SphericalUnit)
        }
        LawKind::ScaledGaussian => {
            reject_extra("scaled-gaussian")?;
            Ok(LawSpec::ScaledGaussian)
        }
        LawKind::BetaPrime => {
            if alpha.is_some() || scale.is_some() {
                return Err(CliError::config("beta-prime takes only --phi"));
            }
            let phi = phi.ok_or_else(|| CliError::config("beta-prime needs --phi"))?;
            Ok(LawSpec::BetaPrime { phi })
        }
        LawKind::ParetoLogRadius => {
            if phi.is_some() {
                return Err(CliError::config(
                    "pareto-log-radius takes --alpha and --scale, not --phi",
                ));
            }
            let alpha =
                alpha.ok_or_else(|| CliError::config("pareto-log-radius needs --alpha"))?;
            let scale =
                scale.ok_or_else(|| CliError::config("pareto-log-radius needs --scale"))?;
            Ok(LawSpec::ParetoLogRadius { alpha, scale })
        }
    }
}
