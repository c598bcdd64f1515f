//! Command-line front end. Every number printed here comes from a library call.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cmv_scatter::check::{run_checks, CheckOptions};
use cmv_scatter::circle::{ring, CircleGrid, ScatteringFunction};
use cmv_scatter::config::RunConfig;
use cmv_scatter::families::Family;
use cmv_scatter::io::{self, InverseReport, Reconstruction, SamplesFile};
use cmv_scatter::scattering::{roundtrip, DirectScattering};
use cmv_scatter::spectral::{spectrum_report, PairTag};
use cmv_scatter::verblunsky::{convergence_report, inverse_scattering};
use cmv_scatter::{Error, Result, C64};

#[derive(Parser)]
#[command(
    name = "cmv-scatter",
    version,
    about = "Inverse and direct scattering for CMV matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of grid nodes on the circle.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Compute levels -J..=J.
    #[arg(long, global = true)]
    levels: Option<i64>,
    /// CMV truncation half-width.
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Neumann depth of the wandering-vector approximation.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scattering function file (JSON coeffs or samples, or CSV theta,re,im).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Built-in family: zero, monomial:RE,IM,K, blaschke:R,ARE,AIM, random:DEGREE,MARGIN,SEED.
    #[arg(long)]
    family: Option<Family>,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering function to Verblunsky coefficients.
    Inverse {
        #[command(flatten)]
        source: Source,
    },
    /// Verblunsky coefficients to the scattering function.
    Direct {
        /// Sequence file, or the output of `inverse`.
        #[arg(long)]
        alphas: PathBuf,
        /// Evaluate on the ring |z| = RADIUS (needs --count).
        #[arg(long, requires = "count", conflicts_with = "z")]
        radius: Option<f64>,
        #[arg(long, requires = "radius")]
        count: Option<usize>,
        /// Explicit points `RE,IM`; repeatable.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Vec<C64>,
    },
    /// Inverse followed by direct scattering, with a doubling ladder.
    Roundtrip {
        #[command(flatten)]
        source: Source,
    },
    /// Spectral density with respect to a pair of defect vectors.
    Spectrum {
        #[command(flatten)]
        source: Source,
        /// Level index n of the pair at level 2n.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, value_enum, default_value_t = Pair::KTk)]
        pair: Pair,
        /// Largest |k| in the moment comparison.
        #[arg(long, default_value_t = 8)]
        kmax: usize,
    },
    /// Runs the invariant suite; exits nonzero if any check fails.
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        no_oracle: bool,
        #[arg(long)]
        no_roundtrip: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pair {
    /// (K_{n,n}, t K~_{n,n})
    KTk,
    /// (K_{n,n}, K~_{n+1,n})
    KNext,
}

fn parse_point(s: &str) -> std::result::Result<C64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(C64::new(p(re)?, p(im)?))
}

fn config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.grid {
        cfg.grid_size = v;
    }
    if let Some(v) = common.levels {
        cfg.levels = v;
    }
    if let Some(v) = common.window {
        cfg.window = v;
    }
    if let Some(v) = common.depth {
        cfg.depth = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load(source: &Source, cfg: &RunConfig) -> Result<ScatteringFunction> {
    match (&source.input, &source.family) {
        (Some(p), _) => io::read_scattering(p, cfg.grid_size),
        (None, Some(f)) => f.build(CircleGrid::new(cfg.grid_size)?),
        (None, None) => Err(Error::Input(
            "one of --input or --family is required".into(),
        )),
    }
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("CMV_SCATTER_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Input(format!(
            "CMV_SCATTER_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Input(e.to_string()))
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let cfg = config(&cli.common)?;
    let out: Option<&Path> = cli.common.out.as_deref();
    let csv = cli.common.format == Format::Csv;
    match cli.command {
        Command::Inverse { source } => {
            let r = load(&source, &cfg)?;
            let inv = inverse_scattering(&r, &cfg.inverse())?;
            let conv = convergence_report(&inv.sequence)?;
            let text = if csv {
                io::sequence_csv(&inv.sequence)?
            } else {
                io::to_json(&InverseReport {
                    sequence: &inv.sequence,
                    convergence: &conv,
                    levels: &inv.levels,
                })?
            };
            io::emit(out, &text)?;
            eprintln!(
                "inverse: levels {}..={}, sum |alpha|^2 = {:.6e}, a0 nondecreasing: {}",
                inv.sequence.lo,
                inv.sequence.hi(),
                conv.sum_alpha_sq,
                conv.a0_nondecreasing
            );
            Ok(true)
        }
        Command::Direct {
            alphas,
            radius,
            count,
            z,
        } => {
            let seq = io::read_sequence(&alphas)?;
            let ds = DirectScattering::new(&seq, &cfg.direct())?;
            let text = if let (Some(radius), Some(count)) = (radius, count) {
                if count == 0 {
                    return Err(Error::Input("--count must be positive".into()));
                }
                let zs = ring(radius, count);
                let values = ds.evaluate_many(&zs)?;
                points_output(&zs, &values, csv)?
            } else if !z.is_empty() {
                let values = ds.evaluate_many(&z)?;
                points_output(&z, &values, csv)?
            } else {
                let grid = CircleGrid::new(cfg.grid_size)?;
                let values = ds.boundary_values(grid)?;
                if csv {
                    io::samples_csv(grid, &values)?
                } else {
                    io::to_json(&SamplesFile::new(grid, &values))?
                }
            };
            io::emit(out, &text)?;
            eprintln!("direct: wandering residual {:.3e}", ds.wandering.residual);
            Ok(true)
        }
        Command::Roundtrip { source } => {
            let r = load(&source, &cfg)?;
            let rep = roundtrip(&r, &cfg.roundtrip())?;
            let text = if csv {
                io::ladder_csv(&rep.ladder)?
            } else {
                io::to_json(&rep)?
            };
            io::emit(out, &text)?;
            eprintln!(
                "roundtrip: sup error {:.3e} (tolerance {:.0e}), non-increasing under doubling: {}",
                rep.sup_error, cfg.tol_roundtrip, rep.non_increasing
            );
            Ok(true)
        }
        Command::Spectrum {
            source,
            n,
            pair,
            kmax,
        } => {
            let r = load(&source, &cfg)?;
            let tag = match pair {
                Pair::KTk => PairTag::KAndTKtilde,
                Pair::KNext => PairTag::KAndKtildeNext,
            };
            let rep = spectrum_report(&r, n, tag, kmax, &cfg.section())?;
            let text = if csv {
                io::density_csv(&rep.density)?
            } else {
                io::to_json(&rep)?
            };
            io::emit(out, &text)?;
            eprintln!(
                "spectrum: n = {n}, max moment discrepancy {:.3e}, log det integral {:.6e}",
                rep.moments.max_discrepancy, rep.log_det
            );
            Ok(true)
        }
        Command::Check {
            source,
            no_oracle,
            no_roundtrip,
        } => {
            let r = load(&source, &cfg)?;
            let opts = CheckOptions {
                oracle: !no_oracle,
                roundtrip: !no_roundtrip,
            };
            let rep = run_checks(&r, &cfg, opts)?;
            let text = if csv {
                io::check_csv(&rep)?
            } else {
                io::to_json(&rep)?
            };
            io::emit(out, &text)?;
            for item in rep.items.iter().filter(|i| !i.passed) {
                eprintln!(
                    "FAIL {}: {} (tolerance {})",
                    item.name, item.value, item.tol
                );
            }
            let failed = rep.items.iter().filter(|i| !i.passed).count();
            eprintln!(
                "check: {} of {} passed",
                rep.items.len() - failed,
                rep.items.len()
            );
            Ok(rep.passed)
        }
    }
}

fn points_output(z: &[C64], values: &[C64], csv: bool) -> Result<String> {
    if csv {
        io::reconstruction_csv(z, values)
    } else {
        io::to_json(&Reconstruction { z, r: values })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
