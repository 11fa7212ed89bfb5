use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tracksim::ingest::BasinCode;
use tracksim::pipeline::{self, RunConfig, OUT_DIR_ENV};
use tracksim::Error;

/// Synthetic tropical cyclone tracks by kernel-weighted segment resampling.
///
/// Settings come from an optional TOML config; command-line flags override
/// it. Every command writes a `<command>.config.toml` snapshot next to its
/// outputs.
#[derive(Parser, Debug)]
#[command(name = "tracksim", version)]
struct Cli {
    /// TOML run config; relative paths inside it are relative to the file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Basin code (NA, EP, WP, NI, SI, SP); required without a config.
    #[arg(long, global = true)]
    basin: Option<BasinCode>,

    /// Output directory [default: ./out].
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,

    /// Worker threads; outputs do not depend on this [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct PathArgs {
    /// Segment library file [default: <out-dir>/library.tslib].
    #[arg(long)]
    library: Option<PathBuf>,
    /// Transition table file [default: <out-dir>/table.tstab].
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a best-track archive into a segment library.
    Ingest {
        /// Point-per-row best-track CSV.
        #[arg(long)]
        archive: Option<PathBuf>,
        /// Column layout: ibtracs (v04 list CSV) or lowercase.
        #[arg(long)]
        columns: Option<String>,
        /// First season kept.
        #[arg(long)]
        record_start_year: Option<i32>,
        /// Last season kept.
        #[arg(long)]
        record_end_year: Option<i32>,
        #[command(flatten)]
        paths: PathArgs,
    },
    /// Precompute the transition table.
    Train {
        /// Candidate radius, degrees [default: 2.5].
        #[arg(long)]
        radius: Option<f64>,
        /// Exponent for the motion-vector and wind covariates, > 2 [default: 4].
        #[arg(long)]
        alpha: Option<f64>,
        /// Terminal steps held back on every track [default: 5% of mean track length, at least 3].
        #[arg(long)]
        reserved_steps: Option<usize>,
        #[command(flatten)]
        paths: PathArgs,
    },
    /// Generate a synthetic catalog.
    Simulate {
        /// Years to simulate [default: 500].
        #[arg(long)]
        years: Option<u32>,
        /// Random seed [default: 42].
        #[arg(long)]
        seed: Option<u64>,
        /// Per-step jump probability [default: 0.1].
        #[arg(long)]
        jump_probability: Option<f64>,
        /// Odd join smoothing window, points [default: 5].
        #[arg(long)]
        window: Option<usize>,
        /// Also write per-track segment provenance (JSONL).
        #[arg(long)]
        provenance: bool,
        /// Catalog CSV [default: <out-dir>/catalog.csv].
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[command(flatten)]
        paths: PathArgs,
    },
    /// Observed and simulated density and P64 fields with a comparison.
    Validate {
        /// Only compute the observed fields.
        #[arg(long)]
        observed_only: bool,
        /// Directory of observed fields from an earlier run, used instead of the library.
        #[arg(long)]
        observed_fields: Option<PathBuf>,
        /// Years per draw [default: modern window length].
        #[arg(long)]
        n_b: Option<u32>,
        /// Number of draws [default: 100].
        #[arg(long)]
        n_draws: Option<u32>,
        /// Catalog CSV [default: <out-dir>/catalog.csv].
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[command(flatten)]
        paths: PathArgs,
    },
    /// Compare two catalogs with the same diagnostics.
    Compare {
        catalog_a: PathBuf,
        catalog_b: PathBuf,
        /// Year count for A when it has no sidecar.
        #[arg(long)]
        years_a: Option<u32>,
        /// Year count for B when it has no sidecar.
        #[arg(long)]
        years_b: Option<u32>,
        /// Years per draw [default: modern window length].
        #[arg(long)]
        n_b: Option<u32>,
        /// Number of draws [default: 100].
        #[arg(long)]
        n_draws: Option<u32>,
        #[command(flatten)]
        paths: PathArgs,
    },
}

fn base_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match (&cli.config, cli.basin) {
        (Some(p), _) => RunConfig::from_toml_file(p)?,
        (None, Some(b)) => RunConfig::new(b),
        (None, None) => return Err(Error::Config("give --basin or --config".into())),
    };
    if let Some(b) = cli.basin {
        cfg.basin = b;
    }
    if let Some(d) = &cli.out_dir {
        cfg.paths.output_dir = Some(d.clone());
    }
    Ok(cfg)
}

fn apply_paths(cfg: &mut RunConfig, p: &PathArgs) {
    if let Some(v) = &p.library {
        cfg.paths.library = Some(v.clone());
    }
    if let Some(v) = &p.table {
        cfg.paths.table = Some(v.clone());
    }
}

fn print<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("summary serializes"));
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = base_config(&cli)?;
    match &cli.command {
        Command::Ingest {
            archive,
            columns,
            record_start_year,
            record_end_year,
            paths,
        } => {
            apply_paths(&mut cfg, paths);
            if let Some(a) = archive {
                cfg.paths.archive = Some(a.clone());
            }
            if let Some(c) = columns {
                cfg.columns = serde_json::from_value(serde_json::Value::String(c.clone()))
                    .map_err(|_| Error::Config(format!("unknown column layout `{c}`")))?;
            }
            if let Some(y) = record_start_year {
                cfg.window.record_start_year = Some(*y);
            }
            if let Some(y) = record_end_year {
                cfg.window.record_end_year = Some(*y);
            }
            let s = pipeline::cmd_ingest(&cfg)?;
            eprintln!(
                "{}: {} tracks, {} points ({} modern tracks); {} rejected rows, {} storms dropped",
                s.basin, s.tracks, s.points, s.modern_tracks, s.rejects, s.dropped
            );
            print(&s);
        }
        Command::Train {
            radius,
            alpha,
            reserved_steps,
            paths,
        } => {
            apply_paths(&mut cfg, paths);
            if let Some(r) = radius {
                cfg.kernel.radius_deg = *r;
            }
            if let Some(a) = alpha {
                cfg.kernel.alpha_vec = *a;
                cfg.kernel.alpha_wind = *a;
            }
            if let Some(r) = reserved_steps {
                cfg.simulation.reserved_steps = Some(*r);
            }
            print(&pipeline::cmd_train(&cfg)?);
        }
        Command::Simulate {
            years,
            seed,
            jump_probability,
            window,
            provenance,
            catalog,
            paths,
        } => {
            apply_paths(&mut cfg, paths);
            let s = &mut cfg.simulation;
            if let Some(v) = years {
                s.n_years = *v;
            }
            if let Some(v) = seed {
                s.seed = *v;
            }
            if let Some(v) = jump_probability {
                s.jump_probability = *v;
            }
            if let Some(v) = window {
                s.smoothing_window = *v;
            }
            cfg.provenance |= *provenance;
            if let Some(c) = catalog {
                cfg.paths.catalog = Some(c.clone());
            }
            print(&pipeline::cmd_simulate(&cfg)?);
        }
        Command::Validate {
            observed_only,
            observed_fields,
            n_b,
            n_draws,
            catalog,
            paths,
        } => {
            apply_paths(&mut cfg, paths);
            if n_b.is_some() {
                cfg.diagnostics.n_b = *n_b;
            }
            if let Some(n) = n_draws {
                cfg.diagnostics.n_draws = *n;
            }
            if let Some(c) = catalog {
                cfg.paths.catalog = Some(c.clone());
            }
            print(&pipeline::cmd_validate(&cfg, *observed_only, observed_fields.as_deref())?);
        }
        Command::Compare {
            catalog_a,
            catalog_b,
            years_a,
            years_b,
            n_b,
            n_draws,
            paths,
        } => {
            apply_paths(&mut cfg, paths);
            if n_b.is_some() {
                cfg.diagnostics.n_b = *n_b;
            }
            if let Some(n) = n_draws {
                cfg.diagnostics.n_draws = *n;
            }
            print(&pipeline::cmd_compare(&cfg, catalog_a, catalog_b, *years_a, *years_b)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
