//! `mapflow`: run catalog maps, their Nambu flows and the verification suites.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mapflow::chain1d::chain_checks;
use mapflow::harness::{composition_check, conservation_scan, verify_correspondence, GridAxis, GridSpec, ScanReport};
use mapflow::maps::{catalog, catalog_map, hermite_checks, CatalogOptions};
use mapflow::sampling::DEFAULT_SEED;
use mapflow::{Error, Qp4Normalization, Tolerances, VerifyOptions};
use serde::Serialize;

use config::{parse_param, ExperimentConfig, Point};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownMap(_)
            | Error::InvalidParameter(_)
            | Error::Dimension { .. }
            | Error::Arity { .. }
            | Error::Index(_)
            | Error::UnsupportedOrder(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "mapflow", version, about = "Nambu-Hamiltonian flows reconstructed from discrete maps")]
struct Cli {
    /// JSON experiment config; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct MapArgs {
    /// Catalog map id (see `mapflow list`).
    #[arg(long)]
    map: Option<String>,
    /// Map parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Second Hamiltonian of qp4: prop2 or paper-display.
    #[arg(long)]
    normalization: Option<Qp4Normalization>,
}

#[derive(Args, Default)]
struct RunArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Initial source point; the time coordinate may be omitted.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    /// 1-based time coordinate.
    #[arg(long)]
    time_index: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Use fixed-step RK4 with this step.
    #[arg(long)]
    rk4_step: Option<f64>,
    /// Seed for the random initial point when `--x0` is omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List the catalog maps and their parameters.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the map, its Jacobian and determinant at a point.
    Jacobian {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<Point>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the Nambu flow and write a CSV trajectory.
    Flow {
        #[command(flatten)]
        run: RunArgs,
        /// Sample at this many equal intervals instead of every accepted step.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Check that the flow reproduces the map; JSON report.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        tol_dev: Option<f64>,
        #[arg(long)]
        tol_drift: Option<f64>,
    },
    /// Verify over a grid of initial points (axes `lo:hi:count`); JSON report.
    Scan {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "grid", value_name = "LO:HI:COUNT", allow_hyphen_values = true)]
        grid: Vec<String>,
    },
    /// Determinant product and multi-step Hamiltonian check for `m` iterations.
    Compose {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: usize,
    },
    /// Exact-arithmetic Hermite polynomial suite.
    HermiteCheck {
        #[arg(long, default_value_t = 12)]
        m_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Determinant recurrences and Hamiltonian checks for the one-dimensional chain.
    Chain {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn merge_map(cfg: &mut ExperimentConfig, m: MapArgs) {
    if m.map.is_some() {
        cfg.map = m.map;
    }
    cfg.params.extend(m.params);
    if m.normalization.is_some() {
        cfg.normalization = m.normalization;
    }
}

fn merge_run(cfg: &mut ExperimentConfig, r: RunArgs) {
    merge_map(cfg, r.map);
    macro_rules! take {
        ($($field:ident),*) => { $( if r.$field.is_some() { cfg.$field = r.$field; } )* };
    }
    take!(t0, t1, time_index, seed, out);
    if let Some(p) = r.x0 {
        cfg.x0 = Some(p.0);
    }
    let i = &mut cfg.integrator;
    if r.rtol.is_some() {
        i.rtol = r.rtol;
    }
    if r.atol.is_some() {
        i.atol = r.atol;
    }
    if r.max_steps.is_some() {
        i.max_steps = r.max_steps;
    }
    if r.rk4_step.is_some() {
        i.rk4_step = r.rk4_step;
    }
}

fn catalog_options(cfg: &ExperimentConfig) -> CatalogOptions {
    CatalogOptions {
        normalization: cfg.normalization,
    }
}

fn verify_options(cfg: &ExperimentConfig) -> Result<VerifyOptions, CliError> {
    Ok(VerifyOptions {
        catalog: catalog_options(cfg),
        time_index: cfg.time_index0()?,
        ..Default::default()
    })
}

/// `--x0`, or a seeded random point of the map's sample box.
fn initial_point(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    if let Some(x) = &cfg.x0 {
        return Ok(x.clone());
    }
    let entry = catalog_map(cfg.map_id()?, &cfg.params(), &catalog_options(cfg))?;
    Ok(entry.samples(1, cfg.seed.unwrap_or(DEFAULT_SEED)).swap_remove(0).into_vec())
}

fn pass_code(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[derive(Serialize)]
struct JacobianReport {
    map_id: String,
    params: mapflow::Params,
    point: Vec<f64>,
    image: Vec<f64>,
    jacobian: Vec<Vec<f64>>,
    det: f64,
    det_formula: Option<f64>,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    match cli.command {
        Command::List { json } => {
            let items = catalog();
            if json {
                output::emit(&output::json(&items), None)?;
            } else {
                let mut text = String::new();
                for c in &items {
                    let params: Vec<String> = c.params.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
                    text.push_str(&format!(
                        "{:<14} n={} t=x{} {:<24} {}\n",
                        c.id,
                        c.dim,
                        c.time_index,
                        params.join(" "),
                        c.description
                    ));
                }
                output::emit(&text, None)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Jacobian { map, x, out } => {
            merge_map(&mut cfg, map);
            if let Some(p) = x {
                cfg.x0 = Some(p.0);
            }
            if out.is_some() {
                cfg.out = out;
            }
            let entry = catalog_map(cfg.map_id()?, &cfg.params(), &catalog_options(&cfg))?;
            let point = initial_point(&cfg)?;
            let jac = entry.map.jacobian(&point)?;
            let report = JacobianReport {
                map_id: entry.id.clone(),
                params: entry.params.clone(),
                image: entry.map.forward(&point)?.into_vec(),
                jacobian: jac.rows(),
                det: jac.det(),
                det_formula: entry.det_formula(&point).transpose()?,
                point,
            };
            output::emit(&output::json(&report), cfg.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Flow { run, samples } => {
            merge_run(&mut cfg, run);
            if samples.is_some() {
                cfg.samples = samples;
            }
            let entry = catalog_map(cfg.map_id()?, &cfg.params(), &catalog_options(&cfg))?;
            let flow = entry.flow(cfg.time_index0()?)?;
            let (t0, t1) = cfg.span()?;
            let x = mapflow::harness::complete_source(&initial_point(&cfg)?, entry.dim(), flow.time_index(), t0)?;
            let big = entry.map.forward(&x)?;
            let icfg = cfg.integrator()?;
            let tr = match cfg.samples {
                Some(0) => return Err(CliError::Usage("--samples must be positive".into())),
                Some(n) => {
                    let times: Vec<f64> = (0..=n)
                        .map(|k| if k == n { t1 } else { t0 + (t1 - t0) * (k as f64 / n as f64) })
                        .collect();
                    flow.integrate_at(big.as_slice(), &times, &icfg)?
                }
                None => flow.integrate(big.as_slice(), t0, t1, &icfg)?,
            };
            let csv = output::trajectory_csv(&tr, entry.dim(), flow.hamiltonians().len());
            output::emit(&csv, cfg.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { run, tol_dev, tol_drift } => {
            merge_run(&mut cfg, run);
            let mut opts = verify_options(&cfg)?;
            opts.tolerances = Tolerances {
                deviation: tol_dev.unwrap_or(opts.tolerances.deviation),
                drift: tol_drift.unwrap_or(opts.tolerances.drift),
            };
            let (t0, t1) = cfg.span()?;
            let x = initial_point(&cfg)?;
            let report = verify_correspondence(cfg.map_id()?, &cfg.params(), &x, t0, t1, &cfg.integrator()?, &opts)?;
            let env = ScanReport::single(report);
            output::emit(&output::json(&env), cfg.out.as_deref())?;
            Ok(pass_code(env.summary.pass))
        }
        Command::Scan { run, grid } => {
            merge_run(&mut cfg, run);
            if !grid.is_empty() {
                cfg.grid = Some(grid);
            }
            let axes = cfg
                .grid
                .as_ref()
                .ok_or_else(|| CliError::Usage("scan needs --grid lo:hi:count per coordinate".into()))?
                .iter()
                .map(|s| s.parse::<GridAxis>())
                .collect::<Result<Vec<_>, _>>()?;
            let (t0, t1) = cfg.span()?;
            let report = conservation_scan(
                cfg.map_id()?,
                &cfg.params(),
                &GridSpec::new(axes),
                t0,
                t1,
                &cfg.integrator()?,
                &verify_options(&cfg)?,
            )?;
            output::emit(&output::json(&report), cfg.out.as_deref())?;
            Ok(pass_code(report.summary.pass))
        }
        Command::Compose { run, m } => {
            merge_run(&mut cfg, run);
            let x = initial_point(&cfg)?;
            let t1 = cfg.t1.ok_or_else(|| CliError::Usage("compose needs --t1".into()))?;
            let report =
                composition_check(cfg.map_id()?, &cfg.params(), m, &x, t1, &cfg.integrator()?, &verify_options(&cfg)?)?;
            output::emit(&output::json(&report), cfg.out.as_deref())?;
            Ok(pass_code(report.pass))
        }
        Command::HermiteCheck { m_max, out } => {
            let report = hermite_checks(m_max)?;
            output::emit(&output::json(&report), out.or(cfg.out).as_deref())?;
            Ok(pass_code(report.pass))
        }
        Command::Chain { m, a, c, seed, out } => {
            let report = chain_checks(m, a, c, seed.or(cfg.seed).unwrap_or(DEFAULT_SEED))?;
            output::emit(&output::json(&report), out.or(cfg.out).as_deref())?;
            Ok(pass_code(report.pass))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("mapflow: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("mapflow: numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
