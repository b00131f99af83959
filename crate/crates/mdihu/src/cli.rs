//! Command-line interface.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mdihu_core::verify::{suite, CheckReport, SuiteSize};

use crate::config::{parse_config, RunConfig};
use crate::output;
use crate::runner::{self, RunError};

pub const DEFAULT_OUT: &str = "mdihu-out";

#[derive(Debug, Parser)]
#[command(name = "mdihu", version, about = "Two-phase Darcy flow with multidimensional hybrid upwinding")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "MDIHU_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "MDIHU_THREADS")]
    pub threads: Option<usize>,
    /// Seed for the randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the single run described by the configuration.
    Run,
    /// Simulate every angle, CFL level and scheme of the configuration.
    Sweep,
    /// Run the property checks; exits nonzero if any fails.
    Verify {
        /// Random samples per check, overriding the configuration.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Write the grids and fields of the configured cases without simulating.
    DumpCase,
}

/// Settings merged from the command line and the configuration file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub out: PathBuf,
    pub threads: usize,
}

impl Resolved {
    pub fn new(common: &Common) -> Result<Self, RunError> {
        let mut config = match &common.config {
            Some(path) => parse_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = common.seed {
            config.seed = seed;
        }
        let out = common
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let threads = common
            .threads
            .or(config.threads)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from))
            .max(1);
        Ok(Self { config, out, threads })
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    faer::set_global_parallelism(faer::Par::Seq);
    let resolved = match Resolved::new(&cli.common) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run => run(&resolved),
        Command::Sweep => sweep(&resolved),
        Command::Verify { samples } => verify(&resolved, samples),
        Command::DumpCase => dump_case(&resolved),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn run(r: &Resolved) -> Result<bool, RunError> {
    let runs = r.config.expand()?;
    if runs.len() != 1 {
        return Err(crate::config::ConfigError::Invalid {
            field: "angles/cfl/schemes".into(),
            reason: format!("`run` needs exactly one run but the configuration expands to {}; use `sweep`", runs.len()),
        }
        .into());
    }
    std::fs::create_dir_all(&r.out).map_err(io_error(&r.out))?;
    let record = runner::execute(&runs[0], &r.config, &r.out)?;
    let d = &record.diagnostics;
    println!(
        "{}: {} iterations, {} chops, {} steps, max CFL {:.2}, mass balance {:.1e}, S in [{:.3e}, {:.6}]",
        runs[0].label(),
        record.total_iterations(),
        record.total_chops(),
        record.logs.len(),
        d.max_cfl,
        d.mass_balance_error,
        d.min_saturation,
        d.max_saturation
    );
    println!("artifacts in {}", record.dir.display());
    if let Some(msg) = &record.failure {
        eprintln!("run failed: {msg}");
    }
    Ok(record.succeeded())
}

fn sweep(r: &Resolved) -> Result<bool, RunError> {
    let outcome = runner::sweep(&r.config, &r.out, r.threads)?;
    print!("{}", output::iteration_table(&outcome.rows));
    for (label, e) in &outcome.errors {
        eprintln!("{label}: {e}");
    }
    for rec in outcome.records.iter().filter(|rec| !rec.succeeded()) {
        eprintln!("{}: {}", rec.descriptor.label(), rec.failure.as_deref().unwrap_or_default());
    }
    println!("summary in {}", r.out.join("summary.csv").display());
    Ok(outcome.all_succeeded())
}

pub fn verify_csv(reports: &[CheckReport]) -> String {
    let mut s = String::from("name,passed,samples,skipped,worst[-],tolerance[-],seed,offending\n");
    for rep in reports {
        let offending = rep.offending.as_deref().unwrap_or("").replace('"', "'");
        let _ = writeln!(
            s,
            "{},{},{},{},{:e},{:e},{},\"{}\"",
            rep.name,
            rep.passed,
            rep.samples,
            rep.skipped,
            rep.worst,
            rep.tolerance,
            rep.seed.map(|v| v.to_string()).unwrap_or_default(),
            offending
        );
    }
    s
}

fn verify(r: &Resolved, samples: Option<usize>) -> Result<bool, RunError> {
    let mut size = SuiteSize::new(r.config.verify.samples, r.config.verify.ratios);
    if let Some(n) = samples {
        size = SuiteSize::new(n.max(1), size.ratios.min(n.max(1)));
    }
    let reports = suite(size, r.config.seed);
    for rep in &reports {
        println!("{rep}");
    }
    std::fs::create_dir_all(&r.out).map_err(io_error(&r.out))?;
    let path = r.out.join("verify.csv");
    std::fs::write(&path, verify_csv(&reports)).map_err(io_error(&path))?;
    let failed = reports.iter().filter(|x| !x.passed).count();
    println!("{} checks, {} failed; report in {}", reports.len(), failed, path.display());
    Ok(failed == 0)
}

#[derive(Debug, Serialize)]
struct CaseDump {
    case: &'static str,
    theta: f64,
    cfl: &'static str,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    thickness: f64,
    time_unit: &'static str,
    dt: f64,
    t_end: f64,
    dt_day: f64,
    t_end_day: f64,
    injection_rate: f64,
    disc_radius: f64,
    disc_pore_volume: f64,
    injectors: Vec<(usize, f64)>,
    producers: Vec<(usize, f64, f64)>,
    fixed_pressure_cells: usize,
    pressure_pin: Option<usize>,
}

fn dump_case(r: &Resolved) -> Result<bool, RunError> {
    let runs = r.config.expand()?;
    let mut seen = Vec::new();
    for desc in &runs {
        let key = format!("{}_{}_theta{}", desc.spec.params.id().name(), desc.spec.cfl.name(), desc.angle.label().replace('/', "_"));
        if seen.contains(&key) {
            continue;
        }
        seen.push(key.clone());
        let case = runner::prepare_case(desc, &r.config)?;
        let dir = r.out.join(&key);
        std::fs::create_dir_all(&dir).map_err(io_error(&dir))?;
        let g = &case.grid;
        let disc: Vec<f64> = case.disc.iter().map(|d| if *d { 1.0 } else { 0.0 }).collect();
        let write = |name: &str, text: String| std::fs::write(dir.join(name), text).map_err(io_error(&dir));
        write("permeability.csv", output::map_csv(g, &g.perm, "k", "mD"))?;
        write("porosity.csv", output::map_csv(g, &g.poro, "phi", "-"))?;
        write("depth.csv", output::map_csv(g, &g.depth, "z", "ft"))?;
        write("initial_saturation.csv", output::map_csv(g, &case.initial.s, "S_w", "-"))?;
        write("initial_pressure.csv", output::map_csv(g, &case.initial.p, "p", "psi"))?;
        write("disc.csv", output::map_csv(g, &disc, "disc", "-"))?;
        output::write_vtk(
            &dir.join("case.vtk"),
            g,
            &key,
            &[
                ("permeability", &g.perm),
                ("porosity", &g.poro),
                ("depth", &g.depth),
                ("saturation", &case.initial.s),
                ("pressure", &case.initial.p),
                ("disc", &disc),
            ],
        )
        .map_err(io_error(&dir))?;
        let dump = CaseDump {
            case: case.id.name(),
            theta: case.theta,
            cfl: desc.spec.cfl.name(),
            nx: g.nx,
            ny: g.ny,
            dx: g.dx,
            dy: g.dy,
            thickness: g.thickness,
            time_unit: case.time_unit.label(),
            dt: case.dt_nominal,
            t_end: case.t_end_nominal,
            dt_day: case.dt,
            t_end_day: case.t_end,
            injection_rate: case.injection_rate,
            disc_radius: case.disc_radius,
            disc_pore_volume: case.disc_pore_volume,
            injectors: case.wells.injectors.iter().map(|w| (w.cell, w.rate)).collect(),
            producers: case.wells.producers.iter().map(|w| (w.cell, w.bhp, w.well_index)).collect(),
            fixed_pressure_cells: case.wells.dirichlet.len(),
            pressure_pin: case.wells.pressure_pin.map(|p| p.cell),
        };
        let mut json = serde_json::to_string_pretty(&dump).map_err(|e| io_error(&dir)(std::io::Error::other(e)))?;
        json.push('\n');
        write("case.json", json)?;
        println!("{}", dir.display());
    }
    Ok(true)
}
