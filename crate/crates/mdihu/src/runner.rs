//! Single runs and sweeps with artifact output.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use mdihu_core::cases::diagnostics::{orientation_metric, Diagnostics, Recorder};
use mdihu_core::cases::run::newton_config;
use mdihu_core::cases::{build_case, Case, CaseError};
use mdihu_core::solver::{advance, SolverError, StepLog};

use crate::config::{ConfigError, RunConfig, RunDescriptor};
use crate::fields::{apply_fields, FieldError};
use crate::output::{self, MapMeta, RunReport, SummaryRow};
use crate::sparse::SparseLu;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Fields(#[from] FieldError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Builds the case of `desc` including any imported fields.
pub fn prepare_case(desc: &RunDescriptor, cfg: &RunConfig) -> Result<Case, RunError> {
    let mut case = build_case(&desc.spec)?;
    apply_fields(&mut case, &cfg.fields)?;
    Ok(case)
}

/// Result of one simulation as kept by a sweep.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub descriptor: RunDescriptor,
    pub dir: PathBuf,
    /// `None` on success, otherwise the abort reason.
    pub failure: Option<String>,
    pub logs: Vec<StepLog>,
    pub diagnostics: Diagnostics,
    pub final_saturation: Vec<f64>,
    pub case: Case,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn total_iterations(&self) -> usize {
        self.logs.iter().map(|l| l.iterations + l.wasted_iterations).sum()
    }

    pub fn total_chops(&self) -> usize {
        self.logs.iter().map(|l| l.chops).sum()
    }
}

/// Simulates one descriptor and writes its artifacts under
/// `root/<label>/`. A solver abort still writes everything gathered up to
/// the last accepted step, plus a `FAILED` marker.
pub fn execute(desc: &RunDescriptor, cfg: &RunConfig, root: &Path) -> Result<RunRecord, RunError> {
    let dir = root.join(desc.label());
    std::fs::create_dir_all(&dir).map_err(io_at(&dir))?;
    let _ = std::fs::remove_file(dir.join(output::FAILED_MARKER));
    let case = prepare_case(desc, cfg)?;
    let problem = case.problem(desc.scheme).map_err(CaseError::from)?;
    let newton = newton_config(&case, &cfg.newton.to_newton());
    let snapshot_days: Vec<f64> = cfg
        .output
        .snapshots
        .iter()
        .map(|t| t * case.t_end / case.t_end_nominal)
        .collect();

    let mut state = case.initial.clone();
    let mut recorder = Recorder::new(&case, &problem, &state);
    let mut logs = Vec::new();
    let mut snapshots: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    let mut lin = SparseLu::new();
    let result = advance(&problem, &mut state, case.t_end, &newton, &mut lin, |log, st, work| {
        recorder.record(&case, &problem, log, st, work);
        logs.push(*log);
        for (k, &t) in snapshot_days.iter().enumerate() {
            let due = log.t + 1e-9 * log.dt >= t;
            if due && !snapshots.iter().any(|(j, _, _)| *j == k) {
                snapshots.push((k, log.t, st.s.clone()));
            }
        }
    });
    let (diagnostics, failure) = match (result, recorder.finish()) {
        (Ok(_), Ok(d)) => (d, None),
        (Err(e), Ok(d)) => (d, Some(e.to_string())),
        (Ok(_), Err(e)) => (Diagnostics::default(), Some(SolverError::from(e).to_string())),
        (Err(e), Err(_)) => (Diagnostics::default(), Some(e.to_string())),
    };

    let t_day = logs.last().map_or(0.0, |l| l.t);
    let pvi = diagnostics.steps.last().map_or(0.0, |s| s.pvi);
    let meta = MapMeta::new(&case.grid, desc.spec.theta, t_day, case.to_unit(t_day), case.time_unit, pvi);
    output::write_saturation_map(&dir, "saturation", &case.grid, &state.s, &meta).map_err(io_at(&dir))?;
    if cfg.output.vtk {
        let title = format!("{} S_w at t = {} {}", desc.label(), meta.time, meta.time_unit);
        output::write_vtk(&dir.join("saturation.vtk"), &case.grid, &title, &[("saturation", &state.s)])
            .map_err(io_at(&dir))?;
    }
    for (k, t, s) in &snapshots {
        let step = diagnostics.steps.iter().find(|d| d.t == *t);
        let meta = MapMeta::new(
            &case.grid,
            desc.spec.theta,
            *t,
            case.to_unit(*t),
            case.time_unit,
            step.map_or(0.0, |d| d.pvi),
        );
        output::write_saturation_map(&dir, &format!("saturation_snapshot{k}"), &case.grid, s, &meta).map_err(io_at(&dir))?;
    }
    let csv = |name: &str, text: String| std::fs::write(dir.join(name), text).map_err(io_at(&dir));
    csv("newton_log.csv", output::newton_log_csv(&logs, &diagnostics, case.time_unit))?;
    csv("water_cut.csv", output::water_cut_csv(&diagnostics, case.time_unit))?;
    let record = RunRecord {
        descriptor: desc.clone(),
        dir: dir.clone(),
        failure,
        logs,
        diagnostics,
        final_saturation: state.s,
        case,
    };
    output::write_report(&dir, &report(&record)).map_err(io_at(&dir))?;
    if let Some(msg) = &record.failure {
        output::write_failed_marker(&dir, msg).map_err(io_at(&dir))?;
    }
    Ok(record)
}

fn report(r: &RunRecord) -> RunReport {
    let d = &r.descriptor;
    RunReport {
        label: d.label(),
        case: d.spec.params.id().name(),
        scheme: d.scheme.scheme.name(),
        limiter: format!("{:?}", d.scheme.limiter).to_lowercase(),
        theta: d.spec.theta,
        theta_label: d.angle.label(),
        cfl: d.spec.cfl.name(),
        status: status(r),
        time_unit: r.case.time_unit.label(),
        final_time_day: r.logs.last().map_or(0.0, |l| l.t),
        total_iterations: r.total_iterations(),
        total_chops: r.total_chops(),
        accepted_steps: r.logs.len(),
        diagnostics: r.diagnostics.clone(),
    }
}

fn status(r: &RunRecord) -> String {
    r.failure.clone().unwrap_or_else(|| "ok".into())
}

/// Summary rows in descriptor order. Rotated runs are compared with the
/// unrotated run of the same scheme and CFL level when one is present.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    records
        .iter()
        .map(|r| {
            let d = &r.descriptor;
            let reference = records.iter().find(|o| {
                o.descriptor.spec.theta == 0.0
                    && o.descriptor.spec.cfl == d.spec.cfl
                    && o.descriptor.scheme == d.scheme
                    && o.succeeded()
            });
            let orientation = match reference {
                Some(z) if d.spec.theta != 0.0 && r.succeeded() => Some(orientation_metric(
                    &r.case.grid,
                    &z.case.disc,
                    &r.final_saturation,
                    &z.final_saturation,
                    d.spec.theta,
                )),
                _ => None,
            };
            SummaryRow {
                label: d.label(),
                case: d.spec.params.id().name(),
                cfl: d.spec.cfl.name(),
                theta: d.spec.theta,
                theta_label: d.angle.label(),
                scheme: d.scheme.scheme,
                limiter: format!("{:?}", d.scheme.limiter).to_lowercase(),
                total_iterations: r.total_iterations(),
                chops: r.total_chops(),
                steps: r.logs.len(),
                orientation_metric: orientation,
                countercurrent_second_half: r.succeeded().then_some(r.diagnostics.countercurrent_second_half),
                status: status(r),
            }
        })
        .collect()
}

/// Runs every descriptor on at most `threads` workers. Results come back in
/// descriptor order whatever the scheduling.
pub fn run_all(runs: &[RunDescriptor], cfg: &RunConfig, root: &Path, threads: usize) -> Vec<Result<RunRecord, RunError>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RunRecord, RunError>>>> = Mutex::new((0..runs.len()).map(|_| None).collect());
    let workers = threads.max(1).min(runs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(desc) = runs.get(i) else { break };
                let result = execute(desc, cfg, root);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers have finished")
        .into_iter()
        .map(|r| r.expect("every descriptor was claimed"))
        .collect()
}

/// Outcome of a sweep: the records plus the errors that prevented a run
/// from starting.
#[derive(Debug)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub errors: Vec<(String, RunError)>,
    pub rows: Vec<SummaryRow>,
}

impl SweepOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.errors.is_empty() && self.records.iter().all(RunRecord::succeeded)
    }
}

/// Expands the configuration, runs everything and writes the summary files.
pub fn sweep(cfg: &RunConfig, root: &Path, threads: usize) -> Result<SweepOutcome, RunError> {
    let runs = cfg.expand()?;
    std::fs::create_dir_all(root).map_err(io_at(root))?;
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (desc, result) in runs.iter().zip(run_all(&runs, cfg, root, threads)) {
        match result {
            Ok(r) => records.push(r),
            Err(e) => errors.push((desc.label(), e)),
        }
    }
    let rows = summarize(&records);
    output::write_summary(root, &rows).map_err(io_at(root))?;
    Ok(SweepOutcome { records, errors, rows })
}
