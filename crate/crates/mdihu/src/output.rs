//! File writers. Every tabular file starts with a header row naming its
//! columns and units; numbers use the shortest round-trip formatting so
//! identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use mdihu_core::cases::diagnostics::Diagnostics;
use mdihu_core::cases::TimeUnit;
use mdihu_core::flux::Scheme;
use mdihu_core::grid::CartesianGrid;
use mdihu_core::solver::StepLog;

pub const FAILED_MARKER: &str = "FAILED";

/// Metadata written next to each saturation map.
#[derive(Debug, Clone, Serialize)]
pub struct MapMeta {
    pub field: &'static str,
    pub unit: &'static str,
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Grid rotation angle [rad].
    pub theta: f64,
    pub time_day: f64,
    pub time: f64,
    pub time_unit: &'static str,
    pub pvi: f64,
    pub layout: &'static str,
}

impl MapMeta {
    pub fn new(grid: &CartesianGrid, theta: f64, time_day: f64, time: f64, unit: TimeUnit, pvi: f64) -> Self {
        let spec = grid.spec();
        Self {
            field: "wetting saturation",
            unit: "-",
            nx: spec.nx,
            ny: spec.ny,
            x_min: spec.x_min,
            x_max: spec.x_max,
            y_min: spec.y_min,
            y_max: spec.y_max,
            theta,
            time_day,
            time,
            time_unit: unit.label(),
            pvi,
            layout: "ny rows of nx values after one header row; row 0 at minimum y, column 0 at minimum x",
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

/// Cell map as CSV: a header row, then `ny` rows of `nx` values.
pub fn map_csv(grid: &CartesianGrid, values: &[f64], name: &str, unit: &str) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    let header: Vec<String> = (0..grid.nx).map(|i| format!("{name}_i{i}[{unit}]")).collect();
    s.push_str(&header.join(","));
    s.push('\n');
    for row in values.chunks(grid.nx) {
        let mut first = true;
        for v in row {
            if !first {
                s.push(',');
            }
            first = false;
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}

/// Writes `<stem>.csv` and the sidecar `<stem>.json`.
pub fn write_saturation_map(dir: &Path, stem: &str, grid: &CartesianGrid, s: &[f64], meta: &MapMeta) -> io::Result<()> {
    fs::write(dir.join(format!("{stem}.csv")), map_csv(grid, s, "S_w", "-"))?;
    write_json(&dir.join(format!("{stem}.json")), meta)
}

/// Legacy-VTK structured points in ASCII with one scalar per cell.
pub fn vtk(grid: &CartesianGrid, title: &str, fields: &[(&str, &[f64])]) -> String {
    let n = grid.num_cells();
    let (x0, y0) = grid.center(0);
    let mut s = String::with_capacity(n * 20 * fields.len().max(1));
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", grid.nx, grid.ny);
    let _ = writeln!(s, "ORIGIN {x0} {y0} 0");
    let _ = writeln!(s, "SPACING {} {} 1", grid.dx, grid.dy);
    let _ = writeln!(s, "POINT_DATA {n}");
    for (name, values) in fields {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in values.iter() {
            let _ = writeln!(s, "{v}");
        }
    }
    s
}

pub fn write_vtk(path: &Path, grid: &CartesianGrid, title: &str, fields: &[(&str, &[f64])]) -> io::Result<()> {
    fs::write(path, vtk(grid, title, fields))
}

/// One row per accepted step: Newton counts next to the step diagnostics.
pub fn newton_log_csv(logs: &[StepLog], diag: &Diagnostics, unit: TimeUnit) -> String {
    let u = unit.label();
    let mut s = format!(
        "step,t[{u}],t[day],dt[day],iterations,wasted_iterations,chops,residual[-],cfl[-],countercurrent_fraction[-]\n"
    );
    for (log, d) in logs.iter().zip(&diag.steps) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            log.step, d.t_unit, log.t, log.dt, log.iterations, log.wasted_iterations, log.chops, log.residual, d.cfl, d.countercurrent
        );
    }
    s
}

/// Water cut of each producer per step.
pub fn water_cut_csv(diag: &Diagnostics, unit: TimeUnit) -> String {
    let u = unit.label();
    let mut s = format!("step,t[{u}],t[day],pvi[-]");
    for p in 0..diag.water_cut.len() {
        let _ = write!(s, ",water_cut_producer{p}[-]");
    }
    s.push('\n');
    for (k, d) in diag.steps.iter().enumerate() {
        let _ = write!(s, "{k},{},{},{}", d.t_unit, d.t, d.pvi);
        for series in &diag.water_cut {
            let _ = write!(s, ",{}", series[k]);
        }
        s.push('\n');
    }
    s
}

/// Everything known about one run, serialized as `diagnostics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub label: String,
    pub case: &'static str,
    pub scheme: &'static str,
    pub limiter: String,
    pub theta: f64,
    pub theta_label: String,
    pub cfl: &'static str,
    pub status: String,
    pub time_unit: &'static str,
    pub final_time_day: f64,
    pub total_iterations: usize,
    pub total_chops: usize,
    pub accepted_steps: usize,
    pub diagnostics: Diagnostics,
}

pub fn write_report(dir: &Path, report: &RunReport) -> io::Result<()> {
    write_json(&dir.join("diagnostics.json"), report)
}

pub fn write_failed_marker(dir: &Path, message: &str) -> io::Result<()> {
    fs::write(dir.join(FAILED_MARKER), format!("{message}\n"))
}

/// One line of the sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub label: String,
    pub case: &'static str,
    pub cfl: &'static str,
    pub theta: f64,
    pub theta_label: String,
    pub scheme: Scheme,
    pub limiter: String,
    pub total_iterations: usize,
    pub chops: usize,
    pub steps: usize,
    /// Against the unrotated run of the same scheme and CFL level.
    pub orientation_metric: Option<f64>,
    pub countercurrent_second_half: Option<f64>,
    pub status: String,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "label,case,cfl,theta[rad],theta_label,scheme,limiter,total_iterations,chops,steps,orientation_metric[-],countercurrent_fraction[-],status\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.label,
            r.case,
            r.cfl,
            r.theta,
            r.theta_label,
            r.scheme.name(),
            r.limiter,
            r.total_iterations,
            r.chops,
            r.steps,
            opt(r.orientation_metric),
            opt(r.countercurrent_second_half),
            r.status
        );
    }
    s
}

/// Newton totals laid out with one row per angle and one column block per
/// CFL level. Failed runs show `FAILED`.
pub fn iteration_table(rows: &[SummaryRow]) -> String {
    let mut cfls: Vec<&'static str> = Vec::new();
    let mut schemes: Vec<Scheme> = Vec::new();
    let mut angles: Vec<(f64, String)> = Vec::new();
    for r in rows {
        if !cfls.contains(&r.cfl) {
            cfls.push(r.cfl);
        }
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
        if !angles.iter().any(|(t, _)| *t == r.theta) {
            angles.push((r.theta, r.theta_label.clone()));
        }
    }
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));
    let width = 12;
    let mut s = String::new();
    let _ = write!(s, "{:<8}", "theta");
    for c in &cfls {
        let title = format!("{c} CFL");
        let _ = write!(s, " | {:^w$}", title, w = schemes.len() * (width + 1) - 1);
    }
    s.push('\n');
    let _ = write!(s, "{:<8}", "");
    for _ in &cfls {
        s.push_str(" |");
        for sc in &schemes {
            let _ = write!(s, " {:>width$}", sc.name());
        }
    }
    s.push('\n');
    for (theta, label) in &angles {
        let _ = write!(s, "{label:<8}");
        for c in &cfls {
            s.push_str(" |");
            for sc in &schemes {
                let cell = rows
                    .iter()
                    .find(|r| r.cfl == *c && r.scheme == *sc && r.theta == *theta)
                    .map(|r| if r.status == "ok" { r.total_iterations.to_string() } else { FAILED_MARKER.into() })
                    .unwrap_or_else(|| "-".into());
                let _ = write!(s, " {cell:>width$}");
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_summary(dir: &Path, rows: &[SummaryRow]) -> io::Result<()> {
    fs::write(dir.join("summary.csv"), summary_csv(rows))?;
    fs::write(dir.join("iterations.txt"), iteration_table(rows))?;
    write_json(&dir.join("summary.json"), &rows)
}
