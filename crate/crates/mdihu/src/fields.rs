//! Plain-text cell arrays: row-major (`j * nx + i`, row 0 at minimum y),
//! one value per token, tokens separated by whitespace or commas. Text
//! after `#` on a line is ignored.

use std::path::{Path, PathBuf};

use thiserror::Error;

use mdihu_core::cases::{Case, TimeUnit};
use mdihu_core::grid::{CartesianGrid, GridError};

use crate::config::FieldFiles;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: cannot read {token:?} as a number")]
    Token { path: PathBuf, line: usize, token: String },
    #[error("{path}: expected {expected} values, found {got}")]
    Length { path: PathBuf, expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub fn parse_array(text: &str, path: &Path) -> Result<Vec<f64>, FieldError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for token in body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let v = token.parse::<f64>().map_err(|_| FieldError::Token {
                path: path.to_path_buf(),
                line: i + 1,
                token: token.to_string(),
            })?;
            values.push(v);
        }
    }
    Ok(values)
}

/// Reads an array of exactly `expected` values.
pub fn read_array(path: &Path, expected: usize) -> Result<Vec<f64>, FieldError> {
    let text = std::fs::read_to_string(path).map_err(|source| FieldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let values = parse_array(&text, path)?;
    if values.len() != expected {
        return Err(FieldError::Length {
            path: path.to_path_buf(),
            expected,
            got: values.len(),
        });
    }
    Ok(values)
}

/// Replaces the case's permeability, porosity or depth by the given
/// arrays. Fixed pressures follow the depth change hydrostatically in the
/// non-wetting phase and PVI-based schedules follow the new pore volume;
/// well indices keep their built-in values.
pub fn apply_fields(case: &mut Case, files: &FieldFiles) -> Result<(), FieldError> {
    if files.is_empty() {
        return Ok(());
    }
    let n = case.grid.num_cells();
    let load = |p: &Option<PathBuf>, current: &[f64]| match p {
        Some(path) => read_array(path, n),
        None => Ok(current.to_vec()),
    };
    let perm = load(&files.permeability, &case.grid.perm)?;
    let poro = load(&files.porosity, &case.grid.poro)?;
    let depth = load(&files.depth, &case.grid.depth)?;
    let grid = CartesianGrid::from_fields(case.grid.spec(), perm, poro, depth)?;

    let gamma_nw = case.fluid.gamma_nw();
    let shift = |cell: usize| gamma_nw * (grid.depth[cell] - case.grid.depth[cell]);
    for fixed in case.wells.dirichlet.iter_mut().chain(case.wells.pressure_pin.iter_mut()) {
        let dp = shift(fixed.cell);
        fixed.pressure += dp;
        case.initial.p[fixed.cell] += dp;
    }
    case.disc_pore_volume = case
        .disc
        .iter()
        .enumerate()
        .filter(|(_, d)| **d)
        .map(|(c, _)| grid.pore_volume(c))
        .sum();
    if case.time_unit == TimeUnit::Pvi && case.injection_rate > 0.0 {
        let days_per_unit = case.disc_pore_volume / case.injection_rate;
        case.dt = case.dt_nominal * days_per_unit;
        case.t_end = case.t_end_nominal * days_per_unit;
    }
    case.grid = grid;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdihu_core::cases::{build_case, CaseId, CaseSpec, CflLevel};
    use std::io::Write;

    #[test]
    fn tokens_commas_and_comments() {
        let v = parse_array("# header\n1 2,3\n\n4.5e1\t-6 # tail\n", Path::new("x")).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0, 45.0, -6.0]);
        let e = parse_array("1 2\n3 x\n", Path::new("f.txt")).unwrap_err();
        assert_eq!(e.to_string(), "f.txt:2: cannot read \"x\" as a number");
    }

    #[test]
    fn replaced_fields_reach_the_grid() {
        let dir = tempfile::tempdir().unwrap();
        let mut case = build_case(&CaseSpec::new(CaseId::Heterogeneous, 0.0, CflLevel::Small).with_resolution(11)).unwrap();
        let n = case.grid.num_cells();
        let write = |name: &str, v: &dyn Fn(usize) -> f64| {
            let path = dir.path().join(name);
            let mut f = std::fs::File::create(&path).unwrap();
            for c in 0..n {
                writeln!(f, "{}", v(c)).unwrap();
            }
            path
        };
        let old_depth = case.grid.depth.clone();
        let old_pv = case.disc_pore_volume;
        let old_dt = case.dt;
        let files = FieldFiles {
            permeability: Some(write("k.txt", &|c| 100.0 + c as f64)),
            porosity: Some(write("phi.txt", &|_| 0.1)),
            depth: Some(write("z.txt", &|c| (c % 11) as f64)),
        };
        let fixed = case.wells.dirichlet[0];
        let p0 = case.initial.p[fixed.cell];
        apply_fields(&mut case, &files).unwrap();
        assert_eq!(case.grid.perm[5], 105.0);
        assert_eq!(case.grid.poro[7], 0.1);
        assert_eq!(case.grid.depth[13], 2.0);
        assert!((case.disc_pore_volume - 0.5 * old_pv).abs() < 1e-9 * old_pv);
        assert!((case.dt - 0.5 * old_dt).abs() < 1e-12 * old_dt);
        let moved = case.wells.dirichlet[0];
        let expect = fixed.pressure + case.fluid.gamma_nw() * (case.grid.depth[fixed.cell] - old_depth[fixed.cell]);
        assert!((moved.pressure - expect).abs() < 1e-9);
        assert!((case.initial.p[fixed.cell] - (p0 + moved.pressure - fixed.pressure)).abs() < 1e-9);
    }

    #[test]
    fn wrong_length_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.txt");
        std::fs::write(&path, "1 2 3").unwrap();
        let mut case = build_case(&CaseSpec::new(CaseId::ThreeWell, 0.0, CflLevel::Small).with_resolution(9)).unwrap();
        let files = FieldFiles {
            permeability: Some(path),
            ..Default::default()
        };
        let e = apply_fields(&mut case, &files).unwrap_err();
        assert!(matches!(e, FieldError::Length { expected: 81, got: 3, .. }));
    }
}
