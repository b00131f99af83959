//! JSON run configuration. Every field has a default, so a document only
//! states deviations from the benchmark setup.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use mdihu_core::cases::{CaseId, CaseParams, CaseSpec, CflLevel};
use mdihu_core::flux::{GammaConfig, Limiter, Scheme, SchemeConfig};
use mdihu_core::solver::NewtonConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Rotation angle in radians. Reads a number or an expression such as
/// `"pi/12"` or `"3*pi/8"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(pub f64);

impl Angle {
    /// Parses `a`, `pi`, `pi/b`, `a*pi`, `a*pi/b` or `a/b`.
    pub fn parse(s: &str) -> Option<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n, Some(d.parse::<f64>().ok()?)),
            None => (t.as_str(), None),
        };
        let num = match num.strip_suffix("pi") {
            Some("") => PI,
            Some(coef) => coef.strip_suffix('*').unwrap_or(coef).parse::<f64>().ok()? * PI,
            None => num.parse::<f64>().ok()?,
        };
        let v = match den {
            Some(d) if d != 0.0 => num / d,
            Some(_) => return None,
            None => num,
        };
        v.is_finite().then_some(Angle(v))
    }

    /// Short label: `pi/12`-style when the angle is a simple fraction of pi.
    pub fn label(self) -> String {
        if self.0 == 0.0 {
            return "0".into();
        }
        for den in 1..=48u32 {
            let num = self.0 / PI * den as f64;
            if (num - num.round()).abs() < 1e-9 && num.round() >= 1.0 {
                let n = num.round() as u32;
                let g = gcd(n, den);
                let (n, d) = (n / g, den / g);
                let head = if n == 1 { "pi".to_string() } else { format!("{n}pi") };
                return if d == 1 { head } else { format!("{head}/{d}") };
            }
        }
        format!("{:.6}", self.0)
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an angle in radians or an expression like \"pi/12\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Angle, E> {
                Ok(Angle(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Angle, E> {
                Ok(Angle(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Angle, E> {
                Angle::parse(v).ok_or_else(|| E::custom(format!("cannot read angle {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

/// A scheme name, optionally with an explicit limiter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeEntry {
    Name(Scheme),
    Full {
        scheme: Scheme,
        #[serde(default)]
        limiter: Option<Limiter>,
    },
}

impl SchemeEntry {
    pub fn scheme(self) -> Scheme {
        match self {
            SchemeEntry::Name(s) | SchemeEntry::Full { scheme: s, .. } => s,
        }
    }

    pub fn limiter(self) -> Limiter {
        match self {
            SchemeEntry::Full {
                scheme,
                limiter: Some(l),
            } if scheme.is_multid() => l,
            other => other.scheme().default_limiter(),
        }
    }
}

/// Newton controls; the nominal step comes from the case schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSettings {
    pub max_iters: usize,
    pub ds_max: f64,
    pub tol: f64,
    pub chop_factor: f64,
    pub min_dt_fraction: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        let d = NewtonConfig::default();
        Self {
            max_iters: d.max_iters,
            ds_max: d.ds_max,
            tol: d.tol,
            chop_factor: d.chop_factor,
            min_dt_fraction: d.min_dt_fraction,
        }
    }
}

impl NewtonSettings {
    pub fn to_newton(self) -> NewtonConfig {
        NewtonConfig {
            max_iters: self.max_iters,
            ds_max: self.ds_max,
            tol: self.tol,
            chop_factor: self.chop_factor,
            min_dt_fraction: self.min_dt_fraction,
            ..NewtonConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Write legacy-VTK copies of the saturation maps.
    pub vtk: bool,
    /// Extra saturation snapshots, in the case's time unit.
    pub snapshots: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            vtk: true,
            snapshots: Vec::new(),
        }
    }
}

/// Plain-text arrays replacing the built-in cell fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldFiles {
    pub permeability: Option<PathBuf>,
    pub porosity: Option<PathBuf>,
    pub depth: Option<PathBuf>,
}

impl FieldFiles {
    pub fn is_empty(&self) -> bool {
        self.permeability.is_none() && self.porosity.is_none() && self.depth.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random regions per sampled check.
    pub samples: usize,
    /// Limiter ratios for the SMU4 symmetry check.
    pub ratios: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            ratios: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseId,
    /// Overrides of the case constants, keyed by the case's parameter names.
    pub params: Option<serde_json::Value>,
    /// Cells per side.
    pub resolution: Option<usize>,
    pub angles: Vec<Angle>,
    pub cfl: Vec<CflLevel>,
    pub schemes: Vec<SchemeEntry>,
    pub freeze_omega: bool,
    pub gamma: GammaConfig,
    pub newton: NewtonSettings,
    pub output: OutputConfig,
    pub fields: FieldFiles,
    pub seed: u64,
    pub verify: VerifyConfig,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: CaseId::ThreeWell,
            params: None,
            resolution: None,
            angles: vec![Angle(0.0)],
            cfl: vec![CflLevel::Small],
            schemes: vec![SchemeEntry::Name(Scheme::MultiDIhu)],
            freeze_omega: false,
            gamma: GammaConfig::default(),
            newton: NewtonSettings::default(),
            output: OutputConfig::default(),
            fields: FieldFiles::default(),
            seed: 0,
            verify: VerifyConfig::default(),
            out: None,
            threads: None,
        }
    }
}

/// One simulation of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunDescriptor {
    pub spec: CaseSpec,
    pub angle: Angle,
    pub scheme: SchemeConfig,
}

impl RunDescriptor {
    /// Directory-safe name, unique within a sweep.
    pub fn label(&self) -> String {
        let angle = self.angle.label().replace('/', "_");
        format!(
            "{}_{}_{}_theta{}",
            self.spec.params.id().name(),
            self.spec.cfl.name(),
            scheme_key(self.scheme.scheme),
            angle
        )
    }
}

pub fn scheme_key(s: Scheme) -> &'static str {
    match s {
        Scheme::Ppu1d => "ppu_1d",
        Scheme::Ihu1d => "ihu_1d",
        Scheme::MultiDPpu => "multid_ppu",
        Scheme::MultiDIhu => "multid_ihu",
    }
}

/// Reads and validates a configuration file. An empty file yields the
/// defaults.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_json(&text)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = if text.trim().is_empty() {
            RunConfig::default()
        } else {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Case constants with the overrides applied.
    pub fn case_params(&self) -> Result<CaseParams, ConfigError> {
        let mut params = CaseParams::default_for(self.case);
        if let Some(v) = &self.params {
            let err = |e: serde_json::Error| ConfigError::invalid("params", e.to_string());
            params = match self.case {
                CaseId::ThreeWell => CaseParams::ThreeWell(serde_json::from_value(v.clone()).map_err(err)?),
                CaseId::Heterogeneous => CaseParams::Heterogeneous(serde_json::from_value(v.clone()).map_err(err)?),
                CaseId::Segregation => CaseParams::Segregation(serde_json::from_value(v.clone()).map_err(err)?),
            };
        }
        if let Some(n) = self.resolution {
            params.set_resolution(n);
        }
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schemes.is_empty() {
            return Err(ConfigError::invalid("schemes", "at least one scheme is required"));
        }
        if self.angles.is_empty() {
            return Err(ConfigError::invalid("angles", "at least one angle is required"));
        }
        if self.cfl.is_empty() {
            return Err(ConfigError::invalid("cfl", "at least one CFL level is required"));
        }
        for (i, a) in self.angles.iter().enumerate() {
            if !(a.0 >= 0.0 && a.0 < PI / 2.0) {
                return Err(ConfigError::invalid(
                    format!("angles[{i}]"),
                    format!("{} rad is outside [0, pi/2)", a.0),
                ));
            }
        }
        let params = self.case_params()?;
        if params.resolution() < 9 {
            return Err(ConfigError::invalid("resolution", "at least 9 cells per side are required"));
        }
        if let Some(0) = self.threads {
            return Err(ConfigError::invalid("threads", "must be positive"));
        }
        if !(self.gamma.scale > 0.0) || !(self.gamma.flat >= 0.0) {
            return Err(ConfigError::invalid("gamma", "scale must be positive and flat nonnegative"));
        }
        if self.verify.samples == 0 || self.verify.ratios == 0 {
            return Err(ConfigError::invalid("verify", "sample counts must be positive"));
        }
        if let Some((i, t)) = self.output.snapshots.iter().enumerate().find(|(_, t)| !(**t >= 0.0)) {
            return Err(ConfigError::invalid(format!("output.snapshots[{i}]"), format!("{t} is not a valid time")));
        }
        let mut newton = self.newton.to_newton();
        newton.dt = 1.0;
        newton
            .validate()
            .map_err(|e| ConfigError::invalid("newton", e.to_string()))?;
        Ok(())
    }

    /// Scheme settings for one entry of `schemes`.
    pub fn scheme_config(&self, entry: SchemeEntry) -> SchemeConfig {
        let mut c = SchemeConfig::new(entry.scheme())
            .with_limiter(entry.limiter())
            .with_freeze(self.freeze_omega);
        c.gamma = self.gamma;
        c
    }

    /// The cartesian product CFL x angle x scheme, in that nesting order.
    pub fn expand(&self) -> Result<Vec<RunDescriptor>, ConfigError> {
        let params = self.case_params()?;
        let mut runs = Vec::with_capacity(self.cfl.len() * self.angles.len() * self.schemes.len());
        for &cfl in &self.cfl {
            for &angle in &self.angles {
                for &entry in &self.schemes {
                    runs.push(RunDescriptor {
                        spec: CaseSpec {
                            params: params.clone(),
                            theta: angle.0,
                            cfl,
                        },
                        angle,
                        scheme: self.scheme_config(entry),
                    });
                }
            }
        }
        Ok(runs)
    }
}
