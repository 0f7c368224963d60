//! Scenario files.
//!
//! A scenario is a TOML document with a fixed schema; unknown keys are
//! rejected. Example:
//!
//! ```toml
//! schema_version = 1
//!
//! [model]
//! kind = "b-family"
//! b = 2.0
//!
//! [domain]
//! kind = "line"
//! half_length = 20.0
//! n = 4096
//!
//! [initial]
//! profile = "peakon"
//! c = 1.0
//!
//! [solver]
//! t_end = 1.0
//! cfl = 0.3
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use peakonlab_core::{
    read_csv, Domain, Field, Grid, ModelSpec, PeakonState, ProbeTolerances, SolverConfig,
    StencilOrder, TimeStep,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unsupported schema_version {found}, expected {SCHEMA_VERSION}")]
    SchemaVersion { found: u32 },
    #[error("[{section}] {message}")]
    Invalid {
        section: &'static str,
        message: String,
    },
}

fn invalid(section: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        section,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub model: ModelSection,
    pub domain: DomainSection,
    pub initial: InitialProfile,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub peakon: PeakonSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory the scenario was loaded from; relative paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelSection {
    #[serde(rename = "b-family")]
    BFamily { b: f64 },
    #[serde(rename = "general")]
    General { g: String, h: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSection {
    Line { half_length: f64, n: usize },
    Circle { n: usize },
}

/// Named initial-condition profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Zero,
    /// `c e^{−|x − x0|}` (line).
    Peakon {
        c: f64,
        #[serde(default)]
        x0: f64,
    },
    /// `Σ pᵢ e^{−|x − qᵢ|}` (line).
    Multipeakon {
        q: Vec<f64>,
        p: Vec<f64>,
    },
    /// `amplitude · exp(−((x − center)/width)²)`.
    Gaussian {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `offset + amplitude · cos(2πkx)` (circle).
    Cosine {
        k: u32,
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude · sech(θx)`, whose tails decay like `e^{−θ|x|}` (line).
    DecayProfile {
        theta: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// A snapshot CSV with header `x,u`.
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub t_end: f64,
    /// Fixed step; mutually exclusive with `cfl`.
    pub dt: Option<f64>,
    pub cfl: Option<f64>,
    pub dt_max: Option<f64>,
    pub dealias: bool,
    /// Finite-difference order on the line: 2 or 4.
    pub stencil_order: u32,
    pub snapshot_every: usize,
    pub blowup_threshold: f64,
    pub decay_window: Option<[f64; 2]>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            t_end: d.t_end,
            dt: None,
            cfl: None,
            dt_max: None,
            dealias: d.dealias,
            stencil_order: 4,
            snapshot_every: d.snapshot_every,
            blowup_threshold: d.blowup_threshold,
            decay_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub eps: f64,
    pub min_width: Option<f64>,
    pub mass_tol: Option<f64>,
    pub ineq_tol: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection {
            eps: 1e-8,
            min_width: None,
            mass_tol: None,
            ineq_tol: ProbeTolerances::default().ineq_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakonSection {
    pub dt: f64,
    /// Write a trajectory row every this many ODE steps.
    pub record_every: usize,
    /// Also run the PDE from the same data and record the differences.
    pub compare_pde: bool,
}

impl Default for PeakonSection {
    fn default() -> Self {
        PeakonSection {
            dt: 1e-3,
            record_every: 10,
            compare_pde: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s = Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    /// Parses and validates a scenario held in memory.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<scenario>"),
            message: e.to_string(),
        })?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: s.schema_version,
            });
        }
        s.model()?;
        s.grid()?;
        s.solver_config()?;
        s.probe_tolerances()?;
        Ok(s)
    }

    pub fn model(&self) -> Result<ModelSpec, ConfigError> {
        let m = match &self.model {
            ModelSection::BFamily { b } => ModelSpec::b_family(*b),
            ModelSection::General { g, h } => ModelSpec::general_by_name(g, h),
        };
        m.map_err(|e| invalid("model", e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let g = match self.domain {
            DomainSection::Line { half_length, n } => Grid::line(half_length, n),
            DomainSection::Circle { n } => Grid::circle(n),
        };
        g.map_err(|e| invalid("domain", e.to_string()))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        let step = match (s.dt, s.cfl) {
            (Some(_), Some(_)) => return Err(invalid("solver", "set either dt or cfl, not both")),
            (Some(dt), None) => {
                if s.dt_max.is_some() {
                    return Err(invalid("solver", "dt_max only applies with cfl"));
                }
                TimeStep::Fixed(dt)
            }
            (None, cfl) => {
                let TimeStep::Cfl {
                    cfl: c0,
                    dt_max: m0,
                } = SolverConfig::default().step
                else {
                    unreachable!("default step is CFL-controlled")
                };
                TimeStep::Cfl {
                    cfl: cfl.unwrap_or(c0),
                    dt_max: s.dt_max.unwrap_or(m0),
                }
            }
        };
        let stencil = StencilOrder::from_order(s.stencil_order).ok_or_else(|| {
            invalid(
                "solver",
                format!("stencil_order must be 2 or 4, got {}", s.stencil_order),
            )
        })?;
        let cfg = SolverConfig {
            t_end: s.t_end,
            step,
            dealias: s.dealias,
            stencil,
            snapshot_every: s.snapshot_every,
            blowup_threshold: s.blowup_threshold,
            decay_window: s.decay_window.map(|[a, b]| (a, b)),
        };
        cfg.validate()
            .map_err(|e| invalid("solver", e.to_string()))?;
        Ok(cfg)
    }

    pub fn probe_tolerances(&self) -> Result<ProbeTolerances, ConfigError> {
        let p = &self.probe;
        if !(p.eps > 0.0) {
            return Err(invalid(
                "probe",
                format!("eps must be positive, got {}", p.eps),
            ));
        }
        if let Some(m) = p.mass_tol {
            if !(m >= 0.0) {
                return Err(invalid(
                    "probe",
                    format!("mass_tol must be non-negative, got {m}"),
                ));
            }
        }
        if !(p.ineq_tol >= 0.0) {
            return Err(invalid(
                "probe",
                format!("ineq_tol must be non-negative, got {}", p.ineq_tol),
            ));
        }
        Ok(ProbeTolerances {
            mass_tol: p.mass_tol,
            ineq_tol: p.ineq_tol,
        })
    }

    /// Minimum vanishing-interval width: configured, or 8 cells.
    pub fn min_width(&self, grid: &Grid) -> f64 {
        self.probe.min_width.unwrap_or(8.0 * grid.dx())
    }

    /// Peakon ODE state for `peakon` and `multipeakon` profiles.
    pub fn peakon_state(&self) -> Result<PeakonState, ConfigError> {
        let state = match &self.initial {
            InitialProfile::Peakon { c, x0 } => Ok(PeakonState::single(*x0, *c)),
            InitialProfile::Multipeakon { q, p } => {
                if q.is_empty() {
                    return Err(invalid("initial", "peakon list is empty"));
                }
                PeakonState::new(q.clone(), p.clone())
            }
            _ => return Err(invalid("initial", "profile must be peakon or multipeakon")),
        };
        state.map_err(|e| invalid("initial", e.to_string()))
    }

    /// Samples the initial profile on the scenario grid.
    pub fn initial_field(&self) -> Result<Field, ConfigError> {
        let grid = self.grid()?;
        let line_only = |name: &str| {
            if grid.domain().is_periodic() {
                Err(invalid(
                    "initial",
                    format!("profile {name} needs a line domain"),
                ))
            } else {
                Ok(())
            }
        };
        let sampled = match &self.initial {
            InitialProfile::Zero => Ok(grid.zeros()),
            InitialProfile::Peakon { .. } | InitialProfile::Multipeakon { .. } => {
                line_only("peakon")?;
                let state = self.peakon_state()?;
                grid.sample(|x| state.profile(x))
            }
            InitialProfile::Gaussian {
                center,
                width,
                amplitude,
            } => {
                if !(*width > 0.0) {
                    return Err(invalid("initial", "gaussian width must be positive"));
                }
                grid.sample(|x| amplitude * (-((x - center) / width).powi(2)).exp())
            }
            InitialProfile::Cosine {
                k,
                amplitude,
                offset,
            } => {
                if !grid.domain().is_periodic() {
                    return Err(invalid("initial", "profile cosine needs a circle domain"));
                }
                let w = 2.0 * std::f64::consts::PI * f64::from(*k);
                grid.sample(|x| offset + amplitude * (w * x).cos())
            }
            InitialProfile::DecayProfile { theta, amplitude } => {
                line_only("decay_profile")?;
                if !(*theta > 0.0) {
                    return Err(invalid("initial", "decay_profile theta must be positive"));
                }
                grid.sample(|x| amplitude / (theta * x).cosh())
            }
            InitialProfile::File { path } => {
                let path = self.base_dir.join(path);
                let file = fs::File::open(&path).map_err(|e| {
                    invalid("initial", format!("cannot open {}: {e}", path.display()))
                })?;
                let u = read_csv(file)
                    .map_err(|e| invalid("initial", format!("{}: {e}", path.display())))?;
                if *u.grid() != grid {
                    return Err(invalid(
                        "initial",
                        format!("{} does not match the [domain] grid", path.display()),
                    ));
                }
                Ok(u)
            }
        };
        sampled.map_err(|e| invalid("initial", e.to_string()))
    }

    pub fn domain(&self) -> Result<Domain, ConfigError> {
        Ok(self.grid()?.domain())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
schema_version = 1
[model]
kind = "b-family"
b = 2.0
[domain]
kind = "line"
half_length = 20.0
n = 256
[initial]
profile = "peakon"
c = 1.0
"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(BASIC).unwrap();
        assert_eq!(s.model, ModelSection::BFamily { b: 2.0 });
        assert_eq!(s.initial, InitialProfile::Peakon { c: 1.0, x0: 0.0 });
        assert_eq!(s.solver, SolverSection::default());
        let u = s.initial_field().unwrap();
        assert_eq!(u.values()[128], 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASIC.replace(
            "c = 1.0",
            "c = 1.0
speed = 2.0",
        );
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("speed"), "{err}");
        let text = format!(
            "{BASIC}
[solver]
tend = 1.0
"
        );
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = format!("{BASIC}[solver]\nt_end = \"soon\"\n");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 14") && err.contains("t_end"), "{err}");
        // Tagged tables are reported at their header.
        let text = BASIC.replace("b = 2.0", "b = \"two\"");
        let err = Scenario::parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("f64"), "{err}");
    }

    #[test]
    fn schema_version_is_checked() {
        let text = BASIC.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(
            Scenario::parse(&text),
            Err(ConfigError::SchemaVersion { found: 2 })
        ));
    }

    #[test]
    fn invalid_values_name_their_section() {
        let text = BASIC.replace("b = 2.0", "b = 4.0");
        assert!(Scenario::parse(&text)
            .unwrap_err()
            .to_string()
            .starts_with("[model]"));
        let text = format!(
            "{BASIC}
[solver]
dt = 0.1
cfl = 0.3
"
        );
        assert!(Scenario::parse(&text)
            .unwrap_err()
            .to_string()
            .starts_with("[solver]"));
        let text = format!(
            "{BASIC}
[solver]
stencil_order = 3
"
        );
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn general_models_use_the_registry() {
        let text = BASIC.replace(
            "kind = \"b-family\"\nb = 2.0",
            "kind = \"general\"\ng = \"burgers\"\nh = \"camassa_holm\"",
        );
        let s = Scenario::parse(&text).unwrap();
        assert!(matches!(
            s.model().unwrap(),
            peakonlab_core::ModelSpec::General { .. }
        ));
        let text = text.replace("camassa_holm", "nope");
        assert!(Scenario::parse(&text).is_err());
    }

    #[test]
    fn profiles_check_their_domain() {
        let circle = BASIC.replace(
            "kind = \"line\"\nhalf_length = 20.0\nn = 256",
            "kind = \"circle\"\nn = 64",
        );
        let s = Scenario::parse(&circle).unwrap();
        assert!(s.initial_field().is_err());
        let cos = circle.replace(
            "profile = \"peakon\"\nc = 1.0",
            "profile = \"cosine\"\nk = 1\namplitude = 0.2",
        );
        let u = Scenario::parse(&cos).unwrap().initial_field().unwrap();
        assert!((u.values()[0] - 0.2).abs() < 1e-15);
        let bad = BASIC.replace(
            "profile = \"peakon\"\nc = 1.0",
            "profile = \"multipeakon\"\nq = []\np = []",
        );
        assert!(Scenario::parse(&bad).unwrap().peakon_state().is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let s = Scenario::parse(BASIC).unwrap();
        let text = toml::to_string(&s).unwrap();
        assert_eq!(Scenario::parse(&text).unwrap(), s);
    }
}
