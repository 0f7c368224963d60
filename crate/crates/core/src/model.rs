//! The equation family and its spatial right-hand side.
//!
//! Every model is written in the non-local form
//!
//! ```text
//! ∂t u = −g(u, ∂x u) − ∂x (1 − ∂x²)⁻¹ h(u, ∂x u)
//! ```
//!
//! For the b-family `g = u ux` and `h = (b/2) u² + ((3 − b)/2) ux²`; `b = 2`
//! is Camassa–Holm (`h = u² + ux²/2`) and `b = 3` is Degasperis–Procesi.
//! General models pick `g` and `h` from a fixed registry of named
//! built-ins.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fields::{derivative_with_order, Field, StencilOrder};
use crate::kernels::{HelmholtzOperator, KernelError};
use crate::spectral;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("b = {0} is outside the b-family range [0, 3]")]
    BOutOfRange(f64),
    #[error("{which}(0, 0) = {value}, must vanish")]
    NonZeroAtOrigin { which: &'static str, value: f64 },
    #[error("h({u:e}, {ux:e}) = {value:e} is not positive")]
    PositivityViolation { u: f64, ux: f64, value: f64 },
    #[error("positivity audit applies to general models only")]
    NotGeneral,
    #[error("unknown built-in {kind} function {name:?}")]
    UnknownBuiltin { kind: &'static str, name: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Pointwise nonlinearity `(u, ux) ↦ value`.
pub type Pointwise = fn(f64, f64) -> f64;

/// A named nonlinearity from the registry.
#[derive(Clone, Copy)]
pub struct NamedFn {
    pub name: &'static str,
    pub eval: Pointwise,
    /// `false` when the function ignores `ux`; the positivity requirement
    /// then reads `h(u) > 0` for `u ≠ 0`.
    pub uses_slope: bool,
}

impl fmt::Debug for NamedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl PartialEq for NamedFn {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

const G_BUILTINS: &[NamedFn] = &[
    NamedFn {
        name: "burgers",
        eval: |u, ux| u * ux,
        uses_slope: true,
    },
    NamedFn {
        name: "cubic",
        eval: |u, _| u * u * u,
        uses_slope: false,
    },
    NamedFn {
        name: "zero",
        eval: |_, _| 0.0,
        uses_slope: false,
    },
];

const H_BUILTINS: &[NamedFn] = &[
    NamedFn {
        name: "camassa_holm",
        eval: |u, ux| u * u + 0.5 * ux * ux,
        uses_slope: true,
    },
    NamedFn {
        name: "sum_of_squares",
        eval: |u, ux| u * u + ux * ux,
        uses_slope: true,
    },
    NamedFn {
        name: "u_squared",
        eval: |u, _| u * u,
        uses_slope: false,
    },
    NamedFn {
        name: "quartic",
        eval: |u, ux| u.powi(4) + ux * ux,
        uses_slope: true,
    },
    NamedFn {
        name: "indefinite",
        eval: |u, ux| u * u - ux * ux,
        uses_slope: true,
    },
];

/// Looks up an advection nonlinearity `g` by name.
pub fn builtin_g(name: &str) -> Result<NamedFn, ModelError> {
    G_BUILTINS
        .iter()
        .find(|f| f.name == name)
        .copied()
        .ok_or_else(|| ModelError::UnknownBuiltin {
            kind: "g",
            name: name.to_string(),
        })
}

/// Looks up a non-local flux `h` by name.
pub fn builtin_h(name: &str) -> Result<NamedFn, ModelError> {
    H_BUILTINS
        .iter()
        .find(|f| f.name == name)
        .copied()
        .ok_or_else(|| ModelError::UnknownBuiltin {
            kind: "h",
            name: name.to_string(),
        })
}

pub fn builtin_names() -> (Vec<&'static str>, Vec<&'static str>) {
    (
        G_BUILTINS.iter().map(|f| f.name).collect(),
        H_BUILTINS.iter().map(|f| f.name).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    BFamily { b: f64 },
    General { g: NamedFn, h: NamedFn },
}

/// Outcome of a successful positivity audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub samples: usize,
    pub min_value: f64,
    pub min_at: (f64, f64),
}

impl ModelSpec {
    pub fn b_family(b: f64) -> Result<Self, ModelError> {
        if !(0.0..=3.0).contains(&b) {
            return Err(ModelError::BOutOfRange(b));
        }
        Ok(ModelSpec::BFamily { b })
    }

    pub fn camassa_holm() -> Self {
        ModelSpec::BFamily { b: 2.0 }
    }

    pub fn degasperis_procesi() -> Self {
        ModelSpec::BFamily { b: 3.0 }
    }

    /// Builds a general model. `g(0,0) = h(0,0) = 0` is enforced; positivity of
    /// `h` off the origin is audited on a fixed-seed sample and only logged.
    pub fn general(g: NamedFn, h: NamedFn) -> Result<Self, ModelError> {
        for (which, f) in [("g", g), ("h", h)] {
            let value = (f.eval)(0.0, 0.0);
            if value != 0.0 {
                return Err(ModelError::NonZeroAtOrigin { which, value });
            }
        }
        let spec = ModelSpec::General { g, h };
        if let Err(e) = spec.positivity_audit(4096, 0) {
            log::warn!("model {g:?}/{h:?}: {e}");
        }
        Ok(spec)
    }

    pub fn general_by_name(g: &str, h: &str) -> Result<Self, ModelError> {
        ModelSpec::general(builtin_g(g)?, builtin_h(h)?)
    }

    pub fn is_camassa_holm(&self) -> bool {
        matches!(self, ModelSpec::BFamily { b } if *b == 2.0)
    }

    /// Non-local flux `h(u, ux)`.
    pub fn flux_h(&self, u: f64, ux: f64) -> f64 {
        match *self {
            ModelSpec::BFamily { b } => 0.5 * b * u * u + 0.5 * (3.0 - b) * ux * ux,
            ModelSpec::General { h, .. } => (h.eval)(u, ux),
        }
    }

    /// Local term `g(u, ux)`.
    pub fn advection_g(&self, u: f64, ux: f64) -> f64 {
        match *self {
            ModelSpec::BFamily { .. } => u * ux,
            ModelSpec::General { g, .. } => (g.eval)(u, ux),
        }
    }

    /// Samples `h` on the annulus `1e−6 ≤ |(u, ux)| ≤ 1e3` (log-uniform
    /// radius, uniform angle), after probing both axes, and fails on the first
    /// non-positive value. For `h` that ignores `ux` only `u ≠ 0` is sampled.
    pub fn positivity_audit(&self, samples: usize, seed: u64) -> Result<AuditReport, ModelError> {
        let ModelSpec::General { h, .. } = *self else {
            return Err(ModelError::NotGeneral);
        };
        let mut report = AuditReport {
            samples: 0,
            min_value: f64::INFINITY,
            min_at: (0.0, 0.0),
        };
        let mut check = |u: f64, ux: f64| -> Result<(), ModelError> {
            let value = (h.eval)(u, ux);
            report.samples += 1;
            if value < report.min_value {
                report.min_value = value;
                report.min_at = (u, ux);
            }
            if value > 0.0 {
                Ok(())
            } else {
                Err(ModelError::PositivityViolation { u, ux, value })
            }
        };
        for r in [1e-6, 1e-3, 1.0, 1e3] {
            for s in [1.0, -1.0] {
                check(s * r, 0.0)?;
                if h.uses_slope {
                    check(0.0, s * r)?;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (1e-6f64.ln(), 1e3f64.ln());
        for _ in 0..samples {
            let r = rng.gen_range(lo..=hi).exp();
            if h.uses_slope {
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                check(r * phi.cos(), r * phi.sin())?;
            } else {
                let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                check(s * r, rng.gen_range(-1e3..1e3))?;
            }
        }
        Ok(report)
    }
}

/// Discretization switches for [`rhs_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RhsOptions {
    /// 2/3-rule dealiasing of the nonlinear terms (circle only).
    pub dealias: bool,
    /// Finite-difference order on the line.
    pub stencil: StencilOrder,
}

/// `∂t u` for `u` under `model`, with default options.
pub fn rhs(model: &ModelSpec, u: &Field) -> Field {
    rhs_with(
        model,
        &HelmholtzOperator::new(*u.grid()),
        u,
        &RhsOptions::default(),
    )
    .expect("operator built on the field's grid")
}

/// `∂t u = −g(u, ux) − ∂x(1 − ∂x²)⁻¹ h(u, ux)`.
pub fn rhs_with(
    model: &ModelSpec,
    op: &HelmholtzOperator,
    u: &Field,
    opts: &RhsOptions,
) -> Result<Field, ModelError> {
    let ux = derivative_with_order(u, opts.stencil);
    let dealias = opts.dealias && u.grid().is_periodic();
    let (local, mut flux): (Vec<f64>, Vec<f64>) = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&v, &d)| (model.advection_g(v, d), model.flux_h(v, d)))
        .unzip();
    if dealias {
        flux = spectral::two_thirds_filter(&flux);
    }
    let nonlocal = op.grad_inverse(&Field::from_raw(*u.grid(), flux))?;
    let mut out: Vec<f64> = local
        .iter()
        .zip(nonlocal.values())
        .map(|(g, p)| -g - p)
        .collect();
    if dealias {
        out = spectral::two_thirds_filter(&out);
    }
    Ok(Field::from_raw(*u.grid(), out))
}

/// Pointwise image of `(u, ∂x u)` under `h`: the density whose non-local
/// potential drives the equation.
pub fn flux_field(model: &ModelSpec, u: &Field, stencil: StencilOrder) -> Field {
    let ux = derivative_with_order(u, stencil);
    Field::from_raw(
        *u.grid(),
        u.values()
            .iter()
            .zip(ux.values())
            .map(|(&v, &d)| model.flux_h(v, d))
            .collect(),
    )
}
