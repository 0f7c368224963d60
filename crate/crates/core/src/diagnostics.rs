//! Monitored functionals and the unique-continuation probe.
//!
//! The probe reproduces, on one snapshot `u(·, t*)`, the monotonicity
//! argument behind unique continuation for the non-local equations. With
//! `f = h(u, ∂x u) ≥ 0` and `F = ∂x(1 − ∂x²)⁻¹ f`:
//!
//! * if `u` vanishes on `[a, b]`, the equation forces `F(a) = F(b) = 0`;
//! * for any `f ≥ 0` vanishing on `[a, b]`, the kernel is strictly
//!   increasing across the interval, so `F(b) ≥ F(a)` with equality iff
//!   `f ≡ 0`. Equivalently `F′ = (1 − ∂x²)⁻¹ f − f = (1 − ∂x²)⁻¹ f ≥ 0` there.
//!
//! Hence a solution vanishing on an interval at one instant vanishes
//! everywhere. Numerically the probe reports `F(a)`, `F(b)` and `∫f` and
//! classifies them with explicit tolerances.

use thiserror::Error;

use crate::fields::{
    derivative, derivative_with_order, norm_l2, norm_sup, Domain, Field, StencilOrder,
};
use crate::kernels::{HelmholtzOperator, KernelError};
use crate::model::{flux_field, ModelSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("|u| < 1e-14 everywhere on [{x0}, {x1}]")]
    DegenerateWindow { x0: f64, x1: f64 },
    #[error("decay fits need a line domain with 0 < x0 < x1 <= L, got [{x0}, {x1}]")]
    InvalidWindow { x0: f64, x1: f64 },
    #[error("interval [{a}, {b}] is not inside the domain")]
    IntervalOutsideDomain { a: f64, b: f64 },
    #[error("interval [{a}, {b}] contains no interior grid point")]
    EmptyInterval { a: f64, b: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// `E(u) = ∫ (u² + (∂x u)²)`, trapezoid rule.
pub fn energy(u: &Field) -> f64 {
    let ux = derivative(u);
    norm_l2(u).powi(2) + norm_l2(&ux).powi(2)
}

/// Discrete `sup |∂x u|`.
pub fn max_slope(u: &Field) -> f64 {
    norm_sup(&derivative(u))
}

/// One row of the per-step diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub max_slope: f64,
    pub sup_norm: f64,
    pub decay_rate: Option<f64>,
}

impl DiagnosticsRow {
    pub fn measure(t: f64, u: &Field, decay_window: Option<(f64, f64)>) -> Self {
        let ux = derivative(u);
        DiagnosticsRow {
            t,
            energy: norm_l2(u).powi(2) + norm_l2(&ux).powi(2),
            max_slope: norm_sup(&ux),
            sup_norm: norm_sup(u),
            decay_rate: decay_window
                .and_then(|(x0, x1)| decay_rate(u, x0, x1).ok())
                .map(|fit| fit.theta),
        }
    }
}

/// Least-squares fit of `−log|u| ≈ θ x + c` on a window of the right tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub theta: f64,
    /// RMS of the fit residuals in `log|u|`.
    pub residual: f64,
    pub points: usize,
}

/// Samples with `|u|` below this carry no decay information.
pub const DECAY_FLOOR: f64 = 1e-14;

pub fn decay_rate(u: &Field, x0: f64, x1: f64) -> Result<DecayFit, DiagnosticsError> {
    let Domain::Line { half_length } = u.grid().domain() else {
        return Err(DiagnosticsError::InvalidWindow { x0, x1 });
    };
    if !(x0 > 0.0 && x0 < x1 && x1 <= half_length) {
        return Err(DiagnosticsError::InvalidWindow { x0, x1 });
    }
    let g = u.grid();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..g.len())
        .map(|j| (g.x(j), u.values()[j].abs()))
        .filter(|&(x, v)| x >= x0 && x <= x1 && v >= DECAY_FLOOR)
        .map(|(x, v)| (x, -v.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(DiagnosticsError::DegenerateWindow { x0, x1 });
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let theta = sxy / sxx;
    let c = my - theta * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - theta * x - c).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(DecayFit {
        theta,
        residual,
        points: xs.len(),
    })
}

/// Closed interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, DiagnosticsError> {
        if !(a < b) {
            return Err(DiagnosticsError::InvalidArgument(format!(
                "interval needs a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

/// Maximal runs of grid points where `max(|u|, |∂x u|) < eps`, kept when at
/// least `min_width` wide. Runs on the circle are not merged across the
/// seam `x = 0`.
pub fn find_vanishing_intervals(
    u: &Field,
    eps: f64,
    min_width: f64,
) -> Result<Vec<Interval>, DiagnosticsError> {
    let g = u.grid();
    if !(eps > 0.0) {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if !(min_width >= 4.0 * g.dx() * (1.0 - 1e-12)) {
        return Err(DiagnosticsError::InvalidArgument(format!(
            "min_width {min_width} is below 4 dx = {}",
            4.0 * g.dx()
        )));
    }
    let ux = derivative(u);
    let small: Vec<bool> = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(v, d)| v.abs().max(d.abs()) < eps)
        .collect();
    let mut out = Vec::new();
    let mut j = 0;
    while j < small.len() {
        if !small[j] {
            j += 1;
            continue;
        }
        let start = j;
        while j + 1 < small.len() && small[j + 1] {
            j += 1;
        }
        let (a, b) = (g.x(start), g.x(j));
        if b - a >= min_width * (1.0 - 1e-12) && b > a {
            out.push(Interval { a, b });
        }
        j += 1;
    }
    Ok(out)
}

/// Probe classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `∫f` is below tolerance: the data is (numerically) the zero solution.
    ConsistentWithZeroSolution,
    /// `F(b) − F(a)` is strictly positive: the snapshot cannot be a solution
    /// that vanishes on `[a, b]`.
    StrictInequalityWitness,
    /// Tolerances straddled.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::ConsistentWithZeroSolution => "ConsistentWithZeroSolution",
            Verdict::StrictInequalityWitness => "StrictInequalityWitness",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeTolerances {
    /// Absolute threshold on `∫f`; `None` means `1e−10 × domain length`.
    pub mass_tol: Option<f64>,
    pub ineq_tol: f64,
}

impl Default for ProbeTolerances {
    fn default() -> Self {
        ProbeTolerances {
            mass_tol: None,
            ineq_tol: 1e-12,
        }
    }
}

impl ProbeTolerances {
    pub fn mass_tol_for(&self, domain: Domain) -> f64 {
        self.mass_tol.unwrap_or(1e-10 * domain.length())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub interval: Interval,
    pub t_star: f64,
    /// `F(a)`, `F(b)` by linear interpolation.
    pub f_a: f64,
    pub f_b: f64,
    /// `F` at the grid points nearest to `a` and `b`.
    pub f_a_grid: f64,
    pub f_b_grid: f64,
    /// `∫ f`.
    pub f_mass: f64,
    pub max_u_on_interval: f64,
    pub verdict: Verdict,
}

impl ProbeReport {
    pub fn gap(&self) -> f64 {
        self.f_b - self.f_a
    }
}

fn check_interval(u: &Field, iv: Interval) -> Result<(), DiagnosticsError> {
    let g = u.grid();
    let inside = match g.domain() {
        Domain::Line { half_length } => iv.a >= -half_length && iv.b <= half_length,
        // The grid starts at 0, so a = 0 is admitted; b must stay below 1.
        Domain::Circle => iv.a >= 0.0 && iv.b < 1.0,
    };
    if !(inside && iv.a < iv.b) {
        return Err(DiagnosticsError::IntervalOutsideDomain { a: iv.a, b: iv.b });
    }
    Ok(())
}

pub fn uc_probe(
    model: &ModelSpec,
    u: &Field,
    interval: Interval,
    t_star: f64,
) -> Result<ProbeReport, DiagnosticsError> {
    uc_probe_with(model, u, interval, t_star, &ProbeTolerances::default())
}

/// Builds `f = h(u, ∂x u)`, `F = ∂x(1 − ∂x²)⁻¹ f`, and classifies
/// `(∫f, F(b) − F(a))`.
pub fn uc_probe_with(
    model: &ModelSpec,
    u: &Field,
    interval: Interval,
    t_star: f64,
    tol: &ProbeTolerances,
) -> Result<ProbeReport, DiagnosticsError> {
    check_interval(u, interval)?;
    let g = *u.grid();
    let f = flux_field(model, u, StencilOrder::Fourth);
    let big_f = HelmholtzOperator::new(g).grad_inverse(&f)?;
    let f_mass = g.integrate(f.values());
    let f_a = big_f.interpolate(interval.a);
    let f_b = big_f.interpolate(interval.b);
    let max_u_on_interval = (0..g.len())
        .filter(|&j| {
            let x = g.x(j);
            x >= interval.a && x <= interval.b
        })
        .fold(0.0f64, |m, j| m.max(u.values()[j].abs()));
    let verdict = if f_mass <= tol.mass_tol_for(g.domain()) {
        Verdict::ConsistentWithZeroSolution
    } else if f_b - f_a > tol.ineq_tol {
        Verdict::StrictInequalityWitness
    } else {
        Verdict::Inconclusive
    };
    Ok(ProbeReport {
        interval,
        t_star,
        f_a,
        f_b,
        f_a_grid: big_f.values()[big_f.nearest_index(interval.a)],
        f_b_grid: big_f.values()[big_f.nearest_index(interval.b)],
        f_mass,
        max_u_on_interval,
        verdict,
    })
}

/// `max |D F − ((1 − ∂x²)⁻¹ f − f)|` over grid points strictly inside
/// `(a, b)`, where `D` is the discrete derivative. This is the identity
/// `∂x²(1 − ∂x²)⁻¹ = (1 − ∂x²)⁻¹ − 1` applied to `F = ∂x(1 − ∂x²)⁻¹ f`.
pub fn fprime_identity_residual(
    model: &ModelSpec,
    u: &Field,
    interval: Interval,
) -> Result<f64, DiagnosticsError> {
    check_interval(u, interval)?;
    let g = *u.grid();
    let f = flux_field(model, u, StencilOrder::Fourth);
    let (inv, big_f) = HelmholtzOperator::new(g).both(&f)?;
    let df = derivative_with_order(&big_f, StencilOrder::Fourth);
    let mut residual: Option<f64> = None;
    for j in 0..g.len() {
        let x = g.x(j);
        if x > interval.a && x < interval.b {
            let r = (df.values()[j] - (inv.values()[j] - f.values()[j])).abs();
            residual = Some(residual.map_or(r, |m| m.max(r)));
        }
    }
    residual.ok_or(DiagnosticsError::EmptyInterval {
        a: interval.a,
        b: interval.b,
    })
}
