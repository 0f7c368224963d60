//! Grids, sampled fields, discrete derivatives and norms.
//!
//! Two spatial settings are supported: the truncated line `[−L, L]`, sampled
//! at `n + 1` points including both endpoints, and the unit circle
//! `ℝ/ℤ ≃ [0, 1)`, sampled at `n` points without the duplicate endpoint.
//! On the circle derivatives are spectral; on the line they are centered
//! finite differences with one-sided closures at the boundary.

use std::io::{Read, Write};

use thiserror::Error;

use crate::spectral;

/// Smallest admissible point count.
pub const MIN_POINTS: usize = 16;

/// Default bound on `|u(±L)|` above which a line field triggers a
/// truncation warning.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("half length must be positive and finite, got {0}")]
    InvalidHalfLength(f64),
    #[error("grid needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("expected {expected} samples for this grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite sample {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("csv: {0}")]
    Csv(String),
}

/// Spatial setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Truncated line `[−half_length, half_length]`; fields are taken to be
    /// zero outside.
    Line { half_length: f64 },
    /// Unit circle, period 1.
    Circle,
}

impl Domain {
    pub fn line(half_length: f64) -> Result<Self, FieldError> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(FieldError::InvalidHalfLength(half_length));
        }
        Ok(Domain::Line { half_length })
    }

    pub fn length(&self) -> f64 {
        match *self {
            Domain::Line { half_length } => 2.0 * half_length,
            Domain::Circle => 1.0,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Circle)
    }
}

/// Finite-difference order used on the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    Second,
    #[default]
    Fourth,
}

impl StencilOrder {
    pub fn from_order(order: u32) -> Option<Self> {
        match order {
            2 => Some(StencilOrder::Second),
            4 => Some(StencilOrder::Fourth),
            _ => None,
        }
    }
}

/// Uniform grid on a [`Domain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    domain: Domain,
    n: usize,
    dx: f64,
}

impl Grid {
    pub fn new(domain: Domain, n: usize) -> Result<Self, FieldError> {
        if n < MIN_POINTS {
            return Err(FieldError::TooFewPoints(n));
        }
        if let Domain::Line { half_length } = domain {
            Domain::line(half_length)?;
        }
        let dx = domain.length() / n as f64;
        Ok(Grid { domain, n, dx })
    }

    /// `n` cells on `[−L, L]`, i.e. `n + 1` samples.
    pub fn line(half_length: f64, n: usize) -> Result<Self, FieldError> {
        Grid::new(Domain::line(half_length)?, n)
    }

    /// `n` samples on the unit circle.
    pub fn circle(n: usize) -> Result<Self, FieldError> {
        Grid::new(Domain::Circle, n)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Resolution parameter: cells on the line, samples on the circle.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Number of stored samples.
    pub fn len(&self) -> usize {
        match self.domain {
            Domain::Line { .. } => self.n + 1,
            Domain::Circle => self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_periodic(&self) -> bool {
        self.domain.is_periodic()
    }

    /// Left end of the sampled range.
    pub fn origin(&self) -> f64 {
        match self.domain {
            Domain::Line { half_length } => -half_length,
            Domain::Circle => 0.0,
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin() + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    /// Trapezoid weight of sample `j` (the periodic trapezoid rule is
    /// uniform).
    pub fn weight(&self, j: usize) -> f64 {
        match self.domain {
            Domain::Line { .. } if j == 0 || j == self.n => 0.5 * self.dx,
            _ => self.dx,
        }
    }

    /// Trapezoid rule over the whole domain.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values
            .iter()
            .enumerate()
            .map(|(j, v)| self.weight(j) * v)
            .sum()
    }

    /// Samples `profile` at the grid points.
    pub fn sample(&self, profile: impl Fn(f64) -> f64) -> Result<Field, FieldError> {
        Field::new(*self, self.points().into_iter().map(profile).collect())
    }

    pub fn zeros(&self) -> Field {
        Field::from_raw(*self, vec![0.0; self.len()])
    }

    /// Same domain, `factor` times the resolution.
    pub fn refined(&self, factor: usize) -> Result<Self, FieldError> {
        Grid::new(self.domain, self.n * factor)
    }
}

/// Samples of a real function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    /// Validates length and finiteness, and warns when a line field does not
    /// decay to [`DEFAULT_TRUNCATION_TOL`] at the boundary.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, FieldError> {
        Field::with_truncation_tolerance(grid, values, DEFAULT_TRUNCATION_TOL)
    }

    pub fn with_truncation_tolerance(
        grid: Grid,
        values: Vec<f64>,
        truncation_tol: f64,
    ) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FieldError::NonFinite { index, value });
        }
        if !grid.is_periodic() {
            let edge = values[0].abs().max(values[values.len() - 1].abs());
            if edge > truncation_tol {
                log::warn!(
                    "field does not decay at the line boundary: max |u(±L)| = {edge:.3e} > {truncation_tol:.1e}"
                );
            }
        }
        Ok(Field { grid, values })
    }

    /// Internal constructor for intermediate results; skips validation.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(
        &self,
        other: &Field,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Field, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scaled(&self, factor: f64) -> Field {
        self.map(|v| factor * v)
    }

    /// Linear interpolation at `x`; on the circle `x` is reduced mod 1, on
    /// the line it is clamped to `[−L, L]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = (x - g.origin()) / g.dx();
        if g.is_periodic() {
            let n = g.n();
            let s = s.rem_euclid(n as f64);
            let j = (s.floor() as usize).min(n - 1);
            let w = s - j as f64;
            (1.0 - w) * self.values[j] + w * self.values[(j + 1) % n]
        } else {
            let s = s.clamp(0.0, g.n() as f64);
            let j = (s.floor() as usize).min(g.n() - 1);
            let w = s - j as f64;
            (1.0 - w) * self.values[j] + w * self.values[j + 1]
        }
    }

    /// Index of the grid point closest to `x` (wrapping on the circle).
    pub fn nearest_index(&self, x: f64) -> usize {
        let g = &self.grid;
        let s = ((x - g.origin()) / g.dx()).round();
        if g.is_periodic() {
            (s.rem_euclid(g.n() as f64) as usize) % g.n()
        } else {
            s.clamp(0.0, g.n() as f64) as usize
        }
    }

    /// Reflection `x → −x`: index reversal on the line, `j → −j mod n` on the
    /// circle.
    pub fn reflected(&self) -> Field {
        let n = self.values.len();
        let values = if self.grid.is_periodic() {
            (0..n).map(|j| self.values[(n - j) % n]).collect()
        } else {
            self.values.iter().rev().copied().collect()
        };
        Field::from_raw(self.grid, values)
    }
}

/// `∂x u`: spectral on the circle, centered differences of the default
/// (fourth) order on the line.
pub fn derivative(u: &Field) -> Field {
    derivative_with_order(u, StencilOrder::Fourth)
}

pub fn derivative_with_order(u: &Field, order: StencilOrder) -> Field {
    let g = *u.grid();
    if g.is_periodic() {
        return Field::from_raw(g, spectral::apply_symbol(u.values(), spectral::d1_symbol));
    }
    let f = u.values();
    let h = g.dx();
    let m = f.len();
    let mut d = vec![0.0; m];
    match order {
        StencilOrder::Second => {
            d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
            for j in 1..m - 1 {
                d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
            }
            d[m - 1] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
        }
        StencilOrder::Fourth => {
            let c = 1.0 / (12.0 * h);
            d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
            d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
            for j in 2..m - 2 {
                d[j] = c * (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]);
            }
            let k = m - 1;
            d[k - 1] =
                -c * (-3.0 * f[k] - 10.0 * f[k - 1] + 18.0 * f[k - 2] - 6.0 * f[k - 3] + f[k - 4]);
            d[k] = -c
                * (-25.0 * f[k] + 48.0 * f[k - 1] - 36.0 * f[k - 2] + 16.0 * f[k - 3]
                    - 3.0 * f[k - 4]);
        }
    }
    Field::from_raw(g, d)
}

/// `∂x² u`: full spectral symbol on the circle, [`derivative`] applied twice on
/// the line.
pub fn second_derivative(u: &Field) -> Field {
    second_derivative_with_order(u, StencilOrder::Fourth)
}

pub fn second_derivative_with_order(u: &Field, order: StencilOrder) -> Field {
    if u.grid().is_periodic() {
        return Field::from_raw(
            *u.grid(),
            spectral::apply_symbol(u.values(), spectral::d2_symbol),
        );
    }
    derivative_with_order(&derivative_with_order(u, order), order)
}

/// Momentum density `y = u − ∂x² u`.
pub fn momentum(u: &Field) -> Field {
    let g = *u.grid();
    if g.is_periodic() {
        return Field::from_raw(
            g,
            spectral::apply_symbol(u.values(), |m| {
                spectral::Complex64::new(1.0 + m.omega * m.omega, 0.0)
            }),
        );
    }
    let uxx = second_derivative(u);
    Field::from_raw(
        g,
        u.values()
            .iter()
            .zip(uxx.values())
            .map(|(a, b)| a - b)
            .collect(),
    )
}

pub fn norm_l2(u: &Field) -> f64 {
    let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    u.grid().integrate(&sq).sqrt()
}

pub fn norm_sup(u: &Field) -> f64 {
    u.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `(‖u‖₂² + ‖∂x u‖₂²)^{1/2}`.
pub fn norm_h1(u: &Field) -> f64 {
    let ux = derivative(u);
    (norm_l2(u).powi(2) + norm_l2(&ux).powi(2)).sqrt()
}

/// `‖u − v‖₂ / ‖v‖₂`.
pub fn relative_l2(u: &Field, reference: &Field) -> Result<f64, FieldError> {
    let diff = u.zip_with(reference, |a, b| a - b)?;
    Ok(norm_l2(&diff) / norm_l2(reference))
}

/// Writes `x,u` rows with 17 significant digits.
pub fn write_csv<W: Write>(u: &Field, writer: W) -> Result<(), FieldError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "u"]).map_err(csv_err)?;
    for (j, v) in u.values().iter().enumerate() {
        w.write_record([format!("{:.16e}", u.grid().x(j)), format!("{v:.16e}")])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| FieldError::Csv(e.to_string()))
}

/// Reads a snapshot written by [`write_csv`]. The grid is reconstructed from
/// the `x` column: a negative first abscissa means a line grid, zero means
/// the circle.
pub fn read_csv<R: Read>(reader: R) -> Result<Field, FieldError> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "u" {
        return Err(FieldError::Csv(format!(
            "expected header \"x,u\", found {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |i: usize| -> Result<f64, FieldError> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| FieldError::Csv(format!("row {}: column {}: {e}", line + 2, i + 1)))
        };
        xs.push(parse(0)?);
        us.push(parse(1)?);
    }
    if xs.len() < 2 {
        return Err(FieldError::Csv("snapshot has fewer than two rows".into()));
    }
    let grid = if xs[0] < 0.0 {
        Grid::line(-xs[0], xs.len() - 1)?
    } else if xs[0] == 0.0 {
        Grid::circle(xs.len())?
    } else {
        return Err(FieldError::Csv(format!(
            "first abscissa {} is neither 0 (circle) nor negative (line)",
            xs[0]
        )));
    };
    let tol = 1e-9 * grid.domain().length();
    if let Some((j, x)) = xs
        .iter()
        .enumerate()
        .find(|(j, x)| (grid.x(*j) - **x).abs() > tol)
    {
        return Err(FieldError::Csv(format!(
            "abscissa {x} at row {} is not on a uniform grid",
            j + 2
        )));
    }
    Field::new(grid, us)
}

fn csv_err(e: csv::Error) -> FieldError {
    FieldError::Csv(e.to_string())
}
