//! Green's functions of `1 − ∂x²` and the convolution operators built from
//! them.
//!
//! On the line the kernel is `K(x) = e^{−|x|}/2`, so that
//! `(1 − ∂x²)⁻¹ f = K ∗ f` and `∂x(1 − ∂x²)⁻¹ f = K′ ∗ f` with
//! `K′(x) = −sgn(x) e^{−|x|}/2`. On the unit circle the kernel is
//!
//! ```text
//! G(x) = cosh(x − ⌊x⌋ − 1/2) / (2 sinh(1/2))
//! ```
//!
//! which is differentiable away from the integers.
//!
//! The fast operators are:
//!
//! * circle: Fourier symbols `1/(1 + (2πk)²)` and `2πik/(1 + (2πk)²)`;
//! * line: a causal and an anticausal first-order recursive filter,
//!   `A_{j+1} = e^{−h} A_j + ∫_{x_j}^{x_{j+1}} e^{−(x_{j+1} − y)} f(y) dy`,
//!   where the cell integral is exact for the piecewise-linear interpolant of
//!   `f`. Outside `[−L, L]` the data is taken to be zero.
//!
//! [`convolution_oracle`] is an independent `O(n²)` trapezoid evaluation used
//! to check both.

use thiserror::Error;

use crate::fields::{Field, Grid};
use crate::spectral;

/// Default half-width of the excluded neighbourhood of the integers for
/// [`periodic_green_deriv`].
pub const INTEGER_EXCLUSION: f64 = 1e-9;

/// Largest grid accepted by the quadratic-cost oracle.
pub const ORACLE_MAX_POINTS: usize = 8192;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("∂xG is not defined at x = {x} (within {tolerance:e} of an integer)")]
    IntegerPoint { x: f64, tolerance: f64 },
    #[error("operator grid and field grid differ")]
    GridMismatch,
    #[error("oracle is limited to {max} points, got {got}")]
    SizeExceeded { got: usize, max: usize },
}

/// `sgn` with `sgn(0) = 0`.
pub(crate) fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `K(x) = e^{−|x|}/2`.
pub fn line_kernel(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

/// `K′(x) = −sgn(x) e^{−|x|}/2`, with `K′(0) = 0`.
pub fn line_kernel_deriv(x: f64) -> f64 {
    -0.5 * sign0(x) * (-x.abs()).exp()
}

fn periodic_offset(x: f64) -> f64 {
    x - x.floor() - 0.5
}

fn half_sinh_norm() -> f64 {
    2.0 * 0.5f64.sinh()
}

/// `G(x) = cosh(x − ⌊x⌋ − 1/2) / (2 sinh(1/2))`.
pub fn periodic_green(x: f64) -> f64 {
    periodic_offset(x).cosh() / half_sinh_norm()
}

/// `∂xG(x) = sinh(x − ⌊x⌋ − 1/2) / (2 sinh(1/2))` for `x ∉ ℤ`.
pub fn periodic_green_deriv(x: f64) -> Result<f64, KernelError> {
    periodic_green_deriv_tol(x, INTEGER_EXCLUSION)
}

pub fn periodic_green_deriv_tol(x: f64, tolerance: f64) -> Result<f64, KernelError> {
    if (x - x.round()).abs() < tolerance {
        return Err(KernelError::IntegerPoint { x, tolerance });
    }
    Ok(periodic_offset(x).sinh() / half_sinh_norm())
}

/// `∂xG` with the principal value 0 at the integers (the mean of the one-sided
/// limits ±1/2). Quadrature only.
fn periodic_green_deriv_pv(x: f64) -> f64 {
    if x == x.round() {
        0.0
    } else {
        periodic_offset(x).sinh() / half_sinh_norm()
    }
}

/// Stateless evaluator for the line kernel pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct LineKernel;

impl LineKernel {
    pub fn value(&self, x: f64) -> f64 {
        line_kernel(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        line_kernel_deriv(x)
    }
}

/// Stateless evaluator for the circle kernel pair.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicKernel {
    pub exclusion: f64,
}

impl Default for PeriodicKernel {
    fn default() -> Self {
        PeriodicKernel {
            exclusion: INTEGER_EXCLUSION,
        }
    }
}

impl PeriodicKernel {
    pub fn value(&self, x: f64) -> f64 {
        periodic_green(x)
    }

    pub fn deriv(&self, x: f64) -> Result<f64, KernelError> {
        periodic_green_deriv_tol(x, self.exclusion)
    }
}

/// Per-cell weights of the exact kernel integral against a linear
/// interpolant: `∫_0^h e^{−τ} (f_near (1 − τ/h) + f_far τ/h) dτ`.
#[derive(Debug, Clone, Copy)]
struct CellWeights {
    decay: f64,
    near: f64,
    far: f64,
}

impl CellWeights {
    fn new(h: f64) -> Self {
        let decay = (-h).exp();
        let i0 = -(-h).exp_m1();
        let i1 = if h < 1e-3 {
            // 1 − e^{−h}(1 + h) by its series; the closed form cancels.
            h * h * (0.5 - h * (1.0 / 3.0 - h * (0.125 - h / 30.0)))
        } else {
            i0 - h * decay
        };
        let far = i1 / h;
        CellWeights {
            decay,
            near: i0 - far,
            far,
        }
    }
}

/// `(1 − ∂x²)⁻¹` and `∂x(1 − ∂x²)⁻¹` bound to one grid.
#[derive(Debug, Clone, Copy)]
pub struct HelmholtzOperator {
    grid: Grid,
    cells: Option<CellWeights>,
}

impl HelmholtzOperator {
    pub fn new(grid: Grid) -> Self {
        let cells = (!grid.is_periodic()).then(|| CellWeights::new(grid.dx()));
        HelmholtzOperator { grid, cells }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check(&self, f: &Field) -> Result<(), KernelError> {
        if *f.grid() != self.grid {
            return Err(KernelError::GridMismatch);
        }
        Ok(())
    }

    /// Causal and anticausal sweeps `A_j = ∫_{−L}^{x_j} e^{−(x_j−y)} f`,
    /// `B_j = ∫_{x_j}^{L} e^{−(y−x_j)} f`.
    fn sweeps(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = self.cells.expect("line operator");
        let m = f.len();
        let mut a = vec![0.0; m];
        let mut b = vec![0.0; m];
        for j in 0..m - 1 {
            a[j + 1] = w.decay * a[j] + w.far * f[j] + w.near * f[j + 1];
        }
        for j in (0..m - 1).rev() {
            b[j] = w.decay * b[j + 1] + w.near * f[j] + w.far * f[j + 1];
        }
        (a, b)
    }

    /// `(1 − ∂x²)⁻¹ f`.
    pub fn inverse(&self, f: &Field) -> Result<Field, KernelError> {
        self.check(f)?;
        let values = if self.grid.is_periodic() {
            spectral::apply_symbol(f.values(), spectral::inverse_symbol)
        } else {
            let (a, b) = self.sweeps(f.values());
            a.iter().zip(&b).map(|(a, b)| 0.5 * (a + b)).collect()
        };
        Ok(Field::from_raw(self.grid, values))
    }

    /// `∂x (1 − ∂x²)⁻¹ f`.
    pub fn grad_inverse(&self, f: &Field) -> Result<Field, KernelError> {
        self.check(f)?;
        let values = if self.grid.is_periodic() {
            spectral::apply_symbol(f.values(), spectral::grad_inverse_symbol)
        } else {
            let (a, b) = self.sweeps(f.values());
            a.iter().zip(&b).map(|(a, b)| 0.5 * (b - a)).collect()
        };
        Ok(Field::from_raw(self.grid, values))
    }

    /// Both operators from one sweep (or one forward transform).
    pub fn both(&self, f: &Field) -> Result<(Field, Field), KernelError> {
        self.check(f)?;
        let (inv, grad) = if self.grid.is_periodic() {
            spectral::apply_symbol_pair(
                f.values(),
                spectral::inverse_symbol,
                spectral::grad_inverse_symbol,
            )
        } else {
            let (a, b) = self.sweeps(f.values());
            (
                a.iter().zip(&b).map(|(a, b)| 0.5 * (a + b)).collect(),
                a.iter().zip(&b).map(|(a, b)| 0.5 * (b - a)).collect(),
            )
        };
        Ok((
            Field::from_raw(self.grid, inv),
            Field::from_raw(self.grid, grad),
        ))
    }
}

/// `(1 − ∂x²)⁻¹ f` on the grid of `f`.
pub fn helmholtz_inverse(f: &Field) -> Field {
    HelmholtzOperator::new(*f.grid())
        .inverse(f)
        .expect("operator built on the field's own grid")
}

/// `∂x (1 − ∂x²)⁻¹ f` on the grid of `f`.
pub fn helmholtz_grad_inverse(f: &Field) -> Field {
    HelmholtzOperator::new(*f.grid())
        .grad_inverse(f)
        .expect("operator built on the field's own grid")
}

/// Direct trapezoid convolution of `f` with `(K, K′)` on the line or
/// `(G, ∂xG)` on the circle, at every grid point. Kernel derivatives take
/// their principal value 0 at the origin.
pub fn convolution_oracle(f: &Field) -> Result<(Field, Field), KernelError> {
    let g = *f.grid();
    if g.len() > ORACLE_MAX_POINTS {
        return Err(KernelError::SizeExceeded {
            got: g.len(),
            max: ORACLE_MAX_POINTS,
        });
    }
    let (inv, grad): (Vec<f64>, Vec<f64>) = g.points().iter().map(|&x| oracle_pair(f, x)).unzip();
    Ok((Field::from_raw(g, inv), Field::from_raw(g, grad)))
}

/// The oracle of [`convolution_oracle`] evaluated at an arbitrary point `x`.
pub fn convolution_oracle_at(f: &Field, x: f64) -> Result<(f64, f64), KernelError> {
    if f.grid().len() > ORACLE_MAX_POINTS {
        return Err(KernelError::SizeExceeded {
            got: f.grid().len(),
            max: ORACLE_MAX_POINTS,
        });
    }
    Ok(oracle_pair(f, x))
}

fn oracle_pair(f: &Field, x: f64) -> (f64, f64) {
    let g = f.grid();
    let mut inv = 0.0;
    let mut grad = 0.0;
    for (j, &v) in f.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let w = g.weight(j) * v;
        let r = x - g.x(j);
        if g.is_periodic() {
            inv += w * periodic_green(r);
            grad += w * periodic_green_deriv_pv(r);
        } else {
            inv += w * line_kernel(r);
            grad += w * line_kernel_deriv(r);
        }
    }
    (inv, grad)
}
