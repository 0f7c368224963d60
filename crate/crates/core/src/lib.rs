//! Numerical laboratory for the Camassa–Holm equation and the wider class of
//! non-local dispersive equations
//!
//! ```text
//! ∂t u + g(u, ∂x u) + ∂x (1 − ∂x²)⁻¹ h(u, ∂x u) = 0
//! ```
//!
//! which contains the b-family (`g = u ux`, `h = (b/2)u² + ((3−b)/2)ux²`),
//! Camassa–Holm (`b = 2`) and Degasperis–Procesi (`b = 3`).
//!
//! Everything is built on the Green's functions of `1 − ∂x²`: `e^{−|x|}/2` on
//! the line and the cosh-profile kernel on the unit circle. On top of the
//! solver sits a unique-continuation probe which evaluates
//! `F = ∂x(1 − ∂x²)⁻¹ f` at the endpoints of an interval where the solution
//! (numerically) vanishes and checks the strict monotone gap `F(b) > F(a)`
//! that any non-negative, non-trivial `f` must produce.
//!
//! Module map:
//!
//! * [`fields`]: grids, sampled fields, derivatives, norms, CSV snapshots
//! * [`kernels`]: Green's functions and the convolution operators
//! * [`kernelcheck`]: randomized check of the kernel inequalities
//! * [`model`]: equation family and the spatial right-hand side
//! * [`integrator`]: RK4 method-of-lines time stepping
//! * [`peakons`]: exact peakons and the N-peakon ODE system
//! * [`diagnostics`]: conserved quantities, decay fits, the probe

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `is_multiple_of` is newer than the supported toolchain.
#![allow(clippy::manual_is_multiple_of)]

pub mod diagnostics;
pub mod fields;
pub mod integrator;
pub mod kernelcheck;
pub mod kernels;
pub mod model;
pub mod peakons;
mod spectral;

pub use diagnostics::{
    decay_rate, energy, find_vanishing_intervals, fprime_identity_residual, max_slope, uc_probe,
    uc_probe_with, DecayFit, DiagnosticsError, DiagnosticsRow, Interval, ProbeReport,
    ProbeTolerances, Verdict,
};
pub use fields::{
    derivative, derivative_with_order, momentum, norm_h1, norm_l2, norm_sup, read_csv, relative_l2,
    second_derivative, second_derivative_with_order, write_csv, Domain, Field, FieldError, Grid,
    StencilOrder,
};
pub use integrator::{
    run, select_dt, step_rk4, IntegratorError, RunStatus, SolverConfig, TimeStep, Trajectory,
};
pub use kernelcheck::{kernel_check, KernelCheckError, KernelCheckReport};
pub use kernels::{
    convolution_oracle, convolution_oracle_at, helmholtz_grad_inverse, helmholtz_inverse,
    line_kernel, line_kernel_deriv, periodic_green, periodic_green_deriv, HelmholtzOperator,
    KernelError,
};
pub use model::{flux_field, rhs, rhs_with, ModelError, ModelSpec, RhsOptions};
pub use peakons::{
    evolve_peakons, multipeakon_field, multipeakon_rhs, single_peakon, PeakonError, PeakonState,
};
