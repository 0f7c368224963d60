//! Benchmark fixtures shared by the criterion targets.

use std::f64::consts::PI;

use peakonlab_core::{Field, Grid};

/// Unit peakon on `[−20, 20]` with `n` cells.
pub fn peakon_line(n: usize) -> Field {
    Grid::line(20.0, n)
        .and_then(|g| g.sample(|x| (-x.abs()).exp()))
        .expect("valid grid")
}

/// Smooth positive-momentum data on the circle.
pub fn smooth_circle(n: usize) -> Field {
    Grid::circle(n)
        .and_then(|g| g.sample(|x| 0.5 + 0.1 * (2.0 * PI * x).cos() + 0.02 * (6.0 * PI * x).sin()))
        .expect("valid grid")
}
