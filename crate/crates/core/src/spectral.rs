//! Fourier symbol calculus on the unit circle (period 1).

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut p = planner().lock().unwrap_or_else(|e| e.into_inner());
    (p.plan_fft_forward(n), p.plan_fft_inverse(n))
}

/// A Fourier mode of a length-`n` periodic sample vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Mode {
    /// Angular wavenumber `2πk`.
    pub omega: f64,
    /// Integer wavenumber `k`, signed.
    pub k: i64,
    /// `k == n/2` for even `n`: the mode has no sign and odd symbols must
    /// vanish on it to keep real data real.
    pub nyquist: bool,
}

pub(crate) fn mode(i: usize, n: usize) -> Mode {
    let k = if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    };
    Mode {
        omega: 2.0 * PI * k as f64,
        k,
        nyquist: n % 2 == 0 && i == n / 2,
    }
}

/// Multiplies the discrete Fourier coefficients of `values` by `symbol` and
/// returns the real part of the inverse transform.
pub(crate) fn apply_symbol(values: &[f64], symbol: impl Fn(Mode) -> Complex64) -> Vec<f64> {
    let n = values.len();
    let (fwd, inv) = plans(n);
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (i, c) in buf.iter_mut().enumerate() {
        *c *= symbol(mode(i, n));
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Applies two symbols sharing one forward transform.
pub(crate) fn apply_symbol_pair(
    values: &[f64],
    first: impl Fn(Mode) -> Complex64,
    second: impl Fn(Mode) -> Complex64,
) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let (fwd, inv) = plans(n);
    let mut hat: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut hat);
    let scale = 1.0 / n as f64;
    let out = |symbol: &dyn Fn(Mode) -> Complex64| {
        let mut buf: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(mode(i, n)))
            .collect();
        inv.process(&mut buf);
        buf.iter().map(|c| c.re * scale).collect::<Vec<_>>()
    };
    let a = out(&first);
    let b = out(&second);
    (a, b)
}

/// Orszag 2/3 rule: zeroes modes with `|k| > n/3`.
pub(crate) fn two_thirds_filter(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let cutoff = n as i64 / 3;
    apply_symbol(values, |m| {
        if m.k.abs() > cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Symbol of `∂x`; zero on the Nyquist mode.
pub(crate) fn d1_symbol(m: Mode) -> Complex64 {
    if m.nyquist {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, m.omega)
    }
}

/// Symbol of `∂x²`, kept on the Nyquist mode (it is real and even).
pub(crate) fn d2_symbol(m: Mode) -> Complex64 {
    Complex64::new(-m.omega * m.omega, 0.0)
}

/// Symbol of `(1 − ∂x²)⁻¹`.
pub(crate) fn inverse_symbol(m: Mode) -> Complex64 {
    Complex64::new(1.0 / (1.0 + m.omega * m.omega), 0.0)
}

/// Symbol of `∂x (1 − ∂x²)⁻¹`; zero on the Nyquist mode.
pub(crate) fn grad_inverse_symbol(m: Mode) -> Complex64 {
    if m.nyquist {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, m.omega / (1.0 + m.omega * m.omega))
    }
}
