//! Randomized check of the kernel monotonicity inequalities.
//!
//! Line: for `a < b` and `y ∉ [a, b]`,
//! `−sgn(b−y)e^{−|b−y|} > −sgn(a−y)e^{−|a−y|}`, i.e. `K′(b−y) > K′(a−y)`.
//!
//! Circle: for `0 < a < b < 1` and `y ∈ [0, 1] ∖ [a, b]`,
//! `∂xG(b−y) > ∂xG(a−y)`, and both `⌊b−y⌋` and `⌊a−y⌋` equal `0` when
//! `y < a` and `−1` when `y > b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kernels::{line_kernel_deriv, periodic_green_deriv, INTEGER_EXCLUSION};

/// Sampling box for the line triples: `a ∈ [−LINE_SPAN, LINE_SPAN]`,
/// `b − a ∈ [MIN_GAP, LINE_SPAN]`, `y ∈ [−3·LINE_SPAN, 3·LINE_SPAN]`.
const LINE_SPAN: f64 = 10.0;

/// Interval widths below this are redrawn: the margin scales with `b − a`
/// and would otherwise drown in round-off.
pub const MIN_GAP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelCheckError {
    #[error("trial count must be at least 1")]
    NoTrials,
}

/// Outcome of [`kernel_check`]. Margins are `K′(b−y) − K′(a−y)` and
/// `∂xG(b−y) − ∂xG(a−y)`; a violation is a margin that is not strictly
/// positive.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheckReport {
    pub trials: u64,
    pub seed: u64,
    pub line_min_margin: f64,
    pub circle_min_margin: f64,
    pub line_violations: u64,
    pub circle_violations: u64,
    /// Circle triples whose floor values matched the expected `0` / `−1`.
    pub floor_agreements: u64,
    /// Draws discarded because `b − a < MIN_GAP` or a difference fell within
    /// the integer exclusion of `∂xG`.
    pub resampled: u64,
}

impl KernelCheckReport {
    pub fn passed(&self) -> bool {
        self.line_violations == 0
            && self.circle_violations == 0
            && self.floor_agreements == self.trials
            && self.line_min_margin > 0.0
            && self.circle_min_margin > 0.0
    }
}

fn line_triple(rng: &mut ChaCha8Rng, resampled: &mut u64) -> (f64, f64, f64) {
    loop {
        let a = rng.gen_range(-LINE_SPAN..LINE_SPAN);
        let b = a + rng.gen_range(0.0..LINE_SPAN);
        let y = rng.gen_range(-3.0 * LINE_SPAN..3.0 * LINE_SPAN);
        if b - a >= MIN_GAP && (y < a || y > b) {
            return (a, b, y);
        }
        *resampled += 1;
    }
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < INTEGER_EXCLUSION
}

fn circle_triple(rng: &mut ChaCha8Rng, resampled: &mut u64) -> (f64, f64, f64) {
    loop {
        let s: f64 = rng.gen();
        let t: f64 = rng.gen();
        let (a, b) = if s < t { (s, t) } else { (t, s) };
        let y: f64 = rng.gen_range(0.0..=1.0);
        let ok = a > 0.0
            && b - a >= MIN_GAP
            && (y < a || y > b)
            && !near_integer(a - y)
            && !near_integer(b - y);
        if ok {
            return (a, b, y);
        }
        *resampled += 1;
    }
}

/// Draws `trials` triples on the line and `trials` on the circle from a
/// ChaCha8 stream seeded with `seed`. Identical arguments give identical
/// reports.
pub fn kernel_check(trials: u64, seed: u64) -> Result<KernelCheckReport, KernelCheckError> {
    if trials == 0 {
        return Err(KernelCheckError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = KernelCheckReport {
        trials,
        seed,
        line_min_margin: f64::INFINITY,
        circle_min_margin: f64::INFINITY,
        line_violations: 0,
        circle_violations: 0,
        floor_agreements: 0,
        resampled: 0,
    };
    for _ in 0..trials {
        let (a, b, y) = line_triple(&mut rng, &mut report.resampled);
        let margin = line_kernel_deriv(b - y) - line_kernel_deriv(a - y);
        if !(margin > 0.0) {
            report.line_violations += 1;
        }
        report.line_min_margin = report.line_min_margin.min(margin);

        let (a, b, y) = circle_triple(&mut rng, &mut report.resampled);
        let expected = if y < a { 0.0 } else { -1.0 };
        if (b - y).floor() == expected && (a - y).floor() == expected {
            report.floor_agreements += 1;
        }
        let margin = match (periodic_green_deriv(b - y), periodic_green_deriv(a - y)) {
            (Ok(gb), Ok(ga)) => gb - ga,
            _ => f64::NAN,
        };
        if !(margin > 0.0) {
            report.circle_violations += 1;
        }
        report.circle_min_margin = report.circle_min_margin.min(margin);
    }
    Ok(report)
}
