//! Exact peakons and the N-peakon system for Camassa–Holm.
//!
//! The ansatz `u(x, t) = Σ pᵢ(t) e^{−|x − qᵢ(t)|}` solves CH in the weak sense
//! exactly when `(q, p)` follow the canonical equations of
//! `H = ½ Σᵢⱼ pᵢ pⱼ e^{−|qᵢ − qⱼ|}`:
//!
//! ```text
//! q̇ᵢ = Σⱼ pⱼ e^{−|qᵢ − qⱼ|}
//! ṗᵢ = pᵢ Σⱼ pⱼ sgn(qᵢ − qⱼ) e^{−|qᵢ − qⱼ|}
//! ```
//!
//! A single peakon (`N = 1`) translates at speed `p₁ = c`.

use thiserror::Error;

use crate::fields::{Domain, Field, Grid};
use crate::kernels::sign0;

/// Minimum admissible gap `qᵢ₊₁ − qᵢ`.
pub const COLLISION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeakonError {
    #[error(
        "positions must be strictly increasing with gaps >= {tol:e}; gap {gap:e} at index {index}"
    )]
    Collision {
        index: usize,
        gap: f64,
        tol: f64,
        /// Time at which the gap closed (0 for an invalid initial state).
        t: f64,
        /// Last state with admissible ordering.
        last_valid: Option<Box<PeakonState>>,
    },
    #[error("{q} positions but {p} momenta")]
    DimensionMismatch { q: usize, p: usize },
    #[error("non-finite peakon state")]
    NonFinite,
    #[error("peakon fields live on the line only")]
    DomainError,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `c e^{−|x − ct|}`.
pub fn single_peakon(c: f64, x: f64, t: f64) -> f64 {
    c * (-(x - c * t).abs()).exp()
}

/// Positions and momenta of an N-peakon configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakonState {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PeakonState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self, PeakonError> {
        if q.len() != p.len() {
            return Err(PeakonError::DimensionMismatch {
                q: q.len(),
                p: p.len(),
            });
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(PeakonError::NonFinite);
        }
        let state = PeakonState { q, p };
        state.check_ordering(0.0)?;
        Ok(state)
    }

    pub fn single(q: f64, c: f64) -> Self {
        PeakonState {
            q: vec![q],
            p: vec![c],
        }
    }

    pub fn empty() -> Self {
        PeakonState {
            q: Vec::new(),
            p: Vec::new(),
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.q
    }

    pub fn momenta(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    fn check_ordering(&self, t: f64) -> Result<(), PeakonError> {
        for (index, w) in self.q.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if !(gap >= COLLISION_TOL) {
                return Err(PeakonError::Collision {
                    index,
                    gap,
                    tol: COLLISION_TOL,
                    t,
                    last_valid: None,
                });
            }
        }
        Ok(())
    }

    /// `H = ½ Σᵢⱼ pᵢ pⱼ e^{−|qᵢ − qⱼ|}`.
    pub fn hamiltonian(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.len() {
            for j in 0..self.len() {
                h += self.p[i] * self.p[j] * (-(self.q[i] - self.q[j]).abs()).exp();
            }
        }
        0.5 * h
    }

    pub fn total_momentum(&self) -> f64 {
        self.p.iter().sum()
    }

    /// `q̇ᵢ`, the instantaneous peakon speeds.
    pub fn velocities(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                (0..self.len())
                    .map(|j| self.p[j] * (-(self.q[i] - self.q[j]).abs()).exp())
                    .sum()
            })
            .collect()
    }

    /// `u(x) = Σ pᵢ e^{−|x − qᵢ|}`.
    pub fn profile(&self, x: f64) -> f64 {
        self.q
            .iter()
            .zip(&self.p)
            .map(|(q, p)| p * (-(x - q).abs()).exp())
            .sum()
    }

    fn axpy(&self, s: f64, d: &PeakonState) -> PeakonState {
        PeakonState {
            q: self.q.iter().zip(&d.q).map(|(a, b)| a + s * b).collect(),
            p: self.p.iter().zip(&d.p).map(|(a, b)| a + s * b).collect(),
        }
    }
}

/// Samples the superposition on a line grid.
pub fn multipeakon_field(state: &PeakonState, grid: &Grid) -> Result<Field, PeakonError> {
    if !matches!(grid.domain(), Domain::Line { .. }) {
        return Err(PeakonError::DomainError);
    }
    grid.sample(|x| state.profile(x))
        .map_err(|_| PeakonError::NonFinite)
}

/// Time derivative `(q̇, ṗ)` of the peakon system.
pub fn multipeakon_rhs(state: &PeakonState) -> Result<PeakonState, PeakonError> {
    state.check_ordering(0.0)?;
    Ok(raw_rhs(state))
}

fn raw_rhs(s: &PeakonState) -> PeakonState {
    let n = s.len();
    let mut dq = vec![0.0; n];
    let mut dp = vec![0.0; n];
    for i in 0..n {
        let mut force = 0.0;
        for j in 0..n {
            let r = s.q[i] - s.q[j];
            let e = (-r.abs()).exp();
            dq[i] += s.p[j] * e;
            force += s.p[j] * sign0(r) * e;
        }
        dp[i] = s.p[i] * force;
    }
    PeakonState { q: dq, p: dp }
}

fn rk4(s: &PeakonState, dt: f64) -> PeakonState {
    let k1 = raw_rhs(s);
    let k2 = raw_rhs(&s.axpy(0.5 * dt, &k1));
    let k3 = raw_rhs(&s.axpy(0.5 * dt, &k2));
    let k4 = raw_rhs(&s.axpy(dt, &k3));
    let c = dt / 6.0;
    let comb = |a: &[f64], b: &[f64], c2: &[f64], d: &[f64], base: &[f64]| -> Vec<f64> {
        (0..base.len())
            .map(|i| base[i] + c * (a[i] + 2.0 * b[i] + 2.0 * c2[i] + d[i]))
            .collect()
    };
    PeakonState {
        q: comb(&k1.q, &k2.q, &k3.q, &k4.q, &s.q),
        p: comb(&k1.p, &k2.p, &k3.p, &k4.p, &s.p),
    }
}

/// Integrates to `t_end` with RK4 steps of size `dt` (the last one clipped).
pub fn evolve_peakons(
    state: &PeakonState,
    t_end: f64,
    dt: f64,
) -> Result<PeakonState, PeakonError> {
    Ok(evolve_recorded(state, t_end, dt, 0)?
        .pop()
        .expect("at least the initial state")
        .1)
}

/// As [`evolve_peakons`], returning `(t, state)` every `record_every` steps
/// (0: first and last only). The final state is always included.
pub fn evolve_recorded(
    state: &PeakonState,
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Vec<(f64, PeakonState)>, PeakonError> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(PeakonError::InvalidArgument(format!(
            "need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    state.check_ordering(0.0)?;
    let mut out = vec![(0.0, state.clone())];
    let mut s = state.clone();
    let mut t = 0.0;
    let mut steps = 0usize;
    let t_eps = 1e-12 * t_end.max(1.0);
    while t < t_end - t_eps {
        let h = dt.min(t_end - t);
        let next = rk4(&s, h);
        if next.q.iter().chain(&next.p).any(|v| !v.is_finite()) {
            return Err(PeakonError::NonFinite);
        }
        let t_next = if t_end - (t + h) <= t_eps {
            t_end
        } else {
            t + h
        };
        if let Err(PeakonError::Collision {
            index, gap, tol, ..
        }) = next.check_ordering(t_next)
        {
            return Err(PeakonError::Collision {
                index,
                gap,
                tol,
                t: t_next,
                last_valid: Some(Box::new(s)),
            });
        }
        s = next;
        t = t_next;
        steps += 1;
        if record_every > 0 && steps % record_every == 0 {
            out.push((t, s.clone()));
        }
    }
    if out.last().map(|(tl, _)| *tl) != Some(t) {
        out.push((t, s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::norm_sup;

    #[test]
    fn single_peakon_values() {
        assert_eq!(single_peakon(1.0, 0.0, 0.0), 1.0);
        for t in [0.0, 0.7, 3.0] {
            assert_eq!(single_peakon(1.7, 1.7 * t, t), 1.7);
        }
        // 2 e^{−1} = 0.735758882342884643...
        assert!((single_peakon(2.0, 3.0, 1.0) - 0.735_758_882_342_884_6).abs() < 1e-15);
    }

    #[test]
    fn field_sampling() {
        let g = Grid::line(10.0, 200).unwrap();
        let u = multipeakon_field(&PeakonState::single(0.0, 1.0), &g).unwrap();
        for (j, x) in g.points().iter().enumerate() {
            assert_eq!(u.values()[j], (-x.abs()).exp());
        }
        assert_eq!(
            norm_sup(&multipeakon_field(&PeakonState::empty(), &g).unwrap()),
            0.0
        );
        assert_eq!(
            multipeakon_field(&PeakonState::empty(), &Grid::circle(16).unwrap()),
            Err(PeakonError::DomainError)
        );
    }

    #[test]
    fn distant_peakons_barely_overlap() {
        let g = Grid::line(30.0, 3000).unwrap();
        let (q1, q2) = (-8.0, 8.0);
        let s = PeakonState::new(vec![q1, q2], vec![1.0, 0.5]).unwrap();
        let u = multipeakon_field(&s, &g).unwrap();
        // At each crest the other peakon contributes exactly p·e^{−|q1−q2|}.
        let tail = (-(q2 - q1)).exp();
        let at = |x: f64| u.values()[u.nearest_index(x)];
        assert!((at(q1) - 1.0 - 0.5 * tail).abs() < 1e-12);
        assert!((at(q2) - 0.5 - tail).abs() < 1e-12);
    }

    #[test]
    fn single_peakon_translates() {
        let s = PeakonState::single(0.3, 1.5);
        let d = multipeakon_rhs(&s).unwrap();
        assert_eq!(d.positions(), &[1.5]);
        assert_eq!(d.momenta(), &[0.0]);
        let end = evolve_peakons(&PeakonState::single(0.0, 1.0), 1.0, 1e-3).unwrap();
        assert!((end.positions()[0] - 1.0).abs() < 1e-12);
        assert_eq!(end.momenta()[0], 1.0);
    }

    #[test]
    fn symmetric_pair_exchanges_antisymmetrically() {
        let s = PeakonState::new(vec![-1.0, 1.0], vec![0.7, 0.7]).unwrap();
        let d = multipeakon_rhs(&s).unwrap();
        assert_eq!(d.positions()[0], d.positions()[1]);
        assert_eq!(d.momenta()[0], -d.momenta()[1]);
    }

    #[test]
    fn invariants_are_conserved() {
        let s = PeakonState::new(vec![-5.0, 0.0], vec![2.0, 1.0]).unwrap();
        let (h0, m0) = (s.hamiltonian(), s.total_momentum());
        let end = evolve_peakons(&s, 5.0, 1e-3).unwrap();
        assert!((end.total_momentum() - m0).abs() < 1e-10);
        assert!((end.hamiltonian() - h0).abs() < 1e-8 * h0);
    }

    #[test]
    fn collisions_are_reported() {
        assert!(matches!(
            PeakonState::new(vec![0.0, 0.0], vec![1.0, 1.0]),
            Err(PeakonError::Collision { .. })
        ));
        assert!(matches!(
            PeakonState::new(vec![0.0], vec![1.0, 1.0]),
            Err(PeakonError::DimensionMismatch { .. })
        ));
        // Peakon–antipeakon pair closes its gap in finite time.
        let s = PeakonState::new(vec![-1.0, 1.0], vec![1.0, -1.0]).unwrap();
        match evolve_peakons(&s, 10.0, 1e-3) {
            Err(PeakonError::Collision { t, last_valid, .. }) => {
                assert!(t > 0.0 && t < 10.0);
                assert!(last_valid.is_some());
            }
            other => panic!("expected a collision, got {other:?}"),
        }
    }

    #[test]
    fn overtaking_is_elastic() {
        // Fast peakon behind slow one. Once separated, the speeds c1, c2 are
        // fixed by the invariants: c1 + c2 = M and c1² + c2² = 2H.
        let s = PeakonState::new(vec![-5.0, 0.0], vec![2.0, 1.0]).unwrap();
        let (m, h) = (s.total_momentum(), s.hamiltonian());
        let disc = (2.0 * (2.0 * h) - m * m).sqrt();
        let expected = [(m - disc) / 2.0, (m + disc) / 2.0];
        let end = evolve_peakons(&s, 40.0, 1e-3).unwrap();
        let mut after = end.velocities();
        after.sort_by(f64::total_cmp);
        for (a, b) in expected.iter().zip(&after) {
            assert!((a - b).abs() < 1e-6, "{expected:?} vs {after:?}");
        }
        // The leading peakon is now the fast one.
        assert!(end.momenta()[1] > end.momenta()[0]);
    }
}
