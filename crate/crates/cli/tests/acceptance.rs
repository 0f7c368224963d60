//! Acceptance suite. Runs every criterion at its stated tolerance and
//! prints one PASS/FAIL line each.
//!
//! Two criteria are unattainable and are expected to print FAIL:
//!
//! * operator identity on the circle at `n = 1024` to `1e−10`: rounding the
//!   samples of `(1 − ∂x²)⁻¹f` to doubles alone leaves a spectral second
//!   derivative error of order `ε (2π·512)² ≈ 2e−9`;
//! * energy conservation for `0.2 cos 2πx` up to `T = 2`: that datum breaks
//!   before `t = 2/(0.4π) ≈ 1.59`.
//!
//! Both still run at full tolerance. The process exits non-zero only when an
//! outcome differs from the expected one.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use peakonlab_core::{
    convolution_oracle_at, decay_rate, energy, evolve_peakons, flux_field,
    fprime_identity_residual, helmholtz_inverse, max_slope, multipeakon_field, multipeakon_rhs,
    norm_sup, relative_l2, run, second_derivative, uc_probe, Field, Grid, Interval, ModelSpec,
    PeakonState, SolverConfig, StencilOrder, TimeStep, Verdict,
};

struct Outcome {
    passed: bool,
    detail: String,
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    /// Why the criterion is unattainable; FAIL is then the expected outcome.
    expect_fail: Option<&'static str>,
    check: fn() -> Outcome,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "kernel inequality suite",
            budget: secs(10),
            expect_fail: None,
            check: kernel_inequalities,
        },
        Criterion {
            id: 2,
            name: "operator identity",
            budget: secs(5),
            expect_fail: Some("circle bound is below the rounding floor"),
            check: operator_identity,
        },
        Criterion {
            id: 3,
            name: "peakon translation",
            budget: secs(60),
            expect_fail: None,
            check: peakon_translation,
        },
        Criterion {
            id: 4,
            name: "energy conservation",
            budget: secs(20),
            expect_fail: Some("datum breaks before T"),
            check: energy_conservation,
        },
        Criterion {
            id: 5,
            name: "unique-continuation probe",
            budget: secs(30),
            expect_fail: None,
            check: probe_gaps,
        },
        Criterion {
            id: 6,
            name: "F' identity",
            budget: secs(10),
            expect_fail: None,
            check: fprime_identity,
        },
        Criterion {
            id: 7,
            name: "decay persistence",
            budget: secs(60),
            expect_fail: None,
            check: decay_persistence,
        },
        Criterion {
            id: 8,
            name: "multi-peakon cross-validation",
            budget: secs(90),
            expect_fail: None,
            check: peakon_cross_validation,
        },
        Criterion {
            id: 9,
            name: "symmetry suite",
            budget: secs(30),
            expect_fail: None,
            check: symmetries,
        },
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let passed = outcome.passed && in_budget;
        println!(
            "{} criterion {} ({}): {}; {:.2}s of {}s{}",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            outcome.detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            c.expect_fail
                .map(|why| format!(" [expected FAIL: {why}]"))
                .unwrap_or_default(),
        );
        if passed == c.expect_fail.is_some() {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criterion outcome(s) differ from the expected ones");
        std::process::exit(1);
    }
}

/// Band-limited random field `Σ_{k ≤ modes} aₖ cos 2πkx + bₖ sin 2πkx`.
fn band_limited(g: &Grid, rng: &mut ChaCha8Rng, modes: usize, scale: f64) -> Field {
    let coeffs: Vec<(f64, f64)> = (0..=modes)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0) * scale,
                rng.gen_range(-1.0..1.0) * scale,
            )
        })
        .collect();
    g.sample(|x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = 2.0 * PI * k as f64 * x;
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
    .unwrap()
}

/// Sum of random Gaussians inside `[−L/2, L/2]`.
fn gaussians(g: &Grid, rng: &mut ChaCha8Rng, count: usize, half: f64) -> Field {
    let params: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(-half / 2.0..half / 2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    g.sample(|x| {
        params
            .iter()
            .map(|(c, w, a)| a * (-((x - c) / w).powi(2)).exp())
            .sum()
    })
    .unwrap()
}

fn kernel_inequalities() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_peakonlab"))
        .args(["kernelcheck", "--trials", "1000000", "--seed", "2024"])
        .output()
        .expect("peakonlab runs");
    let text = String::from_utf8_lossy(&out.stdout);
    let field = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(key).map(|v| v.trim().to_owned()))
            .unwrap_or_default()
    };
    let line: f64 = field("line_min_margin").parse().unwrap_or(f64::NAN);
    let circle: f64 = field("circle_min_margin").parse().unwrap_or(f64::NAN);
    let floors = field("floor_agreements");
    Outcome {
        passed: out.status.code() == Some(0)
            && line > 0.0
            && circle > 0.0
            && floors == "1000000/1000000",
        detail: format!(
            "exit {:?}, min margins line {line:.3e} circle {circle:.3e}, floor identities {floors}",
            out.status.code()
        ),
    }
}

/// `max |∂x² H f − (H f − f)|` with `H = (1 − ∂x²)⁻¹`.
fn identity_residual(f: &Field) -> f64 {
    let h = helmholtz_inverse(f);
    let lhs = second_derivative(&h);
    (0..f.values().len())
        .map(|j| (lhs.values()[j] - (h.values()[j] - f.values()[j])).abs())
        .fold(0.0, f64::max)
}

fn operator_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let circle = Grid::circle(1024).unwrap();
    let worst_circle = (0..100)
        .map(|_| {
            let modes = rng.gen_range(1..=64);
            identity_residual(&band_limited(&circle, &mut rng, modes, 1.0))
        })
        .fold(0.0, f64::max);
    let (coarse, fine) = (
        Grid::line(10.0, 512).unwrap(),
        Grid::line(10.0, 1024).unwrap(),
    );
    let mut worst_ratio = f64::INFINITY;
    for _ in 0..10 {
        let seed = rng.gen();
        let field = |g: &Grid| gaussians(g, &mut ChaCha8Rng::seed_from_u64(seed), 3, 10.0);
        let ratio = identity_residual(&field(&coarse)) / identity_residual(&field(&fine));
        worst_ratio = worst_ratio.min(ratio);
    }
    Outcome {
        passed: worst_circle <= 1e-10 && worst_ratio >= 3.5,
        detail: format!("circle max residual {worst_circle:.3e} (100 fields), line min ratio n/2n {worst_ratio:.3}"),
    }
}

fn peakon_error(model: &ModelSpec, n: usize) -> f64 {
    let g = Grid::line(20.0, n).unwrap();
    let u0 = g.sample(|x| (-x.abs()).exp()).unwrap();
    let cfg = SolverConfig {
        t_end: 1.0,
        step: TimeStep::Cfl {
            cfl: 0.3,
            dt_max: 1e-2,
        },
        ..Default::default()
    };
    let traj = run(model, &u0, &cfg).unwrap();
    let exact = g.sample(|x| (-(x - 1.0).abs()).exp()).unwrap();
    relative_l2(traj.final_field(), &exact).unwrap()
}

fn peakon_translation() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for (name, model) in [
        ("CH", ModelSpec::camassa_holm()),
        ("DP", ModelSpec::degasperis_procesi()),
    ] {
        let errs: Vec<f64> = [1024, 2048, 4096]
            .iter()
            .map(|&n| peakon_error(&model, n))
            .collect();
        passed &= errs[2] <= 2e-2 && errs.windows(2).all(|w| w[1] < w[0]);
        detail.push(format!(
            "{name} errors {:.2e} {:.2e} {:.2e}",
            errs[0], errs[1], errs[2]
        ));
    }
    Outcome {
        passed,
        detail: detail.join(", "),
    }
}

fn energy_conservation() -> Outcome {
    let g = Grid::circle(512).unwrap();
    let u0 = g.sample(|x| 0.2 * (2.0 * PI * x).cos()).unwrap();
    let cfg = SolverConfig {
        t_end: 2.0,
        dealias: true,
        ..Default::default()
    };
    let traj = run(&ModelSpec::camassa_holm(), &u0, &cfg).unwrap();
    let e0 = energy(&u0);
    let drift = |upto: f64| {
        traj.diagnostics
            .iter()
            .filter(|r| r.t <= upto)
            .map(|r| ((r.energy - e0) / e0).abs())
            .fold(0.0, f64::max)
    };
    let total = drift(2.0);
    let peak_slope = traj
        .diagnostics
        .iter()
        .map(|r| r.max_slope)
        .fold(0.0, f64::max);
    Outcome {
        passed: total <= 1e-6,
        detail: format!(
            "relative drift {total:.3e} over [0, 2] (before t = 1: {:.3e}); max slope {peak_slope:.2} vs initial {:.2}",
            drift(1.0),
            max_slope(&u0)
        ),
    }
}

/// `exp(−1/(1 − s²))` for `|s| < 1`.
fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Oracle gap `F(b) − F(a)` by direct quadrature.
fn oracle_gap(model: &ModelSpec, u: &Field, iv: Interval) -> f64 {
    let f = flux_field(model, u, StencilOrder::Fourth);
    convolution_oracle_at(&f, iv.b).unwrap().1 - convolution_oracle_at(&f, iv.a).unwrap().1
}

fn probe_gaps() -> Outcome {
    let ch = ModelSpec::camassa_holm();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let line = Grid::line(10.0, 2048).unwrap();
    let circle = Grid::circle(1024).unwrap();
    let mut worst_rel: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    let mut all_positive = true;
    for trial in 0..200 {
        let on_circle = trial % 2 == 1;
        let (u, iv) = loop {
            let (u, iv) = if on_circle {
                let a = rng.gen_range(0.05..0.6);
                let b = a + rng.gen_range(0.1..0.3);
                // bump centred in the complement (b, 1 + a), measured around the circle
                let r = rng.gen_range(0.03..0.5 * (1.0 + a - b));
                let c = rng.gen_range(b + r..1.0 + a - r);
                let amp = rng.gen_range(0.05..1.0);
                let u = circle
                    .sample(|x| {
                        let d = (x - c).rem_euclid(1.0);
                        let d = if d > 0.5 { d - 1.0 } else { d };
                        amp * bump(d / r)
                    })
                    .unwrap();
                (u, Interval::new(a, b).unwrap())
            } else {
                let a = rng.gen_range(-4.0..2.0);
                let b = a + rng.gen_range(0.5..2.0);
                let r = rng.gen_range(0.2..1.0);
                let c = if rng.gen_bool(0.5) {
                    rng.gen_range(b + r..9.0 - r + 1e-9)
                } else {
                    rng.gen_range(-9.0 + r..a - r)
                };
                let amp = rng.gen_range(0.05..1.0);
                (
                    line.sample(|x| amp * bump((x - c) / r)).unwrap(),
                    Interval::new(a, b).unwrap(),
                )
            };
            let f = flux_field(&ch, &u, StencilOrder::Fourth);
            if u.grid().integrate(f.values()) >= 1e-3 {
                break (u, iv);
            }
        };
        let report = uc_probe(&ch, &u, iv, 0.0).unwrap();
        let oracle = oracle_gap(&ch, &u, iv);
        all_positive &= report.gap() > 0.0 && report.verdict == Verdict::StrictInequalityWitness;
        worst_rel = worst_rel.max((report.gap() - oracle).abs() / oracle.abs());
        min_gap = min_gap.min(report.gap());
    }
    let mut zero_ok = 0;
    for trial in 0..200 {
        let (u, iv) = if trial % 2 == 1 {
            let a = rng.gen_range(0.0..0.5);
            (
                circle.zeros(),
                Interval::new(a, a + rng.gen_range(0.01..0.49)).unwrap(),
            )
        } else {
            let a = rng.gen_range(-10.0..5.0);
            (
                line.zeros(),
                Interval::new(a, a + rng.gen_range(0.1..5.0)).unwrap(),
            )
        };
        if uc_probe(&ch, &u, iv, 0.0).unwrap().verdict == Verdict::ConsistentWithZeroSolution {
            zero_ok += 1;
        }
    }
    Outcome {
        passed: all_positive && worst_rel <= 0.05 && zero_ok == 200,
        detail: format!(
            "200 bumps: min gap {min_gap:.3e}, worst relative deviation from oracle {worst_rel:.3e}; zero field {zero_ok}/200 consistent"
        ),
    }
}

fn fprime_identity() -> Outcome {
    let ch = ModelSpec::camassa_holm();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let circle = Grid::circle(512).unwrap();
    let mut worst_circle: f64 = 0.0;
    let mut worst_ratio = f64::INFINITY;
    let (coarse, fine) = (
        Grid::line(10.0, 512).unwrap(),
        Grid::line(10.0, 1024).unwrap(),
    );
    for _ in 0..50 {
        let modes = rng.gen_range(1..=8);
        let u = band_limited(&circle, &mut rng, modes, 0.3);
        let a = rng.gen_range(0.05..0.5);
        let iv = Interval::new(a, a + rng.gen_range(0.1..0.45)).unwrap();
        worst_circle = worst_circle.max(fprime_identity_residual(&ch, &u, iv).unwrap());

        let seed = rng.gen();
        let a = rng.gen_range(-5.0..2.0);
        let iv = Interval::new(a, a + rng.gen_range(1.0..3.0)).unwrap();
        let res = |g: &Grid| {
            let u = gaussians(g, &mut ChaCha8Rng::seed_from_u64(seed), 3, 10.0);
            fprime_identity_residual(&ch, &u, iv).unwrap()
        };
        worst_ratio = worst_ratio.min(res(&coarse) / res(&fine));
    }
    Outcome {
        passed: worst_circle <= 1e-9 && worst_ratio >= 3.5,
        detail: format!("50 fields: circle max residual {worst_circle:.3e}, line min ratio n/2n {worst_ratio:.3}"),
    }
}

fn decay_persistence() -> Outcome {
    let g = Grid::line(40.0, 4096).unwrap();
    let u0 = g.sample(|x| 1.0 / (0.6 * x).cosh()).unwrap();
    let cfg = SolverConfig {
        t_end: 1.0,
        ..Default::default()
    };
    let traj = run(&ModelSpec::camassa_holm(), &u0, &cfg).unwrap();
    let theta0 = decay_rate(&u0, 15.0, 25.0).unwrap().theta;
    let theta = decay_rate(traj.final_field(), 15.0, 25.0).unwrap().theta;
    Outcome {
        passed: (0.55..=0.65).contains(&theta),
        detail: format!("theta {theta0:.4} at t = 0, {theta:.4} at t = 1"),
    }
}

fn peakon_cross_validation() -> Outcome {
    // Single peakon: the reduction is a constant-velocity flow.
    let mut single_err: f64 = 0.0;
    for c in [0.5, 1.0, 2.0] {
        let s = PeakonState::single(0.0, c);
        let d = multipeakon_rhs(&s).unwrap();
        single_err = single_err
            .max((d.positions()[0] - c).abs())
            .max(d.momenta()[0].abs());
        let end = evolve_peakons(&s, 1.0, 1e-3).unwrap();
        single_err = single_err
            .max((end.positions()[0] - c).abs())
            .max((end.momenta()[0] - c).abs());
    }

    // Overtaking pair, compared with the PDE while the peakons are apart.
    let s = PeakonState::new(vec![-5.0, 0.0], vec![2.0, 1.0]).unwrap();
    let g = Grid::line(30.0, 8192).unwrap();
    let cfg = SolverConfig {
        step: TimeStep::Cfl {
            cfl: 0.3,
            dt_max: 1e-2,
        },
        ..Default::default()
    };
    let mut u = multipeakon_field(&s, &g).unwrap();
    let mut t = 0.0;
    let mut worst_pde: f64 = 0.0;
    for t_next in [0.5, 1.0] {
        let traj = run(
            &ModelSpec::camassa_holm(),
            &u,
            &SolverConfig {
                t_end: t_next - t,
                ..cfg
            },
        )
        .unwrap();
        u = traj.final_field().clone();
        t = t_next;
        let ode = multipeakon_field(&evolve_peakons(&s, t, 1e-3).unwrap(), &g).unwrap();
        worst_pde = worst_pde.max(relative_l2(&u, &ode).unwrap());
    }

    let end = evolve_peakons(&s, 5.0, 1e-3).unwrap();
    let dh = (end.hamiltonian() - s.hamiltonian()).abs();
    let dm = (end.total_momentum() - s.total_momentum()).abs();
    Outcome {
        passed: single_err <= 1e-12 && worst_pde <= 1e-2 && dh <= 1e-8 && dm <= 1e-8,
        detail: format!(
            "single-peakon error {single_err:.1e}; ODE vs PDE relative L2 {worst_pde:.2e} up to t = 1; \
             |dH| {dh:.1e}, |d sum p| {dm:.1e} over T = 5"
        ),
    }
}

fn symmetries() -> Outcome {
    let ch = ModelSpec::camassa_holm();
    let g = Grid::circle(512).unwrap();
    let u0 = g
        .sample(|x| 0.3 + 0.05 * (2.0 * PI * x).cos() + 0.02 * (4.0 * PI * x).sin())
        .unwrap();
    let cfg = |t_end| SolverConfig {
        t_end,
        ..Default::default()
    };
    let evolve = |u: &Field, t| run(&ch, u, &cfg(t)).unwrap().final_field().clone();

    // λ u(x, λt) is a solution whenever u is.
    let lambda = 2.0;
    let scaled = evolve(&u0.scaled(lambda), 0.5);
    let reference = evolve(&u0, lambda * 0.5).scaled(lambda);
    let scale_err = relative_l2(&scaled, &reference).unwrap();

    // u(−x, T − t) is a solution: evolve, reflect, evolve, reflect.
    let back = evolve(&evolve(&u0, 0.5).reflected(), 0.5).reflected();
    let rev_err = relative_l2(&back, &u0).unwrap();
    let moved = relative_l2(&evolve(&u0, 0.5), &u0).unwrap();
    Outcome {
        passed: scale_err <= 1e-4 && rev_err <= 1e-4 && norm_sup(&u0) > 0.0,
        detail: format!(
            "scaling {scale_err:.2e}, reflection/time-reversal {rev_err:.2e} (state moved {moved:.2e})"
        ),
    }
}
