//! Subcommand implementations. Run outcomes (including blow-up, collision
//! and non-finite states) come back as exit codes; [`CliError`] covers
//! everything that stops a command from running.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use peakonlab_core::{
    evolve_peakons, find_vanishing_intervals, kernel_check, multipeakon_field, norm_sup, read_csv,
    relative_l2, run, uc_probe_with, Field, IntegratorError, KernelCheckReport, PeakonError,
    PeakonState, ProbeReport, RunStatus, SolverConfig, Trajectory,
};

use crate::config::{ConfigError, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BLOWUP_OR_COLLISION: i32 = 3;
pub const EXIT_NON_FINITE: i32 = 4;
pub const EXIT_KERNEL_VIOLATION: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// Every error path is a configuration or usage problem as far as the
    /// exit-code contract goes; run outcomes are reported as `Ok(code)`.
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(io_err(format!("cannot create {}", path.display())))
}

/// Resolves the output directory: `--out` wins over `[output] dir`, which is
/// relative to the scenario file.
pub fn output_dir(scenario: &Scenario, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => scenario.base_dir.join(&scenario.output.dir),
    }
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    status: &'a str,
    t_final: f64,
    steps: usize,
    snapshots: usize,
    grid_points: usize,
    energy_initial: f64,
    energy_final: f64,
    energy_relative_drift: f64,
    max_slope_final: f64,
    sup_norm_final: f64,
}

fn write_summary(dir: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let first = traj.diagnostics.first().expect("initial row");
    let last = traj.diagnostics.last().expect("initial row");
    let drift = if first.energy > 0.0 {
        (last.energy - first.energy) / first.energy
    } else {
        last.energy - first.energy
    };
    let summary = RunSummary {
        status: traj.status.as_str(),
        t_final: traj.final_time(),
        steps: traj.steps,
        snapshots: traj.snapshots.len(),
        grid_points: traj.final_field().values().len(),
        energy_initial: first.energy,
        energy_final: last.energy,
        energy_relative_drift: drift,
        max_slope_final: last.max_slope,
        sup_norm_final: last.sup_norm,
    };
    let text = toml::to_string(&summary).map_err(|e| CliError::Failed(e.to_string()))?;
    let path = dir.join("summary.toml");
    fs::write(&path, text).map_err(io_err(format!("cannot write {}", path.display())))
}

fn export(dir: &Path, traj: &Trajectory) -> Result<(), CliError> {
    traj.export(dir)
        .map_err(|e| CliError::Failed(format!("cannot export to {}: {e}", dir.display())))?;
    write_summary(dir, traj)
}

pub fn simulate(scenario: &Scenario, out: &Path) -> Result<i32, CliError> {
    let model = scenario.model()?;
    let u0 = scenario.initial_field()?;
    let cfg = scenario.solver_config()?;
    fs::create_dir_all(out).map_err(io_err(format!("cannot create {}", out.display())))?;
    match run(&model, &u0, &cfg) {
        Ok(traj) => {
            export(out, &traj)?;
            log::info!(
                "{} at t = {} after {} steps",
                traj.status.as_str(),
                traj.final_time(),
                traj.steps
            );
            Ok(match traj.status {
                RunStatus::Completed => EXIT_OK,
                RunStatus::BlowUpSuspected => EXIT_BLOWUP_OR_COLLISION,
                RunStatus::NonFiniteState => EXIT_NON_FINITE,
            })
        }
        Err(IntegratorError::NonFiniteState { t, partial }) => {
            export(out, &partial)?;
            log::error!("non-finite state at t = {t}");
            Ok(EXIT_NON_FINITE)
        }
        Err(e) => Err(CliError::Failed(e.to_string())),
    }
}

/// Which snapshots `probe` reads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnapshotSelector {
    All,
    Index(usize),
    /// The recorded snapshot closest in time.
    Time(f64),
}

impl std::str::FromStr for SnapshotSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(SnapshotSelector::All);
        }
        if let Ok(i) = s.parse::<usize>() {
            return Ok(SnapshotSelector::Index(i));
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() => Ok(SnapshotSelector::Time(t)),
            _ => Err(format!(
                "expected a snapshot index, a time, or \"all\"; got {s:?}"
            )),
        }
    }
}

fn read_snapshot_index(dir: &Path) -> Result<Vec<(usize, f64, PathBuf)>, CliError> {
    let path = dir.join("snapshots.csv");
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("no snapshots in {}: {e}", dir.display())))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let bad = || CliError::Usage(format!("{}:{}: malformed row", path.display(), lineno + 1));
        let mut parts = line.split(',');
        let (Some(i), Some(t), Some(file), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let i = i.parse().map_err(|_| bad())?;
        let t = t.parse().map_err(|_| bad())?;
        rows.push((i, t, dir.join(file)));
    }
    Ok(rows)
}

fn select_snapshots(
    rows: Vec<(usize, f64, PathBuf)>,
    sel: SnapshotSelector,
) -> Result<Vec<(usize, f64, PathBuf)>, CliError> {
    match sel {
        SnapshotSelector::All => Ok(rows),
        SnapshotSelector::Index(i) => rows
            .into_iter()
            .find(|r| r.0 == i)
            .map(|r| vec![r])
            .ok_or_else(|| CliError::Usage(format!("snapshot {i} does not exist"))),
        SnapshotSelector::Time(t) => rows
            .into_iter()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|r| vec![r])
            .ok_or_else(|| CliError::Usage("no snapshots recorded".into())),
    }
}

/// One probe record as written to `probe.jsonl`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ProbeRecord {
    pub snapshot: usize,
    pub t_star: f64,
    pub a: f64,
    pub b: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub f_a_grid: f64,
    pub f_b_grid: f64,
    pub gap: f64,
    pub f_mass: f64,
    pub max_u_on_interval: f64,
    pub verdict: &'static str,
}

impl ProbeRecord {
    fn new(snapshot: usize, r: &ProbeReport) -> Self {
        ProbeRecord {
            snapshot,
            t_star: r.t_star,
            a: r.interval.a,
            b: r.interval.b,
            f_a: r.f_a,
            f_b: r.f_b,
            f_a_grid: r.f_a_grid,
            f_b_grid: r.f_b_grid,
            gap: r.gap(),
            f_mass: r.f_mass,
            max_u_on_interval: r.max_u_on_interval,
            verdict: r.verdict.as_str(),
        }
    }
}

/// Probes every vanishing interval of the selected snapshots in `dir`.
pub fn probe_records(
    scenario: &Scenario,
    dir: &Path,
    sel: SnapshotSelector,
) -> Result<Vec<ProbeRecord>, CliError> {
    let model = scenario.model()?;
    let tol = scenario.probe_tolerances()?;
    let mut records = Vec::new();
    for (index, t, path) in select_snapshots(read_snapshot_index(dir)?, sel)? {
        let file = File::open(&path)
            .map_err(|e| CliError::Usage(format!("snapshot {index} ({}): {e}", path.display())))?;
        let u = read_csv(file).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let min_width = scenario.min_width(u.grid());
        let intervals = find_vanishing_intervals(&u, scenario.probe.eps, min_width)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for iv in intervals {
            let r = uc_probe_with(&model, &u, iv, t, &tol)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            records.push(ProbeRecord::new(index, &r));
        }
    }
    Ok(records)
}

pub fn probe(scenario: &Scenario, dir: &Path, sel: SnapshotSelector) -> Result<i32, CliError> {
    let records = probe_records(scenario, dir, sel)?;
    let path = dir.join("probe.jsonl");
    let mut file = create(&path)?;
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    for r in &records {
        let line = serde_json::to_string(r).map_err(|e| CliError::Failed(e.to_string()))?;
        writeln!(file, "{line}").map_err(io_err(path.display().to_string()))?;
        writeln!(stdout, "{line}").map_err(io_err("stdout"))?;
    }
    file.flush().map_err(io_err(path.display().to_string()))?;
    Ok(EXIT_OK)
}

pub fn format_kernel_report(r: &KernelCheckReport) -> String {
    format!(
        "trials {}\nseed {}\nline_min_margin {:.6e}\nline_violations {}\n\
         circle_min_margin {:.6e}\ncircle_violations {}\nfloor_agreements {}/{}\nresampled {}\n{}\n",
        r.trials,
        r.seed,
        r.line_min_margin,
        r.line_violations,
        r.circle_min_margin,
        r.circle_violations,
        r.floor_agreements,
        r.trials,
        r.resampled,
        if r.passed() { "PASS" } else { "FAIL" },
    )
}

pub fn kernelcheck(trials: u64, seed: u64) -> Result<i32, CliError> {
    let report = kernel_check(trials, seed).map_err(|e| CliError::Usage(e.to_string()))?;
    print!("{}", format_kernel_report(&report));
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_KERNEL_VIOLATION
    })
}

fn state_row(t: f64, s: &PeakonState) -> String {
    let mut row = format!("{t:.16e}");
    for (q, p) in s.positions().iter().zip(s.momenta()) {
        row.push_str(&format!(",{q:.16e},{p:.16e}"));
    }
    row
}

fn state_header(n: usize) -> String {
    let mut h = String::from("t");
    for i in 1..=n {
        h.push_str(&format!(",q{i},p{i}"));
    }
    h
}

/// Evolves the peakon ODE and, when requested, the PDE from the matching
/// profile. Writes `peakon_trajectory.csv` and `peakon_comparison.csv`.
pub fn peakon(scenario: &Scenario, out: &Path) -> Result<i32, CliError> {
    let state = scenario.peakon_state()?;
    let model = scenario.model()?;
    if !model.is_camassa_holm() {
        return Err(CliError::Usage(
            "the peakon ODE is the Camassa–Holm reduction; set b = 2".into(),
        ));
    }
    let cfg = scenario.solver_config()?;
    let pk = &scenario.peakon;
    if !(pk.dt > 0.0) || pk.record_every == 0 {
        return Err(CliError::Usage(
            "[peakon] needs dt > 0 and record_every >= 1".into(),
        ));
    }
    let grid = scenario.grid()?;
    let compare = pk.compare_pde;
    if compare && grid.domain().is_periodic() {
        return Err(CliError::Usage("PDE comparison needs a line domain".into()));
    }
    fs::create_dir_all(out).map_err(io_err(format!("cannot create {}", out.display())))?;

    let traj_path = out.join("peakon_trajectory.csv");
    let mut traj = create(&traj_path)?;
    let werr = || io_err(traj_path.display().to_string());
    writeln!(traj, "{}", state_header(state.len())).map_err(werr())?;
    writeln!(traj, "{}", state_row(0.0, &state)).map_err(werr())?;

    let cmp_path = out.join("peakon_comparison.csv");
    let mut cmp = if compare {
        let mut w = create(&cmp_path)?;
        writeln!(w, "t,relative_l2,sup_diff").map_err(io_err(cmp_path.display().to_string()))?;
        Some(w)
    } else {
        None
    };
    let mut pde: Option<Field> = if compare {
        Some(multipeakon_field(&state, &grid).map_err(|e| CliError::Usage(e.to_string()))?)
    } else {
        None
    };

    let segment = pk.dt * pk.record_every as f64;
    let segments = (cfg.t_end / segment).ceil().max(0.0) as usize;
    let mut s = state;
    let mut t = 0.0;
    let mut code = EXIT_OK;
    for k in 1..=segments {
        let t_next = (k as f64 * segment).min(cfg.t_end);
        match evolve_peakons(&s, t_next - t, pk.dt) {
            Ok(next) => s = next,
            Err(PeakonError::Collision { index, gap, .. }) => {
                log::error!(
                    "peakons {index} and {} collided near t = {t} (gap {gap:e})",
                    index + 1
                );
                code = EXIT_BLOWUP_OR_COLLISION;
                break;
            }
            Err(e) => return Err(CliError::Failed(e.to_string())),
        }
        if let (Some(u), Some(w)) = (pde.as_mut(), cmp.as_mut()) {
            let seg_cfg = SolverConfig {
                t_end: t_next - t,
                snapshot_every: 0,
                ..cfg
            };
            let traj = run(&model, u, &seg_cfg).map_err(|e| CliError::Failed(e.to_string()))?;
            if traj.status != RunStatus::Completed {
                return Err(CliError::Failed(format!(
                    "PDE run stopped: {}",
                    traj.status.as_str()
                )));
            }
            *u = traj.final_field().clone();
            let exact =
                multipeakon_field(&s, &grid).map_err(|e| CliError::Failed(e.to_string()))?;
            let rel = relative_l2(u, &exact).map_err(|e| CliError::Failed(e.to_string()))?;
            let sup = norm_sup(
                &u.zip_with(&exact, |a, b| a - b)
                    .map_err(|e| CliError::Failed(e.to_string()))?,
            );
            writeln!(w, "{t_next:.16e},{rel:.16e},{sup:.16e}")
                .map_err(io_err(cmp_path.display().to_string()))?;
        }
        t = t_next;
        writeln!(traj, "{}", state_row(t, &s)).map_err(werr())?;
    }
    traj.flush().map_err(werr())?;
    if let Some(mut w) = cmp {
        w.flush().map_err(io_err(cmp_path.display().to_string()))?;
    }
    Ok(code)
}

/// Relative L² and sup differences of two snapshot files on the same grid.
pub fn compare(a: &Path, b: &Path) -> Result<(f64, f64), CliError> {
    let load = |p: &Path| -> Result<Field, CliError> {
        let f = File::open(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        read_csv(f).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
    };
    let (u, v) = (load(a)?, load(b)?);
    let rel = relative_l2(&u, &v).map_err(|e| CliError::Usage(e.to_string()))?;
    let diff = u
        .zip_with(&v, |x, y| x - y)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((rel, norm_sup(&diff)))
}
