//! Boundary-lift ladders `n = n₀, 2n₀, 4n₀, …` and their classification.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fastdiff::{evolve_with, FluxParams, SolverSettings, Trajectory};
use crate::mesh::{p_energy, truncate, Field};
use crate::numerics::compensated_sum;
use crate::tvflow::tv_evolve_with;

/// Which flow a ladder runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    /// `u_t = Δ_p u`, `p > 1`, with one regularization shared by all levels.
    PLaplacian(FluxParams),
    /// Total variation flow with a shared ε schedule.
    TotalVariation { eps_schedule: Vec<f64> },
}

impl Model {
    pub fn p(&self) -> f64 {
        match self {
            Model::PLaplacian(f) => f.p,
            Model::TotalVariation { .. } => 1.0,
        }
    }

    pub fn eps_min(&self) -> f64 {
        match self {
            Model::PLaplacian(f) => f.eps,
            Model::TotalVariation { eps_schedule } => eps_schedule.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    /// Strictly increasing boundary data.
    pub levels: Vec<f64>,
    /// Monitor margin: `K_δ = {dist(x, ∂Ω) >= δ}`.
    pub delta: f64,
    pub tau: f64,
    pub snapshot_times: Vec<f64>,
    pub settings: SolverSettings,
    pub tol_ladder: f64,
}

impl LadderConfig {
    /// `levels` geometric lifts from `n0`, `δ = 4h`, `τ = T/400`.
    pub fn geometric(n0: f64, levels: usize, h: f64, total: f64) -> Self {
        Self {
            levels: (0..levels).map(|k| n0 * 2f64.powi(k as i32)).collect(),
            delta: 4.0 * h,
            tau: total / 400.0,
            snapshot_times: vec![total],
            settings: SolverSettings::default(),
            tol_ladder: 1e-3,
        }
    }

    pub fn validate(&self, h: f64) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidParameter("empty n schedule".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "n schedule must be strictly increasing".into(),
            ));
        }
        if self.delta < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must be >= 2h = {}",
                self.delta,
                2.0 * h
            )));
        }
        if !(self.tol_ladder > 0.0) {
            return Err(Error::InvalidParameter(
                "tol_ladder must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Converged,
    Diverging,
    Undecided,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Converged => "CONVERGED",
            Classification::Diverging => "DIVERGING",
            Classification::Undecided => "UNDECIDED",
        })
    }
}

#[derive(Debug, Clone)]
pub enum LevelOutcome {
    Solved(Trajectory),
    Failed(String),
}

/// Per-level monitor statistics at every snapshot time.
#[derive(Debug, Clone)]
pub struct Level {
    pub n: f64,
    pub outcome: LevelOutcome,
    pub times: Vec<f64>,
    pub l1_k: Vec<f64>,
    pub sup_k: Vec<f64>,
    /// Relative L¹ distance on `K_δ` to the previous solved level.
    pub diff_prev: Vec<Option<f64>>,
    /// Largest `(u_prev − u)⁺` on `K_δ` against the previous solved level.
    pub violations: Vec<Option<f64>>,
}

impl Level {
    pub fn trajectory(&self) -> Option<&Trajectory> {
        match &self.outcome {
            LevelOutcome::Solved(t) => Some(t),
            LevelOutcome::Failed(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LadderReport {
    pub levels: Vec<Level>,
    pub mask: Vec<bool>,
    pub delta: f64,
    pub h: f64,
    pub tau: f64,
    pub p: f64,
    pub eps: f64,
    pub tol_ladder: f64,
    pub classification: Classification,
}

/// Runs every level (in parallel) and assembles the report.
pub fn run_ladder(
    u0: &Field,
    total: f64,
    model: &Model,
    config: &LadderConfig,
) -> Result<LadderReport> {
    let mesh = u0.mesh();
    config.validate(mesh.spacing())?;
    if u0.inf() < 0.0 {
        return Err(Error::InvalidParameter("u0 must be nonnegative".into()));
    }
    let outcomes: Vec<(f64, LevelOutcome)> = config
        .levels
        .par_iter()
        .map(|&n| {
            let run = || -> Result<Trajectory> {
                let start = truncate(u0, -n, n)?;
                match model {
                    Model::PLaplacian(params) => evolve_with(
                        &start,
                        total,
                        config.tau,
                        params,
                        n,
                        &config.snapshot_times,
                        &config.settings,
                    ),
                    Model::TotalVariation { eps_schedule } => tv_evolve_with(
                        &start,
                        total,
                        config.tau,
                        n,
                        eps_schedule,
                        &config.snapshot_times,
                        &config.settings,
                    ),
                }
            };
            let outcome = match run() {
                Ok(t) => LevelOutcome::Solved(t),
                Err(e) => LevelOutcome::Failed(e.to_string()),
            };
            (n, outcome)
        })
        .collect();
    let tau = outcomes
        .iter()
        .find_map(|(_, o)| match o {
            LevelOutcome::Solved(t) => Some(t.tau),
            _ => None,
        })
        .unwrap_or(config.tau);
    Ok(LadderReport::assemble(
        outcomes,
        mesh.monitor_mask(config.delta),
        config.delta,
        mesh.spacing(),
        tau,
        model.p(),
        model.eps_min(),
        config.tol_ladder,
    ))
}

fn masked_rel_l1(a: &Field, b: &Field, mask: &[bool]) -> f64 {
    let vol = a.mesh().volumes();
    let idx = (0..a.len()).filter(|&i| mask[i]);
    let num = compensated_sum(
        idx.clone()
            .map(|i| vol[i] * (a.values()[i] - b.values()[i]).abs()),
    );
    let den = compensated_sum(idx.map(|i| vol[i] * a.values()[i].abs()));
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn masked_violation(upper: &Field, lower: &Field, mask: &[bool]) -> f64 {
    (0..upper.len())
        .filter(|&i| mask[i])
        .map(|i| (lower.values()[i] - upper.values()[i]).max(0.0))
        .fold(0.0, f64::max)
}

impl LadderReport {
    /// Builds a report from finished levels, ordered as given.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        outcomes: Vec<(f64, LevelOutcome)>,
        mask: Vec<bool>,
        delta: f64,
        h: f64,
        tau: f64,
        p: f64,
        eps: f64,
        tol_ladder: f64,
    ) -> Self {
        let mut levels: Vec<Level> = Vec::with_capacity(outcomes.len());
        let mut prev: Option<usize> = None;
        for (n, outcome) in outcomes {
            let mut level = Level {
                n,
                outcome,
                times: Vec::new(),
                l1_k: Vec::new(),
                sup_k: Vec::new(),
                diff_prev: Vec::new(),
                violations: Vec::new(),
            };
            if let LevelOutcome::Solved(tr) = &level.outcome {
                let before = prev.and_then(|k| levels[k].trajectory());
                for (j, snap) in tr.snapshots.iter().enumerate() {
                    level.times.push(snap.time);
                    level.l1_k.push(snap.masked_l1(Some(&mask)));
                    level.sup_k.push(snap.masked_sup(&mask));
                    let other = before.and_then(|b| b.snapshots.get(j));
                    level
                        .diff_prev
                        .push(other.map(|o| masked_rel_l1(snap, o, &mask)));
                    level
                        .violations
                        .push(other.map(|o| masked_violation(snap, o, &mask)));
                }
                prev = Some(levels.len());
            }
            levels.push(level);
        }
        let mut report = Self {
            levels,
            mask,
            delta,
            h,
            tau,
            p,
            eps,
            tol_ladder,
            classification: Classification::Undecided,
        };
        report.classification = report.classify();
        report
    }

    pub fn solved(&self) -> Vec<&Level> {
        self.levels
            .iter()
            .filter(|l| l.trajectory().is_some())
            .collect()
    }

    pub fn top(&self) -> Option<&Trajectory> {
        self.levels.iter().rev().find_map(|l| l.trajectory())
    }

    /// Top-level solution at the final time.
    pub fn limit_estimate(&self) -> Option<&Field> {
        self.top().map(|t| t.last())
    }

    /// Largest successive difference over the snapshot times.
    pub fn successive_differences(&self) -> Vec<f64> {
        self.solved()
            .iter()
            .skip(1)
            .map(|l| l.diff_prev.iter().flatten().copied().fold(0.0, f64::max))
            .collect()
    }

    fn classify(&self) -> Classification {
        let solved = self.solved();
        if solved.len() < 2 || solved.len() < self.levels.len() {
            return Classification::Undecided;
        }
        let a = solved[solved.len() - 2]
            .sup_k
            .last()
            .copied()
            .unwrap_or(0.0);
        let b = solved[solved.len() - 1]
            .sup_k
            .last()
            .copied()
            .unwrap_or(0.0);
        if a > 0.0 && b >= 1.5 * a {
            return Classification::Diverging;
        }
        let diffs = self.successive_differences();
        if diffs.len() >= 2
            && diffs[diffs.len() - 2..]
                .iter()
                .all(|&d| d <= self.tol_ladder)
            && monotone_check(self) <= 1e-9
        {
            return Classification::Converged;
        }
        Classification::Undecided
    }

    /// `level,n,time,L1_K,sup_K,diff_prev,violations` rows and a trailing
    /// classification record.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "level,n,time,L1_K,sup_K,diff_prev,violations")?;
        for (k, l) in self.levels.iter().enumerate() {
            if let LevelOutcome::Failed(msg) = &l.outcome {
                writeln!(
                    out,
                    "{k},{:.17e},FAILED,,,,\"{}\"",
                    l.n,
                    msg.replace('"', "'")
                )?;
                continue;
            }
            for j in 0..l.times.len() {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
                writeln!(
                    out,
                    "{k},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                    l.n,
                    l.times[j],
                    l.l1_k[j],
                    l.sup_k[j],
                    opt(l.diff_prev[j]),
                    opt(l.violations[j])
                )?;
            }
        }
        writeln!(
            out,
            "# classification = {}, h = {:e}, tau = {:e}, eps = {:e}, delta = {:e}, p = {}",
            self.classification, self.h, self.tau, self.eps, self.delta, self.p
        )?;
        Ok(())
    }
}

/// Largest `(u_n − u_{n+1})⁺` on `K_δ` over consecutive levels and snapshots.
pub fn monotone_check(report: &LadderReport) -> f64 {
    report
        .levels
        .iter()
        .flat_map(|l| l.violations.iter().flatten().copied())
        .fold(0.0, f64::max)
}

/// Options for [`barrier_exponent_fit_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Distance band `[lo, hi]` used for the spatial slope.
    pub band: (f64, f64),
    pub min_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            band: (0.1, 0.3),
            min_points: 4,
        }
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `(time exponent, distance exponent)` of the top level with default options.
pub fn barrier_exponent_fit(report: &LadderReport, p: f64) -> Result<(f64, f64)> {
    barrier_exponent_fit_with(report, p, &FitOptions::default())
}

pub fn barrier_exponent_fit_with(
    report: &LadderReport,
    p: f64,
    opts: &FitOptions,
) -> Result<(f64, f64)> {
    let s = barrier_samples(report, p, opts)?;
    Ok((
        ls_slope(&s.log_t, &s.log_u_center),
        ls_slope(&s.log_d, &s.log_u_band),
    ))
}

/// Log-log data behind [`barrier_exponent_fit_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSamples {
    /// `ln t` and `ln u(t, x_c)` at the deepest cell.
    pub log_t: Vec<f64>,
    pub log_u_center: Vec<f64>,
    /// Bin averages of `ln d` and `ln u(T, x)` over the distance band.
    pub log_d: Vec<f64>,
    pub log_u_band: Vec<f64>,
}

pub fn barrier_samples(report: &LadderReport, p: f64, opts: &FitOptions) -> Result<BarrierSamples> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::BadExponent(p));
    }
    if report.classification == Classification::Diverging {
        return Err(Error::InsufficientData("ladder diverges".into()));
    }
    let top = match report.levels.last().and_then(|l| l.trajectory()) {
        Some(t) => t,
        None => return Err(Error::InsufficientData("top level not solved".into())),
    };
    let mesh = top.mesh();
    let centre = mesh.deepest_cell();
    let (mut lt, mut lu) = (Vec::new(), Vec::new());
    for s in &top.snapshots {
        let u = s.values()[centre];
        if s.time > 0.0 && u > 0.0 {
            lt.push(s.time.ln());
            lu.push(u.ln());
        }
    }
    if lt.len() < opts.min_points {
        return Err(Error::InsufficientData(format!(
            "{} usable snapshot times (need {})",
            lt.len(),
            opts.min_points
        )));
    }

    // bin the band by cell-width distance shells
    let last = top.last();
    let h = mesh.spacing();
    let (lo, hi) = opts.band;
    let bins = ((hi - lo) / h).ceil().max(1.0) as usize;
    let mut acc = vec![(0.0, 0.0, 0usize); bins];
    for (i, &d) in mesh.cell_boundary_distances().iter().enumerate() {
        let u = last.values()[i];
        if d >= lo && d <= hi && u > 0.0 {
            let b = (((d - lo) / h) as usize).min(bins - 1);
            acc[b].0 += d.ln();
            acc[b].1 += u.ln();
            acc[b].2 += 1;
        }
    }
    let (ld, lv): (Vec<f64>, Vec<f64>) = acc
        .iter()
        .filter(|b| b.2 > 0)
        .map(|b| (b.0 / b.2 as f64, b.1 / b.2 as f64))
        .unzip();
    if ld.len() < opts.min_points {
        return Err(Error::InsufficientData(format!(
            "{} distance bands (need {})",
            ld.len(),
            opts.min_points
        )));
    }
    Ok(BarrierSamples {
        log_t: lt,
        log_u_center: lu,
        log_d: ld,
        log_u_band: lv,
    })
}

/// Space-time truncation energy of one trajectory, trapezoid weights in time.
pub fn trajectory_energy(traj: &Trajectory, p: f64, k: f64) -> Result<f64> {
    let snaps = &traj.snapshots;
    let mut total = 0.0;
    for j in 0..snaps.len() {
        let left = if j > 0 {
            snaps[j].time - snaps[j - 1].time
        } else {
            0.0
        };
        let right = if j + 1 < snaps.len() {
            snaps[j + 1].time - snaps[j].time
        } else {
            0.0
        };
        let w = 0.5 * (left + right);
        if w > 0.0 {
            total += p_energy(std::slice::from_ref(&snaps[j]), p, k, w)?;
        }
    }
    Ok(total)
}

/// Relative change of `E(k)/k` between the two highest solved levels.
pub fn energy_uniformity(report: &LadderReport, ks: &[f64]) -> Result<Vec<(f64, f64)>> {
    let solved = report.solved();
    if solved.len() < 2 {
        return Err(Error::InsufficientData("need two solved levels".into()));
    }
    let a = solved[solved.len() - 2].trajectory().unwrap();
    let b = solved[solved.len() - 1].trajectory().unwrap();
    let p = report.p;
    ks.iter()
        .map(|&k| {
            let ea = trajectory_energy(a, p, k)?;
            let eb = trajectory_energy(b, p, k)?;
            Ok((k, (eb - ea).abs() / eb.abs().max(f64::MIN_POSITIVE)))
        })
        .collect()
}

/// `min T_k(u_n)` over boundary-adjacent cells at snapshots `t >= t_min`.
pub fn boundary_saturation(traj: &Trajectory, k: f64, t_min: f64) -> f64 {
    let cells = traj.mesh().boundary_cells();
    traj.snapshots
        .iter()
        .filter(|s| s.time >= t_min)
        .flat_map(|s| cells.iter().map(move |&c| s.values()[c].clamp(-k, k)))
        .fold(f64::INFINITY, f64::min)
}
