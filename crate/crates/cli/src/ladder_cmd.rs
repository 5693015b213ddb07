use std::path::{Path, PathBuf};

use clap::Args;
use largesol::fastdiff::SolverSettings;
use largesol::ladder::{
    barrier_exponent_fit, barrier_samples, monotone_check, run_ladder, Classification, FitOptions,
    LadderConfig, LadderReport, LevelOutcome, Model,
};
use largesol::store::{describe_mesh, save_trajectory, MANIFEST_FILE};
use largesol::Manifest;

use crate::error::CliError;
use crate::setup::{self, MeshArgs, SolverArgs};
use crate::svg::LogLogPlot;

#[derive(Debug, Args)]
pub struct LadderArgs {
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long = "T", id = "T")]
    pub total: f64,
    /// First boundary value; level k uses n0 * 2^k.
    #[arg(long, default_value_t = 1.0)]
    pub n0: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    /// Monitor margin (default: 4h).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Nonnegative initial datum shared by all levels.
    #[arg(long, default_value = "zero")]
    pub u0: String,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_ladder: f64,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also store every level as a trajectory directory.
    #[arg(long)]
    pub save_levels: bool,
    /// Emit SVG barrier-exponent plots (1 < p < 2).
    #[arg(long)]
    pub plot: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NonexistenceArgs {
    /// Exponent, at least 2.
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value = "disk:1")]
    pub domain: String,
    #[arg(long = "T", id = "T", default_value_t = 0.1)]
    pub total: f64,
    #[arg(long, default_value_t = 1.0)]
    pub n0: f64,
    #[arg(long, default_value_t = 6)]
    pub levels: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Optional directory for the report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Job<'a> {
    domain: &'a str,
    p: f64,
    total: f64,
    n0: f64,
    levels: usize,
    delta: Option<f64>,
    u0: &'a str,
    tol_ladder: f64,
    mesh: &'a MeshArgs,
    solver: &'a SolverArgs,
}

fn execute(job: &Job) -> Result<(LadderReport, Manifest), CliError> {
    setup::check_p(job.p)?;
    if job.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let mesh = setup::mesh(job.domain, job.mesh)?;
    let u0 = setup::initial_datum(&mesh, job.u0)?;
    let model = if job.p == 1.0 {
        Model::TotalVariation {
            eps_schedule: setup::tv_schedule(&u0, job.n0, job.solver.eps),
        }
    } else {
        let shape = &mesh.domain().expect("planar or radial mesh").shape;
        Model::PLaplacian(setup::flux_params(job.p, job.n0, job.solver.eps, shape)?)
    };
    let h = mesh.spacing();
    let mut config = LadderConfig::geometric(job.n0, job.levels, h, job.total);
    if let Some(d) = job.delta {
        config.delta = d;
    }
    config.tau = job.solver.tau(job.total);
    config.snapshot_times = job.solver.snapshot_times(job.total);
    config.settings = job.solver.settings();
    config.tol_ladder = job.tol_ladder;
    let report = run_ladder(&u0, job.total, &model, &config)?;

    let mut m = Manifest::new();
    describe_mesh(&mesh, &mut m);
    m.set_f64("p", job.p)
        .set_f64("eps", report.eps)
        .set_f64("T", job.total)
        .set_f64("tau", report.tau)
        .set_f64("delta", report.delta)
        .set_f64("tol_ladder", report.tol_ladder)
        .set("u0", job.u0)
        .set_list("levels", &config.levels)
        .set_list("snapshot_times", &config.snapshot_times)
        .set_f64("tol", config.settings.tol)
        .set("max_iter", config.settings.max_iter)
        .set_f64("tol_lin", config.settings.tol_lin);
    if let Model::TotalVariation { eps_schedule } = &model {
        m.set_list("eps_schedule", eps_schedule);
    }
    let status: Vec<&str> = report
        .levels
        .iter()
        .map(|l| match l.outcome {
            LevelOutcome::Solved(_) => "solved",
            LevelOutcome::Failed(_) => "failed",
        })
        .collect();
    m.set("level_status", status.join(","))
        .set_list("successive_differences", &report.successive_differences())
        .set_f64("monotone_violation", monotone_check(&report))
        .set("classification", report.classification);
    Ok((report, m))
}

fn write_report(
    report: &LadderReport,
    mut m: Manifest,
    dir: &Path,
    settings: &SolverSettings,
    save_levels: bool,
    plot: bool,
) -> Result<PathBuf, CliError> {
    setup::create_dir(dir)?;
    let mut csv = std::io::BufWriter::new(std::fs::File::create(dir.join("ladder.csv"))?);
    report.write_csv(&mut csv)?;
    std::io::Write::flush(&mut csv)?;

    if report.p > 1.0 && report.p < 2.0 {
        if let Ok((te, de)) = barrier_exponent_fit(report, report.p) {
            m.set_f64("barrier_time_exponent", te)
                .set_f64("barrier_distance_exponent", de);
        }
        if plot {
            plot_barrier(report, dir)?;
        }
    }
    if save_levels {
        let mut dirs = Vec::new();
        for (k, level) in report.levels.iter().enumerate() {
            if let Some(traj) = level.trajectory() {
                let name = format!("level_{k:02}");
                let mut extra = Manifest::new();
                extra.set("command", "ladder-level").set("level", k);
                save_trajectory(traj, settings, &extra, &dir.join(&name))?;
                dirs.push(name);
            }
        }
        m.set("level_dirs", dirs.join(","));
    }
    let path = dir.join(MANIFEST_FILE);
    m.save(&path)?;
    Ok(path)
}

fn plot_barrier(report: &LadderReport, dir: &Path) -> Result<(), CliError> {
    let s = match barrier_samples(report, report.p, &FitOptions::default()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("note: no barrier plots ({e})");
            return Ok(());
        }
    };
    let (te, de) = barrier_exponent_fit(report, report.p)?;
    LogLogPlot {
        title: "centre value against time",
        x_label: "t",
        y_label: "u",
        ln_x: &s.log_t,
        ln_y: &s.log_u_center,
        slope: te,
    }
    .save(&dir.join("barrier_time.svg"))?;
    LogLogPlot {
        title: "final profile against boundary distance",
        x_label: "d",
        y_label: "u",
        ln_x: &s.log_d,
        ln_y: &s.log_u_band,
        slope: de,
    }
    .save(&dir.join("barrier_distance.svg"))?;
    Ok(())
}

fn failed_levels(report: &LadderReport) -> Vec<String> {
    report
        .levels
        .iter()
        .filter_map(|l| match &l.outcome {
            LevelOutcome::Failed(msg) => Some(format!("n = {}: {msg}", l.n)),
            LevelOutcome::Solved(_) => None,
        })
        .collect()
}

pub fn run(a: &LadderArgs) -> Result<(), CliError> {
    let job = Job {
        domain: &a.domain,
        p: a.p,
        total: a.total,
        n0: a.n0,
        levels: a.levels,
        delta: a.delta,
        u0: &a.u0,
        tol_ladder: a.tol_ladder,
        mesh: &a.mesh,
        solver: &a.solver,
    };
    let (report, m) = execute(&job)?;
    let path = write_report(
        &report,
        m,
        &a.out,
        &a.solver.settings(),
        a.save_levels,
        a.plot,
    )?;
    say!("classification = {}", report.classification);
    for (k, d) in report.successive_differences().iter().enumerate() {
        say!("diff[{}] = {d:.6e}", k + 1);
    }
    let failed = failed_levels(&report);
    if !failed.is_empty() {
        return Err(CliError::Solver {
            message: failed.join("; "),
            manifest: path,
        });
    }
    Ok(())
}

pub fn run_nonexistence(a: &NonexistenceArgs) -> Result<(), CliError> {
    if a.p.is_nan() || a.p < 2.0 {
        return Err(CliError::Usage(format!(
            "nonexistence needs p >= 2, got {}",
            a.p
        )));
    }
    let job = Job {
        domain: &a.domain,
        p: a.p,
        total: a.total,
        n0: a.n0,
        levels: a.levels,
        delta: a.delta,
        u0: "zero",
        tol_ladder: 1e-3,
        mesh: &a.mesh,
        solver: &a.solver,
    };
    let (report, m) = execute(&job)?;
    if let Some(dir) = &a.out {
        write_report(&report, m, dir, &a.solver.settings(), false, false)?;
    }
    let sups: Vec<String> = report
        .solved()
        .iter()
        .map(|l| format!("{:.4e}", l.sup_k.last().copied().unwrap_or(0.0)))
        .collect();
    say!("sup_K at T per level = {}", sups.join(", "));
    say!("classification = {}", report.classification);
    if report.classification == Classification::Diverging {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "expected DIVERGING for p = {}, got {}",
            a.p, report.classification
        )))
    }
}
