use std::path::{Path, PathBuf};

use clap::Args;
use largesol::fastdiff::{evolve_with, SolverSettings, Trajectory};
use largesol::store::{describe_mesh, save_trajectory, MANIFEST_FILE};
use largesol::tvflow::tv_evolve_with;
use largesol::{Field, Manifest};

use crate::error::CliError;
use crate::setup::{self, MeshArgs, SolverArgs};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Domain: disk:R[@cx,cy], square:a, rect:WxH or polygon:x,y;x,y;...
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub p: f64,
    /// Dirichlet boundary value.
    #[arg(long)]
    pub n: f64,
    /// Final time.
    #[arg(long = "T", id = "T")]
    pub total: f64,
    /// zero, const:<c>, example51 or a snapshot CSV.
    #[arg(long, default_value = "zero")]
    pub u0: String,
    #[command(flatten)]
    pub mesh: MeshArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn inputs(a: &SimulateArgs) -> Manifest {
    let mut m = Manifest::new();
    m.set("command", "simulate")
        .set("u0", &a.u0)
        .set_f64("T", a.total);
    m
}

/// Records a failed run so the caller can point at it.
pub fn failure_manifest(
    dir: &Path,
    base: &Manifest,
    mesh: &largesol::Mesh,
    settings: &SolverSettings,
    message: &str,
) -> CliError {
    let mut m = base.clone();
    describe_mesh(mesh, &mut m);
    m.set_f64("tol", settings.tol)
        .set("max_iter", settings.max_iter)
        .set_f64("tol_lin", settings.tol_lin)
        .set("status", "failed")
        .set("error", message.replace('\n', " "));
    let path = dir.join(MANIFEST_FILE);
    if let Err(e) = std::fs::create_dir_all(dir)
        .map_err(largesol::Error::from)
        .and_then(|_| m.save(&path))
    {
        return CliError::Core(e);
    }
    CliError::Solver {
        message: message.to_string(),
        manifest: path,
    }
}

fn integrate(
    u0: &Field,
    a: &SimulateArgs,
    settings: &SolverSettings,
) -> Result<Trajectory, CliError> {
    let total = a.total;
    let tau = a.solver.tau(total);
    let times = a.solver.snapshot_times(total);
    let solve = if a.p == 1.0 {
        let schedule = setup::tv_schedule(u0, a.n, a.solver.eps);
        tv_evolve_with(u0, total, tau, a.n, &schedule, &times, settings)
    } else {
        let shape = &u0.mesh().domain().expect("planar or radial mesh").shape;
        let params = setup::flux_params(a.p, a.n, a.solver.eps, shape)?;
        evolve_with(u0, total, tau, &params, a.n, &times, settings)
    };
    solve.map_err(|e| match e {
        largesol::Error::InvalidParameter(_) | largesol::Error::BadExponent(_) => e.into(),
        e => {
            let mut m = inputs(a);
            m.set_f64("p", a.p).set_f64("n", a.n);
            failure_manifest(&a.out, &m, u0.mesh(), settings, &e.to_string())
        }
    })
}

pub fn run(a: &SimulateArgs) -> Result<(), CliError> {
    setup::check_p(a.p)?;
    let mesh = setup::mesh(&a.domain, &a.mesh)?;
    let u0 = setup::initial_datum(&mesh, &a.u0)?;
    let settings = a.solver.settings();
    let traj = integrate(&u0, a, &settings)?;
    let mut extra = inputs(a);
    extra.set("status", "ok");
    let path = save_trajectory(&traj, &settings, &extra, &a.out)?;
    say!(
        "wrote {} snapshots ({} cells, {} steps, {} nonlinear iterations) to {}",
        traj.snapshots.len(),
        mesh.cell_count(),
        traj.stats.steps,
        traj.stats.nonlinear_iterations,
        path.display()
    );
    Ok(())
}
