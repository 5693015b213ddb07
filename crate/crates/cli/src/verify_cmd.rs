use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use largesol::fastdiff::Trajectory;
use largesol::ladder::{monotone_check, LadderReport, LevelOutcome};
use largesol::store::{load_trajectory, load_trajectory_on, MANIFEST_FILE};
use largesol::verify::{
    contraction_gap, entropy_residual, p2_linearity, sup_bound_gap, write_checks, Bump, Check,
    SClamp,
};
use largesol::{Manifest, MeshKind};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// L1 contraction between `--in` and `--against`.
    Contraction,
    /// Entropy residuals for three clamp/truncation/bump combinations.
    Entropy,
    /// Sup bound `‖u0‖∞ + 2t/s0` of a p = 1 run.
    SupBound,
    /// `u_n / n` agreement across the levels of a p = 2 ladder.
    P2Linearity,
    /// Monotonicity in n across the levels of a ladder.
    Monotone,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Trajectory directory, or a ladder directory written with --save-levels.
    #[arg(long = "in", id = "in")]
    pub input: PathBuf,
    /// Second trajectory for the contraction suite.
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Override the suite's default threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Canonical `(S, h_trunc, l)` picks paired with the default bump.
fn entropy_combos() -> Vec<(SClamp, f64, f64)> {
    let [a, b, c] = SClamp::canonical();
    vec![(a, 2.0, 0.5), (b, 2.0, 0.3), (c, 1.5, 0.8)]
}

/// Bump centred at the incentre, clear of boundary cells, inside `(t0, T)`.
fn default_bump(traj: &Trajectory) -> Bump {
    let mesh = traj.mesh();
    let centre = match (mesh.kind(), mesh.domain()) {
        (MeshKind::Planar, Some(d)) => d.shape.incenter(),
        _ => [0.0, 0.0],
    };
    let clearance = mesh
        .boundary_cells()
        .iter()
        .map(|&c| {
            let x = mesh.centers()[c];
            (x[0] - centre[0]).hypot(x[1] - centre[1])
        })
        .fold(f64::INFINITY, f64::min);
    let (t0, t1) = (traj.snapshots[0].time, traj.last().time);
    Bump {
        t_center: 0.5 * (t0 + t1),
        t_radius: 0.4 * (t1 - t0),
        x_center: centre,
        x_radius: 0.9 * clearance,
    }
}

fn load_ladder(dir: &Path) -> Result<LadderReport, CliError> {
    let m = Manifest::load(&dir.join(MANIFEST_FILE))?;
    let names = m
        .get("level_dirs")
        .filter(|s| !s.is_empty())
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{} holds no stored levels (run `ladder --save-levels`)",
                dir.display()
            ))
        })?;
    let mut outcomes = Vec::new();
    let mut mesh = None;
    for name in names.split(',') {
        let path = dir.join(name.trim());
        let (traj, _) = match &mesh {
            None => load_trajectory(&path)?,
            Some(shared) => load_trajectory_on(&path, shared)?,
        };
        mesh.get_or_insert_with(|| traj.mesh().clone());
        outcomes.push((traj.n, LevelOutcome::Solved(traj)));
    }
    let mesh = mesh.expect("at least one level");
    let delta = m.f64("delta")?;
    Ok(LadderReport::assemble(
        outcomes,
        mesh.monitor_mask(delta),
        delta,
        mesh.spacing(),
        m.f64("tau")?,
        m.f64("p")?,
        m.f64("eps")?,
        m.f64("tol_ladder")?,
    ))
}

fn checks(a: &VerifyArgs) -> Result<Vec<Check>, CliError> {
    let limit = |default: f64| a.threshold.unwrap_or(default);
    Ok(match a.suite {
        Suite::Contraction => {
            let other = a
                .against
                .as_ref()
                .ok_or_else(|| CliError::Usage("contraction needs --against".into()))?;
            let (u, _) = load_trajectory(&a.input)?;
            let (v, _) = load_trajectory_on(other, u.mesh())?;
            let measure = u.mesh().measure();
            vec![
                Check::at_most(
                    "contraction_u_v",
                    contraction_gap(&u, &v)?,
                    limit(1e-6 * measure),
                ),
                Check::at_most(
                    "contraction_v_u",
                    contraction_gap(&v, &u)?,
                    limit(1e-6 * measure),
                ),
            ]
        }
        Suite::Entropy => {
            let (traj, _) = load_trajectory(&a.input)?;
            let eta = default_bump(&traj);
            entropy_combos()
                .iter()
                .map(|(s, h, l)| {
                    let name = format!("entropy_S[{},{}]_h{}_l{}", s.a, s.b, h, l);
                    Ok(Check::at_most(
                        name,
                        entropy_residual(&traj, s, *h, *l, &eta)?,
                        limit(5e-2),
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?
        }
        Suite::SupBound => {
            let (traj, m) = load_trajectory(&a.input)?;
            if traj.params.p != 1.0 {
                return Err(CliError::Usage("sup-bound applies to p = 1 runs".into()));
            }
            let s0 = m.f64("s0")?;
            vec![Check::at_most(
                "sup_bound_gap",
                sup_bound_gap(&traj, &traj.snapshots[0], s0),
                limit(0.05),
            )]
        }
        Suite::P2Linearity => {
            let report = load_ladder(&a.input)?;
            if report.p != 2.0 {
                return Err(CliError::Usage("p2-linearity needs a p = 2 ladder".into()));
            }
            vec![Check::at_most(
                "p2_linearity",
                p2_linearity(&report),
                limit(1e-6),
            )]
        }
        Suite::Monotone => {
            let report = load_ladder(&a.input)?;
            vec![Check::at_most(
                "monotone_violation",
                monotone_check(&report),
                limit(1e-9),
            )]
        }
    })
}

pub fn run(a: &VerifyArgs) -> Result<(), CliError> {
    let table = checks(a)?;
    write_checks(&table, std::io::stdout().lock())?;
    if let Some(path) = &a.out {
        write_checks(
            &table,
            std::io::BufWriter::new(std::fs::File::create(path)?),
        )?;
    }
    let failed: Vec<&str> = table
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
