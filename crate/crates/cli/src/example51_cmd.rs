use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use largesol::exact::Example51State;
use largesol::store::load_trajectory;
use largesol::MeshKind;

use crate::error::CliError;

#[derive(Debug, Args)]
pub struct Example51Args {
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Sample count; rows are rho = k / m for k = 1, ..., m - 1.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Radial trajectory directory to compare at time t on {rho <= 0.9}.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

/// `Σ vol·|u − u_ex| / Σ vol·|u_ex|` over radial cells with `ρ ≤ 0.9`.
fn relative_l1_error(dir: &std::path::Path, state: &Example51State) -> Result<f64, CliError> {
    let (traj, _) = load_trajectory(dir)?;
    if traj.mesh().kind() != MeshKind::Radial {
        return Err(CliError::Usage(
            "--compare needs a radial trajectory".into(),
        ));
    }
    let snap = traj
        .at(state.t)
        .ok_or_else(|| CliError::Usage(format!("trajectory has no snapshot at t = {}", state.t)))?;
    let mesh = traj.mesh();
    let (mut num, mut den) = (0.0, 0.0);
    for ((c, v), u) in mesh.centers().iter().zip(mesh.volumes()).zip(snap.values()) {
        if c[0] <= 0.9 {
            let exact = state.value(c[0]);
            num += v * (u - exact).abs();
            den += v * exact.abs();
        }
    }
    Ok(num / den)
}

pub fn run(a: &Example51Args) -> Result<(), CliError> {
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let state = Example51State::at(a.t)?;
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    writeln!(out, "rho,value")?;
    for k in 1..a.samples {
        let rho = k as f64 / a.samples as f64;
        writeln!(out, "{rho:.16e},{:.16e}", state.value(rho))?;
    }
    if let Some(dir) = &a.compare {
        writeln!(
            out,
            "# relative_l1_error = {:.6e}",
            relative_l1_error(dir, &state)?
        )?;
    }
    out.flush()?;
    Ok(())
}
