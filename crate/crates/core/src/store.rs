//! Trajectory directories: a `manifest.txt` plus one CSV per snapshot.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fastdiff::{FluxParams, Linearization, RunStats, SolverSettings, Trajectory};
use crate::geometry::ConvexShape;
use crate::manifest::Manifest;
use crate::mesh::io::{load_field, save_field};
use crate::mesh::{build_mesh, DomainSpec, FaceVector, Mesh};
use crate::tvflow::boundary_trace_diagnostic;

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Records the mesh so that [`mesh_from_manifest`] rebuilds it exactly.
pub fn describe_mesh(mesh: &Mesh, m: &mut Manifest) {
    m.set_f64("h", mesh.spacing());
    match mesh.domain() {
        Some(d) => {
            m.set("domain", d.shape.describe());
            m.set("radial", d.radial);
            m.set_f64("s0", d.s0);
        }
        None => {
            m.set("domain", "line");
            m.set("line_cells", mesh.cell_count());
        }
    }
}

pub fn mesh_from_manifest(m: &Manifest) -> Result<Arc<Mesh>> {
    let h = m.f64("h")?;
    let domain = m.require("domain")?;
    if domain == "line" {
        let cells: usize = m
            .require("line_cells")?
            .parse()
            .map_err(|_| Error::Parse("line_cells is not an integer".into()))?;
        return Mesh::line(cells, h);
    }
    let shape = ConvexShape::parse(domain)?;
    let mut spec = match m.get("s0") {
        Some(_) => DomainSpec::with_s0(shape, h, m.f64("s0")?)?,
        None => DomainSpec::new(shape, h)?,
    };
    spec.radial = m.get("radial") == Some("true");
    build_mesh(&spec)
}

fn snapshot_name(k: usize) -> String {
    format!("u_{k:04}.csv")
}

fn flux_name(k: usize) -> String {
    format!("z_{k:04}.csv")
}

fn write_faces<W: Write>(z: &FaceVector, mut out: W) -> Result<()> {
    writeln!(out, "x,y,value")?;
    for (f, v) in z.mesh().faces().iter().zip(z.values()) {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e}",
            f.position[0], f.position[1], v
        )?;
    }
    Ok(())
}

fn read_faces(mesh: Arc<Mesh>, path: &Path) -> Result<FaceVector> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut values = Vec::with_capacity(mesh.face_count());
    for (row, line) in file.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let nums = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{}: row {row}: {e}", path.display())))?;
        let face = mesh.faces().get(values.len()).ok_or(Error::MeshMismatch)?;
        if nums.len() != 3
            || (face.position[0] - nums[0]).abs() > 1e-12
            || (face.position[1] - nums[1]).abs() > 1e-12
        {
            return Err(Error::MeshMismatch);
        }
        values.push(nums[2]);
    }
    FaceVector::new(mesh, values)
}

/// Manifest describing a trajectory without writing any files.
pub fn trajectory_manifest(traj: &Trajectory, settings: &SolverSettings) -> Manifest {
    let mut m = Manifest::new();
    describe_mesh(traj.mesh(), &mut m);
    m.set_f64("p", traj.params.p)
        .set_f64("eps", traj.params.eps)
        .set_list("eps_schedule", &traj.eps_schedule)
        .set_f64("tau", traj.tau)
        .set_f64("n", traj.n)
        .set_list("snapshot_times", &traj.times())
        .set(
            "method",
            match settings.method {
                Linearization::Newton => "newton",
                Linearization::Picard => "picard",
            },
        )
        .set_f64("tol", settings.tol)
        .set("max_iter", settings.max_iter)
        .set_f64("tol_lin", settings.tol_lin)
        .set("max_lin_iter", settings.max_lin_iter)
        .set("steps", traj.stats.steps)
        .set("nonlinear_iterations", traj.stats.nonlinear_iterations)
        .set(
            "max_nonlinear_iterations",
            traj.stats.max_nonlinear_iterations,
        )
        .set("linear_iterations", traj.stats.linear_iterations);
    if let Some(r) = traj.stats.divergence_residual {
        m.set_f64("divergence_residual", r);
    }
    if !traj.z.is_empty() {
        let trace = traj
            .z
            .iter()
            .skip(1)
            .map(boundary_trace_diagnostic)
            .fold(f64::INFINITY, f64::min);
        if trace.is_finite() {
            m.set_f64("z_min_boundary_trace", trace);
        }
    }
    m
}

/// Writes the trajectory into `dir` (created if needed); `extra` keys are appended.
pub fn save_trajectory(
    traj: &Trajectory,
    settings: &SolverSettings,
    extra: &Manifest,
    dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut m = trajectory_manifest(traj, settings);
    let mut names = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = snapshot_name(k);
        save_field(s, &dir.join(&name))?;
        names.push(name);
    }
    m.set("snapshot_files", names.join(","));
    if !traj.z.is_empty() {
        let mut znames = Vec::new();
        for (k, z) in traj.z.iter().enumerate() {
            let name = flux_name(k);
            let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
            write_faces(z, &mut w)?;
            w.flush()?;
            znames.push(name);
        }
        m.set("z_files", znames.join(","));
    }
    for (k, v) in extra.entries() {
        m.set(k, v);
    }
    let path = dir.join(MANIFEST_FILE);
    m.save(&path)?;
    Ok(path)
}

fn parse_count(m: &Manifest, key: &str) -> usize {
    m.get(key).and_then(|v| v.parse().ok()).unwrap_or(0)
}

/// Reads a directory written by [`save_trajectory`].
pub fn load_trajectory(dir: &Path) -> Result<(Trajectory, Manifest)> {
    load(dir, None)
}

/// Like [`load_trajectory`] but places the snapshots on an existing mesh,
/// which must match the one recorded in the manifest.
pub fn load_trajectory_on(dir: &Path, mesh: &Arc<Mesh>) -> Result<(Trajectory, Manifest)> {
    load(dir, Some(mesh))
}

fn load(dir: &Path, shared: Option<&Arc<Mesh>>) -> Result<(Trajectory, Manifest)> {
    let m = Manifest::load(&dir.join(MANIFEST_FILE))?;
    let mesh = match shared {
        Some(mesh) => {
            let mut expected = Manifest::new();
            describe_mesh(mesh, &mut expected);
            if expected.entries().any(|(k, v)| m.get(k) != Some(v)) {
                return Err(Error::MeshMismatch);
            }
            mesh.clone()
        }
        None => mesh_from_manifest(&m)?,
    };
    let times = m.list("snapshot_times")?;
    let files: Vec<&str> = m.require("snapshot_files")?.split(',').collect();
    if files.len() != times.len() || files.is_empty() {
        return Err(Error::Parse(
            "snapshot_files and snapshot_times disagree".into(),
        ));
    }
    let snapshots = files
        .iter()
        .zip(&times)
        .map(|(f, &t)| Ok(load_field(mesh.clone(), &dir.join(f.trim()))?.with_time(t)))
        .collect::<Result<Vec<_>>>()?;
    let z = match m.get("z_files") {
        Some(list) => list
            .split(',')
            .map(|f| read_faces(mesh.clone(), &dir.join(f.trim())))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    if !z.is_empty() && z.len() != snapshots.len() {
        return Err(Error::Parse("z_files and snapshot_files disagree".into()));
    }
    let p = m.f64("p")?;
    let eps = m.f64("eps")?;
    let params = FluxParams::new(p, eps)?;
    let stats = RunStats {
        steps: parse_count(&m, "steps"),
        nonlinear_iterations: parse_count(&m, "nonlinear_iterations"),
        max_nonlinear_iterations: parse_count(&m, "max_nonlinear_iterations"),
        linear_iterations: parse_count(&m, "linear_iterations"),
        divergence_residual: m.f64("divergence_residual").ok(),
    };
    let traj = Trajectory {
        snapshots,
        z,
        n: m.f64("n")?,
        params,
        tau: m.f64("tau")?,
        eps_schedule: m.list("eps_schedule").unwrap_or_else(|_| vec![eps]),
        stats,
    };
    Ok((traj, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastdiff::evolve;
    use crate::mesh::Field;
    use crate::tvflow::{default_eps_schedule, tv_evolve};

    #[test]
    fn planar_tv_round_trip() {
        let spec = DomainSpec::new(ConvexShape::parse("square:1").unwrap(), 1.0 / 16.0).unwrap();
        let mesh = build_mesh(&spec).unwrap();
        let u0 = Field::constant(mesh, 0.0);
        let traj = tv_evolve(
            &u0,
            0.05,
            0.01,
            1.0,
            &default_eps_schedule(1.0),
            &[0.02, 0.05],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_trajectory(
            &traj,
            &SolverSettings::default(),
            &Manifest::new(),
            dir.path(),
        )
        .unwrap();
        let (back, m) = load_trajectory(dir.path()).unwrap();
        assert_eq!(back.times(), traj.times());
        assert_eq!(back.z.len(), traj.z.len());
        for (a, b) in back.snapshots.iter().zip(&traj.snapshots) {
            assert_eq!(a.values(), b.values());
        }
        assert_eq!(back.z[2].values(), traj.z[2].values());
        assert!(m.f64("z_min_boundary_trace").is_ok());
        assert_eq!(m.get("method"), Some("newton"));
    }

    #[test]
    fn line_mesh_round_trip() {
        let mesh = Mesh::line(10, 0.1).unwrap();
        let u0 = Field::constant(mesh, 0.0);
        let params = FluxParams::new(2.0, 0.0).unwrap();
        let traj = evolve(&u0, 0.1, 0.01, &params, 1.0, &[0.1]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut extra = Manifest::new();
        extra.set("u0", "zero");
        save_trajectory(&traj, &SolverSettings::default(), &extra, dir.path()).unwrap();
        let (back, m) = load_trajectory(dir.path()).unwrap();
        assert_eq!(back.last().values(), traj.last().values());
        assert_eq!(back.stats.steps, traj.stats.steps);
        assert_eq!(m.get("u0"), Some("zero"));
        let (shared, _) = load_trajectory_on(dir.path(), back.mesh()).unwrap();
        assert!(Arc::ptr_eq(shared.mesh(), back.mesh()));
        let other = Mesh::line(12, 0.1).unwrap();
        assert!(matches!(
            load_trajectory_on(dir.path(), &other),
            Err(Error::MeshMismatch)
        ));
    }
}
