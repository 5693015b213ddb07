//! Total variation flow (`p = 1`) through ε-continuation of the regularized
//! resolvent `u − τ div(∇u / √(|∇u|² + ε²)) = v`.

use crate::error::{Error, Result};
use crate::fastdiff::{
    flux_field, march, solve_resolvent, step_divergence_residual, FluxParams, SolverSettings,
    StepResult, Trajectory,
};
use crate::mesh::{Boundary, FaceVector, Field};

/// `{1e-1, 1e-2, 1e-3, 1e-4} × scale`.
pub fn default_eps_schedule(scale: f64) -> Vec<f64> {
    [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|e| e * scale).collect()
}

/// Value-range scale used with [`default_eps_schedule`].
pub fn value_scale(u0: &Field) -> f64 {
    u0.sup_abs().max(1.0)
}

fn check_schedule(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidParameter("empty eps schedule".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter(
            "eps values must be positive".into(),
        ));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "eps schedule must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Result of one continuation solve.
#[derive(Debug, Clone)]
pub struct TvResolvent {
    pub u: Field,
    /// `∇u / √(|∇u|² + ε_min²)` on every face.
    pub z: FaceVector,
    pub iterations: usize,
    pub linear_iterations: usize,
}

/// `(I + τ𝒜_n)⁻¹ v` by continuation over `eps_schedule`.
pub fn tv_resolvent(
    v: &Field,
    tau: f64,
    n: f64,
    eps_schedule: &[f64],
) -> Result<(Field, FaceVector)> {
    let r = tv_resolvent_with(
        v,
        tau,
        &Boundary::Uniform(n),
        eps_schedule,
        v,
        &SolverSettings::default(),
    )?;
    Ok((r.u, r.z))
}

pub fn tv_resolvent_with(
    v: &Field,
    tau: f64,
    boundary: &Boundary,
    eps_schedule: &[f64],
    guess: &Field,
    settings: &SolverSettings,
) -> Result<TvResolvent> {
    check_schedule(eps_schedule)?;
    let mut u = guess.clone();
    let mut iterations = 0;
    let mut linear_iterations = 0;
    let mut law = FluxParams::new(1.0, eps_schedule[0])?;
    for &eps in eps_schedule {
        law = FluxParams::new(1.0, eps)?;
        let r = solve_resolvent(v, tau, &law, boundary, &u, settings).map_err(|e| match e {
            Error::NoConvergence {
                iterations,
                residual,
                ..
            } => Error::NoConvergence {
                iterations,
                residual,
                eps: Some(eps),
            },
            other => other,
        })?;
        iterations += r.iterations;
        linear_iterations += r.linear_iterations;
        u = r.u;
    }
    let z = flux_field(&u, &law, boundary)?;
    Ok(TvResolvent {
        u,
        z,
        iterations,
        linear_iterations,
    })
}

/// Backward-Euler TV flow with Dirichlet datum `n`; stores `z` per snapshot.
pub fn tv_evolve(
    u0: &Field,
    total: f64,
    tau: f64,
    n: f64,
    eps_schedule: &[f64],
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    tv_evolve_with(
        u0,
        total,
        tau,
        n,
        eps_schedule,
        snapshot_times,
        &SolverSettings::default(),
    )
}

pub fn tv_evolve_with(
    u0: &Field,
    total: f64,
    tau: f64,
    n: f64,
    eps_schedule: &[f64],
    snapshot_times: &[f64],
    settings: &SolverSettings,
) -> Result<Trajectory> {
    check_schedule(eps_schedule)?;
    let boundary = Boundary::Uniform(n);
    let mut div_res = 0.0f64;
    let (snapshots, z, mut stats, dt) = march(u0, total, tau, snapshot_times, |prev, dt| {
        let r = tv_resolvent_with(prev, dt, &boundary, eps_schedule, prev, settings)?;
        div_res = div_res.max(step_divergence_residual(&r.u, prev, &r.z, dt)?);
        Ok(StepResult {
            u: r.u,
            z: Some(r.z),
            iterations: r.iterations,
            linear_iterations: r.linear_iterations,
        })
    })?;
    stats.divergence_residual = Some(div_res);
    Ok(Trajectory {
        snapshots,
        z,
        n,
        params: FluxParams::new(1.0, *eps_schedule.last().unwrap())?,
        tau: dt,
        eps_schedule: eps_schedule.to_vec(),
        stats,
    })
}

/// Minimum outward normal component of `z` over the boundary faces.
pub fn boundary_trace_diagnostic(z: &FaceVector) -> f64 {
    let mesh = z.mesh();
    mesh.boundary_faces()
        .iter()
        .map(|&k| z.values()[k])
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexShape;
    use crate::mesh::{build_mesh, DomainSpec};

    fn radial(h: f64) -> std::sync::Arc<crate::mesh::Mesh> {
        build_mesh(&DomainSpec::radial_disk(1.0, h).unwrap()).unwrap()
    }

    #[test]
    fn zero_datum_on_disk_rises_to_two_tau() {
        let mesh = radial(1.0 / 128.0);
        let v = Field::constant(mesh, 0.0);
        let (u, z) = tv_resolvent(&v, 0.1, 10.0, &default_eps_schedule(1.0)).unwrap();
        for &x in u.values() {
            assert!((x - 0.2).abs() < 1e-3, "{x}");
        }
        assert!(z.sup_abs() <= 1.0 + 1e-8);
        assert!(boundary_trace_diagnostic(&z) > 0.999);
    }

    #[test]
    fn below_boundary_constant_shifts_by_two_tau() {
        let mesh = radial(1.0 / 128.0);
        let v = Field::constant(mesh, 3.0);
        let (u, _) = tv_resolvent(&v, 0.1, 10.0, &default_eps_schedule(3.0)).unwrap();
        for &x in u.values() {
            assert!((x - 3.2).abs() < 1e-3, "{x}");
        }
    }

    #[test]
    fn datum_equal_to_boundary_is_a_fixed_point() {
        let mesh = radial(1.0 / 64.0);
        let v = Field::constant(mesh, 10.0);
        let (u, z) = tv_resolvent(&v, 0.1, 10.0, &default_eps_schedule(10.0)).unwrap();
        assert_eq!(u.values(), v.values());
        assert_eq!(boundary_trace_diagnostic(&z), 0.0);
    }

    #[test]
    fn tiny_tau_is_near_identity() {
        let spec = DomainSpec::new(ConvexShape::unit_disk(), 1.0 / 16.0).unwrap();
        let mesh = build_mesh(&spec).unwrap();
        let v = Field::from_fn(mesh, |c, _| c[0] - 0.5 * c[1]).unwrap();
        let (u, z) = tv_resolvent(&v, 1e-8, 2.0, &default_eps_schedule(1.0)).unwrap();
        assert!(u.zip_with(&v, |a, b| a - b).unwrap().sup_abs() <= 1e-5);
        assert!(z.sup_abs() <= 1.0 + 1e-8);
    }

    #[test]
    fn trace_of_radial_unit_field() {
        let mesh = radial(1.0 / 32.0);
        let z = FaceVector::from_fn(mesh.clone(), |f| f.position[0]);
        assert_eq!(boundary_trace_diagnostic(&z), 1.0);
        assert_eq!(boundary_trace_diagnostic(&FaceVector::zeros(mesh)), 0.0);
    }

    #[test]
    fn schedule_must_decrease() {
        let mesh = radial(0.125);
        let v = Field::constant(mesh, 0.0);
        assert!(tv_resolvent(&v, 0.1, 1.0, &[1e-2, 1e-1]).is_err());
        assert!(tv_resolvent(&v, 0.1, 1.0, &[]).is_err());
    }

    #[test]
    fn evolve_stores_z_per_snapshot() {
        let mesh = radial(1.0 / 32.0);
        let u0 = Field::constant(mesh, 0.0);
        let tr = tv_evolve(
            &u0,
            0.2,
            0.05,
            20.0,
            &default_eps_schedule(1.0),
            &[0.1, 0.2],
        )
        .unwrap();
        assert_eq!(tr.snapshots.len(), 3);
        assert_eq!(tr.z.len(), 3);
        assert!(tr.z.iter().all(|z| z.sup_abs() <= 1.0 + 1e-8));
        assert!(tr.stats.divergence_residual.unwrap() < 1e-6);
        let plateau = tr.last().values()[0];
        assert!((plateau - 0.4).abs() < 1e-3, "{plateau}");
    }
}
