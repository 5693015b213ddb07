//! Implicit time stepping for `u_t = Δ_p u` with Dirichlet datum `n`.
//!
//! Each backward-Euler step solves the resolvent equation
//! `u − τ div F(∇u) = v`, where `F` is the regularized face flux
//! `F(g) = (g² + ε²)^{(p−2)/2} g`. The resolvent is the minimizer of the
//! strictly convex energy `½‖u − v‖² + τ Σ w d Φ(g)` with `Φ' = F`, so its
//! Jacobian is a symmetric positive-definite weighted Laplacian and Newton
//! with an exact line search converges from any starting point.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{divergence, gradient, Boundary, FaceVector, Field, Mesh};
use crate::numerics::{compensated_sum, SymmetricSystem};

/// Exponent and regularization of the p-Laplacian flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub p: f64,
    pub eps: f64,
}

impl FluxParams {
    /// Validates `p >= 1`, `eps >= 0`, and `eps > 0` when `p < 2`.
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be >= 0")));
        }
        if p < 2.0 && eps == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive for p = {p} < 2"
            )));
        }
        Ok(Self { p, eps })
    }

    /// Default regularization `1e-6 · n / diam`.
    pub fn with_default_eps(p: f64, n: f64, diameter: f64) -> Result<Self> {
        let eps = if p >= 2.0 {
            0.0
        } else {
            1e-6 * n.abs().max(1.0) / diameter
        };
        Self::new(p, eps)
    }
}

/// `(g2 + ε²)^{(p−2)/2}`.
pub fn flux_coefficient(g2: f64, params: &FluxParams) -> Result<f64> {
    if !(g2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("g2 = {g2} must be >= 0")));
    }
    let s = g2 + params.eps * params.eps;
    if params.p == 2.0 {
        return Ok(1.0);
    }
    if s == 0.0 {
        return if params.p < 2.0 {
            Err(Error::Degenerate)
        } else {
            Ok(0.0)
        };
    }
    Ok(s.powf(0.5 * (params.p - 2.0)))
}

/// A monotone scalar face flux `F(g)` with potential `Φ`, `Φ' = F`.
///
/// Custom laws (for instance Leray–Lions type fluxes) must be strictly
/// monotone and coercive, `F(g)·g >= α|g|^p`; this is the implementor's
/// responsibility and is not checked.
pub trait FluxLaw: Sync {
    fn flux(&self, g: f64) -> f64;
    /// `F'(g) >= 0`.
    fn derivative(&self, g: f64) -> f64;
    fn potential(&self, g: f64) -> f64;
    /// `F(g)/g`, the lagged diffusivity.
    fn coefficient(&self, g: f64) -> f64;
}

impl FluxLaw for FluxParams {
    fn flux(&self, g: f64) -> f64 {
        self.coefficient(g) * g
    }

    fn derivative(&self, g: f64) -> f64 {
        let s = g * g + self.eps * self.eps;
        if self.p == 2.0 {
            return 1.0;
        }
        if s == 0.0 {
            return if self.p > 2.0 { 0.0 } else { f64::INFINITY };
        }
        s.powf(0.5 * (self.p - 4.0)) * ((self.p - 1.0) * g * g + self.eps * self.eps)
    }

    fn potential(&self, g: f64) -> f64 {
        let s = g * g + self.eps * self.eps;
        (s.powf(0.5 * self.p) - self.eps.powf(self.p)) / self.p
    }

    fn coefficient(&self, g: f64) -> f64 {
        let s = g * g + self.eps * self.eps;
        if self.p == 2.0 {
            1.0
        } else if s == 0.0 {
            if self.p > 2.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            s.powf(0.5 * (self.p - 2.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    /// Newton on the convex energy with an exact line search.
    Newton,
    /// Lagged diffusivity fixed point.
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub method: Linearization,
    /// Per-cell update tolerance relative to `max(1, |u|)`.
    pub tol: f64,
    pub max_iter: usize,
    pub tol_lin: f64,
    pub max_lin_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            method: Linearization::Newton,
            tol: 1e-10,
            max_iter: 200,
            tol_lin: 1e-12,
            max_lin_iter: 20_000,
        }
    }
}

/// Solution of one resolvent problem with iteration counts.
#[derive(Debug, Clone)]
pub struct Resolvent {
    pub u: Field,
    pub iterations: usize,
    pub linear_iterations: usize,
}

/// `u − τ div F(∇u) = v` with boundary value `n`, default settings.
pub fn resolvent_step(v: &Field, tau: f64, params: &FluxParams, n: f64) -> Result<Field> {
    solve_resolvent(
        v,
        tau,
        params,
        &Boundary::Uniform(n),
        v,
        &SolverSettings::default(),
    )
    .map(|r| r.u)
}

struct FaceGrad<'a> {
    mesh: &'a Mesh,
    boundary: &'a Boundary,
}

impl FaceGrad<'_> {
    fn fill(&self, u: &[f64], g: &mut [f64]) {
        let mut slot = 0;
        for (gk, f) in g.iter_mut().zip(self.mesh.faces()) {
            *gk = match f.outer {
                Some(o) => (u[o] - u[f.inner]) / f.distance,
                None => {
                    let b = self.boundary.value(slot);
                    slot += 1;
                    (b - u[f.inner]) / f.distance
                }
            };
        }
    }
}

/// Residual `vol(u − v) − τ·(net outward flux)`, the energy gradient.
#[allow(clippy::too_many_arguments)]
fn residual<L: FluxLaw>(
    mesh: &Mesh,
    grad: &FaceGrad,
    u: &[f64],
    v: &[f64],
    tau: f64,
    law: &L,
    g: &mut [f64],
    r: &mut [f64],
) {
    grad.fill(u, g);
    for ((ri, vol), (ui, vi)) in r.iter_mut().zip(mesh.volumes()).zip(u.iter().zip(v)) {
        *ri = vol * (ui - vi);
    }
    for (f, &gk) in mesh.faces().iter().zip(g.iter()) {
        let q = tau * f.weight * law.flux(gk);
        r[f.inner] -= q;
        if let Some(o) = f.outer {
            r[o] += q;
        }
    }
}

fn linear_solve(
    mesh: &Mesh,
    sys: &SymmetricSystem,
    rhs: &[f64],
    guess: &[f64],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, usize)> {
    if mesh.is_chain() {
        Ok((sys.solve_chain(rhs)?, 1))
    } else {
        sys.solve_cg(rhs, guess, settings.tol_lin, settings.max_lin_iter)
    }
}

fn converged(du: &[f64], u: &[f64], tol: f64) -> bool {
    du.iter()
        .zip(u)
        .all(|(d, x)| d.abs() <= tol * x.abs().max(1.0))
}

fn max_update(du: &[f64]) -> f64 {
    du.iter().fold(0.0f64, |m, d| m.max(d.abs()))
}

/// General resolvent solve with arbitrary Dirichlet data and starting guess.
pub fn solve_resolvent<L: FluxLaw>(
    v: &Field,
    tau: f64,
    law: &L,
    boundary: &Boundary,
    guess: &Field,
    settings: &SolverSettings,
) -> Result<Resolvent> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} must be positive"
        )));
    }
    v.check_mesh(guess)?;
    if let Boundary::PerFace(vals) = boundary {
        if vals.len() != v.mesh().boundary_faces().len() {
            return Err(Error::MeshMismatch);
        }
    }
    match settings.method {
        Linearization::Newton => newton(v, tau, law, boundary, guess, settings),
        Linearization::Picard => picard(v, tau, law, boundary, guess, settings),
    }
}

fn newton<L: FluxLaw>(
    v: &Field,
    tau: f64,
    law: &L,
    boundary: &Boundary,
    guess: &Field,
    settings: &SolverSettings,
) -> Result<Resolvent> {
    let mesh = v.mesh().as_ref();
    let grad = FaceGrad { mesh, boundary };
    let nc = mesh.cell_count();
    let mut u = guess.values().to_vec();
    let mut g = vec![0.0; mesh.face_count()];
    let mut r = vec![0.0; nc];
    let mut trial = vec![0.0; nc];
    let mut r_trial = vec![0.0; nc];
    let mut lin_total = 0;
    let mut last = f64::INFINITY;
    let mut sys = SymmetricSystem {
        diag: vec![0.0; nc],
        edges: Vec::with_capacity(mesh.face_count()),
    };

    residual(mesh, &grad, &u, v.values(), tau, law, &mut g, &mut r);
    if r.iter().all(|&x| x == 0.0) {
        return Ok(Resolvent {
            u: guess.clone(),
            iterations: 0,
            linear_iterations: 0,
        });
    }
    for it in 1..=settings.max_iter {
        sys.diag.copy_from_slice(mesh.volumes());
        sys.edges.clear();
        for (f, &gk) in mesh.faces().iter().zip(&g) {
            let a = tau * f.weight * law.derivative(gk) / f.distance;
            sys.diag[f.inner] += a;
            if let Some(o) = f.outer {
                sys.diag[o] += a;
                sys.edges.push((f.inner, o, a));
            }
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let zeros = vec![0.0; nc];
        let (du, lin) = linear_solve(mesh, &sys, &rhs, &zeros, settings)?;
        lin_total += lin;

        let slope0 = compensated_sum(r.iter().zip(&du).map(|(a, b)| a * b));
        let phi = |t: f64, trial: &mut Vec<f64>, r_trial: &mut Vec<f64>, g: &mut Vec<f64>| {
            for i in 0..nc {
                trial[i] = u[i] + t * du[i];
            }
            residual(mesh, &grad, trial, v.values(), tau, law, g, r_trial);
            compensated_sum(r_trial.iter().zip(&du).map(|(a, b)| a * b))
        };
        let mut step = 1.0;
        let settled = converged(&du, &u, settings.tol);
        if !settled && slope0 < 0.0 && phi(1.0, &mut trial, &mut r_trial, &mut g) > 0.0 {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if phi(mid, &mut trial, &mut r_trial, &mut g) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            step = if lo > 0.0 { lo } else { hi };
        }
        for i in 0..nc {
            u[i] += step * du[i];
        }
        last = step * max_update(&du);
        if settled || (step == 1.0 && converged(&du, &u, settings.tol)) {
            let u = Field::new(v.mesh().clone(), u)?.with_time(v.time);
            return Ok(Resolvent {
                u,
                iterations: it,
                linear_iterations: lin_total,
            });
        }
        residual(mesh, &grad, &u, v.values(), tau, law, &mut g, &mut r);
    }
    Err(Error::NoConvergence {
        iterations: settings.max_iter,
        residual: last,
        eps: None,
    })
}

fn picard<L: FluxLaw>(
    v: &Field,
    tau: f64,
    law: &L,
    boundary: &Boundary,
    guess: &Field,
    settings: &SolverSettings,
) -> Result<Resolvent> {
    let mesh = v.mesh().as_ref();
    let grad = FaceGrad { mesh, boundary };
    let nc = mesh.cell_count();
    let mut u = guess.values().to_vec();
    let mut g = vec![0.0; mesh.face_count()];
    let mut lin_total = 0;
    let mut last = f64::INFINITY;
    for it in 1..=settings.max_iter {
        grad.fill(&u, &mut g);
        let mut sys = SymmetricSystem {
            diag: mesh.volumes().to_vec(),
            edges: Vec::with_capacity(mesh.face_count()),
        };
        let mut rhs: Vec<f64> = v
            .values()
            .iter()
            .zip(mesh.volumes())
            .map(|(x, w)| x * w)
            .collect();
        let mut slot = 0;
        for (f, &gk) in mesh.faces().iter().zip(&g) {
            let c = law.coefficient(gk);
            if !c.is_finite() {
                return Err(Error::Degenerate);
            }
            let a = tau * f.weight * c / f.distance;
            sys.diag[f.inner] += a;
            match f.outer {
                Some(o) => {
                    sys.diag[o] += a;
                    sys.edges.push((f.inner, o, a));
                }
                None => {
                    rhs[f.inner] += a * boundary.value(slot);
                    slot += 1;
                }
            }
        }
        let (next, lin) = linear_solve(mesh, &sys, &rhs, &u, settings)?;
        lin_total += lin;
        let du: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        last = max_update(&du);
        u = next;
        if converged(&du, &u, settings.tol) {
            let u = Field::new(v.mesh().clone(), u)?.with_time(v.time);
            return Ok(Resolvent {
                u,
                iterations: it,
                linear_iterations: lin_total,
            });
        }
    }
    let _ = nc;
    Err(Error::NoConvergence {
        iterations: settings.max_iter,
        residual: last,
        eps: None,
    })
}

/// Face values of the flux `F(∇u)` with Dirichlet data `n`.
pub fn flux_field<L: FluxLaw>(u: &Field, law: &L, boundary: &Boundary) -> Result<FaceVector> {
    let g = gradient(u, boundary)?;
    let vals = g.values().iter().map(|&x| law.flux(x)).collect();
    FaceVector::new(u.mesh().clone(), vals)
}

/// Regularized energy `Σ_faces w d Φ(∇u)`, boundary faces included.
pub fn flux_energy<L: FluxLaw>(u: &Field, law: &L, boundary: &Boundary) -> Result<f64> {
    let g = gradient(u, boundary)?;
    Ok(compensated_sum(
        u.mesh()
            .faces()
            .iter()
            .zip(g.values())
            .map(|(f, &x)| f.weight * f.distance * law.potential(x)),
    ))
}

/// Iteration statistics of a time-marching run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub nonlinear_iterations: usize,
    pub max_nonlinear_iterations: usize,
    pub linear_iterations: usize,
    /// Largest step-wise `‖(u_{k+1} − u_k)/τ − div z_{k+1}‖₁` (TV runs).
    pub divergence_residual: Option<f64>,
}

/// Snapshots of a run together with its parameters.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Field>,
    /// Face fields aligned with `snapshots` (TV runs only).
    pub z: Vec<FaceVector>,
    pub n: f64,
    pub params: FluxParams,
    pub tau: f64,
    pub eps_schedule: Vec<f64>,
    pub stats: RunStats,
}

impl Trajectory {
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.snapshots[0].mesh()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn last(&self) -> &Field {
        self.snapshots
            .last()
            .expect("trajectory holds the initial datum")
    }

    /// Snapshot stored at time `t` (within 1e-12).
    pub fn at(&self, t: f64) -> Option<&Field> {
        self.snapshots
            .iter()
            .find(|s| (s.time - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Sorted snapshot times including 0, all within `[0, T]`.
pub(crate) fn snapshot_schedule(total: f64, times: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0];
    let mut sorted: Vec<f64> = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    for t in sorted {
        if !(t >= 0.0 && t <= total * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "snapshot time {t} outside [0, {total}]"
            )));
        }
        if t > *out.last().unwrap() + 1e-14 * total.max(1.0) {
            out.push(t.min(total));
        }
    }
    Ok(out)
}

/// Uniform step count and size for `[0, T]` with nominal step `tau`.
pub(crate) fn step_grid(total: f64, tau: f64) -> Result<(usize, f64)> {
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "T = {total} must be positive"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} must be positive"
        )));
    }
    let steps = ((total / tau) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, total / steps as f64))
}

pub(crate) struct StepResult {
    pub u: Field,
    pub z: Option<FaceVector>,
    pub iterations: usize,
    pub linear_iterations: usize,
}

fn lerp(a: &[f64], b: &[f64], w: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - w) * x + w * y)
        .collect()
}

/// Backward-Euler march with linear interpolation onto the snapshot times.
pub(crate) fn march(
    u0: &Field,
    total: f64,
    tau: f64,
    snapshot_times: &[f64],
    mut step: impl FnMut(&Field, f64) -> Result<StepResult>,
) -> Result<(Vec<Field>, Vec<FaceVector>, RunStats, f64)> {
    let (steps, dt) = step_grid(total, tau)?;
    let schedule = snapshot_schedule(total, snapshot_times)?;
    let mesh = u0.mesh().clone();
    let mut snaps = vec![u0.clone().with_time(0.0)];
    let mut zs: Vec<FaceVector> = Vec::new();
    let mut pending_first_z = true;
    let mut stats = RunStats {
        steps,
        ..RunStats::default()
    };
    let mut next = 1;
    let mut prev = u0.clone();
    let mut prev_z: Option<FaceVector> = None;
    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t_now = if k == steps { total } else { k as f64 * dt };
        let res = step(&prev, dt)?;
        stats.nonlinear_iterations += res.iterations;
        stats.max_nonlinear_iterations = stats.max_nonlinear_iterations.max(res.iterations);
        stats.linear_iterations += res.linear_iterations;
        if let Some(z) = &res.z {
            if pending_first_z {
                zs.push(z.clone());
                pending_first_z = false;
            }
        }
        while next < schedule.len() && schedule[next] <= t_now + 1e-12 * total {
            let w = ((schedule[next] - t_prev) / dt).clamp(0.0, 1.0);
            let vals = lerp(prev.values(), res.u.values(), w);
            snaps.push(Field::new(mesh.clone(), vals)?.with_time(schedule[next]));
            if let Some(z) = &res.z {
                let zp = prev_z.as_ref().unwrap_or(z);
                zs.push(FaceVector::new(
                    mesh.clone(),
                    lerp(zp.values(), z.values(), w),
                )?);
            }
            next += 1;
        }
        prev = res.u.with_time(t_now);
        prev_z = res.z;
    }
    Ok((snaps, zs, stats, dt))
}

/// Backward-Euler trajectory with Dirichlet datum `n`.
pub fn evolve(
    u0: &Field,
    total: f64,
    tau: f64,
    params: &FluxParams,
    n: f64,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    evolve_with(
        u0,
        total,
        tau,
        params,
        n,
        snapshot_times,
        &SolverSettings::default(),
    )
}

pub fn evolve_with(
    u0: &Field,
    total: f64,
    tau: f64,
    params: &FluxParams,
    n: f64,
    snapshot_times: &[f64],
    settings: &SolverSettings,
) -> Result<Trajectory> {
    let boundary = Boundary::Uniform(n);
    let (snapshots, _, stats, dt) = march(u0, total, tau, snapshot_times, |prev, dt| {
        let r = solve_resolvent(prev, dt, params, &boundary, prev, settings)?;
        Ok(StepResult {
            u: r.u,
            z: None,
            iterations: r.iterations,
            linear_iterations: r.linear_iterations,
        })
    })?;
    Ok(Trajectory {
        snapshots,
        z: Vec::new(),
        n,
        params: *params,
        tau: dt,
        eps_schedule: vec![params.eps],
        stats,
    })
}

/// `‖(u − v)/τ − div z‖₁`, the step-wise residual of `u − τ div z = v`.
pub fn step_divergence_residual(u: &Field, v: &Field, z: &FaceVector, tau: f64) -> Result<f64> {
    u.check_mesh(v)?;
    let div = divergence(z);
    let vol = u.mesh().volumes();
    Ok(compensated_sum((0..u.len()).map(|i| {
        vol[i] * ((u.values()[i] - v.values()[i]) / tau - div.values()[i]).abs()
    })))
}
