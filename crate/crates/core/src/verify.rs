//! Discrete checks of contraction, entropy and bound properties.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::Example51State;
use crate::fastdiff::{FluxLaw, FluxParams, RunStats, Trajectory};
use crate::geometry::Point;
use crate::ladder::LadderReport;
use crate::mesh::{truncate_value, FaceVector, Field, Mesh, MeshKind};
use crate::numerics::compensated_sum;

fn positive_l1(a: &Field, b: &Field) -> f64 {
    let vol = a.mesh().volumes();
    compensated_sum((0..a.len()).map(|i| vol[i] * (a.values()[i] - b.values()[i]).max(0.0)))
}

/// `max_t ‖(u(t) − v(t))⁺‖₁ − ‖(u₀ − v₀)⁺‖₁`.
pub fn contraction_gap(u: &Trajectory, v: &Trajectory) -> Result<f64> {
    if !Arc::ptr_eq(u.mesh(), v.mesh()) || u.snapshots.len() != v.snapshots.len() {
        return Err(Error::MeshMismatch);
    }
    if u.n != v.n {
        return Err(Error::InvalidParameter(format!(
            "boundary data differ ({} vs {})",
            u.n, v.n
        )));
    }
    let base = positive_l1(&u.snapshots[0], &v.snapshots[0]);
    let mut gap = f64::NEG_INFINITY;
    for (a, b) in u.snapshots.iter().zip(&v.snapshots) {
        if (a.time - b.time).abs() > 1e-12 * a.time.abs().max(1.0) {
            return Err(Error::InvalidParameter("snapshot times differ".into()));
        }
        gap = gap.max(positive_l1(a, b) - base);
    }
    Ok(gap)
}

/// Smoothstep clamp from `a` to `b`, nondecreasing and constant outside `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SClamp {
    pub a: f64,
    pub b: f64,
}

impl SClamp {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::BadRange { a, b });
        }
        Ok(Self { a, b })
    }

    /// The picks `(0, 1)`, `(−1, 1)`, `(−1, 0)`.
    pub fn canonical() -> [SClamp; 3] {
        [
            SClamp { a: 0.0, b: 1.0 },
            SClamp { a: -1.0, b: 1.0 },
            SClamp { a: -1.0, b: 0.0 },
        ]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let w = self.b - self.a;
        let s = ((x - self.a) / w).clamp(0.0, 1.0);
        self.a + w * s * s * (3.0 - 2.0 * s)
    }

    /// Antiderivative with `Σ(x) = a·x` for `x <= a`.
    pub fn antiderivative(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let w = b - a;
        if x <= a {
            a * x
        } else if x < b {
            let s = (x - a) / w;
            a * a + a * (x - a) + w * w * (s * s * s - 0.5 * s * s * s * s)
        } else {
            a * a + a * w + 0.5 * w * w + b * (x - b)
        }
    }

    /// `j_{S,h,l}(r) = ∫_l^r S(T_h(s) − T_h(l)) ds`.
    pub fn j(&self, r: f64, h: f64, l: f64) -> f64 {
        let c = truncate_value(l, -h, h);
        let prim = |s: f64| -> f64 {
            if s <= -h {
                self.antiderivative(-h - c) + self.eval(-h - c) * (s + h)
            } else if s >= h {
                self.antiderivative(h - c) + self.eval(h - c) * (s - h)
            } else {
                self.antiderivative(s - c)
            }
        };
        prim(r) - prim(l)
    }
}

fn beta(s: f64) -> (f64, f64) {
    // exp(1 − 1/(1 − s²)) and its derivative
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let v = (1.0 - 1.0 / q).exp();
    (v, v * (-2.0 * s / (q * q)))
}

/// Product bump `β((t − t_c)/t_r) · β(|x − x_c|/x_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: Point,
    pub x_radius: f64,
}

impl Bump {
    fn time(&self, t: f64) -> (f64, f64) {
        let (v, d) = beta((t - self.t_center) / self.t_radius);
        (v, d / self.t_radius)
    }

    fn space(&self, x: Point) -> (f64, Point) {
        let dx = [x[0] - self.x_center[0], x[1] - self.x_center[1]];
        let r = dx[0].hypot(dx[1]);
        let (v, d) = beta(r / self.x_radius);
        if r == 0.0 {
            return (v, [0.0, 0.0]);
        }
        let g = d / self.x_radius / r;
        (v, [g * dx[0], g * dx[1]])
    }

    pub fn value(&self, t: f64, x: Point) -> f64 {
        self.time(t).0 * self.space(x).0
    }
}

fn check_support(traj: &Trajectory, eta: &Bump) -> Result<()> {
    let mesh = traj.mesh();
    if mesh.kind() == MeshKind::Radial && eta.x_center != [0.0, 0.0] {
        return Err(Error::InvalidParameter(
            "radial meshes need a bump centred at the origin".into(),
        ));
    }
    let (t0, t1) = (traj.snapshots[0].time, traj.last().time);
    if eta.t_center - eta.t_radius <= t0 || eta.t_center + eta.t_radius >= t1 {
        return Err(Error::BadSupport);
    }
    for c in mesh.boundary_cells() {
        if eta.space(mesh.centers()[c]).0 > 0.0 {
            return Err(Error::BadSupport);
        }
    }
    Ok(())
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let m = times.len();
    (0..m)
        .map(|j| {
            let l = if j > 0 { times[j] - times[j - 1] } else { 0.0 };
            let r = if j + 1 < m {
                times[j + 1] - times[j]
            } else {
                0.0
            };
            0.5 * (l + r)
        })
        .collect()
}

/// Signed entropy defect.
///
/// For `p > 1`: `∫ η a·∇S + ∫ S a·∇η − ∫ j η_t` with `a = F(∇u)`.
/// For `p = 1`: `−∫ j η_t + ∫ η|DS| + ∫ S z·∇η`, using the stored `z`.
pub fn entropy_defect(
    traj: &Trajectory,
    s: &SClamp,
    h_trunc: f64,
    l: f64,
    eta: &Bump,
) -> Result<f64> {
    if !(h_trunc > 0.0) {
        return Err(Error::InvalidParameter(
            "truncation level must be positive".into(),
        ));
    }
    check_support(traj, eta)?;
    let mesh = traj.mesh().clone();
    let tv = traj.params.p == 1.0;
    if tv && traj.z.len() != traj.snapshots.len() {
        return Err(Error::InsufficientData(
            "trajectory carries no z field".into(),
        ));
    }
    let times: Vec<f64> = traj.times();
    let wts = trapezoid_weights(&times);
    let law: FluxParams = traj.params;
    let ct = truncate_value(l, -h_trunc, h_trunc);
    let mut terms = Vec::new();
    for (j, snap) in traj.snapshots.iter().enumerate() {
        if wts[j] == 0.0 {
            continue;
        }
        let (et, et_t) = eta.time(snap.time);
        let u = snap.values();
        let sv: Vec<f64> = u
            .iter()
            .map(|&x| s.eval(truncate_value(x, -h_trunc, h_trunc) - ct))
            .collect();
        for (i, c) in mesh.centers().iter().enumerate() {
            let (es, _) = eta.space(*c);
            if es != 0.0 && et_t != 0.0 {
                terms.push(-wts[j] * mesh.volumes()[i] * s.j(u[i], h_trunc, l) * es * et_t);
            }
        }
        if et == 0.0 {
            continue;
        }
        for (k, f) in mesh.faces().iter().enumerate() {
            let Some(o) = f.outer else { continue };
            let (es, grad) = eta.space(f.position);
            let deta = grad[0] * f.axis[0] + grad[1] * f.axis[1];
            if es == 0.0 && deta == 0.0 {
                continue;
            }
            let ds = (sv[o] - sv[f.inner]) / f.distance;
            let s_face = 0.5 * (sv[o] + sv[f.inner]);
            let q = if tv {
                traj.z[j].values()[k]
            } else {
                law.flux((u[o] - u[f.inner]) / f.distance)
            };
            let first = if tv { ds.abs() } else { q * ds };
            terms.push(wts[j] * f.weight * f.distance * et * (es * first + s_face * q * deta));
        }
    }
    Ok(compensated_sum(terms))
}

/// Entropy residual: `|defect|` for `p > 1`, `defect⁺` for `p = 1`.
pub fn entropy_residual(
    traj: &Trajectory,
    s: &SClamp,
    h_trunc: f64,
    l: f64,
    eta: &Bump,
) -> Result<f64> {
    let d = entropy_defect(traj, s, h_trunc, l, eta)?;
    Ok(if traj.params.p == 1.0 {
        d.max(0.0)
    } else {
        d.abs()
    })
}

/// Samples the Example 5.1 solution and its field `z` on a radial mesh.
pub fn sample_example51(mesh: &Arc<Mesh>, times: &[f64]) -> Result<Trajectory> {
    if mesh.kind() != MeshKind::Radial {
        return Err(Error::InvalidDomain(
            "Example 5.1 sampling needs a radial mesh".into(),
        ));
    }
    let mut snapshots = Vec::with_capacity(times.len());
    let mut z = Vec::with_capacity(times.len());
    for &t in times {
        let st = Example51State::at(t)?;
        snapshots.push(Field::from_fn(mesh.clone(), |c, _| st.value(c[0]))?.with_time(t));
        z.push(FaceVector::from_fn(mesh.clone(), |f| {
            (f.position[0] / st.r).min(1.0)
        }));
    }
    Ok(Trajectory {
        snapshots,
        z,
        n: f64::INFINITY,
        params: FluxParams::new(1.0, f64::MIN_POSITIVE)?,
        tau: 0.0,
        eps_schedule: Vec::new(),
        stats: RunStats::default(),
    })
}

/// `max_t sup u(t) − (‖u₀‖_∞ + t·2/s₀)`.
pub fn sup_bound_gap(traj: &Trajectory, u0: &Field, s0: f64) -> f64 {
    let base = u0.sup_abs();
    traj.snapshots
        .iter()
        .map(|s| s.sup() - (base + s.time * 2.0 / s0))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest sup-norm difference of `u_n/n` on `K_δ` across level pairs.
pub fn p2_linearity(report: &LadderReport) -> f64 {
    let solved = report.solved();
    let mut worst = 0.0f64;
    for pair in solved.windows(2) {
        let (a, b) = (pair[0].trajectory().unwrap(), pair[1].trajectory().unwrap());
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            for i in 0..sa.len() {
                if report.mask[i] {
                    let d = (sa.values()[i] / pair[0].n - sb.values()[i] / pair[1].n).abs();
                    worst = worst.max(d);
                }
            }
        }
    }
    worst
}

/// `min_S ∫ S(u − ū)·(w − w̄)` with `w = (v − u)/τ`, `w̄ = (v̄ − ū)/τ`.
pub fn accretivity_gap(
    u: &Field,
    v: &Field,
    ubar: &Field,
    vbar: &Field,
    tau: f64,
    clamps: &[SClamp],
) -> Result<f64> {
    u.check_mesh(v)?;
    u.check_mesh(ubar)?;
    u.check_mesh(vbar)?;
    let vol = u.mesh().volumes();
    let mut worst = f64::INFINITY;
    for s in clamps {
        let val = compensated_sum((0..u.len()).map(|i| {
            let du = u.values()[i] - ubar.values()[i];
            let w = (v.values()[i] - u.values()[i]) / tau;
            let wb = (vbar.values()[i] - ubar.values()[i]) / tau;
            vol[i] * s.eval(du) * (w - wb)
        }));
        worst = worst.min(val);
    }
    Ok(worst)
}

/// One row of a pass/fail table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

/// `check,value,threshold,verdict` CSV.
pub fn write_checks<W: std::io::Write>(checks: &[Check], mut out: W) -> Result<()> {
    writeln!(out, "check,value,threshold,verdict")?;
    for c in checks {
        writeln!(
            out,
            "{},{:.10e},{:.3e},{}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastdiff::evolve;
    use crate::mesh::{build_mesh, DomainSpec};

    #[test]
    fn clamp_and_antiderivative() {
        let s = SClamp::new(-1.0, 1.0).unwrap();
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(-3.0), -1.0);
        assert_eq!(s.eval(2.0), 1.0);
        for &x in &[-2.0, -0.7, 0.1, 0.9, 1.5] {
            let h = 1e-6;
            let fd = (s.antiderivative(x + h) - s.antiderivative(x - h)) / (2.0 * h);
            assert!((fd - s.eval(x)).abs() < 1e-8);
        }
        assert!(SClamp::new(1.0, 1.0).is_err());
    }

    #[test]
    fn j_matches_quadrature() {
        let s = SClamp::new(0.0, 1.0).unwrap();
        for &(r, h, l) in &[(2.5, 1.0, -0.3), (-1.7, 0.5, 0.2), (0.4, 2.0, 0.1)] {
            let m = 200_000;
            let dx = (r - l) / m as f64;
            let c = truncate_value(l, -h, h);
            let quad: f64 = (0..m)
                .map(|k| {
                    let x = l + (k as f64 + 0.5) * dx;
                    s.eval(truncate_value(x, -h, h) - c) * dx
                })
                .sum();
            assert!(
                (quad - s.j(r, h, l)).abs() < 1e-8,
                "{quad} {}",
                s.j(r, h, l)
            );
        }
    }

    #[test]
    fn constant_trajectory_has_zero_residual() {
        let mesh = build_mesh(&DomainSpec::radial_disk(1.0, 1.0 / 32.0).unwrap()).unwrap();
        let u0 = Field::constant(mesh, 3.0);
        let tr = evolve(
            &u0,
            1.0,
            0.05,
            &FluxParams::new(1.5, 1e-6).unwrap(),
            3.0,
            &[0.25, 0.5, 0.75, 1.0],
        )
        .unwrap();
        let eta = Bump {
            t_center: 0.5,
            t_radius: 0.4,
            x_center: [0.0, 0.0],
            x_radius: 0.5,
        };
        for s in SClamp::canonical() {
            let r = entropy_residual(&tr, &s, 2.0, 0.5, &eta).unwrap();
            assert!(r <= 1e-12, "{r}");
        }
    }

    #[test]
    fn support_is_checked() {
        let mesh = build_mesh(&DomainSpec::radial_disk(1.0, 1.0 / 32.0).unwrap()).unwrap();
        let tr = sample_example51(&mesh, &[0.0, 0.1, 0.2]).unwrap();
        let wide = Bump {
            t_center: 0.1,
            t_radius: 0.05,
            x_center: [0.0, 0.0],
            x_radius: 1.5,
        };
        assert!(matches!(
            entropy_residual(&tr, &SClamp::canonical()[0], 1.0, 0.0, &wide),
            Err(Error::BadSupport)
        ));
        let late = Bump {
            t_center: 0.15,
            t_radius: 0.1,
            x_center: [0.0, 0.0],
            x_radius: 0.5,
        };
        assert!(matches!(
            entropy_residual(&tr, &SClamp::canonical()[0], 1.0, 0.0, &late),
            Err(Error::BadSupport)
        ));
    }

    #[test]
    fn contraction_of_identical_data_is_zero() {
        let mesh = build_mesh(&DomainSpec::radial_disk(1.0, 1.0 / 32.0).unwrap()).unwrap();
        let u0 = Field::from_fn(mesh, |c, _| c[0]).unwrap();
        let p = FluxParams::new(1.5, 1e-6).unwrap();
        let a = evolve(&u0, 0.1, 0.01, &p, 4.0, &[0.05, 0.1]).unwrap();
        let b = evolve(&u0, 0.1, 0.01, &p, 4.0, &[0.05, 0.1]).unwrap();
        assert!(contraction_gap(&a, &b).unwrap() <= 1e-10);
        let c = evolve(&u0, 0.1, 0.01, &p, 5.0, &[0.05, 0.1]).unwrap();
        assert!(contraction_gap(&a, &c).is_err());
    }

    #[test]
    fn sup_gap_at_time_zero() {
        let mesh = build_mesh(&DomainSpec::radial_disk(1.0, 0.125).unwrap()).unwrap();
        let u0 = Field::constant(mesh, 2.0);
        let tr = Trajectory {
            snapshots: vec![u0.clone()],
            z: Vec::new(),
            n: 2.0,
            params: FluxParams::new(1.0, 1e-3).unwrap(),
            tau: 0.1,
            eps_schedule: vec![1e-3],
            stats: RunStats::default(),
        };
        assert!(sup_bound_gap(&tr, &u0, 1.0) <= 0.0);
    }

    #[test]
    fn checks_table() {
        let rows = [
            Check::at_most("a", 1.0, 2.0),
            Check::at_least("b", 1.0, 2.0),
        ];
        assert!(rows[0].pass && !rows[1].pass);
        let mut out = Vec::new();
        write_checks(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("a,1.0000000000e0,2.000e0,PASS"));
        assert!(text.contains("FAIL"));
    }
}
