use std::sync::Arc;

use largesol::fastdiff::{evolve, flux_energy, FluxParams};
use largesol::ladder::{boundary_saturation, run_ladder, LadderConfig, Model};
use largesol::mesh::Boundary;
use largesol::tvflow::{default_eps_schedule, tv_evolve, tv_resolvent};
use largesol::verify::{accretivity_gap, contraction_gap, sup_bound_gap, SClamp};
use largesol::{build_mesh, ConvexShape, DomainSpec, Field, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn radial(h: f64) -> Arc<Mesh> {
    build_mesh(&DomainSpec::radial_disk(1.0, h).unwrap()).unwrap()
}

fn smooth(mesh: &Arc<Mesh>, seed: u64, amp: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c): (f64, f64, f64) = (
        rng.gen_range(-1.0..1.0),
        rng.gen_range(1.0..4.0),
        rng.gen_range(0.0..3.0),
    );
    Field::from_fn(mesh.clone(), |x, _| {
        amp * (a + (b * x[0] + c).sin() * (b * x[1] - c).cos())
    })
    .unwrap()
}

#[test]
fn heat_eigenmode_decays_at_rate_two() {
    let side = std::f64::consts::PI;
    let shape = ConvexShape::rectangle([0.0, 0.0], side, side).unwrap();
    let (lo, _) = shape.bbox();
    let mesh = build_mesh(&DomainSpec::new(shape, side / 128.0).unwrap()).unwrap();
    let u0 = Field::from_fn(mesh.clone(), |x, _| {
        (x[0] - lo[0]).sin() * (x[1] - lo[1]).sin()
    })
    .unwrap();
    let params = FluxParams::new(2.0, 0.0).unwrap();
    let t = 0.1;
    let traj = evolve(&u0, t, 1e-3, &params, 0.0, &[t]).unwrap();
    let ratio = traj.last().dot(&u0).unwrap() / u0.dot(&u0).unwrap();
    let expected = (-2.0 * t).exp();
    assert!(
        (ratio - expected).abs() / expected < 0.02,
        "{ratio} vs {expected}"
    );
}

#[test]
fn filling_from_below_is_monotone_in_time() {
    let mesh = radial(1.0 / 64.0);
    let params = FluxParams::with_default_eps(1.5, 50.0, 2.0).unwrap();
    let times: Vec<f64> = (1..=10).map(|k| 0.02 * k as f64).collect();
    let traj = evolve(
        &Field::constant(mesh, 0.0),
        0.2,
        2e-3,
        &params,
        50.0,
        &times,
    )
    .unwrap();
    for pair in traj.snapshots.windows(2) {
        for (a, b) in pair[0].values().iter().zip(pair[1].values()) {
            assert!(b >= &(a - 1e-9), "{a} -> {b}");
        }
    }
    assert!(traj.last().sup() <= 50.0 + 1e-9);
}

#[test]
fn ordered_data_stay_ordered() {
    let mesh = radial(1.0 / 64.0);
    let v0 = smooth(&mesh, 3, 1.0);
    let u0 = v0.map(|x| x + 0.5);
    let params = FluxParams::new(1.5, 1e-6).unwrap();
    let times = [0.05, 0.1, 0.2];
    let u = evolve(&u0, 0.2, 2e-3, &params, 1.0, &times).unwrap();
    let v = evolve(&v0, 0.2, 2e-3, &params, 1.0, &times).unwrap();
    for (a, b) in u.snapshots.iter().zip(&v.snapshots) {
        let below = b
            .zip_with(a, |vb, ua| (vb - ua).max(0.0))
            .unwrap()
            .integral();
        assert!(below <= 1e-9, "{below}");
    }
    assert!(contraction_gap(&u, &v).unwrap() <= 1e-9);
}

#[test]
fn dirichlet_energy_decreases() {
    let mesh = radial(1.0 / 64.0);
    let params = FluxParams::new(1.5, 1e-6).unwrap();
    let times: Vec<f64> = (1..=8).map(|k| 0.0125 * k as f64).collect();
    let traj = evolve(&smooth(&mesh, 11, 2.0), 0.1, 1e-3, &params, 0.0, &times).unwrap();
    let boundary = Boundary::Uniform(0.0);
    let energies: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|s| flux_energy(s, &params, &boundary).unwrap())
        .collect();
    for w in energies.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{energies:?}");
    }
}

#[test]
fn tv_resolvent_respects_data_bounds_and_accretivity() {
    let mesh = radial(1.0 / 64.0);
    let eps = default_eps_schedule(3.0);
    let (tau, n) = (0.05, 1.0);
    let v = smooth(&mesh, 5, 3.0);
    let vbar = smooth(&mesh, 6, 2.0);
    let (u, _) = tv_resolvent(&v, tau, n, &eps).unwrap();
    let (ubar, _) = tv_resolvent(&vbar, tau, n, &eps).unwrap();
    let (lo, hi) = (v.inf().min(n), v.sup().max(n));
    assert!(u.inf() >= lo - 1e-9 && u.sup() <= hi + 1e-9);
    let mut clamps = SClamp::canonical().to_vec();
    clamps.push(SClamp::new(-0.25, 0.25).unwrap());
    let gap = accretivity_gap(&u, &v, &ubar, &vbar, tau, &clamps).unwrap();
    assert!(gap >= -1e-9, "{gap}");
}

#[test]
fn tv_sup_bound_holds_for_shifted_data() {
    let mesh = radial(1.0 / 64.0);
    let u0 = Field::constant(mesh, 5.0);
    let n = 20.0;
    let times: Vec<f64> = (1..=10).map(|k| 0.05 * k as f64).collect();
    let traj = tv_evolve(&u0, 0.5, 2.5e-3, n, &default_eps_schedule(n), &times).unwrap();
    let gap = sup_bound_gap(&traj, &u0, 1.0);
    assert!(gap <= 0.05, "{gap}");
    assert!(traj.last().sup() > 5.5);
}

#[test]
fn large_tv_run_saturates_boundary_trace() {
    let mesh = radial(1.0 / 128.0);
    let u0 = Field::from_fn(mesh, |c, _| {
        largesol::exact::example51_initial(c[0]).unwrap()
    })
    .unwrap();
    let traj = tv_evolve(
        &u0,
        0.5,
        2.5e-3,
        128.0,
        &default_eps_schedule(128.0),
        &[0.25, 0.5],
    )
    .unwrap();
    let trace = traj
        .z
        .iter()
        .skip(1)
        .map(largesol::tvflow::boundary_trace_diagnostic)
        .fold(f64::INFINITY, f64::min);
    assert!(trace >= 0.95, "{trace}");
}

fn ladder_once(threads: usize) -> Vec<Vec<f64>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| {
        let mesh = radial(1.0 / 64.0);
        let params = FluxParams::with_default_eps(1.5, 4.0, 2.0).unwrap();
        let mut config = LadderConfig::geometric(4.0, 5, mesh.spacing(), 0.2);
        config.snapshot_times = vec![0.1, 0.2];
        let report = run_ladder(
            &Field::constant(mesh, 0.0),
            0.2,
            &Model::PLaplacian(params),
            &config,
        )
        .unwrap();
        report
            .levels
            .iter()
            .map(|l| l.trajectory().unwrap().last().values().to_vec())
            .collect()
    })
}

#[test]
fn ladder_is_reproducible_across_thread_counts() {
    assert_eq!(ladder_once(1), ladder_once(4));
}

#[test]
fn ladder_top_level_saturates_near_the_boundary() {
    let mesh = radial(1.0 / 64.0);
    let params = FluxParams::with_default_eps(1.5, 4.0, 2.0).unwrap();
    let mut config = LadderConfig::geometric(4.0, 10, mesh.spacing(), 0.2);
    config.snapshot_times = vec![0.05, 0.1, 0.2];
    let report = run_ladder(
        &Field::constant(mesh, 0.0),
        0.2,
        &Model::PLaplacian(params),
        &config,
    )
    .unwrap();
    let k = 20.0;
    let top = report.top().unwrap();
    let low = report.levels[0].trajectory().unwrap();
    assert!(boundary_saturation(top, k, 0.05) >= 0.99 * k);
    assert!(boundary_saturation(low, k, 0.05) < k);
}
