use largesol::mesh::boundary_distance;
use largesol::{build_mesh, ConvexShape, DomainSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Distance from `p` to the segment `[a, b]`.
fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Minimum over densely sampled boundary points.
fn sampled_distance(vertices: &[[f64; 2]], p: [f64; 2], per_edge: usize) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..vertices.len() {
        let (a, b) = (vertices[k], vertices[(k + 1) % vertices.len()]);
        for j in 0..=per_edge {
            let s = j as f64 / per_edge as f64;
            let q = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            best = best.min((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    best
}

#[test]
fn disk_cell_count_matches_area() {
    for h in [1.0 / 64.0, 1.0 / 128.0] {
        let mesh = build_mesh(&DomainSpec::new(ConvexShape::unit_disk(), h).unwrap()).unwrap();
        let expected = std::f64::consts::PI / (h * h);
        let rel = (mesh.cell_count() as f64 - expected).abs() / expected;
        assert!(
            rel < 0.01,
            "h = {h}: {} cells vs {expected:.1}",
            mesh.cell_count()
        );
    }
}

#[test]
fn triangle_distance_matches_dense_sampling() {
    let v = vec![[0.0, 0.0], [3.0, 0.0], [0.5, 2.0]];
    let shape = ConvexShape::polygon(v.clone()).unwrap();
    let spec = DomainSpec::new(shape.clone(), 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 200 {
        let p = [rng.gen_range(0.0..3.0), rng.gen_range(0.0..2.0)];
        if !shape.contains(p) {
            continue;
        }
        let d = boundary_distance(&spec, p).unwrap();
        let sampled = sampled_distance(&v, p, 4000);
        assert!(d <= sampled + 1e-12, "{p:?}: {d} > {sampled}");
        assert!(sampled - d < 1e-3, "{p:?}: {d} vs {sampled}");
        checked += 1;
    }
}

#[test]
fn outside_points_are_rejected() {
    let spec = DomainSpec::new(ConvexShape::unit_disk(), 0.1).unwrap();
    assert!(boundary_distance(&spec, [1.5, 0.0]).is_err());
}

#[test]
fn mesh_distances_agree_with_domain_distance() {
    let shape = ConvexShape::parse("polygon:0,0;2,0;2,1;0,2").unwrap();
    let spec = DomainSpec::new(shape, 1.0 / 32.0).unwrap();
    let mesh = build_mesh(&spec).unwrap();
    for (c, &d) in mesh.centers().iter().zip(mesh.cell_boundary_distances()) {
        assert_eq!(d, boundary_distance(&spec, *c).unwrap());
    }
}

fn regular_polygon(k: usize, radius: f64, phase: f64) -> Vec<[f64; 2]> {
    (0..k)
        .map(|j| {
            let a = phase + std::f64::consts::TAU * j as f64 / k as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polygon_distance_is_edge_minimum(
        k in 3usize..9,
        radius in 0.5f64..3.0,
        phase in 0.0f64..1.0,
        s in 0.0f64..0.95,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let v = regular_polygon(k, radius, phase);
        let shape = ConvexShape::polygon(v.clone()).unwrap();
        let p = [s * shape.inradius() * angle.cos(), s * shape.inradius() * angle.sin()];
        let spec = DomainSpec::new(shape, radius / 16.0).unwrap();
        let d = boundary_distance(&spec, p).unwrap();
        let oracle = (0..k)
            .map(|j| segment_distance(p, v[j], v[(j + 1) % k]))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((d - oracle).abs() < 1e-12 * radius);
    }

    #[test]
    fn mesh_volume_approaches_polygon_area(k in 3usize..9, phase in 0.0f64..1.0) {
        let shape = ConvexShape::polygon(regular_polygon(k, 1.0, phase)).unwrap();
        let area = match &shape {
            ConvexShape::Polygon(p) => p.area(),
            _ => unreachable!(),
        };
        let h = 1.0 / 64.0;
        let mesh = build_mesh(&DomainSpec::new(shape, h).unwrap()).unwrap();
        let perimeter_band = 8.0 * h;
        prop_assert!((mesh.measure() - area).abs() < perimeter_band);
    }
}
