use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use largesol::cheeger::{cheeger_constant, h_field_with};
use largesol::exact::lambert_w0;
use largesol::fastdiff::{resolvent_step, FluxParams};
use largesol::tvflow::{default_eps_schedule, tv_resolvent};
use largesol::ConvexShape;
use largesol_bench::{dome, planar_disk, radial_disk};

fn lambert(c: &mut Criterion) {
    c.bench_function("lambert_w0", |b| {
        b.iter(|| {
            let mut s = 0.0;
            for k in 1..100 {
                s += lambert_w0(black_box(-0.36 + 0.01 * k as f64)).unwrap();
            }
            s
        })
    });
}

fn resolvents(c: &mut Criterion) {
    let mut g = c.benchmark_group("resolvent");
    for cells in [128usize, 512] {
        let mesh = radial_disk(1.0 / cells as f64);
        let v = dome(&mesh);
        let params = FluxParams::new(1.5, 1e-6).unwrap();
        g.bench_with_input(BenchmarkId::new("radial_p1.5", cells), &v, |b, v| {
            b.iter(|| resolvent_step(v, 1e-3, &params, 2.0).unwrap())
        });
        let eps = default_eps_schedule(2.0);
        g.bench_with_input(BenchmarkId::new("radial_tv", cells), &v, |b, v| {
            b.iter(|| tv_resolvent(v, 1e-3, 2.0, &eps).unwrap())
        });
    }
    let mesh = planar_disk(1.0 / 16.0);
    let v = dome(&mesh);
    let params = FluxParams::new(1.5, 1e-6).unwrap();
    g.sample_size(10);
    g.bench_function("planar_p1.5_h1/16", |b| {
        b.iter(|| resolvent_step(&v, 1e-3, &params, 2.0).unwrap())
    });
    g.finish();
}

fn cheeger(c: &mut Criterion) {
    let square = ConvexShape::parse("square:1").unwrap();
    let hexagon =
        ConvexShape::parse("polygon:1,0;0.5,0.866;-0.5,0.866;-1,0;-0.5,-0.866;0.5,-0.866").unwrap();
    c.bench_function("cheeger_constant_square", |b| {
        b.iter(|| cheeger_constant(black_box(&square)))
    });
    c.bench_function("cheeger_constant_hexagon", |b| {
        b.iter(|| cheeger_constant(black_box(&hexagon)))
    });
    let ch = cheeger_constant(&square);
    c.bench_function("h_field_square_near_corner", |b| {
        b.iter(|| h_field_with(&square, &ch, black_box([0.45, 0.4]), 1e6 * ch.h).unwrap())
    });
}

criterion_group!(benches, lambert, resolvents, cheeger);
criterion_main!(benches);
