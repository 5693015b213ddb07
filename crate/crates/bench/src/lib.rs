//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use largesol::{build_mesh, ConvexShape, DomainSpec, Field, Mesh};

/// Radial mesh of the unit disk.
pub fn radial_disk(h: f64) -> Arc<Mesh> {
    build_mesh(&DomainSpec::radial_disk(1.0, h).expect("valid spacing")).expect("nonempty mesh")
}

/// Planar cell-centred mesh of the unit disk.
pub fn planar_disk(h: f64) -> Arc<Mesh> {
    let spec = DomainSpec::new(ConvexShape::unit_disk(), h).expect("valid spacing");
    build_mesh(&spec).expect("nonempty mesh")
}

/// Smooth datum `1 − |x|²` below the boundary value used by the benches.
pub fn dome(mesh: &Arc<Mesh>) -> Field {
    Field::from_fn(mesh.clone(), |x, _| 1.0 - x[0] * x[0] - x[1] * x[1]).expect("finite values")
}
