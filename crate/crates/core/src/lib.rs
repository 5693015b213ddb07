//! Boundary-lift construction of large solutions of `u_t = Δ_p u`, `1 ≤ p < 2`,
//! with closed-form references and verification suites.

// `!(x > 0.0)` deliberately rejects NaN alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheeger;
pub mod error;
pub mod exact;
pub mod fastdiff;
pub mod geometry;
pub mod ladder;
pub mod manifest;
pub mod mesh;
pub mod numerics;
pub mod store;
pub mod tvflow;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{ConvexPolygon, ConvexShape, Point};
pub use manifest::Manifest;
pub use mesh::{build_mesh, DomainSpec, FaceVector, Field, Mesh, MeshKind};
