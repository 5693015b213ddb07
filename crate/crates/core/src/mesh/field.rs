use std::sync::Arc;

use super::Mesh;
use crate::error::{Error, Result};
use crate::numerics::compensated_sum;

/// One real value per cell, tied to a mesh and a time stamp.
#[derive(Debug, Clone)]
pub struct Field {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.cell_count() {
            return Err(Error::MeshMismatch);
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite field value {bad}"
            )));
        }
        Ok(Self {
            mesh,
            values,
            time: 0.0,
        })
    }

    pub fn constant(mesh: Arc<Mesh>, value: f64) -> Self {
        let values = vec![value; mesh.cell_count()];
        Self {
            mesh,
            values,
            time: 0.0,
        }
    }

    /// Samples `f(center, distance_to_boundary)` at every cell.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn([f64; 2], f64) -> f64) -> Result<Self> {
        let values = mesh
            .centers()
            .iter()
            .zip(mesh.cell_boundary_distances())
            .map(|(&c, &d)| f(c, d))
            .collect();
        Self::new(mesh, values)
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_mesh(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    pub fn check_mesh(&self, other: &Field) -> Result<()> {
        if self.same_mesh(other) {
            Ok(())
        } else {
            Err(Error::MeshMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            time: self.time,
        }
    }

    /// Pointwise combination of two fields on the same mesh.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_mesh(other)?;
        Ok(Field {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            time: self.time,
        })
    }

    /// Volume-weighted inner product.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check_mesh(other)?;
        let vol = self.mesh.volumes();
        Ok(compensated_sum(
            (0..self.len()).map(|i| vol[i] * self.values[i] * other.values[i]),
        ))
    }

    pub fn integral(&self) -> f64 {
        compensated_sum(
            self.values
                .iter()
                .zip(self.mesh.volumes())
                .map(|(v, w)| v * w),
        )
    }

    pub fn l1_norm(&self) -> f64 {
        self.masked_l1(None)
    }

    /// `∫ |u|` restricted to the cells selected by `mask`.
    pub fn masked_l1(&self, mask: Option<&[bool]>) -> f64 {
        let vol = self.mesh.volumes();
        compensated_sum(
            (0..self.len())
                .filter(|&i| mask.is_none_or(|m| m[i]))
                .map(|i| vol[i] * self.values[i].abs()),
        )
    }

    pub fn sup(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn masked_sup(&self, mask: &[bool]) -> f64 {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .fold(f64::NEG_INFINITY, |a, (&v, _)| a.max(v))
    }
}

/// One normal component per face.
#[derive(Debug, Clone)]
pub struct FaceVector {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl FaceVector {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.face_count() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(&super::Face) -> f64) -> Self {
        let values = mesh.faces().iter().map(f).collect();
        Self { mesh, values }
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let values = vec![0.0; mesh.face_count()];
        Self { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Inner product weighted by face measure times coupling distance.
    pub fn dot(&self, other: &FaceVector) -> Result<f64> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh) {
            return Err(Error::MeshMismatch);
        }
        let faces = self.mesh.faces();
        Ok(compensated_sum((0..self.values.len()).map(|k| {
            faces[k].weight * faces[k].distance * self.values[k] * other.values[k]
        })))
    }
}

/// Dirichlet data on boundary faces.
#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Uniform(f64),
    /// One value per entry of [`Mesh::boundary_faces`].
    PerFace(Vec<f64>),
}

impl Boundary {
    pub(crate) fn value(&self, slot: usize) -> f64 {
        match self {
            Boundary::Uniform(v) => *v,
            Boundary::PerFace(vs) => vs[slot],
        }
    }

    fn check(&self, mesh: &Mesh) -> Result<()> {
        match self {
            Boundary::PerFace(vs) if vs.len() != mesh.boundary_faces().len() => {
                Err(Error::MeshMismatch)
            }
            _ => Ok(()),
        }
    }
}

/// Two-point normal differences across every face.
pub fn gradient(field: &Field, boundary: &Boundary) -> Result<FaceVector> {
    let mesh = field.mesh();
    boundary.check(mesh)?;
    let u = field.values();
    let mut slot = 0;
    let values = mesh
        .faces()
        .iter()
        .map(|f| match f.outer {
            Some(o) => (u[o] - u[f.inner]) / f.distance,
            None => {
                let b = boundary.value(slot);
                slot += 1;
                (b - u[f.inner]) / f.distance
            }
        })
        .collect();
    FaceVector::new(mesh.clone(), values)
}

/// Discrete divergence: net outward flux per unit volume.
pub fn divergence(q: &FaceVector) -> Field {
    let mesh = q.mesh();
    let mut acc = vec![0.0; mesh.cell_count()];
    for (f, &v) in mesh.faces().iter().zip(q.values()) {
        let flux = f.weight * v;
        acc[f.inner] += flux;
        if let Some(o) = f.outer {
            acc[o] -= flux;
        }
    }
    for (a, vol) in acc.iter_mut().zip(mesh.volumes()) {
        *a /= vol;
    }
    Field {
        mesh: mesh.clone(),
        values: acc,
        time: 0.0,
    }
}

/// `T_{a,b}(r) = max(min(b, r), a)`.
#[inline]
pub fn truncate_value(r: f64, a: f64, b: f64) -> f64 {
    r.min(b).max(a)
}

pub fn truncate(field: &Field, a: f64, b: f64) -> Result<Field> {
    if a > b {
        return Err(Error::BadRange { a, b });
    }
    Ok(field.map(|r| truncate_value(r, a, b)))
}

pub fn t_k(field: &Field, k: f64) -> Result<Field> {
    truncate(field, -k, k)
}

/// `G_k(s) = s − T_k(s)`.
pub fn g_k(field: &Field, k: f64) -> Result<Field> {
    if k < 0.0 {
        return Err(Error::BadRange { a: -k, b: k });
    }
    Ok(field.map(|s| s - truncate_value(s, -k, k)))
}

/// `Σ_snapshots Σ_interior faces |∇T_k u|^p · w·d · dt`.
pub fn p_energy(snapshots: &[Field], p: f64, k: f64, dt: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
    }
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("k = {k} must be positive")));
    }
    let Some(first) = snapshots.first() else {
        return Ok(0.0);
    };
    let mut terms = Vec::new();
    for snap in snapshots {
        first.check_mesh(snap)?;
        let u = snap.values();
        for f in snap.mesh().faces() {
            if let Some(o) = f.outer {
                let a = truncate_value(u[f.inner], -k, k);
                let b = truncate_value(u[o], -k, k);
                let g = (b - a) / f.distance;
                terms.push(g.abs().powf(p) * f.weight * f.distance * dt);
            }
        }
    }
    Ok(compensated_sum(terms))
}
