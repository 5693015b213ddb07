//! Cell-centered discretizations of planar convex domains.
//!
//! A [`Mesh`] is a graph of cells joined by faces. Every face carries a
//! weight (its length, or `2πρ` in radial mode), the distance between the
//! two points it couples, and an orientation. Interior faces point from
//! `inner` to `outer`; boundary faces point out of the domain and couple
//! their cell to a Dirichlet value placed `h/2` away.

mod field;
pub mod io;

use std::f64::consts::PI;
use std::sync::Arc;

pub use field::{
    divergence, g_k, gradient, p_energy, t_k, truncate, truncate_value, Boundary, FaceVector, Field,
};

use crate::error::{Error, Result};
use crate::geometry::{ConvexShape, Point};

/// Domain description: shape, grid spacing, interior-ball radius.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub shape: ConvexShape,
    pub spacing: f64,
    /// Radius of the uniform interior ball condition.
    pub s0: f64,
    /// Request the 1D radial discretization (disks only).
    pub radial: bool,
}

impl DomainSpec {
    /// Planar domain with `s0` defaulting to the inradius.
    pub fn new(shape: ConvexShape, spacing: f64) -> Result<Self> {
        let s0 = shape.inradius();
        Self::with_s0(shape, spacing, s0)
    }

    pub fn with_s0(shape: ConvexShape, spacing: f64, s0: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let inradius = shape.inradius();
        if !(s0 > 0.0 && s0 <= inradius * (1.0 + 1e-12)) {
            return Err(Error::InvalidDomain(format!(
                "s0 = {s0} must lie in (0, inradius = {inradius}]"
            )));
        }
        Ok(Self {
            shape,
            spacing,
            s0,
            radial: false,
        })
    }

    /// Radial discretization of a disk.
    pub fn radial_disk(radius: f64, spacing: f64) -> Result<Self> {
        let mut spec = Self::new(ConvexShape::disk([0.0, 0.0], radius)?, spacing)?;
        spec.radial = true;
        Ok(spec)
    }

    /// At least 8 cells across the inradius.
    pub fn check_resolution(&self) -> Result<()> {
        let cells = self.shape.inradius() / self.spacing;
        if cells + 1e-9 < 8.0 {
            return Err(Error::InvalidDomain(format!(
                "only {cells:.2} cells across the inradius (need >= 8)"
            )));
        }
        Ok(())
    }
}

/// Euclidean distance from an interior point to `∂Ω`.
pub fn boundary_distance(domain: &DomainSpec, point: Point) -> Result<f64> {
    domain.shape.boundary_distance(point)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Uniform Cartesian cells with cut-cell exclusion.
    Planar,
    /// Annular cells of a disk; centers are stored as `(ρ, 0)`.
    Radial,
    /// 1D interval with Dirichlet ends.
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub inner: usize,
    /// `None` for boundary faces.
    pub outer: Option<usize>,
    /// Face measure (length in 2D, `2πρ` radially, 1 on a line).
    pub weight: f64,
    /// Distance between the coupled points (`h`, or `h/2` at the boundary).
    pub distance: f64,
    /// Orientation of the discrete normal component.
    pub axis: Point,
    pub position: Point,
    /// Outward normal of the continuum boundary (boundary faces only).
    pub normal: Point,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.outer.is_none()
    }
}

#[derive(Debug)]
pub struct Mesh {
    kind: MeshKind,
    spacing: f64,
    centers: Vec<Point>,
    volumes: Vec<f64>,
    faces: Vec<Face>,
    boundary_faces: Vec<usize>,
    cell_boundary_distance: Vec<f64>,
    domain: Option<DomainSpec>,
}

/// Builds the mesh for `domain`, honoring its radial flag.
pub fn build_mesh(domain: &DomainSpec) -> Result<Arc<Mesh>> {
    if domain.radial {
        return build_radial(domain).map(Arc::new);
    }
    build_planar(domain).map(Arc::new)
}

fn axis_layout(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let cells = ((hi - lo) / h + 1e-9).floor() as usize;
    let start = 0.5 * (lo + hi) - 0.5 * cells as f64 * h;
    (0..cells).map(|i| start + (i as f64 + 0.5) * h).collect()
}

fn build_planar(domain: &DomainSpec) -> Result<Mesh> {
    let h = domain.spacing;
    let shape = &domain.shape;
    let (lo, hi) = shape.bbox();
    let xs = axis_layout(lo[0], hi[0], h);
    let ys = axis_layout(lo[1], hi[1], h);
    let (nx, ny) = (xs.len(), ys.len());
    let mut index = vec![None; nx * ny];
    let mut centers = Vec::new();
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            if shape.contains([x, y]) {
                index[j * nx + i] = Some(centers.len());
                centers.push([x, y]);
            }
        }
    }
    if centers.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut cell_ij = vec![(0usize, 0usize); centers.len()];
    for j in 0..ny {
        for i in 0..nx {
            if let Some(c) = index[j * nx + i] {
                cell_ij[c] = (i, j);
            }
        }
    }
    let lookup = |i: i64, j: i64| -> Option<usize> {
        if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            None
        } else {
            index[j as usize * nx + i as usize]
        }
    };
    let mut faces = Vec::new();
    for (c, &(i, j)) in cell_ij.iter().enumerate() {
        let center = centers[c];
        for (di, dj) in [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)] {
            let axis = [di as f64, dj as f64];
            let position = [center[0] + 0.5 * h * axis[0], center[1] + 0.5 * h * axis[1]];
            match lookup(i as i64 + di, j as i64 + dj) {
                Some(nb) => {
                    if di + dj > 0 {
                        faces.push(Face {
                            inner: c,
                            outer: Some(nb),
                            weight: h,
                            distance: h,
                            axis,
                            position,
                            normal: axis,
                        });
                    }
                }
                None => faces.push(Face {
                    inner: c,
                    outer: None,
                    weight: h,
                    distance: 0.5 * h,
                    axis,
                    position,
                    normal: shape.outward_normal(position),
                }),
            }
        }
    }
    let volumes = vec![h * h; centers.len()];
    let dist = centers
        .iter()
        .map(|&p| shape.boundary_distance(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mesh::assemble(
        MeshKind::Planar,
        h,
        centers,
        volumes,
        faces,
        dist,
        Some(domain.clone()),
    ))
}

fn build_radial(domain: &DomainSpec) -> Result<Mesh> {
    let radius = match domain.shape {
        ConvexShape::Disk { radius, .. } => radius,
        _ => {
            return Err(Error::InvalidDomain(
                "radial discretization requires a disk".into(),
            ))
        }
    };
    let h = domain.spacing;
    let ratio = radius / h;
    let m = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    if m == 0 {
        return Err(Error::EmptyDomain);
    }
    let centers: Vec<Point> = (0..m).map(|i| [(i as f64 + 0.5) * h, 0.0]).collect();
    let volumes: Vec<f64> = (0..m)
        .map(|i| {
            let inner = i as f64 * h;
            let outer = if i + 1 == m {
                radius
            } else {
                (i + 1) as f64 * h
            };
            PI * (outer * outer - inner * inner)
        })
        .collect();
    let mut faces: Vec<Face> = (0..m - 1)
        .map(|i| {
            let rho = (i + 1) as f64 * h;
            Face {
                inner: i,
                outer: Some(i + 1),
                weight: 2.0 * PI * rho,
                distance: h,
                axis: [1.0, 0.0],
                position: [rho, 0.0],
                normal: [1.0, 0.0],
            }
        })
        .collect();
    faces.push(Face {
        inner: m - 1,
        outer: None,
        weight: 2.0 * PI * radius,
        distance: radius - centers[m - 1][0],
        axis: [1.0, 0.0],
        position: [radius, 0.0],
        normal: [1.0, 0.0],
    });
    let dist = centers.iter().map(|c| radius - c[0]).collect();
    Ok(Mesh::assemble(
        MeshKind::Radial,
        h,
        centers,
        volumes,
        faces,
        dist,
        Some(domain.clone()),
    ))
}

impl Mesh {
    fn assemble(
        kind: MeshKind,
        spacing: f64,
        centers: Vec<Point>,
        volumes: Vec<f64>,
        faces: Vec<Face>,
        cell_boundary_distance: Vec<f64>,
        domain: Option<DomainSpec>,
    ) -> Mesh {
        let boundary_faces = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_boundary())
            .map(|(k, _)| k)
            .collect();
        Mesh {
            kind,
            spacing,
            centers,
            volumes,
            faces,
            boundary_faces,
            cell_boundary_distance,
            domain,
        }
    }

    /// Uniform 1D mesh on `[0, cells·h]` with Dirichlet faces at both ends.
    pub fn line(cells: usize, h: f64) -> Result<Arc<Mesh>> {
        if cells == 0 {
            return Err(Error::EmptyDomain);
        }
        if !(h > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "spacing must be positive, got {h}"
            )));
        }
        let length = cells as f64 * h;
        let centers: Vec<Point> = (0..cells).map(|i| [(i as f64 + 0.5) * h, 0.0]).collect();
        let mut faces: Vec<Face> = (0..cells - 1)
            .map(|i| Face {
                inner: i,
                outer: Some(i + 1),
                weight: 1.0,
                distance: h,
                axis: [1.0, 0.0],
                position: [(i + 1) as f64 * h, 0.0],
                normal: [1.0, 0.0],
            })
            .collect();
        faces.push(Face {
            inner: 0,
            outer: None,
            weight: 1.0,
            distance: 0.5 * h,
            axis: [-1.0, 0.0],
            position: [0.0, 0.0],
            normal: [-1.0, 0.0],
        });
        faces.push(Face {
            inner: cells - 1,
            outer: None,
            weight: 1.0,
            distance: 0.5 * h,
            axis: [1.0, 0.0],
            position: [length, 0.0],
            normal: [1.0, 0.0],
        });
        let dist = centers.iter().map(|c| c[0].min(length - c[0])).collect();
        Ok(Arc::new(Mesh::assemble(
            MeshKind::Line,
            h,
            centers,
            vec![h; cells],
            faces,
            dist,
            None,
        )))
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn is_radial(&self) -> bool {
        self.kind == MeshKind::Radial
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_count(&self) -> usize {
        self.centers.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Indices (into [`Mesh::faces`]) of the boundary faces.
    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    /// Distance from each cell center to the continuum boundary.
    pub fn cell_boundary_distances(&self) -> &[f64] {
        &self.cell_boundary_distance
    }

    pub fn domain(&self) -> Option<&DomainSpec> {
        self.domain.as_ref()
    }

    /// Total measure of the discrete domain.
    pub fn measure(&self) -> f64 {
        crate::numerics::compensated_sum(self.volumes.iter().copied())
    }

    /// Largest cell-to-boundary distance.
    pub fn inradius(&self) -> f64 {
        self.cell_boundary_distance
            .iter()
            .fold(0.0f64, |m, &d| m.max(d))
    }

    /// 1D meshes whose interior face `k` joins cells `k` and `k + 1`.
    pub(crate) fn is_chain(&self) -> bool {
        matches!(self.kind, MeshKind::Line | MeshKind::Radial)
    }

    /// Cells adjacent to at least one boundary face.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let mut cells: Vec<usize> = self
            .boundary_faces
            .iter()
            .map(|&f| self.faces[f].inner)
            .collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    /// Cell mask of the monitor set `{dist(x, ∂Ω) >= delta}`.
    pub fn monitor_mask(&self, delta: f64) -> Vec<bool> {
        self.cell_boundary_distance
            .iter()
            .map(|&d| d >= delta - 1e-12 * self.spacing)
            .collect()
    }

    /// Cell with the largest distance to the boundary (first on ties).
    pub fn deepest_cell(&self) -> usize {
        let mut best = 0;
        for (i, &d) in self.cell_boundary_distance.iter().enumerate() {
            if d > self.cell_boundary_distance[best] + 1e-12 {
                best = i;
            }
        }
        best
    }
}
