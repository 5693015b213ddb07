//! Convex planar regions shared by the mesher and the Cheeger machinery.
//!
//! Polygons are stored counter-clockwise; every edge induces the half-plane
//! `normal · x <= offset` with `normal` the outward unit normal.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Closed half-plane `{x : normal · x <= offset}` with unit `normal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    /// Signed slack: positive inside, zero on the line.
    #[inline]
    pub fn slack(&self, p: Point) -> f64 {
        self.offset - dot(self.normal, p)
    }

    /// The same half-plane pushed inward by `r`.
    pub fn shifted(&self, r: f64) -> HalfPlane {
        HalfPlane {
            normal: self.normal,
            offset: self.offset - r,
        }
    }
}

/// Strictly convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Validates strict convexity and counter-clockwise orientation.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let m = vertices.len();
        for i in 0..m {
            let a = vertices[i];
            let b = vertices[(i + 1) % m];
            let c = vertices[(i + 2) % m];
            let turn = cross(sub(b, a), sub(c, b));
            if !(turn > 0.0) {
                return Err(Error::InvalidDomain(format!(
                    "vertex {} breaks strict counter-clockwise convexity (cross = {turn:e})",
                    (i + 1) % m
                )));
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[x0, x0 + width] × [y0, y0 + height]`.
    pub fn rectangle(origin: Point, width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "rectangle sides must be positive, got {width} x {height}"
            )));
        }
        let [x0, y0] = origin;
        Self::new(vec![
            [x0, y0],
            [x0 + width, y0],
            [x0 + width, y0 + height],
            [x0, y0 + height],
        ])
    }

    /// Builds the polygon left by a convex clip, dropping duplicate and
    /// collinear vertices. Returns `None` for degenerate (zero-area) results.
    pub(crate) fn from_clip(mut pts: Vec<Point>) -> Option<Self> {
        let scale = pts
            .iter()
            .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
            .max(1.0);
        let tol = 1e-14 * scale;
        pts.dedup_by(|a, b| norm(sub(*a, *b)) <= tol);
        while pts.len() > 1 && norm(sub(pts[0], *pts.last().unwrap())) <= tol {
            pts.pop();
        }
        let mut changed = true;
        while changed && pts.len() >= 3 {
            changed = false;
            let m = pts.len();
            for i in 0..m {
                let a = pts[(i + m - 1) % m];
                let b = pts[i];
                let c = pts[(i + 1) % m];
                if cross(sub(b, a), sub(c, b)) <= tol * tol {
                    pts.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        if pts.len() < 3 {
            return None;
        }
        let poly = Self { vertices: pts };
        (poly.area() > 0.0).then_some(poly)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let m = self.vertices.len();
        (0..m).map(move |i| (self.vertices[i], self.vertices[(i + 1) % m]))
    }

    pub fn half_planes(&self) -> Vec<HalfPlane> {
        self.edges()
            .map(|(a, b)| {
                let d = sub(b, a);
                let len = norm(d);
                let normal = [d[1] / len, -d[0] / len];
                HalfPlane {
                    normal,
                    offset: dot(normal, a),
                }
            })
            .collect()
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| cross(a, b)).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| norm(sub(b, a))).sum()
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Strict interior test by half-plane signs.
    pub fn contains(&self, p: Point) -> bool {
        self.half_planes().iter().all(|h| h.slack(p) > 0.0)
    }

    /// Distance to the nearest edge line; exact for interior points of a
    /// convex polygon.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.half_planes()
            .iter()
            .map(|h| h.slack(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Outward normal of the edge nearest to `p`.
    pub fn nearest_normal(&self, p: Point) -> Point {
        self.half_planes()
            .iter()
            .min_by(|a, b| a.slack(p).abs().total_cmp(&b.slack(p).abs()))
            .map(|h| h.normal)
            .unwrap_or([0.0, 0.0])
    }

    /// Euclidean distance from `p` to the closed polygon (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        if self.half_planes().iter().all(|h| h.slack(p) >= 0.0) {
            return 0.0;
        }
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Intersection with one half-plane (Sutherland–Hodgman step).
    pub fn clip(&self, h: &HalfPlane) -> Option<ConvexPolygon> {
        let pts = clip_points(&self.vertices, h);
        Self::from_clip(pts)
    }

    /// Inward offset by `r`: the intersection of all edge half-planes shifted
    /// by `r`. `None` once the offset region has no interior.
    pub fn inset(&self, r: f64) -> Option<ConvexPolygon> {
        if r <= 0.0 {
            return Some(self.clone());
        }
        let mut pts = self.vertices.clone();
        for h in self.half_planes() {
            pts = clip_points(&pts, &h.shifted(r));
            if pts.len() < 3 {
                return None;
            }
        }
        Self::from_clip(pts)
    }

    /// Largest inscribed disk as `(center, radius)`.
    ///
    /// Solves `max r` subject to `n_i · c + r <= b_i` by enumerating the
    /// vertices of the feasible set (three active edge constraints).
    pub fn chebyshev_disk(&self) -> (Point, f64) {
        let hs = self.half_planes();
        let m = hs.len();
        let mut best = (self.centroid(), 0.0f64);
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let rows = [hs[i], hs[j], hs[k]];
                    let det3 = |c: [[f64; 3]; 3]| {
                        c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
                            - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
                            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0])
                    };
                    let a: [[f64; 3]; 3] = rows.map(|h| [h.normal[0], h.normal[1], 1.0]);
                    let d = det3(a);
                    if d.abs() < 1e-14 {
                        continue;
                    }
                    let mut sol = [0.0; 3];
                    for (col, s) in sol.iter_mut().enumerate() {
                        let mut c = a;
                        for row in 0..3 {
                            c[row][col] = rows[row].offset;
                        }
                        *s = det3(c) / d;
                    }
                    let (center, r) = ([sol[0], sol[1]], sol[2]);
                    let tol = 1e-12 * (1.0 + r.abs());
                    if r > best.1 && hs.iter().all(|h| h.slack(center) >= r - tol) {
                        best = (center, r);
                    }
                }
            }
        }
        best
    }

    pub fn inradius(&self) -> f64 {
        self.chebyshev_disk().1
    }

    pub fn incenter(&self) -> Point {
        self.chebyshev_disk().0
    }

    pub fn centroid(&self) -> Point {
        let a = self.area();
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let c = cross(p, q);
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [cx / (6.0 * a), cy / (6.0 * a)]
    }
}

fn clip_points(pts: &[Point], h: &HalfPlane) -> Vec<Point> {
    let m = pts.len();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..m {
        let cur = pts[i];
        let nxt = pts[(i + 1) % m];
        let sc = h.slack(cur);
        let sn = h.slack(nxt);
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push([
                cur[0] + t * (nxt[0] - cur[0]),
                cur[1] + t * (nxt[1] - cur[1]),
            ]);
        }
    }
    out
}

pub(crate) fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// Convex planar region: a disk or a strictly convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexShape {
    Disk { center: Point, radius: f64 },
    Polygon(ConvexPolygon),
}

impl ConvexShape {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(ConvexShape::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        ConvexShape::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn rectangle(origin: Point, width: f64, height: f64) -> Result<Self> {
        Ok(ConvexShape::Polygon(ConvexPolygon::rectangle(
            origin, width, height,
        )?))
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Ok(ConvexShape::Polygon(ConvexPolygon::new(vertices)?))
    }

    pub fn area(&self) -> f64 {
        match self {
            ConvexShape::Disk { radius, .. } => PI * radius * radius,
            ConvexShape::Polygon(p) => p.area(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            ConvexShape::Disk { radius, .. } => 2.0 * PI * radius,
            ConvexShape::Polygon(p) => p.perimeter(),
        }
    }

    pub fn inradius(&self) -> f64 {
        match self {
            ConvexShape::Disk { radius, .. } => *radius,
            ConvexShape::Polygon(p) => p.inradius(),
        }
    }

    /// Centre of a largest inscribed disk.
    pub fn incenter(&self) -> Point {
        match self {
            ConvexShape::Disk { center, .. } => *center,
            ConvexShape::Polygon(p) => p.incenter(),
        }
    }

    pub fn bbox(&self) -> (Point, Point) {
        match self {
            ConvexShape::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            ConvexShape::Polygon(p) => p.bbox(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexShape::Disk { radius, .. } => 2.0 * radius,
            ConvexShape::Polygon(p) => {
                let v = p.vertices();
                let mut d = 0.0f64;
                for a in v {
                    for b in v {
                        d = d.max(norm(sub(*a, *b)));
                    }
                }
                d
            }
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            ConvexShape::Disk { center, radius } => norm(sub(p, *center)) < *radius,
            ConvexShape::Polygon(poly) => poly.contains(p),
        }
    }

    /// Euclidean distance to the boundary for interior points.
    pub fn boundary_distance(&self, p: Point) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain(p[0], p[1]));
        }
        Ok(match self {
            ConvexShape::Disk { center, radius } => radius - norm(sub(p, *center)),
            ConvexShape::Polygon(poly) => poly.boundary_distance(p),
        })
    }

    /// Outward unit normal at the boundary point nearest to `p`.
    pub fn outward_normal(&self, p: Point) -> Point {
        match self {
            ConvexShape::Disk { center, .. } => {
                let d = sub(p, *center);
                let r = norm(d);
                if r > 0.0 {
                    [d[0] / r, d[1] / r]
                } else {
                    [1.0, 0.0]
                }
            }
            ConvexShape::Polygon(poly) => poly.nearest_normal(p),
        }
    }

    /// Distance from `p` to the closed region (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        match self {
            ConvexShape::Disk { center, radius } => (norm(sub(p, *center)) - radius).max(0.0),
            ConvexShape::Polygon(poly) => poly.distance_to(p),
        }
    }

    /// Compact textual form accepted by [`ConvexShape::parse`].
    pub fn describe(&self) -> String {
        match self {
            ConvexShape::Disk { center, radius } => {
                if center == &[0.0, 0.0] {
                    format!("disk:{radius}")
                } else {
                    format!("disk:{radius}@{},{}", center[0], center[1])
                }
            }
            ConvexShape::Polygon(p) => {
                let v: Vec<String> = p
                    .vertices()
                    .iter()
                    .map(|q| format!("{},{}", q[0], q[1]))
                    .collect();
                format!("polygon:{}", v.join(";"))
            }
        }
    }

    /// Parses `disk:R`, `disk:R@cx,cy`, `square:a`, `rect:WxH`,
    /// `rect:WxH@x0,y0` or `polygon:x1,y1;x2,y2;...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("shape `{spec}` lacks a `kind:` prefix")))?;
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}` in `{spec}`")))
        };
        let point = |s: &str| -> Result<Point> {
            let (x, y) = s
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad point `{s}` in `{spec}`")))?;
            Ok([num(x)?, num(y)?])
        };
        let (body, at) = match rest.split_once('@') {
            Some((b, a)) => (b, Some(point(a)?)),
            None => (rest, None),
        };
        match kind.trim() {
            "disk" => ConvexShape::disk(at.unwrap_or([0.0, 0.0]), num(body)?),
            "square" => {
                let a = num(body)?;
                ConvexShape::rectangle(at.unwrap_or([0.0, 0.0]), a, a)
            }
            "rect" | "rectangle" => {
                let (w, h) = body
                    .split_once('x')
                    .ok_or_else(|| Error::Parse(format!("rectangle needs WxH in `{spec}`")))?;
                ConvexShape::rectangle(at.unwrap_or([0.0, 0.0]), num(w)?, num(h)?)
            }
            "polygon" => {
                let pts = body
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(point)
                    .collect::<Result<Vec<_>>>()?;
                ConvexShape::polygon(pts)
            }
            other => Err(Error::Parse(format!("unknown shape kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_clockwise_and_reflex_polygons() {
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(ConvexPolygon::new(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [1.0, 0.5],
            [2.0, 2.0],
            [0.0, 2.0]
        ])
        .is_err());
        assert!(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn square_measures_and_inset() {
        let sq = ConvexPolygon::rectangle([0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(sq.area(), 1.0);
        assert_eq!(sq.perimeter(), 4.0);
        let core = sq.inset(0.25).unwrap();
        assert!((core.area() - 0.25).abs() < 1e-15);
        assert!(sq.inset(0.6).is_none());
        assert!((sq.inradius() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangle_inradius_matches_area_over_semiperimeter() {
        let t = ConvexPolygon::new(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        let expected = t.area() / (0.5 * t.perimeter());
        assert!((t.inradius() - expected).abs() < 1e-12);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "disk:1",
            "square:1",
            "rect:2x1",
            "polygon:0,0;2,0;0,2",
            "disk:0.5@1,2",
        ] {
            let shape = ConvexShape::parse(s).unwrap();
            assert_eq!(ConvexShape::parse(&shape.describe()).unwrap(), shape);
        }
        assert!(ConvexShape::parse("blob:1").is_err());
        assert!(ConvexShape::parse("disk").is_err());
    }

    #[test]
    fn distance_to_polygon_outside_and_inside() {
        let sq = ConvexPolygon::rectangle([0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(sq.distance_to([0.5, 0.5]), 0.0);
        assert!((sq.distance_to([2.0, 0.5]) - 1.0).abs() < 1e-15);
        assert!((sq.distance_to([2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
