//! Cheeger constants and the family `C_λ` of a convex planar set.
//!
//! `C_λ` is realized as the morphological opening `(C ⊖ (1/λ)B) ⊕ (1/λ)B`,
//! empty below the Cheeger constant `h`. Openings of convex sets are
//! measured exactly with the Steiner formulas.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{ConvexShape, Point};

/// `C ⊖ rB`.
pub fn erode(shape: &ConvexShape, r: f64) -> Result<ConvexShape> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "erosion radius {r} must be >= 0"
        )));
    }
    match shape {
        ConvexShape::Disk { center, radius } => {
            if *radius <= r {
                Err(Error::Empty)
            } else {
                ConvexShape::disk(*center, radius - r)
            }
        }
        ConvexShape::Polygon(poly) => poly.inset(r).map(ConvexShape::Polygon).ok_or(Error::Empty),
    }
}

/// Area and perimeter of `(C ⊖ rB) ⊕ rB`.
pub fn opening_measures(shape: &ConvexShape, r: f64) -> Result<(f64, f64)> {
    let core = erode(shape, r)?;
    Ok(steiner(&core, r))
}

fn steiner(core: &ConvexShape, r: f64) -> (f64, f64) {
    let (a, p) = (core.area(), core.perimeter());
    (a + p * r + PI * r * r, p + 2.0 * PI * r)
}

fn eroded_area(shape: &ConvexShape, r: f64) -> f64 {
    erode(shape, r).map(|c| c.area()).unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheegerResult {
    pub r_star: f64,
    pub h: f64,
    /// `C ⊖ r*B`.
    pub core: ConvexShape,
    /// The opening at `r*` is all of `C`.
    pub calibrable: bool,
}

/// Solves `|C ⊖ rB| = πr²` by bisection; `h = 1/r*`.
pub fn cheeger_constant(shape: &ConvexShape) -> CheegerResult {
    let r_star = match shape {
        ConvexShape::Disk { radius, .. } => 0.5 * radius,
        ConvexShape::Polygon(_) => {
            let (mut a, mut b) = (0.0, shape.inradius());
            while b - a > 1e-15 * b {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if eroded_area(shape, m) > PI * m * m {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        }
    };
    let core = erode(shape, r_star).expect("Cheeger radius lies below the inradius");
    let (area, _) = steiner(&core, r_star);
    let calibrable = (shape.area() - area).abs() <= 1e-12 * shape.area().max(1.0);
    CheegerResult {
        r_star,
        h: 1.0 / r_star,
        core,
        calibrable,
    }
}

/// The set `C_λ`: a convex core rounded by `radius = 1/λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Opening {
    pub core: ConvexShape,
    pub radius: f64,
}

impl Opening {
    pub fn contains(&self, p: Point) -> bool {
        self.core.distance_to(p) <= self.radius
    }

    pub fn area(&self) -> f64 {
        steiner(&self.core, self.radius).0
    }

    pub fn perimeter(&self) -> f64 {
        steiner(&self.core, self.radius).1
    }
}

/// `C_λ`, or `None` when `λ < h`.
pub fn c_lambda(shape: &ConvexShape, lambda: f64) -> Result<Option<Opening>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let ch = cheeger_constant(shape);
    Ok(c_lambda_given(shape, &ch, lambda))
}

fn c_lambda_given(shape: &ConvexShape, ch: &CheegerResult, lambda: f64) -> Option<Opening> {
    if lambda < ch.h {
        return None;
    }
    let radius = 1.0 / lambda;
    if radius >= ch.r_star {
        return Some(Opening {
            core: ch.core.clone(),
            radius: ch.r_star,
        });
    }
    erode(shape, radius)
        .ok()
        .map(|core| Opening { core, radius })
}

/// `Per(F) − λ|F|`.
pub fn cheeger_functional(perimeter: f64, area: f64, lambda: f64) -> f64 {
    perimeter - lambda * area
}

/// Smallest margin `J(candidate) − J(C_λ)` over the candidate family
/// `{∅, C, core alone, openings at (1 ± 1e-3)/λ, largest inscribed ball}`.
///
/// Nonnegative (up to rounding) when `C_λ` beats every candidate.
pub fn variational_gap(shape: &ConvexShape, lambda: f64) -> Result<f64> {
    let ch = cheeger_constant(shape);
    let best = match c_lambda_given(shape, &ch, lambda) {
        Some(op) => cheeger_functional(op.perimeter(), op.area(), lambda),
        None => 0.0,
    };
    let mut cands = vec![
        0.0,
        cheeger_functional(shape.perimeter(), shape.area(), lambda),
    ];
    let rho = shape.inradius();
    cands.push(cheeger_functional(2.0 * PI * rho, PI * rho * rho, lambda));
    let r = 1.0 / lambda;
    if let Ok(core) = erode(shape, r) {
        cands.push(cheeger_functional(core.perimeter(), core.area(), lambda));
    }
    for s in [r * (1.0 - 1e-3), r * (1.0 + 1e-3)] {
        if let Ok((a, p)) = opening_measures(shape, s) {
            cands.push(cheeger_functional(p, a, lambda));
        }
    }
    Ok(cands.iter().map(|c| c - best).fold(f64::INFINITY, f64::min))
}

/// Value of `H_C(x) = inf{λ : x ∈ C_λ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HValue {
    Finite(f64),
    /// No `λ` up to the cap admits the point.
    Unbounded,
}

impl HValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            HValue::Finite(v) => Some(v),
            HValue::Unbounded => None,
        }
    }
}

/// `H_C(x)` with the default cap `λ_cap = 1e6·h`.
pub fn h_field(shape: &ConvexShape, point: Point) -> Result<HValue> {
    let ch = cheeger_constant(shape);
    h_field_with(shape, &ch, point, 1e6 * ch.h)
}

/// `H_C(x)` reusing a precomputed Cheeger result.
pub fn h_field_with(
    shape: &ConvexShape,
    ch: &CheegerResult,
    point: Point,
    cap: f64,
) -> Result<HValue> {
    if !shape.contains(point) {
        return Err(Error::OutsideDomain(point[0], point[1]));
    }
    let member =
        |lambda: f64| c_lambda_given(shape, ch, lambda).is_some_and(|op| op.contains(point));
    if member(ch.h) {
        return Ok(HValue::Finite(ch.h));
    }
    if !member(cap) {
        return Ok(HValue::Unbounded);
    }
    let (mut lo, mut hi) = (ch.h.ln(), cap.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if member(mid.exp()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(HValue::Finite(hi.exp()))
}

/// `u(t, x) = H_C(x)·t`.
pub fn tv_large_solution(shape: &ConvexShape, t: f64, point: Point) -> Result<HValue> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be >= 0")));
    }
    Ok(match h_field(shape, point)? {
        HValue::Finite(h) => HValue::Finite(h * t),
        HValue::Unbounded if t == 0.0 => HValue::Finite(0.0),
        HValue::Unbounded => HValue::Unbounded,
    })
}
