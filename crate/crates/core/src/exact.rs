//! Closed-form reference solutions.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::geometry::ConvexShape;

const BRANCH: f64 = -1.0 / E;

/// Principal branch of the Lambert W function by Halley iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < BRANCH - 1e-15 {
        return Err(Error::OutOfBranch(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let x = x.max(BRANCH);
    if x == BRANCH {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        let l = x.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1e-300);
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

/// Plateau radius `r(t) = W(−(t+1)/(2e^{t+1/2}))/(t+1) + 1`.
pub fn example51_radius(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    let arg = -(t + 1.0) / (2.0 * (t + 0.5).exp());
    Ok(lambert_w0(arg)? / (t + 1.0) + 1.0)
}

/// `b(t, ρ) = log(ρ/(1−ρ)) + t/ρ`.
pub fn example51_profile(t: f64, rho: f64) -> f64 {
    (rho / (1.0 - rho)).ln() + t / rho
}

/// Exact solution: `b(t, max(ρ, r(t)))`.
pub fn example51_value(t: f64, rho: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "rho = {rho} outside [0, 1)"
        )));
    }
    let r = example51_radius(t)?;
    Ok(example51_profile(t, rho.max(r)))
}

/// Initial datum of the example.
pub fn example51_initial(rho: f64) -> Result<f64> {
    example51_value(0.0, rho)
}

/// Snapshot of the exact solution at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example51State {
    pub t: f64,
    pub r: f64,
    /// Plateau value `b(t, r(t))`.
    pub a: f64,
}

impl Example51State {
    pub fn at(t: f64) -> Result<Self> {
        let r = example51_radius(t)?;
        Ok(Self {
            t,
            r,
            a: example51_profile(t, r),
        })
    }

    pub fn value(&self, rho: f64) -> f64 {
        if rho <= self.r {
            self.a
        } else {
            example51_profile(self.t, rho)
        }
    }
}

/// `C0 · t^{1/(2−p)} · d^{−p/(2−p)}`.
pub fn barrier(p: f64, t: f64, d: f64, c0: f64) -> Result<f64> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::BadExponent(p));
    }
    if !(t >= 0.0 && d > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need t >= 0, d > 0 (t = {t}, d = {d})"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(c0 * t.powf(1.0 / (2.0 - p)) * d.powf(-p / (2.0 - p)))
}

/// `Per(C)/|C|`.
pub fn calibrable_rate(shape: &ConvexShape) -> f64 {
    match shape {
        ConvexShape::Disk { radius, .. } => 2.0 / radius,
        ConvexShape::Polygon(poly) => poly.perimeter() / poly.area(),
    }
}
