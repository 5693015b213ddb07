//! Small numerical kernels: compensated sums, tridiagonal and CG solves.

use crate::error::{Error, Result};

/// Neumaier-compensated sum; order-stable to a few ulps.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Symmetric system `diag + off-diagonal edges`, stored as an edge list.
///
/// Every edge `(i, j, a)` contributes `-a` at `(i, j)` and `(j, i)`.
#[derive(Debug, Clone)]
pub struct SymmetricSystem {
    pub diag: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl SymmetricSystem {
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, (d, xi)) in y.iter_mut().zip(self.diag.iter().zip(x)) {
            *yi = d * xi;
        }
        for &(i, j, a) in &self.edges {
            y[i] -= a * x[j];
            y[j] -= a * x[i];
        }
    }

    /// Direct solve for a chain graph whose edge `k` joins cells `k` and `k + 1`.
    pub fn solve_chain(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        let mut off = vec![0.0; n.saturating_sub(1)];
        for &(i, j, a) in &self.edges {
            debug_assert_eq!(j, i + 1);
            off[i] = -a;
        }
        thomas(&off, &self.diag, &off, rhs)
    }

    /// Jacobi-preconditioned conjugate gradients.
    pub fn solve_cg(
        &self,
        rhs: &[f64],
        guess: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, usize)> {
        let n = rhs.len();
        let mut x = guess.to_vec();
        let mut r = vec![0.0; n];
        self.apply(&x, &mut r);
        for i in 0..n {
            r[i] = rhs[i] - r[i];
        }
        let bnorm = l2(rhs).max(f64::MIN_POSITIVE);
        let mut rnorm = l2(&r);
        if rnorm <= tol * bnorm {
            return Ok((x, 0));
        }
        let inv: Vec<f64> = self.diag.iter().map(|d| 1.0 / d).collect();
        let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut rz = dotv(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 1..=max_iter {
            self.apply(&p, &mut ap);
            let pap = dotv(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::LinearSolve {
                    iterations: it,
                    residual: rnorm / bnorm,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            rnorm = l2(&r);
            if rnorm <= tol * bnorm {
                return Ok((x, it));
            }
            for i in 0..n {
                z[i] = r[i] * inv[i];
            }
            let rz_new = dotv(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::LinearSolve {
            iterations: max_iter,
            residual: rnorm / bnorm,
        })
    }
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dotv(a, a).sqrt()
}

/// Thomas algorithm for `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::LinearSolve {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    if n > 1 {
        c[0] = upper[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::LinearSolve {
                iterations: i,
                residual: f64::INFINITY,
            });
        }
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn chain_and_cg_agree() {
        let sys = SymmetricSystem {
            diag: vec![4.0, 3.0, 4.0, 5.0],
            edges: vec![(0, 1, 1.0), (1, 2, 1.5), (2, 3, 0.5)],
        };
        let b = [1.0, -2.0, 0.5, 3.0];
        let x1 = sys.solve_chain(&b).unwrap();
        let (x2, _) = sys.solve_cg(&b, &[0.0; 4], 1e-14, 100).unwrap();
        for (a, c) in x1.iter().zip(&x2) {
            assert!((a - c).abs() < 1e-12);
        }
        let mut y = vec![0.0; 4];
        sys.apply(&x1, &mut y);
        for (a, c) in y.iter().zip(&b) {
            assert!((a - c).abs() < 1e-12);
        }
    }
}
