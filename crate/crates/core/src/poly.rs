//! Dense univariate polynomials with real coefficients, and their maximization
//! on a closed interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values closer than this are considered tied when picking a maximizer.
pub const TIE_TOL: f64 = 1e-12;

/// Coefficients in ascending order: `c[0] + c[1] t + c[2] t² + …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree ignoring exactly-zero leading coefficients; `0` for the zero
    /// polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, &c)| m as f64 * c)
            .collect();
        Polynomial { coeffs }
    }

    /// Interpolating polynomial through `(nodes[i], values[i])`, from the
    /// Vandermonde system solved with the Björck–Pereyra recurrences.
    pub fn interpolate(nodes: &[f64], values: &[f64]) -> Result<Self> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::Invalid {
                name: "nodes",
                reason: format!("{} nodes for {} values", nodes.len(), values.len()),
            });
        }
        let n = nodes.len() - 1;
        let mut c = values.to_vec();
        for k in 0..n {
            for i in (k + 1..=n).rev() {
                let h = nodes[i] - nodes[i - k - 1];
                if h == 0.0 {
                    return Err(Error::Numerical("repeated interpolation node".into()));
                }
                c[i] = (c[i] - c[i - 1]) / h;
            }
        }
        for k in (0..n).rev() {
            for i in k..n {
                c[i] -= nodes[k] * c[i + 1];
            }
        }
        Ok(Self { coeffs: c })
    }

    /// Real roots in `[lo, hi]`, ascending. Roots of the derivative split the
    /// interval into monotone pieces; each piece holds at most one root, found
    /// by bisection.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        if deg == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
        }
        let mut breaks = vec![lo];
        breaks.extend(self.derivative().roots_in(lo, hi));
        breaks.push(hi);
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&last| r - last > 1e-14) {
                roots.push(r);
            }
        };
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                push(a, &mut roots);
            }
            if fa.signum() * fb.signum() < 0.0 {
                push(bisect(|t| self.eval(t), a, b, fa), &mut roots);
            }
        }
        if self.eval(hi) == 0.0 {
            push(hi, &mut roots);
        }
        roots
    }

    /// Maximizer over `[lo, hi]` among the endpoints and interior critical
    /// points. Ties within [`TIE_TOL`] go to the larger argument.
    pub fn maximize(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut candidates = vec![lo, hi];
        candidates.extend(
            self.derivative()
                .roots_in(lo, hi)
                .into_iter()
                .filter(|&t| t > lo && t < hi),
        );
        let values: Vec<(f64, f64)> = candidates.iter().map(|&t| (t, self.eval(t))).collect();
        let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        values
            .into_iter()
            .filter(|v| v.1 >= best - TIE_TOL)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least the endpoints are candidates")
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// `count` Chebyshev points of the first kind mapped to `[lo, hi]`, ascending.
pub fn chebyshev_nodes(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let theta = std::f64::consts::PI * (2 * (count - 1 - i) + 1) as f64 / (2 * count) as f64;
            lo + 0.5 * (hi - lo) * (1.0 + theta.cos())
        })
        .collect()
}
