//! Gauss–Hermite rules for expectations over a normal distribution.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physicists' Gauss–Hermite nodes with weights normalized to sum to one, so
/// that `E[f(Y)] ≈ Σ w_i f(√2 σ y_i)` for `Y ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureSpec {
    /// Golub–Welsch: nodes are eigenvalues of the Jacobi matrix of the
    /// Hermite recurrence, weights the squared first eigenvector components.
    pub fn new(nodes_per_dim: usize) -> Result<Self> {
        if nodes_per_dim < 2 {
            return Err(Error::Invalid {
                name: "nodes_per_dim",
                reason: format!("need at least 2 nodes, got {nodes_per_dim}"),
            });
        }
        let k = nodes_per_dim;
        let jacobi = DMatrix::from_fn(k, k, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> = (0..k)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Symmetrize: the rule is exactly symmetric about zero.
        for i in 0..k / 2 {
            let j = k - 1 - i;
            let node = 0.5 * (pairs[j].0 - pairs[i].0);
            let weight = 0.5 * (pairs[i].1 + pairs[j].1);
            pairs[i] = (-node, weight);
            pairs[j] = (node, weight);
        }
        if k % 2 == 1 {
            pairs[k / 2].0 = 0.0;
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes_per_dim,
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    /// Sample points of `N(0, σ²)`.
    pub fn scaled_nodes(&self, sigma: f64) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|y| std::f64::consts::SQRT_2 * sigma * y)
            .collect()
    }

    pub fn expectation(&self, sigma: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.scaled_nodes(sigma)
            .iter()
            .zip(&self.weights)
            .map(|(&w, &p)| p * f(w))
            .sum()
    }
}
