use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScoreVector;
use crate::error::{Error, Result};
use crate::hon::HigherOrderModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankOptions {
    /// Probability of following an edge rather than teleporting.
    pub alpha: f64,
    /// Convergence threshold on the L1 change between iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        PageRankOptions {
            alpha: 0.85,
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

impl PageRankOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Parameter(format!("tolerance {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stationary scores of the higher-order nodes, indexed like the model.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Power iteration `r ← α r T + (α·dangling + 1 − α)/m`, where dangling is
/// the mass on nodes without successors.
pub fn ho_pagerank(m: &HigherOrderModel, opts: PageRankOptions) -> Result<PageRank> {
    opts.validate()?;
    let n = m.node_count();
    if n == 0 {
        return Err(Error::InsufficientData("model has no nodes".into()));
    }
    // Incoming edges per node as (source, probability), in edge order.
    let mut indeg = vec![0usize; n + 1];
    for e in m.edges() {
        indeg[e.to as usize + 1] += 1;
    }
    for i in 0..n {
        indeg[i + 1] += indeg[i];
    }
    let mut fill = indeg.clone();
    let mut incoming = vec![(0u32, 0.0f64); indeg[n]];
    for e in m.edges() {
        let slot = &mut fill[e.to as usize];
        incoming[*slot] = (e.from, e.prob);
        *slot += 1;
    }
    let dangling: Vec<u32> = (0..n as u32).filter(|&v| m.out_degree(v) == 0).collect();

    let alpha = opts.alpha;
    let mut r = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let lost: f64 = dangling.iter().map(|&v| r[v as usize]).sum();
        let base = (alpha * lost + 1.0 - alpha) / n as f64;
        next.par_iter_mut().enumerate().for_each(|(j, x)| {
            let inflow: f64 = incoming[indeg[j]..indeg[j + 1]]
                .iter()
                .map(|&(i, p)| r[i as usize] * p)
                .sum();
            *x = alpha * inflow + base;
        });
        residual = r.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut r, &mut next);
        if residual <= opts.tol {
            let total: f64 = r.iter().sum();
            for x in &mut r {
                *x /= total;
            }
            return Ok(PageRank {
                scores: r,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Sums higher-order scores onto the last element of each node's tuple.
/// The total is preserved; the result is flagged normalized when the input sums to 1.
pub fn project_pagerank(m: &HigherOrderModel, ho_scores: &[f64]) -> ScoreVector {
    assert_eq!(ho_scores.len(), m.node_count(), "one score per higher-order node");
    let labels = m.labels();
    let mut acc = vec![0.0; labels.len()];
    for (v, &s) in ho_scores.iter().enumerate() {
        acc[m.last(v as u32).index()] += s;
    }
    let total: f64 = ho_scores.iter().sum();
    ScoreVector::with_flag(
        labels.ids().map(|v| (labels.name(v).to_string(), acc[v.index()])),
        (total - 1.0).abs() <= 1e-9,
    )
}
