//! Multi-order models and order selection by likelihood-ratio tests.
//!
//! A multi-order model with maximum order `K` scores the transition into
//! position `i` of a path with layer `min(i, K)`: the context grows from the
//! path start until it reaches `K` nodes and then slides.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::FirstOrderGraph;
use crate::hon::{HigherOrderModel, LogLikelihood};
use crate::labels::{Labels, NodeId};
use crate::trajectory::PathCorpus;

/// Default significance level for order detection.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Relative slack under which a negative likelihood-ratio statistic is
/// treated as rounding and clamped to zero.
pub const LAMBDA_CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MultiOrderModel {
    labels: Labels,
    layers: Vec<HigherOrderModel>,
    start: Vec<f64>,
    warnings: Vec<String>,
}

impl MultiOrderModel {
    /// Trains attributed layers `1..=max_order` on the same corpus. If a
    /// layer has no windows the maximum order is reduced to the largest
    /// feasible one and a warning is recorded.
    pub fn build(corpus: &PathCorpus, max_order: usize) -> Result<Self> {
        if max_order == 0 {
            return Err(Error::Parameter("maximum order must be at least 1".into()));
        }
        if corpus.total_paths() == 0 {
            return Err(Error::InsufficientData("corpus has no paths".into()));
        }
        let feasible = corpus.max_len().saturating_sub(1);
        let mut warnings = Vec::new();
        let top = if feasible < max_order {
            let msg = format!(
                "maximum order reduced from {max_order} to {feasible}: longest path has {} nodes",
                corpus.max_len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
            feasible
        } else {
            max_order
        };
        if top == 0 {
            return Err(Error::EmptyModel {
                order: 1,
                window: 2,
                max_len: corpus.max_len(),
            });
        }
        let layers = (1..=top)
            .into_par_iter()
            .map(|k| HigherOrderModel::from_paths(corpus, k, true))
            .collect::<Result<Vec<_>>>()?;

        let labels = corpus.labels().clone();
        let mut start = vec![0.0; labels.len()];
        let total = corpus.total_paths() as f64;
        for p in corpus.paths() {
            if let Some(&v) = p.nodes.first() {
                start[v.index()] += p.multiplicity as f64;
            }
        }
        for s in &mut start {
            *s /= total;
        }
        Ok(MultiOrderModel {
            labels,
            layers,
            start,
            warnings,
        })
    }

    /// Assembles a model from pre-built layers `1..=K` (used for topology-derived models).
    pub fn from_layers(layers: Vec<HigherOrderModel>, start: Vec<f64>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::Parameter("at least one layer is required".into()))?;
        for (i, l) in layers.iter().enumerate() {
            if l.order() != i + 1 {
                return Err(Error::Parameter(format!("layer {} has order {}", i + 1, l.order())));
            }
        }
        let labels = layers.last().unwrap().labels().clone();
        if start.len() != labels.len() && start.len() != first.labels().len() {
            return Err(Error::Parameter("start distribution does not match labels".into()));
        }
        let mut start = start;
        start.resize(labels.len(), 0.0);
        Ok(MultiOrderModel {
            labels,
            layers,
            start,
            warnings: Vec::new(),
        })
    }

    pub fn max_order(&self) -> usize {
        self.layers.len()
    }

    /// The nested model made of layers `1..=order`.
    pub fn truncated(&self, order: usize) -> Self {
        assert!((1..=self.max_order()).contains(&order), "order {order} out of range");
        MultiOrderModel {
            labels: self.labels.clone(),
            layers: self.layers[..order].to_vec(),
            start: self.start.clone(),
            warnings: self.warnings.clone(),
        }
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn layer(&self, order: usize) -> &HigherOrderModel {
        &self.layers[order - 1]
    }

    pub fn layers(&self) -> &[HigherOrderModel] {
        &self.layers
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn start_probability(&self, v: NodeId) -> f64 {
        self.start.get(v.index()).copied().unwrap_or(0.0)
    }

    pub fn start_distribution(&self) -> &[f64] {
        &self.start
    }

    /// Attaches first-order topology to every layer (needed for prediction fallback).
    pub fn with_first_order(mut self, g: &FirstOrderGraph) -> Result<Self> {
        self.layers = self
            .layers
            .into_iter()
            .map(|l| l.with_first_order(g))
            .collect::<Result<_>>()?;
        self.labels = self.layers.last().unwrap().labels().clone();
        self.start.resize(self.labels.len(), 0.0);
        Ok(self)
    }

    /// Path log-likelihood with this model's maximum order.
    pub fn path_likelihood(&self, nodes: &[NodeId], condition_on_start: bool) -> LogLikelihood {
        self.path_likelihood_up_to(nodes, self.max_order(), condition_on_start)
    }

    /// Path log-likelihood of the nested model truncated at `max_order`.
    pub fn path_likelihood_up_to(&self, nodes: &[NodeId], max_order: usize, condition_on_start: bool) -> LogLikelihood {
        assert!(
            (1..=self.max_order()).contains(&max_order),
            "order {max_order} outside 1..={}",
            self.max_order()
        );
        let mut ll = LogLikelihood::CERTAIN;
        if nodes.is_empty() {
            return ll;
        }
        if !condition_on_start {
            ll += LogLikelihood::from_probability(self.start_probability(nodes[0]));
        }
        for i in 1..nodes.len() {
            let k = i.min(max_order);
            let p = self.layers[k - 1]
                .transition_prob(&nodes[i - k..i], nodes[i])
                .unwrap_or(0.0);
            if p <= 0.0 {
                return LogLikelihood::IMPOSSIBLE;
            }
            ll += LogLikelihood::from_probability(p);
        }
        ll
    }

    /// Corpus log-likelihood (multiplicity weighted) and the weighted number
    /// of impossible paths, which are left out of the sum.
    pub fn corpus_likelihood(&self, corpus: &PathCorpus, condition_on_start: bool) -> (f64, u64) {
        let mut total = 0.0;
        let mut impossible = 0;
        for p in corpus.paths() {
            let ll = self.path_likelihood(&p.nodes, condition_on_start);
            if ll.is_impossible() {
                impossible += p.multiplicity;
            } else {
                total += ll.value() * p.multiplicity as f64;
            }
        }
        (total, impossible)
    }
}

/// Degrees of freedom of a multi-order model of order `k` on topology `g`:
/// `(|V| - 1) + Σ_{i=1..k} (walks of length i - non-zero rows of A^i)`.
///
/// Walks are counted through `A^i·1`, whose positive entries are exactly the
/// non-zero rows of `A^i`.
pub fn degrees_of_freedom(g: &FirstOrderGraph, k: usize) -> Result<u128> {
    if g.node_count() == 0 {
        return Err(Error::InsufficientData("graph has no nodes".into()));
    }
    if k == 0 {
        return Err(Error::Parameter("order must be at least 1".into()));
    }
    let n = g.node_count();
    let mut walks = vec![1u128; n];
    let mut d = (n - 1) as u128;
    for i in 1..=k {
        let mut next = vec![0u128; n];
        for v in g.labels().ids() {
            let mut acc = 0u128;
            for &w in g.successors(v) {
                acc = acc.checked_add(walks[w.index()]).ok_or(Error::WalkCountOverflow(i))?;
            }
            next[v.index()] = acc;
        }
        let total = next
            .iter()
            .try_fold(0u128, |a, &x| a.checked_add(x))
            .ok_or(Error::WalkCountOverflow(i))?;
        let nonzero = next.iter().filter(|&&x| x > 0).count() as u128;
        d = d.checked_add(total - nonzero).ok_or(Error::WalkCountOverflow(i))?;
        walks = next;
    }
    Ok(d)
}

/// Upper tail `P(X ≥ x)` of a χ² distribution with `dof` degrees of freedom.
pub fn chi2_sf(dof: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof).expect("degrees of freedom are positive").sf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrtResult {
    /// Order of the null model; the alternative has order `order + 1`.
    pub order: usize,
    pub ll_null: f64,
    pub ll_alt: f64,
    pub lambda: f64,
    pub delta_dof: u128,
    pub p_value: f64,
    /// Weighted number of paths left out because either model rates them impossible.
    pub excluded_paths: u64,
}

/// Likelihood-ratio test of `null` (order k) against `alt` (order k + 1).
pub fn likelihood_ratio_test(
    null: &MultiOrderModel,
    alt: &MultiOrderModel,
    corpus: &PathCorpus,
    g: &FirstOrderGraph,
    condition_on_start: bool,
) -> Result<LrtResult> {
    let k = null.max_order();
    if alt.max_order() != k + 1 {
        return Err(Error::Parameter(format!(
            "alternative must have order {} (got {})",
            k + 1,
            alt.max_order()
        )));
    }
    let lls = |m: &MultiOrderModel| -> Vec<LogLikelihood> {
        corpus
            .paths()
            .iter()
            .map(|p| m.path_likelihood(&p.nodes, condition_on_start))
            .collect()
    };
    let weights: Vec<u64> = corpus.paths().iter().map(|p| p.multiplicity).collect();
    lrt_from_path_likelihoods(k, &lls(null), &lls(alt), &weights, g)
}

fn lrt_from_path_likelihoods(
    k: usize,
    null: &[LogLikelihood],
    alt: &[LogLikelihood],
    weights: &[u64],
    g: &FirstOrderGraph,
) -> Result<LrtResult> {
    let mut ll_null = 0.0;
    let mut ll_alt = 0.0;
    let mut excluded = 0;
    for ((a, b), &w) in null.iter().zip(alt).zip(weights) {
        if a.is_impossible() || b.is_impossible() {
            excluded += w;
            continue;
        }
        ll_null += a.value() * w as f64;
        ll_alt += b.value() * w as f64;
    }
    let mut lambda = 2.0 * (ll_alt - ll_null);
    if lambda < 0.0 {
        if -lambda <= LAMBDA_CLAMP_TOLERANCE * ll_null.abs().max(1.0) {
            lambda = 0.0;
        } else {
            return Err(Error::LikelihoodOrder(-lambda / 2.0));
        }
    }
    let d0 = degrees_of_freedom(g, k)?;
    let d1 = degrees_of_freedom(g, k + 1)?;
    if d1 <= d0 {
        return Err(Error::DegenerateTest(format!(
            "d({}) = {d1} does not exceed d({k}) = {d0}",
            k + 1
        )));
    }
    let delta_dof = d1 - d0;
    let p_value = chi2_sf(delta_dof as f64, lambda);
    Ok(LrtResult {
        order: k,
        ll_null,
        ll_alt,
        lambda,
        delta_dof,
        p_value,
        excluded_paths: excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderDetection {
    pub optimal_order: usize,
    /// Maximum order actually available (may be below the requested one).
    pub max_order: usize,
    pub epsilon: f64,
    pub tests: Vec<LrtResult>,
}

/// Tests order k against k + 1 for k = 1, 2, …; the optimal order is the
/// alternative of the last test in the initial run of significant tests
/// (`p < epsilon`), or 1 when the first test is not significant.
///
/// Every test up to the maximum order is run and reported, even after the
/// first non-significant one.
pub fn detect_optimal_order(
    corpus: &PathCorpus,
    g: &FirstOrderGraph,
    max_order: usize,
    epsilon: f64,
    condition_on_start: bool,
) -> Result<OrderDetection> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("significance {epsilon} must lie in (0, 1)")));
    }
    let model = MultiOrderModel::build(corpus, max_order)?;
    detect_with_model(&model, corpus, g, epsilon, condition_on_start)
}

/// [`detect_optimal_order`] with an already trained model.
pub fn detect_with_model(
    model: &MultiOrderModel,
    corpus: &PathCorpus,
    g: &FirstOrderGraph,
    epsilon: f64,
    condition_on_start: bool,
) -> Result<OrderDetection> {
    let top = model.max_order();
    let per_order: Vec<Vec<LogLikelihood>> = (1..=top)
        .into_par_iter()
        .map(|k| {
            corpus
                .paths()
                .iter()
                .map(|p| model.path_likelihood_up_to(&p.nodes, k, condition_on_start))
                .collect()
        })
        .collect();
    let weights: Vec<u64> = corpus.paths().iter().map(|p| p.multiplicity).collect();
    let mut tests = Vec::new();
    let mut optimal = 1;
    let mut climbing = true;
    for k in 1..top {
        let t = lrt_from_path_likelihoods(k, &per_order[k - 1], &per_order[k], &weights, g)?;
        if climbing && t.p_value < epsilon {
            optimal = k + 1;
        } else {
            climbing = false;
        }
        tests.push(t);
    }
    Ok(OrderDetection {
        optimal_order: optimal,
        max_order: top,
        epsilon,
        tests,
    })
}
