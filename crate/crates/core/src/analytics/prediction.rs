use serde::Serialize;

use crate::error::{Error, Result};
use crate::labels::{Labels, NodeId};
use crate::multi_order::MultiOrderModel;

/// Probability floor for outcomes a model rules out.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionResult {
    pub context: Vec<NodeId>,
    pub distribution: Vec<(NodeId, f64)>,
    pub top: NodeId,
    /// Layer that produced the distribution; 0 for the uniform fallback over
    /// first-order out-neighbours.
    pub used_order: usize,
}

impl PredictionResult {
    pub fn probability(&self, v: NodeId) -> f64 {
        self.distribution
            .iter()
            .find(|&&(w, _)| w == v)
            .map_or(0.0, |&(_, p)| p)
    }
}

/// Next-step distribution from the longest trained suffix of `context`
/// (at most the model's maximum order), falling back to shorter suffixes
/// and finally to a uniform choice among first-order out-neighbours.
pub fn predict_next(m: &MultiOrderModel, context: &[NodeId]) -> Result<PredictionResult> {
    let labels = m.labels();
    let &last = context
        .last()
        .ok_or_else(|| Error::Parameter("prediction context is empty".into()))?;
    if last.index() >= labels.len() {
        return Err(Error::UnknownNode(last.to_string()));
    }
    let top_order = context.len().min(m.max_order());
    for k in (1..=top_order).rev() {
        let suffix = &context[context.len() - k..];
        let layer = m.layer(k);
        if let Some(v) = layer.find(suffix) {
            if layer.out_degree(v) > 0 {
                let distribution = layer.distribution(suffix).expect("context exists");
                return Ok(finish(labels, context, distribution, k));
            }
        }
    }
    let fallback = m
        .layer(1)
        .first_order()
        .and_then(|g| g.node(labels.name(last)))
        .and_then(|v| {
            let g = m.layer(1).first_order()?;
            let succ = g.successors(v);
            (!succ.is_empty()).then(|| {
                let p = 1.0 / succ.len() as f64;
                succ.iter()
                    .map(|&w| (labels.get(g.labels().name(w)).expect("shared labels"), p))
                    .collect::<Vec<_>>()
            })
        });
    match fallback {
        Some(d) => Ok(finish(labels, context, d, 0)),
        None => Err(Error::DeadEnd(labels.name(last).to_string())),
    }
}

fn finish(labels: &Labels, context: &[NodeId], distribution: Vec<(NodeId, f64)>, k: usize) -> PredictionResult {
    let top = distribution
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| labels.name(b.0).cmp(labels.name(a.0))))
        .expect("distribution is non-empty")
        .0;
    PredictionResult {
        context: context.to_vec(),
        distribution,
        top,
        used_order: k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionScore {
    /// Mean of `-ln P(true next | context)` in nats, with probabilities floored.
    pub cross_entropy: f64,
    pub accuracy: f64,
    pub samples: u64,
    /// Samples whose context could not be scored at all (unknown node or dead end).
    pub failures: u64,
}

/// Scores `(context, true next)` samples.
pub fn evaluate_prediction(m: &MultiOrderModel, samples: &[(Vec<NodeId>, NodeId)]) -> Result<PredictionScore> {
    let weighted: Vec<(&[NodeId], NodeId, u64)> = samples.iter().map(|(c, t)| (&c[..], *t, 1)).collect();
    evaluate_prediction_weighted(m, &weighted)
}

/// Scores `(context, true next, weight)` samples; a weight counts as that many repeats.
pub fn evaluate_prediction_weighted(
    m: &MultiOrderModel,
    samples: &[(&[NodeId], NodeId, u64)],
) -> Result<PredictionScore> {
    let n: u64 = samples.iter().map(|s| s.2).sum();
    if n == 0 {
        return Err(Error::InsufficientData("no prediction samples".into()));
    }
    let mut loss = 0.0;
    let mut hits = 0u64;
    let mut failures = 0u64;
    for &(ctx, truth, w) in samples {
        match predict_next(m, ctx) {
            Ok(r) => {
                loss -= r.probability(truth).max(PROBABILITY_FLOOR).ln() * w as f64;
                if r.top == truth {
                    hits += w;
                }
            }
            Err(Error::UnknownNode(_) | Error::DeadEnd(_)) => {
                loss -= PROBABILITY_FLOOR.ln() * w as f64;
                failures += w;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(PredictionScore {
        cross_entropy: loss / n as f64,
        accuracy: hits as f64 / n as f64,
        samples: n,
        failures,
    })
}
