//! Order sweep: centralities and prediction for k = 1..K on one shared split.
//!
//! Models are trained on the training half. Ground truth frequencies and
//! prediction samples come from the held-out half, so every order is scored
//! against the same data.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytics::{
    evaluate_prediction_weighted, ground_truth_frequencies, ho_betweenness, ho_pagerank, project_pagerank,
    BetweennessOptions, GroundTruthMode, PageRankOptions, ScoreVector,
};
use crate::error::{Error, Result};
use crate::graph::FirstOrderGraph;
use crate::hon::HigherOrderModel;
use crate::labels::NodeId;
use crate::metrics::{compare, DEFAULT_SMOOTHING};
use crate::multi_order::MultiOrderModel;
use crate::trajectory::PathCorpus;

/// Edge probabilities: empirical frequencies, or uniform over observed successors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Attributed,
    NonAttributed,
}

impl Variant {
    pub fn is_attributed(self) -> bool {
        self == Variant::Attributed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Attributed => "attributed",
            Variant::NonAttributed => "non_attributed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub max_order: usize,
    pub split_ratio: f64,
    pub seed: u64,
    pub betweenness: BetweennessOptions,
    pub pagerank: PageRankOptions,
    pub smoothing: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            max_order: 5,
            split_ratio: 0.5,
            seed: 0,
            betweenness: BetweennessOptions::default(),
            pagerank: PageRankOptions::default(),
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

/// One `k,variant,metric,value` result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub variant: Variant,
    pub metric: &'static str,
    pub value: f64,
}

/// Centrality vectors of one order and variant.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderScores {
    pub k: usize,
    pub variant: Variant,
    pub betweenness: ScoreVector,
    pub pagerank: ScoreVector,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub scores: Vec<OrderScores>,
    pub traversal: ScoreVector,
    pub visitation: ScoreVector,
    /// Highest order evaluated (may be below the requested maximum).
    pub max_order: usize,
    pub train_paths: u64,
    pub test_paths: u64,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn value(&self, k: usize, variant: Variant, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.k == k && r.variant == variant && r.metric == metric)
            .map(|r| r.value)
    }

    /// `k,variant,metric,value` CSV.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "variant", "metric", "value"])?;
        for r in &self.rows {
            w.write_record([&r.k.to_string(), r.variant.as_str(), r.metric, &r.value.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-node ground truth and scores of one order and variant:
    /// `node,traversal,betweenness,visitation,pagerank`, in label order.
    pub fn write_scores_csv(&self, k: usize, variant: Variant, out: impl Write) -> Result<()> {
        let s = self
            .scores
            .iter()
            .find(|s| s.k == k && s.variant == variant)
            .ok_or_else(|| Error::Parameter(format!("no scores for k={k} {}", variant.as_str())))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "traversal", "betweenness", "visitation", "pagerank"])?;
        for (label, t) in self.traversal.iter() {
            let get = |v: &ScoreVector| v.get(label).unwrap_or(0.0).to_string();
            w.write_record([
                label,
                &t.to_string(),
                &get(&s.betweenness),
                &get(&self.visitation),
                &get(&s.pagerank),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the sweep for k = 1..=max_order. `graph`, when given, backs
/// prediction for contexts the training half never saw.
pub fn evaluate_sweep(corpus: &PathCorpus, graph: Option<&FirstOrderGraph>, cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.max_order == 0 {
        return Err(Error::Parameter("maximum order must be at least 1".into()));
    }
    cfg.pagerank.validate()?;
    let (train, test) = corpus.train_test_split(cfg.split_ratio, cfg.seed)?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientData(format!(
            "split left {} training and {} test paths",
            train.total_paths(),
            test.total_paths()
        )));
    }
    let traversal = ground_truth_frequencies(&test, GroundTruthMode::Traversal)?;
    let visitation = ground_truth_frequencies(&test, GroundTruthMode::Visitation)?;

    let mut multi = MultiOrderModel::build(&train, cfg.max_order)?;
    if let Some(g) = graph {
        multi = multi.with_first_order(g)?;
    }
    let top = multi.max_order();
    let mut warnings = multi.warnings().to_vec();
    let samples = prediction_samples(&test, top);

    let mut rows = Vec::new();
    let mut scores = Vec::new();
    for k in 1..=top {
        for variant in [Variant::Attributed, Variant::NonAttributed] {
            let m = HigherOrderModel::from_paths(&train, k, variant.is_attributed())?;
            let btw = ho_betweenness(&m, cfg.betweenness)?;
            let pr = ho_pagerank(&m, cfg.pagerank)?;
            let pr = project_pagerank(&m, &pr.scores);
            let cb = compare(&traversal, &btw, cfg.smoothing)?;
            let cp = compare(&visitation, &pr, cfg.smoothing)?;
            for (metric, value) in [
                ("betweenness_kl", cb.kl),
                ("betweenness_tau", cb.tau),
                ("pagerank_kl", cp.kl),
                ("pagerank_tau", cp.tau),
            ] {
                rows.push(SweepRow {
                    k,
                    variant,
                    metric,
                    value,
                });
            }
            scores.push(OrderScores {
                k,
                variant,
                betweenness: btw,
                pagerank: pr,
            });
        }
        let view: Vec<(&[NodeId], NodeId, u64)> = samples.iter().map(|((c, t), &w)| (&c[..], *t, w)).collect();
        let ps = evaluate_prediction_weighted(&multi.truncated(k), &view)?;
        if ps.failures > 0 {
            warnings.push(format!("k={k}: {} prediction samples could not be scored", ps.failures));
        }
        for (metric, value) in [
            ("prediction_cross_entropy", ps.cross_entropy),
            ("prediction_accuracy", ps.accuracy),
        ] {
            rows.push(SweepRow {
                k,
                variant: Variant::Attributed,
                metric,
                value,
            });
        }
    }
    Ok(SweepResult {
        rows,
        scores,
        traversal,
        visitation,
        max_order: top,
        train_paths: train.total_paths(),
        test_paths: test.total_paths(),
        warnings,
    })
}

/// Every transition of the corpus as (up to `max_context` preceding nodes,
/// next node) with its multiplicity.
pub fn prediction_samples(corpus: &PathCorpus, max_context: usize) -> BTreeMap<(Vec<NodeId>, NodeId), u64> {
    let mut out = BTreeMap::new();
    for p in corpus.paths() {
        for i in 1..p.nodes.len() {
            let ctx = p.nodes[i.saturating_sub(max_context)..i].to_vec();
            *out.entry((ctx, p.nodes[i])).or_insert(0) += p.multiplicity;
        }
    }
    out
}
