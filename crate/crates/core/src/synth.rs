//! Synthetic trajectories from a planted fixed-order chain.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeRow, FirstOrderGraph};
use crate::hon::DEFAULT_NODE_CAP;
use crate::labels::NodeId;
use crate::trajectory::{Path, PathCorpus};

/// A `k`-th order chain on a first-order graph.
#[derive(Debug, Clone)]
pub struct PlantedModel {
    graph: FirstOrderGraph,
    order: usize,
    /// Feasible contexts in lexicographic order; absorbing ones map to an empty row.
    contexts: Vec<Vec<NodeId>>,
    rows: Vec<Vec<(NodeId, f64)>>,
    index: HashMap<Vec<NodeId>, usize>,
    start: Vec<NodeId>,
    seed: u64,
}

impl PlantedModel {
    pub fn graph(&self) -> &FirstOrderGraph {
        &self.graph
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn contexts(&self) -> &[Vec<NodeId>] {
        &self.contexts
    }

    /// Successor distribution of a context; empty for absorbing contexts.
    pub fn transition(&self, context: &[NodeId]) -> Option<&[(NodeId, f64)]> {
        self.index.get(context).map(|&i| &self.rows[i][..])
    }

    pub fn is_absorbing(&self, context: &[NodeId]) -> bool {
        self.transition(context).is_some_and(|r| r.is_empty())
    }

    /// Start nodes, drawn uniformly: every node with an out-edge.
    pub fn start_nodes(&self) -> &[NodeId] {
        &self.start
    }
}

/// Draws a successor distribution for every walk of `k` nodes in `g`.
///
/// Each row is Dirichlet with concentration `skew` on every out-neighbour;
/// small values give nearly deterministic rows, `f64::INFINITY` gives
/// uniform rows.
pub fn random_planted_model(g: &FirstOrderGraph, k: usize, skew: f64, seed: u64) -> Result<PlantedModel> {
    if k == 0 {
        return Err(Error::Parameter("planted order must be at least 1".into()));
    }
    if skew.is_nan() || skew <= 0.0 {
        return Err(Error::Parameter(format!("skew {skew} must be positive")));
    }
    if !g.is_strongly_connected() {
        log::warn!("planted graph is not strongly connected; some contexts may be absorbing");
    }
    let contexts = walks(g, k)?;
    let gamma = if skew.is_finite() {
        Some(Gamma::new(skew, 1.0).map_err(|e| Error::Parameter(format!("skew {skew}: {e}")))?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<(NodeId, f64)>> = contexts
        .iter()
        .map(|ctx| {
            let succ = g.successors(*ctx.last().unwrap());
            let mut w: Vec<f64> = match &gamma {
                Some(d) => succ.iter().map(|_| d.sample(&mut rng)).collect(),
                None => vec![1.0; succ.len()],
            };
            let total: f64 = w.iter().sum();
            if total > 0.0 {
                w.iter_mut().for_each(|x| *x /= total);
            } else {
                w.iter_mut().for_each(|x| *x = 1.0 / succ.len() as f64);
            }
            succ.iter().copied().zip(w).collect()
        })
        .collect();
    let index = contexts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let start = g.labels().ids().filter(|&v| g.out_degree(v) > 0).collect();
    Ok(PlantedModel {
        graph: g.clone(),
        order: k,
        contexts,
        rows,
        index,
        start,
        seed,
    })
}

impl PlantedModel {
    /// A planted chain with the given rows; every other feasible context is
    /// uniform over its out-neighbours.
    pub fn from_rows(
        g: &FirstOrderGraph,
        k: usize,
        rows: impl IntoIterator<Item = (Vec<NodeId>, Vec<(NodeId, f64)>)>,
        seed: u64,
    ) -> Result<Self> {
        let mut pm = random_planted_model(g, k, f64::INFINITY, seed)?;
        for (ctx, row) in rows {
            let i = *pm.index.get(&ctx).ok_or_else(|| {
                Error::Validation(format!(
                    "context {} is not a walk of {k} nodes",
                    g.labels().join(&ctx, ",")
                ))
            })?;
            let from = *ctx.last().unwrap();
            if row
                .iter()
                .any(|&(v, p)| !g.has_edge(from, v) || !(0.0..=1.0).contains(&p))
            {
                return Err(Error::Validation(format!(
                    "row for {} leaves the graph or has a probability outside [0, 1]",
                    g.labels().join(&ctx, ",")
                )));
            }
            let total: f64 = row.iter().map(|x| x.1).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "row for {} sums to {total}",
                    g.labels().join(&ctx, ",")
                )));
            }
            let mut row = row;
            row.sort_by_key(|x| x.0);
            pm.rows[i] = row;
        }
        Ok(pm)
    }
}

fn walks(g: &FirstOrderGraph, k: usize) -> Result<Vec<Vec<NodeId>>> {
    let mut out: Vec<Vec<NodeId>> = g.labels().ids().map(|v| vec![v]).collect();
    for _ in 1..k {
        let mut next = Vec::new();
        for w in &out {
            let mut succ = g.successors(*w.last().unwrap()).to_vec();
            succ.sort_unstable();
            for s in succ {
                let mut e = w.clone();
                e.push(s);
                next.push(e);
            }
            if next.len() > DEFAULT_NODE_CAP {
                return Err(Error::SizeCap {
                    order: k,
                    cap: DEFAULT_NODE_CAP,
                });
            }
        }
        out = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenerationStats {
    pub paths: usize,
    /// Paths that stopped before their drawn length at an absorbing context or sink.
    pub truncated: usize,
    pub transitions: u64,
}

/// Generates `n_paths` trajectories with lengths uniform in `lengths` (nodes, inclusive).
///
/// A path starts uniformly among nodes with out-edges, takes `k - 1`
/// uniform steps until a full context exists, then follows the planted
/// table. Path `i` draws from stream `i` of a generator keyed by `seed`, so
/// the corpus does not depend on the thread count.
pub fn generate_corpus(
    pm: &PlantedModel,
    n_paths: usize,
    lengths: (usize, usize),
    seed: u64,
) -> Result<(PathCorpus, GenerationStats)> {
    let (min, max) = lengths;
    if n_paths == 0 {
        return Err(Error::Parameter("n_paths must be at least 1".into()));
    }
    if min < pm.order + 1 || min > max {
        return Err(Error::Parameter(format!(
            "length range [{min}, {max}] must satisfy {} <= min <= max",
            pm.order + 1
        )));
    }
    if pm.start.is_empty() {
        return Err(Error::InsufficientData("no node has an out-edge".into()));
    }
    let samplers: Vec<Option<WeightedIndex<f64>>> = pm
        .rows
        .iter()
        .map(|r| (!r.is_empty()).then(|| WeightedIndex::new(r.iter().map(|x| x.1)).expect("row sums to 1")))
        .collect();
    let k = pm.order;
    let paths: Vec<(Vec<NodeId>, bool)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let len = rng.random_range(min..=max);
            let mut nodes = Vec::with_capacity(len);
            nodes.push(*pm.start.choose(&mut rng).expect("non-empty"));
            while nodes.len() < len {
                let next = if nodes.len() < k {
                    pm.graph.successors(*nodes.last().unwrap()).choose(&mut rng).copied()
                } else {
                    let ctx = &nodes[nodes.len() - k..];
                    let i = pm.index[ctx];
                    samplers[i].as_ref().map(|s| pm.rows[i][s.sample(&mut rng)].0)
                };
                match next {
                    Some(v) => nodes.push(v),
                    None => return (nodes, true),
                }
            }
            (nodes, false)
        })
        .collect();
    let stats = GenerationStats {
        paths: n_paths,
        truncated: paths.iter().filter(|p| p.1).count(),
        transitions: paths.iter().map(|p| p.0.len() as u64 - 1).sum(),
    };
    let corpus = PathCorpus::new(
        pm.graph.labels().clone(),
        paths.into_iter().map(|(n, _)| Path::new(n, 1)).collect(),
    );
    Ok((corpus, stats))
}

/// A strongly connected digraph on `n` nodes labelled `0..n`: a ring
/// `i → i+1` plus `out_degree - 1` random chords per node, without self-loops.
pub fn ring_with_chords(n: usize, out_degree: usize, seed: u64) -> Result<FirstOrderGraph> {
    if n < 2 || out_degree == 0 || out_degree >= n {
        return Err(Error::Parameter(format!(
            "need n >= 2 and 1 <= out_degree < n (got n={n}, out_degree={out_degree})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n * out_degree);
    for i in 0..n {
        let ring = (i + 1) % n;
        let others: Vec<usize> = (0..n).filter(|&j| j != i && j != ring).collect();
        rows.push(EdgeRow::new(i.to_string(), ring.to_string()));
        for &j in others.choose_multiple(&mut rng, out_degree - 1) {
            rows.push(EdgeRow::new(i.to_string(), j.to_string()));
        }
    }
    let labels = crate::labels::Labels::from_names((0..n).map(|i| i.to_string()));
    FirstOrderGraph::build_with_labels(labels, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle() -> FirstOrderGraph {
        FirstOrderGraph::build(&[EdgeRow::new("a", "b"), EdgeRow::new("b", "c"), EdgeRow::new("c", "a")]).unwrap()
    }

    #[test]
    fn forced_cycle_rows() {
        let pm = random_planted_model(&cycle(), 1, 0.3, 1).unwrap();
        assert_eq!(pm.contexts().len(), 3);
        for c in pm.contexts() {
            let row = pm.transition(c).unwrap();
            assert_eq!(row.len(), 1);
            assert_eq!(row[0].1, 1.0);
        }
    }

    #[test]
    fn forced_walks_are_rotations() {
        let g = cycle();
        let pm = random_planted_model(&g, 2, 0.3, 1).unwrap();
        let (c, stats) = generate_corpus(&pm, 50, (3, 9), 4).unwrap();
        assert_eq!(stats.truncated, 0);
        for p in c.paths() {
            for w in p.nodes.windows(2) {
                assert!(g.has_edge(w[0], w[1]));
            }
        }
    }

    #[test]
    fn infinite_skew_is_uniform() {
        let g = ring_with_chords(8, 3, 2).unwrap();
        let pm = random_planted_model(&g, 2, f64::INFINITY, 0).unwrap();
        for c in pm.contexts() {
            for &(_, p) in pm.transition(c).unwrap() {
                assert!((p - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rows_sum_to_one_and_respect_edges() {
        let g = ring_with_chords(12, 3, 5).unwrap();
        assert!(g.is_strongly_connected());
        assert_eq!(g.edge_count(), 36);
        let pm = random_planted_model(&g, 3, 0.3, 9).unwrap();
        assert_eq!(pm.contexts().len(), 12 * 9);
        for c in pm.contexts() {
            let row = pm.transition(c).unwrap();
            assert!((row.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
            for &(v, _) in row {
                assert!(g.has_edge(*c.last().unwrap(), v));
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let g = ring_with_chords(10, 3, 1).unwrap();
        let a = random_planted_model(&g, 2, 0.5, 3).unwrap();
        let b = random_planted_model(&g, 2, 0.5, 3).unwrap();
        assert_eq!(a.rows, b.rows);
        let (ca, _) = generate_corpus(&a, 200, (3, 12), 8).unwrap();
        let (cb, _) = generate_corpus(&b, 200, (3, 12), 8).unwrap();
        assert_eq!(ca.paths(), cb.paths());
        let (cc, _) = generate_corpus(&a, 200, (3, 12), 9).unwrap();
        assert_ne!(ca.paths(), cc.paths());
    }

    #[test]
    fn absorbing_context_truncates() {
        let g = FirstOrderGraph::build(&[EdgeRow::new("a", "b")]).unwrap();
        let pm = random_planted_model(&g, 1, 1.0, 0).unwrap();
        assert!(pm.is_absorbing(&[g.node("b").unwrap()]));
        let (c, stats) = generate_corpus(&pm, 5, (2, 4), 0).unwrap();
        assert_eq!(c.total_paths(), 5);
        assert!(stats.truncated > 0);
    }

    #[test]
    fn explicit_rows_override_uniform() {
        let g = FirstOrderGraph::build(&[
            EdgeRow::new("a", "b"),
            EdgeRow::new("b", "c"),
            EdgeRow::new("b", "d"),
            EdgeRow::new("c", "a"),
            EdgeRow::new("d", "a"),
        ])
        .unwrap();
        let id = |s: &str| g.node(s).unwrap();
        let row = vec![(id("c"), 0.7), (id("d"), 0.3)];
        let pm = PlantedModel::from_rows(&g, 2, [(vec![id("a"), id("b")], row.clone())], 0).unwrap();
        assert_eq!(pm.transition(&[id("a"), id("b")]).unwrap(), &row[..]);
        assert_eq!(pm.transition(&[id("c"), id("a")]).unwrap(), &[(id("b"), 1.0)][..]);
        let bad = vec![(id("c"), 0.7), (id("a"), 0.3)];
        assert!(PlantedModel::from_rows(&g, 2, [(vec![id("a"), id("b")], bad)], 0).is_err());
    }

    #[test]
    fn parameter_checks() {
        let g = cycle();
        assert!(random_planted_model(&g, 0, 1.0, 0).is_err());
        assert!(random_planted_model(&g, 1, 0.0, 0).is_err());
        let pm = random_planted_model(&g, 2, 1.0, 0).unwrap();
        assert!(generate_corpus(&pm, 1, (2, 5), 0).is_err());
        assert!(generate_corpus(&pm, 0, (3, 5), 0).is_err());
        assert!(ring_with_chords(5, 5, 0).is_err());
    }
}
