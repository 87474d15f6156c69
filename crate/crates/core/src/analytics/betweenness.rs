//! Betweenness of first-order nodes along higher-order shortest paths.
//!
//! A higher-order shortest path `h0 → h1 → … → hm` expands to the
//! first-order sequence `tuple(h0), last(h1), …, last(hm)`. Each pair adds
//! `1/σ` to every occurrence on each of its `σ` shortest paths; the first
//! and last positions of the expansion are the pair's origin and
//! destination.
//!
//! Per source the DAG is swept backwards with
//! `B(w) = c(w) + Σ_{w→x} B(x)`, where `c(w) = 1/σ_w` if `w` is a counted
//! destination and 0 otherwise. `σ_w · (B(w) - c(w))` is then the total
//! weight of paths that pass through `w` and continue.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScoreVector;
use crate::error::Result;
use crate::graph::FirstOrderGraph;
use crate::hon::{HigherOrderModel, WeightMode};
use crate::labels::{Labels, NodeId};
use crate::paths::{costs_tie, shortest_paths, CostMode, Csr, ShortestPathSummary};

const SOURCES_PER_TASK: usize = 32;

/// Whether the origin and destination occurrences of each pair are credited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointPolicy {
    #[default]
    Exclude,
    Include,
}

/// Which node pairs the shortest paths run between.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSemantics {
    /// Every ordered pair of distinct higher-order nodes.
    #[default]
    HoPairs,
    /// Every ordered pair `(s, t)` of distinct first-order nodes: paths
    /// start at any higher-order node whose first element is `s` and end at
    /// the cheapest higher-order nodes whose last element is `t`.
    FirstOrderPairs,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetweennessOptions {
    pub weight_mode: WeightMode,
    pub endpoints: EndpointPolicy,
    pub pairs: PairSemantics,
}

struct View<'a> {
    csr: Csr,
    mode: CostMode,
    order: usize,
    tuples: Cow<'a, [NodeId]>,
    first_order_nodes: usize,
}

impl View<'_> {
    fn tuple(&self, v: u32) -> &[NodeId] {
        let s = v as usize * self.order;
        &self.tuples[s..s + self.order]
    }

    fn last(&self, v: u32) -> NodeId {
        self.tuples[(v as usize + 1) * self.order - 1]
    }
}

/// Normalized higher-order betweenness over every label of the model.
pub fn ho_betweenness(m: &HigherOrderModel, opts: BetweennessOptions) -> Result<ScoreVector> {
    Ok(ho_betweenness_raw(m, opts)?.normalize())
}

/// Unnormalized higher-order betweenness.
pub fn ho_betweenness_raw(m: &HigherOrderModel, opts: BetweennessOptions) -> Result<ScoreVector> {
    let mode = match opts.weight_mode {
        WeightMode::Unit => CostMode::Unit,
        WeightMode::NegLogProb => CostMode::Weighted,
    };
    let view = View {
        csr: m.to_csr(opts.weight_mode)?,
        mode,
        order: m.order(),
        tuples: Cow::Borrowed(m.tuples()),
        first_order_nodes: m.labels().len(),
    };
    let raw = accumulate(&view, opts.endpoints, opts.pairs)?;
    Ok(to_scores(m.labels(), raw))
}

/// Unnormalized directed betweenness of a first-order graph, using its edge
/// weights as costs under [`CostMode::Weighted`].
pub fn first_order_betweenness(g: &FirstOrderGraph, mode: CostMode) -> Result<ScoreVector> {
    let n = g.node_count();
    let view = View {
        csr: g.to_csr(mode),
        mode,
        order: 1,
        tuples: Cow::Owned((0..n as u32).map(NodeId).collect()),
        first_order_nodes: n,
    };
    let raw = accumulate(&view, EndpointPolicy::Exclude, PairSemantics::HoPairs)?;
    Ok(to_scores(g.labels(), raw))
}

fn to_scores(labels: &Labels, raw: Vec<f64>) -> ScoreVector {
    ScoreVector::raw(labels.ids().map(|v| (labels.name(v).to_string(), raw[v.index()])))
}

fn accumulate(view: &View, endpoints: EndpointPolicy, pairs: PairSemantics) -> Result<Vec<f64>> {
    let groups: Vec<Vec<u32>> = match pairs {
        PairSemantics::HoPairs => (0..view.csr.node_count() as u32).map(|v| vec![v]).collect(),
        PairSemantics::FirstOrderPairs => {
            let mut by_first = vec![Vec::new(); view.first_order_nodes];
            for v in 0..view.csr.node_count() as u32 {
                by_first[view.tuple(v)[0].index()].push(v);
            }
            by_first.into_iter().filter(|g| !g.is_empty()).collect()
        }
    };
    let partials = groups
        .par_chunks(SOURCES_PER_TASK)
        .map(|chunk| {
            let mut acc = vec![0.0; view.first_order_nodes];
            for sources in chunk {
                let sp = shortest_paths(&view.csr, sources, view.mode)?;
                let c = match pairs {
                    PairSemantics::HoPairs => ho_pair_terminals(&sp),
                    PairSemantics::FirstOrderPairs => first_order_terminals(view, &sp),
                };
                credit(view, &sp, &c, endpoints, &mut acc);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; view.first_order_nodes];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    Ok(total)
}

// c(w) = 1/σ_w for every reached non-source node.
fn ho_pair_terminals(sp: &ShortestPathSummary) -> Vec<f64> {
    let mut c = vec![0.0; sp.dist.len()];
    for &w in &sp.order {
        if sp.sigma[w as usize] > 0 && !sp.sources.contains(&w) {
            c[w as usize] = 1.0 / sp.sigma[w as usize] as f64;
        }
    }
    c
}

// c(w) = 1/σ_{s,last(w)} for reached nodes at the minimum cost among those
// ending in last(w) ≠ s.
fn first_order_terminals(view: &View, sp: &ShortestPathSummary) -> Vec<f64> {
    let origin = view.tuple(sp.sources[0])[0];
    let mut best = vec![f64::INFINITY; view.first_order_nodes];
    for &w in &sp.order {
        let t = view.last(w).index();
        best[t] = best[t].min(sp.dist[w as usize]);
    }
    let is_terminal = |w: u32| {
        let t = view.last(w);
        t != origin && costs_tie(sp.dist[w as usize], best[t.index()])
    };
    let mut sigma_st = vec![0.0; view.first_order_nodes];
    for &w in &sp.order {
        if is_terminal(w) {
            sigma_st[view.last(w).index()] += sp.sigma[w as usize] as f64;
        }
    }
    let mut c = vec![0.0; sp.dist.len()];
    for &w in &sp.order {
        if is_terminal(w) {
            c[w as usize] = 1.0 / sigma_st[view.last(w).index()];
        }
    }
    c
}

fn credit(view: &View, sp: &ShortestPathSummary, c: &[f64], endpoints: EndpointPolicy, acc: &mut [f64]) {
    let mut b = c.to_vec();
    for &(u, w) in sp.dag.iter().rev() {
        b[u as usize] += b[w as usize];
    }
    let k = view.order;
    for &w in &sp.order {
        let wi = w as usize;
        let sigma = sp.sigma[wi] as f64;
        if sp.sources.contains(&w) {
            let tuple = view.tuple(w);
            if k >= 2 {
                for &v in &tuple[1..k - 1] {
                    acc[v.index()] += b[wi];
                }
                acc[tuple[k - 1].index()] += b[wi] - c[wi];
            }
        } else {
            acc[view.last(w).index()] += sigma * (b[wi] - c[wi]);
        }
        if endpoints == EndpointPolicy::Include && c[wi] > 0.0 {
            // Each terminal carries weight σ_w · c(w) of its pair's unit mass.
            let mass = sigma * c[wi];
            acc[view.last(w).index()] += mass;
            acc[view.tuple(sp.sources[0])[0].index()] += mass;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRow;
    use crate::trajectory::PathCorpus;

    fn graph(edges: &[(&str, &str)]) -> FirstOrderGraph {
        FirstOrderGraph::build(&edges.iter().map(|&(a, b)| EdgeRow::new(a, b)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn directed_line() {
        let g = graph(&[("a", "b"), ("b", "c")]);
        let s = first_order_betweenness(&g, CostMode::Unit).unwrap();
        assert_eq!(s.get("a"), Some(0.0));
        assert_eq!(s.get("b"), Some(1.0));
        assert_eq!(s.get("c"), Some(0.0));
        let n = s.normalize();
        assert_eq!(n.get("b"), Some(1.0));
    }

    #[test]
    fn diamond_splits_credit() {
        let g = graph(&[("a", "b"), ("b", "d"), ("a", "c"), ("c", "d")]);
        let s = first_order_betweenness(&g, CostMode::Unit).unwrap();
        assert_eq!(s.get("b"), Some(0.5));
        assert_eq!(s.get("c"), Some(0.5));
        let n = s.normalize();
        assert_eq!(n.get("b"), Some(0.5));
    }

    #[test]
    fn first_order_model_matches_graph() {
        let c = PathCorpus::from_sequences([(&["a", "b", "d"][..], 1), (&["a", "c", "d"][..], 1)]);
        let m = HigherOrderModel::from_paths(&c, 1, true).unwrap();
        let opts = BetweennessOptions {
            weight_mode: WeightMode::Unit,
            ..Default::default()
        };
        let s = ho_betweenness_raw(&m, opts).unwrap();
        assert_eq!(s.get("b"), Some(0.5));
        assert_eq!(s.get("c"), Some(0.5));
    }

    #[test]
    fn second_order_chain() {
        // Nodes ⟨a,b⟩ → ⟨b,c⟩ → ⟨c,d⟩. Pairs and their interior occurrences:
        // (ab,bc): a b c → b; (bc,cd): b c d → c; (ab,cd): a b c d → b, c.
        let c = PathCorpus::from_sequences([(&["a", "b", "c", "d"][..], 1)]);
        let m = HigherOrderModel::from_paths(&c, 2, true).unwrap();
        let raw = ho_betweenness_raw(&m, BetweennessOptions::default()).unwrap();
        assert_eq!(raw.get("a"), Some(0.0));
        assert_eq!(raw.get("b"), Some(2.0));
        assert_eq!(raw.get("c"), Some(2.0));
        assert_eq!(raw.get("d"), Some(0.0));
        let inc = ho_betweenness_raw(
            &m,
            BetweennessOptions {
                endpoints: EndpointPolicy::Include,
                ..Default::default()
            },
        )
        .unwrap();
        // Every pair also credits its origin and destination once.
        assert_eq!(inc.get("a"), Some(2.0));
        assert_eq!(inc.get("b"), Some(2.0 + 1.0));
        assert_eq!(inc.get("c"), Some(2.0 + 1.0));
        assert_eq!(inc.get("d"), Some(2.0));
    }

    #[test]
    fn first_order_pairs_on_chain() {
        // Pairs (a,c): a b c; (a,d): a b c d; (b,d): b c d; (b,c) is a single
        // node with no interior; (a,b), (c,d) have none either.
        let c = PathCorpus::from_sequences([(&["a", "b", "c", "d"][..], 1)]);
        let m = HigherOrderModel::from_paths(&c, 2, true).unwrap();
        let raw = ho_betweenness_raw(
            &m,
            BetweennessOptions {
                pairs: PairSemantics::FirstOrderPairs,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(raw.get("b"), Some(2.0));
        assert_eq!(raw.get("c"), Some(2.0));
        assert_eq!(raw.get("a"), Some(0.0));
    }
}
