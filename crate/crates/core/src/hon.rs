//! Fixed-order de Bruijn models.
//!
//! A model of order `k` has one node per k-tuple of first-order nodes and an
//! edge `⟨v1..vk⟩ → ⟨v2..vk+1⟩` per observed (or feasible) `(k+1)`-window.
//! Node ids are assigned in lexicographic tuple order, so the successors of a
//! node are sorted by their last element.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeRow, FirstOrderGraph};
use crate::labels::{Labels, NodeId};
use crate::paths::Csr;
use crate::trajectory::{PathCorpus, SubpathCounts};

/// Default cap on the number of higher-order nodes built from topology.
pub const DEFAULT_NODE_CAP: usize = 10_000_000;

/// Natural-log likelihood. [`LogLikelihood::IMPOSSIBLE`] marks an observation
/// containing a transition of probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogLikelihood(f64);

impl LogLikelihood {
    pub const IMPOSSIBLE: LogLikelihood = LogLikelihood(f64::NEG_INFINITY);
    pub const CERTAIN: LogLikelihood = LogLikelihood(0.0);

    pub fn from_probability(p: f64) -> Self {
        if p > 0.0 {
            LogLikelihood(p.ln())
        } else {
            Self::IMPOSSIBLE
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_impossible(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn scaled(self, times: u64) -> Self {
        if self.is_impossible() {
            self
        } else {
            LogLikelihood(self.0 * times as f64)
        }
    }
}

impl Add for LogLikelihood {
    type Output = LogLikelihood;
    fn add(self, rhs: Self) -> Self {
        LogLikelihood(self.0 + rhs.0)
    }
}

impl AddAssign for LogLikelihood {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for LogLikelihood {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::CERTAIN, Add::add)
    }
}

/// Cost assigned to higher-order edges for shortest-path analytics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// `-ln P(next | context)`: frequent transitions are cheap.
    #[default]
    NegLogProb,
    /// Hop count.
    Unit,
}

/// Borrowed view of one higher-order edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoEdge {
    pub from: u32,
    pub to: u32,
    pub count: u64,
    pub prob: f64,
}

#[derive(Debug, Clone)]
pub struct HigherOrderModel {
    order: usize,
    labels: Labels,
    tuples: Vec<NodeId>,
    index: HashMap<Vec<NodeId>, u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    counts: Vec<u64>,
    probs: Vec<f64>,
    attributed: bool,
    first_order: Option<FirstOrderGraph>,
}

impl HigherOrderModel {
    /// Builds the order-`k` model from the sliding windows of a corpus.
    ///
    /// Attributed models carry maximum-likelihood transition probabilities;
    /// non-attributed ones are uniform over the observed successors.
    pub fn from_paths(corpus: &PathCorpus, order: usize, attributed: bool) -> Result<Self> {
        if order == 0 {
            return Err(Error::Parameter("model order must be at least 1".into()));
        }
        let counts = corpus.subpath_counts(order);
        if counts.counts.is_empty() {
            return Err(Error::EmptyModel {
                order,
                window: order + 1,
                max_len: corpus.max_len(),
            });
        }
        Ok(Self::from_counts(corpus.labels().clone(), &counts, attributed))
    }

    /// Builds a model from pre-computed window counts.
    pub fn from_counts(labels: Labels, counts: &SubpathCounts, attributed: bool) -> Self {
        let k = counts.order;
        let mut windows: Vec<(&Vec<NodeId>, u64)> = counts.counts.iter().map(|(w, &c)| (w, c)).collect();
        windows.sort_unstable();

        let mut node_set: BTreeSet<&[NodeId]> = BTreeSet::new();
        for (w, _) in &windows {
            node_set.insert(&w[..k]);
            node_set.insert(&w[1..]);
        }
        let mut tuples = Vec::with_capacity(node_set.len() * k);
        let mut index = HashMap::with_capacity(node_set.len());
        for (i, t) in node_set.into_iter().enumerate() {
            tuples.extend_from_slice(t);
            index.insert(t.to_vec(), i as u32);
        }

        let n = index.len();
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(windows.len());
        let mut edge_counts = Vec::with_capacity(windows.len());
        for (w, c) in &windows {
            offsets[index[&w[..k]] as usize + 1] += 1;
            targets.push(index[&w[1..]]);
            edge_counts.push(*c);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let probs = row_probabilities(&offsets, &edge_counts, attributed);
        HigherOrderModel {
            order: k,
            labels,
            tuples,
            index,
            offsets,
            targets,
            counts: edge_counts,
            probs,
            attributed,
            first_order: None,
        }
    }

    /// Builds the order-`k` de Bruijn graph of all walks of `g`, with uniform
    /// transition probabilities. Fails once more than `cap` nodes would be needed.
    pub fn from_topology(g: &FirstOrderGraph, order: usize, cap: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Parameter("model order must be at least 1".into()));
        }
        // Walks with `order` nodes, generated in lexicographic order.
        let mut walks: Vec<Vec<NodeId>> = g.labels().ids().map(|v| vec![v]).collect();
        if walks.len() > cap {
            return Err(Error::SizeCap { order, cap });
        }
        for _ in 1..order {
            let mut next = Vec::new();
            for w in &walks {
                let last = *w.last().unwrap();
                for &s in g.successors(last) {
                    if next.len() >= cap {
                        return Err(Error::SizeCap { order, cap });
                    }
                    let mut x = w.clone();
                    x.push(s);
                    next.push(x);
                }
            }
            walks = next;
        }
        let k = order;
        let n = walks.len();
        let mut tuples = Vec::with_capacity(n * k);
        let mut index = HashMap::with_capacity(n);
        for (i, w) in walks.iter().enumerate() {
            tuples.extend_from_slice(w);
            index.insert(w.clone(), i as u32);
        }
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::new();
        for (i, w) in walks.iter().enumerate() {
            let last = *w.last().unwrap();
            let mut shifted = w[1..].to_vec();
            shifted.push(last);
            for &s in g.successors(last) {
                *shifted.last_mut().unwrap() = s;
                targets.push(index[&shifted]);
            }
            offsets[i + 1] = targets.len();
        }
        let counts = vec![0u64; targets.len()];
        let probs = row_probabilities(&offsets, &counts, false);
        Ok(HigherOrderModel {
            order: k,
            labels: g.labels().clone(),
            tuples,
            index,
            offsets,
            targets,
            counts,
            probs,
            attributed: false,
            first_order: Some(g.clone()),
        })
    }

    /// Attaches a first-order topology; unseen labels are added to the model's table.
    pub fn with_first_order(mut self, g: &FirstOrderGraph) -> Result<Self> {
        let rows: Vec<EdgeRow> = g
            .edges()
            .map(|(s, t, w)| EdgeRow {
                source: g.labels().name(s).to_string(),
                target: g.labels().name(t).to_string(),
                weight: g.is_weighted().then_some(w),
            })
            .collect();
        let remapped = FirstOrderGraph::build_with_labels(self.labels.clone(), &rows)?;
        self.labels = remapped.labels().clone();
        self.first_order = Some(remapped);
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn is_attributed(&self) -> bool {
        self.attributed
    }

    pub fn first_order(&self) -> Option<&FirstOrderGraph> {
        self.first_order.as_ref()
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn tuple(&self, node: u32) -> &[NodeId] {
        let s = node as usize * self.order;
        &self.tuples[s..s + self.order]
    }

    /// All node tuples back to back; node `i` occupies `i*k..(i+1)*k`.
    pub fn tuples(&self) -> &[NodeId] {
        &self.tuples
    }

    pub fn last(&self, node: u32) -> NodeId {
        self.tuples[(node as usize + 1) * self.order - 1]
    }

    pub fn first(&self, node: u32) -> NodeId {
        self.tuples[node as usize * self.order]
    }

    pub fn find(&self, tuple: &[NodeId]) -> Option<u32> {
        self.index.get(tuple).copied()
    }

    pub fn out_degree(&self, node: u32) -> usize {
        self.offsets[node as usize + 1] - self.offsets[node as usize]
    }

    pub fn out_edges(&self, node: u32) -> impl Iterator<Item = HoEdge> + '_ {
        (self.offsets[node as usize]..self.offsets[node as usize + 1]).map(move |e| HoEdge {
            from: node,
            to: self.targets[e],
            count: self.counts[e],
            prob: self.probs[e],
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = HoEdge> + '_ {
        (0..self.node_count() as u32).flat_map(move |v| self.out_edges(v))
    }

    /// Total observations leaving `node`.
    pub fn context_total(&self, node: u32) -> u64 {
        self.counts[self.offsets[node as usize]..self.offsets[node as usize + 1]]
            .iter()
            .sum()
    }

    /// `P(next | context)`; `None` when the context is not a model node.
    pub fn transition_prob(&self, context: &[NodeId], next: NodeId) -> Option<f64> {
        let from = self.find(context)?;
        let range = self.offsets[from as usize]..self.offsets[from as usize + 1];
        let succ = &self.targets[range.clone()];
        match succ.binary_search_by(|&t| self.last(t).cmp(&next)) {
            Ok(i) => Some(self.probs[range.start + i]),
            Err(_) => Some(0.0),
        }
    }

    /// Successor distribution of a context as `(next node, probability)`.
    pub fn distribution(&self, context: &[NodeId]) -> Option<Vec<(NodeId, f64)>> {
        let from = self.find(context)?;
        Some(self.out_edges(from).map(|e| (self.last(e.to), e.prob)).collect())
    }

    /// Log-likelihood of one path under this fixed-order chain, conditional
    /// on its first `k` nodes.
    pub fn path_likelihood(&self, nodes: &[NodeId]) -> Result<LogLikelihood> {
        if nodes.len() <= self.order {
            return Err(Error::PathTooShort {
                len: nodes.len(),
                order: self.order,
            });
        }
        let mut ll = LogLikelihood::CERTAIN;
        for w in nodes.windows(self.order + 1) {
            let p = self.transition_prob(&w[..self.order], w[self.order]).unwrap_or(0.0);
            if p <= 0.0 {
                return Ok(LogLikelihood::IMPOSSIBLE);
            }
            ll += LogLikelihood(p.ln());
        }
        Ok(ll)
    }

    /// Σ multiplicity · path log-likelihood, skipping paths with no window.
    pub fn corpus_likelihood(&self, corpus: &PathCorpus) -> LogLikelihood {
        let mut total = LogLikelihood::CERTAIN;
        for p in corpus.paths() {
            if p.len() <= self.order {
                continue;
            }
            let ll = self.path_likelihood(&p.nodes).expect("length checked above");
            total += ll.scaled(p.multiplicity);
            if total.is_impossible() {
                break;
            }
        }
        total
    }

    /// Edge costs for shortest-path analytics.
    pub fn to_csr(&self, mode: WeightMode) -> Result<Csr> {
        let costs = match mode {
            WeightMode::Unit => vec![1.0; self.probs.len()],
            WeightMode::NegLogProb => self
                .probs
                .iter()
                .enumerate()
                .map(|(e, &p)| {
                    if p > 0.0 {
                        Ok(-p.ln())
                    } else {
                        Err(Error::Validation(format!(
                            "higher-order edge {e} has probability {p}; -ln weight undefined"
                        )))
                    }
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Csr::from_parts(self.offsets.clone(), self.targets.clone(), costs))
    }

    /// Edges as `(from tuple, to tuple, count, prob)` CSV.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["from_tuple", "to_tuple", "count", "prob"])?;
        for e in self.edges() {
            wtr.write_record([
                self.labels.join(self.tuple(e.from), ","),
                self.labels.join(self.tuple(e.to), ","),
                e.count.to_string(),
                e.prob.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            order: self.order,
            attributed: self.attributed,
            labels: self.labels.names().to_vec(),
            nodes: (0..self.node_count() as u32)
                .map(|v| self.tuple(v).iter().map(|x| x.0).collect())
                .collect(),
            edges: self.edges().map(|e| (e.from, e.to, e.count, e.prob)).collect(),
            first_order_edges: self
                .first_order
                .as_ref()
                .map(|g| g.edges().map(|(s, t, w)| (s.0, t.0, w)).collect()),
            first_order_weighted: self.first_order.as_ref().map(|g| g.is_weighted()),
        }
    }

    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer(out, &self.to_file())?;
        Ok(())
    }

    pub fn read_json(input: impl std::io::Read) -> Result<Self> {
        let file: ModelFile = serde_json::from_reader(input)?;
        Self::from_file(file)
    }

    pub fn from_file(f: ModelFile) -> Result<Self> {
        let bad = |m: String| Error::Model(m);
        if f.format != MODEL_FORMAT || f.version != MODEL_VERSION {
            return Err(bad(format!(
                "unsupported container {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                f.format, f.version
            )));
        }
        let k = f.order;
        if k == 0 {
            return Err(bad("order 0".into()));
        }
        let labels = Labels::from_names(f.labels.iter().cloned());
        if labels.len() != f.labels.len() {
            return Err(bad("duplicate labels".into()));
        }
        let mut tuples = Vec::with_capacity(f.nodes.len() * k);
        let mut index = HashMap::new();
        for (i, t) in f.nodes.iter().enumerate() {
            if t.len() != k || t.iter().any(|&x| x as usize >= labels.len()) {
                return Err(bad(format!("node {i} is not a valid {k}-tuple")));
            }
            let t: Vec<NodeId> = t.iter().map(|&x| NodeId(x)).collect();
            if i > 0 && tuples[(i - 1) * k..] >= t[..] {
                return Err(bad("nodes are not in sorted order".into()));
            }
            tuples.extend_from_slice(&t);
            index.insert(t, i as u32);
        }
        let n = f.nodes.len();
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(f.edges.len());
        let mut counts = Vec::with_capacity(f.edges.len());
        let mut probs = Vec::with_capacity(f.edges.len());
        let mut prev: Option<(u32, u32)> = None;
        for &(a, b, c, p) in &f.edges {
            if a as usize >= n || b as usize >= n {
                return Err(bad(format!("edge {a}->{b} out of range")));
            }
            if prev.is_some_and(|x| x >= (a, b)) {
                return Err(bad("edges are not in sorted order".into()));
            }
            prev = Some((a, b));
            let (ta, tb) = (&tuples[a as usize * k..][..k], &tuples[b as usize * k..][..k]);
            if ta[1..] != tb[..k - 1] {
                return Err(bad(format!("edge {a}->{b} violates the de Bruijn overlap")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(bad(format!("edge {a}->{b} has probability {p}")));
            }
            offsets[a as usize + 1] += 1;
            targets.push(b);
            counts.push(c);
            probs.push(p);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut model = HigherOrderModel {
            order: k,
            labels,
            tuples,
            index,
            offsets,
            targets,
            counts,
            probs,
            attributed: f.attributed,
            first_order: None,
        };
        if let Some(edges) = f.first_order_edges {
            let weighted = f.first_order_weighted.unwrap_or(false);
            let rows = edges
                .iter()
                .map(|&(s, t, w)| {
                    let name = |x: u32| {
                        model
                            .labels
                            .names()
                            .get(x as usize)
                            .cloned()
                            .ok_or_else(|| bad(format!("first-order node {x} out of range")))
                    };
                    Ok(EdgeRow {
                        source: name(s)?,
                        target: name(t)?,
                        weight: weighted.then_some(w),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let g = FirstOrderGraph::build_with_labels(model.labels.clone(), &rows)?;
            model.first_order = Some(g);
        }
        Ok(model)
    }
}

fn row_probabilities(offsets: &[usize], counts: &[u64], attributed: bool) -> Vec<f64> {
    let mut probs = vec![0.0; counts.len()];
    for v in 0..offsets.len() - 1 {
        let r = offsets[v]..offsets[v + 1];
        let deg = r.len();
        let total: u64 = counts[r.clone()].iter().sum();
        for e in r {
            probs[e] = if attributed && total > 0 {
                counts[e] as f64 / total as f64
            } else {
                1.0 / deg as f64
            };
        }
    }
    probs
}

pub const MODEL_FORMAT: &str = "hon-model";
pub const MODEL_VERSION: u32 = 1;

/// Serialized form of a [`HigherOrderModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub order: usize,
    pub attributed: bool,
    pub labels: Vec<String>,
    pub nodes: Vec<Vec<u32>>,
    pub edges: Vec<(u32, u32, u64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order_edges: Option<Vec<(u32, u32, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_order_weighted: Option<bool>,
}
