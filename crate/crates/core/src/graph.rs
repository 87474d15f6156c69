//! First-order directed graph with row-stochastic transitions.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::labels::{Labels, NodeId};
use crate::paths::{self, CostMode, Csr, ShortestPathSummary};

/// One row of an edge list before interning.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRow {
    pub source: String,
    pub target: String,
    pub weight: Option<f64>,
}

impl EdgeRow {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        EdgeRow {
            source: source.into(),
            target: target.into(),
            weight: None,
        }
    }

    pub fn weighted(source: impl Into<String>, target: impl Into<String>, weight: f64) -> Self {
        EdgeRow {
            weight: Some(weight),
            ..EdgeRow::new(source, target)
        }
    }
}

/// Immutable directed graph over interned labels.
///
/// Out-edges of each node are sorted by target id. When no row carried a
/// weight the graph is non-attributed and every edge weighs 1.
#[derive(Debug, Clone)]
pub struct FirstOrderGraph {
    labels: Labels,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
    weighted: bool,
}

impl FirstOrderGraph {
    /// Builds a graph from edge rows. Duplicate `(u, v)` rows sum their weights.
    pub fn build(rows: &[EdgeRow]) -> Result<Self> {
        Self::build_with_labels(Labels::new(), rows)
    }

    /// Like [`FirstOrderGraph::build`] but starts from an existing label table,
    /// so node ids agree with another structure (e.g. a corpus).
    pub fn build_with_labels(mut labels: Labels, rows: &[EdgeRow]) -> Result<Self> {
        let weighted = rows.iter().any(|r| r.weight.is_some());
        let mut merged: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            if row.source.is_empty() || row.target.is_empty() {
                return Err(Error::Validation(format!("edge {}: empty node label", i + 1)));
            }
            let w = row.weight.unwrap_or(1.0);
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!(
                    "edge {} ({} -> {}): weight {w} must be finite and non-negative",
                    i + 1,
                    row.source,
                    row.target
                )));
            }
            let s = labels.intern(row.source.as_str());
            let t = labels.intern(row.target.as_str());
            *merged.entry((s, t)).or_insert(0.0) += w;
        }
        for (&(s, t), &w) in &merged {
            if s == t && weighted && w == 0.0 {
                return Err(Error::Validation(format!("zero-cost self-loop on {}", labels.name(s))));
            }
        }
        Ok(Self::from_merged(labels, merged, weighted))
    }

    pub(crate) fn from_merged(labels: Labels, merged: BTreeMap<(NodeId, NodeId), f64>, weighted: bool) -> Self {
        let n = labels.len();
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(merged.len());
        let mut weights = Vec::with_capacity(merged.len());
        for (&(s, t), &w) in &merged {
            offsets[s.index() + 1] += 1;
            targets.push(t);
            weights.push(w);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        FirstOrderGraph {
            labels,
            offsets,
            targets,
            weights,
            weighted,
        }
    }

    /// Reads a tab-separated edge list: `source<TAB>target[<TAB>weight]`.
    /// Lines starting with `#` and blank lines are skipped.
    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse_edge_list(std::io::BufReader::new(file))
    }

    pub fn parse_edge_list(reader: impl BufRead) -> Result<Self> {
        Self::build(&parse_edge_rows(reader)?)
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.labels.get(label)
    }

    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    pub fn out_weights(&self, v: NodeId) -> &[f64] {
        &self.weights[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    pub fn has_edge(&self, s: NodeId, t: NodeId) -> bool {
        self.successors(s).binary_search(&t).is_ok()
    }

    pub fn weight(&self, s: NodeId, t: NodeId) -> Option<f64> {
        let succ = self.successors(s);
        succ.binary_search(&t)
            .ok()
            .map(|i| self.weights[self.offsets[s.index()] + i])
    }

    /// All edges as `(source, target, weight)` in source-major order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.labels.ids().flat_map(move |s| {
            self.successors(s)
                .iter()
                .zip(self.out_weights(s))
                .map(move |(&t, &w)| (s, t, w))
        })
    }

    /// Row-stochastic transition probabilities `A_ij / Σ_l A_il`, aligned with
    /// [`FirstOrderGraph::edges`]. Sinks have empty rows; a row whose weights
    /// sum to zero yields zeros.
    pub fn transition_probabilities(&self) -> Vec<f64> {
        let mut probs = Vec::with_capacity(self.weights.len());
        for v in self.labels.ids() {
            let row = self.out_weights(v);
            let total: f64 = row.iter().sum();
            probs.extend(row.iter().map(|w| if total > 0.0 { w / total } else { 0.0 }));
        }
        probs
    }

    /// Transition probabilities out of one node, paired with their targets.
    pub fn transitions_from(&self, v: NodeId) -> Vec<(NodeId, f64)> {
        let row = self.out_weights(v);
        let total: f64 = row.iter().sum();
        self.successors(v)
            .iter()
            .zip(row)
            .map(|(&t, &w)| (t, if total > 0.0 { w / total } else { 0.0 }))
            .collect()
    }

    pub fn to_csr(&self, mode: CostMode) -> Csr {
        let costs = match mode {
            CostMode::Unit => vec![1.0; self.weights.len()],
            CostMode::Weighted => self.weights.clone(),
        };
        Csr::from_parts(self.offsets.clone(), self.targets.iter().map(|t| t.0).collect(), costs)
    }

    pub fn single_source_shortest_paths(&self, source: NodeId, mode: CostMode) -> Result<ShortestPathSummary> {
        paths::single_source(&self.to_csr(mode), source.0, mode)
    }

    /// `true` when every node reaches every other node.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let reach = |forward: bool| {
            let mut adj = vec![Vec::new(); n];
            for (s, t, _) in self.edges() {
                if forward {
                    adj[s.index()].push(t.index());
                } else {
                    adj[t.index()].push(s.index());
                }
            }
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|x| x)
        };
        reach(true) && reach(false)
    }

    /// Writes the edge list in the same format [`FirstOrderGraph::parse_edge_list`] reads.
    pub fn write_edge_list(&self, mut out: impl std::io::Write) -> Result<()> {
        for (s, t, w) in self.edges() {
            if self.weighted {
                writeln!(out, "{}\t{}\t{}", self.labels.name(s), self.labels.name(t), w)?;
            } else {
                writeln!(out, "{}\t{}", self.labels.name(s), self.labels.name(t))?;
            }
        }
        Ok(())
    }
}

/// Parses edge-list rows without building the graph.
pub fn parse_edge_rows(reader: impl BufRead) -> Result<Vec<EdgeRow>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        let parse_err = |msg: String| Error::Parse { line: lineno, msg };
        if fields.len() < 2 || fields.len() > 3 {
            return Err(parse_err(format!(
                "expected 2 or 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let (s, t) = (fields[0].trim(), fields[1].trim());
        if s.is_empty() || t.is_empty() {
            return Err(parse_err("empty node label".into()));
        }
        let weight = match fields.get(2) {
            Some(w) => {
                let w: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("weight {w:?} is not a number")))?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::Validation(format!(
                        "line {lineno}: weight {w} must be finite and non-negative"
                    )));
                }
                Some(w)
            }
            None => None,
        };
        rows.push(EdgeRow {
            source: s.to_string(),
            target: t.to_string(),
            weight,
        });
    }
    Ok(rows)
}
