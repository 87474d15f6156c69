//! Trajectory corpora: the ngram file format, sliding windows, subpath
//! counting and train/test splitting.
//!
//! An ngram file holds one trajectory per line as comma-separated node
//! labels. An optional last field `*n` gives the number of identical
//! observed trajectories. Lines starting with `#` are comments.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::FirstOrderGraph;
use crate::labels::{Labels, NodeId};

/// One observed trajectory with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub multiplicity: u64,
}

impl Path {
    pub fn new(nodes: Vec<NodeId>, multiplicity: u64) -> Self {
        Path { nodes, multiplicity }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Contiguous windows of `order + 1` nodes, in path order.
pub fn sliding_windows(nodes: &[NodeId], order: usize) -> std::slice::Windows<'_, NodeId> {
    assert!(order >= 1, "order must be at least 1");
    nodes.windows(order + 1)
}

/// Multiset of trajectories over a shared label table.
#[derive(Debug, Clone, Default)]
pub struct PathCorpus {
    labels: Labels,
    paths: Vec<Path>,
}

impl PathCorpus {
    pub fn new(labels: Labels, paths: Vec<Path>) -> Self {
        PathCorpus { labels, paths }
    }

    /// Convenience constructor from label sequences.
    pub fn from_sequences<'a, I>(seqs: I) -> Self
    where
        I: IntoIterator<Item = (&'a [&'a str], u64)>,
    {
        let mut labels = Labels::new();
        let paths = seqs
            .into_iter()
            .map(|(seq, m)| Path::new(seq.iter().map(|s| labels.intern(*s)).collect(), m))
            .collect();
        PathCorpus { labels, paths }
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Σ multiplicities.
    pub fn total_paths(&self) -> u64 {
        self.paths.iter().map(|p| p.multiplicity).sum()
    }

    pub fn max_len(&self) -> usize {
        self.paths.iter().map(Path::len).max().unwrap_or(0)
    }

    /// Same paths over a different label table (used when merging with a graph).
    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        let map: Vec<NodeId> = self
            .labels
            .names()
            .iter()
            .map(|n| labels.get(n).ok_or_else(|| Error::UnknownNode(n.clone())))
            .collect::<Result<_>>()?;
        for p in &mut self.paths {
            for v in &mut p.nodes {
                *v = map[v.index()];
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn read_ngram(path: impl AsRef<FsPath>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::parse_ngram(std::io::BufReader::new(file))
    }

    pub fn parse_ngram(reader: impl BufRead) -> Result<Self> {
        let mut labels = Labels::new();
        let mut paths = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let err = |msg: &str| Error::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                return Err(err("empty path"));
            }
            let mut fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let mut multiplicity = 1;
            if let Some(last) = fields.last().and_then(|f| f.strip_prefix('*')) {
                multiplicity = last
                    .parse::<u64>()
                    .ok()
                    .filter(|&m| m > 0)
                    .ok_or_else(|| err(&format!("multiplicity {last:?} is not a positive integer")))?;
                fields.pop();
            }
            if fields.is_empty() {
                return Err(err("empty path"));
            }
            if fields.iter().any(|f| f.is_empty()) {
                return Err(err("empty node label"));
            }
            let nodes = fields.into_iter().map(|f| labels.intern(f)).collect();
            paths.push(Path::new(nodes, multiplicity));
        }
        Ok(PathCorpus { labels, paths })
    }

    /// Writes the corpus in ngram format; multiplicity 1 is left implicit.
    pub fn write_ngram(&self, mut out: impl Write) -> Result<()> {
        for p in &self.paths {
            let line = self.labels.join(&p.nodes, ",");
            if p.multiplicity == 1 {
                writeln!(out, "{line}")?;
            } else {
                writeln!(out, "{line},*{}", p.multiplicity)?;
            }
        }
        Ok(())
    }

    /// Unweighted graph of every observed transition, sharing this corpus's node ids.
    pub fn observed_graph(&self) -> FirstOrderGraph {
        let mut edges = BTreeMap::new();
        for p in &self.paths {
            for w in p.nodes.windows(2) {
                edges.insert((w[0], w[1]), 1.0);
            }
        }
        FirstOrderGraph::from_merged(self.labels.clone(), edges, false)
    }

    /// First consecutive pair that is not an edge of `g`, if any.
    pub fn validate_against(&self, g: &FirstOrderGraph) -> Result<()> {
        for (pi, p) in self.paths.iter().enumerate() {
            for w in p.nodes.windows(2) {
                let (a, b) = (self.labels.name(w[0]), self.labels.name(w[1]));
                let ok = match (g.node(a), g.node(b)) {
                    (Some(x), Some(y)) => g.has_edge(x, y),
                    _ => false,
                };
                if !ok {
                    return Err(Error::Validation(format!(
                        "path {}: {a} -> {b} is not an edge of the graph",
                        pi + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Deterministic split of trajectory instances (multiplicities expanded).
    /// Each instance goes to the training side with probability `ratio`.
    pub fn train_test_split(&self, ratio: f64, seed: u64) -> Result<(PathCorpus, PathCorpus)> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Parameter(format!("split ratio {ratio} must lie in (0, 1)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for p in &self.paths {
            let mut k = 0;
            for _ in 0..p.multiplicity {
                if rng.random_bool(ratio) {
                    k += 1;
                }
            }
            if k > 0 {
                train.push(Path::new(p.nodes.clone(), k));
            }
            if k < p.multiplicity {
                test.push(Path::new(p.nodes.clone(), p.multiplicity - k));
            }
        }
        Ok((
            PathCorpus::new(self.labels.clone(), train),
            PathCorpus::new(self.labels.clone(), test),
        ))
    }

    pub fn length_stats(&self) -> Result<LengthStats> {
        if self.paths.is_empty() {
            return Err(Error::InsufficientData("corpus has no paths".into()));
        }
        let mut histogram = BTreeMap::new();
        let mut count = 0u64;
        let mut total = 0u128;
        for p in &self.paths {
            count += p.multiplicity;
            total += p.len() as u128 * p.multiplicity as u128;
            *histogram.entry(p.len()).or_insert(0) += p.multiplicity;
        }
        Ok(LengthStats {
            count,
            mean: total as f64 / count as f64,
            histogram,
        })
    }

    /// Multiplicity-weighted counts of all `(order + 1)`-windows.
    pub fn subpath_counts(&self, order: usize) -> SubpathCounts {
        assert!(order >= 1, "order must be at least 1");
        let counts = self
            .paths
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Vec<NodeId>, u64>, p| {
                for w in sliding_windows(&p.nodes, order) {
                    *acc.entry(w.to_vec()).or_insert(0) += p.multiplicity;
                }
                acc
            })
            .reduce(HashMap::new, |a, b| {
                if a.len() >= b.len() {
                    merge_counts(a, b)
                } else {
                    merge_counts(b, a)
                }
            });
        let mut context_totals = HashMap::new();
        for (w, &c) in &counts {
            *context_totals.entry(w[..order].to_vec()).or_insert(0) += c;
        }
        SubpathCounts {
            order,
            counts,
            context_totals,
        }
    }
}

fn merge_counts(mut a: HashMap<Vec<NodeId>, u64>, b: HashMap<Vec<NodeId>, u64>) -> HashMap<Vec<NodeId>, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthStats {
    /// Multiplicity-weighted number of paths.
    pub count: u64,
    /// Mean number of nodes per path.
    pub mean: f64,
    /// Path length (nodes) → weighted count.
    pub histogram: BTreeMap<usize, u64>,
}

/// Window counts of one order plus their per-context totals.
#[derive(Debug, Clone, Default)]
pub struct SubpathCounts {
    pub order: usize,
    pub counts: HashMap<Vec<NodeId>, u64>,
    pub context_totals: HashMap<Vec<NodeId>, u64>,
}

impl SubpathCounts {
    pub fn count(&self, window: &[NodeId]) -> u64 {
        self.counts.get(window).copied().unwrap_or(0)
    }

    pub fn total_windows(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Maximum-likelihood estimate of `P(next | context)`.
    pub fn mle_transition(&self, context: &[NodeId], next: NodeId) -> Result<f64> {
        let total = self
            .context_totals
            .get(context)
            .copied()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::UnseenContext(context.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))?;
        let mut window = context.to_vec();
        window.push(next);
        Ok(self.count(&window) as f64 / total as f64)
    }

    /// Sorted rows `(context, next, count)`.
    pub fn rows(&self) -> Vec<(&[NodeId], NodeId, u64)> {
        let mut rows: Vec<_> = self
            .counts
            .iter()
            .map(|(w, &c)| (&w[..self.order], w[self.order], c))
            .collect();
        rows.sort();
        rows
    }

    /// CSV with header `context,next,count`; context labels joined by `,`.
    pub fn write_csv(&self, labels: &Labels, out: impl Write) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["context", "next", "count"])?;
        for (ctx, next, c) in self.rows() {
            wtr.write_record([labels.join(ctx, ","), labels.name(next).to_string(), c.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(c: &PathCorpus, seq: &[&str]) -> Vec<NodeId> {
        seq.iter().map(|s| c.labels().get(s).unwrap()).collect()
    }

    #[test]
    fn parses_multiplicity() {
        let c = PathCorpus::parse_ngram("a,b,c\na,b,c,*4\n".as_bytes()).unwrap();
        assert_eq!(c.paths()[0].multiplicity, 1);
        assert_eq!(c.paths()[1].multiplicity, 4);
        assert_eq!(c.paths()[1].nodes, ids(&c, &["a", "b", "c"]));
        assert_eq!(c.total_paths(), 5);
    }

    #[test]
    fn rejects_malformed_lines() {
        for (text, line) in [("a,,b\n", 1), ("a\n\n", 2), ("a,b,*x\n", 1), ("a,*0\n", 1), ("*3\n", 1)] {
            match PathCorpus::parse_ngram(text.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn windows() {
        let c = PathCorpus::from_sequences([(&["a", "b", "c", "d"][..], 1)]);
        let p = &c.paths()[0].nodes;
        let w: Vec<_> = sliding_windows(p, 2).collect();
        assert_eq!(w, vec![&p[0..3], &p[1..4]]);
        assert_eq!(sliding_windows(&p[..2], 2).count(), 0);
        assert_eq!(sliding_windows(&p[..3], 1).count(), 2);
    }

    #[test]
    fn counts_are_weighted_by_multiplicity() {
        let c = PathCorpus::from_sequences([(&["a", "b", "c"][..], 2), (&["a", "b", "d"][..], 1)]);
        let sc = c.subpath_counts(2);
        assert_eq!(sc.count(&ids(&c, &["a", "b", "c"])), 2);
        assert_eq!(sc.count(&ids(&c, &["a", "b", "d"])), 1);
        assert_eq!(sc.context_totals.len(), 1);
        assert_eq!(sc.context_totals[&ids(&c, &["a", "b"])], 3);

        let c = PathCorpus::from_sequences([(&["a", "b", "c", "d"][..], 1)]);
        let sc = c.subpath_counts(1);
        assert_eq!(sc.counts.len(), 3);
        assert!(sc.counts.values().all(|&v| v == 1));

        let c = PathCorpus::from_sequences([(&["a"][..], 5)]);
        assert!(c.subpath_counts(1).counts.is_empty());
    }

    #[test]
    fn mle_from_counts() {
        let c = PathCorpus::from_sequences([(&["a", "b", "c"][..], 2), (&["a", "b", "d"][..], 1)]);
        let sc = c.subpath_counts(2);
        let ab = ids(&c, &["a", "b"]);
        let p = sc.mle_transition(&ab, c.labels().get("c").unwrap()).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-15);

        let c5 = PathCorpus::from_sequences([(&["a", "b", "c"][..], 5)]);
        let sc5 = c5.subpath_counts(2);
        assert_eq!(
            sc5.mle_transition(&ids(&c5, &["a", "b"]), c5.labels().get("c").unwrap())
                .unwrap(),
            1.0
        );

        let unseen = [NodeId(2), NodeId(0)];
        assert!(matches!(
            sc.mle_transition(&unseen, NodeId(1)),
            Err(Error::UnseenContext(_))
        ));
    }

    #[test]
    fn split_is_deterministic_and_tolerates_tiny_ratios() {
        let seqs: Vec<Vec<String>> = (0..50).map(|i| vec![format!("n{i}"), "x".into()]).collect();
        let refs: Vec<Vec<&str>> = seqs.iter().map(|s| s.iter().map(|x| x.as_str()).collect()).collect();
        let c = PathCorpus::from_sequences(refs.iter().map(|s| (&s[..], 3)));
        let (a1, b1) = c.train_test_split(0.5, 42).unwrap();
        let (a2, b2) = c.train_test_split(0.5, 42).unwrap();
        assert_eq!(a1.paths(), a2.paths());
        assert_eq!(b1.paths(), b2.paths());
        assert_eq!(a1.total_paths() + b1.total_paths(), c.total_paths());

        let small = PathCorpus::from_sequences([(&["a", "b"][..], 3)]);
        let (train, test) = small.train_test_split(1e-9, 7).unwrap();
        assert_eq!(train.total_paths() + test.total_paths(), 3);
        assert!(c.train_test_split(1.0, 1).is_err());
        assert!(c.train_test_split(0.0, 1).is_err());
    }

    #[test]
    fn length_statistics() {
        let c = PathCorpus::from_sequences([(&["a", "b"][..], 1), (&["a", "b", "c", "d"][..], 1)]);
        let s = c.length_stats().unwrap();
        assert_eq!((s.count, s.mean), (2, 3.0));
        let c = PathCorpus::from_sequences([(&["a", "b"][..], 3)]);
        let s = c.length_stats().unwrap();
        assert_eq!((s.count, s.mean), (3, 2.0));
        assert_eq!(s.histogram[&2], 3);
        assert!(PathCorpus::default().length_stats().is_err());
    }

    #[test]
    fn validation_against_graph() {
        let g = crate::graph::FirstOrderGraph::build(&[
            crate::graph::EdgeRow::new("a", "b"),
            crate::graph::EdgeRow::new("b", "c"),
        ])
        .unwrap();
        let ok = PathCorpus::from_sequences([(&["a", "b", "c"][..], 1)]);
        ok.validate_against(&g).unwrap();
        let bad = PathCorpus::from_sequences([(&["a", "c"][..], 1)]);
        assert!(bad.validate_against(&g).is_err());
    }

    #[test]
    fn counts_csv_has_header() {
        let c = PathCorpus::from_sequences([(&["a", "b", "c"][..], 2)]);
        let mut buf = Vec::new();
        c.subpath_counts(2).write_csv(c.labels(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "context,next,count\n\"a,b\",c,2\n");
    }

    #[test]
    fn observed_graph_shares_ids() {
        let c = PathCorpus::from_sequences([(&["a", "b", "c"][..], 2), (&["c", "b"][..], 1)]);
        let g = c.observed_graph();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.labels(), c.labels());
        c.validate_against(&g).unwrap();
    }
}
