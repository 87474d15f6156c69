//! Shortest-path counting on compressed adjacency.
//!
//! Both the first-order graph and every higher-order model hand their edges to
//! [`Csr`], so one Brandes-style routine serves all centrality computations.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};

/// Relative tolerance under which two path costs count as equal.
pub const COST_TIE_TOLERANCE: f64 = 1e-9;

/// `true` when two path costs are equal under [`COST_TIE_TOLERANCE`].
#[inline]
pub fn costs_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TIE_TOLERANCE * a.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    /// Every edge costs 1 (hop count).
    #[default]
    Unit,
    /// Edge costs taken from the stored weights.
    Weighted,
}

/// Directed graph in compressed sparse row form with one cost per edge.
#[derive(Debug, Clone, Default)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    costs: Vec<f64>,
}

impl Csr {
    /// Builds from `(source, target, cost)` triples; order within a row follows input order.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32, f64)]) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for &(s, _, _) in edges {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; edges.len()];
        let mut costs = vec![0.0; edges.len()];
        for &(s, t, c) in edges {
            let slot = &mut fill[s as usize];
            targets[*slot] = t;
            costs[*slot] = c;
            *slot += 1;
        }
        Csr {
            offsets,
            targets,
            costs,
        }
    }

    pub(crate) fn from_parts(offsets: Vec<usize>, targets: Vec<u32>, costs: Vec<f64>) -> Self {
        debug_assert_eq!(offsets.last().copied().unwrap_or(0), targets.len());
        debug_assert_eq!(targets.len(), costs.len());
        Csr {
            offsets,
            targets,
            costs,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn out_edges(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.offsets[v as usize]..self.offsets[v as usize + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.costs[r].iter().copied())
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }
}

/// Minimum-cost path counts and the shortest-path DAG rooted at a set of sources.
#[derive(Debug, Clone)]
pub struct ShortestPathSummary {
    pub sources: Vec<u32>,
    /// Minimum cost from the sources; `f64::INFINITY` when unreachable.
    pub dist: Vec<f64>,
    /// Number of minimum-cost paths; 0 when unreachable.
    pub sigma: Vec<u64>,
    /// Reached nodes in an order compatible with the DAG.
    pub order: Vec<u32>,
    /// DAG edges `(pred, node)` in insertion order: all edges leaving a node
    /// are recorded after every edge entering it.
    pub dag: Vec<(u32, u32)>,
}

impl ShortestPathSummary {
    pub fn predecessors(&self, v: u32) -> Vec<u32> {
        let mut p: Vec<u32> = self.dag.iter().filter(|&&(_, w)| w == v).map(|&(u, _)| u).collect();
        p.sort_unstable();
        p
    }

    pub fn is_reachable(&self, v: u32) -> bool {
        self.dist[v as usize].is_finite()
    }
}

/// Single-source variant of [`shortest_paths`].
pub fn single_source(g: &Csr, source: u32, mode: CostMode) -> Result<ShortestPathSummary> {
    shortest_paths(g, &[source], mode)
}

/// Counts all minimum-cost paths from a set of sources (each with σ = 1).
///
/// Self-loops and edges into a source never enter the DAG. Under
/// [`CostMode::Weighted`] zero-cost cycles are broken at the node settled
/// earliest by Dijkstra, so counts stay finite.
pub fn shortest_paths(g: &Csr, sources: &[u32], mode: CostMode) -> Result<ShortestPathSummary> {
    match mode {
        CostMode::Unit => bfs(g, sources),
        CostMode::Weighted => dijkstra(g, sources),
    }
}

fn bfs(g: &Csr, sources: &[u32]) -> Result<ShortestPathSummary> {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![u32::MAX; n];
    let mut sigma = vec![0u64; n];
    let mut is_source = vec![false; n];
    let mut order = Vec::new();
    let mut dag = Vec::new();
    let mut queue = VecDeque::new();

    for &s in sources {
        if !is_source[s as usize] {
            is_source[s as usize] = true;
            hops[s as usize] = 0;
            sigma[s as usize] = 1;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let hv = hops[v as usize];
        for (w, _) in g.out_edges(v) {
            if w == v || is_source[w as usize] {
                continue;
            }
            let wi = w as usize;
            if hops[wi] == u32::MAX {
                hops[wi] = hv + 1;
                queue.push_back(w);
            }
            if hops[wi] == hv + 1 {
                sigma[wi] = sigma[wi]
                    .checked_add(sigma[v as usize])
                    .ok_or(Error::PathCountOverflow)?;
                dag.push((v, w));
            }
        }
    }
    for (d, h) in dist.iter_mut().zip(&hops) {
        if *h != u32::MAX {
            *d = *h as f64;
        }
    }
    Ok(ShortestPathSummary {
        sources: sources.to_vec(),
        dist,
        sigma,
        order,
        dag,
    })
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(g: &Csr, sources: &[u32]) -> Result<ShortestPathSummary> {
    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut is_source = vec![false; n];
    let mut rank = vec![u32::MAX; n];
    let mut settled = Vec::new();
    let mut heap = BinaryHeap::new();

    for &s in sources {
        if !is_source[s as usize] {
            is_source[s as usize] = true;
            dist[s as usize] = 0.0;
            heap.push(Reverse(HeapItem(0.0, s)));
        }
    }
    while let Some(Reverse(HeapItem(d, v))) = heap.pop() {
        if rank[v as usize] != u32::MAX || d > dist[v as usize] {
            continue;
        }
        rank[v as usize] = settled.len() as u32;
        settled.push(v);
        for (w, c) in g.out_edges(v) {
            let nd = d + c;
            if nd < dist[w as usize] && !is_source[w as usize] {
                dist[w as usize] = nd;
                heap.push(Reverse(HeapItem(nd, w)));
            }
        }
    }

    // Tight edges form the shortest-path DAG (up to zero-cost cycles).
    let mut indeg = vec![0u32; n];
    for &v in &settled {
        for (w, c) in g.out_edges(v) {
            if w != v && !is_source[w as usize] && costs_tie(dist[v as usize] + c, dist[w as usize]) {
                indeg[w as usize] += 1;
            }
        }
    }

    // Kahn's algorithm, preferring earlier-settled nodes.
    let mut sigma = vec![0u64; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(settled.len());
    let mut dag = Vec::new();
    let mut ready = BinaryHeap::new();
    for &s in sources {
        if is_source[s as usize] && sigma[s as usize] == 0 {
            sigma[s as usize] = 1;
            ready.push(Reverse(rank[s as usize]));
        }
    }
    let mut cursor = 0usize;
    while order.len() < settled.len() {
        let v = match ready.pop() {
            Some(Reverse(r)) => settled[r as usize],
            None => {
                while done[settled[cursor] as usize] {
                    cursor += 1;
                }
                settled[cursor]
            }
        };
        if done[v as usize] {
            continue;
        }
        done[v as usize] = true;
        order.push(v);
        let sv = sigma[v as usize];
        for (w, c) in g.out_edges(v) {
            let wi = w as usize;
            if w == v || is_source[wi] || done[wi] || !costs_tie(dist[v as usize] + c, dist[wi]) {
                continue;
            }
            sigma[wi] = sigma[wi].checked_add(sv).ok_or(Error::PathCountOverflow)?;
            dag.push((v, w));
            indeg[wi] -= 1;
            if indeg[wi] == 0 {
                ready.push(Reverse(rank[wi]));
            }
        }
    }

    Ok(ShortestPathSummary {
        sources: sources.to_vec(),
        dist,
        sigma,
        order,
        dag,
    })
}
