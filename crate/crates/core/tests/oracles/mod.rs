//! Reference implementations that share no code with the library.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

/// Candidate paths with their costs, grouped by pair.
type Groups = HashMap<(usize, usize), Vec<(Vec<usize>, f64)>>;

/// Directed graph over higher-order nodes with each node's first-order tuple.
pub struct TupleGraph {
    pub labels: usize,
    pub tuples: Vec<Vec<usize>>,
    pub adj: Vec<Vec<(usize, f64)>>,
}

fn tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

/// All simple paths from `start` (including the trivial one) that avoid
/// `blocked` nodes after the first, with their costs.
fn simple_paths(adj: &[Vec<(usize, f64)>], start: usize, blocked: &dyn Fn(usize) -> bool) -> Vec<(Vec<usize>, f64)> {
    fn go(
        adj: &[Vec<(usize, f64)>],
        blocked: &dyn Fn(usize) -> bool,
        path: &mut Vec<usize>,
        on: &mut Vec<bool>,
        cost: f64,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        out.push((path.clone(), cost));
        let u = *path.last().unwrap();
        for &(v, c) in &adj[u] {
            if on[v] || blocked(v) {
                continue;
            }
            on[v] = true;
            path.push(v);
            go(adj, blocked, path, on, cost + c, out);
            path.pop();
            on[v] = false;
        }
    }
    let mut on = vec![false; adj.len()];
    on[start] = true;
    let mut out = Vec::new();
    go(adj, blocked, &mut vec![start], &mut on, 0.0, &mut out);
    out
}

/// Minimum cost and number of minimum-cost simple paths from `s` to every node.
pub fn sigma_and_dist(adj: &[Vec<(usize, f64)>], s: usize) -> (Vec<f64>, Vec<u64>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0u64; n];
    let paths = simple_paths(adj, s, &|_| false);
    for (p, c) in &paths {
        let t = *p.last().unwrap();
        dist[t] = dist[t].min(*c);
    }
    for (p, c) in &paths {
        let t = *p.last().unwrap();
        if tie(*c, dist[t]) {
            sigma[t] += 1;
        }
    }
    (dist, sigma)
}

/// Credits every minimum-cost path in each group with `1/σ` per occurrence.
fn credit(groups: Groups, g: &TupleGraph, include_endpoints: bool) -> Vec<f64> {
    let mut score = vec![0.0; g.labels];
    for (_, paths) in groups {
        let best = paths.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| tie(p.1, best)).map(|p| &p.0).collect();
        let sigma = shortest.len() as f64;
        for p in shortest {
            let mut seq = g.tuples[p[0]].clone();
            seq.extend(p[1..].iter().map(|&h| *g.tuples[h].last().unwrap()));
            let range = if include_endpoints {
                0..seq.len()
            } else {
                1..seq.len() - 1
            };
            for i in range {
                score[seq[i]] += 1.0 / sigma;
            }
        }
    }
    score
}

/// Betweenness over ordered pairs of distinct higher-order nodes.
pub fn ho_pairs_betweenness(g: &TupleGraph, include_endpoints: bool) -> Vec<f64> {
    let mut groups = Groups::new();
    for s in 0..g.adj.len() {
        for (p, c) in simple_paths(&g.adj, s, &|_| false) {
            let t = *p.last().unwrap();
            if t != s {
                groups.entry((s, t)).or_default().push((p, c));
            }
        }
    }
    credit(groups, g, include_endpoints)
}

/// Betweenness over ordered pairs of distinct first-order nodes. A path for
/// `(s, t)` starts at a node whose tuple begins with `s`, visits no other such
/// node, and ends at any node whose tuple ends with `t`.
pub fn first_order_pairs_betweenness(g: &TupleGraph, include_endpoints: bool) -> Vec<f64> {
    let mut groups = Groups::new();
    for h0 in 0..g.adj.len() {
        let s = g.tuples[h0][0];
        let blocked = |v: usize| g.tuples[v][0] == s;
        for (p, c) in simple_paths(&g.adj, h0, &blocked) {
            let t = *g.tuples[*p.last().unwrap()].last().unwrap();
            if t != s {
                groups.entry((s, t)).or_default().push((p, c));
            }
        }
    }
    credit(groups, g, include_endpoints)
}

/// `true` when the zero-cost edges contain a directed cycle (self-loops included).
pub fn has_zero_cost_cycle(adj: &[Vec<(usize, f64)>]) -> bool {
    (0..adj.len()).any(|s| {
        let zero: Vec<Vec<(usize, f64)>> = adj
            .iter()
            .map(|row| row.iter().copied().filter(|e| e.1 == 0.0).collect())
            .collect();
        simple_paths(&zero, s, &|_| false)
            .iter()
            .any(|(p, _)| zero[*p.last().unwrap()].iter().any(|e| e.0 == s))
    })
}

/// Stationary vector of `α·T + (1-α)/n` with dangling rows spread uniformly,
/// from `(I - α Tᵀ) r = (1-α)/n`.
pub fn dense_pagerank(n: usize, edges: &[(usize, usize, f64)], alpha: f64) -> Vec<f64> {
    let mut t = DMatrix::<f64>::zeros(n, n);
    for &(u, v, p) in edges {
        t[(u, v)] += p;
    }
    for u in 0..n {
        if (0..n).all(|v| t[(u, v)] == 0.0) {
            for v in 0..n {
                t[(u, v)] = 1.0 / n as f64;
            }
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - t.transpose() * alpha;
    let b = DVector::<f64>::from_element(n, (1.0 - alpha) / n as f64);
    let r = a.lu().solve(&b).expect("I - αTᵀ is non-singular for α < 1");
    r.iter().copied().collect()
}

/// `(tau_b, raw tau)` by enumerating every pair.
pub fn kendall_pairs(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).partial_cmp(&0.0).unwrap() as i64;
            let b = (y[i] - y[j]).partial_cmp(&0.0).unwrap() as i64;
            if a == 0 {
                tx += 1;
            }
            if b == 0 {
                ty += 1;
            }
            if a != 0 && b != 0 {
                if a == b {
                    c += 1;
                } else {
                    d += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let b = (c - d) as f64 / ((n0 - tx as f64) * (n0 - ty as f64)).sqrt();
    (b, (c - d) as f64 / n0)
}

fn ln_gamma_half(twice_a: u32) -> f64 {
    // Γ(a + 1) = a Γ(a) from Γ(1) = 1 or Γ(1/2) = √π.
    let (mut a, mut lg) = if twice_a.is_multiple_of(2) {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * std::f64::consts::PI.ln())
    };
    while 2.0 * a < twice_a as f64 {
        lg += a.ln();
        a += 1.0;
    }
    lg
}

/// Adaptive Simpson on `[a, b]` given `f` at both ends and the midpoint.
fn simpson(
    f: &dyn Fn(f64) -> f64,
    (a, b): (f64, f64),
    [fa, fm, fb]: [f64; 3],
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, (a, m), [fa, flm, fm], left, tol / 2.0, depth - 1)
        + simpson(f, (m, b), [fm, frm, fb], right, tol / 2.0, depth - 1)
}

/// `P(X ≥ x)` for `X ~ χ²(dof)` by adaptive Simpson quadrature of the
/// regularized lower incomplete gamma integral, substituting `t = u²`.
pub fn chi2_sf_quadrature(dof: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let a = dof as f64 / 2.0;
    let lg = ln_gamma_half(dof);
    let f = move |u: f64| {
        if u == 0.0 {
            return if dof == 1 { 2.0 * (-lg).exp() } else { 0.0 };
        }
        2.0 * ((2.0 * a - 1.0) * u.ln() - u * u - lg).exp()
    };
    let b = (x / 2.0).sqrt();
    let (fa, fm, fb) = (f(0.0), f(b / 2.0), f(b));
    let whole = b / 6.0 * (fa + 4.0 * fm + fb);
    let lower = simpson(&f, (0.0, b), [fa, fm, fb], whole, 1e-13, 60);
    (1.0 - lower).clamp(0.0, 1.0)
}

/// `(|V|-1) + Σ_{i≤k} (sum of entries of A^i - non-zero rows of A^i)` by explicit matrix powers.
pub fn dof_matrix_power(n: usize, edges: &[(usize, usize)], k: usize) -> u128 {
    let mut a = vec![vec![0u128; n]; n];
    for &(u, v) in edges {
        a[u][v] = 1;
    }
    let mut p = a.clone();
    let mut d = (n - 1) as u128;
    for i in 1..=k {
        if i > 1 {
            let mut q = vec![vec![0u128; n]; n];
            for r in 0..n {
                for m in 0..n {
                    if p[r][m] != 0 {
                        for c in 0..n {
                            q[r][c] += p[r][m] * a[m][c];
                        }
                    }
                }
            }
            p = q;
        }
        let total: u128 = p.iter().flatten().sum();
        let rows = p.iter().filter(|r| r.iter().any(|&x| x > 0)).count() as u128;
        d += total - rows;
    }
    d
}

/// Occurrences of `w` as a contiguous window, weighted by multiplicity.
fn occurrences(corpus: &[(Vec<&str>, u64)], w: &[&str], must_continue: bool) -> u64 {
    corpus
        .iter()
        .map(|(p, m)| {
            let last = if must_continue {
                p.len().saturating_sub(1)
            } else {
                p.len()
            };
            let hits = (0..last.saturating_sub(w.len() - 1))
                .filter(|&i| i + w.len() <= last && p[i..i + w.len()] == *w)
                .count() as u64;
            hits * m
        })
        .sum()
}

/// Multi-order log-likelihood of `path` conditioned on its first node:
/// `Σ_i ln N(p[i-k..=i]) / N'(p[i-k..i])` with `k = min(i, K)`, where `N'`
/// counts only context occurrences followed by another node.
pub fn multi_order_ll(corpus: &[(Vec<&str>, u64)], path: &[&str], max_order: usize) -> f64 {
    let mut ll = 0.0;
    for i in 1..path.len() {
        let k = i.min(max_order);
        let num = occurrences(corpus, &path[i - k..=i], false);
        let den = occurrences(corpus, &path[i - k..i], true);
        if num == 0 {
            return f64::NEG_INFINITY;
        }
        ll += (num as f64 / den as f64).ln();
    }
    ll
}
