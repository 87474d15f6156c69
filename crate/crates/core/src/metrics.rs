//! Distribution and ranking comparisons between score vectors.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analytics::ScoreVector;
use crate::error::{Error, Result};

/// Smoothing applied to the model side when comparing against ground truth.
pub const DEFAULT_SMOOTHING: f64 = 1e-9;

/// `D(P‖Q)` in nats after adding `epsilon` to both vectors over the union
/// of their labels and renormalizing. Returns `f64::INFINITY` when some
/// `Q(i) = 0` while `P(i) > 0`.
pub fn kl_divergence(p: &ScoreVector, q: &ScoreVector, epsilon: f64) -> Result<f64> {
    kl_smoothed(p, q, epsilon, epsilon)
}

fn kl_smoothed(p: &ScoreVector, q: &ScoreVector, eps_p: f64, eps_q: f64) -> Result<f64> {
    for e in [eps_p, eps_q] {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(Error::Parameter(format!(
                "smoothing {e} must be a finite non-negative number"
            )));
        }
    }
    let support: BTreeSet<&str> = p.iter().chain(q.iter()).map(|(k, _)| k).collect();
    let n = support.len() as f64;
    let total_p = p.sum() + eps_p * n;
    let total_q = q.sum() + eps_q * n;
    if !(total_p > 0.0 && total_q > 0.0) {
        return Err(Error::InsufficientData(
            "cannot compare a distribution with no mass".into(),
        ));
    }
    let mut kl = 0.0;
    for label in support {
        let pi = (p.get(label).unwrap_or(0.0) + eps_p) / total_p;
        if pi == 0.0 {
            continue;
        }
        let qi = (q.get(label).unwrap_or(0.0) + eps_q) / total_q;
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        kl += pi * (pi / qi).ln();
    }
    Ok(kl.max(0.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauVariant {
    /// Tied pairs count as neither concordant nor discordant and the
    /// denominator is `sqrt((n0 - ties_x)(n0 - ties_y))`.
    #[default]
    B,
    /// `2(C - D) / (n(n - 1))` with tied pairs simply left out of `C` and `D`.
    Raw,
}

/// Kendall's tau-b over the labels present in both vectors.
pub fn kendall_tau(x: &ScoreVector, y: &ScoreVector) -> Result<f64> {
    kendall_tau_with(x, y, TauVariant::B)
}

pub fn kendall_tau_with(x: &ScoreVector, y: &ScoreVector, variant: TauVariant) -> Result<f64> {
    let mut pairs: Vec<(f64, f64)> = x.iter().filter_map(|(k, a)| y.get(k).map(|b| (a, b))).collect();
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "kendall tau needs at least 2 common nodes (got {})",
            pairs.len()
        )));
    }
    if pairs.iter().any(|(a, b)| a.is_nan() || b.is_nan()) {
        return Err(Error::Validation("scores contain NaN".into()));
    }
    let c = tau_counts(&mut pairs);
    let net = c.n0 as f64 - c.ties_x as f64 - c.ties_y as f64 + c.ties_xy as f64 - 2.0 * c.swaps as f64;
    match variant {
        TauVariant::B => {
            let denom = ((c.n0 - c.ties_x) as f64 * (c.n0 - c.ties_y) as f64).sqrt();
            if denom == 0.0 {
                return Err(Error::InsufficientData(
                    "a ranking is constant; tau-b is undefined".into(),
                ));
            }
            Ok((net / denom).clamp(-1.0, 1.0))
        }
        TauVariant::Raw => Ok(net / c.n0 as f64),
    }
}

struct TauCounts {
    n0: u64,
    ties_x: u64,
    ties_y: u64,
    ties_xy: u64,
    swaps: u64,
}

fn tied_pairs(run: u64) -> u64 {
    run * (run - 1) / 2
}

// Knight's O(n log n) counting: sort by (x, y), then count the inversions a
// merge sort by y performs.
fn tau_counts(pairs: &mut [(f64, f64)]) -> TauCounts {
    let n = pairs.len() as u64;
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (mut ties_x, mut ties_xy) = (0, 0);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 {
            run_x += 1;
            if w[0].1 == w[1].1 {
                run_xy += 1;
            } else {
                ties_xy += tied_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x += tied_pairs(run_x);
            ties_xy += tied_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += tied_pairs(run_x);
    ties_xy += tied_pairs(run_xy);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_y = 0;
    let mut run = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            ties_y += tied_pairs(run);
            run = 1;
        }
    }
    ties_y += tied_pairs(run);
    TauCounts {
        n0: tied_pairs(n),
        ties_x,
        ties_y,
        ties_xy,
        swaps,
    }
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            swaps += (mid - i) as u64;
            buf[k] = v[j];
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Rank and distribution agreement between ground truth and a model score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankedComparison {
    pub common_support: usize,
    pub tau: f64,
    pub kl: f64,
    pub smoothing_epsilon: f64,
}

/// Compares ground truth `p` with model scores `q`; only `q` is smoothed.
pub fn compare(p: &ScoreVector, q: &ScoreVector, epsilon: f64) -> Result<RankedComparison> {
    let common_support = p.iter().filter(|(k, _)| q.get(k).is_some()).count();
    Ok(RankedComparison {
        common_support,
        tau: kendall_tau(p, q)?,
        kl: kl_smoothed(p, q, 0.0, epsilon)?,
        smoothing_epsilon: epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(xs: &[f64]) -> ScoreVector {
        ScoreVector::raw(xs.iter().enumerate().map(|(i, &x)| (format!("n{i}"), x)))
    }

    #[test]
    fn kl_fixtures() {
        let p = sv(&[0.5, 0.5]);
        assert_eq!(kl_divergence(&p, &p, 0.0).unwrap(), 0.0);
        let q = sv(&[0.25, 0.75]);
        let want = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        let got = kl_divergence(&p, &q, 0.0).unwrap();
        assert!((got - want).abs() < 1e-15);
        assert!((got - 0.1438).abs() < 5e-5);
        assert_eq!(
            kl_divergence(&sv(&[1.0, 0.0]), &sv(&[0.0, 1.0]), 0.0).unwrap(),
            f64::INFINITY
        );
        assert!(kl_divergence(&sv(&[1.0, 0.0]), &sv(&[0.0, 1.0]), 1e-9)
            .unwrap()
            .is_finite());
        assert!(kl_divergence(&p, &q, -1.0).is_err());
    }

    #[test]
    fn kl_union_support_treats_missing_as_zero() {
        let p = ScoreVector::raw([("a", 1.0)]);
        let q = ScoreVector::raw([("b", 1.0)]);
        assert_eq!(kl_divergence(&p, &q, 0.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn tau_fixtures() {
        let x = sv(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &sv(&[5.0, 4.0, 3.0, 2.0, 1.0])).unwrap(), -1.0);
        let t = kendall_tau(&sv(&[1.0, 2.0, 3.0]), &sv(&[1.0, 3.0, 2.0])).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
        let t = kendall_tau_with(&sv(&[1.0, 2.0, 3.0]), &sv(&[1.0, 3.0, 2.0]), TauVariant::Raw).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_b_with_ties() {
        // x = (1,1,2), y = (1,2,3): pairs (0,1) tied in x; (0,2),(1,2) concordant.
        // tau-b = 2 / sqrt(2 * 3).
        let t = kendall_tau(&sv(&[1.0, 1.0, 2.0]), &sv(&[1.0, 2.0, 3.0])).unwrap();
        assert!((t - 2.0 / 6f64.sqrt()).abs() < 1e-15);
        let raw = kendall_tau_with(&sv(&[1.0, 1.0, 2.0]), &sv(&[1.0, 2.0, 3.0]), TauVariant::Raw).unwrap();
        assert!((raw - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_errors() {
        assert!(matches!(
            kendall_tau(&sv(&[1.0]), &sv(&[1.0])),
            Err(Error::InsufficientData(_))
        ));
        assert!(kendall_tau(&sv(&[1.0, 1.0]), &sv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn compare_smooths_model_side_only() {
        let p = ScoreVector::raw([("a", 0.5), ("b", 0.5), ("c", 0.0)]);
        let q = ScoreVector::raw([("a", 1.0), ("b", 0.0), ("c", 0.0)]);
        let c = compare(&p, &q, DEFAULT_SMOOTHING).unwrap();
        assert_eq!(c.common_support, 3);
        assert!(c.kl.is_finite() && c.kl > 1.0);
        assert!(compare(&p, &q, 0.0).unwrap().kl.is_infinite());
    }
}
