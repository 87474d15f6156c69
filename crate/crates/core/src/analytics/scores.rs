use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Non-negative per-node scores keyed by first-order label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector {
    scores: BTreeMap<String, f64>,
    normalized: bool,
}

impl ScoreVector {
    /// Wraps raw scores; `normalized` is cleared.
    pub fn raw<I, S>(scores: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        ScoreVector {
            scores: scores.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            normalized: false,
        }
    }

    /// Wraps scores whose normalization the caller vouches for.
    pub fn with_flag<I, S>(scores: I, normalized: bool) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        ScoreVector {
            normalized,
            ..Self::raw(scores)
        }
    }

    /// Scales to sum 1. An all-zero vector is returned unchanged and stays
    /// flagged as not normalized.
    pub fn normalize(mut self) -> Self {
        let total = self.sum();
        if total > 0.0 {
            for v in self.scores.values_mut() {
                *v /= total;
            }
            self.normalized = true;
        }
        self
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.scores.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.scores.values().sum()
    }

    /// Entries in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.scores
    }

    /// Entries by descending score, ties by label.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// `node,score` rows in [`ranked`](Self::ranked) order.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "score"])?;
        for (k, v) in self.ranked() {
            w.write_record([k, &v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
