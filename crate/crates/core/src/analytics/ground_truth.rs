use serde::{Deserialize, Serialize};

use super::ScoreVector;
use crate::error::{Error, Result};
use crate::trajectory::PathCorpus;

/// Which node occurrences count towards the observed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundTruthMode {
    /// Interior occurrences only: the first and last node of each path are skipped.
    Traversal,
    /// Every occurrence.
    Visitation,
}

/// Multiplicity-weighted node frequencies over every label of the corpus,
/// normalized to sum 1.
pub fn ground_truth_frequencies(corpus: &PathCorpus, mode: GroundTruthMode) -> Result<ScoreVector> {
    let labels = corpus.labels();
    let mut counts = vec![0u64; labels.len()];
    for p in corpus.paths() {
        let nodes = match mode {
            GroundTruthMode::Visitation => &p.nodes[..],
            GroundTruthMode::Traversal if p.nodes.len() > 2 => &p.nodes[1..p.nodes.len() - 1],
            GroundTruthMode::Traversal => &[],
        };
        for v in nodes {
            counts[v.index()] += p.multiplicity;
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyGroundTruth);
    }
    Ok(ScoreVector::raw(
        labels
            .ids()
            .map(|v| (labels.name(v).to_string(), counts[v.index()] as f64)),
    )
    .normalize())
}
