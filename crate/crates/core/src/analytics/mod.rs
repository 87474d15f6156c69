//! Centralities and next-step prediction on higher-order models.

mod betweenness;
mod ground_truth;
mod pagerank;
mod prediction;
mod scores;

pub use betweenness::{
    first_order_betweenness, ho_betweenness, ho_betweenness_raw, BetweennessOptions, EndpointPolicy, PairSemantics,
};
pub use ground_truth::{ground_truth_frequencies, GroundTruthMode};
pub use pagerank::{ho_pagerank, project_pagerank, PageRank, PageRankOptions};
pub use prediction::{
    evaluate_prediction, evaluate_prediction_weighted, predict_next, PredictionResult, PredictionScore,
    PROBABILITY_FLOOR,
};
pub use scores::ScoreVector;
