//! Weighted similarity for highly sparse vectors, computed without
//! imputation, and the comparison pipeline around it: imputation
//! baselines, top-K similarity graphs, Girvan-Newman community detection
//! and community-quality metrics.

pub mod community;
pub mod dataset;
pub mod error;
pub mod graph;
pub mod imputation;
pub mod metrics;
pub mod pipeline;
pub mod similarity;

pub use community::{
    edge_betweenness, edge_betweenness_exact, girvan_newman, EdgeBetweenness, Partition,
};
pub use dataset::{Cell, DatasetStats, MissingTokens, SparseMatrix};
pub use error::{Result, SparsimError};
pub use graph::{build_topk, Graph};
pub use imputation::{impute_knn, impute_mean, impute_mice, ImputedMatrix, Imputer, MiceConfig};
pub use metrics::{full_report, DunnIndex, Metric, MetricsReport};
pub use similarity::{
    canberra, cosine, euclidean, pairwise_matrix, spearman, weighted_similarity, MatrixInput,
    SimilarityMatrix, SimilarityMethod, StrengthOrder, WeightedSimilarity,
};

/// Formats a float with 17 significant digits, enough to round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
