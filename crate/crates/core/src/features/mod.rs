//! Manifold-aware feature extraction: geodesic grouping, relational
//! attention and anchor positional embedding.

mod attention;
mod embedding;
mod grouping;
mod knn;
mod mlp;

pub use attention::{attend_level, gra_t_forward, softmax_aggregate, AttentionOutput};
pub use embedding::mpe_augment;
pub use grouping::{gng_build, GroupedLevel, GroupingConfig, NeighborPool};
pub use knn::{euclidean_knn, geodesic_knn, sheet_purity, Neighborhood};
pub use mlp::{MlpParams, RelationMlpParams};
