//! Graph geodesics and the anchor-based approximation built on them.

mod dijkstra;
mod engine;

pub use dijkstra::{dijkstra, exact_geodesic_oracle};
pub use engine::{
    build_engine, AnchorSet, EngineConfig, GeodesicEngine, LegMetric, DEFAULT_ANCHORS,
    DEFAULT_CANDIDATES,
};
