//! Anchor-based geodesic distances on point clouds, with geodesic grouping,
//! relational attention, anchor positional embedding and completion metrics.

pub mod bench;
pub mod cloud;
pub mod commands;
pub mod error;
pub mod features;
pub mod geodesic;
pub mod graph;
pub mod io;
pub mod json;
pub mod matrix;
pub mod metrics;
pub mod pipeline;
pub mod sampling;
pub mod spatial;
pub mod synthetic;
