//! Mapper graphs over classifier activations, colored by prediction
//! quality and mined for systematic misclassification clusters.
//!
//! The usual pipeline is [`geometry::column_stats`] and
//! [`geometry::pca_lens`] over a [`dataset::FeatureMatrix`], then
//! [`mapper::build_mapper`], [`coloring`] of the nodes, and
//! [`analysis::extract_problem_clusters`] on the colored graph.

pub mod analysis;
pub mod coloring;
pub mod dataset;
pub mod geometry;
pub mod heatmap;
pub mod mapper;
