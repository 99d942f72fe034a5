//! Bow-tie structure of web graphs and the dependence of PageRank on the
//! damping factor.
//!
//! The crate loads a directed graph, splits it into the bow-tie components
//! and the recurrent/transient blocks of its hyperlink matrix, computes
//! PageRank, its limit as the damping factor tends to one, closed forms for
//! the mass of IN+SCC and of the extended SCC, and the damping values at
//! which the extended SCC keeps its one-step retention.

pub mod block;
pub mod bowtie;
pub mod canonical;
pub mod error;
pub mod escc;
pub mod experiment;
pub mod graph;
pub mod grid;
pub mod inscc;
pub mod limit;
pub mod pagerank;
pub mod solve;

pub use bowtie::{BowtieAnalysis, BowtieLabel, BowtieSummary};
pub use error::{Error, Result};
pub use escc::{EsccBlock, EsccScope, SeedMode, SpectralSummary};
pub use graph::{load_edge_list, GraphHandle, NodeId};
pub use grid::DampingGrid;
pub use inscc::{three_block_view, ThreeBlockOptions, ThreeBlockView};
pub use limit::{limit_vector, LimitReport};
pub use pagerank::{mass_breakdown, pagerank, MassBreakdown, PageRankConfig, RankVector};
