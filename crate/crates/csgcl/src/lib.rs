//! Community-strength-enhanced graph contrastive learning.
//!
//! Self-supervised node embeddings for undirected attributed graphs. The
//! pipeline detects communities, scores each one by its strength (its
//! per-community modularity contribution), and uses those strengths three
//! ways:
//!
//! * [`augment`] — communal attribute voting (CAV) masks attribute columns,
//!   communal edge dropping (CED) drops edges, both guided by strength so
//!   that strong communities are preserved in the perturbed views;
//! * [`model`] — a two-layer GCN encoder plus projection head embeds the
//!   paired views;
//! * [`objective`] — a dynamic "team-up" contrastive loss that starts as
//!   plain InfoNCE and progressively shifts every similarity term by the
//!   strengths of the two nodes' communities.
//!
//! Downstream quality is measured in [`eval`]: a logistic-regression linear
//! probe, k-means clustering scored by NMI, and cosine link prediction
//! scored by AUC and average precision.
//!
//! The runnable examples under `examples/` walk through each capability;
//! the `csgcl` binary drives the same pipeline from config files.

pub mod augment;
pub mod community;
pub mod config;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod objective;
pub mod pipeline;
pub mod sparse;
pub mod train;

pub use augment::{AugmentationConfig, Augmenter, GraphView};
pub use community::{community_strength, louvain, modularity, Partition};
pub use error::{Error, Result};
pub use graph::{load_dataset, AttributedGraph};
pub use model::{encode, init_params, Activation, EncoderParams};
pub use objective::{gamma, similarity, teamup_loss, TeamupSchedule};
pub use train::{train, TrainConfig, TrainOutput};
