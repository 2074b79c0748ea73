//! Train on the karate club, then run all three downstream evaluations:
//! linear-probe classification, k-means clustering, and link prediction.
//!
//! ```bash
//! cargo run --release --example evaluate_embeddings
//! ```

use csgcl::augment::AugmentationConfig;
use csgcl::community::louvain;
use csgcl::datasets::karate_club;
use csgcl::eval::{kmeans_nmi, linear_probe, link_prediction, normalize_rows};
use csgcl::model::{encode, Activation};
use csgcl::objective::TeamupSchedule;
use csgcl::train::{train, TrainConfig};
use csgcl::GraphView;

fn main() {
    let graph = karate_club();
    let labels = graph.labels().unwrap().to_vec();
    let partition = louvain(&graph, 1.0, 0).unwrap();

    let cfg = TrainConfig {
        epochs: 300,
        learning_rate: 2e-4,
        hidden_dim: 16,
        activation: Activation::PRelu,
        aug: AugmentationConfig::new(0.1, 0.1, 0.3, 0.5),
        sched: TeamupSchedule::new(1.0, 1.0, 0.5),
        seed: 0,
        adam_beta1: 0.9,
        adam_beta2: 0.999,
        adam_eps: 1e-8,
    };
    let trained = train(&graph, &partition, &cfg).unwrap();
    // Downstream tasks consume the pre-projection representation of the
    // unperturbed graph.
    let z = encode(&trained.params, &GraphView::identity(&graph)).representation;

    let probe = linear_probe(&z, &labels, 0.1, 0.8, 1e-3, 10, 0).unwrap();
    print!("{}", probe.to_key_value());

    let clustering = kmeans_nmi(&normalize_rows(&z), &labels, 2, 0).unwrap();
    print!("{}", clustering.to_key_value());

    let link = link_prediction(&z, &graph, 0.1, 0).unwrap();
    print!("{}", link.to_key_value());
}
