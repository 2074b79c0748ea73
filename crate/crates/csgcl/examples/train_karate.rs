//! Full training run on the karate club, printing the loss trace through
//! the individual-contrast and team-up phases.
//!
//! ```bash
//! cargo run --release --example train_karate
//! ```

use csgcl::augment::AugmentationConfig;
use csgcl::community::louvain;
use csgcl::datasets::karate_club;
use csgcl::model::Activation;
use csgcl::objective::TeamupSchedule;
use csgcl::train::{train, TrainConfig};

fn main() {
    let graph = karate_club();
    let partition = louvain(&graph, 1.0, 0).unwrap();

    let cfg = TrainConfig {
        epochs: 300,
        learning_rate: 2e-4,
        hidden_dim: 16,
        activation: Activation::PRelu,
        aug: AugmentationConfig::new(0.1, 0.1, 0.3, 0.5),
        // t is measured in units of 100 epochs: gamma stays 0 until epoch
        // 100, then ramps linearly to gamma_max by epoch 200.
        sched: TeamupSchedule::new(1.0, 1.0, 0.5),
        seed: 0,
        adam_beta1: 0.9,
        adam_beta2: 0.999,
        adam_eps: 1e-8,
    };
    let out = train(&graph, &partition, &cfg).unwrap();

    println!("epoch   loss     gamma");
    for m in out.metrics.iter().step_by(25) {
        println!("{:5}  {:7.4}  {:.2}", m.epoch, m.loss, m.gamma);
    }
    let last = out.metrics.last().unwrap();
    println!("{:5}  {:7.4}  {:.2}", last.epoch, last.loss, last.gamma);

    let first = out.metrics.first().unwrap();
    println!(
        "\nloss moved {:.4} -> {:.4} over {} epochs",
        first.loss, last.loss, cfg.epochs
    );
}
