//! The team-up schedule and its effect on similarity terms: gamma(t) is a
//! hard-sigmoid ramp, and every pairwise similarity is shifted by
//! gamma * (S_{c(i)} + S_{c(j)}).
//!
//! ```bash
//! cargo run --release --example teamup_schedule
//! ```

use csgcl::objective::{
    finetuned_similarity_matrix, gamma, similarity_matrix, teamup_loss_with_gamma, TeamupSchedule,
};
use csgcl::Partition;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let sched = TeamupSchedule::new(1.0, 1.0, 0.5);
    println!("gamma(t) with t0 = 1, gamma_max = 1 (t in units of 100 epochs):");
    for epoch in [0, 50, 100, 125, 150, 175, 200, 300] {
        let t = epoch as f64 / 100.0;
        println!("  epoch {epoch:3}: gamma = {:.2}", gamma(t, &sched));
    }

    // Random embeddings with two communities of different strengths.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let z1 = Array2::from_shape_fn((6, 4), |_| rng.gen::<f64>() - 0.4);
    let z2 = Array2::from_shape_fn((6, 4), |_| rng.gen::<f64>() - 0.4);
    let partition = Partition::with_strengths(vec![0, 0, 0, 1, 1, 1], vec![0.30, 0.08]);

    let plain = similarity_matrix(&z1, &z2, sched.tau).unwrap();
    let tuned = finetuned_similarity_matrix(&z1, &z2, &partition, 1.0, sched.tau).unwrap();
    println!("\nsimilarity shift at gamma = 1 (s~ - s):");
    println!(
        "  strong-strong pair (0,1): {:+.3}",
        tuned[[0, 1]] - plain[[0, 1]]
    );
    println!(
        "  strong-weak   pair (0,4): {:+.3}",
        tuned[[0, 4]] - plain[[0, 4]]
    );
    println!(
        "  weak-weak     pair (3,4): {:+.3}",
        tuned[[3, 4]] - plain[[3, 4]]
    );

    // At gamma = 0 the loss is plain InfoNCE; the shift changes its value.
    for g in [0.0, 0.5, 1.0] {
        let loss = teamup_loss_with_gamma(&z1, &z2, &partition, g, sched.tau).unwrap();
        println!("loss at gamma {g:.1}: {loss:.4}");
    }
}
