//! Communal attribute voting and communal edge dropping in isolation:
//! penalties, edge weights, and one sampled view pair.
//!
//! ```bash
//! cargo run --release --example augment_views
//! ```

use csgcl::augment::{edge_weights, AugmentationConfig, Augmenter};
use csgcl::community::louvain;
use csgcl::datasets::karate_club;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let graph = karate_club();
    let partition = louvain(&graph, 1.0, 7).unwrap();

    let augmenter = Augmenter::new(&graph, &partition);
    let penalties = augmenter.attr_penalties();
    let min = penalties.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = penalties.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("attribute penalties: min {min:.3}, max {max:.3} over {} columns", penalties.len());

    // Intra-community edges carry their community's strength; inter edges
    // are pushed to the bottom of the range and rarely survive.
    let weights = edge_weights(&graph, &partition);
    let (mut intra, mut inter) = (Vec::new(), Vec::new());
    for (&(u, v), &w) in graph.edges().iter().zip(&weights) {
        if partition.community_of(u) == partition.community_of(v) {
            intra.push(w);
        } else {
            inter.push(w);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "edge weights: {} intra (mean {:.3}), {} inter (mean {:.3})",
        intra.len(),
        mean(&intra),
        inter.len(),
        mean(&inter)
    );

    let cfg = AugmentationConfig::new(0.1, 0.1, 0.3, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (view1, view2) = augmenter.generate_views(&graph, &cfg, &mut rng);
    for (tag, view) in [("view 1", &view1), ("view 2", &view2)] {
        let masked = view.attr_mask().iter().filter(|&&m| m == 0).count();
        println!(
            "{tag}: kept {}/{} edges, masked {masked}/{} attribute columns",
            view.edges().len(),
            graph.num_edges(),
            graph.attr_dim()
        );
    }
}
