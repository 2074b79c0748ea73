//! Louvain community detection and community strength on the karate club.
//!
//! ```bash
//! cargo run --release --example detect_communities
//! ```

use csgcl::community::{louvain, modularity};
use csgcl::datasets::karate_club;

fn main() {
    let graph = karate_club();
    println!(
        "karate club: {} nodes, {} undirected edges",
        graph.num_nodes(),
        graph.num_edges()
    );

    let partition = louvain(&graph, 1.0, 7).unwrap();
    let q = modularity(&graph, partition.assignment()).unwrap();
    println!(
        "louvain found {} communities, modularity {q:.4}",
        partition.num_communities()
    );

    for c in 0..partition.num_communities() {
        let members: Vec<usize> = (0..graph.num_nodes())
            .filter(|&v| partition.community_of(v) == c)
            .collect();
        println!(
            "community {c}: strength {:.4}, members {members:?}",
            partition.strength()[c]
        );
    }

    // Strength sums to modularity before clamping; the clamped vector is
    // what augmentation and the objective consume.
    let strength_sum: f64 = partition.strength().iter().sum();
    println!("sum of (clamped) strengths: {strength_sum:.4}");
}
