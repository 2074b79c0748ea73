//! Built-in desk-scale graphs: the Zachary karate club and seeded random
//! generators (Erdos-Renyi, planted partition) used by examples and tests.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::graph::AttributedGraph;

/// Zachary's karate club: 34 nodes, 78 edges, two-faction labels.
///
/// The graph carries no native attributes, so each node's attribute row is
/// its two-step random-walk profile (row `v` of `P^2` for the row-stochastic
/// walk matrix `P = D^-1 A`), a standard structural feature choice for
/// featureless graphs.
pub fn karate_club() -> AttributedGraph {
    const EDGES: [(usize, usize); 78] = [
        (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
        (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2),
        (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3),
        (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7),
        (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16),
        (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
        (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33),
        (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
        (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33),
        (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
        (31, 33), (32, 33),
    ];
    const FACTIONS: [usize; 34] = [
        0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1,
        1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
    ];
    let n = 34;
    let mut degree = vec![0usize; n];
    for &(u, v) in &EDGES {
        degree[u] += 1;
        degree[v] += 1;
    }
    let mut walk = Array2::<f64>::zeros((n, n));
    for &(u, v) in &EDGES {
        walk[[u, v]] = 1.0 / degree[u] as f64;
        walk[[v, u]] = 1.0 / degree[v] as f64;
    }
    let attributes = walk.dot(&walk);
    AttributedGraph::new(EDGES, attributes, Some(FACTIONS.to_vec()))
        .expect("karate club data is well-formed")
}

/// Erdos-Renyi G(n, p) with one-dimensional standard-normal attributes.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> AttributedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let attributes = Array2::from_shape_fn((n, 1), |_| StandardNormal.sample(&mut rng));
    AttributedGraph::new(edges, attributes, None).expect("generated ids are in range")
}

/// Configuration of a planted-partition (stochastic block model) graph.
#[derive(Debug, Clone)]
pub struct PlantedPartition {
    /// Block sizes; node labels follow block membership.
    pub block_sizes: Vec<usize>,
    /// Within-block edge probability.
    pub p_in: f64,
    /// Cross-block edge probability.
    pub p_out: f64,
    /// Attribute dimensionality.
    pub attr_dim: usize,
    /// Scale of the per-block attribute centers.
    pub attr_signal: f64,
    /// Standard deviation of per-node attribute noise.
    pub attr_noise: f64,
}

impl PlantedPartition {
    pub fn new(block_sizes: Vec<usize>, p_in: f64, p_out: f64) -> Self {
        PlantedPartition {
            block_sizes,
            p_in,
            p_out,
            attr_dim: 8,
            attr_signal: 1.0,
            attr_noise: 1.0,
        }
    }

    pub fn with_attributes(mut self, dim: usize, signal: f64, noise: f64) -> Self {
        self.attr_dim = dim;
        self.attr_signal = signal;
        self.attr_noise = noise;
        self
    }

    /// Samples a graph. Block membership becomes the label vector, and each
    /// node's attributes are its block's random center plus Gaussian noise,
    /// so attributes correlate with blocks.
    pub fn sample(&self, seed: u64) -> AttributedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: usize = self.block_sizes.iter().sum();
        let mut block_of = Vec::with_capacity(n);
        for (b, &size) in self.block_sizes.iter().enumerate() {
            block_of.extend(std::iter::repeat_n(b, size));
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                let p = if block_of[u] == block_of[v] {
                    self.p_in
                } else {
                    self.p_out
                };
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let centers = Array2::from_shape_fn((self.block_sizes.len(), self.attr_dim), |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            self.attr_signal * z
        });
        let attributes = Array2::from_shape_fn((n, self.attr_dim), |(i, j)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            centers[[block_of[i], j]] + self.attr_noise * z
        });
        AttributedGraph::new(edges, attributes, Some(block_of))
            .expect("generated ids are in range")
    }
}
