//! Community-strength-guided augmentations.
//!
//! Communal Attribute Voting (CAV) masks attribute columns with
//! probabilities driven by strength-weighted attribute mass, and Communal
//! Edge Dropping (CED) keeps intra-community edges (strong communities
//! first) while dropping inter-community edges most aggressively.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::community::Partition;
use crate::graph::{normalized_adjacency_of, AttributedGraph};
use crate::sparse::CsrMatrix;

/// Sampling-range hyperparameters of the paired views: `p_a` controls
/// attribute masking and `p_e` edge dropping, one value per view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationConfig {
    pub p_a1: f64,
    pub p_a2: f64,
    pub p_e1: f64,
    pub p_e2: f64,
}

impl AugmentationConfig {
    pub fn new(p_a1: f64, p_a2: f64, p_e1: f64, p_e2: f64) -> Self {
        let cfg = AugmentationConfig {
            p_a1,
            p_a2,
            p_e1,
            p_e2,
        };
        debug_assert!(cfg.in_range(), "augmentation probabilities must be in [0,1]");
        cfg
    }

    pub fn in_range(&self) -> bool {
        [self.p_a1, self.p_a2, self.p_e1, self.p_e2]
            .iter()
            .all(|p| (0.0..=1.0).contains(p))
    }
}

/// One perturbed graph view together with the masks that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphView {
    num_nodes: usize,
    /// `X~ = m_a o X`: masked columns are zeroed, everything else untouched.
    attributes: Array2<f64>,
    /// Kept undirected edges, a subset of the original edge list.
    edges: Vec<(usize, usize)>,
    /// Per-column keep mask `m_a` (1 = kept).
    attr_mask: Vec<u8>,
    /// Per-edge keep mask `m_e` over the original undirected edge list.
    edge_mask: Vec<u8>,
}

impl GraphView {
    /// The unperturbed view of a graph: identity masks, original edges.
    pub fn identity(g: &AttributedGraph) -> Self {
        GraphView {
            num_nodes: g.num_nodes(),
            attributes: g.attributes().clone(),
            edges: g.edges().to_vec(),
            attr_mask: vec![1; g.attr_dim()],
            edge_mask: vec![1; g.num_edges()],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn attributes(&self) -> &Array2<f64> {
        &self.attributes
    }

    pub fn attr_dim(&self) -> usize {
        self.attributes.ncols()
    }

    /// Kept undirected edges.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn attr_mask(&self) -> &[u8] {
        &self.attr_mask
    }

    pub fn edge_mask(&self) -> &[u8] {
        &self.edge_mask
    }

    /// Symmetric 0/1 adjacency of the kept edges.
    pub fn adjacency(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(
            self.num_nodes,
            self.num_nodes,
            self.edges
                .iter()
                .flat_map(|&(u, v)| [(u, v, 1.0), (v, u, 1.0)]),
        )
    }

    /// Normalized adjacency of the kept edges (input to the encoder).
    pub fn normalized_adjacency(&self) -> CsrMatrix {
        normalized_adjacency_of(self.num_nodes, &self.edges)
    }
}

/// Attribute-style normalization `(x_max - x) / (x_max - x_mean)`.
///
/// A constant (or numerically degenerate) vector falls back to all ones,
/// which degrades the augmentation to uniform masking.
pub fn normalize_attr(x: &[f64]) -> Vec<f64> {
    assert!(!x.is_empty(), "normalize_attr on empty vector");
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let denom = max - mean;
    // Constant vectors must hit the fallback even when the computed mean
    // rounds past the max.
    if max == min || denom <= 0.0 || denom.is_nan() {
        return vec![1.0; x.len()];
    }
    x.iter().map(|&v| (max - v) / denom).collect()
}

/// Edge-style normalization `(x - x_min) / (x_mean - x_min)`, with the same
/// all-ones fallback for constant vectors.
pub fn normalize_edge(x: &[f64]) -> Vec<f64> {
    assert!(!x.is_empty(), "normalize_edge on empty vector");
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let denom = mean - min;
    if max == min || denom <= 0.0 || denom.is_nan() {
        return vec![1.0; x.len()];
    }
    x.iter().map(|&v| (v - min) / denom).collect()
}

/// Per-column removal penalties `w_a = n~_a(abs(X)^T H S)`.
///
/// All-zero columns are excluded from the vote: they get penalty 0 and are
/// never masked, since they carry no information to remove. Normalization
/// statistics are taken over the remaining columns only.
pub fn attribute_penalties(g: &AttributedGraph, p: &Partition) -> Vec<f64> {
    let x = g.attributes();
    let d = x.ncols();
    let mut scores = vec![0.0f64; d];
    let mut nonzero = vec![false; d];
    for (i, row) in x.rows().into_iter().enumerate() {
        let s = p.strength_of(i);
        for j in 0..d {
            let a = row[j].abs();
            if a > 0.0 {
                nonzero[j] = true;
            }
            scores[j] += a * s;
        }
    }
    let included: Vec<f64> = (0..d).filter(|&j| nonzero[j]).map(|j| scores[j]).collect();
    if included.is_empty() {
        return vec![0.0; d];
    }
    let normalized = normalize_attr(&included);
    let mut out = vec![0.0; d];
    let mut k = 0;
    for j in 0..d {
        if nonzero[j] {
            out[j] = normalized[k];
            k += 1;
        }
    }
    out
}

/// Per-edge weights over the canonical undirected edge list: raw weight
/// `S_c` for an intra-community edge of community `c`, and
/// `-(S_{c_u} + S_{c_v})` for an inter-community edge, passed through
/// [`normalize_edge`].
pub fn edge_weights(g: &AttributedGraph, p: &Partition) -> Vec<f64> {
    normalize_edge(&raw_edge_weights(g, p))
}

/// Unnormalized CED edge weights.
pub fn raw_edge_weights(g: &AttributedGraph, p: &Partition) -> Vec<f64> {
    g.edges()
        .iter()
        .map(|&(u, v)| {
            if p.community_of(u) == p.community_of(v) {
                p.strength_of(u)
            } else {
                -(p.strength_of(u) + p.strength_of(v))
            }
        })
        .collect()
}

/// Samples a CAV attribute mask: column `j` is kept with probability
/// `clamp(1 - w_a[j] * p_a, 0, 1)`, one independent draw per column.
fn sample_attr_mask(penalties: &[f64], p_a: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    penalties
        .iter()
        .map(|&w| {
            let keep = (1.0 - w * p_a).clamp(0.0, 1.0);
            u8::from(rng.gen::<f64>() < keep)
        })
        .collect()
}

/// Samples a CED edge mask: edge `e` is kept with probability
/// `clamp(w_e * p_e, 0, 1)`, one draw per undirected edge, so a kept edge
/// is kept in both directions.
fn sample_edge_mask(weights: &[f64], p_e: f64, rng: &mut ChaCha8Rng) -> Vec<u8> {
    weights
        .iter()
        .map(|&w| {
            let keep = (w * p_e).clamp(0.0, 1.0);
            u8::from(rng.gen::<f64>() < keep)
        })
        .collect()
}

fn apply_attr_mask(x: &Array2<f64>, mask: &[u8]) -> Array2<f64> {
    let mut out = x.clone();
    for (j, &m) in mask.iter().enumerate() {
        if m == 0 {
            out.column_mut(j).fill(0.0);
        }
    }
    out
}

fn apply_edge_mask(edges: &[(usize, usize)], mask: &[u8]) -> Vec<(usize, usize)> {
    edges
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m == 1)
        .map(|(&e, _)| e)
        .collect()
}

/// Communal Attribute Voting: computes penalties and samples one perturbed
/// attribute matrix. Returns the keep mask and `X~`.
pub fn cav(
    g: &AttributedGraph,
    p: &Partition,
    p_a: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<u8>, Array2<f64>) {
    let penalties = attribute_penalties(g, p);
    let mask = sample_attr_mask(&penalties, p_a, rng);
    let x = apply_attr_mask(g.attributes(), &mask);
    (mask, x)
}

/// Communal Edge Dropping: computes edge weights and samples one perturbed
/// edge set. Returns the keep mask and the kept undirected edges.
pub fn ced(
    g: &AttributedGraph,
    p: &Partition,
    p_e: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<u8>, Vec<(usize, usize)>) {
    let weights = edge_weights(g, p);
    let mask = sample_edge_mask(&weights, p_e, rng);
    let edges = apply_edge_mask(g.edges(), &mask);
    (mask, edges)
}

/// Precomputed penalties and weights for repeated view sampling.
///
/// The partition and graph are static during training, so `w_a` and `w_e`
/// are computed once and reused every epoch.
#[derive(Debug, Clone)]
pub struct Augmenter {
    attr_penalties: Vec<f64>,
    edge_weights: Vec<f64>,
}

impl Augmenter {
    pub fn new(g: &AttributedGraph, p: &Partition) -> Self {
        Augmenter {
            attr_penalties: attribute_penalties(g, p),
            edge_weights: edge_weights(g, p),
        }
    }

    pub fn attr_penalties(&self) -> &[f64] {
        &self.attr_penalties
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// Samples one view with the given probabilities, drawing the attribute
    /// mask first and the edge mask second.
    pub fn sample_view(
        &self,
        g: &AttributedGraph,
        p_a: f64,
        p_e: f64,
        rng: &mut ChaCha8Rng,
    ) -> GraphView {
        let attr_mask = sample_attr_mask(&self.attr_penalties, p_a, rng);
        let edge_mask = sample_edge_mask(&self.edge_weights, p_e, rng);
        GraphView {
            num_nodes: g.num_nodes(),
            attributes: apply_attr_mask(g.attributes(), &attr_mask),
            edges: apply_edge_mask(g.edges(), &edge_mask),
            attr_mask,
            edge_mask,
        }
    }

    /// Generates the paired views of one training epoch: view `k` uses
    /// `(p_a^(k), p_e^(k))`, with independent draws for the two views.
    pub fn generate_views(
        &self,
        g: &AttributedGraph,
        cfg: &AugmentationConfig,
        rng: &mut ChaCha8Rng,
    ) -> (GraphView, GraphView) {
        let v1 = self.sample_view(g, cfg.p_a1, cfg.p_e1, rng);
        let v2 = self.sample_view(g, cfg.p_a2, cfg.p_e2, rng);
        (v1, v2)
    }
}

/// Convenience wrapper building the [`Augmenter`] once and sampling a pair.
pub fn generate_views(
    g: &AttributedGraph,
    p: &Partition,
    cfg: &AugmentationConfig,
    rng: &mut ChaCha8Rng,
) -> (GraphView, GraphView) {
    Augmenter::new(g, p).generate_views(g, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::Partition;
    use crate::graph::AttributedGraph;
    use ndarray::{array, Array2};
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn normalize_attr_examples() {
        assert_eq!(normalize_attr(&[1.0, 2.0, 3.0]), vec![2.0, 1.0, 0.0]);
        assert_eq!(normalize_attr(&[5.0, 5.0, 5.0]), vec![1.0, 1.0, 1.0]);
        // element equal to the max maps to 0
        assert_eq!(normalize_attr(&[0.0, 4.0])[1], 0.0);
    }

    #[test]
    fn normalize_edge_examples() {
        assert_eq!(normalize_edge(&[1.0, 2.0, 3.0]), vec![0.0, 1.0, 2.0]);
        assert_eq!(normalize_edge(&[2.0, 2.0]), vec![1.0, 1.0]);
        // element equal to the min maps to 0
        assert_eq!(normalize_edge(&[1.0, 5.0])[0], 0.0);
    }

    fn two_triangles_bridge() -> (AttributedGraph, Partition) {
        // Triangles {0,1,2} and {3,4,5} joined by the bridge (2,3).
        let g = AttributedGraph::new(
            [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
            Array2::from_elem((6, 2), 1.0),
            None,
        )
        .unwrap();
        let p = Partition::from_assignment(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        (g, p)
    }

    #[test]
    fn penalty_identity_example() {
        // X = I_2, strengths [0.3, 0.1]: raw scores [0.3, 0.1], w_a = [0, 2].
        let g = AttributedGraph::new([(0, 1)], array![[1.0, 0.0], [0.0, 1.0]], None).unwrap();
        let p = Partition::with_strengths(vec![0, 1], vec![0.3, 0.1]);
        let w = attribute_penalties(&g, &p);
        assert!(w[0].abs() < 1e-12 && (w[1] - 2.0).abs() < 1e-12, "{w:?}");
    }

    #[test]
    fn penalty_single_community_ranking() {
        // One community: penalties rank opposite to column mass.
        let x = array![[3.0, 1.0, 0.5], [2.0, 1.0, 0.25]];
        let g = AttributedGraph::new([(0, 1)], x.clone(), None).unwrap();
        let p = Partition::with_strengths(vec![0, 0], vec![0.4]);
        let w = attribute_penalties(&g, &p);
        let mass: Vec<f64> = (0..3).map(|j| x.column(j).sum()).collect();
        assert!(mass[0] > mass[1] && mass[1] > mass[2]);
        assert!(w[0] < w[1] && w[1] < w[2]);
    }

    #[test]
    fn zero_column_excluded_and_kept() {
        let g = AttributedGraph::new(
            [(0, 1)],
            array![[1.0, 0.0, 2.0], [0.5, 0.0, 1.0]],
            None,
        )
        .unwrap();
        let p = Partition::with_strengths(vec![0, 0], vec![0.5]);
        let w = attribute_penalties(&g, &p);
        assert_eq!(w[1], 0.0);
        // masked never: keep-probability is 1 regardless of p_a
        for seed in 0..20 {
            let (mask, x) = cav(&g, &p, 1.0, &mut rng(seed));
            assert_eq!(mask[1], 1);
            assert_eq!(x.column(1).to_vec(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn cav_zero_probability_is_identity() {
        let (g, p) = two_triangles_bridge();
        let (mask, x) = cav(&g, &p, 0.0, &mut rng(3));
        assert!(mask.iter().all(|&m| m == 1));
        assert_eq!(&x, g.attributes());
    }

    #[test]
    fn cav_saturated_penalty_always_masks() {
        // w_a = 2 for the weak column of the identity example; p_a = 0.5
        // gives keep-probability 0.
        let g = AttributedGraph::new([(0, 1)], array![[1.0, 0.0], [0.0, 1.0]], None).unwrap();
        let p = Partition::with_strengths(vec![0, 1], vec![0.3, 0.1]);
        for seed in 0..20 {
            let (mask, _) = cav(&g, &p, 0.5, &mut rng(seed));
            assert_eq!(mask[1], 0);
        }
    }

    #[test]
    fn cav_only_zeroes_entries() {
        let (g, p) = two_triangles_bridge();
        let (_, x) = cav(&g, &p, 0.7, &mut rng(9));
        for (a, b) in x.iter().zip(g.attributes().iter()) {
            assert!(*a == 0.0 || a == b);
        }
    }

    #[test]
    fn edge_weights_bridge_example() {
        // Intra weights 5/28 raw -> 7/6 normalized; bridge -10/28 -> 0.
        let (g, p) = two_triangles_bridge();
        let raw = raw_edge_weights(&g, &p);
        let w = edge_weights(&g, &p);
        let bridge = g.edges().iter().position(|&e| e == (2, 3)).unwrap();
        for (i, &e) in raw.iter().enumerate() {
            if i == bridge {
                assert!((e - (-10.0 / 28.0)).abs() < 1e-15);
                assert_eq!(w[i], 0.0);
            } else {
                assert!((e - 5.0 / 28.0).abs() < 1e-15);
                assert!((w[i] - 7.0 / 6.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_weights_single_community_fallback() {
        let g = AttributedGraph::new(
            [(0, 1), (1, 2), (0, 2)],
            Array2::from_elem((3, 1), 1.0),
            None,
        )
        .unwrap();
        let p = Partition::from_assignment(&g, &[0, 0, 0]).unwrap();
        assert_eq!(edge_weights(&g, &p), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn ced_zero_probability_drops_everything() {
        let (g, p) = two_triangles_bridge();
        let (mask, edges) = ced(&g, &p, 0.0, &mut rng(0));
        assert!(mask.iter().all(|&m| m == 0));
        assert!(edges.is_empty());
    }

    #[test]
    fn ced_saturated_keeps_everything() {
        // Uniform weights (single community) with p_e = 1: every keep
        // probability clamps to 1.
        let g = AttributedGraph::new(
            [(0, 1), (1, 2), (0, 2)],
            Array2::from_elem((3, 1), 1.0),
            None,
        )
        .unwrap();
        let p = Partition::from_assignment(&g, &[0, 0, 0]).unwrap();
        let (mask, edges) = ced(&g, &p, 1.0, &mut rng(4));
        assert!(mask.iter().all(|&m| m == 1));
        assert_eq!(edges, g.edges());
    }

    #[test]
    fn ced_output_is_symmetric_subset() {
        let (g, p) = two_triangles_bridge();
        let a = Augmenter::new(&g, &p);
        let view = a.sample_view(&g, 0.3, 0.6, &mut rng(17));
        for e in view.edges() {
            assert!(g.edges().contains(e));
        }
        assert!(view.adjacency().is_symmetric());
    }

    #[test]
    fn views_deterministic_under_seed() {
        let (g, p) = two_triangles_bridge();
        let cfg = AugmentationConfig::new(0.4, 0.2, 0.5, 0.7);
        let pair1 = generate_views(&g, &p, &cfg, &mut rng(123));
        let pair2 = generate_views(&g, &p, &cfg, &mut rng(123));
        assert_eq!(pair1, pair2);
    }

    #[test]
    fn zero_config_keeps_attributes_drops_edges() {
        // p_a = 0 keeps every attribute; p_e = 0 gives keep-probability 0,
        // so the views agree with each other but carry no edges.
        let (g, p) = two_triangles_bridge();
        let cfg = AugmentationConfig::new(0.0, 0.0, 0.0, 0.0);
        let (v1, v2) = generate_views(&g, &p, &cfg, &mut rng(5));
        assert_eq!(v1.attributes(), g.attributes());
        assert_eq!(v2.attributes(), g.attributes());
        assert!(v1.edges().is_empty());
        assert_eq!(v1, v2);
    }

    #[test]
    fn sampler_calibration_smoke() {
        // 1000 i.i.d. columns at keep-probability ~0.7.
        let d = 1000;
        let x = Array2::from_elem((2, d), 1.0);
        let g = AttributedGraph::new([(0, 1)], x, None).unwrap();
        let p = Partition::with_strengths(vec![0, 0], vec![0.2]);
        // uniform penalties = 1 -> keep prob 1 - p_a
        let (mask, _) = cav(&g, &p, 0.3, &mut rng(77));
        let kept = mask.iter().filter(|&&m| m == 1).count() as f64 / d as f64;
        let sigma = (0.7 * 0.3 / d as f64).sqrt();
        assert!((kept - 0.7).abs() < 3.0 * sigma, "kept fraction {kept}");
    }
}
