//! Community detection and community strength.
//!
//! The built-in detector is Louvain (seeded local moving plus aggregation).
//! External detectors such as Leiden plug in through partition files.
//! Community strength follows the per-community modularity contribution:
//! `S_c = |E_c| / |E| - (sum_{v in c} d(v))^2 / (4 |E|^2)`, clamped at zero
//! for downstream use.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Non-overlapping node partition with per-community strengths.
///
/// Stored strengths are clamped at zero; negative raw values mean the
/// community has no cohesive structure and would break the sign assumptions
/// of the strength-guided augmentations and objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<usize>,
    strength: Vec<f64>,
    num_communities: usize,
}

impl Partition {
    /// Builds a partition from a community assignment, computing clamped
    /// strengths from the graph. Ids are remapped to be dense in `[0, |C|)`
    /// in order of first appearance.
    pub fn from_assignment(g: &AttributedGraph, assignment: &[usize]) -> Result<Self> {
        if assignment.len() != g.num_nodes() {
            return Err(Error::DimensionMismatch {
                what: "community assignment",
                expected: g.num_nodes(),
                found: assignment.len(),
            });
        }
        let dense = remap_dense(assignment);
        let strength = community_strength(g, &dense)?;
        let num_communities = strength.len();
        Ok(Partition {
            assignment: dense,
            strength,
            num_communities,
        })
    }

    /// Builds a partition with explicitly supplied strengths. Used for
    /// ablations (e.g. replacing every strength by the mean) and tests.
    pub fn with_strengths(assignment: Vec<usize>, strength: Vec<f64>) -> Self {
        let num_communities = strength.len();
        debug_assert!(assignment.iter().all(|&c| c < num_communities));
        Partition {
            assignment,
            strength,
            num_communities,
        }
    }

    /// The same partition with every community's strength replaced by the
    /// mean strength, discarding the differences among communities.
    pub fn with_mean_strength(&self) -> Partition {
        let mean = self.strength.iter().sum::<f64>() / self.num_communities as f64;
        Partition {
            assignment: self.assignment.clone(),
            strength: vec![mean; self.num_communities],
            num_communities: self.num_communities,
        }
    }

    /// Community id of every node; ids are dense in `[0, |C|)`.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Clamped strength vector, one entry per community.
    pub fn strength(&self) -> &[f64] {
        &self.strength
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    /// Community id of node `v` (the indicator row `H_{v,:}` has a single 1
    /// at this index).
    pub fn community_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    /// Strength of the community node `v` belongs to (`H_{v,:} S`).
    pub fn strength_of(&self, v: usize) -> f64 {
        self.strength[self.assignment[v]]
    }

    /// Writes one community id per line, line index = node id.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for &c in &self.assignment {
            writeln!(w, "{c}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Remaps arbitrary community ids to dense `[0, |C|)` in order of first
/// appearance.
fn remap_dense(assignment: &[usize]) -> Vec<usize> {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut next = 0usize;
    assignment
        .iter()
        .map(|&c| {
            *map.entry(c).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Raw per-community strengths, before clamping:
/// `S_c = |E_c| / |E| - (sum_{v in c} d(v))^2 / (4 |E|^2)`.
///
/// `assignment` must use dense ids in `[0, |C|)`.
pub fn community_strength_raw(g: &AttributedGraph, assignment: &[usize]) -> Result<Vec<f64>> {
    let m = g.num_edges() as f64;
    if g.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let num_communities = assignment.iter().copied().max().map_or(0, |c| c + 1);
    let mut intra_edges = vec![0usize; num_communities];
    let mut degree_mass = vec![0usize; num_communities];
    for &(u, v) in g.edges() {
        if assignment[u] == assignment[v] {
            intra_edges[assignment[u]] += 1;
        }
    }
    for (v, d) in g.degree_vector().into_iter().enumerate() {
        degree_mass[assignment[v]] += d;
    }
    Ok((0..num_communities)
        .map(|c| {
            let mass = degree_mass[c] as f64;
            intra_edges[c] as f64 / m - (mass * mass) / (4.0 * m * m)
        })
        .collect())
}

/// Clamped per-community strengths (`max(S_c, 0)`), warning when a detector
/// emitted a community with no cohesive structure.
pub fn community_strength(g: &AttributedGraph, assignment: &[usize]) -> Result<Vec<f64>> {
    let raw = community_strength_raw(g, assignment)?;
    let clamped_count = raw.iter().filter(|&&s| s < 0.0).count();
    if clamped_count > 0 {
        log::warn!(
            "{clamped_count} of {} communities have non-positive strength; clamping to 0",
            raw.len()
        );
    }
    Ok(raw.into_iter().map(|s| s.max(0.0)).collect())
}

/// Newman modularity of a partition,
/// `Q = sum_c [ |E_c| / |E| - (sum_{v in c} d(v))^2 / (4 |E|^2) ]`,
/// computed by an edge sweep over the CSR adjacency.
pub fn modularity(g: &AttributedGraph, assignment: &[usize]) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let num_communities = assignment.iter().copied().max().map_or(0, |c| c + 1);
    // Directed sweep: every undirected intra-community edge is seen twice.
    let mut intra_directed = vec![0usize; num_communities];
    let mut degree_mass = vec![0usize; num_communities];
    for u in 0..g.num_nodes() {
        let mut degree = 0usize;
        for v in g.neighbors(u) {
            degree += 1;
            if assignment[u] == assignment[v] {
                intra_directed[assignment[u]] += 1;
            }
        }
        degree_mass[assignment[u]] += degree;
    }
    let two_m = (2 * g.num_edges()) as f64;
    Ok((0..num_communities)
        .map(|c| {
            intra_directed[c] as f64 / two_m - (degree_mass[c] as f64 / two_m).powi(2)
        })
        .sum())
}

/// Reads a partition file (one community id per line, node order) and
/// attaches clamped strengths for `g`.
pub fn import_partition(g: &AttributedGraph, path: &Path) -> Result<Partition> {
    let text = fs::read_to_string(path)?;
    let ids: Vec<usize> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(lineno, l)| {
            l.trim().parse::<usize>().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                detail: format!("line {}: non-integer community id", lineno + 1),
            })
        })
        .collect::<Result<_>>()?;
    if ids.len() != g.num_nodes() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            detail: format!(
                "partition has {} lines, graph has {} nodes",
                ids.len(),
                g.num_nodes()
            ),
        });
    }
    Partition::from_assignment(g, &ids)
}

/// Louvain community detection: seeded local moving plus graph aggregation,
/// iterated until no move improves modularity. After each multi-level cycle
/// converges, one more local-moving sweep runs at the finest level so
/// single nodes can still relocate between the aggregated communities; the
/// cycle repeats until that sweep finds nothing either.
///
/// Deterministic for a fixed seed; the node visit order of each level is
/// shuffled by the seeded generator, and ties in the local-moving gain keep
/// the first best candidate encountered.
pub fn louvain(g: &AttributedGraph, resolution: f64, seed: u64) -> Result<Partition> {
    const RESTARTS: usize = 5;
    if g.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = LevelGraph::from_graph(g);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..RESTARTS {
        let assignment = louvain_run(&base, g.num_nodes(), resolution, &mut rng);
        let q = modularity(g, &assignment)?;
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            best = Some((q, assignment));
        }
    }
    Partition::from_assignment(g, &best.expect("at least one restart").1)
}

/// One seeded Louvain run: visit orders come from `rng`.
fn louvain_run(
    base: &LevelGraph,
    num_nodes: usize,
    resolution: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut assignment: Vec<usize> = (0..num_nodes).collect();
    loop {
        // Finest-level sweep, initialized from the current partition.
        let (local, moved) = base.local_moving(&assignment, resolution, rng);
        if !moved {
            break;
        }
        let mut composed = remap_dense(&local);
        // Aggregation chain: communities become nodes, each starting alone.
        let community_count = composed.iter().copied().max().unwrap() + 1;
        let mut level = base.aggregate(&composed, community_count);
        loop {
            let singletons: Vec<usize> = (0..level.node_count()).collect();
            let (local, moved) = level.local_moving(&singletons, resolution, rng);
            if !moved {
                break;
            }
            let dense = remap_dense(&local);
            for a in composed.iter_mut() {
                *a = dense[*a];
            }
            let count = dense.iter().copied().max().unwrap() + 1;
            level = level.aggregate(&dense, count);
        }
        assignment = composed;
    }
    assignment
}

/// Weighted graph for one Louvain level. Neighbor lists are sorted so the
/// accumulation order of floating-point sums is reproducible.
struct LevelGraph {
    /// Sorted `(neighbor, weight)` lists, self-loops excluded.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight per node (internal weight of the aggregated group).
    loops: Vec<f64>,
    /// Total undirected weight `m`, self-loops counted once.
    total_weight: f64,
}

impl LevelGraph {
    fn from_graph(g: &AttributedGraph) -> Self {
        let n = g.num_nodes();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in g.edges() {
            adj[u].push((v, 1.0));
            adj[v].push((u, 1.0));
        }
        for list in adj.iter_mut() {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        LevelGraph {
            adj,
            loops: vec![0.0; n],
            total_weight: g.num_edges() as f64,
        }
    }

    fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Weighted degree: neighbor weights plus twice the self-loop.
    fn degree(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.loops[u]
    }

    /// One local-moving phase starting from `init`. Returns the community
    /// of every node and whether any node moved.
    ///
    /// Candidate moves are the neighboring communities plus isolation into
    /// an empty community; a move happens only on a strict modularity gain.
    fn local_moving(
        &self,
        init: &[usize],
        resolution: f64,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<usize>, bool) {
        const GAIN_EPS: f64 = 1e-12;
        let n = self.node_count();
        let m = self.total_weight;
        let mut community = init.to_vec();
        let degrees: Vec<f64> = (0..n).map(|u| self.degree(u)).collect();
        let mut tot = vec![0.0f64; n];
        let mut size = vec![0usize; n];
        for u in 0..n {
            tot[community[u]] += degrees[u];
            size[community[u]] += 1;
        }
        // Empty community ids, used as isolation targets.
        let mut empty: Vec<usize> = (0..n).rev().filter(|&c| size[c] == 0).collect();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut moved_any = false;
        loop {
            let mut moved_this_pass = false;
            for &u in &order {
                let current = community[u];
                // Links from u to each neighboring community, accumulated in
                // sorted-neighbor order; candidate order = first appearance.
                let mut weight_to: HashMap<usize, f64> = HashMap::new();
                let mut candidates: Vec<usize> = Vec::new();
                for &(v, w) in &self.adj[u] {
                    let c = community[v];
                    weight_to
                        .entry(c)
                        .and_modify(|acc| *acc += w)
                        .or_insert_with(|| {
                            candidates.push(c);
                            w
                        });
                }
                // Remove u from its community before evaluating gains.
                tot[current] -= degrees[u];
                size[current] -= 1;
                let gain = |c: usize| {
                    weight_to.get(&c).copied().unwrap_or(0.0) / m
                        - resolution * degrees[u] * tot[c] / (2.0 * m * m)
                };
                let stay_gain = gain(current);
                let mut best = current;
                let mut best_gain = stay_gain;
                for &c in &candidates {
                    if c == current {
                        continue;
                    }
                    let g = gain(c);
                    if g > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                // Isolation beats every negative-gain option.
                if best_gain < -GAIN_EPS && size[current] > 0 {
                    if let Some(&e) = empty.last() {
                        best = e;
                        empty.pop();
                    }
                }
                if size[current] == 0 && best != current {
                    empty.push(current);
                }
                tot[best] += degrees[u];
                size[best] += 1;
                if best != current {
                    community[u] = best;
                    moved_this_pass = true;
                    moved_any = true;
                }
            }
            if !moved_this_pass {
                break;
            }
        }
        (community, moved_any)
    }

    /// Collapses communities into single nodes, keeping internal weight as
    /// self-loops.
    fn aggregate(&self, dense_community: &[usize], community_count: usize) -> LevelGraph {
        let mut loops = vec![0.0; community_count];
        let mut cross: HashMap<(usize, usize), f64> = HashMap::new();
        let mut cross_order: Vec<(usize, usize)> = Vec::new();
        for u in 0..self.node_count() {
            let cu = dense_community[u];
            loops[cu] += self.loops[u];
            for &(v, w) in &self.adj[u] {
                if v < u {
                    continue; // undirected edge seen once
                }
                let cv = dense_community[v];
                if cu == cv {
                    loops[cu] += w;
                } else {
                    let key = (cu.min(cv), cu.max(cv));
                    cross
                        .entry(key)
                        .and_modify(|acc| *acc += w)
                        .or_insert_with(|| {
                            cross_order.push(key);
                            w
                        });
                }
            }
        }
        let mut adj = vec![Vec::new(); community_count];
        cross_order.sort_unstable();
        for key in cross_order {
            let w = cross[&key];
            adj[key.0].push((key.1, w));
            adj[key.1].push((key.0, w));
        }
        for list in adj.iter_mut() {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        LevelGraph {
            adj,
            loops,
            total_weight: self.total_weight,
        }
    }
}
