//! Cosine-similarity link prediction: held-out edges against sampled
//! non-edges, scored by AUC and average precision.

use std::collections::HashSet;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::metrics::{average_precision, roc_auc};
use crate::eval::report::{EvalReport, EvalTask, MetricSummary};
use crate::graph::AttributedGraph;
use crate::objective::similarity;

/// Holds out `ceil(holdout_frac * |E|)` edges as positives, samples an
/// equal number of distinct uniform non-edges as negatives, scores every
/// pair by the cosine similarity of its endpoint embeddings, and reports
/// AUC and AP.
pub fn link_prediction(
    z: &Array2<f64>,
    g: &AttributedGraph,
    holdout_frac: f64,
    seed: u64,
) -> Result<EvalReport> {
    if !(holdout_frac > 0.0 && holdout_frac < 1.0) {
        return Err(Error::InvalidConfig(
            "holdout_frac must be in (0, 1)".into(),
        ));
    }
    if g.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    if z.nrows() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "embeddings vs graph",
            expected: g.num_nodes(),
            found: z.nrows(),
        });
    }
    let n = g.num_nodes();
    let num_positives = ((holdout_frac * g.num_edges() as f64).ceil() as usize).max(1);
    let all_pairs = n * (n - 1) / 2;
    if all_pairs - g.num_edges() < num_positives {
        return Err(Error::GraphTooSmall(format!(
            "need {num_positives} non-edges, graph has {}",
            all_pairs - g.num_edges()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edge_order: Vec<usize> = (0..g.num_edges()).collect();
    edge_order.shuffle(&mut rng);
    let positives: Vec<(usize, usize)> = edge_order[..num_positives]
        .iter()
        .map(|&i| g.edges()[i])
        .collect();

    let edge_set: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    let mut negatives: Vec<(usize, usize)> = Vec::with_capacity(num_positives);
    let mut taken: HashSet<(usize, usize)> = HashSet::new();
    while negatives.len() < num_positives {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if edge_set.contains(&pair) || taken.contains(&pair) {
            continue;
        }
        taken.insert(pair);
        negatives.push(pair);
    }

    let score = |pairs: &[(usize, usize)]| -> Result<Vec<f64>> {
        pairs
            .iter()
            .map(|&(u, v)| {
                similarity(
                    z.row(u).as_slice().expect("standard layout"),
                    z.row(v).as_slice().expect("standard layout"),
                    1.0,
                )
            })
            .collect()
    };
    let pos_scores = score(&positives)?;
    let neg_scores = score(&negatives)?;

    Ok(EvalReport::new(
        EvalTask::LinkPrediction,
        1,
        format!("holdout={holdout_frac} positives={num_positives} seed={seed}"),
    )
    .with_metric(
        "auc",
        MetricSummary {
            mean: roc_auc(&pos_scores, &neg_scores),
            std: 0.0,
        },
    )
    .with_metric(
        "ap",
        MetricSummary {
            mean: average_precision(&pos_scores, &neg_scores),
            std: 0.0,
        },
    ))
}
