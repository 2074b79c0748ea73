//! Lloyd's algorithm with k-means++ seeding, and the NMI clustering report.

#![allow(clippy::needless_range_loop)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::metrics::normalized_mutual_information;
use crate::eval::report::{EvalReport, EvalTask, MetricSummary};

const MAX_ITER: usize = 300;
const N_INIT: usize = 10;

/// Clusters the rows of `points` into `k` groups: `N_INIT` k-means++
/// seeded Lloyd runs, keeping the lowest-inertia result. Deterministic
/// under the seed (initialization and all tie-breaking included).
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.nrows();
    if k > n {
        return Err(Error::InvalidConfig(format!(
            "k-means with k={k} on {n} points"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k-means needs k >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..N_INIT {
        let assignment = lloyd(points, k, &mut rng);
        let score = inertia(points, &assignment, k);
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, assignment));
        }
    }
    Ok(best.expect("at least one init").1)
}

fn lloyd(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.nrows();
    let mut centers = plus_plus_seeding(points, k, rng);
    let mut assignment = vec![0usize; n];
    for _ in 0..MAX_ITER {
        // Assignment step; ties keep the lowest center index.
        let mut changed = false;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.rows().into_iter().enumerate() {
                let d = squared_distance(points.row(i).as_slice().unwrap(), center.as_slice().unwrap());
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        // Update step; an emptied cluster takes the point farthest from its
        // center.
        let dim = points.ncols();
        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignment[i]] += 1;
            let mut row = sums.row_mut(assignment[i]);
            row += &points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mut row = sums.row_mut(c);
                row.mapv_inplace(|v| v / counts[c] as f64);
            } else {
                let farthest = (0..n)
                    .max_by(|&a, &b| {
                        let da = squared_distance(
                            points.row(a).as_slice().unwrap(),
                            centers.row(assignment[a]).as_slice().unwrap(),
                        );
                        let db = squared_distance(
                            points.row(b).as_slice().unwrap(),
                            centers.row(assignment[b]).as_slice().unwrap(),
                        );
                        da.total_cmp(&db)
                    })
                    .expect("non-empty points");
                sums.row_mut(c).assign(&points.row(farthest));
                assignment[farthest] = c;
                changed = true;
            }
        }
        centers = sums;
        if !changed {
            break;
        }
    }
    assignment
}

/// Total squared distance of every point to its cluster mean.
fn inertia(points: &Array2<f64>, assignment: &[usize], k: usize) -> f64 {
    let dim = points.ncols();
    let mut centers = Array2::<f64>::zeros((k, dim));
    let mut counts = vec![0usize; k];
    for (i, &c) in assignment.iter().enumerate() {
        counts[c] += 1;
        let mut row = centers.row_mut(c);
        row += &points.row(i);
    }
    for c in 0..k {
        if counts[c] > 0 {
            let mut row = centers.row_mut(c);
            row.mapv_inplace(|v| v / counts[c] as f64);
        }
    }
    assignment
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            squared_distance(
                points.row(i).as_slice().unwrap(),
                centers.row(c).as_slice().unwrap(),
            )
        })
        .sum()
}

/// k-means++ seeding: first center uniform, the rest sampled with
/// probability proportional to the squared distance to the nearest chosen
/// center.
fn plus_plus_seeding(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centers = Array2::<f64>::zeros((k, dim));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut nearest = vec![f64::INFINITY; n];
    for c in 1..k {
        for i in 0..n {
            let d = squared_distance(
                points.row(i).as_slice().unwrap(),
                centers.row(c - 1).as_slice().unwrap(),
            );
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
        let total: f64 = nearest.iter().sum();
        let chosen = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.gen_range(0..n) // all points coincide with a center
        };
        centers.row_mut(c).assign(&points.row(chosen));
    }
    centers
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// NMI between a seeded k-means clustering of `z` and the labels.
pub fn kmeans_nmi_value(z: &Array2<f64>, labels: &[usize], k: usize, seed: u64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidConfig("clustering needs k >= 2".into()));
    }
    if labels.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            what: "clustering labels",
            expected: z.nrows(),
            found: labels.len(),
        });
    }
    let clusters = kmeans(z, k, seed)?;
    Ok(normalized_mutual_information(&clusters, labels))
}

/// Clustering report: k-means on the representations, scored by NMI
/// against the labels.
pub fn kmeans_nmi(z: &Array2<f64>, labels: &[usize], k: usize, seed: u64) -> Result<EvalReport> {
    let nmi = kmeans_nmi_value(z, labels, k, seed)?;
    Ok(
        EvalReport::new(EvalTask::Clustering, 1, format!("k={k} seed={seed}"))
            .with_metric("nmi", MetricSummary { mean: nmi, std: 0.0 }),
    )
}
