//! Downstream evaluation of frozen node representations: linear-probe
//! classification, k-means clustering scored by NMI, and cosine link
//! prediction scored by AUC and average precision.

mod kmeans;
mod link;
mod metrics;
mod probe;
mod report;

pub use kmeans::{kmeans, kmeans_nmi, kmeans_nmi_value};
pub use link::link_prediction;
pub use metrics::{accuracy, average_precision, f1_scores, normalized_mutual_information, roc_auc};
pub use probe::{linear_probe, linear_probe_auto, DEFAULT_L2_GRID};
pub use report::{EvalReport, EvalTask, MetricSummary};

/// Rows scaled to unit Euclidean norm; zero rows stay zero. Contrastive
/// training shapes directions rather than magnitudes, so embeddings are
/// length-normalized before clustering and probing.
pub fn normalize_rows(z: &ndarray::Array2<f64>) -> ndarray::Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
    out
}

/// Worker cap for independent evaluation repeats, from `CSGCL_THREADS`
/// (default 1). Results are per-repeat deterministic, so the cap changes
/// wall time only.
pub fn max_threads() -> usize {
    std::env::var("CSGCL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

/// Runs `repeats` independent jobs, spreading them over up to
/// [`max_threads`] workers. Output order follows the repeat index.
pub(crate) fn run_repeats<T, F>(repeats: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = max_threads().min(repeats.max(1));
    if threads <= 1 {
        return (0..repeats).map(job).collect();
    }
    let mut slots: Vec<Option<T>> = (0..repeats).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (worker, chunk) in slots.chunks_mut(repeats.div_ceil(threads)).enumerate() {
            let job = &job;
            let base = worker * repeats.div_ceil(threads);
            scope.spawn(move || {
                for (offset, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(job(base + offset));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("job ran")).collect()
}
