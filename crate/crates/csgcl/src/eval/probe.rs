//! Linear probe: multinomial logistic regression with an l2 penalty,
//! trained by full-batch gradient descent on frozen, row-normalized
//! representations.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::report::{EvalReport, EvalTask, MetricSummary};
use crate::eval::{metrics, run_repeats};

/// Grid searched by [`linear_probe_auto`] on the validation slice.
pub const DEFAULT_L2_GRID: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

const SPLIT_RETRIES: usize = 50;
const GD_ITERATIONS: usize = 300;
const GD_LEARNING_RATE: f64 = 0.1;

/// Frozen-embedding classification with a fixed l2 penalty: per repeat,
/// draw a random split (train/test by the given fractions, the remainder
/// unused), fit, and score accuracy plus micro-/macro-F1. A split missing a
/// class in its training part is redrawn, with bounded retries.
pub fn linear_probe(
    z: &Array2<f64>,
    labels: &[usize],
    train_frac: f64,
    test_frac: f64,
    l2: f64,
    repeats: usize,
    seed: u64,
) -> Result<EvalReport> {
    probe_impl(z, labels, train_frac, test_frac, L2Choice::Fixed(l2), repeats, seed)
}

/// Like [`linear_probe`], but picks the l2 strength per repeat from
/// [`DEFAULT_L2_GRID`] by accuracy on the validation slice (the fraction
/// left over by train and test).
pub fn linear_probe_auto(
    z: &Array2<f64>,
    labels: &[usize],
    train_frac: f64,
    test_frac: f64,
    repeats: usize,
    seed: u64,
) -> Result<EvalReport> {
    probe_impl(z, labels, train_frac, test_frac, L2Choice::Grid, repeats, seed)
}

#[derive(Clone, Copy)]
enum L2Choice {
    Fixed(f64),
    Grid,
}

fn probe_impl(
    z: &Array2<f64>,
    labels: &[usize],
    train_frac: f64,
    test_frac: f64,
    l2: L2Choice,
    repeats: usize,
    seed: u64,
) -> Result<EvalReport> {
    if labels.len() != z.nrows() {
        return Err(Error::DimensionMismatch {
            what: "probe labels",
            expected: z.nrows(),
            found: labels.len(),
        });
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    if !(train_frac > 0.0 && test_frac > 0.0 && train_frac + test_frac <= 1.0 + 1e-12) {
        return Err(Error::InvalidConfig(
            "split fractions must be positive and sum to at most 1".into(),
        ));
    }
    let features = crate::eval::normalize_rows(z);
    let num_classes = labels.iter().copied().max().unwrap_or(0) + 1;

    let runs = run_repeats(repeats, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64 + 1);
        run_one_split(&features, labels, num_classes, train_frac, test_frac, l2, &mut rng)
    });
    let mut acc = Vec::with_capacity(repeats);
    let mut micro = Vec::with_capacity(repeats);
    let mut macro_ = Vec::with_capacity(repeats);
    for run in runs {
        let (a, mi, ma) = run?;
        acc.push(a);
        micro.push(mi);
        macro_.push(ma);
    }
    let split = match l2 {
        L2Choice::Fixed(v) => format!("train={train_frac} test={test_frac} l2={v} seed={seed}"),
        L2Choice::Grid => format!("train={train_frac} test={test_frac} l2=auto seed={seed}"),
    };
    Ok(EvalReport::new(EvalTask::Classification, repeats, split)
        .with_metric("accuracy", MetricSummary::over(&acc))
        .with_metric("micro_f1", MetricSummary::over(&micro))
        .with_metric("macro_f1", MetricSummary::over(&macro_)))
}

fn run_one_split(
    features: &Array2<f64>,
    labels: &[usize],
    num_classes: usize,
    train_frac: f64,
    test_frac: f64,
    l2: L2Choice,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64)> {
    let n = features.nrows();
    let train_count = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);
    let test_count = ((test_frac * n as f64).round() as usize).clamp(1, n - train_count);

    let mut order: Vec<usize> = (0..n).collect();
    let mut attempt = 0;
    let (train_idx, test_idx, val_idx) = loop {
        order.shuffle(rng);
        let train = &order[..train_count];
        let covered = {
            let mut seen = vec![false; num_classes];
            for &i in train {
                seen[labels[i]] = true;
            }
            // every class that exists anywhere must appear in training
            (0..num_classes).all(|c| seen[c] || !labels.contains(&c))
        };
        if covered {
            break (
                order[..train_count].to_vec(),
                order[train_count..train_count + test_count].to_vec(),
                order[train_count + test_count..].to_vec(),
            );
        }
        attempt += 1;
        if attempt >= SPLIT_RETRIES {
            return Err(Error::SplitRetriesExhausted {
                retries: SPLIT_RETRIES,
            });
        }
    };

    let fit_and_score = |l2: f64, eval_idx: &[usize]| -> (Model, f64) {
        let model = fit_softmax_regression(features, labels, &train_idx, num_classes, l2);
        let predicted = model.predict(features, eval_idx);
        let truth: Vec<usize> = eval_idx.iter().map(|&i| labels[i]).collect();
        let a = metrics::accuracy(&truth, &predicted);
        (model, a)
    };

    let model = match l2 {
        L2Choice::Fixed(v) => fit_and_score(v, &test_idx).0,
        L2Choice::Grid => {
            // Validation slice picks the penalty; first best wins ties.
            let val = if val_idx.is_empty() { &test_idx } else { &val_idx };
            let mut best: Option<(f64, Model)> = None;
            for &candidate in DEFAULT_L2_GRID.iter() {
                let (m, a) = fit_and_score(candidate, val);
                if best.as_ref().is_none_or(|(ba, _)| a > *ba) {
                    best = Some((a, m));
                }
            }
            best.expect("non-empty grid").1
        }
    };
    let predicted = model.predict(features, &test_idx);
    let truth: Vec<usize> = test_idx.iter().map(|&i| labels[i]).collect();
    let acc = metrics::accuracy(&truth, &predicted);
    let (micro, macro_f1) = metrics::f1_scores(&truth, &predicted);
    Ok((acc, micro, macro_f1))
}

struct Model {
    weights: Array2<f64>, // h x k
    bias: Array1<f64>,    // k
}

impl Model {
    fn predict(&self, features: &Array2<f64>, idx: &[usize]) -> Vec<usize> {
        idx.iter()
            .map(|&i| {
                let logits = features.row(i).dot(&self.weights) + &self.bias;
                argmax(logits.as_slice().unwrap())
            })
            .collect()
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Full-batch Adam on the convex softmax-regression objective
/// (cross-entropy plus `l2 * |W|^2`, bias unpenalized), zero-initialized.
fn fit_softmax_regression(
    features: &Array2<f64>,
    labels: &[usize],
    train_idx: &[usize],
    num_classes: usize,
    l2: f64,
) -> Model {
    let dim = features.ncols();
    let m = train_idx.len() as f64;
    let mut weights = Array2::<f64>::zeros((dim, num_classes));
    let mut bias = Array1::<f64>::zeros(num_classes);
    let (mut mw, mut vw) = (Array2::<f64>::zeros((dim, num_classes)), Array2::<f64>::zeros((dim, num_classes)));
    let (mut mb, mut vb) = (Array1::<f64>::zeros(num_classes), Array1::<f64>::zeros(num_classes));
    let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);

    for step in 1..=GD_ITERATIONS {
        let mut gw = Array2::<f64>::zeros((dim, num_classes));
        let mut gb = Array1::<f64>::zeros(num_classes);
        for &i in train_idx {
            let x = features.row(i);
            let mut logits = (x.dot(&weights) + &bias).to_vec();
            let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for l in logits.iter_mut() {
                *l = (*l - max).exp();
                total += *l;
            }
            for (c, l) in logits.iter().enumerate() {
                let residual = l / total - f64::from(labels[i] == c);
                gb[c] += residual / m;
                for (j, &xj) in x.iter().enumerate() {
                    gw[[j, c]] += residual * xj / m;
                }
            }
        }
        gw += &weights.mapv(|w| 2.0 * l2 * w);
        let bc1 = 1.0 - beta1_pow(beta1, step);
        let bc2 = 1.0 - beta1_pow(beta2, step);
        for ((w, g), (m1, v1)) in weights
            .iter_mut()
            .zip(gw.iter())
            .zip(mw.iter_mut().zip(vw.iter_mut()))
        {
            *m1 = beta1 * *m1 + (1.0 - beta1) * g;
            *v1 = beta2 * *v1 + (1.0 - beta2) * g * g;
            *w -= GD_LEARNING_RATE * (*m1 / bc1) / ((*v1 / bc2).sqrt() + eps);
        }
        for ((b, g), (m1, v1)) in bias
            .iter_mut()
            .zip(gb.iter())
            .zip(mb.iter_mut().zip(vb.iter_mut()))
        {
            *m1 = beta1 * *m1 + (1.0 - beta1) * g;
            *v1 = beta2 * *v1 + (1.0 - beta2) * g * g;
            *b -= GD_LEARNING_RATE * (*m1 / bc1) / ((*v1 / bc2).sqrt() + eps);
        }
    }
    Model { weights, bias }
}

fn beta1_pow(beta: f64, step: usize) -> f64 {
    beta.powi(step as i32)
}
