//! Contrastive objective: temperature-scaled cosine similarity, the
//! dynamic team-up fine-tuning of every similarity term by community
//! strength, and exact reverse-mode gradients through the shared encoder.
//!
//! With `gamma(t) = 0` the loss is exactly InfoNCE; afterwards every
//! similarity term `s_ij` is shifted by
//! `gamma(t) * (S_{c(i)} + S_{c(j)})` using clamped strengths. The loss is
//! symmetrized: computed with view 1 as anchor, again with view 2 as
//! anchor, and averaged.

use ndarray::{Array1, Array2};
use rand_chacha::ChaCha8Rng;

use crate::augment::GraphView;
use crate::community::Partition;
use crate::error::{Error, Result};
use crate::model::{backward, forward, ActivationMode, EncoderParams, Gradients};

/// Team-up schedule: `gamma(t) = min(max(0, t - t0), gamma_max)`, with `t`
/// the training time in units of 100 epochs, plus the similarity
/// temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeamupSchedule {
    /// Demarcation point between the individual and team-up phases.
    pub t0: f64,
    /// Saturation value of the strength coefficient.
    pub gamma_max: f64,
    /// Similarity temperature, strictly positive.
    pub tau: f64,
}

impl TeamupSchedule {
    pub fn new(t0: f64, gamma_max: f64, tau: f64) -> Self {
        let sched = TeamupSchedule { t0, gamma_max, tau };
        debug_assert!(sched.is_valid());
        sched
    }

    pub fn is_valid(&self) -> bool {
        self.tau > 0.0 && self.gamma_max >= 0.0 && self.t0 >= 0.0
    }
}

/// Hard-sigmoid strength coefficient `min(max(0, t - t0), gamma_max)`.
pub fn gamma(t: f64, sched: &TeamupSchedule) -> f64 {
    (t - sched.t0).max(0.0).min(sched.gamma_max)
}

/// Temperature-scaled cosine similarity `(z1 . z2) / (|z1| |z2| tau)`.
pub fn similarity(z1: &[f64], z2: &[f64], tau: f64) -> Result<f64> {
    let n1 = norm(z1);
    let n2 = norm(z2);
    if n1 <= 0.0 || !n1.is_finite() {
        return Err(Error::ZeroNormEmbedding { row: 0 });
    }
    if n2 <= 0.0 || !n2.is_finite() {
        return Err(Error::ZeroNormEmbedding { row: 1 });
    }
    let dot: f64 = z1.iter().zip(z2).map(|(a, b)| a * b).sum();
    Ok(dot / (n1 * n2 * tau))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Row-normalizes `z`, failing on any zero-norm (or non-finite) row.
fn normalize_rows(z: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    let n = z.nrows();
    let mut norms = Array1::zeros(n);
    let mut out = z.clone();
    for i in 0..n {
        let r = norm(z.row(i).as_slice().expect("standard layout"));
        if r <= 0.0 || !r.is_finite() {
            return Err(Error::ZeroNormEmbedding { row: i });
        }
        norms[i] = r;
        out.row_mut(i).mapv_inplace(|x| x / r);
    }
    Ok((out, norms))
}

/// Pairwise temperature-scaled cosine similarities,
/// `s_ij = sim(z1_i, z2_j) / tau`.
pub fn similarity_matrix(z1: &Array2<f64>, z2: &Array2<f64>, tau: f64) -> Result<Array2<f64>> {
    let (n1, _) = normalize_rows(z1)?;
    let (n2, _) = normalize_rows(z2)?;
    Ok(n1.dot(&n2.t()) / tau)
}

/// Similarities fine-tuned by community strength:
/// `s~_ij = s_ij + gamma_value * (S_{c(i)} + S_{c(j)})`.
pub fn finetuned_similarity_matrix(
    z1: &Array2<f64>,
    z2: &Array2<f64>,
    p: &Partition,
    gamma_value: f64,
    tau: f64,
) -> Result<Array2<f64>> {
    let mut s = similarity_matrix(z1, z2, tau)?;
    add_strength_shift(&mut s, p, gamma_value);
    Ok(s)
}

fn add_strength_shift(s: &mut Array2<f64>, p: &Partition, gamma_value: f64) {
    if gamma_value == 0.0 {
        return;
    }
    let n = s.nrows();
    for i in 0..n {
        let si = p.strength_of(i);
        for j in 0..s.ncols() {
            s[[i, j]] += gamma_value * (si + p.strength_of(j));
        }
    }
}

/// Softmax probability matrices of one direction: intra-view (zero
/// diagonal) and inter-view.
type DirectionProbs = (Array2<f64>, Array2<f64>);

/// One anchor direction of the loss over fine-tuned similarities: `intra`
/// holds the anchor view's self-similarities (diagonal excluded as
/// negatives), `inter` the cross-view similarities (diagonal positive).
///
/// Returns the per-anchor losses and, when `with_grad`, the softmax
/// probability matrices used by the backward pass.
fn direction(
    intra: &Array2<f64>,
    inter: &Array2<f64>,
    with_grad: bool,
) -> (f64, Option<DirectionProbs>) {
    let n = intra.nrows();
    let mut total = 0.0;
    let mut p_intra = with_grad.then(|| Array2::zeros((n, n)));
    let mut p_inter = with_grad.then(|| Array2::zeros((n, n)));
    for i in 0..n {
        let mut m = f64::NEG_INFINITY;
        for j in 0..n {
            if j != i {
                m = m.max(intra[[i, j]]);
            }
            m = m.max(inter[[i, j]]);
        }
        let mut denom = 0.0;
        for j in 0..n {
            if j != i {
                denom += (intra[[i, j]] - m).exp();
            }
            denom += (inter[[i, j]] - m).exp();
        }
        total += -inter[[i, i]] + m + denom.ln();
        if with_grad {
            let (pi, pe) = (p_intra.as_mut().unwrap(), p_inter.as_mut().unwrap());
            for j in 0..n {
                if j != i {
                    pi[[i, j]] = (intra[[i, j]] - m).exp() / denom;
                }
                pe[[i, j]] = (inter[[i, j]] - m).exp() / denom;
            }
        }
    }
    (total / n as f64, p_intra.zip(p_inter))
}

/// Team-up contrastive loss over the projected embeddings of two views at
/// training time `t`.
pub fn teamup_loss(
    z1: &Array2<f64>,
    z2: &Array2<f64>,
    p: &Partition,
    sched: &TeamupSchedule,
    t: f64,
) -> Result<f64> {
    teamup_loss_with_gamma(z1, z2, p, gamma(t, sched), sched.tau)
}

/// Team-up loss at an explicit strength coefficient.
pub fn teamup_loss_with_gamma(
    z1: &Array2<f64>,
    z2: &Array2<f64>,
    p: &Partition,
    gamma_value: f64,
    tau: f64,
) -> Result<f64> {
    let (loss, _, _) = loss_core(z1, z2, p, gamma_value, tau, false)?;
    Ok(loss)
}

/// Team-up loss together with its gradient with respect to both projected
/// embedding matrices.
pub fn teamup_loss_and_embedding_grad(
    z1: &Array2<f64>,
    z2: &Array2<f64>,
    p: &Partition,
    gamma_value: f64,
    tau: f64,
) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    let (loss, dz1, dz2) = loss_core(z1, z2, p, gamma_value, tau, true)?;
    Ok((loss, dz1.unwrap(), dz2.unwrap()))
}

#[allow(clippy::type_complexity)]
fn loss_core(
    z1: &Array2<f64>,
    z2: &Array2<f64>,
    p: &Partition,
    gamma_value: f64,
    tau: f64,
    with_grad: bool,
) -> Result<(f64, Option<Array2<f64>>, Option<Array2<f64>>)> {
    if z1.dim() != z2.dim() {
        return Err(Error::DimensionMismatch {
            what: "projected embeddings",
            expected: z1.nrows(),
            found: z2.nrows(),
        });
    }
    if z1.nrows() != p.assignment().len() {
        return Err(Error::DimensionMismatch {
            what: "partition vs embeddings",
            expected: z1.nrows(),
            found: p.assignment().len(),
        });
    }
    let n = z1.nrows();
    let (n1, norms1) = normalize_rows(z1)?;
    let (n2, norms2) = normalize_rows(z2)?;

    // Fine-tuned similarity matrices; the strength shift is identical for
    // every view pairing because membership is per node.
    let mut a11 = n1.dot(&n1.t()) / tau;
    let mut a12 = n1.dot(&n2.t()) / tau;
    let mut a22 = n2.dot(&n2.t()) / tau;
    add_strength_shift(&mut a11, p, gamma_value);
    add_strength_shift(&mut a12, p, gamma_value);
    add_strength_shift(&mut a22, p, gamma_value);

    // Anchor view 1 against view 2, then the swap; the cross matrix of the
    // swapped direction is the transpose of `a12`.
    let a21 = a12.t().to_owned();
    let (l1, probs1) = direction(&a11, &a12, with_grad);
    let (l2, probs2) = direction(&a22, &a21, with_grad);
    let loss = 0.5 * (l1 + l2);
    if !loss.is_finite() {
        return Err(Error::NonFinite {
            what: "contrastive loss".into(),
        });
    }
    if !with_grad {
        return Ok((loss, None, None));
    }

    let scale = 1.0 / (2.0 * n as f64 * tau);
    let (p_intra1, p_inter1) = probs1.unwrap();
    let (p_intra2, p_inter2) = probs2.unwrap();
    let eye = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 1.0 } else { 0.0 });

    // Gradients w.r.t. the cosine matrices (additive strength term is
    // parameter-free and contributes nothing).
    let d_c11 = p_intra1.mapv(|v| v * scale);
    let d_c22 = p_intra2.mapv(|v| v * scale);
    let d_c12 = (&p_inter1 - &eye).mapv(|v| v * scale)
        + (&p_inter2 - &eye).t().mapv(|v| v * scale);

    // C12 = N1 N2^T, C11 = N1 N1^T, C22 = N2 N2^T.
    let d_n1 = d_c12.dot(&n2) + (&d_c11 + &d_c11.t()).dot(&n1);
    let d_n2 = d_c12.t().dot(&n1) + (&d_c22 + &d_c22.t()).dot(&n2);

    // Through row normalization: dz = (dn - (dn . n^) n^) / |z|.
    let unnormalize = |d_n: Array2<f64>, nh: &Array2<f64>, norms: &Array1<f64>| {
        let mut out = d_n;
        for i in 0..n {
            let dot: f64 = out.row(i).iter().zip(nh.row(i)).map(|(a, b)| a * b).sum();
            let r = norms[i];
            for j in 0..out.ncols() {
                out[[i, j]] = (out[[i, j]] - dot * nh[[i, j]]) / r;
            }
        }
        out
    };
    let dz1 = unnormalize(d_n1, &n1, &norms1);
    let dz2 = unnormalize(d_n2, &n2, &norms2);
    Ok((loss, Some(dz1), Some(dz2)))
}

/// Exact reverse-mode gradients of `teamup_loss(encode(view1), encode(view2))`
/// with respect to the shared encoder parameters; the encoder gradient sums
/// both views' contributions.
///
/// `rrelu_rng` enables train-mode RReLU slope sampling; `None` runs both
/// forward passes in eval mode. Returns the loss alongside the gradients.
pub fn loss_gradients(
    params: &EncoderParams,
    view1: &GraphView,
    view2: &GraphView,
    p: &Partition,
    sched: &TeamupSchedule,
    t: f64,
    mut rrelu_rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Gradients)> {
    let mut run = |view: &GraphView| match rrelu_rng.as_deref_mut() {
        Some(rng) => forward(params, view, ActivationMode::Train(rng)),
        None => forward(params, view, ActivationMode::Eval),
    };
    let tape1 = run(view1);
    let tape2 = run(view2);
    let (loss, dz1, dz2) =
        teamup_loss_and_embedding_grad(&tape1.z, &tape2.z, p, gamma(t, sched), sched.tau)?;
    let mut grads = Gradients::zeros_like(params);
    backward(params, &tape1, &dz1, &mut grads);
    backward(params, &tape2, &dz2, &mut grads);
    if !grads.is_finite() {
        return Err(Error::NonFinite {
            what: "parameter gradients".into(),
        });
    }
    Ok((loss, grads))
}
