//! Full-graph training loop: per-epoch view generation, shared-encoder
//! forward passes, team-up loss, and one bias-corrected Adam step.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::augment::{Augmenter, AugmentationConfig};
use crate::community::Partition;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::model::{init_params, Activation, EncoderParams, Gradients};
use crate::objective::{gamma, loss_gradients, TeamupSchedule};

/// Everything the training loop needs, mirroring the hyperparameter surface
/// of the method: augmentation probabilities, schedule, optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden_dim: usize,
    pub activation: Activation,
    pub aug: AugmentationConfig,
    pub sched: TeamupSchedule,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.learning_rate <= 0.0 {
            return bad("learning_rate must be > 0");
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be >= 1");
        }
        if !self.aug.in_range() {
            return bad("augmentation probabilities must be in [0, 1]");
        }
        if !self.sched.is_valid() {
            return bad("tau must be > 0 and t0, gamma_max must be >= 0");
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0 < b && b < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must be in (0, 1)")));
            }
        }
        if self.adam_eps <= 0.0 {
            return bad("adam_eps must be > 0");
        }
        Ok(())
    }
}

/// First and second moment estimates, one per parameter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Gradients,
    v: Gradients,
}

impl AdamState {
    pub fn new(params: &EncoderParams) -> Self {
        AdamState {
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
        }
    }
}

/// One bias-corrected Adam update, applied elementwise.
/// `step_index` starts at 1.
#[allow(clippy::too_many_arguments)]
pub fn adam_step(
    params: &mut EncoderParams,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step_index: usize,
) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFinite {
            what: "gradient passed to adam_step".into(),
        });
    }
    debug_assert!(step_index >= 1);
    let bc1 = 1.0 - beta1.powi(step_index as i32);
    let bc2 = 1.0 - beta2.powi(step_index as i32);
    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    let p_mats = params.matrices_mut();
    let m_mats = state.m.matrices_mut();
    let v_mats = state.v.matrices_mut();
    for k in 0..4 {
        let g_mat = grads.matrices()[k].clone();
        for ((p, &g), (m, v)) in p_mats[k]
            .iter_mut()
            .zip(g_mat.iter())
            .zip(m_mats[k].iter_mut().zip(v_mats[k].iter_mut()))
        {
            update(p, g, m, v);
        }
    }
    update(
        &mut params.prelu_slope,
        grads.prelu_slope,
        &mut state.m.prelu_slope,
        &mut state.v.prelu_slope,
    );
    Ok(())
}

/// Loss trace entry for one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub loss: f64,
    pub gamma: f64,
}

/// Trained parameters plus the per-epoch loss trace.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub params: EncoderParams,
    pub metrics: Vec<EpochMetrics>,
}

/// Runs the training loop: per epoch, sample two views (CAV + CED with the
/// per-view probabilities), encode both, take one Adam step on the team-up
/// loss at `t = epoch / 100`. Deterministic under `cfg.seed`.
pub fn train(g: &AttributedGraph, p: &Partition, cfg: &TrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    let mut params = init_params(g.attr_dim(), cfg.hidden_dim, cfg.activation, cfg.seed);
    // Separate stream so the epoch loop never overlaps the init draws.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let augmenter = Augmenter::new(g, p);
    let mut state = AdamState::new(&params);
    let mut metrics = Vec::with_capacity(cfg.epochs);
    // Aggressive dropping can isolate a node whose surviving attributes are
    // all masked, leaving it a zero embedding the loss rejects; such view
    // pairs are redrawn, like the resampling of degenerate eval splits.
    const VIEW_RETRIES: usize = 100;
    for epoch in 1..=cfg.epochs {
        let t = epoch as f64 / 100.0;
        let mut attempt = 0;
        let (loss, grads) = loop {
            let (v1, v2) = augmenter.generate_views(g, &cfg.aug, &mut rng);
            match loss_gradients(&params, &v1, &v2, p, &cfg.sched, t, Some(&mut rng)) {
                Ok(out) => break out,
                Err(Error::ZeroNormEmbedding { row }) if attempt < VIEW_RETRIES => {
                    attempt += 1;
                    log::warn!(
                        "epoch {epoch}: node {row} embedded to zero (isolated and fully \
                         masked); redrawing views (attempt {attempt})"
                    );
                }
                Err(Error::NonFinite { what }) => {
                    return Err(Error::NonFinite {
                        what: format!("{what} at epoch {epoch}"),
                    })
                }
                Err(other) => return Err(other),
            }
        };
        adam_step(
            &mut params,
            &grads,
            &mut state,
            cfg.learning_rate,
            cfg.adam_beta1,
            cfg.adam_beta2,
            cfg.adam_eps,
            epoch,
        )?;
        metrics.push(EpochMetrics {
            epoch,
            loss,
            gamma: gamma(t, &cfg.sched),
        });
    }
    Ok(TrainOutput { params, metrics })
}

/// Writes the loss trace: one `epoch<TAB>loss<TAB>gamma` line per epoch.
pub fn write_metrics(path: &Path, metrics: &[EpochMetrics]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for m in metrics {
        writeln!(w, "{}\t{}\t{}", m.epoch, m.loss, m.gamma)?;
    }
    w.flush()?;
    Ok(())
}
