//! Two-layer GCN encoder with a nonlinear projection head.
//!
//! Forward pass over a view with normalized adjacency `A^`:
//! `H1 = act(A^ X~ W1)`, `H2 = A^ H1 W2`, `Z = act(H2 P1) P2`.
//! `H2` is the representation retained for downstream tasks; `Z` feeds the
//! contrastive objective. There are no bias terms anywhere, so an all-zero
//! attribute matrix maps to exactly zero outputs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::augment::GraphView;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Magic bytes of the parameter checkpoint format.
pub const CHECKPOINT_MAGIC: &[u8; 4] = b"CSGP";

/// RReLU samples negative-branch slopes uniformly from this interval at
/// train time and uses the interval mean at eval time.
pub const RRELU_LO: f64 = 1.0 / 8.0;
pub const RRELU_HI: f64 = 1.0 / 3.0;

/// Nonlinearity used at both activation sites (after GCN layer 1 and inside
/// the projector).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    /// Leaky rectifier with a single learned slope shared network-wide.
    PRelu,
    /// Randomized leaky rectifier: per-element slopes in
    /// `[RRELU_LO, RRELU_HI]` at train time, the mean slope at eval time.
    RRelu,
}

impl Activation {
    pub fn parse(name: &str) -> Option<Activation> {
        match name.to_ascii_lowercase().as_str() {
            "relu" => Some(Activation::Relu),
            "prelu" => Some(Activation::PRelu),
            "rrelu" => Some(Activation::RRelu),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::PRelu => "prelu",
            Activation::RRelu => "rrelu",
        }
    }

    fn tag(&self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::PRelu => 1,
            Activation::RRelu => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Activation> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::PRelu),
            2 => Some(Activation::RRelu),
            _ => None,
        }
    }
}

/// Weights of the encoder and projection head.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    /// First GCN layer, `d x h`.
    pub w1: Array2<f64>,
    /// Second GCN layer, `h x h`.
    pub w2: Array2<f64>,
    /// Projector layers, both `h x h`.
    pub p1: Array2<f64>,
    pub p2: Array2<f64>,
    pub activation: Activation,
    /// Learned PReLU slope (ignored by the other activations).
    pub prelu_slope: f64,
}

impl EncoderParams {
    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.iter().all(|x| x.is_finite()))
            && self.prelu_slope.is_finite()
    }

    /// Weight matrices in checkpoint order: `W1, W2, P1, P2`.
    pub fn matrices(&self) -> [&Array2<f64>; 4] {
        [&self.w1, &self.w2, &self.p1, &self.p2]
    }

    pub fn matrices_mut(&mut self) -> [&mut Array2<f64>; 4] {
        [&mut self.w1, &mut self.w2, &mut self.p1, &mut self.p2]
    }

    /// Writes the `CSGP` checkpoint: magic, `d` and `h` as little-endian
    /// u64, the activation tag byte (PReLU followed by its slope), then
    /// `W1, W2, P1, P2` as little-endian f64 row-major.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&(self.input_dim() as u64).to_le_bytes())?;
        w.write_all(&(self.hidden_dim() as u64).to_le_bytes())?;
        w.write_all(&[self.activation.tag()])?;
        if self.activation == Activation::PRelu {
            w.write_all(&self.prelu_slope.to_le_bytes())?;
        }
        for m in self.matrices() {
            for &x in m.iter() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a checkpoint written by [`EncoderParams::save`].
    pub fn load(path: &Path) -> Result<EncoderParams> {
        let bytes = fs::read(path)?;
        let format_err = |detail: &str| Error::Format {
            path: path.to_path_buf(),
            detail: detail.into(),
        };
        if bytes.len() < 21 || &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(format_err("expected CSGP checkpoint magic"));
        }
        let d = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
        let h = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let activation =
            Activation::from_tag(bytes[20]).ok_or_else(|| format_err("unknown activation tag"))?;
        let mut offset = 21;
        let read_f64 = |off: &mut usize| -> Result<f64> {
            let end = *off + 8;
            if end > bytes.len() {
                return Err(format_err("truncated checkpoint"));
            }
            let v = f64::from_le_bytes(bytes[*off..end].try_into().unwrap());
            *off = end;
            Ok(v)
        };
        let prelu_slope = if activation == Activation::PRelu {
            read_f64(&mut offset)?
        } else {
            0.25
        };
        let read_matrix = |rows: usize, cols: usize, off: &mut usize| -> Result<Array2<f64>> {
            let mut m = Array2::zeros((rows, cols));
            for r in 0..rows {
                for c in 0..cols {
                    let end = *off + 8;
                    if end > bytes.len() {
                        return Err(format_err("truncated checkpoint"));
                    }
                    m[[r, c]] = f64::from_le_bytes(bytes[*off..end].try_into().unwrap());
                    *off = end;
                }
            }
            Ok(m)
        };
        let w1 = read_matrix(d, h, &mut offset)?;
        let w2 = read_matrix(h, h, &mut offset)?;
        let p1 = read_matrix(h, h, &mut offset)?;
        let p2 = read_matrix(h, h, &mut offset)?;
        if offset != bytes.len() {
            return Err(format_err("trailing bytes after checkpoint payload"));
        }
        let params = EncoderParams {
            w1,
            w2,
            p1,
            p2,
            activation,
            prelu_slope,
        };
        if !params.is_finite() {
            return Err(format_err("checkpoint contains non-finite weights"));
        }
        Ok(params)
    }
}

/// Glorot-uniform initialization, bounds `±sqrt(6 / (fan_in + fan_out))`,
/// deterministic under the seed. The PReLU slope starts at 0.25.
pub fn init_params(d: usize, h: usize, activation: Activation, seed: u64) -> EncoderParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    init_params_with_rng(d, h, activation, &mut rng)
}

pub(crate) fn init_params_with_rng(
    d: usize,
    h: usize,
    activation: Activation,
    rng: &mut ChaCha8Rng,
) -> EncoderParams {
    assert!(d >= 1 && h >= 1, "dimensions must be positive");
    let glorot = |fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        Array2::from_shape_fn((fan_in, fan_out), |_| dist.sample(rng))
    };
    EncoderParams {
        w1: glorot(d, h, rng),
        w2: glorot(h, h, rng),
        p1: glorot(h, h, rng),
        p2: glorot(h, h, rng),
        activation,
        prelu_slope: 0.25,
    }
}

/// Gradient of every trainable parameter, same shapes as [`EncoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub w2: Array2<f64>,
    pub p1: Array2<f64>,
    pub p2: Array2<f64>,
    pub prelu_slope: f64,
}

impl Gradients {
    pub fn zeros_like(params: &EncoderParams) -> Gradients {
        Gradients {
            w1: Array2::zeros(params.w1.dim()),
            w2: Array2::zeros(params.w2.dim()),
            p1: Array2::zeros(params.p1.dim()),
            p2: Array2::zeros(params.p2.dim()),
            prelu_slope: 0.0,
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        self.w1 += &other.w1;
        self.w2 += &other.w2;
        self.p1 += &other.p1;
        self.p2 += &other.p2;
        self.prelu_slope += other.prelu_slope;
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.iter().all(|x| x.is_finite()))
            && self.prelu_slope.is_finite()
    }

    pub fn norm(&self) -> f64 {
        let sq: f64 = self
            .matrices()
            .iter()
            .map(|m| m.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            + self.prelu_slope * self.prelu_slope;
        sq.sqrt()
    }

    /// Gradient matrices in the same order as [`EncoderParams::matrices`].
    pub fn matrices(&self) -> [&Array2<f64>; 4] {
        [&self.w1, &self.w2, &self.p1, &self.p2]
    }

    pub fn matrices_mut(&mut self) -> [&mut Array2<f64>; 4] {
        [&mut self.w1, &mut self.w2, &mut self.p1, &mut self.p2]
    }
}

/// Whether a forward pass samples RReLU slopes or uses the eval-mode mean.
pub enum ActivationMode<'r> {
    Eval,
    Train(&'r mut ChaCha8Rng),
}

/// Per-element negative-branch slopes for one activation site.
#[derive(Debug, Clone)]
enum SiteSlopes {
    /// ReLU (slope 0), PReLU (learned), or eval-mode RReLU (interval mean):
    /// one shared slope.
    Shared(f64),
    /// Train-mode RReLU: one sampled slope per element.
    Sampled(Array2<f64>),
}

impl SiteSlopes {
    fn get(&self, idx: (usize, usize)) -> f64 {
        match self {
            SiteSlopes::Shared(a) => *a,
            SiteSlopes::Sampled(m) => m[idx],
        }
    }
}

fn make_slopes(
    activation: Activation,
    prelu_slope: f64,
    shape: (usize, usize),
    mode: &mut ActivationMode,
) -> SiteSlopes {
    match activation {
        Activation::Relu => SiteSlopes::Shared(0.0),
        Activation::PRelu => SiteSlopes::Shared(prelu_slope),
        Activation::RRelu => match mode {
            ActivationMode::Eval => SiteSlopes::Shared((RRELU_LO + RRELU_HI) / 2.0),
            ActivationMode::Train(rng) => {
                let dist = Uniform::new(RRELU_LO, RRELU_HI);
                SiteSlopes::Sampled(Array2::from_shape_fn(shape, |_| dist.sample(rng)))
            }
        },
    }
}

fn apply_site(pre: &Array2<f64>, slopes: &SiteSlopes) -> Array2<f64> {
    let mut out = pre.clone();
    for (idx, v) in out.indexed_iter_mut() {
        if *v <= 0.0 {
            *v *= slopes.get(idx);
        }
    }
    out
}

/// Saved intermediates of one encoder forward pass, enough to run the
/// backward pass for that branch.
pub struct ForwardTape {
    a_hat: CsrMatrix,
    t1: Array2<f64>,
    u1: Array2<f64>,
    slopes1: SiteSlopes,
    t2: Array2<f64>,
    /// Pre-projection representation `H2` (downstream output).
    pub h2: Array2<f64>,
    u3: Array2<f64>,
    slopes3: SiteSlopes,
    h3: Array2<f64>,
    /// Projected embedding `Z` (objective input).
    pub z: Array2<f64>,
}

/// Runs the encoder and projector over a view, keeping the tape.
pub fn forward(params: &EncoderParams, view: &GraphView, mut mode: ActivationMode) -> ForwardTape {
    assert_eq!(
        view.attr_dim(),
        params.input_dim(),
        "view attribute width must match encoder input dim"
    );
    let n = view.num_nodes();
    let h = params.hidden_dim();
    let a_hat = view.normalized_adjacency();
    let t1 = a_hat.mul_dense(view.attributes());
    let u1 = t1.dot(&params.w1);
    let slopes1 = make_slopes(params.activation, params.prelu_slope, (n, h), &mut mode);
    let h1 = apply_site(&u1, &slopes1);
    let t2 = a_hat.mul_dense(&h1);
    let h2 = t2.dot(&params.w2);
    let u3 = h2.dot(&params.p1);
    let slopes3 = make_slopes(params.activation, params.prelu_slope, (n, h), &mut mode);
    let h3 = apply_site(&u3, &slopes3);
    let z = h3.dot(&params.p2);
    ForwardTape {
        a_hat,
        t1,
        u1,
        slopes1,
        t2,
        h2,
        u3,
        slopes3,
        h3,
        z,
    }
}

/// Node embeddings of one view: the downstream representation `H2` and the
/// projected matrix `Z` used by the contrastive objective.
#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub representation: Array2<f64>,
    pub projection: Array2<f64>,
}

/// Eval-mode encoding (deterministic for every activation, including RReLU).
pub fn encode(params: &EncoderParams, view: &GraphView) -> EncodeOutput {
    let tape = forward(params, view, ActivationMode::Eval);
    EncodeOutput {
        representation: tape.h2,
        projection: tape.z,
    }
}

/// Backward pass of one branch: given `dL/dZ`, accumulates parameter
/// gradients into `grads`.
///
/// Gradient flow: `Z = H3 P2`, `H3 = act(U3)`, `U3 = H2 P1`,
/// `H2 = (A^ H1) W2`, `H1 = act(U1)`, `U1 = (A^ X~) W1`; `A^` is symmetric,
/// so its transpose products reuse `mul_dense`.
pub fn backward(params: &EncoderParams, tape: &ForwardTape, d_z: &Array2<f64>, grads: &mut Gradients) {
    // Z = H3 P2
    grads.p2 += &tape.h3.t().dot(d_z);
    let d_h3 = d_z.dot(&params.p2.t());
    // H3 = act(U3)
    let d_u3 = backprop_site(&d_h3, &tape.u3, &tape.slopes3, params.activation, grads);
    // U3 = H2 P1
    grads.p1 += &tape.h2.t().dot(&d_u3);
    let d_h2 = d_u3.dot(&params.p1.t());
    // H2 = T2 W2
    grads.w2 += &tape.t2.t().dot(&d_h2);
    let d_t2 = d_h2.dot(&params.w2.t());
    // T2 = A^ H1
    let d_h1 = tape.a_hat.mul_dense(&d_t2);
    // H1 = act(U1)
    let d_u1 = backprop_site(&d_h1, &tape.u1, &tape.slopes1, params.activation, grads);
    // U1 = T1 W1
    grads.w1 += &tape.t1.t().dot(&d_u1);
}

fn backprop_site(
    upstream: &Array2<f64>,
    pre: &Array2<f64>,
    slopes: &SiteSlopes,
    activation: Activation,
    grads: &mut Gradients,
) -> Array2<f64> {
    let mut out = upstream.clone();
    for (idx, v) in out.indexed_iter_mut() {
        if pre[idx] <= 0.0 {
            if activation == Activation::PRelu {
                grads.prelu_slope += *v * pre[idx];
            }
            *v *= slopes.get(idx);
        }
    }
    out
}
