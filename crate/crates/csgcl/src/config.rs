//! Run configuration: a flat `key = value` file with `[dataset]`,
//! `[partition]`, `[train]`, `[eval]`, and `[output]` sections. Unknown
//! keys are rejected; missing optional keys take the documented defaults
//! (printable through `--print-defaults`).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::augment::AugmentationConfig;
use crate::error::{Error, Result};
use crate::eval::EvalTask;
use crate::model::Activation;
use crate::objective::TeamupSchedule;
use crate::train::TrainConfig;

/// Where the node partition comes from: the built-in detector or a file
/// produced by an external detector (one community id per line).
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSource {
    Louvain { resolution: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPaths {
    pub edges: PathBuf,
    pub attributes: PathBuf,
    pub labels: Option<PathBuf>,
    pub as_undirected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub tasks: Vec<EvalTask>,
    pub train_frac: f64,
    pub test_frac: f64,
    /// Fixed l2 penalty; `None` selects from the grid on the validation
    /// slice.
    pub l2: Option<f64>,
    pub repeats: usize,
    /// Cluster count; `None` uses the number of label classes.
    pub kmeans_k: Option<usize>,
    pub holdout_frac: f64,
}

/// Validated configuration of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetPaths,
    pub partition: PartitionSource,
    pub train: TrainConfig,
    pub eval: EvalOptions,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// CLI `--seed` override.
    pub fn override_seed(&mut self, seed: u64) {
        self.train.seed = seed;
    }

    /// CLI `--out` override.
    pub fn override_output(&mut self, dir: PathBuf) {
        self.output_dir = dir;
    }

    /// CLI `--as-undirected` override.
    pub fn override_as_undirected(&mut self) {
        self.dataset.as_undirected = true;
    }
}

/// Parses and validates a config file. Dataset paths (and the partition
/// file, when used) must exist at parse time.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let raw: RawConfig = toml::from_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    raw.validate(base)
}

/// The default config template, with documented defaults filled in.
pub fn default_config_toml() -> String {
    let d = RawTrain::default();
    format!(
        r#"# csgcl run configuration

[dataset]
edges = "edges.txt"            # whitespace `u v` pairs, # comments allowed
attributes = "attributes.csv"  # csv rows, or CSGM binary
# labels = "labels.txt"        # one class id per line (optional)
# as_undirected = false        # directed input: reverse edges are added

[partition]
source = "louvain"             # "louvain" | "file"
# path = "partition.txt"       # required when source = "file"
resolution = 1.0

[train]
epochs = {epochs}
learning_rate = {lr}
hidden_dim = {hidden}
activation = "{act}"           # relu | prelu | rrelu
p_a1 = {pa1}
p_a2 = {pa2}
p_e1 = {pe1}
p_e2 = {pe2}
t0 = {t0}
gamma_max = {gmax}
tau = {tau}
seed = {seed}
adam_beta1 = {b1}
adam_beta2 = {b2}
adam_eps = {eps}

[eval]
tasks = ["classification", "clustering", "link_prediction"]
train_frac = 0.1
test_frac = 0.8
# l2 = 0.01                    # omit to grid-search on the validation slice
repeats = 10
# kmeans_k = 0                 # omit to use the number of label classes
holdout_frac = 0.1

[output]
dir = "out"
"#,
        epochs = d.epochs,
        lr = d.learning_rate,
        hidden = d.hidden_dim,
        act = d.activation,
        pa1 = d.p_a1,
        pa2 = d.p_a2,
        pe1 = d.p_e1,
        pe2 = d.p_e2,
        t0 = d.t0,
        gmax = d.gamma_max,
        tau = d.tau,
        seed = d.seed,
        b1 = d.adam_beta1,
        b2 = d.adam_beta2,
        eps = d.adam_eps,
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dataset: RawDataset,
    #[serde(default)]
    partition: RawPartition,
    #[serde(default)]
    train: RawTrain,
    #[serde(default)]
    eval: RawEval,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    edges: PathBuf,
    attributes: PathBuf,
    labels: Option<PathBuf>,
    #[serde(default)]
    as_undirected: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    source: String,
    path: Option<PathBuf>,
    resolution: Option<f64>,
}

impl Default for RawPartition {
    fn default() -> Self {
        RawPartition {
            source: "louvain".into(),
            path: None,
            resolution: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTrain {
    epochs: usize,
    learning_rate: f64,
    hidden_dim: usize,
    activation: String,
    p_a1: f64,
    p_a2: f64,
    p_e1: f64,
    p_e2: f64,
    t0: f64,
    gamma_max: f64,
    tau: f64,
    seed: u64,
    adam_beta1: f64,
    adam_beta2: f64,
    adam_eps: f64,
}

impl Default for RawTrain {
    fn default() -> Self {
        RawTrain {
            epochs: 2000,
            learning_rate: 0.01,
            hidden_dim: 256,
            activation: "prelu".into(),
            p_a1: 0.2,
            p_a2: 0.2,
            p_e1: 0.2,
            p_e2: 0.2,
            t0: 10.0,
            gamma_max: 1.0,
            tau: 0.5,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawEval {
    tasks: Vec<String>,
    train_frac: f64,
    test_frac: f64,
    l2: Option<f64>,
    repeats: usize,
    kmeans_k: Option<usize>,
    holdout_frac: f64,
}

impl Default for RawEval {
    fn default() -> Self {
        RawEval {
            tasks: vec![
                "classification".into(),
                "clustering".into(),
                "link_prediction".into(),
            ],
            train_frac: 0.1,
            test_frac: 0.8,
            l2: None,
            repeats: 10,
            kmeans_k: None,
            holdout_frac: 0.1,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: PathBuf,
}

impl Default for RawOutput {
    fn default() -> Self {
        RawOutput { dir: "out".into() }
    }
}

impl RawConfig {
    fn validate(self, base: &Path) -> Result<RunConfig> {
        let resolve = |p: &Path| -> PathBuf {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let must_exist = |p: PathBuf, what: &str| -> Result<PathBuf> {
            if p.exists() {
                Ok(p)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{what} path does not exist: {}",
                    p.display()
                )))
            }
        };
        let dataset = DatasetPaths {
            edges: must_exist(resolve(&self.dataset.edges), "edges")?,
            attributes: must_exist(resolve(&self.dataset.attributes), "attributes")?,
            labels: self
                .dataset
                .labels
                .map(|p| must_exist(resolve(&p), "labels"))
                .transpose()?,
            as_undirected: self.dataset.as_undirected,
        };

        let partition = match self.partition.source.as_str() {
            "louvain" => {
                if self.partition.path.is_some() {
                    return Err(Error::InvalidConfig(
                        "partition.path is only valid with source = \"file\"".into(),
                    ));
                }
                let resolution = self.partition.resolution.unwrap_or(1.0);
                if resolution <= 0.0 {
                    return Err(Error::InvalidConfig("resolution must be > 0".into()));
                }
                PartitionSource::Louvain { resolution }
            }
            "file" => {
                if self.partition.resolution.is_some() {
                    return Err(Error::InvalidConfig(
                        "partition.resolution is only valid with source = \"louvain\"".into(),
                    ));
                }
                let path = self.partition.path.ok_or_else(|| {
                    Error::InvalidConfig("partition.path required when source = \"file\"".into())
                })?;
                PartitionSource::File {
                    path: must_exist(resolve(&path), "partition")?,
                }
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown partition source `{other}` (expected louvain or file)"
                )))
            }
        };

        let activation = Activation::parse(&self.train.activation).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown activation `{}` (expected relu, prelu, or rrelu)",
                self.train.activation
            ))
        })?;
        let t = &self.train;
        for (name, p) in [
            ("p_a1", t.p_a1),
            ("p_a2", t.p_a2),
            ("p_e1", t.p_e1),
            ("p_e2", t.p_e2),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("{name} must be in [0, 1]")));
            }
        }
        if t.tau <= 0.0 {
            return Err(Error::InvalidConfig("tau must be > 0".into()));
        }
        if t.t0 < 0.0 || t.gamma_max < 0.0 {
            return Err(Error::InvalidConfig("t0 and gamma_max must be >= 0".into()));
        }
        let train = TrainConfig {
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            hidden_dim: t.hidden_dim,
            activation,
            aug: AugmentationConfig {
                p_a1: t.p_a1,
                p_a2: t.p_a2,
                p_e1: t.p_e1,
                p_e2: t.p_e2,
            },
            sched: TeamupSchedule {
                t0: t.t0,
                gamma_max: t.gamma_max,
                tau: t.tau,
            },
            seed: t.seed,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_eps: t.adam_eps,
        };
        train.validate()?;

        let e = &self.eval;
        let tasks = e
            .tasks
            .iter()
            .map(|name| match name.as_str() {
                "classification" => Ok(EvalTask::Classification),
                "clustering" => Ok(EvalTask::Clustering),
                "link_prediction" => Ok(EvalTask::LinkPrediction),
                other => Err(Error::InvalidConfig(format!("unknown eval task `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if !(e.train_frac > 0.0 && e.test_frac > 0.0 && e.train_frac + e.test_frac <= 1.0) {
            return Err(Error::InvalidConfig(
                "eval fractions must be positive and sum to at most 1".into(),
            ));
        }
        if let Some(l2) = e.l2 {
            if l2 < 0.0 {
                return Err(Error::InvalidConfig("l2 must be >= 0".into()));
            }
        }
        if e.repeats == 0 {
            return Err(Error::InvalidConfig("eval.repeats must be >= 1".into()));
        }
        if !(e.holdout_frac > 0.0 && e.holdout_frac < 1.0) {
            return Err(Error::InvalidConfig("holdout_frac must be in (0, 1)".into()));
        }
        if let Some(k) = e.kmeans_k {
            if k < 2 {
                return Err(Error::InvalidConfig("kmeans_k must be >= 2".into()));
            }
        }
        let eval = EvalOptions {
            tasks,
            train_frac: e.train_frac,
            test_frac: e.test_frac,
            l2: e.l2,
            repeats: e.repeats,
            kmeans_k: e.kmeans_k,
            holdout_frac: e.holdout_frac,
        };

        Ok(RunConfig {
            dataset,
            partition,
            train,
            eval,
            output_dir: resolve(&self.output.dir),
        })
    }
}
