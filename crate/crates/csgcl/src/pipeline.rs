//! Pipeline stages behind the CLI subcommands: `detect`, `augment`,
//! `train`, `embed`, `eval`.
//!
//! Every artifact is written to a temporary name and renamed on success,
//! so a failing stage never leaves a partially written output behind.
//! Outputs are bitwise reproducible for a fixed config and seed.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::augment::{Augmenter, GraphView};
use crate::community::{import_partition, louvain, modularity, Partition};
use crate::config::{PartitionSource, RunConfig};
use crate::error::{Error, Result};
use crate::eval::{
    kmeans_nmi_value, linear_probe, linear_probe_auto, link_prediction, normalize_rows,
    EvalReport, EvalTask, MetricSummary,
};
use crate::graph::{
    load_dataset, read_matrix, write_edge_list, write_matrix, AttributedGraph, ATTR_MAGIC,
    EMBEDDING_MAGIC,
};
use crate::model::{encode, EncoderParams};
use crate::train::{train, write_metrics};

/// A pipeline subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Detect communities; write partition, strengths, and modularity.
    Detect,
    /// Sample one augmented view pair and dump views plus masks.
    Augment,
    /// Train the encoder; write checkpoint and loss trace.
    Train,
    /// Encode the unperturbed graph with a trained checkpoint.
    Embed,
    /// Evaluate stored embeddings; `None` runs every configured task.
    Eval(Option<EvalTask>),
}

impl Command {
    fn stage(&self) -> &'static str {
        match self {
            Command::Detect => "detect",
            Command::Augment => "augment",
            Command::Train => "train",
            Command::Embed => "embed",
            Command::Eval(_) => "eval",
        }
    }
}

/// Runs one subcommand, writing its artifacts under `cfg.output_dir`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<()> {
    let stage = command.stage();
    run_inner(command, cfg).map_err(|e| e.in_stage(stage))
}

fn run_inner(command: Command, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir)?;
    match command {
        Command::Detect => detect(cfg),
        Command::Augment => augment(cfg),
        Command::Train => train_stage(cfg),
        Command::Embed => embed(cfg),
        Command::Eval(task) => eval_stage(cfg, task),
    }
}

fn load(cfg: &RunConfig) -> Result<AttributedGraph> {
    load_dataset(
        &cfg.dataset.edges,
        &cfg.dataset.attributes,
        cfg.dataset.labels.as_deref(),
    )
}

fn partition_of(cfg: &RunConfig, g: &AttributedGraph) -> Result<Partition> {
    match &cfg.partition {
        PartitionSource::Louvain { resolution } => louvain(g, *resolution, cfg.train.seed),
        PartitionSource::File { path } => import_partition(g, path),
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

/// Writes through a `.tmp` sibling and renames into place on success.
fn write_atomic(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    write(&tmp)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_lines<T: std::fmt::Display>(path: &Path, values: &[T]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

fn detect(cfg: &RunConfig) -> Result<()> {
    let g = load(cfg)?;
    let p = partition_of(cfg, &g)?;
    let q = modularity(&g, p.assignment())?;
    write_atomic(&out_path(cfg, "partition.txt"), |tmp| p.write(tmp))?;
    write_atomic(&out_path(cfg, "strengths.txt"), |tmp| {
        write_lines(tmp, p.strength())
    })?;
    write_atomic(&out_path(cfg, "modularity.txt"), |tmp| {
        write_lines(tmp, &[q])
    })?;
    println!(
        "detect: {} communities, modularity {q:.6}",
        p.num_communities()
    );
    Ok(())
}

fn write_view(cfg: &RunConfig, view: &GraphView, tag: &str) -> Result<()> {
    write_atomic(&out_path(cfg, &format!("{tag}_edges.txt")), |tmp| {
        write_edge_list(tmp, view.edges())
    })?;
    write_atomic(&out_path(cfg, &format!("{tag}_attributes.bin")), |tmp| {
        write_matrix(tmp, ATTR_MAGIC, view.attributes())
    })?;
    write_atomic(&out_path(cfg, &format!("{tag}_attr_mask.txt")), |tmp| {
        write_lines(tmp, view.attr_mask())
    })?;
    write_atomic(&out_path(cfg, &format!("{tag}_edge_mask.txt")), |tmp| {
        write_lines(tmp, view.edge_mask())
    })?;
    Ok(())
}

fn augment(cfg: &RunConfig) -> Result<()> {
    let g = load(cfg)?;
    let p = partition_of(cfg, &g)?;
    let augmenter = Augmenter::new(&g, &p);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    rng.set_stream(1); // matches the first epoch of the training loop
    let (v1, v2) = augmenter.generate_views(&g, &cfg.train.aug, &mut rng);
    write_view(cfg, &v1, "view1")?;
    write_view(cfg, &v2, "view2")?;
    println!(
        "augment: view1 kept {}/{} edges, view2 kept {}/{}",
        v1.edges().len(),
        g.num_edges(),
        v2.edges().len(),
        g.num_edges()
    );
    Ok(())
}

fn train_stage(cfg: &RunConfig) -> Result<()> {
    let g = load(cfg)?;
    let p = partition_of(cfg, &g)?;
    let out = train(&g, &p, &cfg.train)?;
    write_atomic(&out_path(cfg, "checkpoint.bin"), |tmp| out.params.save(tmp))?;
    write_atomic(&out_path(cfg, "metrics.tsv"), |tmp| {
        write_metrics(tmp, &out.metrics)
    })?;
    if let Some(last) = out.metrics.last() {
        println!(
            "train: {} epochs, final loss {:.6}, gamma {:.4}",
            last.epoch, last.loss, last.gamma
        );
    } else {
        println!("train: 0 epochs, wrote the initialization");
    }
    Ok(())
}

fn embed(cfg: &RunConfig) -> Result<()> {
    let g = load(cfg)?;
    let params = EncoderParams::load(&out_path(cfg, "checkpoint.bin"))?;
    if params.input_dim() != g.attr_dim() {
        return Err(Error::DimensionMismatch {
            what: "checkpoint input width",
            expected: g.attr_dim(),
            found: params.input_dim(),
        });
    }
    let embeddings = encode(&params, &GraphView::identity(&g)).representation;
    write_atomic(&out_path(cfg, "embeddings.bin"), |tmp| {
        write_matrix(tmp, EMBEDDING_MAGIC, &embeddings)
    })?;
    println!(
        "embed: wrote {}x{} representation matrix",
        embeddings.nrows(),
        embeddings.ncols()
    );
    Ok(())
}

fn eval_stage(cfg: &RunConfig, only: Option<EvalTask>) -> Result<()> {
    let g = load(cfg)?;
    let z = read_matrix(&out_path(cfg, "embeddings.bin"), EMBEDDING_MAGIC)?;
    if z.nrows() != g.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "stored embeddings",
            expected: g.num_nodes(),
            found: z.nrows(),
        });
    }
    let tasks: Vec<EvalTask> = cfg
        .eval
        .tasks
        .iter()
        .copied()
        .filter(|t| only.is_none_or(|o| o == *t))
        .collect();
    if tasks.is_empty() {
        return Err(Error::InvalidConfig(
            "no eval task selected (check eval.tasks and --task)".into(),
        ));
    }
    let seed = cfg.train.seed;
    let need_labels = |task: &'static str| -> Result<&[usize]> {
        g.labels().ok_or_else(|| {
            Error::InvalidConfig(format!("{task} evaluation needs a label file"))
        })
    };
    for task in tasks {
        let report = match task {
            EvalTask::Classification => {
                let labels = need_labels("classification")?;
                match cfg.eval.l2 {
                    Some(l2) => linear_probe(
                        &z,
                        labels,
                        cfg.eval.train_frac,
                        cfg.eval.test_frac,
                        l2,
                        cfg.eval.repeats,
                        seed,
                    )?,
                    None => linear_probe_auto(
                        &z,
                        labels,
                        cfg.eval.train_frac,
                        cfg.eval.test_frac,
                        cfg.eval.repeats,
                        seed,
                    )?,
                }
            }
            EvalTask::Clustering => {
                let labels = need_labels("clustering")?;
                let k = match cfg.eval.kmeans_k {
                    Some(k) => k,
                    None => labels.iter().copied().max().unwrap_or(0) + 1,
                };
                let unit = normalize_rows(&z);
                let values = (0..cfg.eval.repeats)
                    .map(|r| kmeans_nmi_value(&unit, labels, k, seed.wrapping_add(r as u64)))
                    .collect::<Result<Vec<_>>>()?;
                EvalReport::new(
                    EvalTask::Clustering,
                    cfg.eval.repeats,
                    format!("k={k} seed={seed}"),
                )
                .with_metric("nmi", MetricSummary::over(&values))
            }
            EvalTask::LinkPrediction => {
                let repeats = cfg.eval.repeats;
                let mut aucs = Vec::with_capacity(repeats);
                let mut aps = Vec::with_capacity(repeats);
                for r in 0..repeats {
                    let rep =
                        link_prediction(&z, &g, cfg.eval.holdout_frac, seed.wrapping_add(r as u64))?;
                    aucs.push(rep.metric("auc").expect("auc present").mean);
                    aps.push(rep.metric("ap").expect("ap present").mean);
                }
                EvalReport::new(
                    EvalTask::LinkPrediction,
                    repeats,
                    format!("holdout={} seed={seed}", cfg.eval.holdout_frac),
                )
                .with_metric("auc", MetricSummary::over(&aucs))
                .with_metric("ap", MetricSummary::over(&aps))
            }
        };
        let name = format!("eval_{}.txt", task.name());
        write_atomic(&out_path(cfg, &name), |tmp| report.write(tmp))?;
        let summary: Vec<String> = report
            .metrics
            .iter()
            .map(|(k, v)| format!("{k}={:.4}+-{:.4}", v.mean, v.std))
            .collect();
        println!("eval {}: {}", task.name(), summary.join(" "));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::datasets::karate_club;
    use std::fs;

    fn karate_workspace(dir: &Path, extra: &str) -> RunConfig {
        let g = karate_club();
        write_edge_list(&dir.join("edges.txt"), g.edges()).unwrap();
        write_matrix(&dir.join("attributes.bin"), ATTR_MAGIC, g.attributes()).unwrap();
        let labels: Vec<String> = g.labels().unwrap().iter().map(|l| l.to_string()).collect();
        fs::write(dir.join("labels.txt"), labels.join("\n") + "\n").unwrap();
        let body = format!(
            "[dataset]\nedges = \"edges.txt\"\nattributes = \"attributes.bin\"\n\
             labels = \"labels.txt\"\n\n[train]\nepochs = 30\nhidden_dim = 8\n\
             learning_rate = 0.01\np_a1 = 0.1\np_a2 = 0.1\np_e1 = 0.3\np_e2 = 0.5\n\
             t0 = 0.05\ngamma_max = 1.0\ntau = 0.5\nseed = 7\n\n[eval]\nrepeats = 2\n\
             train_frac = 0.2\ntest_frac = 0.6\nl2 = 0.001\n{extra}\n[output]\ndir = \"out\"\n"
        );
        fs::write(dir.join("run.toml"), body).unwrap();
        parse_config(&dir.join("run.toml")).unwrap()
    }

    #[test]
    fn full_pipeline_produces_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = karate_workspace(tmp.path(), "");
        run(Command::Detect, &cfg).unwrap();
        run(Command::Augment, &cfg).unwrap();
        run(Command::Train, &cfg).unwrap();
        run(Command::Embed, &cfg).unwrap();
        run(Command::Eval(None), &cfg).unwrap();
        for name in [
            "partition.txt",
            "strengths.txt",
            "modularity.txt",
            "view1_edges.txt",
            "view2_attributes.bin",
            "checkpoint.bin",
            "metrics.tsv",
            "embeddings.bin",
            "eval_classification.txt",
            "eval_clustering.txt",
            "eval_link_prediction.txt",
        ] {
            assert!(cfg.output_dir.join(name).exists(), "{name} missing");
        }
        // no stray temp files
        for entry in fs::read_dir(&cfg.output_dir).unwrap() {
            let name = entry.unwrap().file_name();
            assert!(!name.to_string_lossy().ends_with(".tmp"), "{name:?}");
        }
    }

    #[test]
    fn eval_single_task_flag() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = karate_workspace(tmp.path(), "");
        run(Command::Train, &cfg).unwrap();
        run(Command::Embed, &cfg).unwrap();
        run(Command::Eval(Some(EvalTask::Clustering)), &cfg).unwrap();
        assert!(cfg.output_dir.join("eval_clustering.txt").exists());
        assert!(!cfg.output_dir.join("eval_classification.txt").exists());
    }

    #[test]
    fn embed_before_train_names_stage() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = karate_workspace(tmp.path(), "");
        let err = run(Command::Embed, &cfg).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("embed"), "{msg}");
    }

    #[test]
    fn artifacts_bitwise_reproducible() {
        let tmp1 = tempfile::tempdir().unwrap();
        let tmp2 = tempfile::tempdir().unwrap();
        let outputs = |dir: &Path| {
            let cfg = karate_workspace(dir, "");
            run(Command::Detect, &cfg).unwrap();
            run(Command::Train, &cfg).unwrap();
            run(Command::Embed, &cfg).unwrap();
            run(Command::Eval(None), &cfg).unwrap();
            cfg.output_dir
        };
        let out1 = outputs(tmp1.path());
        let out2 = outputs(tmp2.path());
        for name in [
            "partition.txt",
            "strengths.txt",
            "checkpoint.bin",
            "metrics.tsv",
            "embeddings.bin",
            "eval_classification.txt",
            "eval_clustering.txt",
            "eval_link_prediction.txt",
        ] {
            let a = fs::read(out1.join(name)).unwrap();
            let b = fs::read(out2.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
}
