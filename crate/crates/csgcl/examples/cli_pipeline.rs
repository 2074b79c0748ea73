//! End-to-end pipeline through the same entry points the `csgcl` binary
//! uses: write a dataset to disk, then detect -> train -> embed -> eval.
//!
//! ```bash
//! cargo run --release --example cli_pipeline
//! ```

use std::fs;

use csgcl::config::parse_config;
use csgcl::datasets::karate_club;
use csgcl::graph::{write_edge_list, write_matrix, ATTR_MAGIC};
use csgcl::pipeline::{run, Command};

fn main() {
    let dir = tempfile::tempdir().expect("temp workspace");
    let graph = karate_club();
    write_edge_list(&dir.path().join("edges.txt"), graph.edges()).unwrap();
    write_matrix(
        &dir.path().join("attributes.bin"),
        ATTR_MAGIC,
        graph.attributes(),
    )
    .unwrap();
    let labels: Vec<String> = graph
        .labels()
        .unwrap()
        .iter()
        .map(usize::to_string)
        .collect();
    fs::write(dir.path().join("labels.txt"), labels.join("\n") + "\n").unwrap();

    fs::write(
        dir.path().join("run.toml"),
        r#"[dataset]
edges = "edges.txt"
attributes = "attributes.bin"
labels = "labels.txt"

[train]
epochs = 300
learning_rate = 2e-4
hidden_dim = 16
activation = "prelu"
p_a1 = 0.1
p_a2 = 0.1
p_e1 = 0.3
p_e2 = 0.5
t0 = 1.0
gamma_max = 1.0
tau = 0.5
seed = 0

[eval]
repeats = 5
train_frac = 0.1
test_frac = 0.8
kmeans_k = 2
holdout_frac = 0.1
"#,
    )
    .unwrap();

    let cfg = parse_config(&dir.path().join("run.toml")).unwrap();
    for command in [Command::Detect, Command::Augment, Command::Train, Command::Embed] {
        run(command, &cfg).unwrap();
    }
    run(Command::Eval(None), &cfg).unwrap();

    println!("\nartifacts in {}:", cfg.output_dir.display());
    let mut names: Vec<String> = fs::read_dir(&cfg.output_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }
}
