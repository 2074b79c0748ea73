//! Evaluation reports and their flat key-value serialization.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalTask {
    Classification,
    Clustering,
    LinkPrediction,
}

impl EvalTask {
    pub fn name(&self) -> &'static str {
        match self {
            EvalTask::Classification => "classification",
            EvalTask::Clustering => "clustering",
            EvalTask::LinkPrediction => "link_prediction",
        }
    }
}

/// Mean and standard deviation of one metric over the repeats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

impl MetricSummary {
    /// Population mean and standard deviation of the repeat values.
    pub fn over(values: &[f64]) -> MetricSummary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MetricSummary {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Metric summaries of one downstream task, plus the split descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: EvalTask,
    pub metrics: BTreeMap<String, MetricSummary>,
    pub repeats: usize,
    /// Human-readable split metadata (fractions, seed).
    pub split: String,
}

impl EvalReport {
    pub fn new(task: EvalTask, repeats: usize, split: String) -> EvalReport {
        EvalReport {
            task,
            metrics: BTreeMap::new(),
            repeats,
            split,
        }
    }

    pub fn with_metric(mut self, name: &str, summary: MetricSummary) -> EvalReport {
        self.metrics.insert(name.to_string(), summary);
        self
    }

    pub fn metric(&self, name: &str) -> Option<MetricSummary> {
        self.metrics.get(name).copied()
    }

    /// Flat `key = value` rendering, metric keys sorted.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("task = {}\n", self.task.name()));
        out.push_str(&format!("repeats = {}\n", self.repeats));
        out.push_str(&format!("split = {}\n", self.split));
        for (name, summary) in &self.metrics {
            out.push_str(&format!("metric.{name}.mean = {}\n", summary.mean));
            out.push_str(&format!("metric.{name}.std = {}\n", summary.std));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(self.to_key_value().as_bytes())?;
        w.flush()?;
        Ok(())
    }
}
