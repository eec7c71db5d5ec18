//! `key = value` task files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone, PartialEq)]
pub struct TaskFile {
    pub model: Option<PathBuf>,
    pub formula: Option<String>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub margin: Option<f64>,
    pub horizon: Option<usize>,
    pub batch: Option<u64>,
    pub max_samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl TaskFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read task file {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, dir).with_context(|| format!("in task file {}", path.display()))
    }

    /// Parses task text. Relative model and formula paths are resolved
    /// against `dir`.
    pub fn parse(text: &str, dir: &Path) -> Result<Self> {
        let mut task = TaskFile::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", n + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let num = |what: &str| -> Result<f64> {
                value.parse().with_context(|| format!("line {}: bad {what} `{value}`", n + 1))
            };
            let int = |what: &str| -> Result<u64> {
                value.parse().with_context(|| format!("line {}: bad {what} `{value}`", n + 1))
            };
            match key {
                "model" => task.model = Some(dir.join(value)),
                "formula" => {
                    let file = dir.join(value);
                    task.formula = Some(if file.is_file() {
                        std::fs::read_to_string(&file)?.trim().to_string()
                    } else {
                        value.to_string()
                    });
                }
                "alpha" => task.alpha = Some(num("alpha")?),
                "beta" => task.beta = Some(num("beta")?),
                "margin" => task.margin = Some(num("margin")?),
                "horizon" => task.horizon = Some(int("horizon")? as usize),
                "batch" => task.batch = Some(int("batch")?),
                "max_samples" => task.max_samples = Some(int("max_samples")?),
                "seed" => task.seed = Some(int("seed")?),
                "workers" => task.workers = Some(int("workers")? as usize),
                other => bail!("line {}: unknown key `{other}`", n + 1),
            }
        }
        Ok(task)
    }
}
