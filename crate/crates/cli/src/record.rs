//! Output records and their CSV or JSON-lines encoding.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;

use hypersmc::sprt::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

/// One sequential check.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub target: String,
    pub formula: String,
    pub alpha: f64,
    pub beta: f64,
    pub margin: f64,
    pub horizon: Option<usize>,
    pub batch: u64,
    pub max_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub verdict: &'static str,
    pub samples: u64,
    pub llr: f64,
    /// Left empty under `--no-time`.
    pub seconds: Option<f64>,
}

/// One bench table row.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub study: String,
    pub params: String,
    pub alpha: f64,
    pub beta: f64,
    pub margin: f64,
    pub runs: u64,
    pub reference: &'static str,
    pub reference_source: &'static str,
    pub accuracy: f64,
    pub undecided: u64,
    pub mean_samples: f64,
    pub mean_seconds: Option<f64>,
}

/// One line of exact oracle output.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub kind: &'static str,
    pub term: String,
    pub value: String,
}

pub fn verdict_name(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::AssertH1 => "AssertH1",
        Outcome::AssertH0 => "AssertH0",
        Outcome::Undecided => "Undecided",
    }
}

pub enum Sink<W: Write> {
    Csv(csv::Writer<W>),
    Jsonl(W),
}

impl<W: Write> Sink<W> {
    pub fn new(format: Format, out: W) -> Self {
        match format {
            Format::Csv => Sink::Csv(csv::Writer::from_writer(out)),
            Format::Jsonl => Sink::Jsonl(out),
        }
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        match self {
            Sink::Csv(w) => {
                w.serialize(record)?;
                w.flush()?;
            }
            Sink::Jsonl(w) => {
                serde_json::to_writer(&mut *w, record)?;
                w.write_all(b"\n")?;
                w.flush()?;
            }
        }
        Ok(())
    }
}
