//! Aggregation of verdict records into per-model tables: accuracy by
//! transform, category means, token usage, accuracy drop against baseline,
//! and sequential decay. Emitted as fixed-layout CSV plus one JSON
//! document, byte-deterministic for identical inputs.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::Protocol;
use crate::scoring::{Verdict, VerdictRecord};
use crate::transform::{Category, TransformId};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no verdict records to aggregate")]
    EmptyInput,
    #[error("model '{0}' has no baseline row")]
    MissingBaseline(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformCell {
    pub model: String,
    pub transform: TransformId,
    pub category: Category,
    pub n: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub refusals: usize,
    pub cutoff_failures: usize,
    pub accuracy: f64,
    pub refusal_rate: f64,
    pub cutoff_rate: f64,
    pub mean_completion_tokens: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequentialCell {
    pub model: String,
    pub sequence_length: usize,
    pub n: usize,
    pub correct: usize,
    pub cutoff_correct: usize,
    pub accuracy: f64,
    pub refusal_rate: f64,
    pub mean_completion_tokens: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub model: String,
    pub category: Category,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRow {
    pub model: String,
    /// A transform name, or `average` for the per-model mean drop.
    pub transform: String,
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Category means weight each transform equally, not by sample count.
    pub category_weighting: String,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: ReportMetadata,
    pub transform_cells: Vec<TransformCell>,
    pub category_rows: Vec<CategoryRow>,
    pub sequential_cells: Vec<SequentialCell>,
}

#[derive(Default)]
struct Tally {
    n: usize,
    correct: usize,
    incorrect: usize,
    refusals: usize,
    cutoff_failures: usize,
    cutoff_correct: usize,
    completion_tokens: u64,
}

impl Tally {
    fn add(&mut self, verdict: Verdict, completion_tokens: u64) {
        self.n += 1;
        self.completion_tokens += completion_tokens;
        match verdict {
            Verdict::Correct => self.correct += 1,
            Verdict::Incorrect => self.incorrect += 1,
            Verdict::Refusal => self.refusals += 1,
            Verdict::CutoffFailure => self.cutoff_failures += 1,
            Verdict::CutoffCorrect => self.cutoff_correct += 1,
        }
    }

    fn mean_tokens(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.completion_tokens as f64 / self.n as f64
        }
    }
}

/// Collapse verdict records into per-cell statistics. Transform-protocol
/// accuracy is `correct / n`; sequential accuracy additionally counts
/// cutoff_correct as success.
pub fn aggregate(verdicts: &[VerdictRecord]) -> Result<RunReport, ReportError> {
    if verdicts.is_empty() {
        return Err(ReportError::EmptyInput);
    }

    let mut transform_tallies: BTreeMap<(String, TransformId), Tally> = BTreeMap::new();
    let mut sequential_tallies: BTreeMap<(String, usize), Tally> = BTreeMap::new();
    for record in verdicts {
        match record.protocol {
            Protocol::Sequential => {
                let k = record.sequence_length.unwrap_or(1);
                sequential_tallies
                    .entry((record.endpoint.clone(), k))
                    .or_default()
                    .add(record.verdict, record.completion_tokens);
            }
            _ => {
                let id = record.transform_id.unwrap_or(TransformId::Baseline);
                transform_tallies
                    .entry((record.endpoint.clone(), id))
                    .or_default()
                    .add(record.verdict, record.completion_tokens);
            }
        }
    }

    let mut transform_cells: Vec<TransformCell> = transform_tallies
        .into_iter()
        .map(|((model, transform), tally)| TransformCell {
            model,
            category: transform.category(),
            n: tally.n,
            correct: tally.correct,
            incorrect: tally.incorrect,
            refusals: tally.refusals,
            cutoff_failures: tally.cutoff_failures + tally.cutoff_correct,
            accuracy: tally.correct as f64 / tally.n as f64,
            refusal_rate: tally.refusals as f64 / tally.n as f64,
            cutoff_rate: (tally.cutoff_failures + tally.cutoff_correct) as f64 / tally.n as f64,
            mean_completion_tokens: tally.mean_tokens(),
            transform,
        })
        .collect();
    transform_cells.sort_by_key(|c| (c.model.clone(), transform_rank(c.transform)));

    let mut sequential_cells: Vec<SequentialCell> = sequential_tallies
        .into_iter()
        .map(|((model, sequence_length), tally)| SequentialCell {
            model,
            sequence_length,
            n: tally.n,
            correct: tally.correct,
            cutoff_correct: tally.cutoff_correct,
            accuracy: (tally.correct + tally.cutoff_correct) as f64 / tally.n as f64,
            refusal_rate: tally.refusals as f64 / tally.n as f64,
            mean_completion_tokens: tally.mean_tokens(),
        })
        .collect();
    sequential_cells.sort_by_key(|c| (c.model.clone(), c.sequence_length));

    let category_rows = category_means(&transform_cells);
    Ok(RunReport {
        metadata: ReportMetadata {
            category_weighting: "equal_transform".into(),
            samples: verdicts.len(),
        },
        transform_cells,
        category_rows,
        sequential_cells,
    })
}

fn transform_rank(id: TransformId) -> usize {
    TransformId::ALL.iter().position(|&t| t == id).unwrap_or(usize::MAX)
}

/// Per-model mean accuracy over the transforms of each category, every
/// transform weighted equally. Baseline (category none) is excluded.
fn category_means(cells: &[TransformCell]) -> Vec<CategoryRow> {
    let mut models: Vec<String> = cells.iter().map(|c| c.model.clone()).collect();
    models.sort();
    models.dedup();
    let mut rows = Vec::new();
    for model in &models {
        for category in Category::PERTURBATION_CATEGORIES {
            let accuracies: Vec<f64> = cells
                .iter()
                .filter(|c| &c.model == model && c.category == category)
                .map(|c| c.accuracy)
                .collect();
            if !accuracies.is_empty() {
                rows.push(CategoryRow {
                    model: model.clone(),
                    category,
                    mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
                });
            }
        }
    }
    rows
}

/// Per-transform accuracy drop below baseline for one model, then the mean
/// drop over the non-baseline transforms.
pub fn accuracy_drop(report: &RunReport, model: &str) -> Result<Vec<DropRow>, ReportError> {
    let baseline = report
        .transform_cells
        .iter()
        .find(|c| c.model == model && c.transform == TransformId::Baseline)
        .ok_or_else(|| ReportError::MissingBaseline(model.to_string()))?
        .accuracy;
    let mut rows = Vec::new();
    let mut drops = Vec::new();
    for cell in report
        .transform_cells
        .iter()
        .filter(|c| c.model == model && c.transform != TransformId::Baseline)
    {
        let drop = baseline - cell.accuracy;
        drops.push(drop);
        rows.push(DropRow {
            model: model.to_string(),
            transform: cell.transform.as_str().to_string(),
            drop,
        });
    }
    if !drops.is_empty() {
        rows.push(DropRow {
            model: model.to_string(),
            transform: "average".to_string(),
            drop: drops.iter().sum::<f64>() / drops.len() as f64,
        });
    }
    Ok(rows)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fraction(v: f64) -> String {
    format!("{v:.4}")
}

/// Write the six report files. Bytes are a pure function of the report.
pub fn emit(report: &RunReport, out_dir: &Path) -> Result<(), ReportError> {
    std::fs::create_dir_all(out_dir)?;

    let mut accuracy = String::from(
        "model,transform,category,n,accuracy,refusal_rate,cutoff_rate,mean_completion_tokens\n",
    );
    for c in &report.transform_cells {
        accuracy.push_str(&format!(
            "{},{},{},{},{},{},{},{:.1}\n",
            csv_field(&c.model),
            c.transform,
            c.category,
            c.n,
            fraction(c.accuracy),
            fraction(c.refusal_rate),
            fraction(c.cutoff_rate),
            c.mean_completion_tokens,
        ));
    }
    write_file(out_dir.join("accuracy.csv"), &accuracy)?;

    let mut category = String::from("model,category,mean_accuracy\n");
    for row in &report.category_rows {
        category.push_str(&format!(
            "{},{},{}\n",
            csv_field(&row.model),
            row.category,
            fraction(row.mean_accuracy)
        ));
    }
    write_file(out_dir.join("category.csv"), &category)?;

    let mut tokens = String::from("model,transform,mean_completion_tokens\n");
    for c in &report.transform_cells {
        tokens.push_str(&format!(
            "{},{},{:.1}\n",
            csv_field(&c.model),
            c.transform,
            c.mean_completion_tokens
        ));
    }
    write_file(out_dir.join("tokens.csv"), &tokens)?;

    let mut drop = String::from("model,transform,drop\n");
    let mut models: Vec<&str> = report
        .transform_cells
        .iter()
        .map(|c| c.model.as_str())
        .collect();
    models.sort();
    models.dedup();
    for model in models {
        if let Ok(rows) = accuracy_drop(report, model) {
            for row in rows {
                drop.push_str(&format!(
                    "{},{},{}\n",
                    csv_field(&row.model),
                    csv_field(&row.transform),
                    fraction(row.drop)
                ));
            }
        }
    }
    write_file(out_dir.join("drop.csv"), &drop)?;

    let mut sequential = String::from(
        "model,sequence_length,n,accuracy,refusal_rate,mean_completion_tokens\n",
    );
    for c in &report.sequential_cells {
        sequential.push_str(&format!(
            "{},{},{},{},{},{:.1}\n",
            csv_field(&c.model),
            c.sequence_length,
            c.n,
            fraction(c.accuracy),
            fraction(c.refusal_rate),
            c.mean_completion_tokens,
        ));
    }
    write_file(out_dir.join("sequential.csv"), &sequential)?;

    let json = serde_json::to_string_pretty(report)
        .map_err(|e| ReportError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
    write_file(out_dir.join("report.json"), &format!("{json}\n"))?;
    Ok(())
}

fn write_file(path: std::path::PathBuf, content: &str) -> Result<(), ReportError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(content.as_bytes())?;
    Ok(())
}
