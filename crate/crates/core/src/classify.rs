//! Weighted-Euclidean nearest-mean classification and the evaluation
//! protocol (pooling, in-sample and repetition-split accuracy, confusion).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Pool, Vowel};
use crate::pipeline::{Method, Model, ModelOptions, PipelineError};
use crate::stats::{MeanSd, VowelStatistics};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("zero or negative SD in distance weights")]
    ZeroVariance,
    #[error("no vowel statistics to classify against")]
    NoClasses,
}

/// Squared weighted Euclidean distance on two dimensions.
pub fn wed(x: [f64; 2], mean: [f64; 2], sd: [f64; 2]) -> Result<f64, ClassifyError> {
    if !(sd[0] > 0.0 && sd[1] > 0.0) {
        return Err(ClassifyError::ZeroVariance);
    }
    Ok(((x[0] - mean[0]) / sd[0]).powi(2) + ((x[1] - mean[1]) / sd[1]).powi(2))
}

/// [`wed`] against the first two cells of a statistics row.
pub(crate) fn wed_rows(x: &[f64; 2], row: &[MeanSd]) -> Result<f64, ClassifyError> {
    wed(*x, [row[0].mean, row[1].mean], [row[0].sd, row[1].sd])
}

/// Closest vowel by WED² over the first two statistics dimensions. Ties go
/// to the lower vowel index.
pub fn nearest_vowel(x: [f64; 2], stats: &VowelStatistics) -> Result<(Vowel, f64), ClassifyError> {
    let mut best: Option<(Vowel, f64)> = None;
    for (vowel, row) in stats.iter() {
        let d = wed_rows(&x, row)?;
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((vowel, d));
        }
    }
    best.ok_or(ClassifyError::NoClasses)
}

/// Where the statistics come from and what is classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    /// Fit on the whole pool, classify the whole pool.
    InSample,
    /// Fit on repetition 1, classify repetition 2.
    TrainTest,
    /// Fit on repetition 1, classify repetition 1.
    TrainOnTrain,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::InSample => "insample",
            Split::TrainTest => "traintest",
            Split::TrainOnTrain => "trainontrain",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "insample" => Ok(Split::InSample),
            "traintest" => Ok(Split::TrainTest),
            "trainontrain" => Ok(Split::TrainOnTrain),
            _ => Err(format!(
                "unknown split `{s}` (expected insample, traintest or trainontrain)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("{method} needs the talker (or vowel) identity of every sample and cannot be evaluated with split {split}; use insample")]
    UnsupportedSplit { method: Method, split: Split },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Accuracy and confusion counts for one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub method: Method,
    pub pool: Pool,
    pub split: Split,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// `true vowel -> predicted vowel -> count`
    pub confusion: BTreeMap<Vowel, BTreeMap<Vowel, usize>>,
}

impl ClassificationReport {
    pub fn from_pairs(
        method: Method,
        pool: Pool,
        split: Split,
        pairs: impl IntoIterator<Item = (Vowel, Vowel)>,
    ) -> Self {
        let mut confusion: BTreeMap<Vowel, BTreeMap<Vowel, usize>> = BTreeMap::new();
        let (mut total, mut correct) = (0, 0);
        for (truth, predicted) in pairs {
            *confusion.entry(truth).or_default().entry(predicted).or_default() += 1;
            total += 1;
            correct += usize::from(truth == predicted);
        }
        Self {
            method,
            pool,
            split,
            total,
            correct,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            confusion,
        }
    }

    /// Sum of the confusion diagonal.
    pub fn trace(&self) -> usize {
        self.confusion
            .iter()
            .map(|(t, row)| row.get(t).copied().unwrap_or(0))
            .sum()
    }

    /// `correct/total`
    pub fn fraction(&self) -> String {
        format!("{}/{}", self.correct, self.total)
    }

    /// JSON with vowels keyed by their codes; key order is fixed.
    pub fn to_json(&self) -> String {
        let confusion: BTreeMap<String, BTreeMap<String, usize>> = self
            .confusion
            .iter()
            .map(|(t, row)| {
                (
                    t.code().to_string(),
                    row.iter().map(|(p, n)| (p.code().to_string(), *n)).collect(),
                )
            })
            .collect();
        let value = serde_json::json!({
            "method": self.method.name(),
            "pool": self.pool.name(),
            "split": self.split.name(),
            "total": self.total,
            "correct": self.correct,
            "accuracy": (self.accuracy * 1e4).round() / 1e4,
            "accuracy_fraction": self.fraction(),
            "confusion": confusion,
        });
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

/// Runs the whole pipeline for `method` on the `pool` portion of a working
/// corpus and tallies the predictions.
pub fn evaluate(
    corpus: &Corpus,
    method: Method,
    pool: Pool,
    split: Split,
    options: &ModelOptions,
) -> Result<ClassificationReport, EvaluateError> {
    if split != Split::InSample && method.needs_identity() {
        return Err(EvaluateError::UnsupportedSplit { method, split });
    }
    let pooled = corpus.pooled(pool)?;
    let (fit_on, eval_on) = match split {
        Split::InSample => (pooled.clone(), pooled),
        Split::TrainTest => pooled.split_repetitions()?,
        Split::TrainOnTrain => {
            let (train, _) = pooled.split_repetitions()?;
            (train.clone(), train)
        }
    };
    let model = Model::fit(method, &fit_on, options)?;
    let pairs = eval_on
        .iter()
        .map(|s| model.classify(s).map(|(v, _)| (s.vowel, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassificationReport::from_pairs(method, pool, split, pairs))
}
