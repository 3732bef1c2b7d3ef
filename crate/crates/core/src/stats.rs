//! Vowel- and speaker-conditional formant statistics.
//!
//! Every spread is a population SD (denominator N).

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, FormantSample, Vowel};
use crate::scales::{to_space, ScaleError, Space};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("insufficient samples for {0}")]
    InsufficientSamples(String),
    #[error("zero variance for {what}, formant {formant}")]
    ZeroVariance { what: String, formant: usize },
    #[error("no statistics for vowel {0}")]
    MissingVowel(Vowel),
    #[error("speaker {speaker} has no {vowel} samples for the corner construction")]
    MissingCorner { speaker: u32, vowel: Vowel },
    #[error("no statistics for speaker {0}")]
    UnknownSpeaker(u32),
    #[error("line {line}: {reason}")]
    MalformedMeans { line: usize, reason: String },
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

/// Population mean and SD. `None` for an empty slice.
pub fn mean_sd(values: &[f64]) -> Option<MeanSd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(MeanSd { mean, sd: var.sqrt() })
}

/// Which processing stage a statistics table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Intrinsic,
    Denormalized,
    Gmagm,
    Lobanov,
    Wattfab,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Intrinsic => "intrinsic",
            Stage::Denormalized => "denormalized",
            Stage::Gmagm => "gmagm",
            Stage::Lobanov => "lobanov",
            Stage::Wattfab => "wattfab",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-vowel, per-dimension mean and SD over a labelled feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VowelStatistics {
    space: Space,
    stage: Stage,
    pool: String,
    cells: BTreeMap<Vowel, Vec<MeanSd>>,
}

impl VowelStatistics {
    /// Builds the table from labelled feature rows (all rows must share a
    /// dimension). Each vowel needs at least two rows and a nonzero spread
    /// in every dimension.
    pub fn from_features<'a, I>(rows: I, space: Space, stage: Stage) -> Result<Self, StatsError>
    where
        I: IntoIterator<Item = (Vowel, &'a [f64])>,
    {
        let mut columns: BTreeMap<Vowel, Vec<Vec<f64>>> = BTreeMap::new();
        for (vowel, x) in rows {
            let cols = columns.entry(vowel).or_insert_with(|| vec![Vec::new(); x.len()]);
            assert_eq!(cols.len(), x.len(), "feature rows must share one dimension");
            for (col, v) in cols.iter_mut().zip(x) {
                col.push(*v);
            }
        }
        let mut cells = BTreeMap::new();
        for (vowel, cols) in columns {
            if cols.first().map_or(0, Vec::len) < 2 {
                return Err(StatsError::InsufficientSamples(format!("vowel {vowel}")));
            }
            let mut row = Vec::with_capacity(cols.len());
            for (i, col) in cols.iter().enumerate() {
                let ms = mean_sd(col).expect("non-empty column");
                if ms.sd.is_nan() || ms.sd <= 0.0 {
                    return Err(StatsError::ZeroVariance {
                        what: format!("vowel {vowel}"),
                        formant: i + 1,
                    });
                }
                row.push(ms);
            }
            cells.insert(vowel, row);
        }
        Ok(Self {
            space,
            stage,
            pool: String::new(),
            cells,
        })
    }

    /// Per-vowel F1..F3 statistics of raw samples, converted to `space` first.
    pub fn raw(samples: &Corpus, space: Space) -> Result<Self, StatsError> {
        let rows = samples
            .iter()
            .map(|s| {
                let f = s.formants();
                Ok((
                    s.vowel,
                    [to_space(f[0], space)?, to_space(f[1], space)?, to_space(f[2], space)?],
                ))
            })
            .collect::<Result<Vec<_>, ScaleError>>()?;
        Self::from_features(rows.iter().map(|(v, x)| (*v, &x[..])), space, Stage::Raw)
    }

    /// Reads externally supplied per-vowel Hz means from CSV lines
    /// `vowel,f1_hz,f2_hz,f3_hz` after a header. SDs are unknown and left
    /// as NaN, so such a table serves as de-normalization means only.
    pub fn read_means_csv<R: BufRead>(source: R) -> Result<Self, StatsError> {
        let mut cells = BTreeMap::new();
        for (i, line) in source.lines().enumerate() {
            let line_no = i + 1;
            let bad = |reason: String| StatsError::MalformedMeans { line: line_no, reason };
            let line = line.map_err(|e| bad(e.to_string()))?;
            let line = line.trim();
            if i == 0 || line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", fields.len())));
            }
            let vowel = Vowel::parse_label(fields[0]).ok_or_else(|| bad(format!("unknown vowel `{}`", fields[0])))?;
            let mut row = Vec::with_capacity(3);
            for f in &fields[1..] {
                let mean: f64 = f.parse().map_err(|_| bad(format!("not a number: `{f}`")))?;
                if !(mean.is_finite() && mean > 0.0) {
                    return Err(bad(format!("mean must be positive: `{f}`")));
                }
                row.push(MeanSd { mean, sd: f64::NAN });
            }
            if cells.insert(vowel, row).is_some() {
                return Err(bad(format!("vowel {vowel} listed twice")));
            }
        }
        if cells.is_empty() {
            return Err(StatsError::InsufficientSamples("external means table".into()));
        }
        Ok(Self {
            space: Space::Hz,
            stage: Stage::Raw,
            pool: "external".into(),
            cells,
        })
    }

    pub fn with_pool(mut self, pool: impl Into<String>) -> Self {
        self.pool = pool.into();
        self
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn pool(&self) -> &str {
        &self.pool
    }

    pub fn vowels(&self) -> impl Iterator<Item = Vowel> + '_ {
        self.cells.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, vowel: Vowel) -> Result<&[MeanSd], StatsError> {
        self.cells
            .get(&vowel)
            .map(Vec::as_slice)
            .ok_or(StatsError::MissingVowel(vowel))
    }

    /// Mean vector of `vowel` over the first `dims` dimensions.
    pub fn means(&self, vowel: Vowel) -> Result<Vec<f64>, StatsError> {
        Ok(self.get(vowel)?.iter().map(|c| c.mean).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vowel, &[MeanSd])> {
        self.cells.iter().map(|(v, c)| (*v, c.as_slice()))
    }

    /// Multiplies every SD by `factor`.
    pub fn scale_sd(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for row in out.cells.values_mut() {
            for c in row {
                c.sd *= factor;
            }
        }
        out
    }

    /// Average SD over vowels and the first `dims` dimensions.
    pub fn mean_sd(&self, dims: usize) -> f64 {
        let sds: Vec<f64> = self
            .cells
            .values()
            .flat_map(|row| row.iter().take(dims).map(|c| c.sd))
            .collect();
        sds.iter().sum::<f64>() / sds.len() as f64
    }

    /// CSV rows `stage,space,pool,vowel,formant,mean,sd` (no header).
    pub fn write_csv_rows<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        for (vowel, row) in &self.cells {
            for (i, c) in row.iter().enumerate() {
                writeln!(
                    sink,
                    "{},{},{},{},{},{:.4},{:.4}",
                    self.stage,
                    self.space,
                    self.pool,
                    vowel,
                    i + 1,
                    c.mean,
                    c.sd
                )?;
            }
        }
        Ok(())
    }
}

pub const STATS_CSV_HEADER: &str = "stage,space,pool,vowel,formant,mean,sd";

/// Per-speaker F1..F3 mean and SD over all of that speaker's samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerStatistics {
    cells: BTreeMap<u32, [MeanSd; 3]>,
}

impl SpeakerStatistics {
    pub fn compute(samples: &Corpus) -> Result<Self, StatsError> {
        let mut by_speaker: BTreeMap<u32, Vec<&FormantSample>> = BTreeMap::new();
        for s in samples {
            by_speaker.entry(s.speaker_id).or_default().push(s);
        }
        let mut cells = BTreeMap::new();
        for (speaker, rows) in by_speaker {
            let first = rows[0].vowel;
            if rows.iter().all(|s| s.vowel == first) {
                return Err(StatsError::InsufficientSamples(format!("speaker {speaker}")));
            }
            let mut out = [MeanSd { mean: 0.0, sd: 0.0 }; 3];
            for (i, cell) in out.iter_mut().enumerate() {
                let col: Vec<f64> = rows.iter().map(|s| s.formants()[i]).collect();
                *cell = mean_sd(&col).expect("non-empty");
                if cell.sd.is_nan() || cell.sd <= 0.0 {
                    return Err(StatsError::ZeroVariance {
                        what: format!("speaker {speaker}"),
                        formant: i + 1,
                    });
                }
            }
            cells.insert(speaker, out);
        }
        Ok(Self { cells })
    }

    pub fn get(&self, speaker: u32) -> Result<&[MeanSd; 3], StatsError> {
        self.cells.get(&speaker).ok_or(StatsError::UnknownSpeaker(speaker))
    }

    pub fn speakers(&self) -> impl Iterator<Item = u32> + '_ {
        self.cells.keys().copied()
    }
}

/// Centroid of a speaker's corner-vowel triangle in (F1, F2), Hz.
///
/// Corners: mean /i/, mean /ɑ/, and a derived /u'/ with F1 = F2 = F1(/i/).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerCentroid {
    pub speaker: u32,
    pub s: [f64; 2],
}

impl CornerCentroid {
    pub fn compute(samples: &Corpus, speaker: u32) -> Result<Self, StatsError> {
        let corner = |vowel: Vowel| -> Result<[f64; 2], StatsError> {
            let rows: Vec<&FormantSample> = samples
                .iter()
                .filter(|s| s.speaker_id == speaker && s.vowel == vowel)
                .collect();
            if rows.is_empty() {
                return Err(StatsError::MissingCorner { speaker, vowel });
            }
            let n = rows.len() as f64;
            Ok([
                rows.iter().map(|s| s.f1_hz).sum::<f64>() / n,
                rows.iter().map(|s| s.f2_hz).sum::<f64>() / n,
            ])
        };
        let i = corner(Vowel::IY)?;
        let a = corner(Vowel::AA)?;
        let u = [i[0], i[0]];
        Ok(Self {
            speaker,
            s: [(i[0] + a[0] + u[0]) / 3.0, (i[1] + a[1] + u[1]) / 3.0],
        })
    }
}

/// Corner centroids for every speaker in a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerCentroids {
    cells: BTreeMap<u32, CornerCentroid>,
}

impl CornerCentroids {
    pub fn compute(samples: &Corpus) -> Result<Self, StatsError> {
        let cells = samples
            .speakers()
            .into_iter()
            .map(|sp| CornerCentroid::compute(samples, sp).map(|c| (sp, c)))
            .collect::<Result<_, _>>()?;
        Ok(Self { cells })
    }

    pub fn get(&self, speaker: u32) -> Result<&CornerCentroid, StatsError> {
        self.cells.get(&speaker).ok_or(StatsError::UnknownSpeaker(speaker))
    }
}
