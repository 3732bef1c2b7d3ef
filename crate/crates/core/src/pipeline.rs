//! Fitting a procedure on labelled data and projecting samples through it.
//!
//! A [`Model`] is built once from a training corpus (statistics frozen) and
//! then maps any sample to classifier features, and to a vowel decision.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{nearest_vowel, ClassifyError};
use crate::corpus::{Corpus, FormantSample, Vowel};
use crate::normalize::{
    bootstrap_denorm_stats, denorm_point, denormalize_gmagm, iht_denormalize, intrinsic_normalize, lobanov, s_centroid,
    NormalizeError,
};
use crate::scales::{hz_to_mel, ScaleError, Space};
use crate::stats::{CornerCentroids, SpeakerStatistics, Stage, StatsError, VowelStatistics};

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Normalization procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Unnormalized (F1, F2) in mel.
    Raw,
    /// F / GM123.
    Intrinsic,
    /// NF * GMA123 of the known vowel.
    Gmagm,
    /// NF * mu(J) with hypothesize-test over J.
    Iht,
    /// Speaker z-score.
    Lobanov,
    /// Speaker corner-centroid scaling.
    Wattfab,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Raw,
        Method::Intrinsic,
        Method::Gmagm,
        Method::Iht,
        Method::Lobanov,
        Method::Wattfab,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::Intrinsic => "intrinsic",
            Method::Gmagm => "gmagm",
            Method::Iht => "iht",
            Method::Lobanov => "lobanov",
            Method::Wattfab => "wattfab",
        }
    }

    /// Procedures that need the speaker or vowel identity of the sample
    /// being mapped.
    pub fn needs_identity(self) -> bool {
        matches!(self, Method::Gmagm | Method::Lobanov | Method::Wattfab)
    }

    fn stage(self) -> Stage {
        match self {
            Method::Raw => Stage::Raw,
            Method::Intrinsic => Stage::Intrinsic,
            Method::Gmagm => Stage::Gmagm,
            Method::Iht => Stage::Denormalized,
            Method::Lobanov => Stage::Lobanov,
            Method::Wattfab => Stage::Wattfab,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .or(match s.as_str() {
                "zscore" | "z-score" => Some(Method::Lobanov),
                "scentroid" | "s-centroid" => Some(Method::Wattfab),
                "ie-ht" => Some(Method::Iht),
                "ie-gmagm" => Some(Method::Gmagm),
                _ => None,
            })
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Knobs that are not part of the default protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    /// Space of the de-normalized statistics and the hypothesize-test
    /// distance.
    pub denorm_space: Space,
    /// Externally supplied per-vowel Hz means/SDs to use in place of the
    /// statistics recomputed from the training data.
    pub raw_stats: Option<VowelStatistics>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            denorm_space: Space::Mel,
            raw_stats: None,
        }
    }
}

/// A sample after a procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedSample {
    pub sample: FormantSample,
    pub method: Method,
    /// Classifier features (x1, x2) in `feature_space`.
    pub features: [f64; 2],
    pub feature_space: Space,
    /// The procedure's native values before any mel conversion; the third
    /// entry is `None` for the two-formant baselines.
    pub native: [Option<f64>; 3],
    pub native_space: Space,
    /// Vowel chosen by the procedure itself (hypothesize-test only).
    pub predicted: Option<Vowel>,
    /// sqrt(WED²) to the chosen vowel (hypothesize-test only).
    pub distance: Option<f64>,
}

#[derive(Debug, Clone)]
enum Fitted {
    Raw,
    Intrinsic,
    Gmagm {
        raw_hz: VowelStatistics,
    },
    Iht {
        raw_hz: VowelStatistics,
        denorm: VowelStatistics,
    },
    Lobanov {
        speakers: SpeakerStatistics,
    },
    Wattfab {
        centroids: CornerCentroids,
    },
}

/// A procedure with frozen statistics.
#[derive(Debug, Clone)]
pub struct Model {
    method: Method,
    fitted: Fitted,
    /// Per-vowel statistics of the features of the training data; the
    /// classifier's vowel space.
    feature_stats: VowelStatistics,
}

impl Model {
    pub fn fit(method: Method, train: &Corpus, options: &ModelOptions) -> Result<Self, PipelineError> {
        let raw_hz = || -> Result<VowelStatistics, PipelineError> {
            Ok(match &options.raw_stats {
                Some(st) => st.clone(),
                None => VowelStatistics::raw(train, Space::Hz)?,
            })
        };
        let fitted = match method {
            Method::Raw => Fitted::Raw,
            Method::Intrinsic => Fitted::Intrinsic,
            Method::Gmagm => Fitted::Gmagm { raw_hz: raw_hz()? },
            Method::Iht => {
                let raw_hz = raw_hz()?;
                let denorm = bootstrap_denorm_stats(train, &raw_hz, options.denorm_space)?;
                Fitted::Iht { raw_hz, denorm }
            }
            Method::Lobanov => Fitted::Lobanov {
                speakers: SpeakerStatistics::compute(train)?,
            },
            Method::Wattfab => Fitted::Wattfab {
                centroids: CornerCentroids::compute(train)?,
            },
        };
        let mut model = Self {
            method,
            fitted,
            feature_stats: VowelStatistics::from_features(std::iter::empty(), Space::Mel, Stage::Raw)?,
        };
        model.feature_stats = match &model.fitted {
            // The classifier's vowel space for hypothesize-test is the
            // bootstrapped label-based de-normalized statistics.
            Fitted::Iht { denorm, .. } => denorm.clone(),
            _ => {
                let rows = train
                    .iter()
                    .map(|s| model.project(s).map(|p| (s.vowel, p.features)))
                    .collect::<Result<Vec<_>, _>>()?;
                VowelStatistics::from_features(
                    rows.iter().map(|(v, x)| (*v, &x[..])),
                    model.feature_space(),
                    method.stage(),
                )?
            }
        };
        Ok(model)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn feature_space(&self) -> Space {
        match &self.fitted {
            Fitted::Raw | Fitted::Gmagm { .. } => Space::Mel,
            Fitted::Iht { denorm, .. } => denorm.space(),
            Fitted::Intrinsic | Fitted::Lobanov { .. } | Fitted::Wattfab { .. } => Space::Ratio,
        }
    }

    pub fn feature_stats(&self) -> &VowelStatistics {
        &self.feature_stats
    }

    /// Raw Hz statistics used by the intrinsic-cum-extrinsic procedures.
    pub fn raw_hz_stats(&self) -> Option<&VowelStatistics> {
        match &self.fitted {
            Fitted::Gmagm { raw_hz } | Fitted::Iht { raw_hz, .. } => Some(raw_hz),
            _ => None,
        }
    }

    pub fn project(&self, s: &FormantSample) -> Result<NormalizedSample, PipelineError> {
        let mut out = NormalizedSample {
            sample: *s,
            method: self.method,
            features: [0.0; 2],
            feature_space: self.feature_space(),
            native: [None; 3],
            native_space: Space::Hz,
            predicted: None,
            distance: None,
        };
        match &self.fitted {
            Fitted::Raw => {
                let f = s.formants();
                out.native = f.map(Some);
                out.features = [hz_to_mel(f[0])?, hz_to_mel(f[1])?];
            }
            Fitted::Intrinsic => {
                let nf = intrinsic_normalize(s).nf;
                out.native = nf.map(Some);
                out.native_space = Space::Ratio;
                out.features = [nf[0], nf[1]];
            }
            Fitted::Gmagm { raw_hz } => {
                let d = denormalize_gmagm(&intrinsic_normalize(s), s.vowel, raw_hz)?;
                out.native = d.df.map(Some);
                out.features = [hz_to_mel(d.df[0])?, hz_to_mel(d.df[1])?];
            }
            Fitted::Iht { raw_hz, denorm } => {
                let d = iht_denormalize(&intrinsic_normalize(s), raw_hz, denorm)?;
                out.native = d.df.map(Some);
                out.features = denorm_point(&d.df, denorm.space())?;
                out.predicted = Some(d.vowel);
                out.distance = d.distance;
            }
            Fitted::Lobanov { speakers } => {
                let z = lobanov(s, speakers)?;
                out.native = [Some(z[0]), Some(z[1]), None];
                out.native_space = Space::Ratio;
                out.features = z;
            }
            Fitted::Wattfab { centroids } => {
                let r = s_centroid(s, centroids.get(s.speaker_id)?)?;
                out.native = [Some(r[0]), Some(r[1]), None];
                out.native_space = Space::Ratio;
                out.features = r;
            }
        }
        Ok(out)
    }

    /// Vowel decision and its WED² (hypothesize-test reports its own
    /// winning hypothesis).
    pub fn classify(&self, s: &FormantSample) -> Result<(Vowel, f64), PipelineError> {
        let p = self.project(s)?;
        match (p.predicted, p.distance) {
            (Some(v), Some(d)) => Ok((v, d * d)),
            _ => Ok(nearest_vowel(p.features, &self.feature_stats)?),
        }
    }

    pub fn project_all(&self, corpus: &Corpus) -> Result<Vec<NormalizedSample>, PipelineError> {
        corpus.iter().map(|s| self.project(s)).collect()
    }
}

/// Per-vowel statistics of already projected samples (e.g. the final
/// hypothesize-test points), grouped by the true label.
pub fn projected_stats(points: &[NormalizedSample]) -> Result<VowelStatistics, StatsError> {
    let space = points.first().map_or(Space::Mel, |p| p.feature_space);
    let stage = points.first().map_or(Stage::Raw, |p| p.method.stage());
    VowelStatistics::from_features(points.iter().map(|p| (p.sample.vowel, &p.features[..])), space, stage)
}
