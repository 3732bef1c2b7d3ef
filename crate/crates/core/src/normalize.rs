//! Intrinsic normalization by the geometric mean of F1..F3, the two
//! intrinsic-cum-extrinsic de-normalizations (GMA-scaled and
//! hypothesize-test), and the Lobanov / Watt-Fabricius speaker baselines.
//!
//! All arithmetic here is in Hz. Mel enters only when a de-normalized point
//! is compared against de-normalized statistics kept in mel.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{wed_rows, ClassifyError};
use crate::corpus::{Corpus, FormantSample, Vowel};
use crate::scales::{to_space, ScaleError, Space};
use crate::stats::{CornerCentroid, SpeakerStatistics, Stage, StatsError, VowelStatistics};

#[derive(Debug, Error, PartialEq)]
pub enum NormalizeError {
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("expected {expected} statistics, got {found}")]
    WrongSpace { expected: Space, found: Space },
    #[error("no statistics for speaker {0}")]
    UnknownSpeaker(u32),
}

/// `(F1 F2 F3)^(1/3)`
pub fn gm123(formants: [f64; 3]) -> f64 {
    (formants[0] * formants[1] * formants[2]).cbrt()
}

/// Formants divided by their own geometric mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicNormalized {
    pub nf: [f64; 3],
    /// The divisor, Hz.
    pub gm123: f64,
}

impl IntrinsicNormalized {
    pub fn from_formants(formants: [f64; 3]) -> Self {
        let g = gm123(formants);
        Self {
            nf: formants.map(|f| f / g),
            gm123: g,
        }
    }
}

pub fn intrinsic_normalize(sample: &FormantSample) -> IntrinsicNormalized {
    IntrinsicNormalized::from_formants(sample.formants())
}

/// Geometric mean of a vowel's pooled mean F1..F3.
pub fn gma123(stats: &VowelStatistics, vowel: Vowel) -> Result<f64, NormalizeError> {
    require_hz(stats)?;
    let row = stats.get(vowel)?;
    Ok(gm123([row[0].mean, row[1].mean, row[2].mean]))
}

fn require_hz(stats: &VowelStatistics) -> Result<(), NormalizeError> {
    if stats.space() != Space::Hz {
        return Err(NormalizeError::WrongSpace {
            expected: Space::Hz,
            found: stats.space(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Procedure {
    Gmagm,
    Iht,
}

/// A sample mapped back into Hz, together with the vowel whose statistics
/// were used for the mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenormalizedSample {
    pub df: [f64; 3],
    pub vowel: Vowel,
    pub procedure: Procedure,
    /// Weighted distance to the chosen vowel (square root of WED²); only set
    /// by the hypothesize-test search.
    pub distance: Option<f64>,
}

/// `NF(i) * GMA123(vowel)`; the vowel must be known.
pub fn denormalize_gmagm(
    nf: &IntrinsicNormalized,
    vowel: Vowel,
    stats: &VowelStatistics,
) -> Result<DenormalizedSample, NormalizeError> {
    let g = gma123(stats, vowel)?;
    Ok(DenormalizedSample {
        df: nf.nf.map(|x| x * g),
        vowel,
        procedure: Procedure::Gmagm,
        distance: None,
    })
}

/// `DF(i, J) = NF(i) * mu(i, J)` for the hypothesized vowel `J`.
pub fn denormalize_hypothesis(
    nf: &IntrinsicNormalized,
    hypothesis: Vowel,
    stats: &VowelStatistics,
) -> Result<DenormalizedSample, NormalizeError> {
    require_hz(stats)?;
    let row = stats.get(hypothesis)?;
    Ok(DenormalizedSample {
        df: [nf.nf[0] * row[0].mean, nf.nf[1] * row[1].mean, nf.nf[2] * row[2].mean],
        vowel: hypothesis,
        procedure: Procedure::Iht,
        distance: None,
    })
}

/// (DF1, DF2) mapped into `space`.
pub fn denorm_point(df: &[f64; 3], space: Space) -> Result<[f64; 2], ScaleError> {
    Ok([to_space(df[0], space)?, to_space(df[1], space)?])
}

/// Initial de-normalized statistics: every labelled sample is de-normalized
/// with its own vowel's raw means, and per-vowel mean/SD of (DF1, DF2) are
/// taken in `space`.
pub fn bootstrap_denorm_stats(
    labeled: &Corpus,
    raw_stats: &VowelStatistics,
    space: Space,
) -> Result<VowelStatistics, NormalizeError> {
    let mut rows = Vec::with_capacity(labeled.len());
    for s in labeled {
        let d = denormalize_hypothesis(&intrinsic_normalize(s), s.vowel, raw_stats)?;
        rows.push((s.vowel, denorm_point(&d.df, space)?));
    }
    Ok(VowelStatistics::from_features(
        rows.iter().map(|(v, x)| (*v, &x[..])),
        space,
        Stage::Denormalized,
    )?)
}

/// One hypothesis of the hypothesize-test search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub vowel: Vowel,
    pub df: [f64; 3],
    /// (DF1, DF2) in the de-normalized statistics' space.
    pub point: [f64; 2],
    /// WED² against the hypothesized vowel's de-normalized statistics.
    pub distance_sq: f64,
}

/// All hypotheses, in vowel enumeration order, for every vowel that has
/// de-normalized statistics.
pub fn iht_hypotheses(
    nf: &IntrinsicNormalized,
    raw_stats: &VowelStatistics,
    denorm_stats: &VowelStatistics,
) -> Result<Vec<Hypothesis>, NormalizeError> {
    denorm_stats
        .iter()
        .map(|(vowel, target)| {
            let d = denormalize_hypothesis(nf, vowel, raw_stats)?;
            let point = denorm_point(&d.df, denorm_stats.space())?;
            let distance_sq = wed_rows(&point, target)?;
            Ok(Hypothesis {
                vowel,
                df: d.df,
                point,
                distance_sq,
            })
        })
        .collect()
}

/// Hypothesize-test de-normalization: the hypothesis with the smallest
/// weighted distance wins; ties go to the lower vowel index.
pub fn iht_denormalize(
    nf: &IntrinsicNormalized,
    raw_stats: &VowelStatistics,
    denorm_stats: &VowelStatistics,
) -> Result<DenormalizedSample, NormalizeError> {
    let hyps = iht_hypotheses(nf, raw_stats, denorm_stats)?;
    let best = hyps
        .iter()
        .fold(None::<&Hypothesis>, |best, h| match best {
            Some(b) if b.distance_sq <= h.distance_sq => Some(b),
            _ => Some(h),
        })
        .ok_or(NormalizeError::Stats(StatsError::InsufficientSamples(
            "de-normalized statistics are empty".into(),
        )))?;
    Ok(DenormalizedSample {
        df: best.df,
        vowel: best.vowel,
        procedure: Procedure::Iht,
        distance: Some(best.distance_sq.sqrt()),
    })
}

/// Speaker z-score of (F1, F2).
pub fn lobanov(sample: &FormantSample, sstats: &SpeakerStatistics) -> Result<[f64; 2], NormalizeError> {
    let cells = sstats
        .get(sample.speaker_id)
        .map_err(|_| NormalizeError::UnknownSpeaker(sample.speaker_id))?;
    let f = sample.formants();
    let mut z = [0.0; 2];
    for i in 0..2 {
        if cells[i].sd.is_nan() || cells[i].sd <= 0.0 {
            return Err(StatsError::ZeroVariance {
                what: format!("speaker {}", sample.speaker_id),
                formant: i + 1,
            }
            .into());
        }
        z[i] = (f[i] - cells[i].mean) / cells[i].sd;
    }
    Ok(z)
}

/// (F1 / S1, F2 / S2) with the speaker's corner centroid.
pub fn s_centroid(sample: &FormantSample, centroid: &CornerCentroid) -> Result<[f64; 2], NormalizeError> {
    if centroid.speaker != sample.speaker_id {
        return Err(NormalizeError::UnknownSpeaker(sample.speaker_id));
    }
    Ok([sample.f1_hz / centroid.s[0], sample.f2_hz / centroid.s[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::sample;
    use crate::corpus::SpeakerGroup::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Two samples per vowel, symmetric around the given means.
    fn synthetic(means: &[(Vowel, [f64; 3])]) -> Corpus {
        let mut out = Vec::new();
        for (k, (v, m)) in means.iter().enumerate() {
            for (rep, d) in [(1u8, 0.9), (2u8, 1.1)] {
                out.push(sample(k as u32 + 1, Man, *v, rep, [m[0] * d, m[1] * d, m[2] * d]));
            }
        }
        Corpus::new(out, "synthetic")
    }

    #[test]
    fn geometric_mean_values() {
        assert!(close(gm123([100.0, 100.0, 100.0]), 100.0, 1e-12));
        // cube root of 1.875e9
        assert!(close(gm123([500.0, 1500.0, 2500.0]), 1233.1060, 0.01));
        let n = IntrinsicNormalized::from_formants([500.0, 1500.0, 2500.0]);
        for (a, b) in n.nf.iter().zip([0.4054, 1.2161, 2.0268]) {
            assert!(close(*a, b, 1e-3));
        }
        assert_eq!(IntrinsicNormalized::from_formants([100.0; 3]).nf, [1.0; 3]);
    }

    #[test]
    fn gma_and_gmagm() {
        let c = synthetic(&[(Vowel::IY, [400.0, 400.0, 400.0]), (Vowel::AA, [500.0, 1500.0, 2500.0])]);
        let st = VowelStatistics::raw(&c, Space::Hz).unwrap();
        assert!(close(gma123(&st, Vowel::IY).unwrap(), 400.0, 1e-9));
        assert!(close(gma123(&st, Vowel::AA).unwrap(), 1233.1060, 0.01));
        assert_eq!(
            gma123(&st, Vowel::UW),
            Err(NormalizeError::Stats(StatsError::MissingVowel(Vowel::UW)))
        );
        let unit = IntrinsicNormalized::from_formants([100.0; 3]);
        let d = denormalize_gmagm(&unit, Vowel::IY, &st).unwrap();
        for x in d.df {
            assert!(close(x, 400.0, 1e-9));
        }
        let mel = VowelStatistics::raw(&c, Space::Mel).unwrap();
        assert!(matches!(
            gma123(&mel, Vowel::IY),
            Err(NormalizeError::WrongSpace { .. })
        ));
    }

    #[test]
    fn hypothesis_denormalization() {
        let c = synthetic(&[
            (Vowel::AA, [730.0, 1090.0, 2440.0]),
            (Vowel::IY, [270.0, 2290.0, 3010.0]),
        ]);
        let st = VowelStatistics::raw(&c, Space::Hz).unwrap();
        let unit = IntrinsicNormalized::from_formants([100.0; 3]);
        let d = denormalize_hypothesis(&unit, Vowel::AA, &st).unwrap();
        for (a, b) in d.df.iter().zip([730.0, 1090.0, 2440.0]) {
            assert!(close(*a, b, 1e-9));
        }
        // DF(i,J)/DF(i,K) = mu(i,J)/mu(i,K)
        let nf = IntrinsicNormalized::from_formants([310.0, 2020.0, 2960.0]);
        let a = denormalize_hypothesis(&nf, Vowel::AA, &st).unwrap();
        let b = denormalize_hypothesis(&nf, Vowel::IY, &st).unwrap();
        let ma = st.means(Vowel::AA).unwrap();
        let mb = st.means(Vowel::IY).unwrap();
        for i in 0..3 {
            assert!(close(a.df[i] / b.df[i], ma[i] / mb[i], 1e-12));
        }
    }

    #[test]
    fn bootstrap_hand_trace() {
        // Three IY samples; raw means are (300, 2300, 3000).
        let c = Corpus::new(
            vec![
                sample(1, Man, Vowel::IY, 1, [250.0, 2100.0, 2900.0]),
                sample(2, Woman, Vowel::IY, 1, [300.0, 2300.0, 3000.0]),
                sample(3, Child, Vowel::IY, 1, [350.0, 2500.0, 3100.0]),
            ],
            "t",
        );
        let raw = VowelStatistics::raw(&c, Space::Hz).unwrap();
        let boot = bootstrap_denorm_stats(&c, &raw, Space::Hz).unwrap();
        let df1: Vec<f64> = c
            .iter()
            .map(|s| s.f1_hz / (s.f1_hz * s.f2_hz * s.f3_hz).cbrt() * 300.0)
            .collect();
        let mean = df1.iter().sum::<f64>() / 3.0;
        let sd = (df1.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
        let row = boot.get(Vowel::IY).unwrap();
        assert!(close(row[0].mean, mean, 1e-9));
        assert!(close(row[0].sd, sd, 1e-9));
        assert_eq!(boot.stage(), Stage::Denormalized);
    }

    #[test]
    fn iht_zero_distance_fixed_point() {
        let c = synthetic(&[
            (Vowel::IY, [270.0, 2290.0, 3010.0]),
            (Vowel::AA, [730.0, 1090.0, 2440.0]),
        ]);
        let raw = VowelStatistics::raw(&c, Space::Hz).unwrap();
        // Centre the IY statistics on the sample's own IY hypothesis.
        let nf = IntrinsicNormalized::from_formants([270.0, 2290.0, 3010.0]);
        let p = denorm_point(&denormalize_hypothesis(&nf, Vowel::IY, &raw).unwrap().df, Space::Mel).unwrap();
        let rows = [
            (Vowel::IY, [p[0] - 20.0, p[1] - 60.0]),
            (Vowel::IY, [p[0] + 20.0, p[1] + 60.0]),
            (Vowel::AA, [700.0, 1000.0]),
            (Vowel::AA, [800.0, 1100.0]),
        ];
        let denorm =
            VowelStatistics::from_features(rows.iter().map(|(v, x)| (*v, &x[..])), Space::Mel, Stage::Denormalized)
                .unwrap();
        let d = iht_denormalize(&nf, &raw, &denorm).unwrap();
        assert_eq!(d.vowel, Vowel::IY);
        assert!(d.distance.unwrap() < 1e-9);
        assert_eq!(d.df, denormalize_hypothesis(&nf, Vowel::IY, &raw).unwrap().df);
    }

    #[test]
    fn baselines() {
        let c = Corpus::new(
            vec![
                sample(5, Man, Vowel::IY, 1, [300.0, 2300.0, 3000.0]),
                sample(5, Man, Vowel::AA, 1, [700.0, 1100.0, 2500.0]),
            ],
            "t",
        );
        let ss = SpeakerStatistics::compute(&c).unwrap();
        let at_mean = sample(5, Man, Vowel::AH, 1, [500.0, 1700.0, 2600.0]);
        assert_eq!(lobanov(&at_mean, &ss).unwrap(), [0.0, 0.0]);
        let stranger = sample(6, Man, Vowel::AH, 1, [500.0, 1700.0, 2600.0]);
        assert_eq!(lobanov(&stranger, &ss), Err(NormalizeError::UnknownSpeaker(6)));

        let cc = CornerCentroid::compute(&c, 5).unwrap();
        let at_s = sample(5, Man, Vowel::AH, 1, [cc.s[0], cc.s[1], 3000.0]);
        let s = s_centroid(&at_s, &cc).unwrap();
        assert!(close(s[0], 1.0, 1e-12) && close(s[1], 1.0, 1e-12));
        assert!(s_centroid(&stranger, &cc).is_err());
    }

    proptest! {
        #[test]
        fn product_identity_and_order(f1 in 100.0f64..1200.0, d2 in 1.0f64..2500.0, d3 in 1.0f64..2000.0) {
            let f = [f1, f1 + d2, f1 + d2 + d3];
            let n = IntrinsicNormalized::from_formants(f);
            prop_assert!((n.nf.iter().product::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(0.0 < n.nf[0] && n.nf[0] < n.nf[1] && n.nf[1] < n.nf[2]);
            let g = gm123(f);
            prop_assert!(f[0] < g && g < f[2]);
        }

        #[test]
        fn scale_invariance(f1 in 100.0f64..1200.0, d2 in 1.0f64..2500.0, d3 in 1.0f64..2000.0, alpha in 0.2f64..5.0) {
            let f = [f1, f1 + d2, f1 + d2 + d3];
            let a = IntrinsicNormalized::from_formants(f).nf;
            let b = IntrinsicNormalized::from_formants(f.map(|x| x * alpha)).nf;
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-9 * a[i].abs());
            }
        }
    }
}
