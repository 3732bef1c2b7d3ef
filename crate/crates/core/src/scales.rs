//! Hz <-> mel conversion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScaleError {
    #[error("negative or non-finite frequency {0}")]
    NegativeFrequency(f64),
}

/// Frequency scale a container of values lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Hz,
    Mel,
    /// Dimensionless values (intrinsic ratios, z-scores, S-normalized).
    Ratio,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Hz => "hz",
            Space::Mel => "mel",
            Space::Ratio => "ratio",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hz" => Ok(Space::Hz),
            "mel" => Ok(Space::Mel),
            _ => Err(format!("unknown space `{s}` (expected hz or mel)")),
        }
    }
}

const MEL_SCALE: f64 = 2595.0;
const MEL_BREAK_HZ: f64 = 700.0;

/// `2595 * log10(1 + f / 700)`
pub fn hz_to_mel(hz: f64) -> Result<f64, ScaleError> {
    if !hz.is_finite() || hz < 0.0 {
        return Err(ScaleError::NegativeFrequency(hz));
    }
    Ok(MEL_SCALE * (1.0 + hz / MEL_BREAK_HZ).log10())
}

pub fn mel_to_hz(mel: f64) -> Result<f64, ScaleError> {
    if !mel.is_finite() || mel < 0.0 {
        return Err(ScaleError::NegativeFrequency(mel));
    }
    Ok(MEL_BREAK_HZ * (10f64.powf(mel / MEL_SCALE) - 1.0))
}

/// Maps an Hz value into `space`. `Ratio` is returned unchanged.
pub fn to_space(hz: f64, space: Space) -> Result<f64, ScaleError> {
    match space {
        Space::Mel => hz_to_mel(hz),
        Space::Hz | Space::Ratio => Ok(hz),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        assert_eq!(hz_to_mel(0.0).unwrap(), 0.0);
        // 2595 * log10(2)
        assert!((hz_to_mel(700.0).unwrap() - 781.1714).abs() < 0.01);
        // 2595 * log10(17/7)
        assert!((hz_to_mel(1000.0).unwrap() - 999.9855).abs() < 0.01);
        assert_eq!(mel_to_hz(0.0).unwrap(), 0.0);
        assert!((mel_to_hz(781.17).unwrap() - 700.0).abs() < 0.01);
        for x in [250.0, 1500.0, 3000.0] {
            let back = mel_to_hz(hz_to_mel(x).unwrap()).unwrap();
            assert!((back - x).abs() <= 1e-9 * x);
        }
    }

    #[test]
    fn rejects_negative() {
        assert_eq!(hz_to_mel(-1.0), Err(ScaleError::NegativeFrequency(-1.0)));
        assert!(mel_to_hz(-0.5).is_err());
        assert!(hz_to_mel(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn monotone(a in 0.0f64..10_000.0, b in 0.0f64..10_000.0) {
            prop_assume!(a < b);
            prop_assert!(hz_to_mel(a).unwrap() < hz_to_mel(b).unwrap());
        }

        #[test]
        fn round_trip(x in 1.0f64..10_000.0) {
            let back = mel_to_hz(hz_to_mel(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() <= 1e-6 * x);
        }
    }
}
