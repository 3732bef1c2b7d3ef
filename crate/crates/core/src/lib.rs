//! Vowel formant normalization toolkit.
//!
//! * [`corpus`]: Peterson & Barney style tables, pooling and splits.
//! * [`scales`]: Hz/mel conversion.
//! * [`stats`]: vowel- and speaker-conditional statistics.
//! * [`normalize`]: geometric-mean intrinsic normalization, the GMA-scaled
//!   and hypothesize-test de-normalizations, Lobanov and Watt-Fabricius.
//! * [`pipeline`]: fitting a procedure and projecting samples through it.
//! * [`classify`]: weighted-Euclidean nearest-mean classification and the
//!   evaluation protocol.
//! * [`plot`]: SVG/CSV scatter plots, vowel triangles and distance rays.
//! * [`reproduce`]: the full comparison table.

pub mod classify;
pub mod corpus;
pub mod normalize;
pub mod pipeline;
pub mod plot;
pub mod reproduce;
pub mod scales;
pub mod stats;

pub use classify::{evaluate, ClassificationReport, Split};
pub use corpus::{Corpus, CorpusFormat, FormantSample, Pool, SpeakerGroup, Vowel};
pub use pipeline::{Method, Model, ModelOptions, NormalizedSample};
pub use plot::{Highlight, PlotFormat};
pub use reproduce::{reproduce_all, Reproduction};
pub use scales::Space;
pub use stats::VowelStatistics;
