//! Peterson & Barney style formant tables: parsing, validation, filtering,
//! pooling and the repetition split.
//!
//! Two on-disk layouts are understood. The raw layout is the one circulated
//! with the original measurements,
//!
//! ```text
//! group speaker_id vowel_index vowel_code F0 F1 F2 F3
//! ```
//!
//! whitespace- or comma-delimited, `#` comments allowed. The canonical layout
//! is the CSV written by [`Corpus::write_csv`], which carries the repetition
//! explicitly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed row ({reason})")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: formants out of order (need F1 <= F2 <= F3)")]
    NonMonotonicFormants { line: usize },
    #[error("line {line}: unknown vowel code `{code}`")]
    UnknownVowelCode { line: usize, code: String },
    #[error("no sample matches the requested selection")]
    EmptyResult,
    #[error("speaker {speaker} vowel {vowel}: expected exactly two repetitions, found {found}")]
    UnpairedUtterance { speaker: u32, vowel: Vowel, found: usize },
    #[error("cannot open {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Talker category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SpeakerGroup {
    Man,
    Woman,
    Child,
}

impl SpeakerGroup {
    pub const ALL: [SpeakerGroup; 3] = [SpeakerGroup::Man, SpeakerGroup::Woman, SpeakerGroup::Child];

    /// Numeric code used in the raw table (1 = man, 2 = woman, 3 = child).
    pub fn code(self) -> u8 {
        match self {
            SpeakerGroup::Man => 1,
            SpeakerGroup::Woman => 2,
            SpeakerGroup::Child => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(SpeakerGroup::Man),
            2 => Some(SpeakerGroup::Woman),
            3 => Some(SpeakerGroup::Child),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpeakerGroup::Man => "man",
            SpeakerGroup::Woman => "woman",
            SpeakerGroup::Child => "child",
        }
    }
}

impl fmt::Display for SpeakerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The ten monophthongs of the Peterson & Barney recordings, in the order of
/// their numeric phoneme index (1..=10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Vowel {
    IY,
    IH,
    EH,
    AE,
    AH,
    AA,
    AO,
    UH,
    UW,
    ER,
}

impl Vowel {
    pub const ALL: [Vowel; 10] = [
        Vowel::IY,
        Vowel::IH,
        Vowel::EH,
        Vowel::AE,
        Vowel::AH,
        Vowel::AA,
        Vowel::AO,
        Vowel::UH,
        Vowel::UW,
        Vowel::ER,
    ];

    /// Default working set: everything except the rhotic ER.
    pub const WORKING: [Vowel; 9] = [
        Vowel::IY,
        Vowel::IH,
        Vowel::EH,
        Vowel::AE,
        Vowel::AH,
        Vowel::AA,
        Vowel::AO,
        Vowel::UH,
        Vowel::UW,
    ];

    pub fn index(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(usize::from(index).checked_sub(1)?).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            Vowel::IY => "IY",
            Vowel::IH => "IH",
            Vowel::EH => "EH",
            Vowel::AE => "AE",
            Vowel::AH => "AH",
            Vowel::AA => "AA",
            Vowel::AO => "AO",
            Vowel::UH => "UH",
            Vowel::UW => "UW",
            Vowel::ER => "ER",
        }
    }

    pub fn ipa(self) -> &'static str {
        match self {
            Vowel::IY => "i",
            Vowel::IH => "ɪ",
            Vowel::EH => "ɛ",
            Vowel::AE => "æ",
            Vowel::AH => "ʌ",
            Vowel::AA => "ɑ",
            Vowel::AO => "ɔ",
            Vowel::UH => "ʊ",
            Vowel::UW => "u",
            Vowel::ER => "ɝ",
        }
    }

    /// Accepts an ARPAbet-style code (any case) or the numeric index.
    pub fn parse_label(label: &str) -> Option<Self> {
        let label = label.trim();
        if let Ok(i) = label.parse::<u8>() {
            return Self::from_index(i);
        }
        Self::ALL.iter().copied().find(|v| v.code().eq_ignore_ascii_case(label))
    }
}

impl fmt::Display for Vowel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Vowel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_label(s).ok_or_else(|| format!("unknown vowel `{s}`"))
    }
}

/// One vowel utterance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormantSample {
    pub speaker_id: u32,
    pub group: SpeakerGroup,
    pub vowel: Vowel,
    pub repetition: u8,
    pub f0_hz: f64,
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub f3_hz: f64,
    /// False when the raw table flags the utterance (leading `*` on the
    /// vowel code) as not unanimously identified by listeners.
    pub unanimous: bool,
}

impl FormantSample {
    pub fn formants(&self) -> [f64; 3] {
        [self.f1_hz, self.f2_hz, self.f3_hz]
    }

    /// Validates the frequencies; `line` is only used in the error.
    pub fn check(&self, line: usize) -> Result<(), CorpusError> {
        let all = [self.f0_hz, self.f1_hz, self.f2_hz, self.f3_hz];
        if all.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(CorpusError::MalformedRow {
                line,
                reason: "frequencies must be finite and positive".into(),
            });
        }
        // Equal neighbours occur in the published data where two formants
        // merged; only a decreasing pair is rejected.
        if self.f2_hz < self.f1_hz || self.f3_hz < self.f2_hz {
            return Err(CorpusError::NonMonotonicFormants { line });
        }
        Ok(())
    }
}

/// Which file layout a byte stream is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `group speaker_id vowel_index vowel_code F0 F1 F2 F3`
    Raw,
    /// Canonical CSV with header (see [`Corpus::write_csv`]).
    Csv,
}

pub const CSV_HEADER: &str = "group,speaker_id,vowel,repetition,f0_hz,f1_hz,f2_hz,f3_hz";

/// Pooling modes used in evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    /// Men and women.
    Mw,
    /// Men, women and children.
    Mwc,
}

impl Pool {
    pub fn groups(self) -> BTreeSet<SpeakerGroup> {
        match self {
            Pool::Mw => [SpeakerGroup::Man, SpeakerGroup::Woman].into_iter().collect(),
            Pool::Mwc => SpeakerGroup::ALL.into_iter().collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pool::Mw => "mw",
            Pool::Mwc => "mwc",
        }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mw" => Ok(Pool::Mw),
            "mwc" => Ok(Pool::Mwc),
            _ => Err(format!("unknown pool `{s}` (expected mw or mwc)")),
        }
    }
}

/// The Peterson & Barney (1952) table as distributed with Praat, in the
/// raw layout.
pub const PETERSON_BARNEY: &str = include_str!("../data/pb52.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    samples: Vec<FormantSample>,
    provenance: String,
}

impl Corpus {
    pub fn new(samples: Vec<FormantSample>, provenance: impl Into<String>) -> Self {
        Self {
            samples,
            provenance: provenance.into(),
        }
    }

    pub fn samples(&self) -> &[FormantSample] {
        &self.samples
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FormantSample> {
        self.samples.iter()
    }

    /// Reads a corpus. Rows keep their file order; invalid rows fail with the
    /// 1-based line number.
    pub fn parse<R: BufRead>(
        source: R,
        format: CorpusFormat,
        provenance: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let samples = match format {
            CorpusFormat::Raw => parse_raw(source)?,
            CorpusFormat::Csv => parse_csv(source)?,
        };
        Ok(Self::new(samples, provenance))
    }

    /// The bundled Peterson & Barney table, all ten vowels.
    pub fn peterson_barney() -> Self {
        Self::parse(PETERSON_BARNEY.as_bytes(), CorpusFormat::Raw, "pb52.txt (bundled)").expect("bundled corpus parses")
    }

    /// Opens a file, picking the layout from its first non-comment line.
    pub fn open(path: impl AsRef<std::path::Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let format = detect_format(&text);
        Self::parse(text.as_bytes(), format, path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, mut sink: W) -> std::io::Result<()> {
        writeln!(sink, "{CSV_HEADER}")?;
        for s in &self.samples {
            writeln!(
                sink,
                "{},{},{}{},{},{},{},{},{}",
                s.group.code(),
                s.speaker_id,
                if s.unanimous { "" } else { "*" },
                s.vowel.code(),
                s.repetition,
                s.f0_hz,
                s.f1_hz,
                s.f2_hz,
                s.f3_hz
            )?;
        }
        Ok(())
    }

    fn select(&self, keep: impl Fn(&FormantSample) -> bool) -> Result<Self, CorpusError> {
        let samples: Vec<_> = self.samples.iter().filter(|s| keep(s)).copied().collect();
        if samples.is_empty() {
            return Err(CorpusError::EmptyResult);
        }
        Ok(Self::new(samples, self.provenance.clone()))
    }

    pub fn filter_vowels(&self, keep: &BTreeSet<Vowel>) -> Result<Self, CorpusError> {
        self.select(|s| keep.contains(&s.vowel))
    }

    /// The nine-vowel working set (ER removed).
    pub fn working_set(&self) -> Result<Self, CorpusError> {
        self.filter_vowels(&Vowel::WORKING.into_iter().collect())
    }

    pub fn pool(&self, groups: &BTreeSet<SpeakerGroup>) -> Result<Self, CorpusError> {
        self.select(|s| groups.contains(&s.group))
    }

    pub fn pooled(&self, pool: Pool) -> Result<Self, CorpusError> {
        self.pool(&pool.groups())
    }

    /// Drops utterances flagged as not unanimously identified.
    pub fn unanimous_only(&self) -> Result<Self, CorpusError> {
        self.select(|s| s.unanimous)
    }

    /// Repetition 1 to train, repetition 2 to test. Every (speaker, vowel)
    /// must occur exactly twice.
    pub fn split_repetitions(&self) -> Result<(Self, Self), CorpusError> {
        let mut seen: BTreeMap<(u32, Vowel), Vec<u8>> = BTreeMap::new();
        for s in &self.samples {
            seen.entry((s.speaker_id, s.vowel)).or_default().push(s.repetition);
        }
        for (&(speaker, vowel), reps) in &seen {
            let mut sorted = reps.clone();
            sorted.sort_unstable();
            if sorted != [1, 2] {
                return Err(CorpusError::UnpairedUtterance {
                    speaker,
                    vowel,
                    found: reps.len(),
                });
            }
        }
        let (train, test): (Vec<_>, Vec<_>) = self.samples.iter().copied().partition(|s| s.repetition == 1);
        Ok((
            Self::new(train, self.provenance.clone()),
            Self::new(test, self.provenance.clone()),
        ))
    }

    pub fn speakers(&self) -> BTreeSet<u32> {
        self.samples.iter().map(|s| s.speaker_id).collect()
    }

    /// Distinct vowels present, in enumeration order.
    pub fn vowels(&self) -> Vec<Vowel> {
        let set: BTreeSet<Vowel> = self.samples.iter().map(|s| s.vowel).collect();
        set.into_iter().collect()
    }

    pub fn count(&self, vowel: Vowel, group: SpeakerGroup) -> usize {
        self.samples
            .iter()
            .filter(|s| s.vowel == vowel && s.group == group)
            .count()
    }

    /// Looks up a single utterance.
    pub fn find(&self, speaker_id: u32, vowel: Vowel, repetition: u8) -> Option<&FormantSample> {
        self.samples
            .iter()
            .find(|s| s.speaker_id == speaker_id && s.vowel == vowel && s.repetition == repetition)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a FormantSample;
    type IntoIter = std::slice::Iter<'a, FormantSample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

/// Canonical CSV if the first content line is the header, raw otherwise.
pub fn detect_format(text: &str) -> CorpusFormat {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    match first {
        Some(l) if l.starts_with("group,") => CorpusFormat::Csv,
        _ => CorpusFormat::Raw,
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect()
}

fn malformed(line: usize, reason: impl Into<String>) -> CorpusError {
    CorpusError::MalformedRow {
        line,
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(field: &str, line: usize, what: &str) -> Result<T, CorpusError> {
    field
        .parse()
        .map_err(|_| malformed(line, format!("bad {what} `{field}`")))
}

fn parse_group(field: &str, line: usize) -> Result<SpeakerGroup, CorpusError> {
    let code: u8 = parse_num(field, line, "group")?;
    SpeakerGroup::from_code(code).ok_or_else(|| malformed(line, format!("group `{field}` not in 1..=3")))
}

/// Strips the non-unanimous marker and resolves the vowel.
fn parse_vowel_code(field: &str, line: usize) -> Result<(Vowel, bool), CorpusError> {
    let (code, unanimous) = match field.strip_prefix('*') {
        Some(rest) => (rest, false),
        None => (field, true),
    };
    let vowel = Vowel::parse_label(code).ok_or_else(|| CorpusError::UnknownVowelCode {
        line,
        code: field.to_string(),
    })?;
    Ok((vowel, unanimous))
}

fn content_lines<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String), CorpusError>> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| {
            l.map(|l| (i + 1, l)).map_err(|source| CorpusError::Io {
                path: "input".into(),
                source,
            })
        })
        .filter(|r| match r {
            Ok((_, l)) => {
                let t = l.trim();
                !t.is_empty() && !t.starts_with('#')
            }
            Err(_) => true,
        })
}

fn parse_raw<R: BufRead>(source: R) -> Result<Vec<FormantSample>, CorpusError> {
    let mut samples = Vec::new();
    let mut reps: BTreeMap<(u32, Vowel), u8> = BTreeMap::new();
    for row in content_lines(source) {
        let (line, text) = row?;
        let fields = split_fields(&text);
        if fields.len() != 8 {
            return Err(malformed(line, format!("expected 8 fields, found {}", fields.len())));
        }
        let group = parse_group(fields[0], line)?;
        let speaker_id: u32 = parse_num(fields[1], line, "speaker id")?;
        if speaker_id == 0 {
            return Err(malformed(line, "speaker id must be positive"));
        }
        let index = Vowel::parse_label(fields[2]).ok_or_else(|| CorpusError::UnknownVowelCode {
            line,
            code: fields[2].to_string(),
        })?;
        let (vowel, unanimous) = parse_vowel_code(fields[3], line)?;
        if index != vowel {
            return Err(malformed(
                line,
                format!("vowel index `{}` disagrees with code `{}`", fields[2], fields[3]),
            ));
        }
        let rep = reps.entry((speaker_id, vowel)).or_insert(0);
        *rep += 1;
        let sample = FormantSample {
            speaker_id,
            group,
            vowel,
            repetition: *rep,
            f0_hz: parse_num(fields[4], line, "F0")?,
            f1_hz: parse_num(fields[5], line, "F1")?,
            f2_hz: parse_num(fields[6], line, "F2")?,
            f3_hz: parse_num(fields[7], line, "F3")?,
            unanimous,
        };
        sample.check(line)?;
        samples.push(sample);
    }
    Ok(samples)
}

fn parse_csv<R: BufRead>(source: R) -> Result<Vec<FormantSample>, CorpusError> {
    let mut samples = Vec::new();
    let mut header_seen = false;
    for row in content_lines(source) {
        let (line, text) = row?;
        if !header_seen {
            if text.trim() != CSV_HEADER {
                return Err(malformed(line, format!("expected header `{CSV_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(malformed(line, format!("expected 8 fields, found {}", fields.len())));
        }
        let group = parse_group(fields[0], line)?;
        let speaker_id: u32 = parse_num(fields[1], line, "speaker id")?;
        let (vowel, unanimous) = parse_vowel_code(fields[2], line)?;
        let repetition: u8 = parse_num(fields[3], line, "repetition")?;
        if !(1..=2).contains(&repetition) {
            return Err(malformed(line, "repetition must be 1 or 2"));
        }
        let sample = FormantSample {
            speaker_id,
            group,
            vowel,
            repetition,
            f0_hz: parse_num(fields[4], line, "F0")?,
            f1_hz: parse_num(fields[5], line, "F1")?,
            f2_hz: parse_num(fields[6], line, "F2")?,
            f3_hz: parse_num(fields[7], line, "F3")?,
            unanimous,
        };
        sample.check(line)?;
        samples.push(sample);
    }
    Ok(samples)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn sample(
        speaker_id: u32,
        group: SpeakerGroup,
        vowel: Vowel,
        repetition: u8,
        f: [f64; 3],
    ) -> FormantSample {
        FormantSample {
            speaker_id,
            group,
            vowel,
            repetition,
            f0_hz: 120.0,
            f1_hz: f[0],
            f2_hz: f[1],
            f3_hz: f[2],
            unanimous: true,
        }
    }

    #[test]
    fn single_row() {
        let c = Corpus::parse("1 1 1 IY 160 240 2280 2850\n".as_bytes(), CorpusFormat::Raw, "t").unwrap();
        assert_eq!(c.len(), 1);
        let s = c.samples()[0];
        assert_eq!(s.group, SpeakerGroup::Man);
        assert_eq!(s.vowel, Vowel::IY);
        assert_eq!(s.repetition, 1);
        assert_eq!(s.formants(), [240.0, 2280.0, 2850.0]);
    }

    #[test]
    fn comma_delimited_lowercase_and_flags() {
        let text = "# header comment\n2,40,2,*ih,223,480,2110,2890\n2,40,2,ih,220,470.5,2100,2900\n";
        let c = Corpus::parse(text.as_bytes(), CorpusFormat::Raw, "t").unwrap();
        assert_eq!(c.len(), 2);
        assert!(!c.samples()[0].unanimous);
        assert!(c.samples()[1].unanimous);
        assert_eq!(c.samples()[1].repetition, 2);
        assert_eq!(c.samples()[1].f1_hz, 470.5);
        assert_eq!(c.unanimous_only().unwrap().len(), 1);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = "1 1 1 IY 160 240 2280 2850\n1 1 2 IH 160 2000 1500 2850\n";
        match Corpus::parse(bad.as_bytes(), CorpusFormat::Raw, "t") {
            Err(CorpusError::NonMonotonicFormants { line }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Corpus::parse("1 1 1 XX 160 240 2280 2850\n".as_bytes(), CorpusFormat::Raw, "t") {
            Err(CorpusError::UnknownVowelCode { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match Corpus::parse("\n1 1 1 IY 160 240\n".as_bytes(), CorpusFormat::Raw, "t") {
            Err(CorpusError::MalformedRow { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match Corpus::parse("1 1 2 IY 160 240 2280 2850\n".as_bytes(), CorpusFormat::Raw, "t") {
            Err(CorpusError::MalformedRow { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn split_and_unpaired() {
        let two = Corpus::new(
            vec![
                sample(1, SpeakerGroup::Man, Vowel::IY, 1, [270.0, 2290.0, 3010.0]),
                sample(1, SpeakerGroup::Man, Vowel::IY, 2, [280.0, 2280.0, 3000.0]),
            ],
            "t",
        );
        let (train, test) = two.split_repetitions().unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
        assert_eq!(train.samples()[0].repetition, 1);

        let one = Corpus::new(vec![two.samples()[0]], "t");
        assert!(matches!(
            one.split_repetitions(),
            Err(CorpusError::UnpairedUtterance {
                speaker: 1,
                vowel: Vowel::IY,
                found: 1
            })
        ));
    }

    #[test]
    fn empty_selection() {
        let c = Corpus::new(
            vec![sample(1, SpeakerGroup::Man, Vowel::IY, 1, [270.0, 2290.0, 3010.0])],
            "t",
        );
        assert!(matches!(
            c.pool(&[SpeakerGroup::Child].into_iter().collect()),
            Err(CorpusError::EmptyResult)
        ));
        assert!(matches!(
            c.filter_vowels(&[Vowel::ER].into_iter().collect()),
            Err(CorpusError::EmptyResult)
        ));
    }

    #[test]
    fn vowel_labels() {
        assert_eq!(Vowel::parse_label("uw"), Some(Vowel::UW));
        assert_eq!(Vowel::parse_label("10"), Some(Vowel::ER));
        assert_eq!(Vowel::parse_label("0"), None);
        for v in Vowel::ALL {
            assert_eq!(Vowel::from_index(v.index()), Some(v));
        }
    }
}
