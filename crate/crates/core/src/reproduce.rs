//! One-shot regeneration of every reported accuracy and figure, with a
//! comparison table of published against computed values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::classify::{evaluate, ClassificationReport, EvaluateError, Split};
use crate::corpus::{Corpus, CorpusError, FormantSample, Pool, SpeakerGroup, Vowel};
use crate::pipeline::{projected_stats, Method, Model, ModelOptions, NormalizedSample, PipelineError};
use crate::plot::{
    distance_rays_fitted, emit_distance_rays, emit_scatter, group_triangles, scatter_from_projection, DistanceRaySpec,
    Highlight, PlotError, PlotFormat, VowelTriangle,
};
use crate::stats::StatsError;

/// Allowed gap between published and computed accuracies, in percentage
/// points.
pub const TOLERANCE_PP: f64 = 1.5;

/// Required ratio of raw to iht man/woman triangle vertex offsets.
pub const TRIANGLE_SHRINK: f64 = 4.0;

#[derive(Debug, Error)]
pub enum ReproduceError {
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("classify: {0}")]
    Evaluate(#[from] EvaluateError),
    #[error("normalize: {0}")]
    Pipeline(#[from] PipelineError),
    #[error("stats: {0}")]
    Stats(#[from] StatsError),
    #[error("plot: {0}")]
    Plot(#[from] PlotError),
    #[error("no /ɑ/ sample is closer to /ɔ/ than to its own mean in raw space")]
    NoRayExample,
    #[error("write: {0}")]
    Io(#[from] std::io::Error),
}

/// A published accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTarget {
    pub method: Method,
    pub pool: Pool,
    pub split: Split,
    pub percent: f64,
    /// Reported but not blocking.
    pub advisory: bool,
}

const fn target(method: Method, pool: Pool, split: Split, percent: f64, advisory: bool) -> AccuracyTarget {
    AccuracyTarget {
        method,
        pool,
        split,
        percent,
        advisory,
    }
}

pub const ACCURACY_TARGETS: [AccuracyTarget; 11] = [
    target(Method::Raw, Pool::Mw, Split::InSample, 82.9, false),
    target(Method::Raw, Pool::Mwc, Split::InSample, 77.2, false),
    target(Method::Wattfab, Pool::Mw, Split::InSample, 85.0, true),
    target(Method::Wattfab, Pool::Mwc, Split::InSample, 84.5, true),
    target(Method::Lobanov, Pool::Mw, Split::InSample, 85.7, false),
    target(Method::Lobanov, Pool::Mwc, Split::InSample, 84.4, false),
    target(Method::Iht, Pool::Mw, Split::InSample, 95.2, false),
    target(Method::Iht, Pool::Mwc, Split::InSample, 94.9, false),
    target(Method::Gmagm, Pool::Mwc, Split::InSample, 91.4, false),
    target(Method::Iht, Pool::Mwc, Split::TrainTest, 94.6, false),
    target(Method::Iht, Pool::Mwc, Split::TrainOnTrain, 95.8, false),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    AdvisoryPass,
    AdvisoryFail,
}

impl Status {
    fn of(pass: bool, advisory: bool) -> Self {
        match (pass, advisory) {
            (true, false) => Status::Pass,
            (false, false) => Status::Fail,
            (true, true) => Status::AdvisoryPass,
            (false, true) => Status::AdvisoryFail,
        }
    }

    pub fn passed(self) -> bool {
        matches!(self, Status::Pass | Status::AdvisoryPass)
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::AdvisoryPass => "PASS (advisory)",
            Status::AdvisoryFail => "FAIL (advisory)",
        }
    }
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub label: String,
    pub published: String,
    pub computed: String,
    pub detail: String,
    pub status: Status,
}

/// Triangle and vowel-space ordering checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    /// Man and woman raw mel triangles.
    pub raw: [VowelTriangle; 2],
    /// Man and woman triangles of the final iht points.
    pub iht: [VowelTriangle; 2],
    /// MWC pooled intrinsic means of /ɔ/ and /u/ projected on the /ɑ/ to /i/
    /// axis, relative to /ɑ/ (positive is the /i/ side).
    pub distortion: Vec<(Vowel, f64)>,
    /// MWC pooled gmagm mel means of /ɑ/ and the back vowels.
    pub gmagm_means: Vec<(Vowel, [f64; 2])>,
}

pub const BACK_VOWELS: [Vowel; 3] = [Vowel::AO, Vowel::UH, Vowel::UW];

impl Geometry {
    pub fn compute(corpus: &Corpus, options: &ModelOptions) -> Result<Self, ReproduceError> {
        let adults = [SpeakerGroup::Man, SpeakerGroup::Woman];
        let mwc = corpus.pooled(Pool::Mwc)?;
        let tri = |method: Method| -> Result<[VowelTriangle; 2], ReproduceError> {
            let points = Model::fit(method, &mwc, options)?.project_all(&mwc)?;
            let t = group_triangles(&points, &adults)?;
            Ok([t[0], t[1]])
        };

        let nf = projected_stats(&Model::fit(Method::Intrinsic, &mwc, options)?.project_all(&mwc)?)?;
        let aa = nf.means(Vowel::AA)?;
        let iy = nf.means(Vowel::IY)?;
        let axis = [iy[0] - aa[0], iy[1] - aa[1]];
        let norm = axis[0].hypot(axis[1]);
        let distortion = [Vowel::AO, Vowel::UW]
            .into_iter()
            .map(|v| {
                let m = nf.means(v)?;
                Ok((v, ((m[0] - aa[0]) * axis[0] + (m[1] - aa[1]) * axis[1]) / norm))
            })
            .collect::<Result<_, StatsError>>()?;

        let gm = projected_stats(&Model::fit(Method::Gmagm, &mwc, options)?.project_all(&mwc)?)?;
        let gmagm_means = std::iter::once(Vowel::AA)
            .chain(BACK_VOWELS)
            .map(|v| {
                let m = gm.means(v)?;
                Ok((v, [m[0], m[1]]))
            })
            .collect::<Result<_, StatsError>>()?;

        Ok(Self {
            raw: tri(Method::Raw)?,
            iht: tri(Method::Iht)?,
            distortion,
            gmagm_means,
        })
    }

    /// Woman raw triangle wider than man's along both axes.
    pub fn female_larger(&self) -> bool {
        let (m, w) = (self.raw[0].extents(), self.raw[1].extents());
        w[0] > m[0] && w[1] > m[1]
    }

    pub fn raw_offset(&self) -> f64 {
        self.raw[0].offset(&self.raw[1])
    }

    pub fn iht_offset(&self) -> f64 {
        self.iht[0].offset(&self.iht[1])
    }

    pub fn shrink(&self) -> f64 {
        self.raw_offset() / self.iht_offset()
    }

    pub fn distortion_holds(&self) -> bool {
        self.distortion.iter().all(|(_, p)| *p > 0.0)
    }

    /// Every back vowel below /ɑ/ in x2, and /u/ also below in x1.
    pub fn gmagm_restored(&self) -> bool {
        let aa = self.gmagm_means[0].1;
        self.gmagm_means[1..]
            .iter()
            .all(|(v, m)| m[1] < aa[1] && (*v != Vowel::UW || m[0] < aa[0]))
    }
}

/// Everything `reproduce-all` computes.
#[derive(Debug, Clone)]
pub struct Reproduction {
    pub reports: Vec<(AccuracyTarget, ClassificationReport)>,
    pub geometry: Geometry,
    pub rows: Vec<Row>,
}

pub fn accuracy_status(t: &AccuracyTarget, r: &ClassificationReport) -> Status {
    Status::of((100.0 * r.accuracy - t.percent).abs() <= TOLERANCE_PP, t.advisory)
}

/// Runs every accuracy target and geometry check on a working-set corpus.
pub fn reproduce_all(corpus: &Corpus, options: &ModelOptions) -> Result<Reproduction, ReproduceError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyResult.into());
    }
    let reports = ACCURACY_TARGETS
        .iter()
        .map(|t| Ok((*t, evaluate(corpus, t.method, t.pool, t.split, options)?)))
        .collect::<Result<Vec<_>, ReproduceError>>()?;
    let geometry = Geometry::compute(corpus, options)?;

    let mut rows: Vec<Row> = reports
        .iter()
        .enumerate()
        .map(|(i, (t, r))| Row {
            id: format!("A{}", i + 1),
            label: format!("{} {} {} accuracy", t.method, t.pool, t.split),
            published: format!("{:.1}%", t.percent),
            computed: format!("{:.2}%", 100.0 * r.accuracy),
            detail: r.fraction(),
            status: accuracy_status(t, r),
        })
        .collect();

    let (m, w) = (geometry.raw[0].extents(), geometry.raw[1].extents());
    rows.push(Row {
        id: "G1".into(),
        label: "raw triangle extents, woman > man".into(),
        published: "larger".into(),
        computed: format!("{:.1}x{:.1} vs {:.1}x{:.1}", w[0], w[1], m[0], m[1]),
        detail: "mel".into(),
        status: Status::of(geometry.female_larger(), false),
    });
    rows.push(Row {
        id: "G2".into(),
        label: "iht triangle offset shrink vs raw".into(),
        published: format!(">= {TRIANGLE_SHRINK:.1}x"),
        computed: format!("{:.2}x", geometry.shrink()),
        detail: format!("{:.2}/{:.2} mel", geometry.raw_offset(), geometry.iht_offset()),
        status: Status::of(geometry.shrink() >= TRIANGLE_SHRINK, false),
    });
    rows.push(Row {
        id: "G3".into(),
        label: "intrinsic /ɔ/,/u/ on /i/ side of /ɑ/".into(),
        published: "> 0".into(),
        computed: geometry
            .distortion
            .iter()
            .map(|(v, p)| format!("{v} {p:+.4}"))
            .collect::<Vec<_>>()
            .join(", "),
        detail: "NF projection".into(),
        status: Status::of(geometry.distortion_holds(), false),
    });
    rows.push(Row {
        id: "G4".into(),
        label: "gmagm back vowels below /ɑ/".into(),
        published: "ordered".into(),
        computed: geometry
            .gmagm_means
            .iter()
            .map(|(v, m)| format!("{v} {:.0}/{:.0}", m[0], m[1]))
            .collect::<Vec<_>>()
            .join(", "),
        detail: "mel means".into(),
        status: Status::of(geometry.gmagm_restored(), false),
    });

    Ok(Reproduction {
        reports,
        geometry,
        rows,
    })
}

impl Reproduction {
    /// Fixed-width comparison table.
    pub fn table(&self) -> String {
        let width = |f: fn(&Row) -> &str, head: &str| {
            self.rows
                .iter()
                .map(|r| f(r).chars().count())
                .max()
                .unwrap_or(0)
                .max(head.len())
        };
        let wl = width(|r| &r.label, "criterion");
        let wp = width(|r| &r.published, "published");
        let wc = width(|r| &r.computed, "computed");
        let wd = width(|r| &r.detail, "detail");
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "id   {}  {}  {}  {}  status",
            pad("criterion", wl),
            pad("published", wp),
            pad("computed", wc),
            pad("detail", wd)
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}  {}  {}  {}  {}  {}",
                pad(&r.id, 3),
                pad(&r.label, wl),
                pad(&r.published, wp),
                pad(&r.computed, wc),
                pad(&r.detail, wd),
                r.status.label()
            );
        }
        let failed = self.rows.iter().filter(|r| r.status == Status::Fail).count();
        let _ = writeln!(
            out,
            "\n{} rows, {} failed (tolerance {TOLERANCE_PP} pp on accuracies)",
            self.rows.len(),
            failed
        );
        out
    }

    pub fn table_csv(&self) -> String {
        let mut out = String::from("id,criterion,published,computed,detail,status\n");
        for r in &self.rows {
            let q = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.id,
                q(&r.label),
                q(&r.published),
                q(&r.computed),
                q(&r.detail),
                r.status.label()
            );
        }
        out
    }

    /// Writes the table, every report and the figure set under `dir`.
    pub fn write_artifacts(&self, corpus: &Corpus, options: &ModelOptions, dir: &Path) -> Result<(), ReproduceError> {
        fs::create_dir_all(dir.join("reports"))?;
        fs::create_dir_all(dir.join("figures"))?;
        fs::write(dir.join("table.txt"), self.table())?;
        fs::write(dir.join("table.csv"), self.table_csv())?;
        for (t, r) in &self.reports {
            fs::write(
                dir.join("reports")
                    .join(format!("{}_{}_{}.json", t.method, t.pool, t.split)),
                r.to_json() + "\n",
            )?;
        }

        let mwc = corpus.pooled(Pool::Mwc)?;
        let figures = [
            ("scatter_raw", Method::Raw),
            ("scatter_iht", Method::Iht),
            ("scatter_lobanov", Method::Lobanov),
            ("scatter_wattfab", Method::Wattfab),
            ("scatter_intrinsic", Method::Intrinsic),
            ("scatter_gmagm", Method::Gmagm),
        ];
        for (name, method) in figures {
            let points: Vec<NormalizedSample> = Model::fit(method, &mwc, options)?.project_all(&mwc)?;
            let spec = scatter_from_projection(method, &points)?;
            let mut svg = Vec::new();
            emit_scatter(&spec, &mut svg, PlotFormat::Svg)?;
            fs::write(dir.join("figures").join(format!("{name}.svg")), svg)?;
            let mut csv = Vec::new();
            emit_scatter(&spec, &mut csv, PlotFormat::Csv)?;
            fs::write(dir.join("figures").join(format!("{name}.csv")), csv)?;
        }

        let (raw, iht) = ray_figures(&mwc, options)?;
        for (name, spec) in [("rays_raw", raw), ("rays_iht", iht)] {
            let mut svg = Vec::new();
            emit_distance_rays(&spec, &mut svg)?;
            fs::write(dir.join("figures").join(format!("{name}.svg")), svg)?;
        }
        Ok(())
    }
}

/// The /ɑ/ sample illustrated by the ray figures: the first one (file
/// order) whose nearest raw mean by unweighted distance is /ɔ/, preferring
/// one that hypothesize-test gets right.
pub fn ray_example(pool: &Corpus, options: &ModelOptions) -> Result<FormantSample, ReproduceError> {
    let raw = Model::fit(Method::Raw, pool, options)?;
    let iht = Model::fit(Method::Iht, pool, options)?;
    let mut first = None;
    for s in pool.iter().filter(|s| s.vowel == Vowel::AA) {
        let rays = distance_rays_fitted(&raw, s, Highlight::Euclidean)?;
        if rays.highlighted_vowel() != Vowel::AO {
            continue;
        }
        if iht.classify(s)?.0 == Vowel::AA {
            return Ok(*s);
        }
        first.get_or_insert(*s);
    }
    first.ok_or(ReproduceError::NoRayExample)
}

/// Raw (unweighted highlight) and iht (decision highlight) ray specs for
/// [`ray_example`].
pub fn ray_figures(
    pool: &Corpus,
    options: &ModelOptions,
) -> Result<(DistanceRaySpec, DistanceRaySpec), ReproduceError> {
    let s = ray_example(pool, options)?;
    let raw = distance_rays_fitted(&Model::fit(Method::Raw, pool, options)?, &s, Highlight::Euclidean)?;
    let iht = distance_rays_fitted(&Model::fit(Method::Iht, pool, options)?, &s, Highlight::Weighted)?;
    Ok((raw, iht))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_fails_first() {
        let empty = Corpus::new(Vec::new(), "empty");
        assert!(matches!(
            reproduce_all(&empty, &ModelOptions::default()),
            Err(ReproduceError::Corpus(CorpusError::EmptyResult))
        ));
    }

    #[test]
    fn status_labels() {
        assert!(Status::of(true, true).passed());
        assert!(!Status::of(false, false).passed());
        assert_eq!(Status::of(false, true).label(), "FAIL (advisory)");
    }
}
