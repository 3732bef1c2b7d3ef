//! Scatter plots with per-vowel cross-hairs and corner-vowel triangles, and
//! distance-ray illustrations, rendered as SVG or plot-ready CSV.
//!
//! Axes follow the Peterson & Barney orientation: x1 grows to the right and
//! x2 grows upwards, so /u/ sits near the bottom-left.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, FormantSample, SpeakerGroup, Vowel};
use crate::normalize::{iht_hypotheses, intrinsic_normalize, NormalizeError};
use crate::pipeline::{projected_stats, Method, Model, ModelOptions, NormalizedSample, PipelineError};
use crate::scales::{hz_to_mel, ScaleError, Space};
use crate::stats::{StatsError, VowelStatistics};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no {vowel} mean available for the {group} vowel triangle")]
    MissingCorner { group: SpeakerGroup, vowel: Vowel },
    #[error("nothing to plot")]
    Empty,
    #[error("ray plots need the raw or iht method, got {0}")]
    UnsupportedRayMethod(Method),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Marker {
    FilledDot,
    Plus,
    Triangle,
    Diamond,
    Circle,
    Hexagon,
    Cross,
    Square,
    Star,
    Ring,
}

pub fn marker(vowel: Vowel) -> Marker {
    match vowel {
        Vowel::IY => Marker::FilledDot,
        Vowel::IH => Marker::Plus,
        Vowel::EH => Marker::Triangle,
        Vowel::AE => Marker::Diamond,
        Vowel::AH => Marker::Circle,
        Vowel::AA => Marker::Hexagon,
        Vowel::AO => Marker::Cross,
        Vowel::UH => Marker::Square,
        Vowel::UW => Marker::Star,
        Vowel::ER => Marker::Ring,
    }
}

pub fn color(group: SpeakerGroup) -> &'static str {
    match group {
        SpeakerGroup::Man => "blue",
        SpeakerGroup::Woman => "red",
        SpeakerGroup::Child => "black",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub x: [f64; 2],
    pub vowel: Vowel,
    pub group: SpeakerGroup,
}

/// Mean marker with half-widths of one SD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crosshair {
    pub vowel: Vowel,
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

/// Corner-vowel triangle; vertices are the /i/, /ɑ/ and /u/ means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VowelTriangle {
    pub group: SpeakerGroup,
    pub vertices: [[f64; 2]; 3],
}

impl VowelTriangle {
    /// Range of the vertices along each axis.
    pub fn extents(&self) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (k, e) in out.iter_mut().enumerate() {
            let vals = self.vertices.map(|v| v[k]);
            let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            *e = max - min;
        }
        out
    }

    /// Mean Euclidean distance between corresponding vertices.
    pub fn offset(&self, other: &VowelTriangle) -> f64 {
        self.vertices
            .iter()
            .zip(&other.vertices)
            .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
            .sum::<f64>()
            / 3.0
    }
}

pub const CORNERS: [Vowel; 3] = [Vowel::IY, Vowel::AA, Vowel::UW];

/// Triangle through the corner-vowel means of one group's statistics.
pub fn vowel_triangle(stats: &VowelStatistics, group: SpeakerGroup) -> Result<VowelTriangle, PlotError> {
    let mut vertices = [[0.0; 2]; 3];
    for (v, corner) in vertices.iter_mut().zip(CORNERS) {
        let row = stats
            .get(corner)
            .map_err(|_| PlotError::MissingCorner { group, vowel: corner })?;
        *v = [row[0].mean, row[1].mean];
    }
    Ok(VowelTriangle { group, vertices })
}

/// Per-group triangles from projected points (means of the classifier
/// features, grouped by true label).
pub fn group_triangles(points: &[NormalizedSample], groups: &[SpeakerGroup]) -> Result<Vec<VowelTriangle>, PlotError> {
    groups
        .iter()
        .map(|&g| {
            let own: Vec<NormalizedSample> = points.iter().filter(|p| p.sample.group == g).copied().collect();
            if own.is_empty() {
                return Err(PlotError::Empty);
            }
            vowel_triangle(&projected_stats(&own)?, g)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub space: Space,
    pub points: Vec<ScatterPoint>,
    pub crosshairs: Vec<Crosshair>,
    pub triangles: Vec<VowelTriangle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Svg,
    Csv,
}

impl std::str::FromStr for PlotFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "svg" => Ok(PlotFormat::Svg),
            "csv" => Ok(PlotFormat::Csv),
            _ => Err(format!("unknown format `{s}` (expected svg or csv)")),
        }
    }
}

fn axis_names(method: Method) -> (&'static str, &'static str) {
    match method {
        Method::Raw => ("F1", "F2"),
        Method::Intrinsic => ("NF1", "NF2"),
        Method::Gmagm => ("NNF1", "NNF2"),
        Method::Iht => ("DF1", "DF2"),
        Method::Lobanov => ("Z1", "Z2"),
        Method::Wattfab => ("S1", "S2"),
    }
}

/// In-sample scatter for a procedure: every sample of `pool`, the per-vowel
/// means of the plotted values, and the man/woman corner triangles.
pub fn scatter_for(method: Method, pool: &Corpus, options: &ModelOptions) -> Result<ScatterSpec, PlotError> {
    let model = Model::fit(method, pool, options)?;
    let projected = model.project_all(pool)?;
    scatter_from_projection(method, &projected)
}

pub fn scatter_from_projection(method: Method, projected: &[NormalizedSample]) -> Result<ScatterSpec, PlotError> {
    if projected.is_empty() {
        return Err(PlotError::Empty);
    }
    let space = projected[0].feature_space;
    let stats = projected_stats(projected)?;
    let crosshairs = stats
        .iter()
        .map(|(vowel, row)| Crosshair {
            vowel,
            mean: [row[0].mean, row[1].mean],
            sd: [row[0].sd, row[1].sd],
        })
        .collect();
    let adults: Vec<SpeakerGroup> = [SpeakerGroup::Man, SpeakerGroup::Woman]
        .into_iter()
        .filter(|g| projected.iter().any(|p| p.sample.group == *g))
        .collect();
    let triangles = group_triangles(projected, &adults)?;
    let (x, y) = axis_names(method);
    let unit = match space {
        Space::Mel => " (mel)",
        Space::Hz => " (Hz)",
        Space::Ratio => "",
    };
    Ok(ScatterSpec {
        title: format!("{y} versus {x}: {method}"),
        x_label: format!("{x}{unit}"),
        y_label: format!("{y}{unit}"),
        space,
        points: projected
            .iter()
            .map(|p| ScatterPoint {
                x: p.features,
                vowel: p.sample.vowel,
                group: p.sample.group,
            })
            .collect(),
        crosshairs,
        triangles,
    })
}

pub fn emit_scatter<W: Write>(spec: &ScatterSpec, mut sink: W, format: PlotFormat) -> Result<(), PlotError> {
    if spec.points.is_empty() {
        return Err(PlotError::Empty);
    }
    match format {
        PlotFormat::Csv => {
            let s = spec.space.name();
            writeln!(sink, "x1_{s},x2_{s},vowel,group")?;
            for p in &spec.points {
                writeln!(sink, "{},{},{},{}", p.x[0], p.x[1], p.vowel, p.group)?;
            }
        }
        PlotFormat::Svg => {
            let mut extent: Vec<[f64; 2]> = spec.points.iter().map(|p| p.x).collect();
            extent.extend(spec.crosshairs.iter().map(|c| c.mean));
            let mut svg = Svg::new(&extent, &spec.title, &spec.x_label, &spec.y_label);
            for t in &spec.triangles {
                svg.triangle(t);
            }
            for p in &spec.points {
                svg.glyph("pt", p.x, marker(p.vowel), color(p.group));
            }
            for c in &spec.crosshairs {
                svg.crosshair(c);
            }
            svg.legend(&spec.triangles);
            sink.write_all(svg.finish().as_bytes())?;
        }
    }
    Ok(())
}

/// Which ray gets highlighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Highlight {
    /// Shortest unweighted ray.
    #[default]
    Euclidean,
    /// Smallest weighted (WED) distance.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    pub vowel: Vowel,
    pub from: [f64; 2],
    pub to: [f64; 2],
    /// Unweighted length.
    pub length: f64,
    pub wed_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRaySpec {
    pub title: String,
    pub sample: FormantSample,
    pub method: Method,
    pub rays: Vec<Ray>,
    pub crosshairs: Vec<Crosshair>,
    /// Index into `rays`.
    pub highlighted: usize,
}

impl DistanceRaySpec {
    pub fn highlighted_vowel(&self) -> Vowel {
        self.rays[self.highlighted].vowel
    }
}

fn ray(vowel: Vowel, from: [f64; 2], row: &[crate::stats::MeanSd]) -> Ray {
    let to = [row[0].mean, row[1].mean];
    Ray {
        vowel,
        from,
        to,
        length: ((from[0] - to[0]).powi(2) + (from[1] - to[1]).powi(2)).sqrt(),
        wed_sq: ((from[0] - to[0]) / row[0].sd).powi(2) + ((from[1] - to[1]) / row[1].sd).powi(2),
    }
}

/// Rays for one sample against a pool's statistics. Raw mode draws every
/// ray from the sample's own (F1, F2); iht mode draws each ray from that
/// hypothesis' de-normalized point to the hypothesized vowel's mean.
pub fn distance_rays(
    method: Method,
    pool: &Corpus,
    sample: &FormantSample,
    highlight: Highlight,
    options: &ModelOptions,
) -> Result<DistanceRaySpec, PlotError> {
    distance_rays_fitted(&Model::fit(method, pool, options)?, sample, highlight)
}

/// [`distance_rays`] against an already fitted raw or iht model.
pub fn distance_rays_fitted(
    model: &Model,
    sample: &FormantSample,
    highlight: Highlight,
) -> Result<DistanceRaySpec, PlotError> {
    let method = model.method();
    let stats = model.feature_stats();
    let rays: Vec<Ray> = match method {
        Method::Raw => {
            let x = [hz_to_mel(sample.f1_hz)?, hz_to_mel(sample.f2_hz)?];
            stats.iter().map(|(v, row)| ray(v, x, row)).collect()
        }
        Method::Iht => {
            let raw = model.raw_hz_stats().expect("iht keeps raw statistics");
            iht_hypotheses(&intrinsic_normalize(sample), raw, stats)?
                .iter()
                .map(|h| Ok(ray(h.vowel, h.point, stats.get(h.vowel)?)))
                .collect::<Result<_, StatsError>>()?
        }
        other => return Err(PlotError::UnsupportedRayMethod(other)),
    };
    let key = |r: &Ray| match highlight {
        Highlight::Euclidean => r.length,
        Highlight::Weighted => r.wed_sq,
    };
    let highlighted = rays
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, r)| match best {
            Some((_, b)) if b <= key(r) => best,
            _ => Some((i, key(r))),
        })
        .ok_or(PlotError::Empty)?
        .0;
    let crosshairs = stats
        .iter()
        .map(|(vowel, row)| Crosshair {
            vowel,
            mean: [row[0].mean, row[1].mean],
            sd: [row[0].sd, row[1].sd],
        })
        .collect();
    Ok(DistanceRaySpec {
        title: format!(
            "{method} distances: speaker {} {} repetition {}",
            sample.speaker_id, sample.vowel, sample.repetition
        ),
        sample: *sample,
        method,
        rays,
        crosshairs,
        highlighted,
    })
}

pub fn emit_distance_rays<W: Write>(spec: &DistanceRaySpec, mut sink: W) -> Result<(), PlotError> {
    if spec.rays.is_empty() {
        return Err(PlotError::Empty);
    }
    let (x, y) = axis_names(spec.method);
    let mut extent: Vec<[f64; 2]> = spec.rays.iter().flat_map(|r| [r.from, r.to]).collect();
    extent.extend(spec.crosshairs.iter().map(|c| c.mean));
    let mut svg = Svg::new(&extent, &spec.title, &format!("{x} (mel)"), &format!("{y} (mel)"));
    for (i, r) in spec.rays.iter().enumerate() {
        svg.ray(r, i == spec.highlighted);
    }
    for c in &spec.crosshairs {
        svg.crosshair(c);
        svg.glyph("mean", c.mean, marker(c.vowel), "red");
    }
    match spec.method {
        Method::Iht => {
            for r in &spec.rays {
                svg.glyph("origin", r.from, marker(r.vowel), "blue");
            }
        }
        _ => svg.glyph("origin", spec.rays[0].from, marker(spec.sample.vowel), "blue"),
    }
    sink.write_all(svg.finish().as_bytes())?;
    Ok(())
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Minimal SVG writer with a fixed linear data-to-pixel map.
struct Svg {
    body: String,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Svg {
    fn new(extent: &[[f64; 2]], title: &str, x_label: &str, y_label: &str) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in extent {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in 0..2 {
            let span = (hi[k] - lo[k]).max(1e-9);
            lo[k] -= 0.05 * span;
            hi[k] += 0.05 * span;
        }
        let mut svg = Self {
            body: String::new(),
            lo,
            hi,
        };
        let _ = write!(
            svg.body,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            escape(title)
        );
        svg.axes(x_label, y_label);
        svg
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let w = WIDTH - LEFT - RIGHT;
        let h = HEIGHT - TOP - BOTTOM;
        (
            LEFT + (p[0] - self.lo[0]) / (self.hi[0] - self.lo[0]) * w,
            TOP + h - (p[1] - self.lo[1]) / (self.hi[1] - self.lo[1]) * h,
        )
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let (x0, y0) = (LEFT, HEIGHT - BOTTOM);
        let (x1, y1) = (WIDTH - RIGHT, TOP);
        let _ = writeln!(
            self.body,
            "<g class=\"axes\" stroke=\"#444\" fill=\"none\"><rect x=\"{x0}\" y=\"{y1}\" width=\"{:.1}\" height=\"{:.1}\"/></g>",
            x1 - x0,
            y0 - y1
        );
        for k in 0..2 {
            for t in ticks(self.lo[k], self.hi[k]) {
                let p = if k == 0 { [t, self.lo[1]] } else { [self.lo[0], t] };
                let (px, py) = self.px(p);
                let label = fmt_tick(t);
                if k == 0 {
                    let _ = writeln!(
                        self.body,
                        "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#444\"/><text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{label}</text>",
                        py + 5.0,
                        py + 18.0
                    );
                } else {
                    let _ = writeln!(
                        self.body,
                        "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{:.2}\" y2=\"{py:.2}\" stroke=\"#444\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>",
                        px - 5.0,
                        px - 8.0,
                        py + 4.0
                    );
                }
            }
        }
        let _ = writeln!(
            self.body,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n<text transform=\"translate(18 {:.1}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            HEIGHT - 12.0,
            escape(x_label),
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(y_label)
        );
    }

    fn glyph(&mut self, class: &str, p: [f64; 2], m: Marker, color: &str) {
        let (x, y) = self.px(p);
        self.body.push_str(&glyph_svg(class, x, y, 3.5, m, color));
        self.body.push('\n');
    }

    fn crosshair(&mut self, c: &Crosshair) {
        let (x, y) = self.px(c.mean);
        let (xl, _) = self.px([c.mean[0] - c.sd[0], c.mean[1]]);
        let (xr, _) = self.px([c.mean[0] + c.sd[0], c.mean[1]]);
        let (_, yb) = self.px([c.mean[0], c.mean[1] - c.sd[1]]);
        let (_, yt) = self.px([c.mean[0], c.mean[1] + c.sd[1]]);
        let _ = writeln!(
            self.body,
            "<g class=\"xh\" data-vowel=\"{}\" stroke=\"#2a2\" stroke-width=\"1.5\"><line x1=\"{xl:.2}\" y1=\"{y:.2}\" x2=\"{xr:.2}\" y2=\"{y:.2}\"/><line x1=\"{x:.2}\" y1=\"{yb:.2}\" x2=\"{x:.2}\" y2=\"{yt:.2}\"/></g>",
            c.vowel
        );
    }

    fn triangle(&mut self, t: &VowelTriangle) {
        let pts: Vec<String> = t
            .vertices
            .iter()
            .map(|v| {
                let (x, y) = self.px(*v);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            "<polygon class=\"tri\" data-group=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" stroke-dasharray=\"6 3\"/>",
            t.group,
            pts.join(" "),
            color(t.group)
        );
    }

    fn ray(&mut self, r: &Ray, best: bool) {
        let (x1, y1) = self.px(r.from);
        let (x2, y2) = self.px(r.to);
        let (class, stroke, width) = if best {
            ("ray best", "#e80", 3.0)
        } else {
            ("ray", "#888", 1.0)
        };
        let _ = writeln!(
            self.body,
            "<line class=\"{class}\" data-vowel=\"{}\" data-length=\"{:.4}\" x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            r.vowel, r.length
        );
    }

    fn legend(&mut self, triangles: &[VowelTriangle]) {
        let x = WIDTH - RIGHT + 20.0;
        let mut y = TOP + 10.0;
        for v in Vowel::ALL {
            self.body.push_str(&glyph_svg("key", x, y, 4.0, marker(v), "#333"));
            let _ = writeln!(
                self.body,
                "<text x=\"{:.1}\" y=\"{:.1}\">/{}/ {}</text>",
                x + 12.0,
                y + 4.0,
                v.ipa(),
                v
            );
            y += 18.0;
        }
        y += 10.0;
        for g in SpeakerGroup::ALL {
            let _ = writeln!(
                self.body,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"8\" height=\"8\" fill=\"{}\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
                x - 4.0,
                y - 4.0,
                color(g),
                x + 12.0,
                y + 4.0,
                g
            );
            y += 18.0;
        }
        if !triangles.is_empty() {
            let _ = writeln!(
                self.body,
                "<text x=\"{:.1}\" y=\"{:.1}\">dashed: /i/-/ɑ/-/u/</text>",
                x - 4.0,
                y + 8.0
            );
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn glyph_svg(class: &str, x: f64, y: f64, r: f64, m: Marker, color: &str) -> String {
    let stroke = format!("fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"");
    let polygon = |pts: &[(f64, f64)]| {
        let p: Vec<String> = pts
            .iter()
            .map(|(dx, dy)| format!("{:.2},{:.2}", x + dx * r, y + dy * r))
            .collect();
        format!("<polygon class=\"{class}\" points=\"{}\" {stroke}/>", p.join(" "))
    };
    match m {
        Marker::FilledDot => format!(
            "<circle class=\"{class}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"{color}\"/>",
            r * 0.8
        ),
        Marker::Circle => format!("<circle class=\"{class}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" {stroke}/>"),
        Marker::Ring => format!(
            "<circle class=\"{class}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" {stroke}/>",
            r * 0.5
        ),
        Marker::Plus => format!(
            "<path class=\"{class}\" d=\"M{:.2} {y:.2}H{:.2}M{x:.2} {:.2}V{:.2}\" {stroke}/>",
            x - r,
            x + r,
            y - r,
            y + r
        ),
        Marker::Cross => format!(
            "<path class=\"{class}\" d=\"M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}\" {stroke}/>",
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        ),
        Marker::Square => format!(
            "<rect class=\"{class}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" {stroke}/>",
            x - r * 0.8,
            y - r * 0.8,
            r * 1.6,
            r * 1.6
        ),
        Marker::Triangle => polygon(&[(0.0, -1.0), (0.87, 0.5), (-0.87, 0.5)]),
        Marker::Diamond => polygon(&[(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)]),
        Marker::Hexagon => polygon(&[
            (1.0, 0.0),
            (0.5, 0.87),
            (-0.5, 0.87),
            (-1.0, 0.0),
            (-0.5, -0.87),
            (0.5, -0.87),
        ]),
        Marker::Star => {
            let pts: Vec<(f64, f64)> = (0..10)
                .map(|k| {
                    let a = std::f64::consts::PI * (k as f64) / 5.0 - std::f64::consts::FRAC_PI_2;
                    let rr = if k % 2 == 0 { 1.0 } else { 0.45 };
                    (rr * a.cos(), rr * a.sin())
                })
                .collect();
            polygon(&pts)
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(t: f64) -> String {
    if t.abs() >= 100.0 {
        format!("{t:.0}")
    } else {
        let s = format!("{t:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::sample;
    use crate::stats::Stage;

    fn one_point_spec() -> ScatterSpec {
        ScatterSpec {
            title: "t".into(),
            x_label: "F1 (mel)".into(),
            y_label: "F2 (mel)".into(),
            space: Space::Mel,
            points: vec![ScatterPoint {
                x: [400.123456789, 1500.5],
                vowel: Vowel::IY,
                group: SpeakerGroup::Woman,
            }],
            crosshairs: vec![],
            triangles: vec![],
        }
    }

    #[test]
    fn single_glyph_svg_and_csv() {
        let spec = one_point_spec();
        let mut svg = Vec::new();
        emit_scatter(&spec, &mut svg, PlotFormat::Svg).unwrap();
        let svg = String::from_utf8(svg).unwrap();
        assert_eq!(svg.matches("class=\"pt\"").count(), 1);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));

        let mut csv = Vec::new();
        emit_scatter(&spec, &mut csv, PlotFormat::Csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "x1_mel,x2_mel,vowel,group");
        let x: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(x, 400.123456789);
    }

    #[test]
    fn empty_spec_rejected() {
        let mut spec = one_point_spec();
        spec.points.clear();
        assert!(matches!(
            emit_scatter(&spec, Vec::new(), PlotFormat::Svg),
            Err(PlotError::Empty)
        ));
    }

    #[test]
    fn triangle_vertices_are_the_means() {
        let rows = [
            (Vowel::IY, [300.0, 2300.0]),
            (Vowel::IY, [320.0, 2500.0]),
            (Vowel::AA, [700.0, 1100.0]),
            (Vowel::AA, [740.0, 1140.0]),
            (Vowel::UW, [330.0, 900.0]),
            (Vowel::UW, [350.0, 1000.0]),
        ];
        let st =
            VowelStatistics::from_features(rows.iter().map(|(v, x)| (*v, &x[..])), Space::Mel, Stage::Raw).unwrap();
        let t = vowel_triangle(&st, SpeakerGroup::Man).unwrap();
        assert_eq!(t.vertices, [[310.0, 2400.0], [720.0, 1120.0], [340.0, 950.0]]);
        assert_eq!(t.extents(), [410.0, 1450.0]);
        assert_eq!(t.offset(&t), 0.0);

        let no_uw = VowelStatistics::from_features(rows[..4].iter().map(|(v, x)| (*v, &x[..])), Space::Mel, Stage::Raw)
            .unwrap();
        assert!(matches!(
            vowel_triangle(&no_uw, SpeakerGroup::Man),
            Err(PlotError::MissingCorner { vowel: Vowel::UW, .. })
        ));
    }

    #[test]
    fn ray_at_a_mean_is_zero_and_highlighted() {
        let mut samples = Vec::new();
        for (k, (v, f)) in [
            (Vowel::IY, [270.0, 2290.0, 3010.0]),
            (Vowel::AA, [730.0, 1090.0, 2440.0]),
            (Vowel::UW, [300.0, 870.0, 2240.0]),
        ]
        .into_iter()
        .enumerate()
        {
            samples.push(sample(k as u32 + 1, SpeakerGroup::Man, v, 1, f.map(|x| x * 0.95)));
            samples.push(sample(k as u32 + 1, SpeakerGroup::Man, v, 2, f.map(|x| x * 1.05)));
        }
        let pool = Corpus::new(samples, "t");
        let model = Model::fit(Method::Raw, &pool, &ModelOptions::default()).unwrap();
        let m = model.feature_stats().means(Vowel::AA).unwrap();
        let mut probe = pool.samples()[2];
        probe.f1_hz = crate::scales::mel_to_hz(m[0]).unwrap();
        probe.f2_hz = crate::scales::mel_to_hz(m[1]).unwrap();
        let spec = distance_rays(
            Method::Raw,
            &pool,
            &probe,
            Highlight::Euclidean,
            &ModelOptions::default(),
        )
        .unwrap();
        assert_eq!(spec.rays.len(), 3);
        assert_eq!(spec.highlighted_vowel(), Vowel::AA);
        assert!(spec.rays[spec.highlighted].length < 1e-6);

        let mut out = Vec::new();
        emit_distance_rays(&spec, &mut out).unwrap();
        let svg = String::from_utf8(out).unwrap();
        assert_eq!(svg.matches("class=\"ray").count(), 3);
        assert_eq!(svg.matches("class=\"ray best\"").count(), 1);
    }

    #[test]
    fn tick_spacing() {
        assert_eq!(ticks(0.0, 60.0), vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        assert_eq!(fmt_tick(0.25), "0.25");
        assert_eq!(fmt_tick(1200.0), "1200");
    }
}
