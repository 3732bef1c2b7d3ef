//! Browser bindings over the bundled Peterson & Barney table: scatter plots
//! per procedure, a hypothesize-test explorer for typed-in formants, and
//! accuracy reports.

use std::sync::OnceLock;

use formant_norm::normalize::{iht_hypotheses, intrinsic_normalize};
use formant_norm::plot::{distance_rays_fitted, emit_distance_rays, emit_scatter, scatter_for};
use formant_norm::{
    evaluate, Corpus, FormantSample, Highlight, Method, Model, ModelOptions, PlotFormat, Pool, SpeakerGroup, Split,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn working() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        Corpus::peterson_barney()
            .working_set()
            .expect("bundled corpus has the working vowels")
    })
}

fn pooled(pool: &str) -> Result<Corpus, String> {
    let pool: Pool = pool.parse()?;
    working().pooled(pool).map_err(|e| e.to_string())
}

/// SVG scatter of a procedure's in-sample values for a pool.
pub fn scatter(method: &str, pool: &str) -> Result<String, String> {
    let method: Method = method.parse()?;
    let spec = scatter_for(method, &pooled(pool)?, &ModelOptions::default()).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    emit_scatter(&spec, &mut out, PlotFormat::Svg).map_err(|e| e.to_string())?;
    String::from_utf8(out).map_err(|e| e.to_string())
}

/// Hypothesize-test on typed-in formants against MWC statistics: JSON with
/// every hypothesis, the winner, the raw nearest vowel and a rays SVG.
pub fn hypothesize(f1: f64, f2: f64, f3: f64, weighted: bool) -> Result<String, String> {
    let pool = pooled("mwc")?;
    let mut sample = FormantSample {
        speaker_id: 0,
        group: SpeakerGroup::Man,
        vowel: formant_norm::Vowel::IY,
        repetition: 1,
        // F0 plays no part in any procedure.
        f0_hz: 1.0,
        f1_hz: f1,
        f2_hz: f2,
        f3_hz: f3,
        unanimous: true,
    };
    sample.check(1).map_err(|e| e.to_string())?;

    let options = ModelOptions::default();
    let raw = Model::fit(Method::Raw, &pool, &options).map_err(|e| e.to_string())?;
    let iht = Model::fit(Method::Iht, &pool, &options).map_err(|e| e.to_string())?;
    let (raw_vowel, _) = raw.classify(&sample).map_err(|e| e.to_string())?;
    let (chosen, _) = iht.classify(&sample).map_err(|e| e.to_string())?;
    sample.vowel = chosen;

    let nf = intrinsic_normalize(&sample);
    let hyps =
        iht_hypotheses(&nf, iht.raw_hz_stats().expect("iht model"), iht.feature_stats()).map_err(|e| e.to_string())?;
    let highlight = if weighted {
        Highlight::Weighted
    } else {
        Highlight::Euclidean
    };
    let mut spec = distance_rays_fitted(&iht, &sample, highlight).map_err(|e| e.to_string())?;
    spec.title = format!("hypotheses for F1 {f1:.0}, F2 {f2:.0}, F3 {f3:.0} Hz");
    let mut svg = Vec::new();
    emit_distance_rays(&spec, &mut svg).map_err(|e| e.to_string())?;

    let value = json!({
        "nf": nf.nf.map(|x| (x * 1e4).round() / 1e4),
        "gm123": (nf.gm123 * 1e4).round() / 1e4,
        "chosen": chosen.code(),
        "chosen_ipa": chosen.ipa(),
        "raw_nearest": raw_vowel.code(),
        "hypotheses": hyps.iter().map(|h| json!({
            "vowel": h.vowel.code(),
            "ipa": h.vowel.ipa(),
            "df_hz": [(h.df[0] * 1e4).round() / 1e4, (h.df[1] * 1e4).round() / 1e4],
            "point_mel": [(h.point[0] * 1e4).round() / 1e4, (h.point[1] * 1e4).round() / 1e4],
            "distance": (h.distance_sq.sqrt() * 1e4).round() / 1e4,
        })).collect::<Vec<_>>(),
        "svg": String::from_utf8(svg).map_err(|e| e.to_string())?,
    });
    Ok(value.to_string())
}

/// Classification report JSON.
pub fn report(method: &str, pool: &str, split: &str) -> Result<String, String> {
    let r = evaluate(
        working(),
        method.parse()?,
        pool.parse()?,
        split.parse::<Split>()?,
        &ModelOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    Ok(r.to_json())
}

#[wasm_bindgen(js_name = scatterSvg)]
pub fn scatter_svg(method: &str, pool: &str) -> Result<String, JsValue> {
    scatter(method, pool).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = hypothesizeTest)]
pub fn hypothesize_test(f1: f64, f2: f64, f3: f64, weighted: bool) -> Result<String, JsValue> {
    hypothesize(f1, f2, f3, weighted).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = evaluateReport)]
pub fn evaluate_report(method: &str, pool: &str, split: &str) -> Result<String, JsValue> {
    report(method, pool, split).map_err(|e| JsValue::from_str(&e))
}
