use std::collections::BTreeMap;

use formant_norm::classify::nearest_vowel;
use formant_norm::normalize::{gma123, iht_denormalize, iht_hypotheses, intrinsic_normalize};
use formant_norm::plot::distance_rays;
use formant_norm::reproduce::ray_example;
use formant_norm::stats::SpeakerStatistics;
use formant_norm::{
    evaluate, Corpus, FormantSample, Highlight, Method, Model, ModelOptions, Pool, Space, Split, Vowel, VowelStatistics,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mwc() -> Corpus {
    Corpus::peterson_barney()
        .working_set()
        .unwrap()
        .pooled(Pool::Mwc)
        .unwrap()
}

fn mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

/// Per-vowel population mean and SD by plain accumulation.
fn naive_stats(rows: &[(Vowel, Vec<f64>)]) -> BTreeMap<Vowel, Vec<(f64, f64)>> {
    let mut groups: BTreeMap<Vowel, Vec<&Vec<f64>>> = BTreeMap::new();
    for (v, x) in rows {
        groups.entry(*v).or_default().push(x);
    }
    groups
        .into_iter()
        .map(|(v, xs)| {
            let n = xs.len() as f64;
            let dims = xs[0].len();
            let cells = (0..dims)
                .map(|k| {
                    let mut sum = 0.0;
                    for x in &xs {
                        sum += x[k];
                    }
                    let mean = sum / n;
                    let mut ss = 0.0;
                    for x in &xs {
                        ss += (x[k] - mean) * (x[k] - mean);
                    }
                    (mean, (ss / n).sqrt())
                })
                .collect();
            (v, cells)
        })
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn pooled_stats_match_naive_recomputation() {
    let pool = mwc();
    for space in [Space::Hz, Space::Mel] {
        let conv = |f: f64| if space == Space::Mel { mel(f) } else { f };
        let rows: Vec<(Vowel, Vec<f64>)> = pool
            .iter()
            .map(|s| (s.vowel, vec![conv(s.f1_hz), conv(s.f2_hz), conv(s.f3_hz)]))
            .collect();
        let expect = naive_stats(&rows);
        let got = VowelStatistics::raw(&pool, space).unwrap();
        assert_eq!(got.len(), 9);
        for (v, cells) in expect {
            let row = got.get(v).unwrap();
            for (k, (m, sd)) in cells.into_iter().enumerate() {
                assert!(close(row[k].mean, m, 1e-12), "{v} F{} mean", k + 1);
                assert!(close(row[k].sd, sd, 1e-9), "{v} F{} sd", k + 1);
            }
        }
    }
}

/// Hypothesize-test distances recomputed from scratch: raw Hz means, label
/// based DF points in mel, their statistics, then every hypothesis.
#[test]
fn iht_distances_match_brute_force_on_random_subset() {
    let pool = mwc();
    let hz_rows: Vec<(Vowel, Vec<f64>)> = pool
        .iter()
        .map(|s| (s.vowel, vec![s.f1_hz, s.f2_hz, s.f3_hz]))
        .collect();
    let mu = naive_stats(&hz_rows);
    let df = |s: &FormantSample, j: Vowel| -> [f64; 3] {
        let g = (s.f1_hz * s.f2_hz * s.f3_hz).cbrt();
        let m = &mu[&j];
        [s.f1_hz / g * m[0].0, s.f2_hz / g * m[1].0, s.f3_hz / g * m[2].0]
    };
    let labelled: Vec<(Vowel, Vec<f64>)> = pool
        .iter()
        .map(|s| {
            let d = df(s, s.vowel);
            (s.vowel, vec![mel(d[0]), mel(d[1])])
        })
        .collect();
    let boot = naive_stats(&labelled);

    let model = Model::fit(Method::Iht, &pool, &ModelOptions::default()).unwrap();
    let raw = model.raw_hz_stats().unwrap();
    let denorm = model.feature_stats();

    let mut rng = ChaCha8Rng::seed_from_u64(1952);
    let subset: Vec<&FormantSample> = pool.samples().choose_multiple(&mut rng, 50).collect();
    assert_eq!(subset.len(), 50);
    for s in subset {
        let nf = intrinsic_normalize(s);
        let hyps = iht_hypotheses(&nf, raw, denorm).unwrap();
        assert_eq!(hyps.len(), 9);
        let mut best = (Vowel::IY, f64::INFINITY);
        for h in &hyps {
            let d = df(s, h.vowel);
            let b = &boot[&h.vowel];
            let x = [mel(d[0]), mel(d[1])];
            let want = ((x[0] - b[0].0) / b[0].1).powi(2) + ((x[1] - b[1].0) / b[1].1).powi(2);
            assert!(close(h.distance_sq, want, 1e-9), "{s:?} {}", h.vowel);
            if want < best.1 {
                best = (h.vowel, want);
            }
        }
        let chosen = iht_denormalize(&nf, raw, denorm).unwrap();
        assert_eq!(chosen.vowel, best.0);
        assert!(close(chosen.distance.unwrap().powi(2), best.1, 1e-9));
    }
}

#[test]
fn nearest_vowel_matches_linear_scan_on_random_points() {
    let stats = VowelStatistics::raw(&mwc(), Space::Mel).unwrap();
    let cells: Vec<(Vowel, [f64; 4])> = stats
        .iter()
        .map(|(v, r)| (v, [r[0].mean, r[1].mean, r[0].sd, r[1].sd]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let x = [rng.gen_range(200.0..1300.0), rng.gen_range(600.0..2300.0)];
        let mut best: Option<(Vowel, f64)> = None;
        for (v, c) in &cells {
            let d = ((x[0] - c[0]) / c[2]).powi(2) + ((x[1] - c[1]) / c[3]).powi(2);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((*v, d));
            }
        }
        let (v, d) = nearest_vowel(x, &stats).unwrap();
        let (bv, bd) = best.unwrap();
        assert_eq!(v, bv);
        assert!(close(d, bd, 1e-12));
    }
}

#[test]
fn zscore_moments_per_speaker() {
    let pool = mwc();
    let model = Model::fit(Method::Lobanov, &pool, &ModelOptions::default()).unwrap();
    let points = model.project_all(&pool).unwrap();
    for speaker in pool.speakers() {
        let own: Vec<[f64; 2]> = points
            .iter()
            .filter(|p| p.sample.speaker_id == speaker)
            .map(|p| p.features)
            .collect();
        let n = own.len() as f64;
        for k in 0..2 {
            let mean = own.iter().map(|x| x[k]).sum::<f64>() / n;
            let var = own.iter().map(|x| (x[k] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() <= 1e-9, "speaker {speaker} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() <= 1e-9, "speaker {speaker} sd {}", var.sqrt());
        }
    }
    assert!(SpeakerStatistics::compute(&pool).is_ok());
}

#[test]
fn gma123_of_uw_is_below_ae() {
    let stats = VowelStatistics::raw(&mwc(), Space::Hz).unwrap();
    assert!(gma123(&stats, Vowel::UW).unwrap() < gma123(&stats, Vowel::AE).unwrap());
}

#[test]
fn speaker_mean_iy_f2_exceeds_centroid() {
    let pool = mwc();
    let points = Model::fit(Method::Wattfab, &pool, &ModelOptions::default())
        .unwrap()
        .project_all(&pool)
        .unwrap();
    for speaker in pool.speakers() {
        let iy: Vec<f64> = points
            .iter()
            .filter(|p| p.sample.speaker_id == speaker && p.sample.vowel == Vowel::IY)
            .map(|p| p.features[1])
            .collect();
        assert!(iy.iter().sum::<f64>() / iy.len() as f64 > 1.0, "speaker {speaker}");
    }
}

#[test]
fn raw_aa_example_lands_on_ao() {
    let pool = mwc();
    let options = ModelOptions::default();
    let s = ray_example(&pool, &options).unwrap();
    assert_eq!(s.vowel, Vowel::AA);
    let rays = distance_rays(Method::Raw, &pool, &s, Highlight::Euclidean, &options).unwrap();
    assert_eq!(rays.rays.len(), 9);
    assert!(rays.rays.iter().all(|r| r.from == rays.rays[0].from));
    assert_eq!(rays.highlighted_vowel(), Vowel::AO);
    let raw = Model::fit(Method::Raw, &pool, &options).unwrap();
    assert_eq!(raw.classify(&s).unwrap().0, Vowel::AO);

    let iht = distance_rays(Method::Iht, &pool, &s, Highlight::Weighted, &options).unwrap();
    assert_eq!(iht.rays.len(), 9);
    let mut origins: Vec<[u64; 2]> = iht.rays.iter().map(|r| r.from.map(f64::to_bits)).collect();
    origins.sort();
    origins.dedup();
    assert_eq!(origins.len(), 9);
    let model = Model::fit(Method::Iht, &pool, &options).unwrap();
    assert_eq!(iht.highlighted_vowel(), model.classify(&s).unwrap().0);
}

#[test]
fn iht_final_spread_is_below_raw() {
    let pool = mwc();
    let raw = VowelStatistics::raw(&pool, Space::Mel).unwrap();
    let points = Model::fit(Method::Iht, &pool, &ModelOptions::default())
        .unwrap()
        .project_all(&pool)
        .unwrap();
    let fin = formant_norm::pipeline::projected_stats(&points).unwrap();
    assert!(fin.mean_sd(2) < raw.mean_sd(2));
}

#[test]
fn iht_prediction_ignores_uniform_scaling() {
    let pool = mwc();
    let model = Model::fit(Method::Iht, &pool, &ModelOptions::default()).unwrap();
    for s in pool.iter().step_by(7) {
        let mut scaled = *s;
        scaled.f1_hz *= 1.37;
        scaled.f2_hz *= 1.37;
        scaled.f3_hz *= 1.37;
        assert_eq!(model.classify(s).unwrap().0, model.classify(&scaled).unwrap().0);
    }
}

#[test]
fn reports_are_repeatable_and_consistent() {
    let working = Corpus::peterson_barney().working_set().unwrap();
    let o = ModelOptions::default();
    for method in [Method::Raw, Method::Iht] {
        let a = evaluate(&working, method, Pool::Mwc, Split::InSample, &o).unwrap();
        let b = evaluate(&working, method, Pool::Mwc, Split::InSample, &o).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.trace(), a.correct);
        assert_eq!(a.trace() as f64 / a.total as f64, a.accuracy);
        for v in Vowel::WORKING {
            assert_eq!(a.confusion[&v].values().sum::<usize>(), 152);
        }
    }
}

#[test]
fn baselines_reject_repetition_splits() {
    let working = Corpus::peterson_barney().working_set().unwrap();
    for method in [Method::Lobanov, Method::Wattfab, Method::Gmagm] {
        let err = evaluate(&working, method, Pool::Mwc, Split::TrainTest, &ModelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("insample"), "{err}");
    }
}

#[test]
fn external_raw_stats_are_used() {
    let working = Corpus::peterson_barney().working_set().unwrap();
    let mw = working.pooled(Pool::Mw).unwrap();
    let external = VowelStatistics::raw(&mw, Space::Hz).unwrap();
    let o = ModelOptions {
        raw_stats: Some(external.clone()),
        ..ModelOptions::default()
    };
    let model = Model::fit(Method::Iht, &working, &o).unwrap();
    assert_eq!(model.raw_hz_stats(), Some(&external));
}
