use std::sync::Arc;

use proptest::prelude::*;
use varmatch_core::oracle::{greedy_replay, replay_sample};
use varmatch_core::rng::rng_from_seed;
use varmatch_core::sampler::{
    is_admissible, match_indices, mean_variance_gap, sample_batch, sample_unconstrained, PairSampler,
};
use varmatch_core::synth::{synth_corpus, SynthSpec};
use varmatch_core::{Corpus, Error, PatchRef, SamplerConfig};

fn small_corpus(seed: u64, count: usize, side: usize) -> Corpus {
    let spec = SynthSpec { count, width: side, height: side, channels: 1, seed };
    Corpus::from_images(synth_corpus(&spec).unwrap()).unwrap()
}

fn pref(variance: f64, mean: f64) -> PatchRef {
    PatchRef { image_id: "p".into(), x: 0, y: 0, size: 1, mean, variance }
}

#[test]
fn seeded_batch_matches_replay_on_four_image_corpus() {
    let lr = small_corpus(1, 4, 96);
    let hr = small_corpus(2, 4, 200);
    for seed in 0..20 {
        let config = SamplerConfig { batch_size: 8, seed, ..Default::default() };
        let got = varmatch_core::sampler::sample_rounds(&lr, &hr, &config, &mut rng_from_seed(seed)).unwrap();
        let want = replay_sample(&lr, &hr, &config, &mut rng_from_seed(seed));
        assert_eq!(got.pairs.len(), want.len(), "seed {seed}");
        for (g, w) in got.pairs.iter().zip(&want) {
            assert_eq!((&g.lr.image_id, g.lr.x, g.lr.y), (&w.lr.image_id, w.lr.x, w.lr.y));
            assert_eq!((&g.hr.image_id, g.hr.x, g.hr.y), (&w.hr.image_id, w.hr.x, w.hr.y));
            assert!((g.lr.variance - w.lr.variance).abs() <= 1e-9 * w.lr.variance.max(1.0));
            assert!((g.hr.variance - w.hr.variance).abs() <= 1e-9 * w.hr.variance.max(1.0));
        }
    }
}

#[test]
fn insufficient_pairs_reports_achieved_count() {
    let lr = small_corpus(3, 2, 64);
    let hr = small_corpus(4, 2, 160);
    let config = SamplerConfig { sigma_t_sq: 1e-6, max_retries: 2, ..Default::default() };
    let outcome = varmatch_core::sampler::sample_rounds(&lr, &hr, &config, &mut rng_from_seed(1)).unwrap();
    match sample_batch(&lr, &hr, &config, &mut rng_from_seed(1)) {
        Err(Error::InsufficientPairs { achieved, required, retries }) => {
            assert_eq!(achieved, outcome.pairs.len());
            assert_eq!(required, 16);
            assert_eq!(retries, 2);
            assert_eq!(outcome.rounds.len(), 3);
        }
        other => panic!("expected starvation, got {other:?}"),
    }
}

#[test]
fn vacuous_threshold_admits_everything() {
    let lr = small_corpus(5, 2, 64);
    let hr = small_corpus(6, 2, 160);
    let config = SamplerConfig { sigma_t_sq: 1e9, ..Default::default() };
    let b = sample_batch(&lr, &hr, &config, &mut rng_from_seed(9)).unwrap();
    assert_eq!(b.admissible_fraction(), 1.0);
    assert_eq!(b.retries_used, 0);
}

#[test]
fn matching_reduces_variance_gap() {
    let lr = Corpus::from_images(synth_corpus(&SynthSpec::LR).unwrap()).unwrap();
    let hr = Corpus::from_images(synth_corpus(&SynthSpec::HR).unwrap()).unwrap();
    let config = SamplerConfig::default();
    let (mut matched, mut random) = (Vec::new(), Vec::new());
    for seed in 0..50 {
        if let Ok(b) = sample_batch(&lr, &hr, &config, &mut rng_from_seed(seed)) {
            matched.extend(b.pairs);
        }
        random.extend(sample_unconstrained(&lr, &hr, &config, &mut rng_from_seed(seed)).unwrap());
    }
    assert!(!matched.is_empty());
    assert!(mean_variance_gap(&matched) < mean_variance_gap(&random));
}

#[test]
fn no_duplicate_patches_within_batch() {
    // Tiny images force repeated coordinates across candidate draws.
    let lr = small_corpus(7, 1, 34);
    let hr = small_corpus(8, 1, 130);
    let config =
        SamplerConfig { sigma_t_sq: 1e9, batch_size: 4, n_lr: 4, n_hr: 4, max_retries: 30, ..Default::default() };
    for seed in 0..50 {
        if let Ok(b) = sample_batch(&lr, &hr, &config, &mut rng_from_seed(seed)) {
            for (i, p) in b.pairs.iter().enumerate() {
                for q in &b.pairs[i + 1..] {
                    assert!((p.lr.x, p.lr.y) != (q.lr.x, q.lr.y));
                    assert!((p.hr.x, p.hr.y) != (q.hr.x, q.hr.y));
                }
            }
        }
    }
}

#[test]
fn sampler_iterator_matches_batch_at() {
    let lr = Arc::new(small_corpus(9, 3, 80));
    let hr = Arc::new(small_corpus(10, 3, 180));
    let config = SamplerConfig { sigma_t_sq: 400.0, batch_size: 4, seed: 123, ..Default::default() };
    let s = PairSampler::new(lr, hr, config).unwrap();
    let firsts: Vec<_> = s.clone().take(5).map(|b| b.map(|b| b.pairs)).collect();
    for (k, b) in firsts.into_iter().enumerate() {
        assert_eq!(b.ok(), s.batch_at(k as u64).ok().map(|b| b.pairs));
    }
}

fn arb_refs(max: usize) -> impl Strategy<Value = Vec<PatchRef>> {
    proptest::collection::vec((0u8..12, 0u8..6), 0..=max)
        .prop_map(|v| v.into_iter().map(|(var, mean)| pref(var as f64 * 16.0, mean as f64 * 40.0)).collect())
}

proptest! {
    #[test]
    fn matcher_agrees_with_selection_replay(
        lr in arb_refs(6), hr in arb_refs(6),
        sigma in prop_oneof![Just(16.0), Just(64.0), Just(100.0), Just(1000.0)],
        mu in prop_oneof![Just(None), Just(Some(55.0)), Just(Some(155.0))],
    ) {
        let got = match_indices(&lr, &hr, sigma, mu).pairs;
        prop_assert_eq!(got, greedy_replay(&lr, &hr, sigma, mu));
    }

    #[test]
    fn every_emitted_pair_is_admissible(
        seed in any::<u64>(),
        sigma in 1.0f64..600.0,
        mu in prop_oneof![Just(None), (5.0f64..200.0).prop_map(Some)],
        batch in 1usize..10,
    ) {
        let lr = small_corpus(seed, 2, 72);
        let hr = small_corpus(seed ^ 1, 2, 160);
        let config = SamplerConfig { sigma_t_sq: sigma, mu_t: mu, batch_size: batch, ..Default::default() };
        let out = varmatch_core::sampler::sample_rounds(&lr, &hr, &config, &mut rng_from_seed(seed)).unwrap();
        for p in &out.pairs {
            prop_assert!(is_admissible(&p.lr, &p.hr, sigma, mu));
        }
    }
}
