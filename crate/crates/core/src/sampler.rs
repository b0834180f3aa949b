//! Variance-matched LR/HR patch pair sampling.
//!
//! A pair of an LR patch `x` and an HR patch `y` is admissible when
//! `|σ²(x) − σ²(y)| < σ_T²`, and additionally `|μ(x) − μ(y)| < μ_T` when a mean
//! threshold is configured. Both inequalities are strict.
//!
//! Sampling works in rounds. Each round draws one LR image and one HR image,
//! takes `n_lr` and `n_hr` uniformly placed candidate patches from them, and
//! evaluates all `n_lr × n_hr` combinations. Admissible pairs are ranked by
//! ascending variance gap (ties by LR index, then HR index) and accepted
//! greedily, never reusing a candidate. Rounds repeat, accumulating pairs,
//! until `batch_size` pairs exist or `max_retries` extra rounds are spent.
//!
//! Random stream order inside a round: LR image index, HR image index, then
//! `(x, y)` for each LR candidate, then `(x, y)` for each HR candidate.

use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusEntry};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::{derive_seed, rng_from_seed, SampleRng};

/// All sampling knobs. Defaults follow the reference training setup:
/// σ_T² = 64, 32² LR / 128² HR patches at ×4, 30 candidates per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub sigma_t_sq: f64,
    pub mu_t: Option<f64>,
    pub lr_patch: usize,
    pub hr_patch: usize,
    pub scale: u32,
    pub n_lr: usize,
    pub n_hr: usize,
    pub batch_size: usize,
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            sigma_t_sq: 64.0,
            mu_t: None,
            lr_patch: 32,
            hr_patch: 128,
            scale: 4,
            n_lr: 30,
            n_hr: 30,
            batch_size: 16,
            max_retries: 8,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    /// Full validation used at configuration boundaries (CLI, bindings):
    /// thresholds must be strictly positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_t_sq.is_finite() && self.sigma_t_sq > 0.0) {
            return Err(Error::Config(format!("sigma_t_sq must be a positive finite number, got {}", self.sigma_t_sq)));
        }
        if let Some(mu) = self.mu_t {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(Error::Config(format!("mu_t must be a positive finite number, got {mu}")));
            }
        }
        if self.scale == 0 {
            return Err(Error::Config("scale must be at least 1".into()));
        }
        self.validate_structure()
    }

    /// Structural checks only; a zero threshold is allowed here so the
    /// strict-inequality edge stays reachable from library code.
    fn validate_structure(&self) -> Result<()> {
        if !(self.sigma_t_sq.is_finite() && self.sigma_t_sq >= 0.0) {
            return Err(Error::Config(format!("invalid sigma_t_sq {}", self.sigma_t_sq)));
        }
        if self.mu_t.is_some_and(|m| !(m.is_finite() && m >= 0.0)) {
            return Err(Error::Config(format!("invalid mu_t {:?}", self.mu_t)));
        }
        if self.lr_patch == 0 || self.hr_patch == 0 {
            return Err(Error::Config("patch sides must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.n_lr < self.batch_size {
            return Err(Error::Config(format!(
                "n_lr ({}) must be at least batch_size ({})",
                self.n_lr, self.batch_size
            )));
        }
        if self.n_hr == 0 {
            return Err(Error::Config("n_hr must be at least 1".into()));
        }
        Ok(())
    }
}

/// A square patch of a corpus image with its luminance statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchRef {
    pub image_id: String,
    pub x: usize,
    pub y: usize,
    pub size: usize,
    pub mean: f64,
    pub variance: f64,
}

impl PatchRef {
    fn key(&self) -> (String, usize, usize, usize) {
        (self.image_id.clone(), self.x, self.y, self.size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchPair {
    pub lr: PatchRef,
    pub hr: PatchRef,
}

impl PatchPair {
    pub fn variance_gap(&self) -> f64 {
        (self.lr.variance - self.hr.variance).abs()
    }

    pub fn mean_gap(&self) -> f64 {
        (self.lr.mean - self.hr.mean).abs()
    }
}

/// Bookkeeping for one candidate round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub lr_image: String,
    pub hr_image: String,
    pub evaluated: usize,
    pub admissible: usize,
    pub matched: usize,
    pub accepted: usize,
}

/// Matched pairs of one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub pairs: Vec<PatchPair>,
    pub config: SamplerConfig,
    pub retries_used: usize,
    pub rounds: Vec<RoundStats>,
}

impl PairBatch {
    pub fn admissible_fraction(&self) -> f64 {
        fraction(&self.rounds)
    }
}

/// Result of a sampling attempt whether or not the batch was filled.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub pairs: Vec<PatchPair>,
    pub retries_used: usize,
    pub rounds: Vec<RoundStats>,
}

impl SampleOutcome {
    pub fn into_batch(self, config: &SamplerConfig) -> Result<PairBatch> {
        if self.pairs.len() < config.batch_size {
            return Err(Error::InsufficientPairs {
                achieved: self.pairs.len(),
                required: config.batch_size,
                retries: self.retries_used,
            });
        }
        Ok(PairBatch {
            pairs: self.pairs,
            config: config.clone(),
            retries_used: self.retries_used,
            rounds: self.rounds,
        })
    }
}

fn fraction(rounds: &[RoundStats]) -> f64 {
    let evaluated: usize = rounds.iter().map(|r| r.evaluated).sum();
    let admissible: usize = rounds.iter().map(|r| r.admissible).sum();
    if evaluated == 0 {
        0.0
    } else {
        admissible as f64 / evaluated as f64
    }
}

/// The matching predicate.
#[inline]
pub fn is_admissible(lr: &PatchRef, hr: &PatchRef, sigma_t_sq: f64, mu_t: Option<f64>) -> bool {
    (lr.variance - hr.variance).abs() < sigma_t_sq && mu_t.is_none_or(|mu| (lr.mean - hr.mean).abs() < mu)
}

/// Draws `n` candidate patches of side `size` uniformly over all valid
/// top-left positions of `entry`. Duplicates are possible.
pub fn extract_candidates(entry: &CorpusEntry, n: usize, size: usize, rng: &mut SampleRng) -> Result<Vec<PatchRef>> {
    check_fits(entry, size)?;
    let (max_x, max_y) = (entry.width() - size, entry.height() - size);
    Ok((0..n)
        .map(|_| {
            let x = rng.random_range(0..=max_x);
            let y = rng.random_range(0..=max_y);
            let s = entry.table.patch_stats_unchecked(x, y, size, size);
            PatchRef { image_id: entry.id.clone(), x, y, size, mean: s.mean, variance: s.variance }
        })
        .collect())
}

fn check_fits(entry: &CorpusEntry, size: usize) -> Result<()> {
    if size == 0 || entry.width() < size || entry.height() < size {
        return Err(Error::ImageTooSmall { id: entry.id.clone(), width: entry.width(), height: entry.height(), size });
    }
    Ok(())
}

/// Index-level result of [`match_indices`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    /// Accepted `(lr index, hr index)` pairs in acceptance order.
    pub pairs: Vec<(usize, usize)>,
    pub admissible: usize,
    pub evaluated: usize,
}

/// Greedy ascending-gap matching without replacement over all candidate
/// combinations.
pub fn match_indices(lr: &[PatchRef], hr: &[PatchRef], sigma_t_sq: f64, mu_t: Option<f64>) -> MatchOutcome {
    let mut admissible: Vec<(f64, usize, usize)> = Vec::new();
    for (i, a) in lr.iter().enumerate() {
        for (j, b) in hr.iter().enumerate() {
            if is_admissible(a, b, sigma_t_sq, mu_t) {
                admissible.push(((a.variance - b.variance).abs(), i, j));
            }
        }
    }
    admissible.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut lr_used = vec![false; lr.len()];
    let mut hr_used = vec![false; hr.len()];
    let mut pairs = Vec::with_capacity(lr.len().min(hr.len()));
    for &(_, i, j) in &admissible {
        if !lr_used[i] && !hr_used[j] {
            lr_used[i] = true;
            hr_used[j] = true;
            pairs.push((i, j));
        }
    }
    MatchOutcome { pairs, admissible: admissible.len(), evaluated: lr.len() * hr.len() }
}

/// [`match_indices`] resolved to patch references.
pub fn match_pairs(lr: &[PatchRef], hr: &[PatchRef], sigma_t_sq: f64, mu_t: Option<f64>) -> Vec<PatchPair> {
    match_indices(lr, hr, sigma_t_sq, mu_t)
        .pairs
        .into_iter()
        .map(|(i, j)| PatchPair { lr: lr[i].clone(), hr: hr[j].clone() })
        .collect()
}

fn check_corpora(lr: &Corpus, hr: &Corpus, config: &SamplerConfig) -> Result<()> {
    if lr.is_empty() {
        return Err(Error::EmptyCorpus("LR corpus has no images".into()));
    }
    if hr.is_empty() {
        return Err(Error::EmptyCorpus("HR corpus has no images".into()));
    }
    for e in lr.entries() {
        check_fits(e, config.lr_patch)?;
    }
    for e in hr.entries() {
        check_fits(e, config.hr_patch)?;
    }
    Ok(())
}

struct Round {
    lr: Vec<PatchRef>,
    hr: Vec<PatchRef>,
}

fn draw_round(lr: &Corpus, hr: &Corpus, config: &SamplerConfig, rng: &mut SampleRng) -> Result<Round> {
    let li = rng.random_range(0..lr.len());
    let hi = rng.random_range(0..hr.len());
    let lr_c = extract_candidates(lr.entry(li), config.n_lr, config.lr_patch, rng)?;
    let hr_c = extract_candidates(hr.entry(hi), config.n_hr, config.hr_patch, rng)?;
    Ok(Round { lr: lr_c, hr: hr_c })
}

/// Runs sampling rounds and reports what was achieved, filled or not.
pub fn sample_rounds(lr: &Corpus, hr: &Corpus, config: &SamplerConfig, rng: &mut SampleRng) -> Result<SampleOutcome> {
    config.validate_structure()?;
    check_corpora(lr, hr, config)?;

    let mut pairs: Vec<PatchPair> = Vec::with_capacity(config.batch_size);
    let mut rounds = Vec::new();
    let mut seen_lr: HashSet<(String, usize, usize, usize)> = HashSet::new();
    let mut seen_hr: HashSet<(String, usize, usize, usize)> = HashSet::new();
    let mut retries_used = 0;

    for round in 0..=config.max_retries {
        if round > 0 {
            retries_used += 1;
        }
        let Round { lr: lr_c, hr: hr_c } = draw_round(lr, hr, config, rng)?;
        let m = match_indices(&lr_c, &hr_c, config.sigma_t_sq, config.mu_t);
        let mut accepted = 0;
        for &(i, j) in &m.pairs {
            if pairs.len() == config.batch_size {
                break;
            }
            let (a, b) = (&lr_c[i], &hr_c[j]);
            let (lk, hk) = (a.key(), b.key());
            if seen_lr.contains(&lk) || seen_hr.contains(&hk) {
                continue;
            }
            seen_lr.insert(lk);
            seen_hr.insert(hk);
            pairs.push(PatchPair { lr: a.clone(), hr: b.clone() });
            accepted += 1;
        }
        rounds.push(RoundStats {
            lr_image: lr_c[0].image_id.clone(),
            hr_image: hr_c[0].image_id.clone(),
            evaluated: m.evaluated,
            admissible: m.admissible,
            matched: m.pairs.len(),
            accepted,
        });
        if pairs.len() == config.batch_size {
            break;
        }
    }
    Ok(SampleOutcome { pairs, retries_used, rounds })
}

/// Samples one batch of `batch_size` admissible pairs, or fails with
/// `InsufficientPairs` reporting how many were found.
pub fn sample_batch(lr: &Corpus, hr: &Corpus, config: &SamplerConfig, rng: &mut SampleRng) -> Result<PairBatch> {
    sample_rounds(lr, hr, config, rng)?.into_batch(config)
}

/// Baseline without statistics: draws a round exactly like [`sample_batch`]
/// and pairs LR candidate `k` with HR candidate `k`.
pub fn sample_unconstrained(
    lr: &Corpus,
    hr: &Corpus,
    config: &SamplerConfig,
    rng: &mut SampleRng,
) -> Result<Vec<PatchPair>> {
    config.validate_structure()?;
    check_corpora(lr, hr, config)?;
    let Round { lr: lr_c, hr: hr_c } = draw_round(lr, hr, config, rng)?;
    Ok(lr_c.into_iter().zip(hr_c).take(config.batch_size).map(|(lr, hr)| PatchPair { lr, hr }).collect())
}

/// Mean `|σ²_lr − σ²_hr|` over a set of pairs.
pub fn mean_variance_gap<'a>(pairs: impl IntoIterator<Item = &'a PatchPair>) -> f64 {
    let (sum, n) = pairs.into_iter().fold((0.0, 0usize), |(s, n), p| (s + p.variance_gap(), n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Copies the pixels a patch reference points at.
pub fn patch_pixels(corpus: &Corpus, patch: &PatchRef) -> Result<Image> {
    let entry = corpus.get(&patch.image_id).ok_or_else(|| Error::ImageNotFound(patch.image_id.clone()))?;
    entry.image.crop(patch.x, patch.y, patch.size, patch.size)
}

/// Endless batch stream over a pair of corpora.
///
/// Batch `k` is sampled from its own stream seeded with
/// `derive_seed(config.seed, k)`, so any batch can be regenerated on its own
/// and consumers that skip ahead see the same data.
#[derive(Debug, Clone)]
pub struct PairSampler {
    lr: Arc<Corpus>,
    hr: Arc<Corpus>,
    config: SamplerConfig,
    next: u64,
}

impl PairSampler {
    pub fn new(lr: Arc<Corpus>, hr: Arc<Corpus>, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        check_corpora(&lr, &hr, &config)?;
        Ok(PairSampler { lr, hr, config, next: 0 })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn lr_corpus(&self) -> &Arc<Corpus> {
        &self.lr
    }

    pub fn hr_corpus(&self) -> &Arc<Corpus> {
        &self.hr
    }

    /// Index of the batch the next call to [`PairSampler::next_batch`] returns.
    pub fn position(&self) -> u64 {
        self.next
    }

    pub fn batch_rng(&self, index: u64) -> SampleRng {
        rng_from_seed(derive_seed(self.config.seed, index))
    }

    pub fn outcome_at(&self, index: u64) -> Result<SampleOutcome> {
        sample_rounds(&self.lr, &self.hr, &self.config, &mut self.batch_rng(index))
    }

    pub fn batch_at(&self, index: u64) -> Result<PairBatch> {
        self.outcome_at(index)?.into_batch(&self.config)
    }

    pub fn next_batch(&mut self) -> Result<PairBatch> {
        let index = self.next;
        self.next += 1;
        self.batch_at(index)
    }
}

impl Iterator for PairSampler {
    type Item = Result<PairBatch>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_batch())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn pref(id: &str, variance: f64, mean: f64) -> PatchRef {
        PatchRef { image_id: id.into(), x: 0, y: 0, size: 1, mean, variance }
    }

    fn constant_corpus(side: usize, v: u8) -> Corpus {
        Corpus::from_images([("c.png".to_string(), Image::filled(side, side, 1, v).unwrap())]).unwrap()
    }

    #[test]
    fn defaults() {
        let c = SamplerConfig::default();
        assert_eq!(c.sigma_t_sq, 64.0);
        assert_eq!((c.lr_patch, c.hr_patch, c.scale), (32, 128, 4));
        assert_eq!((c.n_lr, c.n_hr), (30, 30));
        assert!(c.mu_t.is_none());
        c.validate().unwrap();
    }

    #[test]
    fn validation() {
        let bad = [
            SamplerConfig { sigma_t_sq: 0.0, ..Default::default() },
            SamplerConfig { sigma_t_sq: -1.0, ..Default::default() },
            SamplerConfig { sigma_t_sq: f64::NAN, ..Default::default() },
            SamplerConfig { mu_t: Some(0.0), ..Default::default() },
            SamplerConfig { batch_size: 0, ..Default::default() },
            SamplerConfig { batch_size: 31, ..Default::default() },
            SamplerConfig { n_hr: 0, ..Default::default() },
            SamplerConfig { lr_patch: 0, ..Default::default() },
        ];
        for c in bad {
            assert_eq!(c.validate().unwrap_err().kind_name(), "config-error", "{c:?}");
        }
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let err = serde_json::from_str::<SamplerConfig>(r#"{"sigma_t_sq": 1.0, "bogus": 2}"#);
        assert!(err.is_err());
        let ok: SamplerConfig = serde_json::from_str(r#"{"mu_t": 55.0}"#).unwrap();
        assert_eq!(ok.mu_t, Some(55.0));
        assert_eq!(ok.sigma_t_sq, 64.0);
    }

    #[test]
    fn greedy_picks_smallest_gap() {
        let lr = [pref("l", 100.0, 0.0)];
        let hr = [pref("a", 50.0, 0.0), pref("b", 160.0, 0.0), pref("c", 170.0, 0.0)];
        let m = match_indices(&lr, &hr, 64.0, None);
        assert_eq!(m.admissible, 2);
        assert_eq!(m.pairs, vec![(0, 0)]);
    }

    #[test]
    fn boundary_gap_is_excluded() {
        let m = match_indices(&[pref("l", 0.0, 0.0)], &[pref("h", 64.0, 0.0)], 64.0, None);
        assert!(m.pairs.is_empty());
        assert_eq!(m.admissible, 0);
    }

    #[test]
    fn mean_threshold_is_a_conjunction() {
        let lr = [pref("l", 100.0, 10.0)];
        let hr = [pref("h", 110.0, 70.0)];
        assert_eq!(match_pairs(&lr, &hr, 64.0, None).len(), 1);
        assert!(match_pairs(&lr, &hr, 64.0, Some(55.0)).is_empty());
    }

    #[test]
    fn ties_break_by_lr_then_hr_index() {
        let lr = [pref("l0", 10.0, 0.0), pref("l1", 10.0, 0.0)];
        let hr = [pref("h0", 15.0, 0.0), pref("h1", 5.0, 0.0)];
        let m = match_indices(&lr, &hr, 64.0, None);
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn empty_inputs() {
        assert!(match_pairs(&[], &[pref("h", 0.0, 0.0)], 64.0, None).is_empty());
    }

    #[test]
    fn candidates_on_constant_image() {
        let c = constant_corpus(40, 9);
        let mut rng = rng_from_seed(1);
        let v = extract_candidates(c.entry(0), 1, 32, &mut rng).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].mean, v[0].variance), (9.0, 0.0));
    }

    #[test]
    fn candidate_bounds_on_large_image() {
        let img = Image::filled(2040, 1356, 1, 0).unwrap();
        let c = Corpus::from_images([("big".to_string(), img)]).unwrap();
        let mut rng = rng_from_seed(5);
        let v = extract_candidates(c.entry(0), 30, 128, &mut rng).unwrap();
        assert_eq!(v.len(), 30);
        assert!(v.iter().all(|p| p.x <= 1912 && p.y <= 1228));
        let again = extract_candidates(c.entry(0), 30, 128, &mut rng_from_seed(5)).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn candidates_too_small() {
        let c = constant_corpus(20, 0);
        let err = extract_candidates(c.entry(0), 1, 32, &mut rng_from_seed(0)).unwrap_err();
        assert_eq!(err.kind_name(), "image-too-small");
    }

    #[test]
    fn constant_corpus_fills_first_round() {
        let c = constant_corpus(160, 50);
        let config = SamplerConfig::default();
        let b = sample_batch(&c, &c, &config, &mut rng_from_seed(3)).unwrap();
        assert_eq!(b.pairs.len(), 16);
        assert_eq!(b.retries_used, 0);
        assert!(b.pairs.iter().all(|p| p.variance_gap() == 0.0));
    }

    #[test]
    fn zero_threshold_starves_on_noise() {
        let mut seed = 1u64;
        let noise = Image::from_fn(200, 200, 1, |_, _, _| {
            seed = crate::rng::splitmix64(seed);
            (seed >> 56) as u8
        })
        .unwrap();
        let c = Corpus::from_images([("n".to_string(), noise)]).unwrap();
        let config = SamplerConfig { sigma_t_sq: 0.0, ..Default::default() };
        let err = sample_batch(&c, &c, &config, &mut rng_from_seed(3)).unwrap_err();
        match err {
            Error::InsufficientPairs { required, retries, .. } => {
                assert_eq!(required, 16);
                assert_eq!(retries, 8);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn sampler_stream_is_reproducible() {
        let c = Arc::new(constant_corpus(200, 1));
        let config = SamplerConfig { seed: 77, ..Default::default() };
        let mut a = PairSampler::new(c.clone(), c.clone(), config.clone()).unwrap();
        let first = a.next_batch().unwrap();
        let second = a.next_batch().unwrap();
        let b = PairSampler::new(c.clone(), c, config).unwrap();
        assert_eq!(b.batch_at(0).unwrap(), first);
        assert_eq!(b.batch_at(1).unwrap(), second);
        assert_ne!(first, second);
    }

    #[test]
    fn sampler_rejects_zero_threshold() {
        let c = Arc::new(constant_corpus(130, 1));
        let config = SamplerConfig { sigma_t_sq: 0.0, ..Default::default() };
        assert_eq!(PairSampler::new(c.clone(), c, config).unwrap_err().kind_name(), "config-error");
    }

    #[test]
    fn patch_pixels_crop() {
        let img = Image::from_fn(64, 64, 3, |x, y, c| (x + y + c) as u8).unwrap();
        let c = Corpus::from_images([("g".to_string(), img)]).unwrap();
        let p = PatchRef { image_id: "g".into(), x: 3, y: 4, size: 8, mean: 0.0, variance: 0.0 };
        let px = patch_pixels(&c, &p).unwrap();
        assert_eq!((px.width(), px.channels()), (8, 3));
        assert_eq!(px.get(0, 0, 2), 9);
        let missing = PatchRef { image_id: "nope".into(), ..p };
        assert_eq!(patch_pixels(&c, &missing).unwrap_err().kind_name(), "image-not-found");
    }
}
