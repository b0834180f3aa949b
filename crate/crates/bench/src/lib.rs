//! Shared fixtures for the criterion benchmarks.

use rand::Rng;
use varmatch_core::rng::rng_from_seed;
use varmatch_core::synth::{synth_corpus, synth_image, SynthSpec};
use varmatch_core::{Corpus, Image};

/// Side of the square benchmark plane (1 MP).
pub const PLANE_SIDE: usize = 1024;

/// A 1 MP luminance plane with mixed flat, noisy and striped regions.
pub fn plane() -> Image {
    synth_image(PLANE_SIDE, PLANE_SIDE, 1, 7).expect("synthetic plane")
}

/// Seeded top-left corners for `patch`-sided windows of [`plane`].
pub fn positions(count: usize, patch: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng_from_seed(seed);
    let max = PLANE_SIDE - patch;
    (0..count).map(|_| (rng.random_range(0..=max), rng.random_range(0..=max))).collect()
}

/// The bundled LR and HR corpora.
pub fn corpora() -> (Corpus, Corpus) {
    let load = |spec: &SynthSpec| Corpus::from_images(synth_corpus(spec).expect("synthetic corpus")).expect("corpus");
    (load(&SynthSpec::LR), load(&SynthSpec::HR))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_fit_and_repeat() {
        let a = positions(100, 128, 3);
        assert_eq!(a, positions(100, 128, 3));
        assert!(a.iter().all(|&(x, y)| x + 128 <= PLANE_SIDE && y + 128 <= PLANE_SIDE));
    }
}
