use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varmatch_core::oracle::naive_ssim;
use varmatch_core::{psnr, ssim, Image};

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> Image {
    Image::from_fn(w, h, c, |_, _, _| rng.random()).unwrap()
}

#[test]
fn ssim_matches_naive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let (w, h) = (rng.random_range(11..30), rng.random_range(11..30));
        let c = if rng.random_bool(0.5) { 1 } else { 3 };
        let a = random_image(&mut rng, w, h, c);
        let b = random_image(&mut rng, w, h, c);
        let fast = ssim(&a, &b).unwrap();
        assert!((fast - naive_ssim(&a, &b)).abs() < 1e-6);
        assert_eq!(fast, ssim(&b, &a).unwrap());
        assert!((-1.0..=1.0).contains(&fast));
    }
}

#[test]
fn ssim_against_brightness_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = Image::from_fn(40, 33, 1, |_, _, _| rng.random_range(0..255)).unwrap();
    let b = Image::from_fn(40, 33, 1, |x, y, _| a.get(x, y, 0) + 1).unwrap();
    let s = ssim(&a, &b).unwrap();
    assert!((s - naive_ssim(&a, &b)).abs() < 1e-6);
    assert!(s < 1.0 && s > 0.99);
}

#[test]
fn psnr_decreases_with_noise_amplitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base = Image::from_fn(64, 64, 3, |_, _, _| rng.random_range(40..216)).unwrap();
    let mut last = f64::INFINITY;
    for amp in [1i32, 2, 4, 8, 16] {
        let mut nrng = ChaCha8Rng::seed_from_u64(99);
        let noisy = Image::from_fn(64, 64, 3, |x, y, c| {
            let sign = if nrng.random_bool(0.5) { 1 } else { -1 };
            (base.get(x, y, c) as i32 + sign * amp) as u8
        })
        .unwrap();
        let p = psnr(&base, &noisy).unwrap().finite().unwrap();
        assert!(p < last, "amp {amp}: {p} !< {last}");
        assert_eq!(psnr(&noisy, &base).unwrap().finite().unwrap(), p);
        last = p;
    }
}
