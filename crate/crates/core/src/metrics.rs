//! Full-reference quality metrics and loss aggregation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

/// PSNR in decibels. Identical inputs have no finite PSNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Finite(f64),
    Infinite,
}

impl Psnr {
    pub fn finite(self) -> Option<f64> {
        match self {
            Psnr::Finite(v) => Some(v),
            Psnr::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Psnr::Infinite)
    }
}

impl Serialize for Psnr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Finite(v) => s.serialize_f64(*v),
            Psnr::Infinite => s.serialize_str("inf"),
        }
    }
}

fn check_same_shape(a: &Image, b: &Image) -> Result<()> {
    if (a.width(), a.height(), a.channels()) != (b.width(), b.height(), b.channels()) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    Ok(())
}

/// Mean squared error over all samples of all channels.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_same_shape(a, b)?;
    let sse: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sse as f64 / a.data().len() as f64)
}

/// `10 log10(255² / MSE)`.
pub fn psnr(a: &Image, b: &Image) -> Result<Psnr> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(Psnr::Infinite);
    }
    Ok(Psnr::Finite(10.0 * (255.0 * 255.0 / m).log10()))
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
pub const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let mut taps = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - c;
        *t = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Valid-mode separable filtering of a `w`x`h` plane.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let k = SSIM_WINDOW;
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = row[x..x + k].iter().zip(taps).map(|(v, t)| v * t).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..k).map(|i| tmp[(y + i) * ow + x] * taps[i]).sum();
        }
    }
    out
}

/// Mean single-scale SSIM over all valid 11x11 window positions of the
/// luminance planes.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::ShapeMismatch(format!("{}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height())));
    }
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::TooSmall { width: w, height: h });
    }
    let la: Vec<f64> = a.to_luminance().data().iter().map(|&v| v as f64).collect();
    let lb: Vec<f64> = b.to_luminance().data().iter().map(|&v| v as f64).collect();
    let aa: Vec<f64> = la.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = lb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();

    let taps = gaussian_taps();
    let mu_a = filter_valid(&la, w, h, &taps);
    let mu_b = filter_valid(&lb, w, h, &taps);
    let e_aa = filter_valid(&aa, w, h, &taps);
    let e_bb = filter_valid(&bb, w, h, &taps);
    let e_ab = filter_valid(&ab, w, h, &taps);

    let n = mu_a.len();
    let total: f64 = (0..n).map(|i| ssim_term(mu_a[i], mu_b[i], e_aa[i], e_bb[i], e_ab[i])).sum();
    Ok(total / n as f64)
}

/// Local SSIM from windowed first and second moments. Written so that
/// swapping the inputs, or passing identical inputs, is exact in floating
/// point.
#[inline]
pub fn ssim_term(mu_a: f64, mu_b: f64, e_aa: f64, e_bb: f64, e_ab: f64) -> f64 {
    let mu_ab = mu_a * mu_b;
    let (mu_aa, mu_bb) = (mu_a * mu_a, mu_b * mu_b);
    let var_a = e_aa - mu_aa;
    let var_b = e_bb - mu_bb;
    let cov = e_ab - mu_ab;
    let num = (2.0 * mu_ab + SSIM_C1) * (2.0 * cov + SSIM_C2);
    let den = (mu_aa + mu_bb + SSIM_C1) * (var_a + var_b + SSIM_C2);
    num / den
}

/// Removes `border` pixels from every side.
pub fn crop_border(img: &Image, border: usize) -> Result<Image> {
    if border == 0 {
        return Ok(img.clone());
    }
    if 2 * border >= img.width() || 2 * border >= img.height() {
        return Err(Error::ShapeMismatch(format!(
            "cannot shave {border} pixels from a {}x{} image",
            img.width(),
            img.height()
        )));
    }
    img.crop(border, border, img.width() - 2 * border, img.height() - 2 * border)
}

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} elements", a.len(), b.len())));
    }
    Ok(())
}

/// Mean absolute difference. Empty inputs give 0.
pub fn l1_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Mean squared difference. Empty inputs give 0.
pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Samples of an image as floats, in planar order.
pub fn image_to_f64(img: &Image) -> Vec<f64> {
    img.data().iter().map(|&v| v as f64).collect()
}

/// Weights of a four-term generator loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub adv: f64,
    pub cyc_or_con: f64,
    pub per: f64,
    pub fea: f64,
}

impl LossWeights {
    /// SR generator: adversarial 0.3, cycle 0.2, perceptual 0.5, feature 20.
    pub const SR_GENERATOR: LossWeights = LossWeights { adv: 0.3, cyc_or_con: 0.2, per: 0.5, fea: 20.0 };

    /// Degradation generator: adversarial 0.3, content 0.5, perceptual 0.2, feature 20.
    pub const DEGRADATION: LossWeights = LossWeights { adv: 0.3, cyc_or_con: 0.5, per: 0.2, fea: 20.0 };

    pub fn new(adv: f64, cyc_or_con: f64, per: f64, fea: f64) -> Result<Self> {
        let w = LossWeights { adv, cyc_or_con, per, fea };
        if [adv, cyc_or_con, per, fea].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!("loss weights must be finite and nonnegative: {w:?}")));
        }
        Ok(w)
    }
}

/// Component loss values produced by an external trainer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossComponents {
    pub adv: f64,
    pub cyc_or_con: f64,
    pub per: f64,
    pub fea: f64,
}

pub fn compose_loss(c: &LossComponents, w: &LossWeights) -> f64 {
    w.adv * c.adv + w.cyc_or_con * c.cyc_or_con + w.per * c.per + w.fea * c.fea
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resample::{bicubic_resize, ResampleSpec};
    use proptest::prelude::*;

    #[test]
    fn psnr_examples() {
        let z = Image::filled(8, 8, 3, 0).unwrap();
        assert_eq!(psnr(&z, &z).unwrap(), Psnr::Infinite);
        let w = Image::filled(8, 8, 3, 255).unwrap();
        assert_eq!(psnr(&z, &w).unwrap(), Psnr::Finite(0.0));
        let s = Image::filled(8, 8, 3, 16).unwrap();
        let expected = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
        let got = psnr(&z, &s).unwrap().finite().unwrap();
        assert!((got - expected).abs() < 1e-9);
        assert!((got - 24.05).abs() < 0.01);
    }

    #[test]
    fn psnr_shape_mismatch() {
        let a = Image::filled(8, 8, 3, 0).unwrap();
        let b = Image::filled(8, 8, 1, 0).unwrap();
        assert_eq!(psnr(&a, &b).unwrap_err().kind_name(), "shape-mismatch");
    }

    #[test]
    fn ssim_identity_and_constants() {
        let img = Image::from_fn(32, 20, 3, |x, y, c| (x * 7 + y * 3 + c) as u8).unwrap();
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
        let z = Image::filled(16, 16, 1, 0).unwrap();
        let w = Image::filled(16, 16, 1, 255).unwrap();
        let expected = SSIM_C1 / (255.0 * 255.0 + SSIM_C1);
        assert!((ssim(&z, &w).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 9.999e-5).abs() < 1e-8);
    }

    #[test]
    fn ssim_errors() {
        let a = Image::filled(10, 30, 1, 0).unwrap();
        assert_eq!(ssim(&a, &a).unwrap_err().kind_name(), "too-small");
        let b = Image::filled(12, 12, 1, 0).unwrap();
        let c = Image::filled(12, 13, 1, 0).unwrap();
        assert_eq!(ssim(&b, &c).unwrap_err().kind_name(), "shape-mismatch");
    }

    #[test]
    fn taps_normalized_and_symmetric() {
        let t = gaussian_taps();
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..SSIM_WINDOW {
            assert_eq!(t[i], t[SSIM_WINDOW - 1 - i]);
        }
    }

    #[test]
    fn distances() {
        assert_eq!(l1_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(l1_distance(&[0.0, 0.0], &[2.0, 4.0]).unwrap(), 3.0);
        assert_eq!(l2_distance(&[0.0], &[3.0]).unwrap(), 9.0);
        assert_eq!(l2_distance(&[0.0], &[3.0, 1.0]).unwrap_err().kind_name(), "shape-mismatch");
        assert_eq!(l1_distance(&[0.0], &[]).unwrap_err().kind_name(), "shape-mismatch");
    }

    #[test]
    fn content_loss_composition() {
        let y = Image::filled(64, 64, 3, 100).unwrap();
        let b_y = bicubic_resize(&y, &ResampleSpec::downscale(4).unwrap()).unwrap();
        let x_hat = vec![102.0; 16 * 16 * 3];
        assert_eq!(l1_distance(&image_to_f64(&b_y), &x_hat).unwrap(), 2.0);
    }

    #[test]
    fn loss_weights() {
        let ones = LossComponents { adv: 1.0, cyc_or_con: 1.0, per: 1.0, fea: 1.0 };
        assert!((compose_loss(&ones, &LossWeights::SR_GENERATOR) - 21.0).abs() < 1e-12);
        assert!((compose_loss(&ones, &LossWeights::DEGRADATION) - 21.0).abs() < 1e-12);
        let zero = LossWeights::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let big = LossComponents { adv: 1e6, cyc_or_con: -3.0, per: 7.0, fea: 2.5 };
        assert_eq!(compose_loss(&big, &zero), 0.0);
        assert!(LossWeights::new(-0.1, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn crop_border_shaves() {
        let img = Image::from_fn(10, 8, 1, |x, y, _| (x + 10 * y) as u8).unwrap();
        let c = crop_border(&img, 2).unwrap();
        assert_eq!((c.width(), c.height(), c.get(0, 0, 0)), (6, 4, 22));
        assert!(crop_border(&img, 4).is_err());
    }

    proptest! {
        #[test]
        fn l2_is_symmetric(v in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..64)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            prop_assert_eq!(l2_distance(&a, &b).unwrap(), l2_distance(&b, &a).unwrap());
            prop_assert_eq!(l1_distance(&a, &b).unwrap(), l1_distance(&b, &a).unwrap());
        }

        #[test]
        fn compose_loss_is_linear(
            c1 in proptest::array::uniform4(-10.0f64..10.0),
            c2 in proptest::array::uniform4(-10.0f64..10.0),
            w in proptest::array::uniform4(0.0f64..25.0),
            k in -3.0f64..3.0,
        ) {
            let mk = |a: [f64; 4]| LossComponents { adv: a[0], cyc_or_con: a[1], per: a[2], fea: a[3] };
            let w = LossWeights::new(w[0], w[1], w[2], w[3]).unwrap();
            let sum = [c1[0] + k * c2[0], c1[1] + k * c2[1], c1[2] + k * c2[2], c1[3] + k * c2[3]];
            let lhs = compose_loss(&mk(sum), &w);
            let rhs = compose_loss(&mk(c1), &w) + k * compose_loss(&mk(c2), &w);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        }
    }
}
