use serde::{Deserialize, Serialize};

use super::{ColorImage, ColorVideo};
use crate::error::{Error, Result};

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 100.0;

/// Side of the uniform SSIM window.
pub const SSIM_WINDOW: usize = 8;

const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

fn check_shapes(a: &ColorImage, b: &ColorImage) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "image shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `10·log10(1 / MSE)` over all `3·n1·n2` samples, capped at [`PSNR_CAP`].
pub fn psnr(recovered: &ColorImage, reference: &ColorImage) -> Result<f64> {
    check_shapes(recovered, reference)?;
    let mut sum = 0.0;
    for ch in 0..3 {
        for (a, b) in recovered.channel(ch).iter().zip(reference.channel(ch)) {
            sum += (a - b) * (a - b);
        }
    }
    let mse = sum / (3 * recovered.height * recovered.width) as f64;
    Ok(if mse == 0.0 { PSNR_CAP } else { (10.0 * (1.0 / mse).log10()).min(PSNR_CAP) })
}

/// Single-scale SSIM with an 8×8 uniform window at stride 1, averaged over
/// windows and channels. Images smaller than the window use a window clipped
/// to the image. Statistics are population (not sample) moments.
pub fn ssim(recovered: &ColorImage, reference: &ColorImage) -> Result<f64> {
    check_shapes(recovered, reference)?;
    let (h, w) = recovered.shape();
    let (wh, ww) = (SSIM_WINDOW.min(h), SSIM_WINDOW.min(w));
    let area = (wh * ww) as f64;
    let mut total = 0.0;
    for ch in 0..3 {
        let (x, y) = (recovered.channel(ch), reference.channel(ch));
        for r0 in 0..=h - wh {
            for c0 in 0..=w - ww {
                let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for r in r0..r0 + wh {
                    for c in c0..c0 + ww {
                        let (a, b) = (x[r * w + c], y[r * w + c]);
                        sx += a;
                        sy += b;
                        sxx += a * a;
                        syy += b * b;
                        sxy += a * b;
                    }
                }
                let (mx, my) = (sx / area, sy / area);
                let vx = sxx / area - mx * mx;
                let vy = syy / area - my * my;
                let cov = sxy / area - mx * my;
                total += ((2.0 * mx * my + C1) * (2.0 * cov + C2))
                    / ((mx * mx + my * my + C1) * (vx + vy + C2));
            }
        }
    }
    Ok(total / (3 * (h - wh + 1) * (w - ww + 1)) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub psnr: f64,
    pub ssim: f64,
}

/// Mean PSNR/SSIM and the per-frame values they average. For a single image
/// `per_frame` has one entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub psnr: f64,
    pub ssim: f64,
    pub per_frame: Vec<FrameMetrics>,
}

/// MPSNR and MSSIM over frames.
pub fn video_metrics(recovered: &ColorVideo, reference: &ColorVideo) -> Result<MetricsReport> {
    if recovered.len() != reference.len() {
        return Err(Error::Dimension(format!(
            "{} recovered frames against {} reference frames",
            recovered.len(),
            reference.len()
        )));
    }
    let per_frame = recovered
        .frames()
        .iter()
        .zip(reference.frames())
        .map(|(a, b)| Ok(FrameMetrics { psnr: psnr(a, b)?, ssim: ssim(a, b)? }))
        .collect::<Result<Vec<_>>>()?;
    let n = per_frame.len() as f64;
    Ok(MetricsReport {
        psnr: per_frame.iter().map(|m| m.psnr).sum::<f64>() / n,
        ssim: per_frame.iter().map(|m| m.ssim).sum::<f64>() / n,
        per_frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> ColorImage {
        ColorImage::from_fn(12, 10, |r, c| {
            [0.05 * r as f64, 0.08 * c as f64, ((r + 2 * c) % 5) as f64 / 5.0]
        })
        .unwrap()
    }

    #[test]
    fn identical_images_hit_the_caps() {
        let img = ramp();
        assert_eq!(psnr(&img, &img).unwrap(), PSNR_CAP);
        assert!((ssim(&img, &img).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_offset_psnr() {
        let a = ColorImage::from_fn(9, 7, |_, _| [0.3, 0.5, 0.2]).unwrap();
        let b = ColorImage::from_fn(9, 7, |_, _| [0.4, 0.6, 0.3]).unwrap();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn psnr_decreases_with_offset() {
        let a = ramp();
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let d = 0.02 * k as f64;
            let b = ColorImage::from_fn(12, 10, |r, c| a.pixel(r, c).map(|v| v + d)).unwrap();
            let p = psnr(&a, &b).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn ssim_drops_under_perturbation() {
        let a = ramp();
        let b = ColorImage::from_fn(12, 10, |r, c| {
            let s = if (r + c) % 2 == 0 { 0.2 } else { -0.2 };
            a.pixel(r, c).map(|v| v + s)
        })
        .unwrap();
        let s = ssim(&a, &b).unwrap();
        assert!(s < 0.9 && s > -1.0);
    }

    #[test]
    fn shape_mismatch() {
        let a = ColorImage::new(3, 3).unwrap();
        let b = ColorImage::new(3, 4).unwrap();
        assert!(matches!(psnr(&a, &b), Err(Error::Dimension(_))));
        assert!(matches!(ssim(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn identical_video() {
        let v = ColorVideo::new(vec![ramp(), ramp(), ramp()]).unwrap();
        let m = video_metrics(&v, &v).unwrap();
        assert_eq!(m.psnr, PSNR_CAP);
        assert!((m.ssim - 1.0).abs() < 1e-12);
        assert_eq!(m.per_frame.len(), 3);
    }
}
