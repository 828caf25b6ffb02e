use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ColorImage, ColorVideo};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};
use crate::solver::ObservationMask;

/// Sampling ratio, impulse-noise density, and the seed both are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub sr: f64,
    pub gamma: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    /// Requires `sr ∈ (0, 1]` and `gamma ∈ [0, 1]`.
    pub fn new(sr: f64, gamma: f64, seed: u64) -> Result<Self> {
        if !(sr > 0.0 && sr <= 1.0) {
            return Err(Error::Parameter(format!("sampling ratio must lie in (0, 1], got {sr}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Parameter(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        Ok(CorruptionSpec { sr, gamma, seed })
    }
}

fn sample_sorted<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut idx = sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

/// Observes `round(sr·n1·n2)` entries chosen uniformly without replacement.
pub fn gen_mask(n1: usize, n2: usize, spec: &CorruptionSpec) -> ObservationMask {
    let n = n1 * n2;
    let k = ((spec.sr * n as f64).round() as usize).min(n);
    let mut mask = ObservationMask::empty(n1, n2);
    for i in sample_sorted(&mut stream(spec.seed, Stream::Mask), n, k) {
        mask.set(i / n2, i % n2, true);
    }
    mask
}

/// Replaces `round(γ·n1·n2)` values of each channel, at supports drawn
/// independently per channel, with uniform draws from `[0, 1]`.
pub fn add_impulse_noise(img: &ColorImage, spec: &CorruptionSpec) -> ColorImage {
    noise_with(img, spec.gamma, &mut stream(spec.seed, Stream::Noise))
}

fn noise_with<R: Rng + ?Sized>(img: &ColorImage, gamma: f64, rng: &mut R) -> ColorImage {
    let n = img.height * img.width;
    let k = ((gamma * n as f64).round() as usize).min(n);
    let mut out = img.clone();
    for ch in 0..3 {
        let support = sample_sorted(rng, n, k);
        let plane = out.channel_mut(ch);
        for i in support {
            plane[i] = rng.random::<f64>();
        }
    }
    out
}

/// Noise then sampling for every frame. Frames draw successive values from the
/// same two streams, so frame `t` differs from frame `t+1` in its corruption.
pub fn corrupt_video(video: &ColorVideo, spec: &CorruptionSpec) -> (ColorVideo, Vec<ObservationMask>) {
    let (n1, n2) = video.shape();
    let mut noise_rng = stream(spec.seed, Stream::Noise);
    let mut mask_rng = stream(spec.seed, Stream::Mask);
    let n = n1 * n2;
    let k = ((spec.sr * n as f64).round() as usize).min(n);
    let mut frames = Vec::with_capacity(video.len());
    let mut masks = Vec::with_capacity(video.len());
    for frame in video.frames() {
        frames.push(noise_with(frame, spec.gamma, &mut noise_rng));
        let mut mask = ObservationMask::empty(n1, n2);
        for i in sample_sorted(&mut mask_rng, n, k) {
            mask.set(i / n2, i % n2, true);
        }
        masks.push(mask);
    }
    (ColorVideo::new(frames).expect("frames keep their shape"), masks)
}
