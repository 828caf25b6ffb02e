//! Color images and videos as pure quaternion matrices, the corruption
//! protocol used in experiments, and quality metrics.

mod corruption;
mod io;
mod metrics;

pub use corruption::{add_impulse_noise, corrupt_video, gen_mask, CorruptionSpec};
pub use io::{read_image, read_video, write_image, write_video};
pub use metrics::{
    psnr, ssim, video_metrics, FrameMetrics, MetricsReport, PSNR_CAP, SSIM_WINDOW,
};

use crate::error::{Error, Result};
use crate::qcore::{QMatrix, QTensor, Quaternion};

/// An RGB image with channel values nominally in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorImage {
    height: usize,
    width: usize,
    /// R, G, B planes, row-major.
    channels: [Vec<f64>; 3],
}

impl ColorImage {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension("image must be non-empty".into()));
        }
        let n = height * width;
        Ok(ColorImage {
            height,
            width,
            channels: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        })
    }

    /// Row-major R, G, B planes.
    pub fn from_channels(height: usize, width: usize, channels: [Vec<f64>; 3]) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension("image must be non-empty".into()));
        }
        if channels.iter().any(|c| c.len() != height * width) {
            return Err(Error::Dimension(format!(
                "channel lengths do not match a {height}x{width} image"
            )));
        }
        Ok(ColorImage { height, width, channels })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> [f64; 3],
    ) -> Result<Self> {
        let mut img = ColorImage::new(height, width)?;
        for r in 0..height {
            for c in 0..width {
                img.set_pixel(r, c, f(r, c));
            }
        }
        Ok(img)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn channel(&self, ch: usize) -> &[f64] {
        &self.channels[ch]
    }

    pub fn channel_mut(&mut self, ch: usize) -> &mut [f64] {
        &mut self.channels[ch]
    }

    pub fn pixel(&self, r: usize, c: usize) -> [f64; 3] {
        let i = r * self.width + c;
        [self.channels[0][i], self.channels[1][i], self.channels[2][i]]
    }

    pub fn set_pixel(&mut self, r: usize, c: usize, rgb: [f64; 3]) {
        let i = r * self.width + c;
        for (ch, v) in rgb.into_iter().enumerate() {
            self.channels[ch][i] = v;
        }
    }

    /// Copy with every channel clamped to `[0, 1]`. NaN maps to 0.
    pub fn clamped(&self) -> ColorImage {
        let clamp = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        ColorImage {
            height: self.height,
            width: self.width,
            channels: self.channels.clone().map(|c| c.into_iter().map(clamp).collect()),
        }
    }

    /// The `w × h` window whose top-left corner is column `x`, row `y`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<ColorImage> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::Dimension(format!(
                "crop {x},{y},{w},{h} outside a {}x{} image",
                self.width, self.height
            )));
        }
        ColorImage::from_fn(h, w, |r, c| self.pixel(y + r, x + c))
    }
}

/// An ordered, non-empty sequence of equally sized frames.
#[derive(Clone, Debug, PartialEq)]
pub struct ColorVideo {
    frames: Vec<ColorImage>,
}

impl ColorVideo {
    pub fn new(frames: Vec<ColorImage>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::Input("video has no frames".into()))?;
        if frames.iter().any(|f| f.shape() != first.shape()) {
            return Err(Error::Dimension("video frames differ in shape".into()));
        }
        Ok(ColorVideo { frames })
    }

    pub fn frames(&self) -> &[ColorImage] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<ColorImage> {
        self.frames
    }

    /// `n3`.
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> (usize, usize) {
        self.frames[0].shape()
    }
}

/// Pure quaternion encoding: red on `i`, green on `j`, blue on `k`.
pub fn image_to_qmatrix(img: &ColorImage) -> QMatrix {
    QMatrix::from_fn(img.height, img.width, |r, c| {
        let [red, green, blue] = img.pixel(r, c);
        Quaternion::pure(red, green, blue)
    })
    .expect("image dimensions are non-zero")
}

/// Drops the real part and clamps each channel to `[0, 1]`.
pub fn qmatrix_to_image(x: &QMatrix) -> ColorImage {
    let (rows, cols) = x.shape();
    ColorImage::from_fn(rows, cols, |r, c| {
        let q = x.get(r, c);
        [q.x, q.y, q.z]
    })
    .expect("matrix dimensions are non-zero")
    .clamped()
}

pub fn video_to_tensor(video: &ColorVideo) -> QTensor {
    QTensor::new(video.frames.iter().map(image_to_qmatrix).collect())
        .expect("video frames share a shape")
}

pub fn tensor_to_video(t: &QTensor) -> ColorVideo {
    ColorVideo::new(t.slices().iter().map(qmatrix_to_image).collect())
        .expect("tensor slices share a shape")
}
