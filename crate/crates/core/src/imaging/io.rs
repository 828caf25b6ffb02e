use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageFormat, Rgb, RgbImage};

use super::{ColorImage, ColorVideo};
use crate::error::{Error, Result};

/// Reads a PNG or binary PPM, scaling 8-bit samples to `[0, 1]`.
pub fn read_image(path: &Path) -> Result<ColorImage> {
    let rgb = image::open(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    ColorImage::from_fn(h as usize, w as usize, |r, c| {
        rgb.get_pixel(c as u32, r as u32).0.map(|v| v as f64 / 255.0)
    })
}

/// Writes a clamped, 8-bit quantized image. The format follows the extension
/// (`.png`, or `.ppm` for binary PPM).
pub fn write_image(img: &ColorImage, path: &Path) -> Result<()> {
    let img = img.clamped();
    let out = RgbImage::from_fn(img.width() as u32, img.height() as u32, |c, r| {
        Rgb(img.pixel(r as usize, c as usize).map(|v| (v * 255.0).round() as u8))
    });
    let format = ImageFormat::from_path(path)?;
    out.save_with_format(path, format)?;
    Ok(())
}

fn frame_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{:04}.png", index + 1))
}

/// Reads `frame_0001.png`, `frame_0002.png`, ... until the first missing index.
pub fn read_video(dir: &Path) -> Result<ColorVideo> {
    if !dir.is_dir() {
        return Err(Error::Input(format!("{} is not a directory", dir.display())));
    }
    let mut frames = Vec::new();
    loop {
        let path = frame_path(dir, frames.len());
        if !path.exists() {
            break;
        }
        frames.push(read_image(&path)?);
    }
    ColorVideo::new(frames)
}

pub fn write_video(video: &ColorVideo, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, frame) in video.frames().iter().enumerate() {
        write_image(frame, &frame_path(dir, i))?;
    }
    Ok(())
}
