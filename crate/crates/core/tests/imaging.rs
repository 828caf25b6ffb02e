mod common;

use nrqmc::imaging::{
    add_impulse_noise, corrupt_video, gen_mask, image_to_qmatrix, psnr, qmatrix_to_image, read_image,
    read_video, ssim, video_metrics, write_image, write_video, ColorVideo, CorruptionSpec, PSNR_CAP,
};

#[test]
fn bundled_crop_roundtrips_through_png() {
    let img = common::crop();
    assert_eq!(img.shape(), (64, 64));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.png");
    write_image(&img, &path).unwrap();
    let back = read_image(&path).unwrap();
    assert_eq!(back, img);
    assert_eq!(psnr(&back, &img).unwrap(), PSNR_CAP);
    assert!((ssim(&back, &img).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn quaternion_encoding_is_lossless() {
    let img = common::crop();
    let q = image_to_qmatrix(&img);
    assert!(q.is_pure());
    assert_eq!(qmatrix_to_image(&q), img);
}

#[test]
fn corruption_lowers_quality_monotonically() {
    let img = common::crop();
    let mut last = f64::INFINITY;
    for gamma in [0.02, 0.1, 0.3] {
        let noisy = add_impulse_noise(&img, &CorruptionSpec::new(1.0, gamma, 7).unwrap());
        let db = psnr(&noisy, &img).unwrap();
        assert!(db < last, "gamma {gamma}: {db} dB");
        last = db;
    }
}

#[test]
fn video_frames_roundtrip_and_share_streams() {
    let img = common::crop();
    let frames: Vec<_> = (0..3).map(|k| img.crop(4 * k, 0, 40, 40).unwrap()).collect();
    let video = ColorVideo::new(frames).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_video(&video, dir.path()).unwrap();
    assert!(dir.path().join("frame_0003.png").exists());
    let back = read_video(dir.path()).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back.frames(), video.frames());

    let spec = CorruptionSpec::new(0.7, 0.1, 12).unwrap();
    let (noisy, masks) = corrupt_video(&video, &spec);
    assert_eq!(masks[0], gen_mask(40, 40, &spec));
    assert_eq!(noisy.frames()[0], add_impulse_noise(&video.frames()[0], &spec));
    assert_ne!(masks[0], masks[1]);

    let m = video_metrics(&noisy, &video).unwrap();
    assert_eq!(m.per_frame.len(), 3);
    let mean = m.per_frame.iter().map(|f| f.psnr).sum::<f64>() / 3.0;
    assert!((mean - m.psnr).abs() < 1e-12);
}
