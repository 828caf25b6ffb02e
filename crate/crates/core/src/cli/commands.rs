use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Crop, Mode};
use super::manifest::RunManifest;
use crate::error::{Error, Result};
use crate::imaging::{
    corrupt_video, image_to_qmatrix, qmatrix_to_image, read_image, read_video, video_metrics,
    write_image, write_video, ColorImage, ColorVideo, MetricsReport,
};
use crate::nss::{run_nss, write_cluster_csv, NssOutcome, NssParams};
use crate::prox::mcp_phi;
use crate::qcore::{numerical_rank, singular_values, QMatrix, QTensor};
use crate::solver::{nrqmc_solve, KktResiduals, ObservationMask, RecoveryReport};
use crate::synth::{generate, SynthSpec};

fn create_out(m: &RunManifest) -> Result<&Path> {
    fs::create_dir_all(&m.output_dir)?;
    m.write(&m.output_dir)?;
    Ok(&m.output_dir)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_residuals(report: &RecoveryReport, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    report.write_residual_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Summary of a synthetic run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    #[serde(rename = "rel_err_L")]
    pub rel_err_l: f64,
    /// `‖Ŝ − S0‖/‖S0‖` over the observed part of the true support.
    #[serde(rename = "rel_err_S_support")]
    pub rel_err_s_support: f64,
    pub iters: usize,
    pub converged: bool,
    pub lambda: f64,
    pub kkt: KktResiduals,
}

/// Generates a synthetic problem, solves it, and writes `report.json` and
/// `residuals.csv`.
pub fn cmd_synth(m: &RunManifest) -> Result<SynthReport> {
    let spec = SynthSpec {
        rows: m.synth.n,
        cols: m.synth.n,
        rank: m.synth.rank,
        gamma: m.corruption.gamma,
        sr: m.corruption.sr,
        seed: m.seed,
    };
    let problem = generate(&spec)?;
    let out = create_out(m)?;
    let report = nrqmc_solve(&problem.x, &problem.mask, &m.solver)?;

    let support = ObservationMask::from_fn(spec.rows, spec.cols, |r, c| {
        problem.mask.contains(r, c) && problem.s0.get(r, c).norm_sqr() > 0.0
    });
    let s0 = support.project(&problem.s0);
    let s0_norm = s0.frobenius_norm();
    let summary = SynthReport {
        rel_err_l: (&report.l - &problem.l0).frobenius_norm() / problem.l0.frobenius_norm(),
        rel_err_s_support: if s0_norm > 0.0 {
            (&support.project(&report.s) - &s0).frobenius_norm() / s0_norm
        } else {
            0.0
        },
        iters: report.iterations,
        converged: report.converged,
        lambda: report.lambda,
        kkt: report.kkt,
    };
    write_json(&summary, &out.join("report.json"))?;
    write_residuals(&report, &out.join("residuals.csv"))?;
    Ok(summary)
}

/// An image file or a frame directory, read as a video.
fn read_frames(path: &Path, crop: Option<Crop>) -> Result<(ColorVideo, bool)> {
    let (video, is_video) = if path.is_dir() {
        (read_video(path)?, true)
    } else if path.exists() {
        (ColorVideo::new(vec![read_image(path)?])?, false)
    } else {
        return Err(Error::Input(format!("{} does not exist", path.display())));
    };
    let video = match crop {
        Some(c) => ColorVideo::new(
            video
                .frames()
                .iter()
                .map(|f| f.crop(c.x, c.y, c.w, c.h))
                .collect::<Result<_>>()?,
        )?,
        None => video,
    };
    Ok((video, is_video))
}

fn write_frames(video: &ColorVideo, dir: &Path, name: &str, is_video: bool) -> Result<()> {
    if is_video {
        write_video(video, &dir.join(name))
    } else {
        write_image(&video.frames()[0], &dir.join(format!("{name}.png")))
    }
}

/// `|S|` scaled by its largest entry, as a gray image.
fn sparse_image(s: &QMatrix) -> ColorImage {
    let abs = s.abs();
    let max = abs.max();
    let (rows, cols) = s.shape();
    ColorImage::from_fn(rows, cols, |r, c| {
        let v = if max > 0.0 { abs[(r, c)] / max } else { 0.0 };
        [v; 3]
    })
    .expect("matrix dimensions are non-zero")
}

fn frame_file(stem: &str, index: usize, is_video: bool, ext: &str) -> String {
    if is_video {
        format!("{stem}_frame_{:04}.{ext}", index + 1)
    } else {
        format!("{stem}.{ext}")
    }
}

fn nss_params(m: &RunManifest) -> NssParams {
    NssParams {
        patch_size: m.nss.patch_size,
        overlap: m.nss.overlap,
        clusters: m.nss.clusters,
        max_rounds: m.nss.max_rounds,
        seed: m.seed,
        solver: m.solver.clone(),
    }
}

fn write_clusters(outcome: &NssOutcome, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_cluster_csv(&outcome.model, &outcome.plan, &mut out)?;
    out.flush()?;
    Ok(())
}

/// What `recover` produced, for callers that want numbers rather than files.
#[derive(Clone, Debug)]
pub struct RecoverOutcome {
    pub recovered: ColorVideo,
    pub observed: ColorVideo,
    pub metrics: Option<MetricsReport>,
    pub baseline: Option<MetricsReport>,
}

/// Corrupts the input with the manifest's protocol (noise, then sampling),
/// recovers it, and writes images, residual and cluster tables, and metrics
/// when a reference is given.
pub fn cmd_recover(m: &RunManifest) -> Result<RecoverOutcome> {
    let (clean, is_video) = read_frames(&m.inputs[0], m.crop)?;
    let reference = match &m.reference {
        Some(path) => {
            let (r, _) = read_frames(path, m.crop)?;
            if r.shape() != clean.shape() || r.len() != clean.len() {
                return Err(Error::Dimension(format!(
                    "reference has {} frames of {:?}, input has {} of {:?}",
                    r.len(),
                    r.shape(),
                    clean.len(),
                    clean.shape()
                )));
            }
            Some(r)
        }
        None => None,
    };
    let out = create_out(m)?;

    let (noisy, masks) = corrupt_video(&clean, &m.corruption);
    let observed: Vec<QMatrix> = noisy
        .frames()
        .iter()
        .zip(&masks)
        .map(|(f, mask)| mask.project(&image_to_qmatrix(f)))
        .collect();
    let reports: Vec<RecoveryReport> = observed
        .par_iter()
        .zip(&masks)
        .map(|(x, mask)| nrqmc_solve(x, mask, &m.solver))
        .collect::<Result<_>>()?;
    for (t, report) in reports.iter().enumerate() {
        write_residuals(report, &out.join(frame_file("residuals", t, is_video, "csv")))?;
    }

    let initial: Vec<QMatrix> = reports.iter().map(|r| r.l.clone()).collect();
    let params = nss_params(m);
    let estimate: Vec<QMatrix> = match m.mode {
        Mode::Plain => initial,
        Mode::Nss2d => {
            let outcomes: Vec<NssOutcome> = observed
                .iter()
                .zip(&masks)
                .zip(initial)
                .map(|((x, mask), l)| {
                    run_nss(
                        &QTensor::from_matrix(x.clone()),
                        std::slice::from_ref(mask),
                        &QTensor::from_matrix(l),
                        &params,
                    )
                })
                .collect::<Result<_>>()?;
            for (t, o) in outcomes.iter().enumerate() {
                write_clusters(o, &out.join(frame_file("clusters", t, is_video, "csv")))?;
            }
            outcomes
                .into_iter()
                .map(|o| o.estimate.into_slices().remove(0))
                .collect()
        }
        Mode::Nss3d => {
            let o = run_nss(&QTensor::new(observed.clone())?, &masks, &QTensor::new(initial)?, &params)?;
            write_clusters(&o, &out.join("clusters.csv"))?;
            o.estimate.into_slices()
        }
    };

    let recovered = ColorVideo::new(estimate.iter().map(qmatrix_to_image).collect())?;
    let observed_video = ColorVideo::new(observed.iter().map(qmatrix_to_image).collect())?;
    let sparse = ColorVideo::new(reports.iter().map(|r| sparse_image(&r.s)).collect())?;
    write_frames(&recovered, out, "recovered", is_video)?;
    write_frames(&observed_video, out, "observed", is_video)?;
    write_frames(&sparse, out, "sparse", is_video)?;

    let (metrics, baseline) = match &reference {
        Some(r) => {
            let metrics = video_metrics(&recovered, r)?;
            let baseline = video_metrics(&observed_video, r)?;
            write_json(&metrics, &out.join("metrics.json"))?;
            write_json(&baseline, &out.join("observed_metrics.json"))?;
            (Some(metrics), Some(baseline))
        }
        None => (None, None),
    };
    Ok(RecoverOutcome { recovered, observed: observed_video, metrics, baseline })
}

/// One row of the surrogate comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateRow {
    pub image: String,
    pub rank_eps: usize,
    pub qnn: f64,
    pub mcp: f64,
}

/// Numerical rank, nuclear norm and MCP surrogate of every input image,
/// written to `surrogate.csv`.
pub fn cmd_surrogate(m: &RunManifest) -> Result<Vec<SurrogateRow>> {
    let mut rows = Vec::new();
    for path in &m.inputs {
        let (video, is_video) = read_frames(path, m.crop)?;
        for (t, frame) in video.frames().iter().enumerate() {
            let sigma = singular_values(&image_to_qmatrix(frame))?;
            let mcp = sigma
                .iter()
                .map(|&s| mcp_phi(s, m.surrogate.mcp))
                .sum::<Result<f64>>()?;
            let image = if is_video {
                path.join(format!("frame_{:04}.png", t + 1)).display().to_string()
            } else {
                path.display().to_string()
            };
            rows.push(SurrogateRow {
                image,
                rank_eps: numerical_rank(&sigma, m.surrogate.rank_eps),
                qnn: sigma.iter().sum(),
                mcp,
            });
        }
    }
    let out = create_out(m)?;
    let mut csv = BufWriter::new(File::create(out.join("surrogate.csv"))?);
    writeln!(csv, "image,rank_eps,qnn,mcp")?;
    for r in &rows {
        writeln!(csv, "{},{},{},{}", r.image, r.rank_eps, r.qnn, r.mcp)?;
    }
    csv.flush()?;
    Ok(rows)
}

/// PSNR/SSIM (means over frames for a video) of the input against the reference.
pub fn cmd_metrics(m: &RunManifest) -> Result<MetricsReport> {
    let reference = m.reference.as_ref().expect("validated manifest has a reference");
    let (recovered, _) = read_frames(&m.inputs[0], m.crop)?;
    let (reference, _) = read_frames(reference, m.crop)?;
    let report = video_metrics(&recovered, &reference)?;
    let out = create_out(m)?;
    write_json(&report, &out.join("metrics.json"))?;
    Ok(report)
}
