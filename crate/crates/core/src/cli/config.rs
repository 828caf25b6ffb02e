use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::TolMode;

/// Which recovery pipeline `recover` runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The solver on each frame independently.
    #[default]
    Plain,
    /// Patch groups within each frame, seeded by the plain result.
    Nss2d,
    /// Patch groups pooled across all frames, seeded by the plain result.
    Nss3d,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Mode::Plain),
            "nss2d" => Ok(Mode::Nss2d),
            "nss3d" => Ok(Mode::Nss3d),
            _ => Err(Error::Parameter(format!("unknown mode {s:?}"))),
        }
    }
}

/// A `w × h` window at column `x`, row `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crop {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl FromStr for Crop {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parameter(format!("crop must be x,y,w,h, got {s:?}")))?;
        match parts[..] {
            [x, y, w, h] => Ok(Crop { x, y, w, h }),
            _ => Err(Error::Parameter(format!("crop must be x,y,w,h, got {s:?}"))),
        }
    }
}

/// Settings that can come from a config file or from flags. Unset fields
/// fall through to the next layer: defaults < config file < flags.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Sampling ratio of observed pixels, in (0, 1]
    #[arg(long)]
    pub sr: Option<f64>,
    /// Fraction of pixels per channel replaced by impulse noise
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Seed for masks, noise, clustering and synthetic data
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exponent of the sparse penalty, in (0, 1]
    #[arg(long)]
    pub p: Option<f64>,
    /// MCP height parameter
    #[arg(long)]
    pub c: Option<f64>,
    /// MCP width parameter
    #[arg(long)]
    pub eta: Option<f64>,
    /// Sparse weight (default 1/sqrt(SR * max(n1, n2)))
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Stopping tolerance (default 1e-4)
    #[arg(long)]
    pub tol: Option<f64>,
    /// absolute | relative
    #[arg(long)]
    pub tol_mode: Option<TolMode>,
    /// Iteration cap (default 500)
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Patch side length (default 5)
    #[arg(long)]
    pub patch_size: Option<usize>,
    /// Overlap between neighboring patches (default 1)
    #[arg(long)]
    pub overlap: Option<usize>,
    /// Patch group count (default: about 50 patches per group)
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Crop inputs to x,y,w,h before processing
    #[arg(long)]
    pub crop: Option<Crop>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Synthetic matrix size
    #[arg(long)]
    pub n: Option<usize>,
    /// Synthetic rank
    #[arg(long)]
    pub rank: Option<usize>,
    /// Relative cutoff for the numerical rank
    #[arg(long)]
    pub rank_eps: Option<f64>,
    /// Clean reference image or frame directory
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    value
        .parse()
        .map(Some)
        .map_err(|_| Error::Parameter(format!("invalid value {value:?} for {key}")))
}

impl Overrides {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// keys use the flag names, with `_` accepted for `-`.
    pub fn from_config_text(text: &str) -> Result<Overrides> {
        let mut o = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            match key.as_str() {
                "sr" => o.sr = parse(&key, value)?,
                "gamma" => o.gamma = parse(&key, value)?,
                "seed" => o.seed = parse(&key, value)?,
                "p" => o.p = parse(&key, value)?,
                "c" => o.c = parse(&key, value)?,
                "eta" => o.eta = parse(&key, value)?,
                "lambda" => o.lambda = parse(&key, value)?,
                "tol" => o.tol = parse(&key, value)?,
                "tol-mode" => o.tol_mode = parse(&key, value)?,
                "max-iters" => o.max_iters = parse(&key, value)?,
                "mode" => o.mode = parse(&key, value)?,
                "patch-size" => o.patch_size = parse(&key, value)?,
                "overlap" => o.overlap = parse(&key, value)?,
                "clusters" => o.clusters = parse(&key, value)?,
                "crop" => o.crop = parse(&key, value)?,
                "out" => o.out = Some(PathBuf::from(value)),
                "n" => o.n = parse(&key, value)?,
                "rank" => o.rank = parse(&key, value)?,
                "rank-eps" => o.rank_eps = parse(&key, value)?,
                "reference" => o.reference = Some(PathBuf::from(value)),
                _ => {
                    return Err(Error::Parameter(format!(
                        "config line {}: unknown key {key:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    /// Fields set in `top` win over fields set in `self`.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            sr: top.sr.or(self.sr),
            gamma: top.gamma.or(self.gamma),
            seed: top.seed.or(self.seed),
            p: top.p.or(self.p),
            c: top.c.or(self.c),
            eta: top.eta.or(self.eta),
            lambda: top.lambda.or(self.lambda),
            tol: top.tol.or(self.tol),
            tol_mode: top.tol_mode.or(self.tol_mode),
            max_iters: top.max_iters.or(self.max_iters),
            mode: top.mode.or(self.mode),
            patch_size: top.patch_size.or(self.patch_size),
            overlap: top.overlap.or(self.overlap),
            clusters: top.clusters.or(self.clusters),
            crop: top.crop.or(self.crop),
            out: top.out.or(self.out),
            n: top.n.or(self.n),
            rank: top.rank.or(self.rank),
            rank_eps: top.rank_eps.or(self.rank_eps),
            reference: top.reference.or(self.reference),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_text() {
        let text = "# run settings\nsr = 0.8\ngamma=0.1  # noise\n\ntol_mode = absolute\nmode = nss2d\ncrop = 1,2,3,4\n";
        let o = Overrides::from_config_text(text).unwrap();
        assert_eq!(o.sr, Some(0.8));
        assert_eq!(o.gamma, Some(0.1));
        assert_eq!(o.tol_mode, Some(TolMode::Absolute));
        assert_eq!(o.mode, Some(Mode::Nss2d));
        assert_eq!(o.crop, Some(Crop { x: 1, y: 2, w: 3, h: 4 }));
        assert_eq!(o.seed, None);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Overrides::from_config_text("unknown = 1").is_err());
        assert!(Overrides::from_config_text("sr 0.5").is_err());
        assert!(Overrides::from_config_text("sr = half").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = Overrides { sr: Some(0.5), gamma: Some(0.2), ..Overrides::default() };
        let flags = Overrides { sr: Some(0.9), ..Overrides::default() };
        let o = file.layered(flags);
        assert_eq!((o.sr, o.gamma), (Some(0.9), Some(0.2)));
    }

    #[test]
    fn crop_parsing() {
        assert_eq!("0,0,64,64".parse::<Crop>().unwrap(), Crop { x: 0, y: 0, w: 64, h: 64 });
        assert!("0,0,64".parse::<Crop>().is_err());
        assert!("a,b,c,d".parse::<Crop>().is_err());
    }
}
