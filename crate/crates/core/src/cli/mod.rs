//! The `nrqmc` command line.
//!
//! Every command resolves its settings (defaults, then an optional
//! `key = value` config file, then flags) into a [`RunManifest`], writes it to
//! the output directory, and runs from it. Exit codes: 0 success, 1 numerical
//! failure, 2 usage or input error.

mod commands;
mod config;
mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_metrics, cmd_recover, cmd_surrogate, cmd_synth, RecoverOutcome, SurrogateRow, SynthReport,
};
pub use config::{Crop, Mode, Overrides};
pub use manifest::{
    CommandKind, NssSettings, RunManifest, SurrogateSettings, SynthSettings, MANIFEST_FILE,
};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "nrqmc", version, about = "Robust completion of color images and videos")]
pub struct Cli {
    /// Worker threads for frame and group parallelism (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Run the command recorded in a manifest file
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Config file of `key = value` lines; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,
}

impl Common {
    fn resolve(self) -> Result<Overrides> {
        let file = match &self.config {
            Some(path) => Overrides::from_config_text(&fs::read_to_string(path).map_err(|e| {
                Error::Input(format!("cannot read config {}: {e}", path.display()))
            })?)?,
            None => Overrides::default(),
        };
        Ok(file.layered(self.overrides))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a synthetic low-rank plus sparse problem with known ground truth
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Corrupt an image or frame directory and recover it
    Recover {
        /// Image file (PNG/PPM) or directory of frame_0001.png, ...
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare rank, nuclear norm and MCP surrogate of images
    Surrogate {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// PSNR and SSIM of an image or frame directory against --reference
    Metrics {
        recovered: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn manifest_for(command: Command) -> Result<RunManifest> {
    let (kind, inputs, common) = match command {
        Command::Synth { common } => (CommandKind::Synth, vec![], common),
        Command::Recover { input, common } => (CommandKind::Recover, vec![input], common),
        Command::Surrogate { inputs, common } => (CommandKind::Surrogate, inputs, common),
        Command::Metrics { recovered, common } => (CommandKind::Metrics, vec![recovered], common),
    };
    RunManifest::resolve(kind, inputs, common.resolve()?)
}

/// Runs the command a manifest describes and prints a short summary.
pub fn execute(m: &RunManifest) -> Result<()> {
    match m.command {
        CommandKind::Synth => {
            let r = cmd_synth(m)?;
            println!(
                "rel_err_L {:.3e}  iters {}  converged {}",
                r.rel_err_l, r.iters, r.converged
            );
        }
        CommandKind::Recover => {
            let r = cmd_recover(m)?;
            match (&r.metrics, &r.baseline) {
                (Some(a), Some(b)) => println!(
                    "psnr {:.2} dB (observed {:.2} dB)  ssim {:.4}",
                    a.psnr, b.psnr, a.ssim
                ),
                _ => println!("recovered {} frame(s)", r.recovered.len()),
            }
        }
        CommandKind::Surrogate => {
            for r in cmd_surrogate(m)? {
                println!("{}: rank {} qnn {:.4} mcp {:.4}", r.image, r.rank_eps, r.qnn, r.mcp);
            }
        }
        CommandKind::Metrics => {
            let r = cmd_metrics(m)?;
            println!("{}", serde_json::to_string(&r)?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Parameter("--threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, as in repeated in-process calls.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let manifest = match (cli.manifest, cli.command) {
        (Some(path), None) => RunManifest::read(&path)?,
        (Some(_), Some(_)) => {
            return Err(Error::Input("--manifest replaces the subcommand; give one or the other".into()))
        }
        (None, Some(command)) => manifest_for(command)?,
        (None, None) => return Err(Error::Input("no command given; see --help".into())),
    };
    execute(&manifest)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_NUMERICAL);
        let tagged = Error::Iteration { iteration: 3, source: Box::new(Error::Numerical("x".into())) };
        assert_eq!(exit_code(&tagged), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Parameter("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Input("x".into())), EXIT_USAGE);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with_args(["nrqmc", "bogus"]), EXIT_USAGE);
        assert_eq!(main_with_args(["nrqmc", "synth", "--rank", "zero"]), EXIT_USAGE);
        assert_eq!(main_with_args(["nrqmc"]), EXIT_USAGE);
        assert_eq!(main_with_args(["nrqmc", "--help"]), EXIT_OK);
    }
}
