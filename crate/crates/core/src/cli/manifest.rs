use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Crop, Mode, Overrides};
use crate::error::{Error, Result};
use crate::imaging::CorruptionSpec;
use crate::nss::{PatchPlan, DEFAULT_MAX_ROUNDS};
use crate::prox::McpParams;
use crate::solver::SolverConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Synth,
    Recover,
    Surrogate,
    Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NssSettings {
    pub patch_size: usize,
    pub overlap: usize,
    pub clusters: Option<usize>,
    pub max_rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSettings {
    pub n: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSettings {
    pub mcp: McpParams,
    pub rank_eps: f64,
}

/// Everything a command needs, fully resolved. Written next to the outputs;
/// `nrqmc --manifest manifest.json` runs it again.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: CommandKind,
    pub inputs: Vec<PathBuf>,
    pub reference: Option<PathBuf>,
    pub corruption: CorruptionSpec,
    pub solver: SolverConfig,
    pub mode: Mode,
    pub nss: NssSettings,
    pub synth: SynthSettings,
    pub surrogate: SurrogateSettings,
    pub crop: Option<Crop>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl RunManifest {
    /// Defaults for `command`, then `overrides` on top.
    ///
    /// `--c`/`--eta` set the surrogate parameters for `surrogate` (default
    /// `c = 2, η = 1.5`) and the solver's MCP parameters otherwise.
    pub fn resolve(command: CommandKind, inputs: Vec<PathBuf>, o: Overrides) -> Result<RunManifest> {
        let seed = o.seed.unwrap_or(0);
        let (sr, gamma) = match command {
            CommandKind::Synth => (0.9, 0.05),
            _ => (1.0, 0.0),
        };
        let mut solver = SolverConfig::default();
        let mut surrogate = SurrogateSettings {
            mcp: McpParams { c: 2.0, eta: 1.5 },
            rank_eps: 1e-10,
        };
        let mcp = if command == CommandKind::Surrogate {
            &mut surrogate.mcp
        } else {
            &mut solver.mcp
        };
        *mcp = McpParams::new(o.c.unwrap_or(mcp.c), o.eta.unwrap_or(mcp.eta))?;
        surrogate.rank_eps = o.rank_eps.unwrap_or(surrogate.rank_eps);
        if !(surrogate.rank_eps > 0.0) {
            return Err(Error::Parameter("rank-eps must be > 0".into()));
        }
        solver.lambda = o.lambda.or(solver.lambda);
        solver.p = o.p.unwrap_or(solver.p);
        solver.tol = o.tol.unwrap_or(solver.tol);
        solver.tol_mode = o.tol_mode.unwrap_or(solver.tol_mode);
        solver.max_iters = o.max_iters.unwrap_or(solver.max_iters);
        solver.validate()?;

        let manifest = RunManifest {
            command,
            inputs,
            reference: o.reference,
            corruption: CorruptionSpec::new(o.sr.unwrap_or(sr), o.gamma.unwrap_or(gamma), seed)?,
            solver,
            mode: o.mode.unwrap_or_default(),
            nss: NssSettings {
                patch_size: o.patch_size.unwrap_or(PatchPlan::DEFAULT_SIDE),
                overlap: o.overlap.unwrap_or(PatchPlan::DEFAULT_OVERLAP),
                clusters: o.clusters,
                max_rounds: DEFAULT_MAX_ROUNDS,
            },
            synth: SynthSettings {
                n: o.n.unwrap_or(100),
                rank: o.rank.unwrap_or(5),
            },
            surrogate,
            crop: o.crop,
            output_dir: o.out.unwrap_or_else(|| PathBuf::from("nrqmc-out")),
            seed,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks invariants that `resolve` establishes, for manifests read from disk.
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        CorruptionSpec::new(self.corruption.sr, self.corruption.gamma, self.corruption.seed)?;
        if self.corruption.seed != self.seed {
            return Err(Error::Parameter("corruption seed differs from the run seed".into()));
        }
        if self.nss.clusters == Some(0) {
            return Err(Error::Parameter("clusters must be at least 1".into()));
        }
        let need_inputs = match self.command {
            CommandKind::Synth => 0,
            CommandKind::Recover | CommandKind::Surrogate | CommandKind::Metrics => 1,
        };
        if self.inputs.len() < need_inputs {
            return Err(Error::Input("no input given".into()));
        }
        if self.command == CommandKind::Metrics && self.reference.is_none() {
            return Err(Error::Input("metrics needs --reference".into()));
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<RunManifest> {
        let m: RunManifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        m.validate()?;
        Ok(m)
    }
}
