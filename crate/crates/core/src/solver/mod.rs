//! ADMM solver for nonconvex robust quaternion matrix completion.
//!
//! Minimizes `‖L‖_MCP + λ‖P_Ω(S)‖_p^p` subject to `L + S = X`. Each iteration
//! updates `S` entrywise with QGST on `Ω` (and exactly on `Ω⊥`), `L` by MCP
//! singular-value thresholding, then the multiplier `M` and the penalty `μ`.

mod kkt;
mod mask;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use kkt::{gradient_residual, kkt_residuals, mcp_gradient, KktResiduals};
pub use mask::ObservationMask;

use crate::error::{Error, Result};
use crate::prox::{qgst, svt_mcp, validate_p, GstParams, McpParams};
use crate::qcore::QMatrix;

/// How the stopping rule scales `tol`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TolMode {
    /// Compare residuals against `tol` directly.
    Absolute,
    /// Compare residuals against `tol · max(1, ‖X‖_F)`.
    #[default]
    Relative,
}

impl std::str::FromStr for TolMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" | "abs" => Ok(TolMode::Absolute),
            "relative" | "rel" => Ok(TolMode::Relative),
            _ => Err(Error::Parameter(format!("unknown tolerance mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight of the sparse term. `None` uses `1/√(SR·max(n1, n2))`.
    pub lambda: Option<f64>,
    /// Exponent of the sparse penalty, `0 < p ≤ 1`.
    pub p: f64,
    pub mcp: McpParams,
    pub mu0: f64,
    pub mu_growth: f64,
    pub mu_max: f64,
    pub tol: f64,
    pub tol_mode: TolMode,
    pub max_iters: usize,
    /// Fixed-point steps inside QGST.
    pub gst_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: None,
            p: 0.3,
            mcp: McpParams::default(),
            mu0: 1e-4,
            mu_growth: 1.2,
            mu_max: 1e8,
            tol: 1e-4,
            tol_mode: TolMode::Relative,
            max_iters: 500,
            gst_iters: GstParams::DEFAULT_ITERS,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Parameter(format!("lambda must be > 0, got {l}")));
            }
        }
        validate_p(self.p)?;
        McpParams::new(self.mcp.c, self.mcp.eta)?;
        if !(self.mu0 > 0.0 && self.mu0 < self.mu_max) {
            return Err(Error::Parameter(format!(
                "need 0 < mu0 < mu_max, got mu0 = {}, mu_max = {}",
                self.mu0, self.mu_max
            )));
        }
        if !(self.mu_growth > 1.0) {
            return Err(Error::Parameter(format!(
                "mu_growth must exceed 1, got {}",
                self.mu_growth
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 || self.gst_iters == 0 {
            return Err(Error::Parameter("iteration limits must be at least 1".into()));
        }
        Ok(())
    }

    /// The explicit `lambda`, or the sampling-ratio default for `mask`.
    pub fn resolve_lambda(&self, mask: &ObservationMask) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(mask))
    }

    /// Threshold the convergence test compares against.
    pub fn stop_threshold(&self, x: &QMatrix) -> f64 {
        match self.tol_mode {
            TolMode::Absolute => self.tol,
            TolMode::Relative => self.tol * x.frobenius_norm().max(1.0),
        }
    }
}

/// `1/√(SR·max(n1, n2))` with `SR = |Ω|/(n1·n2)`. An empty mask uses `SR = 1`;
/// no entry is then penalized, so the value only has to be finite.
pub fn default_lambda(mask: &ObservationMask) -> f64 {
    let (n1, n2) = mask.shape();
    let sr = match mask.sampling_ratio() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    1.0 / (sr * n1.max(n2) as f64).sqrt()
}

/// The ADMM iterate.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub l: QMatrix,
    pub s: QMatrix,
    /// Lagrange multiplier.
    pub m: QMatrix,
    pub mu: f64,
    pub k: usize,
}

impl SolverState {
    /// `L = S = M = 0` at penalty `mu`.
    pub fn zeros(rows: usize, cols: usize, mu: f64) -> Result<Self> {
        let z = QMatrix::zeros(rows, cols)?;
        Ok(SolverState {
            l: z.clone(),
            s: z.clone(),
            m: z,
            mu,
            k: 0,
        })
    }
}

/// Residuals recorded after one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    /// `‖L_{k+1} − L_k‖_F`
    pub d_l: f64,
    /// `‖S_{k+1} − S_k‖_F`
    pub d_s: f64,
    /// `‖L_{k+1} + S_{k+1} − X‖_F`
    pub feas: f64,
    /// Penalty used during the iteration.
    pub mu: f64,
}

impl ResidualRecord {
    pub fn max_residual(&self) -> f64 {
        self.d_l.max(self.d_s).max(self.feas)
    }
}

#[derive(Clone, Debug)]
pub struct RecoveryReport {
    pub l: QMatrix,
    /// Sparse part, zero on unobserved entries.
    pub s: QMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
    pub residual_history: Vec<ResidualRecord>,
    /// Diagnostics at the final iterate (using the internal `S`, which is not
    /// zeroed on `Ω⊥`).
    pub kkt: KktResiduals,
    /// Final multiplier.
    pub multiplier: QMatrix,
}

impl RecoveryReport {
    /// Writes `iter,dL,dS,feas,mu`, one row per iteration.
    pub fn write_residual_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iter,dL,dS,feas,mu")?;
        for (i, r) in self.residual_history.iter().enumerate() {
            writeln!(out, "{},{},{},{},{}", i + 1, r.d_l, r.d_s, r.feas, r.mu)?;
        }
        Ok(())
    }
}

/// S-update: with `Z = X − L_k − M_k/μ_k`, applies QGST with weight `λ/μ_k` on
/// `Ω` and copies `Z` on `Ω⊥`.
pub fn update_s(
    x: &QMatrix,
    state: &SolverState,
    mask: &ObservationMask,
    lambda: f64,
    config: &SolverConfig,
) -> Result<QMatrix> {
    let z = x - &state.l - state.m.scale(1.0 / state.mu);
    let params = GstParams::new(lambda / state.mu, config.p, config.gst_iters)?;
    Ok(z.map_indexed(|r, c, q| if mask.contains(r, c) { qgst(q, params) } else { q }))
}

/// L-update: MCP singular-value thresholding of `X − S_{k+1} − M_k/μ_k` at weight `1/μ_k`.
pub fn update_l(x: &QMatrix, s_next: &QMatrix, state: &SolverState, config: &SolverConfig) -> Result<QMatrix> {
    let y = x - s_next - state.m.scale(1.0 / state.mu);
    svt_mcp(&y, 1.0 / state.mu, config.mcp)
}

/// `M_{k+1} = M_k + μ_k(L_{k+1} + S_{k+1} − X)`, `μ_{k+1} = min(growth·μ_k, μ_max)`.
pub fn update_multiplier_and_mu(
    x: &QMatrix,
    l_next: QMatrix,
    s_next: QMatrix,
    state: &SolverState,
    config: &SolverConfig,
) -> SolverState {
    let residual = &(&l_next + &s_next) - x;
    let mut m = state.m.clone();
    m += &residual.scale(state.mu);
    SolverState {
        l: l_next,
        s: s_next,
        m,
        mu: (config.mu_growth * state.mu).min(config.mu_max),
        k: state.k + 1,
    }
}

/// Residuals between consecutive iterates.
pub fn residuals(prev: &SolverState, next: &SolverState, x: &QMatrix) -> ResidualRecord {
    ResidualRecord {
        d_l: (&next.l - &prev.l).frobenius_norm(),
        d_s: (&next.s - &prev.s).frobenius_norm(),
        feas: (&(&next.l + &next.s) - x).frobenius_norm(),
        mu: prev.mu,
    }
}

/// Stopping rule: the largest of the three residuals is at most the threshold.
pub fn converged(prev: &SolverState, next: &SolverState, x: &QMatrix, config: &SolverConfig) -> bool {
    residuals(prev, next, x).max_residual() <= config.stop_threshold(x)
}

/// Runs the ADMM loop from `L = S = M = 0`.
///
/// Entries of `x` outside the mask are ignored.
pub fn nrqmc_solve(x: &QMatrix, mask: &ObservationMask, config: &SolverConfig) -> Result<RecoveryReport> {
    config.validate()?;
    mask.check_shape(x)?;
    if !x.is_finite() {
        return Err(Error::Input("observed data contains non-finite values".into()));
    }
    let x = mask.project(x);
    let lambda = config.resolve_lambda(mask);
    let threshold = config.stop_threshold(&x);
    let (n1, n2) = x.shape();

    let mut state = SolverState::zeros(n1, n2, config.mu0)?;
    let mut history = Vec::new();
    let mut done = false;
    while !done && state.k < config.max_iters {
        let iteration = state.k + 1;
        let tag = |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        };
        let s_next = update_s(&x, &state, mask, lambda, config).map_err(tag)?;
        let l_next = update_l(&x, &s_next, &state, config).map_err(tag)?;
        let next = update_multiplier_and_mu(&x, l_next, s_next, &state, config);
        let record = residuals(&state, &next, &x);
        if !record.max_residual().is_finite() {
            return Err(tag(Error::Numerical("iterate became non-finite".into())));
        }
        done = record.max_residual() <= threshold;
        history.push(record);
        state = next;
    }

    let kkt = kkt_residuals(&state.l, &state.s, &state.m, &x, mask, lambda, config)?;
    Ok(RecoveryReport {
        s: mask.project(&state.s),
        l: state.l,
        iterations: history.len(),
        converged: done,
        lambda,
        residual_history: history,
        kkt,
        multiplier: state.m,
    })
}
