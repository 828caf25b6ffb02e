//! Scalar and matrix thresholding operators: the MCP penalty, its proximal map,
//! singular-value thresholding with MCP, and quaternion generalized
//! soft-thresholding (QGST) for the `|x|^p` penalty.

use crate::error::{Error, Result};
use crate::qcore::qsvd::{compose_thin, qsvd_thin};
use crate::qcore::{QMatrix, Quaternion};

/// Parameters of the minimax concave penalty `Φ_{c,η}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct McpParams {
    /// Initial slope of the penalty.
    pub c: f64,
    /// Concavity span; the penalty is flat beyond `c·η`.
    pub eta: f64,
}

impl McpParams {
    pub fn new(c: f64, eta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && eta > 0.0 && eta.is_finite()) {
            return Err(Error::Parameter(format!(
                "MCP needs c > 0 and eta > 0, got c = {c}, eta = {eta}"
            )));
        }
        Ok(McpParams { c, eta })
    }

    /// Where the penalty reaches its plateau.
    pub fn knee(&self) -> f64 {
        self.c * self.eta
    }
}

impl Default for McpParams {
    fn default() -> Self {
        McpParams { c: 0.9, eta: 13.0 }
    }
}

/// `Φ_{c,η}(x)`: `cx − x²/(2η)` up to `cη`, then the constant `c²η/2`.
pub fn mcp_phi(x: f64, params: McpParams) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("MCP penalty is defined for x >= 0, got {x}")));
    }
    let McpParams { c, eta } = params;
    Ok(if x <= c * eta {
        c * x - x * x / (2.0 * eta)
    } else {
        0.5 * c * c * eta
    })
}

/// `Φ'_{c,η}(x) = max(c − x/η, 0)` for `x ≥ 0`.
pub fn mcp_derivative(x: f64, params: McpParams) -> f64 {
    if x <= params.knee() {
        params.c - x / params.eta
    } else {
        0.0
    }
}

/// `μ·Φ(|t|) + ½(t − y)²`, the objective minimized by [`prox_mcp`].
pub fn prox_mcp_objective(t: f64, y: f64, mu: f64, params: McpParams) -> f64 {
    mu * mcp_phi(t.abs(), params).expect("abs is nonnegative") + 0.5 * (t - y) * (t - y)
}

/// Proximal map of `μ·Φ_{c,η}` at `y`.
///
/// For `μ < η` this is the three-branch closed form. For `μ ≥ η` the objective is
/// concave on `[0, cη]`, so the minimizer is one of `0`, `sign(y)·cη` or `y`; the
/// candidates are compared directly with ties going to the earlier one.
pub fn prox_mcp(y: f64, mu: f64, params: McpParams) -> f64 {
    let McpParams { c, eta } = params;
    let a = y.abs();
    if mu < eta {
        if a <= c * mu {
            0.0
        } else if a <= c * eta {
            y.signum() * (a - c * mu) / (1.0 - mu / eta)
        } else {
            y
        }
    } else {
        let mut best = 0.0;
        let mut best_obj = prox_mcp_objective(0.0, y, mu, params);
        for t in [y.signum() * c * eta, y] {
            let obj = prox_mcp_objective(t, y, mu, params);
            if obj < best_obj {
                best = t;
                best_obj = obj;
            }
        }
        best
    }
}

/// Parameters of the QGST operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GstParams {
    /// Penalty weight `ν`.
    pub nu: f64,
    /// Exponent, `0 < p ≤ 1`; `p = 1` is plain soft-thresholding.
    pub p: f64,
    /// Fixed-point steps per entry.
    pub iters: usize,
}

impl GstParams {
    pub const DEFAULT_ITERS: usize = 3;

    pub fn new(nu: f64, p: f64, iters: usize) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::Parameter(format!("QGST weight must be >= 0, got {nu}")));
        }
        validate_p(p)?;
        if iters == 0 {
            return Err(Error::Parameter("QGST needs at least one fixed-point step".into()));
        }
        Ok(GstParams { nu, p, iters })
    }
}

pub(crate) fn validate_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("p must lie in (0, 1], got {p}")));
    }
    Ok(())
}

/// QGST threshold `τ_p(ν) = (2ν(1−p))^{1/(2−p)} + νp(2ν(1−p))^{(p−1)/(2−p)}`.
///
/// Returns `ν` for `p = 1` (the limit) and `0` for `ν = 0`.
pub fn qgst_threshold(nu: f64, p: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return nu;
    }
    let base = 2.0 * nu * (1.0 - p);
    base.powf(1.0 / (2.0 - p)) + nu * p * base.powf((p - 1.0) / (2.0 - p))
}

/// Smallest modulus the fixed-point iterate may take.
const MIN_MODULUS: f64 = 1e-12;

/// Proximal map of `ν|x|^p` over quaternions.
///
/// Zero at or below the threshold; otherwise `signQ(y)·t` where `t` is reached by
/// `iters` steps of `t ← |y| − νp·t^{p−1}` from `t = |y|`.
pub fn qgst(y: Quaternion, params: GstParams) -> Quaternion {
    let GstParams { nu, p, iters } = params;
    let m = y.abs();
    if p >= 1.0 {
        return if m > nu { y.sign() * (m - nu) } else { Quaternion::ZERO };
    }
    if m <= qgst_threshold(nu, p) {
        return Quaternion::ZERO;
    }
    let mut t = m;
    for _ in 0..iters {
        t = (m - nu * p * t.powf(p - 1.0)).max(MIN_MODULUS);
    }
    y.sign() * t
}

/// `½|x − y|² + ν|x|^p`, the objective minimized by [`qgst`].
pub fn qgst_objective(x: Quaternion, y: Quaternion, nu: f64, p: f64) -> f64 {
    let m = x.abs();
    let pen = if m == 0.0 { 0.0 } else { m.powf(p) };
    0.5 * (x - y).norm_sqr() + nu * pen
}

/// Singular-value thresholding with the MCP prox at weight `weight`:
/// `U · diag(prox(σ_i)) · V*`.
pub fn svt_mcp(y: &QMatrix, weight: f64, params: McpParams) -> Result<QMatrix> {
    if !(weight > 0.0) {
        return Err(Error::Parameter(format!("SVT weight must be > 0, got {weight}")));
    }
    let thin = qsvd_thin(y)?;
    let shrunk: Vec<f64> = thin.sigma[..thin.u.len()]
        .iter()
        .map(|&s| prox_mcp(s, weight, params))
        .collect();
    Ok(compose_thin(&thin, &shrunk))
}

/// Objective `weight·‖L‖_MCP + ½‖L − Y‖_F²` solved by [`svt_mcp`].
pub fn svt_mcp_objective(l: &QMatrix, y: &QMatrix, weight: f64, params: McpParams) -> Result<f64> {
    Ok(weight * crate::qcore::mcp_norm(l, params)? + 0.5 * (l - y).frobenius_norm_sqr())
}
