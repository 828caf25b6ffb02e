use serde::{Deserialize, Serialize};

use super::{ObservationMask, SolverConfig};
use crate::error::Result;
use crate::prox::{mcp_derivative, McpParams};
use crate::qcore::qsvd::compose;
use crate::qcore::{numerical_rank, qsvd, singular_values, QMatrix};

/// Relative cutoff below which a singular value of `L` counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Residuals of the four first-order stationarity conditions.
///
/// `r_grad` is the distance from `−M` to the subdifferential of `‖·‖_MCP` at
/// `L`. On the range of `L` that set is the single matrix returned by
/// [`mcp_gradient`]. On the null space of a rank-deficient `L` the derivative
/// `c` of the scalar penalty at zero widens to every block of spectral norm at
/// most `c`, so a stationary multiplier need not match `c·U⊥V⊥*` there.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `dist(−M, ∂‖L‖_MCP)`, equal to `‖∇‖L‖_MCP + M‖_F` when `L` has full rank.
    pub r_grad: f64,
    /// `|⟨P_Ω S, P_Ω M⟩ + λp‖P_Ω S‖_p^p|`
    pub r_sparse: f64,
    /// `‖P_Ω⊥ M‖_F`
    pub r_comp: f64,
    /// `‖L + S − X‖_F`
    pub r_feas: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.r_grad.max(self.r_sparse).max(self.r_comp).max(self.r_feas)
    }
}

/// Gradient of the MCP rank surrogate, `U · diag(Φ'(σ_i)) · V*`.
///
/// Where `L` is rank deficient the singular vectors of the null directions are
/// not unique, and neither is this matrix; its singular values are.
pub fn mcp_gradient(l: &QMatrix, params: McpParams) -> Result<QMatrix> {
    let f = qsvd(l)?;
    let d: Vec<f64> = f.sigma.iter().map(|&s| mcp_derivative(s, params)).collect();
    Ok(compose(&f.u, &d, &f.v))
}

/// `dist(−M, ∂‖L‖_MCP)`, computed in the singular bases of `L`. With
/// `B = U*MV` the range blocks contribute `‖B + diag(Φ'(σ))‖` exactly and the
/// null block contributes the excess of its singular values over `c`.
pub fn gradient_residual(l: &QMatrix, m: &QMatrix, params: McpParams) -> Result<f64> {
    l.check_same_shape(m)?;
    let f = qsvd(l)?;
    let (n1, n2) = l.shape();
    let r = numerical_rank(&f.sigma, RANK_TOL);
    let b = f.u.conj_transpose().matmul(m)?.matmul(&f.v)?;
    let mut sq = 0.0;
    for i in 0..n1 {
        for j in 0..n2 {
            if i >= r && j >= r {
                continue;
            }
            let mut q = b.get(i, j);
            if i == j {
                q.w += mcp_derivative(f.sigma[i], params);
            }
            sq += q.norm_sqr();
        }
    }
    if r < n1.min(n2) {
        let tail = b.block(r, r, n1 - r, n2 - r)?;
        sq += singular_values(&tail)?
            .into_iter()
            .map(|s| (s - params.c).max(0.0).powi(2))
            .sum::<f64>();
    }
    Ok(sq.sqrt())
}

/// Evaluates the stationarity residuals at `(L, S, M)` for data `X`.
pub fn kkt_residuals(
    l: &QMatrix,
    s: &QMatrix,
    m: &QMatrix,
    x: &QMatrix,
    mask: &ObservationMask,
    lambda: f64,
    config: &SolverConfig,
) -> Result<KktResiduals> {
    let ps = mask.project(s);
    let pm = mask.project(m);
    Ok(KktResiduals {
        r_grad: gradient_residual(l, m, config.mcp)?,
        r_sparse: (ps.inner_product(&pm)? + lambda * config.p * ps.lp_pow(config.p)).abs(),
        r_comp: mask.project_complement(m).frobenius_norm(),
        r_feas: (&(l + s) - x).frobenius_norm(),
    })
}
