//! Quaternion SVD through the complex adjoint.
//!
//! The adjoint `χ(X)` has every singular value twice. Its singular subspaces are
//! closed under `J[a; b] = [−conj(b); conj(a)]`, the image of right
//! multiplication by `j`, so a quaternion singular vector is any complex singular
//! vector read back through [`complex_column_to_quaternions`]. Of each pair only
//! one vector is kept: a candidate is projected, in the quaternion sense, against
//! the vectors already accepted and dropped when nothing survives. Projection
//! also keeps degenerate clusters (e.g. the identity) consistent.

use nalgebra::Complex;

use super::adjoint::{complex_column_to_quaternions, ComplexAdjoint};
use super::matrix::QMatrix;
use super::quaternion::Quaternion;
use crate::error::{Error, Result};
use crate::prox::{mcp_phi, McpParams};

/// Singular values at or below this fraction of `σ1` are treated as zero when
/// extracting singular vectors.
const ZERO_REL_TOL: f64 = 1e-12;

/// `X = U · diag(sigma) · V*` with unitary `U` (n1×n1) and `V` (n2×n2).
#[derive(Clone, Debug)]
pub struct QsvdFactors {
    pub u: QMatrix,
    /// `min(n1, n2)` values, nonincreasing and nonnegative.
    pub sigma: Vec<f64>,
    pub v: QMatrix,
}

impl QsvdFactors {
    /// Recomposes `U · diag(sigma) · V*`.
    pub fn reconstruct(&self) -> QMatrix {
        compose(&self.u, &self.sigma, &self.v)
    }
}

/// Economy factors restricted to the numerically nonzero singular values.
#[derive(Clone, Debug)]
pub(crate) struct ThinQsvd {
    pub shape: (usize, usize),
    pub u: Vec<Vec<Quaternion>>,
    pub v: Vec<Vec<Quaternion>>,
    /// All `min(n1, n2)` singular values; the first `u.len()` have vectors.
    pub sigma: Vec<f64>,
}

/// Quaternion inner product `a* b`.
fn qdot(a: &[Quaternion], b: &[Quaternion]) -> Quaternion {
    a.iter()
        .zip(b)
        .fold(Quaternion::ZERO, |acc, (x, y)| acc + x.conj() * *y)
}

fn qnorm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the components of `v` along the quaternion span of `basis`, twice.
fn project_out(v: &mut [Quaternion], basis: &[Vec<Quaternion>]) {
    for _ in 0..2 {
        for b in basis {
            let coeff = qdot(b, v);
            for (vt, bt) in v.iter_mut().zip(b) {
                *vt -= *bt * coeff;
            }
        }
    }
}

fn normalize(v: &mut [Quaternion]) {
    let n = qnorm(v);
    for q in v.iter_mut() {
        *q = *q / n;
    }
}

/// Extends an orthonormal quaternion basis of `C^n`-length vectors to `n` vectors,
/// always taking the standard basis vector with the largest remaining component.
fn complete_basis(basis: &mut Vec<Vec<Quaternion>>, n: usize) {
    let mut residual: Vec<f64> = (0..n)
        .map(|i| 1.0 - basis.iter().map(|b| b[i].norm_sqr()).sum::<f64>())
        .collect();
    while basis.len() < n {
        let (pick, _) = residual
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &r)| if r > best.1 { (i, r) } else { best });
        let mut v = vec![Quaternion::ZERO; n];
        v[pick] = Quaternion::ONE;
        project_out(&mut v, basis);
        normalize(&mut v);
        for (r, q) in residual.iter_mut().zip(&v) {
            *r -= q.norm_sqr();
        }
        residual[pick] = f64::NEG_INFINITY;
        basis.push(v);
    }
}

fn pair_average(values: &[f64]) -> Vec<f64> {
    values
        .chunks_exact(2)
        .map(|p| (0.5 * (p[0] + p[1])).max(0.0))
        .collect()
}

/// Singular values of a quaternion matrix, nonincreasing, length `min(n1, n2)`.
pub fn singular_values(x: &QMatrix) -> Result<Vec<f64>> {
    Ok(pair_average(&ComplexAdjoint::from_qmatrix(x).singular_values()?))
}

pub(crate) fn qsvd_thin(x: &QMatrix) -> Result<ThinQsvd> {
    let (n1, n2) = x.shape();
    let svd = ComplexAdjoint::from_qmatrix(x).svd(true)?;
    let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma = pair_average(&raw);
    let cutoff = sigma[0] * ZERO_REL_TOL;
    let rank = sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();

    let cu = svd.u.as_ref().expect("left vectors requested");
    let cvt = svd.v_t.as_ref().expect("right vectors requested");
    let mut u_acc: Vec<Vec<Quaternion>> = Vec::with_capacity(rank);
    let mut v_acc: Vec<Vec<Quaternion>> = Vec::with_capacity(rank);
    for k in 0..(2 * rank).min(raw.len()) {
        if u_acc.len() == rank {
            break;
        }
        let ucol: Vec<Complex<f64>> = cu.column(k).iter().copied().collect();
        let vcol: Vec<Complex<f64>> = cvt.row(k).iter().map(|c| c.conj()).collect();
        let mut u = complex_column_to_quaternions(&ucol);
        let mut v = complex_column_to_quaternions(&vcol);
        project_out(&mut u, &u_acc);
        project_out(&mut v, &v_acc);
        if qnorm(&u) < 0.5 || qnorm(&v) < 0.5 {
            continue;
        }
        normalize(&mut u);
        normalize(&mut v);
        u_acc.push(u);
        v_acc.push(v);
    }
    if u_acc.len() < rank && sigma[u_acc.len()] > 1e-8 * sigma[0] {
        return Err(Error::Numerical(format!(
            "QSVD of {n1}x{n2} matrix recovered {} of {rank} singular vector pairs",
            u_acc.len()
        )));
    }
    Ok(ThinQsvd {
        shape: (n1, n2),
        u: u_acc,
        v: v_acc,
        sigma,
    })
}

/// Full quaternion SVD with square unitary factors.
pub fn qsvd(x: &QMatrix) -> Result<QsvdFactors> {
    let (n1, n2) = x.shape();
    let thin = qsvd_thin(x)?;
    let (mut u, mut v) = (thin.u, thin.v);
    complete_basis(&mut u, n1);
    complete_basis(&mut v, n2);
    Ok(QsvdFactors {
        u: QMatrix::from_columns(n1, &u)?,
        sigma: thin.sigma,
        v: QMatrix::from_columns(n2, &v)?,
    })
}

/// `U[:, ..k] · diag(values) · V[:, ..k]*` with `k = values.len()`.
pub(crate) fn compose(u: &QMatrix, values: &[f64], v: &QMatrix) -> QMatrix {
    let k = values.len();
    let us = QMatrix::from_fn(u.rows(), k.max(1), |r, c| {
        if c < k {
            u.get(r, c) * values[c]
        } else {
            Quaternion::ZERO
        }
    })
    .expect("non-empty");
    let vk = QMatrix::from_fn(v.rows(), k.max(1), |r, c| if c < k { v.get(r, c) } else { Quaternion::ZERO })
        .expect("non-empty");
    us.matmul(&vk.conj_transpose()).expect("conforming factors")
}

/// `Σ values_i · u_i · v_i*` over the thin factors; zero weights are skipped.
pub(crate) fn compose_thin(thin: &ThinQsvd, weights: &[f64]) -> QMatrix {
    let (n1, n2) = thin.shape;
    let keep: Vec<usize> = (0..thin.u.len()).filter(|&i| weights[i] != 0.0).collect();
    if keep.is_empty() {
        return QMatrix::zeros_unchecked(n1, n2);
    }
    let us = QMatrix::from_fn(n1, keep.len(), |r, c| thin.u[keep[c]][r] * weights[keep[c]])
        .expect("non-empty");
    let vk = QMatrix::from_fn(n2, keep.len(), |r, c| thin.v[keep[c]][r]).expect("non-empty");
    us.matmul(&vk.conj_transpose()).expect("conforming factors")
}

/// Number of singular values above `eps · σ1`; zero when `σ1 = 0`.
pub fn numerical_rank(sigma: &[f64], eps: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().filter(|&&s| s > eps * s1).count(),
        _ => 0,
    }
}

/// MCP rank surrogate `Σ Φ_{c,η}(σ_i(X))`.
pub fn mcp_norm(x: &QMatrix, params: McpParams) -> Result<f64> {
    singular_values(x)?
        .into_iter()
        .map(|s| mcp_phi(s, params))
        .sum()
}
