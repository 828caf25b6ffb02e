//! Synthetic low-rank plus sparse test problems with known ground truth.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::imaging::{gen_mask, CorruptionSpec};
use crate::qcore::{gaussian_qmatrix, QMatrix, Quaternion};
use crate::rng::{stream, Stream};
use crate::solver::ObservationMask;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Fraction of entries carrying sparse corruption.
    pub gamma: f64,
    /// Sampling ratio.
    pub sr: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parameter("synthetic matrix must be non-empty".into()));
        }
        if self.rank == 0 || self.rank > self.rows.min(self.cols) {
            return Err(Error::Parameter(format!(
                "rank must lie in 1..={}, got {}",
                self.rows.min(self.cols),
                self.rank
            )));
        }
        CorruptionSpec::new(self.sr, self.gamma, self.seed).map(|_| ())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticProblem {
    /// Low-rank ground truth `A·B*`.
    pub l0: QMatrix,
    /// Sparse ground truth.
    pub s0: QMatrix,
    /// Observed data `P_Ω(L0 + S0)`.
    pub x: QMatrix,
    pub mask: ObservationMask,
}

/// `L0 = A·B*` with standard Gaussian quaternion factors, `S0` supported on
/// `round(γ·n1·n2)` uniformly chosen entries whose four components are uniform
/// on `[0, 1]`, and a uniform observation mask of ratio `sr`.
pub fn generate(spec: &SynthSpec) -> Result<SyntheticProblem> {
    spec.validate()?;
    let (n1, n2) = (spec.rows, spec.cols);
    let mut rng = stream(spec.seed, Stream::Synth);
    let a = gaussian_qmatrix(&mut rng, n1, spec.rank);
    let b = gaussian_qmatrix(&mut rng, n2, spec.rank);
    let l0 = a.matmul(&b.conj_transpose())?;

    let mut s0 = QMatrix::zeros(n1, n2)?;
    let count = (spec.gamma * (n1 * n2) as f64).round() as usize;
    let mut support = sample(&mut rng, n1 * n2, count).into_vec();
    support.sort_unstable();
    for idx in support {
        let q = Quaternion::new(rng.random(), rng.random(), rng.random(), rng.random());
        s0.set(idx / n2, idx % n2, q);
    }

    let mask = gen_mask(n1, n2, &CorruptionSpec::new(spec.sr, spec.gamma, spec.seed)?);
    let x = mask.project(&(&l0 + &s0));
    Ok(SyntheticProblem { l0, s0, x, mask })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{numerical_rank, singular_values};

    #[test]
    fn ground_truth_shape_and_rank() {
        let spec = SynthSpec { rows: 20, cols: 16, rank: 3, gamma: 0.1, sr: 0.5, seed: 9 };
        let p = generate(&spec).unwrap();
        assert_eq!(numerical_rank(&singular_values(&p.l0).unwrap(), 1e-10), 3);
        let nnz = (0..20)
            .flat_map(|r| (0..16).map(move |c| (r, c)))
            .filter(|&(r, c)| p.s0.get(r, c) != Quaternion::ZERO)
            .count();
        assert_eq!(nnz, 32);
        assert_eq!(p.mask.count(), 160);
        assert_eq!(p.mask.project_complement(&p.x).frobenius_norm(), 0.0);
    }

    #[test]
    fn rejects_zero_rank() {
        let spec = SynthSpec { rows: 5, cols: 5, rank: 0, gamma: 0.1, sr: 0.5, seed: 1 };
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec { rows: 8, cols: 6, rank: 2, gamma: 0.2, sr: 0.7, seed: 3 };
        let (a, b) = (generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_eq!(a.x, b.x);
        assert_eq!(a.mask, b.mask);
    }
}
