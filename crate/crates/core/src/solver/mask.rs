use crate::error::{Error, Result};
use crate::qcore::QMatrix;

/// The set `Ω` of observed entries of an `n1 × n2` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservationMask {
    rows: usize,
    cols: usize,
    /// Row-major membership flags.
    observed: Vec<bool>,
}

impl ObservationMask {
    pub fn full(rows: usize, cols: usize) -> Self {
        ObservationMask {
            rows,
            cols,
            observed: vec![true; rows * cols],
        }
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        ObservationMask {
            rows,
            cols,
            observed: vec![false; rows * cols],
        }
    }

    /// Row-major membership flags.
    pub fn from_flags(rows: usize, cols: usize, observed: Vec<bool>) -> Result<Self> {
        if observed.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} flags for a {rows}x{cols} mask",
                observed.len()
            )));
        }
        Ok(ObservationMask { rows, cols, observed })
    }

    pub fn from_indices(rows: usize, cols: usize, indices: &[(usize, usize)]) -> Result<Self> {
        let mut mask = ObservationMask::empty(rows, cols);
        for &(r, c) in indices {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!(
                    "index ({r}, {c}) outside a {rows}x{cols} mask"
                )));
            }
            mask.observed[r * cols + c] = true;
        }
        Ok(mask)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let observed = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        ObservationMask { rows, cols, observed }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.observed[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, observed: bool) {
        self.observed[r * self.cols + c] = observed;
    }

    /// `|Ω|`.
    pub fn count(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    /// `|Ω| / (n1·n2)`.
    pub fn sampling_ratio(&self) -> f64 {
        self.count() as f64 / (self.rows * self.cols) as f64
    }

    /// Observed indices in row-major order.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        (0..self.observed.len())
            .filter(|&i| self.observed[i])
            .map(|i| (i / self.cols, i % self.cols))
            .collect()
    }

    pub fn flags(&self) -> &[bool] {
        &self.observed
    }

    /// `Ω⊥`.
    pub fn complement(&self) -> ObservationMask {
        ObservationMask {
            rows: self.rows,
            cols: self.cols,
            observed: self.observed.iter().map(|b| !b).collect(),
        }
    }

    pub fn check_shape(&self, x: &QMatrix) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::Dimension(format!(
                "mask is {:?} but data is {:?}",
                self.shape(),
                x.shape()
            )));
        }
        Ok(())
    }

    /// `P_Ω(X)`: keeps observed entries and zeroes the rest.
    pub fn project(&self, x: &QMatrix) -> QMatrix {
        self.select(x, true)
    }

    /// `P_Ω⊥(X)`.
    pub fn project_complement(&self, x: &QMatrix) -> QMatrix {
        self.select(x, false)
    }

    fn select(&self, x: &QMatrix, keep_observed: bool) -> QMatrix {
        let mut out = x.clone();
        for plane in out.planes_mut() {
            for r in 0..self.rows {
                for c in 0..self.cols {
                    if self.contains(r, c) != keep_observed {
                        plane[(r, c)] = 0.0;
                    }
                }
            }
        }
        out
    }
}
