use super::QMatrix;
use crate::error::{Error, Result};

/// An `n1 × n2 × n3` quaternion tensor held as `n3` frontal slices.
#[derive(Clone, Debug, PartialEq)]
pub struct QTensor {
    slices: Vec<QMatrix>,
}

impl QTensor {
    pub fn new(slices: Vec<QMatrix>) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Dimension("tensor needs at least one slice".into()))?;
        if slices.iter().any(|s| s.shape() != first.shape()) {
            return Err(Error::Dimension("tensor slices differ in shape".into()));
        }
        Ok(QTensor { slices })
    }

    pub fn from_matrix(m: QMatrix) -> Self {
        QTensor { slices: vec![m] }
    }

    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n3 == 0 {
            return Err(Error::Dimension("tensor needs at least one slice".into()));
        }
        Ok(QTensor { slices: vec![QMatrix::zeros(n1, n2)?; n3] })
    }

    /// `(n1, n2, n3)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        let (n1, n2) = self.slices[0].shape();
        (n1, n2, self.slices.len())
    }

    pub fn slices(&self) -> &[QMatrix] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [QMatrix] {
        &mut self.slices
    }

    pub fn slice(&self, k: usize) -> &QMatrix {
        &self.slices[k]
    }

    pub fn into_slices(self) -> Vec<QMatrix> {
        self.slices
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.slices.iter().map(QMatrix::frobenius_norm_sqr).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        let a = QMatrix::zeros(2, 3).unwrap();
        let b = QMatrix::zeros(3, 2).unwrap();
        assert!(QTensor::new(vec![a.clone(), b]).is_err());
        assert!(QTensor::new(vec![]).is_err());
        assert_eq!(QTensor::new(vec![a.clone(), a]).unwrap().shape(), (2, 3, 2));
    }
}
