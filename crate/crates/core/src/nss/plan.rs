use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{QMatrix, QTensor, Quaternion};

/// Top-left corner of one patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchOrigin {
    pub slice: usize,
    pub row: usize,
    pub col: usize,
}

/// Geometry of `s × s` patches overlapping by `l` pixels over an
/// `n1 × n2 × n3` tensor.
///
/// Along an axis of length `n` there are `⌈(n − l)/(s − l)⌉` patches whose
/// origins step by `s − l`; the last origin is clamped to `n − s` so every
/// patch stays inside the frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchPlan {
    s: usize,
    l: usize,
    shape: (usize, usize, usize),
    row_origins: Vec<usize>,
    col_origins: Vec<usize>,
}

fn axis_origins(n: usize, s: usize, l: usize) -> Vec<usize> {
    let step = s - l;
    let count = (n - l).div_ceil(step);
    (0..count).map(|k| (k * step).min(n - s)).collect()
}

impl PatchPlan {
    pub const DEFAULT_SIDE: usize = 5;
    pub const DEFAULT_OVERLAP: usize = 1;

    pub fn new(s: usize, l: usize, n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if !(1 <= l && l < s) {
            return Err(Error::Parameter(format!(
                "patch overlap must satisfy 1 <= l < s, got s = {s}, l = {l}"
            )));
        }
        if s > n1.min(n2) {
            return Err(Error::Dimension(format!(
                "patch side {s} exceeds the {n1}x{n2} frame"
            )));
        }
        if n3 == 0 {
            return Err(Error::Dimension("tensor needs at least one slice".into()));
        }
        Ok(PatchPlan {
            s,
            l,
            shape: (n1, n2, n3),
            row_origins: axis_origins(n1, s, l),
            col_origins: axis_origins(n2, s, l),
        })
    }

    /// Plan for an `n1 × n2 × n3` tensor with the default 5×5 patches overlapping by 1.
    pub fn with_defaults(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        PatchPlan::new(Self::DEFAULT_SIDE, Self::DEFAULT_OVERLAP, n1, n2, n3)
    }

    pub fn side(&self) -> usize {
        self.s
    }

    pub fn overlap(&self) -> usize {
        self.l
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.shape
    }

    /// Patch vector length `s²`.
    pub fn patch_len(&self) -> usize {
        self.s * self.s
    }

    /// `M`, patches per slice.
    pub fn per_slice(&self) -> usize {
        self.row_origins.len() * self.col_origins.len()
    }

    /// `M · n3`.
    pub fn total(&self) -> usize {
        self.per_slice() * self.shape.2
    }

    /// Origin of patch `index` in raster order: slice, then row, then column.
    pub fn origin(&self, index: usize) -> PatchOrigin {
        let m = self.per_slice();
        let (slice, rem) = (index / m, index % m);
        let nc = self.col_origins.len();
        PatchOrigin {
            slice,
            row: self.row_origins[rem / nc],
            col: self.col_origins[rem % nc],
        }
    }

    pub fn origins(&self) -> impl Iterator<Item = PatchOrigin> + '_ {
        (0..self.total()).map(|i| self.origin(i))
    }

    /// Pixel of the frame holding entry `k` of a patch vector (column-major
    /// within the patch).
    pub fn pixel(&self, origin: PatchOrigin, k: usize) -> (usize, usize) {
        (origin.row + k % self.s, origin.col + k / self.s)
    }

    pub fn check_tensor(&self, t: &QTensor) -> Result<()> {
        if t.shape() != self.shape {
            return Err(Error::Dimension(format!(
                "patch plan for {:?} applied to a tensor of shape {:?}",
                self.shape,
                t.shape()
            )));
        }
        Ok(())
    }
}

/// Vectorizes every patch of `data`, column-major within the patch, in plan order.
pub fn extract_patches(data: &QTensor, plan: &PatchPlan) -> Result<Vec<Vec<Quaternion>>> {
    plan.check_tensor(data)?;
    Ok(plan
        .origins()
        .map(|o| {
            let slice = data.slice(o.slice);
            (0..plan.patch_len())
                .map(|k| {
                    let (r, c) = plan.pixel(o, k);
                    slice.get(r, c)
                })
                .collect()
        })
        .collect())
}

/// Running per-pixel means of patch contributions.
pub(crate) struct Accumulator<'a> {
    plan: &'a PatchPlan,
    mean: Vec<QMatrix>,
    count: Vec<Vec<u32>>,
}

impl<'a> Accumulator<'a> {
    pub(crate) fn new(plan: &'a PatchPlan) -> Self {
        let (n1, n2, n3) = plan.shape();
        Accumulator {
            plan,
            mean: vec![QMatrix::zeros(n1, n2).expect("plan shape is non-empty"); n3],
            count: vec![vec![0; n1 * n2]; n3],
        }
    }

    /// Adds the patch vector `values` at plan patch `index`. The running mean
    /// `m += (v − m)/k` returns identical contributions unchanged, bit for bit.
    pub(crate) fn add(&mut self, index: usize, values: &[Quaternion]) {
        let o = self.plan.origin(index);
        let n2 = self.plan.shape().1;
        let (mean, count) = (&mut self.mean[o.slice], &mut self.count[o.slice]);
        for (k, v) in values.iter().enumerate() {
            let (r, c) = self.plan.pixel(o, k);
            let n = &mut count[r * n2 + c];
            *n += 1;
            let m = mean.get(r, c);
            mean.set(r, c, m + (*v - m) / f64::from(*n));
        }
    }

    pub(crate) fn finish(self) -> QTensor {
        debug_assert!(self.count.iter().flatten().all(|&n| n > 0));
        QTensor::new(self.mean).expect("slices share the plan shape")
    }
}

/// Rebuilds a tensor from a full list of patch vectors in plan order,
/// averaging where patches overlap.
pub fn aggregate_patches(patches: &[Vec<Quaternion>], plan: &PatchPlan) -> Result<QTensor> {
    if patches.len() != plan.total() || patches.iter().any(|p| p.len() != plan.patch_len()) {
        return Err(Error::Dimension(format!(
            "expected {} patches of length {}",
            plan.total(),
            plan.patch_len()
        )));
    }
    let mut acc = Accumulator::new(plan);
    for (i, p) in patches.iter().enumerate() {
        acc.add(i, p);
    }
    Ok(acc.finish())
}
