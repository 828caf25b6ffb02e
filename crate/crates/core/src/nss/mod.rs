//! Nonlocal self-similarity: cluster similar patches, complete each cluster as
//! a low-rank matrix whose columns are the patches, then average the
//! recovered patches back into place.
//!
//! A video is handled as a quaternion tensor whose patches are pooled across
//! all frames before clustering; a single image is the one-frame case.

mod kmeans;
mod plan;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use kmeans::{kmeanspp_cluster, ClusterModel, DEFAULT_MAX_ROUNDS};
pub use plan::{aggregate_patches, extract_patches, PatchOrigin, PatchPlan};

use crate::error::{Error, Result};
use crate::qcore::{QMatrix, QTensor};
use crate::solver::{nrqmc_solve, ObservationMask, RecoveryReport, SolverConfig};
use plan::Accumulator;

/// Target patches per group for the default group count.
pub const PATCHES_PER_GROUP: usize = 50;

/// `max(1, ⌈total/50⌉)`.
pub fn default_group_count(total_patches: usize) -> usize {
    total_patches.div_ceil(PATCHES_PER_GROUP).max(1)
}

/// One per-group completion problem.
#[derive(Clone, Debug)]
pub struct GroupProblem {
    pub group: usize,
    /// `s² × m_i`, one observed patch per column.
    pub x: QMatrix,
    pub mask: ObservationMask,
    /// Plan index of the patch in each column.
    pub patches: Vec<usize>,
}

fn check_masks(plan: &PatchPlan, masks: &[ObservationMask]) -> Result<()> {
    let (n1, n2, n3) = plan.shape();
    if masks.len() != n3 || masks.iter().any(|m| m.shape() != (n1, n2)) {
        return Err(Error::Dimension(format!(
            "need {n3} masks of shape {n1}x{n2}, got {}",
            masks.len()
        )));
    }
    Ok(())
}

/// Gathers each group's observed patches and the matching entries of `Ω`.
pub fn build_group_problems(
    data: &QTensor,
    masks: &[ObservationMask],
    model: &ClusterModel,
    plan: &PatchPlan,
) -> Result<Vec<GroupProblem>> {
    plan.check_tensor(data)?;
    check_masks(plan, masks)?;
    if model.assignment.len() != plan.total() {
        return Err(Error::Dimension(format!(
            "cluster model covers {} patches, plan has {}",
            model.assignment.len(),
            plan.total()
        )));
    }
    let len = plan.patch_len();
    model
        .members()
        .into_iter()
        .enumerate()
        .map(|(group, patches)| {
            let mut x = QMatrix::zeros(len, patches.len())?;
            let mut mask = ObservationMask::empty(len, patches.len());
            for (col, &idx) in patches.iter().enumerate() {
                let o = plan.origin(idx);
                for k in 0..len {
                    let (r, c) = plan.pixel(o, k);
                    x.set(k, col, data.slice(o.slice).get(r, c));
                    mask.set(k, col, masks[o.slice].contains(r, c));
                }
            }
            Ok(GroupProblem { group, x, mask, patches })
        })
        .collect()
}

/// Solves every group, in parallel on the current rayon pool, and averages
/// the recovered patches into a tensor of the plan's shape.
///
/// Without an explicit `lambda` each group gets `1/√(SR_i·max(s², m_i))` from
/// its own sampling ratio. Contributions are added in group order whatever the
/// thread count, so the output does not depend on scheduling.
pub fn solve_and_aggregate(
    groups: &[GroupProblem],
    config: &SolverConfig,
    plan: &PatchPlan,
) -> Result<QTensor> {
    let covered: usize = groups.iter().map(|g| g.patches.len()).sum();
    if covered != plan.total() {
        return Err(Error::Input(format!(
            "groups cover {covered} of {} patches",
            plan.total()
        )));
    }
    let results: Vec<Result<RecoveryReport>> = groups
        .par_iter()
        .map(|g| nrqmc_solve(&g.x, &g.mask, config))
        .collect();

    let mut failed = Vec::new();
    let mut first = None;
    let mut acc = Accumulator::new(plan);
    for (g, r) in groups.iter().zip(results) {
        match r {
            Ok(report) => {
                for (col, &idx) in g.patches.iter().enumerate() {
                    acc.add(idx, &report.l.column(col));
                }
            }
            Err(e) => {
                failed.push(g.group);
                first.get_or_insert(e);
            }
        }
    }
    match first {
        None => Ok(acc.finish()),
        Some(e) => Err(Error::Groups { groups: failed, first: Box::new(e) }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NssParams {
    pub patch_size: usize,
    pub overlap: usize,
    /// Group count `N`; `None` picks [`default_group_count`].
    pub clusters: Option<usize>,
    pub max_rounds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl Default for NssParams {
    fn default() -> Self {
        NssParams {
            patch_size: PatchPlan::DEFAULT_SIDE,
            overlap: PatchPlan::DEFAULT_OVERLAP,
            clusters: None,
            max_rounds: DEFAULT_MAX_ROUNDS,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }
}

/// Result of the patch pipeline together with the partition it used.
#[derive(Clone, Debug)]
pub struct NssOutcome {
    pub estimate: QTensor,
    pub plan: PatchPlan,
    pub model: ClusterModel,
}

/// Clusters patches of `initial`, then completes each group from the raw
/// `observed` data and its masks.
pub fn run_nss(
    observed: &QTensor,
    masks: &[ObservationMask],
    initial: &QTensor,
    params: &NssParams,
) -> Result<NssOutcome> {
    if observed.shape() != initial.shape() {
        return Err(Error::Input(format!(
            "initial estimate shape {:?} differs from observed {:?}",
            initial.shape(),
            observed.shape()
        )));
    }
    params.solver.validate()?;
    let (n1, n2, n3) = observed.shape();
    let plan = PatchPlan::new(params.patch_size, params.overlap, n1, n2, n3)?;
    check_masks(&plan, masks)?;
    let patches = extract_patches(initial, &plan)?;
    let n = params.clusters.unwrap_or_else(|| default_group_count(plan.total()));
    let model = kmeanspp_cluster(&patches, n, params.seed, params.max_rounds)?;
    let groups = build_group_problems(observed, masks, &model, &plan)?;
    let estimate = solve_and_aggregate(&groups, &params.solver, &plan)?;
    Ok(NssOutcome { estimate, plan, model })
}

/// The patch pipeline on a tensor; one slice per mask.
pub fn nrqmc_nss(
    observed: &QTensor,
    masks: &[ObservationMask],
    initial: &QTensor,
    params: &NssParams,
) -> Result<QTensor> {
    run_nss(observed, masks, initial, params).map(|o| o.estimate)
}

/// The single-image case of [`nrqmc_nss`].
pub fn nrqmc_nss2d(
    observed: &QMatrix,
    mask: &ObservationMask,
    initial: &QMatrix,
    params: &NssParams,
) -> Result<QMatrix> {
    let out = nrqmc_nss(
        &QTensor::from_matrix(observed.clone()),
        std::slice::from_ref(mask),
        &QTensor::from_matrix(initial.clone()),
        params,
    )?;
    Ok(out.into_slices().remove(0))
}

/// Writes `patch_index,slice,row,col,group`, one row per patch.
pub fn write_cluster_csv<W: Write>(model: &ClusterModel, plan: &PatchPlan, mut out: W) -> Result<()> {
    writeln!(out, "patch_index,slice,row,col,group")?;
    for (i, &g) in model.assignment.iter().enumerate() {
        let o = plan.origin(i);
        writeln!(out, "{i},{},{},{},{g}", o.slice, o.row, o.col)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{gaussian_qmatrix, Quaternion};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramp(n1: usize, n2: usize) -> QMatrix {
        QMatrix::from_fn(n1, n2, |r, c| Quaternion::pure(r as f64, c as f64, (r + c) as f64)).unwrap()
    }

    fn single_group(plan: &PatchPlan) -> ClusterModel {
        ClusterModel {
            centroids: vec![vec![Quaternion::ZERO; plan.patch_len()]],
            assignment: vec![0; plan.total()],
            sizes: vec![plan.total()],
            objective: vec![],
            rounds: 0,
        }
    }

    #[test]
    fn default_group_counts() {
        assert_eq!(default_group_count(1), 1);
        assert_eq!(default_group_count(50), 1);
        assert_eq!(default_group_count(51), 2);
        assert_eq!(default_group_count(1584), 32);
    }

    #[test]
    fn full_and_empty_masks_carry_over() {
        let t = QTensor::from_matrix(ramp(9, 9));
        let plan = PatchPlan::with_defaults(9, 9, 1).unwrap();
        let model = single_group(&plan);
        let full = build_group_problems(&t, &[ObservationMask::full(9, 9)], &model, &plan).unwrap();
        assert_eq!(full[0].mask.count(), 25 * plan.total());
        let empty = build_group_problems(&t, &[ObservationMask::empty(9, 9)], &model, &plan).unwrap();
        assert_eq!(empty[0].mask.count(), 0);
        assert_eq!(full[0].x.column(3), extract_patches(&t, &plan).unwrap()[3]);
    }

    #[test]
    fn checkerboard_counts_match_brute_force() {
        let plan = PatchPlan::new(5, 1, 6, 6, 1).unwrap();
        let omega = ObservationMask::from_fn(6, 6, |r, c| (r + c) % 2 == 0);
        let t = QTensor::from_matrix(ramp(6, 6));
        let groups = build_group_problems(&t, std::slice::from_ref(&omega), &single_group(&plan), &plan).unwrap();
        for (col, o) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            let mut expected = 0;
            for r in o.0..o.0 + 5 {
                for c in o.1..o.1 + 5 {
                    expected += omega.contains(r, c) as usize;
                }
            }
            let got = (0..25).filter(|&k| groups[0].mask.contains(k, col)).count();
            assert_eq!(got, expected);
        }
        // 13 observed at even origin parity, 12 at odd
        assert_eq!((0..25).filter(|&k| groups[0].mask.contains(k, 0)).count(), 13);
        assert_eq!((0..25).filter(|&k| groups[0].mask.contains(k, 1)).count(), 12);
    }

    #[test]
    fn constant_image_is_a_fixed_point() {
        let x = QMatrix::from_fn(12, 12, |_, _| Quaternion::pure(0.25, 0.5, 0.75)).unwrap();
        let mask = ObservationMask::full(12, 12);
        let params = NssParams { clusters: Some(3), ..NssParams::default() };
        let out = nrqmc_nss2d(&x, &mask, &x, &params).unwrap();
        assert!((&out - &x).frobenius_norm() <= 1e-3 * x.frobenius_norm());
    }

    #[test]
    fn single_patch_equals_a_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gaussian_qmatrix(&mut rng, 5, 5);
        let mask = ObservationMask::from_fn(5, 5, |r, c| (r * 5 + c) % 4 != 0);
        let params = NssParams { clusters: Some(1), ..NssParams::default() };
        let out = nrqmc_nss2d(&x, &mask, &x, &params).unwrap();
        let plan = PatchPlan::with_defaults(5, 5, 1).unwrap();
        let v = extract_patches(&QTensor::from_matrix(x), &plan).unwrap().remove(0);
        let col = QMatrix::from_columns(25, &[v]).unwrap();
        let vmask = ObservationMask::from_fn(25, 1, |k, _| mask.contains(k % 5, k / 5));
        let direct = nrqmc_solve(&col, &vmask, &params.solver).unwrap().l;
        let expected = QMatrix::from_fn(5, 5, |r, c| direct.get(c * 5 + r, 0)).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn group_failures_are_reported_by_id() {
        let plan = PatchPlan::new(5, 1, 6, 6, 1).unwrap();
        let t = QTensor::from_matrix(ramp(6, 6));
        let model = ClusterModel {
            centroids: vec![vec![Quaternion::ZERO; 25]; 2],
            assignment: vec![0, 1, 1, 0],
            sizes: vec![2, 2],
            objective: vec![],
            rounds: 0,
        };
        let mut groups = build_group_problems(&t, &[ObservationMask::full(6, 6)], &model, &plan).unwrap();
        groups[1].x.set(0, 0, Quaternion::real(f64::NAN));
        match solve_and_aggregate(&groups, &SolverConfig::default(), &plan) {
            Err(Error::Groups { groups, .. }) => assert_eq!(groups, vec![1]),
            other => panic!("expected a group failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_mismatched_initial_estimate() {
        let a = QTensor::from_matrix(ramp(8, 8));
        let b = QTensor::from_matrix(ramp(8, 9));
        let err = nrqmc_nss(&a, &[ObservationMask::full(8, 8)], &b, &NssParams::default()).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn cluster_csv_rows() {
        let plan = PatchPlan::new(5, 1, 6, 6, 2).unwrap();
        let model = ClusterModel {
            centroids: vec![vec![Quaternion::ZERO; 25]],
            assignment: vec![0; 8],
            sizes: vec![8],
            objective: vec![],
            rounds: 0,
        };
        let mut buf = Vec::new();
        write_cluster_csv(&model, &plan, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "patch_index,slice,row,col,group");
        assert_eq!(lines[6], "5,1,0,1,0");
    }
}
