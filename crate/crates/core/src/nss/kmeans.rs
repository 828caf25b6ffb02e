use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::Quaternion;
use crate::rng::{stream, Stream};

/// Lloyd round limit used when none is given.
pub const DEFAULT_MAX_ROUNDS: usize = 100;

/// A partition of patch vectors into `N` groups.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<Quaternion>>,
    /// Group id of every patch.
    pub assignment: Vec<usize>,
    /// `m_i`, patches per group.
    pub sizes: Vec<usize>,
    /// Sum of squared distances to the assigned centroids after each round.
    pub objective: Vec<f64>,
    pub rounds: usize,
}

impl ClusterModel {
    pub fn groups(&self) -> usize {
        self.centroids.len()
    }

    /// Patch indices of every group, ascending within a group.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.groups()];
        for (i, &g) in self.assignment.iter().enumerate() {
            out[g].push(i);
        }
        out
    }

    pub fn distortion(&self) -> f64 {
        self.objective.last().copied().unwrap_or(0.0)
    }
}

fn flatten(p: &[Quaternion]) -> Vec<f64> {
    p.iter().flat_map(|q| [q.w, q.x, q.y, q.z]).collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid (lowest id on ties) and the squared distance to it.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// D²-weighted seeding: the first centroid is uniform, each further one is
/// drawn with probability proportional to the squared distance to the closest
/// centroid so far. When every remaining distance is zero the lowest unused
/// index is taken.
fn seed_centroids<R: Rng + ?Sized>(points: &[Vec<f64>], n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut chosen = vec![false; points.len()];
    let first = rng.random_range(0..points.len());
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < n {
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &di) in d.iter().enumerate() {
                acc += di;
                if di > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `acc` a hair below `target`
            pick.unwrap_or_else(|| d.iter().rposition(|&di| di > 0.0).expect("total > 0"))
        } else {
            chosen.iter().position(|&c| !c).expect("n <= patch count")
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
        for (di, p) in d.iter_mut().zip(points) {
            *di = di.min(dist2(p, &points[pick]));
        }
    }
    centroids
}

/// Gives every empty group the patch farthest from its current centroid,
/// taken from a group that can spare it (lowest patch index on ties).
fn repair_empty(
    points: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    assignment: &mut [usize],
    dists: &mut [f64],
) {
    let n = centroids.len();
    let mut sizes = vec![0usize; n];
    for &g in assignment.iter() {
        sizes[g] += 1;
    }
    for j in 0..n {
        if sizes[j] > 0 {
            continue;
        }
        let mut best: Option<usize> = None;
        for i in 0..points.len() {
            if sizes[assignment[i]] > 1 && best.is_none_or(|b| dists[i] > dists[b]) {
                best = Some(i);
            }
        }
        let i = best.expect("N <= patch count leaves a donor group");
        sizes[assignment[i]] -= 1;
        sizes[j] = 1;
        assignment[i] = j;
        dists[i] = 0.0;
        centroids[j] = points[i].clone();
    }
}

fn update_centroids(points: &[Vec<f64>], assignment: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (p, &g) in points.iter().zip(assignment) {
        counts[g] += 1;
        for (s, v) in sums[g].iter_mut().zip(p) {
            *s += v;
        }
    }
    for ((c, s), &k) in centroids.iter_mut().zip(sums).zip(&counts) {
        if k > 0 {
            *c = s.into_iter().map(|v| v / k as f64).collect();
        }
    }
}

/// K-means++ clustering of patch vectors under the Euclidean distance of their
/// stacked quaternion components. Deterministic for a given seed.
pub fn kmeanspp_cluster(
    patches: &[Vec<Quaternion>],
    n: usize,
    seed: u64,
    max_rounds: usize,
) -> Result<ClusterModel> {
    if n == 0 || n > patches.len() {
        return Err(Error::Parameter(format!(
            "group count must lie in 1..={}, got {n}",
            patches.len()
        )));
    }
    if patches.iter().any(|p| p.len() != patches[0].len()) {
        return Err(Error::Dimension("patch vectors differ in length".into()));
    }
    let points: Vec<Vec<f64>> = patches.iter().map(|p| flatten(p)).collect();
    let mut rng = stream(seed, Stream::Kmeans);
    let mut centroids = seed_centroids(&points, n, &mut rng);

    let mut assignment: Vec<usize> = Vec::new();
    let mut objective = Vec::new();
    let mut rounds = 0;
    while rounds < max_rounds.max(1) {
        rounds += 1;
        let (mut next, mut dists): (Vec<usize>, Vec<f64>) =
            points.par_iter().map(|p| nearest(p, &centroids)).unzip();
        repair_empty(&points, &mut centroids, &mut next, &mut dists);
        let stable = next == assignment;
        assignment = next;
        update_centroids(&points, &assignment, &mut centroids);
        objective.push(
            points
                .iter()
                .zip(&assignment)
                .map(|(p, &g)| dist2(p, &centroids[g]))
                .sum(),
        );
        if stable {
            break;
        }
    }

    let mut sizes = vec![0; n];
    for &g in &assignment {
        sizes[g] += 1;
    }
    let centroids = centroids
        .into_iter()
        .map(|c| c.chunks(4).map(|q| Quaternion::new(q[0], q[1], q[2], q[3])).collect())
        .collect();
    Ok(ClusterModel { centroids, assignment, sizes, objective, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::gaussian_qmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant(v: f64, len: usize) -> Vec<Quaternion> {
        vec![Quaternion::pure(v, v, v); len]
    }

    fn random_patches(seed: u64, count: usize, len: usize) -> Vec<Vec<Quaternion>> {
        let m = gaussian_qmatrix(&mut ChaCha8Rng::seed_from_u64(seed), len, count);
        (0..count).map(|c| m.column(c)).collect()
    }

    #[test]
    fn identical_patches_single_group() {
        let p = vec![constant(0.5, 9); 12];
        let m = kmeanspp_cluster(&p, 1, 1, 50).unwrap();
        assert_eq!(m.sizes, vec![12]);
        assert_eq!(m.distortion(), 0.0);
    }

    #[test]
    fn separated_populations_split_exactly() {
        let p: Vec<_> = (0..30).map(|i| constant(if i % 3 == 0 { 1.0 } else { 0.0 }, 9)).collect();
        for seed in 0..10 {
            let m = kmeanspp_cluster(&p, 2, seed, 50).unwrap();
            let g1 = m.assignment[0];
            for (i, &g) in m.assignment.iter().enumerate() {
                assert_eq!(g == g1, i % 3 == 0);
            }
            assert_eq!(m.distortion(), 0.0);
        }
    }

    #[test]
    fn one_group_per_patch() {
        for p in [random_patches(3, 15, 4), vec![constant(0.2, 4); 6]] {
            let m = kmeanspp_cluster(&p, p.len(), 7, 50).unwrap();
            assert!(m.sizes.iter().all(|&s| s == 1));
            assert_eq!(m.distortion(), 0.0);
        }
    }

    #[test]
    fn rejects_too_many_groups() {
        let p = random_patches(1, 5, 4);
        assert!(matches!(kmeanspp_cluster(&p, 6, 0, 10), Err(Error::Parameter(_))));
        assert!(kmeanspp_cluster(&p, 0, 0, 10).is_err());
    }

    #[test]
    fn objective_never_increases() {
        let p = random_patches(4, 200, 6);
        for seed in 0..5 {
            let m = kmeanspp_cluster(&p, 7, seed, 100).unwrap();
            for w in m.objective.windows(2) {
                assert!(w[1] <= w[0] + 1e-9 * w[0]);
            }
            assert_eq!(m.sizes.iter().sum::<usize>(), 200);
            assert!(m.sizes.iter().all(|&s| s > 0));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let p = random_patches(5, 80, 5);
        assert_eq!(kmeanspp_cluster(&p, 6, 9, 100).unwrap(), kmeanspp_cluster(&p, 6, 9, 100).unwrap());
    }

    #[test]
    fn permuted_input_gives_the_same_partition() {
        // three tight, well separated blobs
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p: Vec<Vec<Quaternion>> = (0..45)
            .map(|i| {
                let base = 10.0 * (i % 3) as f64;
                (0..4).map(|_| Quaternion::real(base + rng.random::<f64>() * 0.1)).collect()
            })
            .collect();
        let perm: Vec<usize> = (0..45).rev().collect();
        let q: Vec<_> = perm.iter().map(|&i| p[i].clone()).collect();
        let a = kmeanspp_cluster(&p, 3, 1, 100).unwrap();
        let b = kmeanspp_cluster(&q, 3, 2, 100).unwrap();
        for i in 0..45 {
            for j in 0..45 {
                let same_a = a.assignment[perm[i]] == a.assignment[perm[j]];
                assert_eq!(same_a, b.assignment[i] == b.assignment[j]);
            }
        }
    }
}
