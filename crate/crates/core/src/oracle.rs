//! Slow reference implementations used to check the main algorithms.
//!
//! Nothing here calls into the other modules; the only shared piece is the
//! `ndarray` storage. Exhaustive searches refuse instances with more than
//! [`MAX_SUBSETS`] candidate subsets.

use itertools::Itertools;
use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_SUBSETS: u128 = 100_000;
const PG_ITERATIONS: usize = 10_000;
const PG_TOLERANCE: f64 = 1e-10;

/// One oracle-versus-candidate comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub n: usize,
    pub w: usize,
    pub k: usize,
    pub oracle: f64,
    pub candidate: f64,
    pub tolerance: f64,
    /// Smallest magnitude the relative tolerance is applied to.
    pub floor: f64,
    pub matches: bool,
}

impl OracleReport {
    /// Match when `|oracle - candidate| <= max(tolerance * |oracle|, floor)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        seed: u64,
        n: usize,
        w: usize,
        k: usize,
        oracle: f64,
        candidate: f64,
        tolerance: f64,
        floor: f64,
    ) -> Self {
        let matches = (oracle - candidate).abs() <= (tolerance * oracle.abs()).max(floor);
        Self {
            seed,
            n,
            w,
            k,
            oracle,
            candidate,
            tolerance,
            floor,
            matches,
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn check_size(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let count = binomial(n, k);
    if count > MAX_SUBSETS {
        return Err(Error::TooLarge {
            n,
            k,
            count,
            limit: MAX_SUBSETS,
        });
    }
    Ok(())
}

/// Covariance by explicit double loops over a two-pass mean.
pub fn naive_covariance(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let (r, m) = x.dim();
    let mut means = vec![0.0; m];
    for j in 0..m {
        for i in 0..r {
            means[j] += x[[i, j]];
        }
        means[j] /= r as f64;
    }
    let mut s = Array2::zeros((m, m));
    for a in 0..m {
        for b in 0..m {
            let mut acc = 0.0;
            for i in 0..r {
                acc += (x[[i, a]] - means[a]) * (x[[i, b]] - means[b]);
            }
            s[[a, b]] = acc / (r as f64 - 1.0);
        }
    }
    s
}

/// Sample standard deviation (divisor `r - 1`) of column `i` minus column `j`.
pub fn sd_of_difference(x: ArrayView2<'_, f64>, i: usize, j: usize) -> f64 {
    let diffs: Vec<f64> = x.rows().into_iter().map(|row| row[i] - row[j]).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
    (ss / (diffs.len() as f64 - 1.0)).sqrt()
}

/// Textbook two-pass Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

fn dist(y: ArrayView2<'_, f64>, i: usize, j: usize) -> f64 {
    let mut acc = 0.0;
    for c in 0..y.ncols() {
        let d = y[[i, c]] - y[[j, c]];
        acc += d * d;
    }
    acc.sqrt()
}

/// Silhouette widths by direct double loops.
pub fn naive_silhouette(y: ArrayView2<'_, f64>, assignment: &[usize]) -> Vec<f64> {
    let n = y.nrows();
    let clusters: Vec<usize> = assignment.iter().copied().unique().sorted().collect();
    if clusters.len() < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let mean_to = |c: usize, skip_self: bool| -> Option<f64> {
                let members: Vec<usize> = (0..n)
                    .filter(|&j| assignment[j] == c && !(skip_self && j == i))
                    .collect();
                if members.is_empty() {
                    None
                } else {
                    Some(members.iter().map(|&j| dist(y, i, j)).sum::<f64>() / members.len() as f64)
                }
            };
            let Some(a) = mean_to(assignment[i], true) else {
                return 0.0;
            };
            let b = clusters
                .iter()
                .filter(|&&c| c != assignment[i])
                .filter_map(|&c| mean_to(c, false))
                .fold(f64::INFINITY, f64::min);
            if a.max(b) == 0.0 {
                0.0
            } else {
                (b - a) / a.max(b)
            }
        })
        .collect()
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn rss_of(z: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>, alpha: &[f64]) -> f64 {
    let mut acc = 0.0;
    for c in 0..z.ncols() {
        let mut fit = 0.0;
        for (j, a) in alpha.iter().enumerate() {
            fit += a * z[[j, c]];
        }
        acc += (x[c] - fit) * (x[c] - fit);
    }
    acc
}

/// Projected gradient on the simplex with step `1 / L`, `L` the Lipschitz
/// constant of the gradient (power iteration on `Z Zᵀ`), accelerated with
/// momentum that restarts whenever the objective goes up.
pub fn pg_simplex(z: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>) -> (Vec<f64>, f64) {
    let k = z.nrows();
    let w = z.ncols();
    let mut gram = vec![0.0; k * k];
    let mut zx = vec![0.0; k];
    for a in 0..k {
        for c in 0..w {
            zx[a] += z[[a, c]] * x[c];
        }
        for b in 0..k {
            for c in 0..w {
                gram[a * k + b] += z[[a, c]] * z[[b, c]];
            }
        }
    }
    let xx: f64 = x.iter().map(|v| v * v).sum();
    // |x - Zᵀa|^2 = xx - 2 a·zx + aᵀ G a
    let objective = |a: &[f64]| -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..k {
            lin += a[i] * zx[i];
            for j in 0..k {
                quad += a[i] * gram[i * k + j] * a[j];
            }
        }
        (xx - 2.0 * lin + quad).max(0.0)
    };

    let mut v = vec![1.0; k];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let next: Vec<f64> = (0..k).map(|i| (0..k).map(|j| gram[i * k + j] * v[j]).sum()).collect();
        let norm = next.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lambda = norm / v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v = next.iter().map(|t| t / norm).collect();
    }
    let lipschitz = 2.0 * lambda * 1.01;
    let mut alpha = vec![1.0 / k as f64; k];
    if lipschitz == 0.0 {
        let r = objective(&alpha);
        return (alpha, r);
    }

    let mut prev = alpha.clone();
    let mut momentum = 1.0_f64;
    let mut f_prev = objective(&alpha);
    let mut point = vec![0.0; k];
    let mut step = vec![0.0; k];
    for _ in 0..PG_ITERATIONS {
        let next_m = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next_m;
        for j in 0..k {
            point[j] = alpha[j] + beta * (alpha[j] - prev[j]);
        }
        for i in 0..k {
            let mut g = -zx[i];
            for j in 0..k {
                g += gram[i * k + j] * point[j];
            }
            step[i] = point[i] - 2.0 * g / lipschitz;
        }
        let candidate = project_simplex(&step);
        let f = objective(&candidate);
        if f > f_prev {
            momentum = 1.0;
            prev.copy_from_slice(&alpha);
            continue;
        }
        let change = candidate.iter().zip(&alpha).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let plain = beta == 0.0;
        prev = std::mem::replace(&mut alpha, candidate);
        momentum = next_m;
        f_prev = f;
        if change < PG_TOLERANCE {
            if plain {
                break;
            }
            // an extrapolated step can stall at a vertex; confirm without momentum
            momentum = 1.0;
            prev.copy_from_slice(&alpha);
        }
    }
    let rss = rss_of(z, x, &alpha);
    (alpha, rss)
}

/// Brute-force simplex search for three archetypoids on a grid of
/// `steps` divisions per weight.
pub fn grid_simplex(z: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>, steps: usize) -> (Vec<f64>, f64) {
    assert_eq!(z.nrows(), 3, "grid search is written for three weights");
    let mut best = (vec![1.0, 0.0, 0.0], f64::INFINITY);
    for a in 0..=steps {
        for b in 0..=(steps - a) {
            let c = steps - a - b;
            let alpha = [a as f64 / steps as f64, b as f64 / steps as f64, c as f64 / steps as f64];
            let r = rss_of(z, x, &alpha);
            if r < best.1 {
                best = (alpha.to_vec(), r);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveResult {
    pub indices: Vec<usize>,
    pub value: f64,
}

fn subset_rss(y: ArrayView2<'_, f64>, subset: &[usize]) -> f64 {
    let z = y.select(ndarray::Axis(0), subset);
    y.rows().into_iter().map(|x| pg_simplex(z.view(), x).1).sum()
}

/// Archetypoid selection minimizing RSS over every `k`-subset of rows.
pub fn exhaustive_ada(y: ArrayView2<'_, f64>, k: usize) -> Result<ExhaustiveResult> {
    let n = y.nrows();
    check_size(n, k)?;
    let mut best = ExhaustiveResult {
        indices: Vec::new(),
        value: f64::INFINITY,
    };
    for subset in (0..n).combinations(k) {
        let value = subset_rss(y, &subset);
        if value < best.value {
            best = ExhaustiveResult { indices: subset, value };
        }
    }
    Ok(best)
}

/// Medoid set minimizing the summed nearest-medoid distance over every
/// `k`-subset of rows.
pub fn exhaustive_pam(y: ArrayView2<'_, f64>, k: usize) -> Result<ExhaustiveResult> {
    let n = y.nrows();
    check_size(n, k)?;
    let mut best = ExhaustiveResult {
        indices: Vec::new(),
        value: f64::INFINITY,
    };
    for subset in (0..n).combinations(k) {
        let value: f64 = (0..n)
            .map(|i| subset.iter().map(|&m| dist(y, i, m)).fold(f64::INFINITY, f64::min))
            .sum();
        if value < best.value {
            best = ExhaustiveResult { indices: subset, value };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn exhaustive_k_equals_n() {
        let y = array![[0.0, 1.0], [2.0, 0.5], [1.0, 3.0]];
        assert_eq!(exhaustive_pam(y.view(), 3).unwrap().value, 0.0);
        assert!(exhaustive_ada(y.view(), 3).unwrap().value < 1e-20);
    }

    #[test]
    fn exhaustive_pam_on_line() {
        let y = array![[0.0], [1.0], [100.0], [101.0]];
        let r = exhaustive_pam(y.view(), 2).unwrap();
        assert_eq!(r.value, 2.0);
        assert!(r.indices[0] < 2 && r.indices[1] >= 2);
    }

    #[test]
    fn exhaustive_ada_triangle() {
        let y = array![[0.0, 0.0], [0.3, 0.3], [1.0, 0.0], [0.0, 1.0], [0.2, 0.1]];
        let r = exhaustive_ada(y.view(), 3).unwrap();
        assert_eq!(r.indices, vec![0, 2, 3]);
        assert!(r.value < 1e-16);
    }

    #[test]
    fn refuses_large_instances() {
        let y = Array2::<f64>::zeros((40, 2));
        assert!(matches!(exhaustive_pam(y.view(), 10), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(project_simplex(&[3.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn report_flag_follows_tolerance() {
        assert!(OracleReport::new(0, 3, 2, 1, 1.0, 1.0 + 1e-7, 1e-6, 0.0).matches);
        assert!(!OracleReport::new(0, 3, 2, 1, 1.0, 1.1, 1e-6, 0.0).matches);
        assert!(OracleReport::new(0, 3, 2, 1, 0.0, 1e-20, 1e-6, 1e-12).matches);
    }

    #[test]
    fn accelerated_steps_do_not_stop_at_a_vertex() {
        let z = array![
            [0.8892312380459555, 0.6394808457323724],
            [-0.9363527249066497, -0.3389559451701012],
            [0.7170624860199828, -0.8510845386260932]
        ];
        let x = array![0.8372651197556134, -0.8434461581537191];
        let (alpha, rss) = pg_simplex(z.view(), x.view());
        let (_, grid) = grid_simplex(z.view(), x.view(), 2000);
        assert!(alpha[0] > 0.01);
        assert!(rss <= grid);
    }
}
