//! Partitioning around medoids on the rows of `Y` with Euclidean distance,
//! silhouette widths, and silhouette-driven choice of `k`.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::threeway::euclidean;

const SWAP_RELATIVE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    Strong,
    Reasonable,
    Weak,
    None,
}

impl Quality {
    /// `> 0.7` strong, `> 0.5` reasonable, `> 0.25` weak; boundaries fall
    /// to the lower label.
    pub fn from_silhouette(avg: f64) -> Self {
        if avg > 0.7 {
            Quality::Strong
        } else if avg > 0.5 {
            Quality::Reasonable
        } else if avg > 0.25 {
            Quality::Weak
        } else {
            Quality::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Strong => "strong",
            Quality::Reasonable => "reasonable",
            Quality::Weak => "weak",
            Quality::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    pub k: usize,
    /// Medoid row indices in ascending order; cluster `c` is `medoids[c]`.
    pub medoids: Vec<usize>,
    pub assignment: Vec<usize>,
    /// Sum of distances from each row to its nearest medoid.
    pub objective: f64,
    pub silhouettes: Vec<f64>,
    pub average_silhouette: f64,
    pub quality: Quality,
}

/// Pairwise Euclidean distances between the rows of `y`.
pub fn distance_matrix(y: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = y.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(y.row(i), y.row(j));
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    d
}

fn objective(dist: &Array2<f64>, medoids: &[usize]) -> f64 {
    (0..dist.nrows())
        .map(|i| medoids.iter().map(|&m| dist[[i, m]]).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Nearest-medoid assignment; ties go to the lower cluster index and every
/// medoid belongs to its own cluster.
fn assign(dist: &Array2<f64>, medoids: &[usize]) -> Vec<usize> {
    (0..dist.nrows())
        .map(|i| {
            if let Some(c) = medoids.iter().position(|&m| m == i) {
                return c;
            }
            let mut best = 0;
            for c in 1..medoids.len() {
                if dist[[i, medoids[c]]] < dist[[i, medoids[best]]] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// k-medoids by greedy BUILD and best-improvement SWAP.
pub fn pam(y: ArrayView2<'_, f64>, k: usize) -> Result<ClusterResult> {
    let n = y.nrows();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let dist = distance_matrix(y);

    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    while medoids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        let candidates: Vec<usize> = (0..n).filter(|c| !medoids.contains(c)).collect();
        for c in candidates {
            medoids.push(c);
            let obj = objective(&dist, &medoids);
            medoids.pop();
            if best.is_none_or(|(_, b)| obj < b) {
                best = Some((c, obj));
            }
        }
        medoids.push(best.expect("candidate exists").0);
    }

    let mut current = objective(&dist, &medoids);
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        let candidates: Vec<usize> = (0..n).filter(|c| !medoids.contains(c)).collect();
        for pos in 0..k {
            for &c in &candidates {
                let old = std::mem::replace(&mut medoids[pos], c);
                let obj = objective(&dist, &medoids);
                medoids[pos] = old;
                if best.is_none_or(|(_, _, b)| obj < b) {
                    best = Some((pos, c, obj));
                }
            }
        }
        match best {
            Some((pos, c, obj)) if obj < current - SWAP_RELATIVE_GAIN * current => {
                medoids[pos] = c;
                current = obj;
            }
            _ => break,
        }
    }

    medoids.sort_unstable();
    let assignment = assign(&dist, &medoids);
    let (silhouettes, average_silhouette) = silhouette_from_distances(&dist, &assignment);
    Ok(ClusterResult {
        k,
        objective: objective(&dist, &medoids),
        medoids,
        assignment,
        silhouettes,
        average_silhouette,
        quality: Quality::from_silhouette(average_silhouette),
    })
}

/// Silhouette width of every row and their average.
///
/// Singleton clusters score 0, as do points with `a = b = 0`. With a single
/// cluster every value is 0.
pub fn silhouette(y: ArrayView2<'_, f64>, assignment: &[usize]) -> Result<(Vec<f64>, f64)> {
    if assignment.len() != y.nrows() {
        return Err(Error::Shape(format!(
            "{} assignments for {} rows",
            assignment.len(),
            y.nrows()
        )));
    }
    Ok(silhouette_from_distances(&distance_matrix(y), assignment))
}

fn silhouette_from_distances(dist: &Array2<f64>, assignment: &[usize]) -> (Vec<f64>, f64) {
    let n = assignment.len();
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        log::warn!("silhouette needs at least two clusters; returning zeros");
        return (vec![0.0; n], 0.0);
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let own = assignment[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[assignment[j]] += dist[[i, j]];
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    let avg = values.iter().sum::<f64>() / n as f64;
    (values, avg)
}

/// Runs PAM for `k = 2..=k_max` and keeps the largest average silhouette
/// (smallest `k` on ties).
pub fn auto_k(y: ArrayView2<'_, f64>, k_max: usize) -> Result<ClusterResult> {
    auto_k_with_scores(y, k_max).map(|(best, _)| best)
}

/// Like [`auto_k`], also returning `(k, average silhouette)` for every
/// candidate.
pub fn auto_k_with_scores(y: ArrayView2<'_, f64>, k_max: usize) -> Result<(ClusterResult, Vec<(usize, f64)>)> {
    let n = y.nrows();
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::KMaxOutOfRange {
            k_max,
            min: 2,
            max: n.saturating_sub(1),
        });
    }
    let runs: Vec<ClusterResult> = (2..=k_max)
        .into_par_iter()
        .map(|k| pam(y, k))
        .collect::<Result<_>>()?;
    let scores = runs.iter().map(|r| (r.k, r.average_silhouette)).collect();
    let mut best = None::<ClusterResult>;
    for r in runs {
        if best
            .as_ref()
            .is_none_or(|b| r.average_silhouette > b.average_silhouette)
        {
            best = Some(r);
        }
    }
    Ok((best.expect("k_max >= 2"), scores))
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn quality_thresholds() {
        assert_eq!(Quality::from_silhouette(0.8), Quality::Strong);
        assert_eq!(Quality::from_silhouette(0.7), Quality::Reasonable);
        assert_eq!(Quality::from_silhouette(0.53), Quality::Reasonable);
        assert_eq!(Quality::from_silhouette(0.5), Quality::Weak);
        assert_eq!(Quality::from_silhouette(0.25), Quality::None);
        assert_eq!(Quality::from_silhouette(-0.1), Quality::None);
    }

    #[test]
    fn k_equals_n() {
        let y = array![[0.0], [1.0], [3.0]];
        let r = pam(y.view(), 3).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.assignment, vec![0, 1, 2]);
    }

    #[test]
    fn one_dimensional_pairs() {
        let y = array![[0.0], [1.0], [100.0], [101.0]];
        let r = pam(y.view(), 2).unwrap();
        assert_eq!(r.objective, 2.0);
        assert!(r.medoids[0] < 2 && r.medoids[1] >= 2);
        assert_eq!(r.assignment, vec![0, 0, 1, 1]);
    }

    #[test]
    fn separated_pairs_have_silhouette_near_one() {
        let y = array![[0.0, 0.0], [1.0, 0.0], [1000.0, 0.0], [1001.0, 0.0]];
        let (s, avg) = silhouette(y.view(), &[0, 0, 1, 1]).unwrap();
        assert!(avg > 0.99);
        assert!(s.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn identical_points_have_zero_silhouette() {
        let y = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]];
        let (s, avg) = silhouette(y.view(), &[0, 1, 0, 1]).unwrap();
        assert!(s.iter().all(|&v| v == 0.0));
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn single_cluster_is_all_zero() {
        let y = array![[0.0], [1.0], [2.0]];
        let (s, avg) = silhouette(y.view(), &[0, 0, 0]).unwrap();
        assert_eq!(s, vec![0.0; 3]);
        assert_eq!(avg, 0.0);
    }

    #[test]
    fn auto_k_range_is_checked() {
        let y = array![[0.0], [1.0], [2.0]];
        assert!(auto_k(y.view(), 1).is_err());
        assert!(auto_k(y.view(), 3).is_err());
        assert_eq!(auto_k(y.view(), 2).unwrap().k, 2);
    }
}
