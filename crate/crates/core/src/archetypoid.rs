//! Archetypoid analysis: pick `k` rows of `Y` (the archetypoids) so that
//! every row is well approximated by a convex combination of them.
//!
//! For a fixed selection the mixture weights of each row solve a
//! simplex-constrained least-squares problem. It is handled as a
//! nonnegative least-squares problem with an appended row
//! `C * sum(alpha) = C`, `C = 200 * (1 + max|Y|)`, solved by the
//! Lawson-Hanson active-set method. The right-hand side of the appended
//! row is shifted by a multiplier update until the weights sum to one,
//! then the row is renormalized onto the simplex.
//!
//! The selection itself is found by a greedy BUILD phase followed by a
//! best-improvement SWAP phase. Nothing here is randomized.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

const PENALTY_FACTOR: f64 = 200.0;
/// Relative KKT tolerance for the NNLS dual (`w_j > tol * |a_j| * |r|`).
const NNLS_TOLERANCE: f64 = 1e-8;
const SUM_TOLERANCE: f64 = 1e-13;
const MAX_MULTIPLIER_ROUNDS: usize = 60;
/// A swap must lower RSS by more than this fraction to be accepted.
const SWAP_RELATIVE_GAIN: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaResult {
    pub k: usize,
    /// Row indices of `Y` chosen as archetypoids, in BUILD order with swaps
    /// applied in place. Column `j` of `alphas` refers to `indices[j]`.
    pub indices: Vec<usize>,
    /// `n x k` mixture weights, each row on the probability simplex.
    pub alphas: Array2<f64>,
    pub rss: f64,
    /// RSS after BUILD, then after each accepted swap.
    pub trace: Vec<f64>,
}

/// Solver for the mixture weights given a fixed set of archetypoids.
#[derive(Debug, Clone)]
pub struct SimplexSolver {
    penalty: f64,
}

impl SimplexSolver {
    /// Solver with the penalty weight derived from the data scale.
    pub fn for_data(y: ArrayView2<'_, f64>) -> Self {
        let max_abs = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Self {
            penalty: PENALTY_FACTOR * (1.0 + max_abs),
        }
    }

    /// Weights on the simplex minimizing `|x - sum_j alpha_j z_j|^2`, where
    /// the archetypoids `z_j` are the rows of `z`. Returns the weights and
    /// the squared residual.
    pub fn solve(&self, z: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>) -> (Array1<f64>, f64) {
        let (k, w) = z.dim();
        if k == 1 {
            let r = residual_sq(z, x, &Array1::ones(1));
            return (Array1::ones(1), r);
        }
        if let Some(j) = z.rows().into_iter().position(|zj| zj == x) {
            let mut unit = Array1::zeros(k);
            unit[j] = 1.0;
            return (unit, 0.0);
        }
        let c = self.penalty;
        let mut a = Array2::zeros((w + 1, k));
        a.slice_mut(ndarray::s![..w, ..]).assign(&z.t());
        a.row_mut(w).fill(c);
        let mut b = Array1::zeros(w + 1);
        b.slice_mut(ndarray::s![..w]).assign(&x);

        let mut shift = 0.0;
        let mut alpha = Array1::zeros(k);
        for _ in 0..MAX_MULTIPLIER_ROUNDS {
            b[w] = c * (1.0 + shift);
            alpha = nnls(a.view(), b.view());
            let violation = alpha.sum() - 1.0;
            if violation.abs() <= SUM_TOLERANCE {
                break;
            }
            shift -= violation;
        }
        let total = alpha.sum();
        if total > 0.0 {
            alpha /= total;
        } else {
            alpha.fill(1.0 / k as f64);
        }
        let r = residual_sq(z, x, &alpha);
        (alpha, r)
    }
}

fn residual_sq(z: ArrayView2<'_, f64>, x: ArrayView1<'_, f64>, alpha: &Array1<f64>) -> f64 {
    let fit = z.t().dot(alpha);
    x.iter().zip(fit.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Lawson-Hanson active-set nonnegative least squares: `min |Ax - b|`, `x >= 0`.
fn nnls(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Array1<f64> {
    let k = a.ncols();
    let col_norms: Vec<f64> = a.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    let mut x = Array1::<f64>::zeros(k);
    let mut passive = vec![false; k];
    let mut blocked = vec![false; k];

    for _ in 0..(3 * k + 10) {
        let r = &b - &a.dot(&x);
        let r_norm = r.dot(&r).sqrt();
        let w = a.t().dot(&r);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && !blocked[j])
            .filter(|&j| w[j] > NNLS_TOLERANCE * col_norms[j] * r_norm)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(enter) = candidate else { break };
        passive[enter] = true;

        for inner in 0..(3 * k + 10) {
            let s = passive_lstsq(a, b, &passive);
            if (0..k).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            if inner == 0 && s[enter] <= 0.0 {
                // numerically the entering column does not help
                passive[enter] = false;
                blocked[enter] = true;
                break;
            }
            let mut step = f64::INFINITY;
            for j in (0..k).filter(|&j| passive[j] && s[j] <= 0.0) {
                let denom = x[j] - s[j];
                if denom > 0.0 {
                    step = step.min(x[j] / denom);
                }
            }
            if !step.is_finite() {
                step = 0.0;
            }
            x = &x + &((&s - &x) * step);
            for j in 0..k {
                if passive[j] && x[j] <= f64::EPSILON * x.sum().max(1.0) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
        blocked.iter_mut().for_each(|f| *f = false);
    }
    x
}

/// Least squares restricted to the passive columns (Householder QR).
fn passive_lstsq(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>, passive: &[bool]) -> Array1<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let m = a.nrows();
    let p = cols.len();
    let mut r = Array2::zeros((m, p));
    for (dst, &src) in cols.iter().enumerate() {
        r.column_mut(dst).assign(&a.column(src));
    }
    let mut qtb = b.to_owned();
    for j in 0..p.min(m) {
        let norm = (j..m).map(|i| r[[i, j]] * r[[i, j]]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[[j, j]] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..m).map(|i| r[[i, j]]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in j..p {
            let dot: f64 = (j..m).map(|i| v[i - j] * r[[i, c]]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in j..m {
                r[[i, c]] -= f * v[i - j];
            }
        }
        let dot: f64 = (j..m).map(|i| v[i - j] * qtb[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in j..m {
            qtb[i] -= f * v[i - j];
        }
    }
    let diag_max = (0..p.min(m)).fold(0.0_f64, |acc, j| acc.max(r[[j, j]].abs()));
    let mut sol = vec![0.0; p];
    for j in (0..p.min(m)).rev() {
        if r[[j, j]].abs() <= 1e-13 * diag_max {
            continue;
        }
        let mut acc = qtb[j];
        for c in (j + 1)..p {
            acc -= r[[j, c]] * sol[c];
        }
        sol[j] = acc / r[[j, j]];
    }
    let mut full = Array1::zeros(passive.len());
    for (dst, &src) in cols.iter().enumerate() {
        full[src] = sol[dst];
    }
    full
}

fn validate_indices(n: usize, indices: &[usize]) -> Result<()> {
    if indices.is_empty() || indices.len() > n {
        return Err(Error::KOutOfRange { k: indices.len(), n });
    }
    let mut seen = vec![false; n];
    for &i in indices {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::DuplicateIndex(i));
        }
    }
    Ok(())
}

fn gather(y: ArrayView2<'_, f64>, indices: &[usize]) -> Array2<f64> {
    y.select(ndarray::Axis(0), indices)
}

/// Mixture weights and residual sum of squares for a fixed selection.
pub fn solve_alphas(y: ArrayView2<'_, f64>, indices: &[usize]) -> Result<(Array2<f64>, f64)> {
    validate_indices(y.nrows(), indices)?;
    Ok(solve_with(&SimplexSolver::for_data(y), y, indices))
}

fn solve_with(solver: &SimplexSolver, y: ArrayView2<'_, f64>, indices: &[usize]) -> (Array2<f64>, f64) {
    let z = gather(y, indices);
    let mut alphas = Array2::zeros((y.nrows(), indices.len()));
    let mut rss = 0.0;
    for (i, x) in y.rows().into_iter().enumerate() {
        let (a, r) = solver.solve(z.view(), x);
        alphas.row_mut(i).assign(&a);
        rss += r;
    }
    (alphas, rss)
}

fn rss_only(solver: &SimplexSolver, y: ArrayView2<'_, f64>, indices: &[usize]) -> f64 {
    let z = gather(y, indices);
    y.rows().into_iter().map(|x| solver.solve(z.view(), x).1).sum()
}

/// Archetypoid analysis with `k` archetypoids.
pub fn ada(y: ArrayView2<'_, f64>, k: usize) -> Result<AdaResult> {
    let n = y.nrows();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let solver = SimplexSolver::for_data(y);

    // BUILD: add the row whose inclusion lowers RSS the most
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut current = f64::INFINITY;
    while selected.len() < k {
        let trials: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|c| !selected.contains(c))
            .map(|c| {
                let mut trial = selected.clone();
                trial.push(c);
                (c, rss_only(&solver, y, &trial))
            })
            .collect();
        let (best, rss) = first_minimum(trials).expect("k <= n leaves a candidate");
        selected.push(best);
        current = rss;
    }

    let mut trace = vec![current];
    swap_phase(&solver, y, &mut selected, &mut current, &mut trace);

    let (alphas, rss) = solve_with(&solver, y, &selected);
    Ok(AdaResult {
        k,
        indices: selected,
        alphas,
        rss,
        trace,
    })
}

/// Repeats the best strictly improving (archetypoid, non-archetypoid)
/// exchange until none remains.
fn swap_phase(
    solver: &SimplexSolver,
    y: ArrayView2<'_, f64>,
    selected: &mut [usize],
    current: &mut f64,
    trace: &mut Vec<f64>,
) {
    let n = y.nrows();
    loop {
        let moves: Vec<(usize, usize)> = (0..selected.len())
            .flat_map(|pos| (0..n).filter(|c| !selected.contains(c)).map(move |c| (pos, c)))
            .collect();
        let trials: Vec<((usize, usize), f64)> = moves
            .into_par_iter()
            .map(|(pos, c)| {
                let mut trial = selected.to_vec();
                trial[pos] = c;
                ((pos, c), rss_only(solver, y, &trial))
            })
            .collect();
        let Some(((pos, c), rss)) = first_minimum(trials) else { break };
        if rss < *current - SWAP_RELATIVE_GAIN * *current {
            selected[pos] = c;
            *current = rss;
            trace.push(rss);
        } else {
            break;
        }
    }
}

/// Reruns the SWAP phase from a given selection.
pub fn refine(y: ArrayView2<'_, f64>, indices: &[usize]) -> Result<AdaResult> {
    validate_indices(y.nrows(), indices)?;
    let solver = SimplexSolver::for_data(y);
    let mut selected = indices.to_vec();
    let mut current = rss_only(&solver, y, &selected);
    let mut trace = vec![current];
    swap_phase(&solver, y, &mut selected, &mut current, &mut trace);
    let (alphas, rss) = solve_with(&solver, y, &selected);
    Ok(AdaResult {
        k: selected.len(),
        indices: selected,
        alphas,
        rss,
        trace,
    })
}

fn first_minimum<T>(items: Vec<(T, f64)>) -> Option<(T, f64)> {
    let mut best: Option<(T, f64)> = None;
    for (item, v) in items {
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((item, v));
        }
    }
    best
}

/// `(k, rss)` for `k = 1..=k_max`.
pub fn rss_curve(y: ArrayView2<'_, f64>, k_max: usize) -> Result<Vec<(usize, f64)>> {
    let n = y.nrows();
    if k_max == 0 || k_max > n {
        return Err(Error::KMaxOutOfRange { k_max, min: 1, max: n });
    }
    (1..=k_max)
        .into_par_iter()
        .map(|k| ada(y, k).map(|r| (k, r.rss)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Elbow {
    pub k: usize,
    /// Set when every point lies on the chord (or the curve is flat).
    pub no_elbow: bool,
}

/// The curve point farthest from the chord joining its first and last
/// points. Ties go to the smallest `k`.
pub fn elbow(curve: &[(usize, f64)]) -> Result<Elbow> {
    if curve.len() < 3 {
        return Err(Error::CurveTooShort(curve.len()));
    }
    let (x1, y1) = (curve[0].0 as f64, curve[0].1);
    let (x2, y2) = {
        let last = curve[curve.len() - 1];
        (last.0 as f64, last.1)
    };
    let chord = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
    let scale = curve.iter().fold(0.0_f64, |m, &(_, r)| m.max(r.abs()));
    let mut best = (curve[0].0, 0.0);
    for &(k, r) in curve {
        let dist = ((x2 - x1) * (y1 - r) - (x1 - k as f64) * (y2 - y1)).abs() / chord;
        if dist > best.1 {
            best = (k, dist);
        }
    }
    if scale == 0.0 || best.1 <= 1e-9 * scale {
        return Ok(Elbow {
            k: curve[0].0,
            no_elbow: true,
        });
    }
    Ok(Elbow {
        k: best.0,
        no_elbow: false,
    })
}
