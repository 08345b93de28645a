//! h-plot construction: column covariance, dense symmetric eigensolver and
//! the goodness-of-fit ratio.
//!
//! The h-plot of a data matrix `X` (`r` observations by `m` variables)
//! places variable `v` at `(sqrt(l_1) q_1[v], ..., sqrt(l_d) q_d[v])`, where
//! `l_j, q_j` are the eigenpairs of the sample covariance of `X`. With all
//! dimensions retained, the distance between two rows equals the sample
//! standard deviation of the difference of the two variables.
//!
//! When `r <= m` the covariance has rank at most `r - 1`, so the nonzero part
//! of the spectrum is taken from the `r x r` Gram matrix of the centered data
//! instead. Both routes give the same coordinates.

use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut1, Axis};

use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RELATIVE_EIGEN_FLOOR: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HPlotResult {
    /// All `m` eigenvalues of the covariance, nonincreasing and nonnegative.
    pub eigenvalues: Vec<f64>,
    /// `m x dims`, row `v` is the position of variable (column) `v`.
    pub coordinates: Array2<f64>,
    pub dims: usize,
    /// Entry `d - 1` is the goodness of fit of the first `d` dimensions.
    pub gof_cumulative: Vec<f64>,
}

impl HPlotResult {
    /// Goodness of fit retained by the first `dims` dimensions.
    pub fn gof(&self, dims: usize) -> f64 {
        self.gof_cumulative[dims.clamp(1, self.gof_cumulative.len()) - 1]
    }
}

/// Which eigenproblem [`hplot_via`] solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenRoute {
    /// Covariance when `r > m`, Gram matrix otherwise.
    Auto,
    /// Always decompose the `m x m` covariance matrix.
    Covariance,
    /// Always decompose the `r x r` Gram matrix of the centered data.
    Gram,
}

/// Sample covariance `Xcᵀ Xc / (r - 1)` of the columns of `x`.
pub fn covariance(x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let r = x.nrows();
    if r < 2 {
        return Err(Error::InsufficientObservations(r));
    }
    let xc = center_columns(x);
    let mut s = xc.t().dot(&xc);
    s /= (r - 1) as f64;
    // enforce exact symmetry
    let m = s.nrows();
    for i in 0..m {
        for j in (i + 1)..m {
            let v = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    Ok(s)
}

fn center_columns(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean = x.mean_axis(Axis(0)).expect("nonempty");
    let mut xc = x.to_owned();
    xc -= &mean;
    xc
}

/// Symmetric eigendecomposition.
///
/// Returns eigenvalues in nonincreasing order and the matching orthonormal
/// eigenvectors as columns. Each eigenvector is signed so that its
/// largest-magnitude component (first on ties) is positive.
pub fn sym_eigen(s: ArrayView2<'_, f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let m = s.nrows();
    if s.ncols() != m {
        return Err(Error::Shape(format!("expected a square matrix, got {}x{}", m, s.ncols())));
    }
    let scale = s.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    for i in 0..m {
        for j in (i + 1)..m {
            let diff = (s[[i, j]] - s[[j, i]]).abs();
            if diff > SYMMETRY_TOLERANCE * scale {
                return Err(Error::AsymmetricInput { row: i, col: j, diff });
            }
        }
    }
    if m == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }

    let mut v = s.to_owned();
    let mut d = vec![0.0; m];
    let mut e = vec![0.0; m];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Array2::zeros((m, m));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    for mut col in vectors.columns_mut() {
        fix_sign(&mut col);
    }
    Ok((values, vectors))
}

fn fix_sign(col: &mut ArrayViewMut1<'_, f64>) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, &x) in col.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.mapv_inplace(|x| -x);
    }
}

/// Householder reduction to tridiagonal form (after the EISPACK `tred2`
/// routine). On return `v` holds the accumulated orthogonal transform,
/// `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
                v[[j, i]] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] -= f * e[k] + g * d[k];
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n.saturating_sub(1) {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = 0.0;
    }
    v[[n - 1, n - 1]] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal matrix (EISPACK `tql2`).
fn tridiagonal_ql(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // m == n cannot happen since e[n - 1] == 0
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Goodness of fit of the first `dims` eigenvalues: `sum_{j<=dims} l_j^2 / sum_j l_j^2`.
pub fn gof(eigenvalues: &[f64], dims: usize) -> Result<f64> {
    if dims == 0 || dims > eigenvalues.len() {
        return Err(Error::InvalidDims {
            dims,
            max: eigenvalues.len(),
        });
    }
    let total: f64 = eigenvalues.iter().map(|l| l * l).sum();
    if total == 0.0 {
        return Err(Error::ZeroSpectrum);
    }
    let kept: f64 = eigenvalues[..dims].iter().map(|l| l * l).sum();
    Ok(kept / total)
}

fn cumulative_gof(eigenvalues: &[f64]) -> Vec<f64> {
    let total: f64 = eigenvalues.iter().map(|l| l * l).sum();
    let mut acc = 0.0;
    let mut out: Vec<f64> = eigenvalues
        .iter()
        .map(|l| {
            acc += l * l;
            acc / total
        })
        .collect();
    // trailing entries past the rank are exactly one
    if let Some(rank) = eigenvalues.iter().rposition(|&l| l > 0.0) {
        for g in &mut out[rank..] {
            *g = 1.0;
        }
    }
    out
}

/// h-plot of the columns of `x` in `dims` dimensions.
pub fn hplot(x: ArrayView2<'_, f64>, dims: usize) -> Result<HPlotResult> {
    hplot_via(x, dims, EigenRoute::Auto)
}

pub fn hplot_via(x: ArrayView2<'_, f64>, dims: usize, route: EigenRoute) -> Result<HPlotResult> {
    let (r, m) = x.dim();
    if dims == 0 || dims > m {
        return Err(Error::InvalidDims { dims, max: m });
    }
    if r < 2 {
        return Err(Error::InsufficientObservations(r));
    }
    let use_gram = match route {
        EigenRoute::Auto => r <= m,
        EigenRoute::Covariance => false,
        EigenRoute::Gram => true,
    };
    let (mut eigenvalues, mut coordinates) = if use_gram {
        gram_route(x, dims)?
    } else {
        covariance_route(x, dims)?
    };

    let largest = eigenvalues.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return Err(Error::DegenerateConfiguration);
    }
    for (j, l) in eigenvalues.iter_mut().enumerate() {
        if *l < RELATIVE_EIGEN_FLOOR * largest {
            *l = 0.0;
            if j < dims {
                coordinates.column_mut(j).fill(0.0);
            }
        }
    }
    let gof_cumulative = cumulative_gof(&eigenvalues);
    Ok(HPlotResult {
        eigenvalues,
        coordinates,
        dims,
        gof_cumulative,
    })
}

fn covariance_route(x: ArrayView2<'_, f64>, dims: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let s = covariance(x)?;
    let (values, vectors) = sym_eigen(s.view())?;
    let m = s.nrows();
    let mut coords = Array2::zeros((m, dims));
    for j in 0..dims {
        let scale = values[j].max(0.0).sqrt();
        coords.column_mut(j).assign(&(&vectors.column(j) * scale));
    }
    Ok((values, coords))
}

/// Nonzero eigenpairs of `Xcᵀ Xc / (r-1)` from the `r x r` matrix
/// `Xc Xcᵀ / (r-1)`: if `G u = l u` with unit `u`, then
/// `sqrt(l) q = Xcᵀ u / sqrt(r-1)` with unit `q`.
fn gram_route(x: ArrayView2<'_, f64>, dims: usize) -> Result<(Vec<f64>, Array2<f64>)> {
    let (r, m) = x.dim();
    let xc = center_columns(x);
    let denom = (r - 1) as f64;
    let mut g = xc.dot(&xc.t());
    g /= denom;
    for i in 0..r {
        for j in (i + 1)..r {
            let v = 0.5 * (g[[i, j]] + g[[j, i]]);
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    let (gvalues, gvectors) = sym_eigen(g.view())?;
    let mut values = vec![0.0; m];
    let kept = r.min(m);
    values[..kept].copy_from_slice(&gvalues[..kept]);

    let mut coords = Array2::zeros((m, dims));
    let root = denom.sqrt();
    for j in 0..dims.min(r) {
        if gvalues[j] <= 0.0 {
            continue;
        }
        let mut col: Array1<f64> = xc.t().dot(&gvectors.column(j)) / root;
        fix_sign(&mut col.view_mut());
        coords.column_mut(j).assign(&col);
    }
    Ok((values, coords))
}
