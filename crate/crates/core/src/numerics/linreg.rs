//! Ordinary least squares and the nested-model F-test.
//!
//! Fits run through Householder QR with column pivoting, which yields the
//! residual sum of squares, the numerical rank, and the identity of any
//! collinear column in one pass.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::numerics::special::f_survival;
use crate::{Error, Result};

/// Relative threshold below which a pivot column counts as linearly
/// dependent on the columns already processed.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub rss: f64,
    pub rank: usize,
    /// Original indices of columns rejected as collinear.
    pub dropped_columns: Vec<usize>,
}

/// Residual sum of squares of the least-squares fit of `y` on the columns of
/// `x`, computed on the column space (rank-deficient designs are projected,
/// not inverted).
pub fn ols_fit(x: ArrayView2<f64>, y: &[f64]) -> Result<OlsFit> {
    let (n, p) = x.dim();
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("empty design matrix".into()));
    }
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "response length {} does not match {} rows",
            y.len(),
            n
        )));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("regression inputs must be finite".into()));
    }

    let mut a = x.to_owned();
    let mut yw = y.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();

    let max_init_norm = (0..p)
        .map(|j| column_tail_norm(&a, 0, j))
        .fold(0.0f64, f64::max);
    let tol = max_init_norm * RANK_TOL;

    let mut rank = 0;
    for k in 0..n.min(p) {
        let (best_j, best_norm) = (k..p)
            .map(|j| (j, column_tail_norm(&a, k, j)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite norms"))
            .expect("nonempty pivot range");
        if best_norm <= tol {
            break;
        }
        if best_j != k {
            swap_columns(&mut a, k, best_j);
            perm.swap(k, best_j);
        }

        // Householder reflector annihilating a[k+1.., k].
        let alpha = if a[(k, k)] >= 0.0 { -best_norm } else { best_norm };
        let mut v: Vec<f64> = (k..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..p {
                let dot: f64 = (k..n).map(|i| v[i - k] * a[(i, j)]).sum();
                let scale = 2.0 * dot / vnorm2;
                for i in k..n {
                    a[(i, j)] -= scale * v[i - k];
                }
            }
            let dot: f64 = (k..n).map(|i| v[i - k] * yw[i]).sum();
            let scale = 2.0 * dot / vnorm2;
            for i in k..n {
                yw[i] -= scale * v[i - k];
            }
        }
        a[(k, k)] = alpha;
        rank += 1;
    }

    let mut dropped_columns: Vec<usize> = perm[rank..].to_vec();
    dropped_columns.sort_unstable();
    let rss: f64 = yw[rank..].iter().map(|r| r * r).sum();
    Ok(OlsFit {
        rss,
        rank,
        dropped_columns,
    })
}

fn column_tail_norm(a: &ndarray::Array2<f64>, from_row: usize, col: usize) -> f64 {
    (from_row..a.nrows())
        .map(|i| a[(i, col)] * a[(i, col)])
        .sum::<f64>()
        .sqrt()
}

fn swap_columns(a: &mut ndarray::Array2<f64>, j1: usize, j2: usize) {
    for i in 0..a.nrows() {
        a.swap((i, j1), (i, j2));
    }
}

/// Result of comparing a base regression against the base plus extra
/// covariates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FTestResult {
    pub f_statistic: f64,
    pub p_value: f64,
    /// Numerator degrees of freedom: number of added covariate columns.
    pub df_numerator: f64,
    /// Denominator degrees of freedom: rows minus full-model columns.
    pub df_denominator: f64,
    pub rss_base: f64,
    pub rss_full: f64,
    /// Present when the added columns were (partly) collinear with the base
    /// design, in which case the F statistic understates nothing: the extras
    /// genuinely added that little.
    pub rank_warning: Option<String>,
}

/// Nested-model F-test: does appending `x_extra` to `x_base` significantly
/// reduce the residual sum of squares of the OLS fit to `y`?
///
/// `F = ((RSS_base - RSS_full)/q) / (RSS_full/(n - p_full))` with `q` the
/// number of added columns. A rank-deficient *base* design is an error naming
/// the collinear column; extra columns that add no rank produce `F = 0` with
/// a warning instead, since the comparison is still well defined.
pub fn nested_f_test(
    y: &[f64],
    x_base: ArrayView2<f64>,
    x_extra: ArrayView2<f64>,
) -> Result<FTestResult> {
    let n = y.len();
    if x_base.nrows() != n || x_extra.nrows() != n {
        return Err(Error::InvalidInput(
            "response and design matrices disagree on row count".into(),
        ));
    }
    let p_base = x_base.ncols();
    let q = x_extra.ncols();
    if q == 0 {
        return Err(Error::InvalidInput("no extra covariates to test".into()));
    }
    let p_full = p_base + q;
    if n < p_full + 2 {
        return Err(Error::InvalidInput(format!(
            "need at least {} rows for a {}-column full model, got {}",
            p_full + 2,
            p_full,
            n
        )));
    }

    let base = ols_fit(x_base, y)?;
    if base.rank < p_base {
        return Err(Error::Numerical(format!(
            "base design is rank-deficient: column {} is collinear with the others",
            base.dropped_columns[0]
        )));
    }

    let mut full_design = ndarray::Array2::<f64>::zeros((n, p_full));
    full_design.slice_mut(ndarray::s![.., ..p_base]).assign(&x_base);
    full_design.slice_mut(ndarray::s![.., p_base..]).assign(&x_extra);
    let full = ols_fit(full_design.view(), y)?;

    let df_num = q as f64;
    let df_den = (n - p_full) as f64;
    let rank_added = full.rank - base.rank;
    let rank_warning = if rank_added < q {
        let collinear: Vec<String> = full
            .dropped_columns
            .iter()
            .map(|&c| {
                if c >= p_base {
                    format!("extra column {}", c - p_base)
                } else {
                    format!("base column {c}")
                }
            })
            .collect();
        Some(format!(
            "added covariates contribute rank {rank_added} of {q} ({} collinear)",
            collinear.join(", ")
        ))
    } else {
        None
    };

    let (f_statistic, p_value) = if rank_added == 0 {
        // no information added: RSS identical by construction
        (0.0, 1.0)
    } else if full.rss <= f64::EPSILON * y.iter().map(|v| v * v).sum::<f64>() {
        (f64::INFINITY, 0.0)
    } else {
        let f = ((base.rss - full.rss).max(0.0) / df_num) / (full.rss / df_den);
        (f, f_survival(f, df_num, df_den))
    };

    Ok(FTestResult {
        f_statistic,
        p_value,
        df_numerator: df_num,
        df_denominator: df_den,
        rss_base: base.rss,
        rss_full: full.rss,
        rank_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Normal-equation RSS for cross-checking (small well-conditioned cases
    /// only): solves X^T X b = X^T y by Gaussian elimination.
    fn rss_by_normal_equations(x: &Array2<f64>, y: &[f64]) -> f64 {
        let p = x.ncols();
        let xtx = x.t().dot(x);
        let yv = ndarray::Array1::from_iter(y.iter().copied());
        let xty = x.t().dot(&yv);
        let mut m = xtx.clone();
        let mut b = xty.to_vec();
        for k in 0..p {
            let piv = (k..p)
                .max_by(|&a_, &b_| m[(a_, k)].abs().partial_cmp(&m[(b_, k)].abs()).unwrap())
                .unwrap();
            for j in 0..p {
                let t = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = t;
            }
            b.swap(k, piv);
            for i in k + 1..p {
                let factor = m[(i, k)] / m[(k, k)];
                for j in k..p {
                    let mkj = m[(k, j)];
                    m[(i, j)] -= factor * mkj;
                }
                b[i] -= factor * b[k];
            }
        }
        let mut coef = vec![0.0; p];
        for i in (0..p).rev() {
            let mut acc = b[i];
            for j in i + 1..p {
                acc -= m[(i, j)] * coef[j];
            }
            coef[i] = acc / m[(i, i)];
        }
        let fitted = x.dot(&ndarray::Array1::from_vec(coef));
        y.iter()
            .zip(fitted.iter())
            .map(|(yi, fi)| (yi - fi) * (yi - fi))
            .sum()
    }

    #[test]
    fn rss_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.gen_range(8..20);
            let p = rng.gen_range(1..5);
            let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-3.0..3.0));
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let fit = ols_fit(x.view(), &y).unwrap();
            assert_eq!(fit.rank, p);
            assert_relative_eq!(
                fit.rss,
                rss_by_normal_equations(&x, &y),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn duplicated_extra_column_gives_zero_f_with_warning() {
        let x_base = array![
            [1.0, 0.2],
            [1.0, 1.1],
            [1.0, -0.6],
            [1.0, 2.0],
            [1.0, 0.9],
            [1.0, -1.4],
            [1.0, 0.4],
            [1.0, 1.7],
        ];
        let x_extra = x_base.slice(ndarray::s![.., 1..2]).to_owned();
        let y = vec![0.3, 1.2, -0.5, 2.2, 0.8, -1.0, 0.6, 1.5];
        let result = nested_f_test(&y, x_base.view(), x_extra.view()).unwrap();
        assert_eq!(result.f_statistic, 0.0);
        assert_eq!(result.p_value, 1.0);
        assert!(result.rank_warning.is_some());
    }

    #[test]
    fn planted_signal_in_extras_is_significant() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let n = 60;
        let x_base = Array2::from_shape_fn((n, 2), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let x_extra = Array2::from_shape_fn((n, 1), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = (0..n)
            .map(|i| x_extra[(i, 0)] * 3.0 + 0.01 * rng.gen_range(-1.0..1.0))
            .collect();
        let result = nested_f_test(&y, x_base.view(), x_extra.view()).unwrap();
        assert!(result.f_statistic > 100.0);
        assert!(result.p_value < 1e-6);

        // direct RSS arithmetic reproduces the statistic
        let rss_b = rss_by_normal_equations(&x_base, &y);
        let mut full = Array2::zeros((n, 3));
        full.slice_mut(ndarray::s![.., ..2]).assign(&x_base);
        full.slice_mut(ndarray::s![.., 2..]).assign(&x_extra);
        let rss_f = rss_by_normal_equations(&full, &y);
        let expect = ((rss_b - rss_f) / 1.0) / (rss_f / (n as f64 - 3.0));
        assert_relative_eq!(result.f_statistic, expect, max_relative = 1e-6);
    }

    #[test]
    fn rank_deficient_base_errors_naming_column() {
        let x_base = array![
            [1.0, 2.0, 4.0],
            [1.0, -1.0, -2.0],
            [1.0, 0.5, 1.0],
            [1.0, 3.0, 6.0],
            [1.0, 1.5, 3.0],
            [1.0, -2.0, -4.0],
            [1.0, 0.1, 0.2],
        ];
        let x_extra = array![[0.3], [1.0], [-0.2], [0.7], [0.1], [0.9], [-0.5]];
        let y = vec![1.0, 0.0, 0.5, 2.0, 1.0, -1.0, 0.2];
        let err = nested_f_test(&y, x_base.view(), x_extra.view()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("column"), "message was: {msg}");
    }

    #[test]
    fn f_invariant_under_base_reparameterization() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let n = 40;
        let x_base = Array2::from_shape_fn((n, 3), |_| rng.gen_range(-1.0..1.0));
        let x_extra = Array2::from_shape_fn((n, 1), |_| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        // invertible 3x3 map applied to the base columns
        let t = array![[2.0, 1.0, 0.0], [0.0, 1.0, -1.0], [1.0, 0.0, 3.0]];
        let reparam = x_base.dot(&t);

        let a = nested_f_test(&y, x_base.view(), x_extra.view()).unwrap();
        let b = nested_f_test(&y, reparam.view(), x_extra.view()).unwrap();
        assert_relative_eq!(a.f_statistic, b.f_statistic, max_relative = 1e-8);
    }

    #[test]
    fn too_few_rows_rejected() {
        // full model has 2 columns; 3 rows is one short of the required p + 2
        let x_base = array![[1.0], [1.0], [1.0]];
        let x_extra = array![[0.1], [0.2], [0.3]];
        let y = vec![1.0, 2.0, 3.0];
        assert!(nested_f_test(&y, x_base.view(), x_extra.view()).is_err());
    }
}
