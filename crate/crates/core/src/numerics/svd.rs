//! Truncated singular value decomposition via one-sided (Hestenes) Jacobi
//! rotations.
//!
//! The label matrices this crate decomposes are at most a few hundred by a
//! few thousand, where Jacobi is plenty fast and delivers singular vectors
//! orthonormal to near machine precision.

use ndarray::{Array1, Array2, ArrayView2};

use crate::{Error, Result};

/// Rank-k factorization `M ~ U diag(S) V^T` with `U` m-by-k, `S` length k
/// nonincreasing, `V` n-by-k, both factor matrices column-orthonormal.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Array2<f64>,
    pub s: Array1<f64>,
    pub v: Array2<f64>,
}

impl TruncatedSvd {
    /// `U diag(S) V^T`, the best rank-k approximation of the input.
    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.u * &self.s; // broadcasts S across columns
        scaled.dot(&self.v.t())
    }
}

/// Best rank-k factorization of `m`, singular values sorted nonincreasing.
///
/// Errors when `k` is zero or exceeds `min(rows, cols)`, or when the matrix
/// contains non-finite entries.
pub fn truncated_svd(m: ArrayView2<f64>, k: usize) -> Result<TruncatedSvd> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidInput("cannot decompose an empty matrix".into()));
    }
    if k == 0 || k > rows.min(cols) {
        return Err(Error::InvalidInput(format!(
            "rank k={k} out of range for a {rows}x{cols} matrix"
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
    }

    // Work with cols <= rows; decompose the transpose otherwise and swap U/V.
    if cols > rows {
        let t = jacobi_svd(&transpose_to_rows(&m.t().view()), cols, rows, k);
        return Ok(TruncatedSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    Ok(jacobi_svd(&transpose_to_rows(&m), rows, cols, k))
}

/// Copies the columns of `m` into contiguous rows, so every column operation
/// in the sweep runs over contiguous memory.
fn transpose_to_rows(m: &ArrayView2<f64>) -> Vec<Vec<f64>> {
    let (rows, cols) = m.dim();
    let mut out = vec![vec![0.0; rows]; cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c][r] = m[(r, c)];
        }
    }
    out
}

/// One-sided Jacobi on an m-by-n matrix (m >= n) stored column-per-row in `w`.
fn jacobi_svd(w_cols: &[Vec<f64>], m: usize, n: usize, k: usize) -> TruncatedSvd {
    const SWEEP_CAP: usize = 100;
    const OFFDIAG_TOL: f64 = 1e-14;

    let mut w: Vec<Vec<f64>> = w_cols.to_vec();
    // Right factor, also column-per-row.
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();

    for _ in 0..SWEEP_CAP {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (alpha, beta, gamma) = column_moments(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= OFFDIAG_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    // Singular values are the column norms; order them nonincreasing.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w.iter().map(|col| l2_norm(col)).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let s_max = norms[order[0]];
    let zero_cutoff = s_max * (m.max(n) as f64) * f64::EPSILON;

    let mut u = Array2::<f64>::zeros((m, k));
    let mut s = Array1::<f64>::zeros(k);
    let mut v_out = Array2::<f64>::zeros((n, k));
    let mut deficient: Vec<usize> = Vec::new();
    for (out_idx, &src) in order.iter().take(k).enumerate() {
        s[out_idx] = norms[src];
        for r in 0..n {
            v_out[(r, out_idx)] = v[src][r];
        }
        if norms[src] > zero_cutoff {
            for r in 0..m {
                u[(r, out_idx)] = w[src][r] / norms[src];
            }
        } else {
            deficient.push(out_idx);
        }
    }
    // Left vectors for (near-)zero singular values are arbitrary up to
    // orthonormality; complete them from the standard basis.
    for col in deficient {
        complete_orthonormal_column(&mut u, col);
    }

    TruncatedSvd { u, s, v: v_out }
}

fn column_moments(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        alpha += x * x;
        beta += y * y;
        gamma += x * y;
    }
    (alpha, beta, gamma)
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = c * *x - s * *y;
        let yq = s * *x + c * *y;
        *x = xp;
        *y = yq;
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fills column `col` of `u` with a unit vector orthogonal to all other
/// nonzero columns, seeded from the standard basis vector with the largest
/// residual (deterministic).
fn complete_orthonormal_column(u: &mut Array2<f64>, col: usize) {
    let (m, k) = u.dim();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for seed in 0..m {
        let mut cand = vec![0.0; m];
        cand[seed] = 1.0;
        for _ in 0..2 {
            for other in 0..k {
                if other == col {
                    continue;
                }
                let dot: f64 = (0..m).map(|r| cand[r] * u[(r, other)]).sum();
                for (r, item) in cand.iter_mut().enumerate() {
                    *item -= dot * u[(r, other)];
                }
            }
        }
        let norm = l2_norm(&cand);
        if norm > 0.5 {
            for (r, &x) in cand.iter().enumerate() {
                u[(r, col)] = x / norm;
            }
            return;
        }
        if best.as_ref().is_none_or(|(n, _)| norm > *n) {
            best = Some((norm, cand));
        }
    }
    let (norm, cand) = best.expect("matrix has at least one row");
    assert!(norm > 0.0, "cannot complete an orthonormal basis");
    for (r, &x) in cand.iter().enumerate() {
        u[(r, col)] = x / norm;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn frob(m: &Array2<f64>) -> f64 {
        m.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn orthonormality_defect(m: &Array2<f64>) -> f64 {
        let g = m.t().dot(m);
        let k = g.nrows();
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - expect).abs());
            }
        }
        worst
    }

    #[test]
    fn identity_reconstructs_exactly() {
        let eye = Array2::<f64>::eye(3);
        let svd = truncated_svd(eye.view(), 3).unwrap();
        assert!(frob(&(&svd.reconstruct() - &eye)) < 1e-12);
        for &sv in svd.s.iter() {
            assert!((sv - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_matrix_at_k1() {
        let u = array![[1.0], [2.0], [-1.0]];
        let v = array![[3.0, 0.5, -2.0, 1.0]];
        let m = u.dot(&v);
        let svd = truncated_svd(m.view(), 1).unwrap();
        assert!(frob(&(&svd.reconstruct() - &m)) < 1e-10);
    }

    #[test]
    fn singular_values_sorted_and_factors_orthonormal() {
        let m = array![
            [0.3, -1.2, 0.7, 2.0],
            [1.5, 0.1, -0.4, 0.9],
            [-0.8, 0.6, 1.1, -0.2],
            [2.2, -0.5, 0.3, 0.4],
            [0.0, 1.9, -1.3, 0.8],
        ];
        let svd = truncated_svd(m.view(), 4).unwrap();
        for w in svd.s.windows(2) {
            assert!(w[0] >= w[1]);
            assert!(w[1] >= 0.0);
        }
        assert!(orthonormality_defect(&svd.u) < 1e-10);
        assert!(orthonormality_defect(&svd.v) < 1e-10);
    }

    #[test]
    fn wide_matrix_handled_via_transpose() {
        let m = array![[1.0, 2.0, 3.0, 4.0, 5.0], [0.0, 1.0, 0.0, -1.0, 2.0]];
        let svd = truncated_svd(m.view(), 2).unwrap();
        assert!(frob(&(&svd.reconstruct() - &m)) < 1e-10);
        assert_eq!(svd.u.dim(), (2, 2));
        assert_eq!(svd.v.dim(), (5, 2));
    }

    #[test]
    fn rank_deficient_keeps_orthonormal_left_factor() {
        // rank 1, but k = 2 requested: the second left vector must still be unit
        // and orthogonal to the first.
        let m = array![[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let svd = truncated_svd(m.view(), 2).unwrap();
        assert!(svd.s[1].abs() < 1e-10);
        assert!(orthonormality_defect(&svd.u) < 1e-8);
        assert!(frob(&(&svd.reconstruct() - &m)) < 1e-10);
    }

    #[test]
    fn k_out_of_range_is_error() {
        let m = Array2::<f64>::eye(3);
        assert!(truncated_svd(m.view(), 0).is_err());
        assert!(truncated_svd(m.view(), 4).is_err());
    }

    #[test]
    fn non_finite_is_error() {
        let m = array![[1.0, f64::NAN], [0.0, 1.0]];
        assert!(truncated_svd(m.view(), 1).is_err());
    }
}
