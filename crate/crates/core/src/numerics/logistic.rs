//! L2-regularized binary logistic regression.
//!
//! The solver is a deterministic limited-memory quasi-Newton descent with
//! backtracking line search: zero initialization, convergence when the
//! gradient infinity-norm drops below the tolerance, hard iteration cap.
//! No randomness anywhere, so refitting the same problem is bit-identical.

use ndarray::{Array1, Array2, ArrayView2};

use crate::{Error, Result};

/// Numerically stable log(1 + exp(z)).
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Logistic sigmoid clamped away from {0, 1} so probabilities stay strictly
/// interior and log-odds stay finite.
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(1e-15, 1.0 - 1e-15)
}

/// Solver knobs. The defaults are the ones every pipeline run uses; tests
/// tighten `tolerance` when they need the exact minimizer.
#[derive(Debug, Clone)]
pub struct LogisticOptions {
    /// Fit an unregularized intercept term (off reproduces the bare
    /// sigma(w·x) form).
    pub intercept: bool,
    /// Convergence threshold on the gradient infinity-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record the objective value at every iterate in `objective_trace`.
    pub record_trace: bool,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions {
            intercept: true,
            tolerance: 1e-6,
            max_iterations: 500,
            record_trace: false,
        }
    }
}

/// A fitted probe: `p(y=1|x) = sigma(weights·x + intercept)`.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub weights: Array1<f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// False when the iteration cap was hit or the line search stalled before
    /// reaching tolerance. Never silent: callers decide what to do.
    pub converged: bool,
    pub iterations: usize,
    /// Objective value per iterate, populated only under `record_trace`.
    pub objective_trace: Vec<f64>,
}

impl LogisticModel {
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.weights.len());
        let dot: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum();
        dot + self.intercept
    }

    /// Probability of the positive class, strictly inside (0, 1).
    pub fn predict_prob(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision_value(x))
    }

    /// log p(y=1|x), computed in a form that never underflows to -inf.
    pub fn log_prob_positive(&self, x: &[f64]) -> f64 {
        -softplus(-self.decision_value(x))
    }

    /// log p(y=0|x).
    pub fn log_prob_negative(&self, x: &[f64]) -> f64 {
        -softplus(self.decision_value(x))
    }
}

/// The regularized objective
/// `sum_i wt_i * nll_i(w, b) + lambda * ||w||^2` (intercept unpenalized),
/// exposed with its analytic gradient so tests can cross-check it against
/// finite differences.
pub struct LogisticObjective<'a> {
    x: ArrayView2<'a, f64>,
    y: Array1<f64>,
    sample_weights: Array1<f64>,
    lambda: f64,
    intercept: bool,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(
        x: ArrayView2<'a, f64>,
        y: &[u8],
        sample_weights: Option<&[f64]>,
        lambda: f64,
        intercept: bool,
    ) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::InvalidInput("empty design matrix".into()));
        }
        if y.len() != n {
            return Err(Error::InvalidInput(format!(
                "label vector length {} does not match {} rows",
                y.len(),
                n
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design matrix has non-finite entries".into()));
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "regularization strength must be finite and nonnegative, got {lambda}"
            )));
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidInput(format!(
                "labels must be 0 or 1, got {bad}"
            )));
        }
        let sample_weights = match sample_weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::InvalidInput(format!(
                        "sample weight length {} does not match {} rows",
                        w.len(),
                        n
                    )));
                }
                if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidInput(
                        "sample weights must be finite and nonnegative".into(),
                    ));
                }
                Array1::from_iter(w.iter().copied())
            }
            None => Array1::ones(n),
        };
        Ok(LogisticObjective {
            x,
            y: Array1::from_iter(y.iter().map(|&v| v as f64)),
            sample_weights,
            lambda,
            intercept,
        })
    }

    /// Packed parameter dimension: feature weights plus the intercept slot.
    pub fn dim(&self) -> usize {
        self.x.ncols() + usize::from(self.intercept)
    }

    fn linear_predictor(&self, params: &Array1<f64>) -> Array1<f64> {
        let d = self.x.ncols();
        let w = params.slice(ndarray::s![..d]);
        let mut z = self.x.dot(&w);
        if self.intercept {
            let b = params[d];
            z.mapv_inplace(|v| v + b);
        }
        z
    }

    pub fn value(&self, params: &Array1<f64>) -> f64 {
        let d = self.x.ncols();
        let z = self.linear_predictor(params);
        let mut nll = 0.0;
        for i in 0..z.len() {
            nll += self.sample_weights[i] * (softplus(z[i]) - self.y[i] * z[i]);
        }
        let penalty: f64 = params.slice(ndarray::s![..d]).iter().map(|w| w * w).sum();
        nll + self.lambda * penalty
    }

    pub fn gradient(&self, params: &Array1<f64>) -> Array1<f64> {
        let d = self.x.ncols();
        let z = self.linear_predictor(params);
        // residual_i = wt_i * (sigma(z_i) - y_i)
        let residual = Array1::from_iter(
            z.iter()
                .zip(self.y.iter())
                .zip(self.sample_weights.iter())
                .map(|((&zi, &yi), &wt)| wt * (sigmoid_raw(zi) - yi)),
        );
        let mut grad = Array1::<f64>::zeros(self.dim());
        let gw = self.x.t().dot(&residual);
        for j in 0..d {
            grad[j] = gw[j] + 2.0 * self.lambda * params[j];
        }
        if self.intercept {
            grad[d] = residual.sum();
        }
        grad
    }
}

/// Unclamped sigmoid, used inside the gradient so the analytic gradient is
/// the exact derivative of `value`.
fn sigmoid_raw(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fits with unit sample weights and default options.
pub fn fit_logistic(x: ArrayView2<f64>, y: &[u8], lambda: f64) -> Result<LogisticModel> {
    fit_logistic_with(x, y, lambda, &LogisticOptions::default())
}

pub fn fit_logistic_with(
    x: ArrayView2<f64>,
    y: &[u8],
    lambda: f64,
    options: &LogisticOptions,
) -> Result<LogisticModel> {
    fit_logistic_weighted(x, y, None, lambda, options)
}

/// Weighted fit: example `i` contributes `sample_weights[i]` times its
/// negative log-likelihood. A zero weight removes the example exactly, which
/// is how the leave-one-out machinery drops folds without copying the matrix.
pub fn fit_logistic_weighted(
    x: ArrayView2<f64>,
    y: &[u8],
    sample_weights: Option<&[f64]>,
    lambda: f64,
    options: &LogisticOptions,
) -> Result<LogisticModel> {
    let objective = LogisticObjective::new(x, y, sample_weights, lambda, options.intercept)?;
    let solution = minimize(&objective, options);
    let d = x.ncols();
    let weights = Array1::from_iter(solution.params.slice(ndarray::s![..d]).iter().copied());
    let intercept = if options.intercept {
        solution.params[d]
    } else {
        0.0
    };
    Ok(LogisticModel {
        weights,
        intercept,
        lambda,
        converged: solution.converged,
        iterations: solution.iterations,
        objective_trace: solution.trace,
    })
}

struct Solution {
    params: Array1<f64>,
    converged: bool,
    iterations: usize,
    trace: Vec<f64>,
}

/// Limited-memory BFGS (history 10) with Armijo backtracking.
fn minimize(objective: &LogisticObjective, options: &LogisticOptions) -> Solution {
    const HISTORY: usize = 10;
    const ARMIJO_C1: f64 = 1e-4;
    const BACKTRACK: f64 = 0.5;
    const MAX_BACKTRACKS: usize = 60;

    let dim = objective.dim();
    let mut params = Array1::<f64>::zeros(dim);
    let mut f = objective.value(&params);
    let mut grad = objective.gradient(&params);
    let mut trace = Vec::new();
    if options.record_trace {
        trace.push(f);
    }

    let mut s_hist: Vec<Array1<f64>> = Vec::new();
    let mut y_hist: Vec<Array1<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    let mut iterations = 0;
    let mut converged = inf_norm(&grad) < options.tolerance;

    while !converged && iterations < options.max_iterations {
        let mut direction = two_loop_direction(&grad, &s_hist, &y_hist, &rho_hist);
        let mut slope = direction.dot(&grad);
        if slope >= 0.0 {
            // Stale curvature produced a non-descent direction; restart from
            // steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            direction = -&grad;
            slope = direction.dot(&grad);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = &params + &(&direction * step);
            let f_new = objective.value(&candidate);
            if f_new <= f + ARMIJO_C1 * step * slope {
                accepted = Some((candidate, f_new));
                break;
            }
            step *= BACKTRACK;
        }
        let Some((new_params, f_new)) = accepted else {
            // Even tiny steps fail to decrease: the iterate is as good as the
            // arithmetic allows. Flag unless the gradient is already small.
            converged = inf_norm(&grad) < options.tolerance;
            break;
        };

        let new_grad = objective.gradient(&new_params);
        let s = &new_params - &params;
        let y_vec = &new_grad - &grad;
        let sy = s.dot(&y_vec);
        if sy > 1e-12 * l2(&s) * l2(&y_vec) {
            if s_hist.len() == HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y_vec);
            rho_hist.push(1.0 / sy);
        }

        params = new_params;
        f = f_new;
        grad = new_grad;
        iterations += 1;
        if options.record_trace {
            trace.push(f);
        }
        converged = inf_norm(&grad) < options.tolerance;
    }

    Solution {
        params,
        converged,
        iterations,
        trace,
    }
}

fn two_loop_direction(
    grad: &Array1<f64>,
    s_hist: &[Array1<f64>],
    y_hist: &[Array1<f64>],
    rho_hist: &[f64],
) -> Array1<f64> {
    let mut q = grad.clone();
    let k = s_hist.len();
    let mut alphas = vec![0.0; k];
    for i in (0..k).rev() {
        let alpha = rho_hist[i] * s_hist[i].dot(&q);
        alphas[i] = alpha;
        q.scaled_add(-alpha, &y_hist[i]);
    }
    if let Some(last) = k.checked_sub(1) {
        let gamma = s_hist[last].dot(&y_hist[last]) / y_hist[last].dot(&y_hist[last]);
        q *= gamma;
    }
    for i in 0..k {
        let beta = rho_hist[i] * y_hist[i].dot(&q);
        q.scaled_add(alphas[i] - beta, &s_hist[i]);
    }
    -q
}

fn inf_norm(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn l2(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Design-matrix helper for callers holding embeddings row-per-concept.
pub fn design_from_rows(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows".into()));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("ragged rows".into()));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), d), flat)
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize) -> (Array2<f64>, Vec<u8>) {
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.4))).collect();
        (x, y)
    }

    #[test]
    fn heavy_regularization_shrinks_weights_to_intercept_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (x, y) = random_problem(&mut rng, 60, 8);
        let model = fit_logistic(x.view(), &y, 1e9).unwrap();
        assert!(model.converged);
        let wnorm: f64 = model.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(wnorm < 1e-6, "weights should collapse, got norm {wnorm}");
        // predictions match the base rate of the labels
        let base_rate = y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
        let row: Vec<f64> = x.row(0).to_vec();
        assert_relative_eq!(model.predict_prob(&row), base_rate, max_relative = 1e-4);
    }

    #[test]
    fn weight_norm_tiny_at_lambda_1e6_on_unit_scale_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (x, y) = random_problem(&mut rng, 100, 5);
        let model = fit_logistic(x.view(), &y, 1e6).unwrap();
        let wnorm: f64 = model.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(wnorm < 1e-3);
    }

    #[test]
    fn one_dimensional_matches_grid_search() {
        // x = +1 labeled 1, x = -1 labeled 0, lambda = 1, no intercept.
        let x = array![[1.0], [-1.0]];
        let y = [1u8, 0u8];
        let opts = LogisticOptions {
            intercept: false,
            tolerance: 1e-10,
            ..LogisticOptions::default()
        };
        let model = fit_logistic_with(x.view(), &y, 1.0, &opts).unwrap();
        assert!(model.converged);

        // brute force over w in [-5, 5] at step 1e-4
        let objective = LogisticObjective::new(x.view(), &y, None, 1.0, false).unwrap();
        let mut best_w = -5.0;
        let mut best_f = f64::INFINITY;
        let mut w = -5.0;
        while w <= 5.0 {
            let f = objective.value(&array![w]);
            if f < best_f {
                best_f = f;
                best_w = w;
            }
            w += 1e-4;
        }
        assert!(
            (model.weights[0] - best_w).abs() < 1e-3,
            "solver {} vs grid {}",
            model.weights[0],
            best_w
        );
    }

    #[test]
    fn gradient_at_zero_on_balanced_data() {
        // at w = 0 every prediction is 0.5, so grad_w = -X^T (y - 0.5)
        let x = array![[1.0, 2.0], [-1.0, 0.5], [0.3, -0.7], [2.0, 1.0]];
        let y = [1u8, 0, 1, 0];
        let objective = LogisticObjective::new(x.view(), &y, None, 0.0, false).unwrap();
        let grad = objective.gradient(&Array1::zeros(2));
        let centered = Array1::from_iter(y.iter().map(|&v| v as f64 - 0.5));
        let expected = -x.t().dot(&centered);
        for j in 0..2 {
            assert_relative_eq!(grad[j], expected[j], max_relative = 1e-12);
        }
    }

    #[test]
    fn single_class_input_converges() {
        let x = array![[0.5, 1.0], [1.5, -0.2], [-0.3, 0.8]];
        let y = [1u8, 1, 1];
        let model = fit_logistic(x.view(), &y, 0.01).unwrap();
        assert!(model.converged);
        for i in 0..3 {
            let row: Vec<f64> = x.row(i).to_vec();
            let p = model.predict_prob(&row);
            assert!(p > 0.9 && p < 1.0, "prediction should be confident, interior");
        }
    }

    #[test]
    fn predictions_strictly_interior() {
        let x = array![[1000.0], [-1000.0]];
        let y = [1u8, 0];
        let model = fit_logistic(x.view(), &y, 1e-6).unwrap();
        let p_hi = model.predict_prob(&[1000.0]);
        let p_lo = model.predict_prob(&[-1000.0]);
        assert!(p_hi < 1.0 && p_hi > 0.0);
        assert!(p_lo > 0.0 && p_lo < 1.0);
    }

    #[test]
    fn non_finite_input_is_error() {
        let x = array![[f64::NAN], [1.0]];
        assert!(fit_logistic(x.view(), &[1, 0], 1.0).is_err());
        let x = array![[1.0], [1.0]];
        assert!(fit_logistic(x.view(), &[1, 0], f64::INFINITY).is_err());
    }

    #[test]
    fn objective_trace_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = random_problem(&mut rng, 80, 6);
        let opts = LogisticOptions {
            record_trace: true,
            ..LogisticOptions::default()
        };
        let model = fit_logistic_with(x.view(), &y, 0.1, &opts).unwrap();
        assert!(model.objective_trace.len() > 2);
        for w in model.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "objective increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn refit_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, y) = random_problem(&mut rng, 50, 4);
        let a = fit_logistic(x.view(), &y, 0.5).unwrap();
        let b = fit_logistic(x.view(), &y, 0.5).unwrap();
        assert_eq!(a.weights.as_slice().unwrap(), b.weights.as_slice().unwrap());
        assert_eq!(a.intercept.to_bits(), b.intercept.to_bits());
    }

    #[test]
    fn zero_weight_equals_removed_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x, y) = random_problem(&mut rng, 30, 3);
        let opts = LogisticOptions {
            tolerance: 1e-10,
            ..LogisticOptions::default()
        };
        let mut weights = vec![1.0; 30];
        weights[7] = 0.0;
        let weighted = fit_logistic_weighted(x.view(), &y, Some(&weights), 0.3, &opts).unwrap();

        let kept: Vec<usize> = (0..30).filter(|&i| i != 7).collect();
        let x_sub = x.select(ndarray::Axis(0), &kept);
        let y_sub: Vec<u8> = kept.iter().map(|&i| y[i]).collect();
        let removed = fit_logistic_with(x_sub.view(), &y_sub, 0.3, &opts).unwrap();

        for j in 0..3 {
            assert_relative_eq!(weighted.weights[j], removed.weights[j], epsilon = 1e-7);
        }
        assert_relative_eq!(weighted.intercept, removed.intercept, epsilon = 1e-7);
    }
}
