//! The feature view: one L2-regularized logistic probe per norm feature,
//! regularizer selected per feature by leave-one-out cross-validation over
//! the positives, then a binary-F1 "feature fit" score from the full-data
//! refit. Category-level summaries compare perceptual against non-perceptual
//! features with a bootstrap interval on the median difference.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numerics::{
    binary_f1, bootstrap_median_diff, fit_logistic_weighted, median, pearson, ConfidenceInterval,
    LogisticModel, LogisticOptions,
};
use crate::{Error, Result};

/// Probability cutoff for calling a feature present. Fixed, not tuned.
pub const CLASSIFICATION_THRESHOLD: f64 = 0.5;

/// How the feature-fit F1 is computed after lambda selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum F1Mode {
    /// Refit on all concepts, score predictions on the same concepts.
    InSample,
    /// Score each concept from the model fitted without it (much slower).
    LeaveOneOut,
}

/// Knobs shared by every probe in a run.
#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub solver: LogisticOptions,
    pub f1_mode: F1Mode,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            solver: LogisticOptions::default(),
            f1_mode: F1Mode::InSample,
        }
    }
}

/// Thirteen logarithmically spaced regularizer values, 1e-2 through 1e4.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)).collect()
}

/// One feature's probe outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureFitRecord {
    pub feature: String,
    pub category: String,
    /// Selected regularization strength.
    pub lambda: f64,
    /// Leave-one-out objective value at the selected lambda (<= 0).
    pub loocv_objective: f64,
    /// Feature fit in percent, 0..=100.
    pub f1: f64,
    /// Number of concepts bearing the feature.
    pub positive_count: usize,
    /// False when any fold or the final refit hit the iteration cap.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LoocvOutcome {
    pub objective: f64,
    pub nonconverged_folds: usize,
}

/// Leave-one-out objective for one feature at one regularizer value.
///
/// For each positive concept j, a model is trained on all concepts except j;
/// the fold contributes the log-probability of the held-out positive plus the
/// *average* log-probability over all negative concepts of staying negative.
/// Folds are averaged over the positives. The result is nonpositive.
pub fn loocv_objective(
    labels: &[u8],
    x: ArrayView2<f64>,
    lambda: f64,
    config: &ProbeConfig,
) -> Result<LoocvOutcome> {
    loocv_objective_weighted(labels, x, None, lambda, config)
}

/// Weighted generalization: concept k carries weight `w_k` both in training
/// and in the positive/negative averages. Listing a concept twice and giving
/// it weight 2 are equivalent, which is also how the equivalence is tested.
pub fn loocv_objective_weighted(
    labels: &[u8],
    x: ArrayView2<f64>,
    sample_weights: Option<&[f64]>,
    lambda: f64,
    config: &ProbeConfig,
) -> Result<LoocvOutcome> {
    let n = labels.len();
    if x.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "label vector length {n} does not match {} design rows",
            x.nrows()
        )));
    }
    let weights: Vec<f64> = match sample_weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::InvalidInput("sample weight length mismatch".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };

    let positives: Vec<usize> = (0..n)
        .filter(|&i| labels[i] == 1 && weights[i] > 0.0)
        .collect();
    let negatives: Vec<usize> = (0..n)
        .filter(|&i| labels[i] == 0 && weights[i] > 0.0)
        .collect();
    if positives.len() < 2 {
        return Err(Error::Degenerate(format!(
            "leave-one-out needs at least 2 positive concepts, found {}",
            positives.len()
        )));
    }

    let weight_pos: f64 = positives.iter().map(|&i| weights[i]).sum();
    let weight_neg: f64 = negatives.iter().map(|&i| weights[i]).sum();
    if weight_neg <= 0.0 {
        return Err(Error::Degenerate(
            "leave-one-out needs at least one negative concept".into(),
        ));
    }

    let mut objective = 0.0;
    let mut nonconverged_folds = 0;
    let mut fold_weights = weights.clone();
    for &j in &positives {
        fold_weights[j] = 0.0;
        let model =
            fit_logistic_weighted(x, labels, Some(&fold_weights), lambda, &config.solver)?;
        fold_weights[j] = weights[j];
        if !model.converged {
            nonconverged_folds += 1;
        }

        let z = decision_values(&model, x);
        let held_out = -crate::numerics::softplus(-z[j]);
        let neg_term: f64 = negatives
            .iter()
            .map(|&k| weights[k] * -crate::numerics::softplus(z[k]))
            .sum::<f64>()
            / weight_neg;
        objective += weights[j] * (held_out + neg_term);
    }

    Ok(LoocvOutcome {
        objective: objective / weight_pos,
        nonconverged_folds,
    })
}

fn decision_values(model: &LogisticModel, x: ArrayView2<f64>) -> Array1<f64> {
    let mut z = x.dot(&model.weights);
    z.mapv_inplace(|v| v + model.intercept);
    z
}

#[derive(Debug, Clone, Copy)]
pub struct SelectedLambda {
    pub lambda: f64,
    pub objective: f64,
    pub nonconverged_folds: usize,
}

/// Argmax of the leave-one-out objective over the grid; exact ties go to the
/// larger lambda (prefer the stronger regularizer).
pub fn select_lambda(
    labels: &[u8],
    x: ArrayView2<f64>,
    grid: &[f64],
    config: &ProbeConfig,
) -> Result<SelectedLambda> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    let mut best: Option<SelectedLambda> = None;
    for &lambda in grid {
        let outcome = loocv_objective(labels, x, lambda, config)?;
        let candidate = SelectedLambda {
            lambda,
            objective: outcome.objective,
            nonconverged_folds: outcome.nonconverged_folds,
        };
        best = Some(match best {
            None => candidate,
            Some(current) => {
                if candidate.objective > current.objective
                    || (candidate.objective == current.objective
                        && candidate.lambda > current.lambda)
                {
                    candidate
                } else {
                    current
                }
            }
        });
    }
    Ok(best.expect("nonempty grid"))
}

/// Full per-feature probe: select the regularizer, refit on all concepts,
/// score binary F1 at the fixed 0.5 threshold.
pub fn score_feature(
    feature: &str,
    category: &str,
    labels: &[u8],
    x: ArrayView2<f64>,
    grid: &[f64],
    config: &ProbeConfig,
) -> Result<FeatureFitRecord> {
    let selected = select_lambda(labels, x, grid, config)?;
    let gold: Vec<bool> = labels.iter().map(|&v| v == 1).collect();

    let (predicted, refit_converged) = match config.f1_mode {
        F1Mode::InSample => {
            let model = fit_logistic_weighted(x, labels, None, selected.lambda, &config.solver)?;
            let z = decision_values(&model, x);
            let predicted: Vec<bool> = z
                .iter()
                .map(|&zi| crate::numerics::sigmoid(zi) >= CLASSIFICATION_THRESHOLD)
                .collect();
            (predicted, model.converged)
        }
        F1Mode::LeaveOneOut => {
            let n = labels.len();
            let mut predicted = vec![false; n];
            let mut all_converged = true;
            let mut fold_weights = vec![1.0; n];
            for j in 0..n {
                fold_weights[j] = 0.0;
                let model = fit_logistic_weighted(
                    x,
                    labels,
                    Some(&fold_weights),
                    selected.lambda,
                    &config.solver,
                )?;
                fold_weights[j] = 1.0;
                all_converged &= model.converged;
                let row: Vec<f64> = x.row(j).to_vec();
                predicted[j] = model.predict_prob(&row) >= CLASSIFICATION_THRESHOLD;
            }
            (predicted, all_converged)
        }
    };

    let f1 = binary_f1(&predicted, &gold)? * 100.0;
    Ok(FeatureFitRecord {
        feature: feature.to_string(),
        category: category.to_string(),
        lambda: selected.lambda,
        loocv_objective: selected.objective,
        f1,
        positive_count: gold.iter().filter(|&&g| g).count(),
        converged: refit_converged && selected.nonconverged_folds == 0,
    })
}

/// Scores every feature of a label matrix in parallel. Results come back in
/// feature order regardless of the worker count.
pub fn score_all_features<F>(
    label_matrix: &crate::ingest::LabelMatrix,
    x: ArrayView2<f64>,
    category_of: F,
    grid: &[f64],
    config: &ProbeConfig,
) -> Result<Vec<FeatureFitRecord>>
where
    F: Fn(&str) -> String + Sync,
{
    let features = label_matrix.features();
    features
        .par_iter()
        .enumerate()
        .map(|(idx, feature)| {
            let labels = label_matrix.feature_labels(idx);
            score_feature(feature, &category_of(feature), &labels, x, grid, config)
        })
        .collect()
}

/// Bootstrap parameters for the category-level median-difference test.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BootstrapParams {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapParams {
    fn default() -> Self {
        BootstrapParams {
            resamples: 10_000,
            level: 0.95,
            seed: 1,
        }
    }
}

/// Per-category score lists plus the perceptual/non-perceptual median test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategorySummary {
    pub per_category_scores: BTreeMap<String, Vec<f64>>,
    pub per_category_median: BTreeMap<String, f64>,
    pub perceptual_categories: Vec<String>,
    pub non_perceptual_categories: Vec<String>,
    /// median(non-perceptual scores) - median(perceptual scores)
    pub median_difference: f64,
    pub ci: ConfidenceInterval,
}

/// Groups feature-fit scores by category and bootstraps the difference of
/// median scores, non-perceptual minus perceptual. Categories outside both
/// groups (typically encyclopedic) are reported but excluded from the test.
pub fn summarize_categories(
    records: &[FeatureFitRecord],
    perceptual: &[String],
    non_perceptual: &[String],
    params: &BootstrapParams,
) -> Result<CategorySummary> {
    let mut per_category_scores: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for record in records {
        per_category_scores
            .entry(record.category.clone())
            .or_default()
            .push(record.f1);
    }
    let per_category_median: BTreeMap<String, f64> = per_category_scores
        .iter()
        .map(|(cat, scores)| (cat.clone(), median(scores)))
        .collect();

    let collect_group = |group: &[String]| -> Vec<f64> {
        records
            .iter()
            .filter(|r| group.contains(&r.category))
            .map(|r| r.f1)
            .collect()
    };
    let perceptual_scores = collect_group(perceptual);
    let non_perceptual_scores = collect_group(non_perceptual);
    if perceptual_scores.is_empty() || non_perceptual_scores.is_empty() {
        return Err(Error::InvalidInput(
            "both category groups must contain at least one scored feature".into(),
        ));
    }

    let ci = bootstrap_median_diff(
        &non_perceptual_scores,
        &perceptual_scores,
        params.resamples,
        params.level,
        params.seed,
    )?;
    Ok(CategorySummary {
        per_category_scores,
        per_category_median,
        perceptual_categories: perceptual.to_vec(),
        non_perceptual_categories: non_perceptual.to_vec(),
        median_difference: median(&non_perceptual_scores) - median(&perceptual_scores),
        ci,
    })
}

/// Feature-by-feature comparison of two probe runs over the same norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationComparison {
    /// Least-squares slope of b-scores regressed on a-scores.
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    /// (feature, score_a, score_b), sorted by feature name.
    pub pairs: Vec<(String, f64, f64)>,
}

/// Pairs records by feature name and regresses the second run's scores on
/// the first's. Requires at least three shared features.
pub fn compare_representations(
    records_a: &[FeatureFitRecord],
    records_b: &[FeatureFitRecord],
) -> Result<RepresentationComparison> {
    let by_name: BTreeMap<&str, f64> = records_b
        .iter()
        .map(|r| (r.feature.as_str(), r.f1))
        .collect();
    let mut pairs: Vec<(String, f64, f64)> = records_a
        .iter()
        .filter_map(|r| {
            by_name
                .get(r.feature.as_str())
                .map(|&b| (r.feature.clone(), r.f1, b))
        })
        .collect();
    pairs.sort_by(|x, y| x.0.cmp(&y.0));
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 shared features to compare, found {}",
            pairs.len()
        )));
    }

    let a: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    for (&ai, &bi) in a.iter().zip(&b) {
        cov += (ai - mean_a) * (bi - mean_b);
        var_a += (ai - mean_a) * (ai - mean_a);
    }
    if var_a == 0.0 {
        return Err(Error::Degenerate(
            "all scores identical in the first run; slope undefined".into(),
        ));
    }
    let slope = cov / var_a;
    Ok(RepresentationComparison {
        slope,
        intercept: mean_b - slope * mean_a,
        pearson_r: pearson(&a, &b)?,
        pairs,
    })
}

/// Writes the per-feature CSV: feature, category, lambda, loocv_objective,
/// f1, positive_count.
pub fn write_feature_csv(records: &[FeatureFitRecord], out: &mut impl Write) -> Result<()> {
    writeln!(out, "feature,category,lambda,loocv_objective,f1,positive_count")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_escape(&r.feature),
            csv_escape(&r.category),
            r.lambda,
            r.loocv_objective,
            r.f1,
            r.positive_count
        )?;
    }
    Ok(())
}

/// Reads a per-feature CSV written by [`write_feature_csv`].
pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureFitRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot open feature csv {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |i: usize| -> Result<&str> {
            row.get(i)
                .ok_or_else(|| Error::parse(path, line, "short record"))
        };
        let parse_f64 = |raw: &str| -> Result<f64> {
            raw.parse()
                .map_err(|_| Error::parse(path, line, format!("bad number {raw:?}")))
        };
        records.push(FeatureFitRecord {
            feature: get(0)?.to_string(),
            category: get(1)?.to_string(),
            lambda: parse_f64(get(2)?)?,
            loocv_objective: parse_f64(get(3)?)?,
            f1: parse_f64(get(4)?)?,
            positive_count: get(5)?
                .parse()
                .map_err(|_| Error::parse(path, line, "bad positive count"))?,
            converged: true,
        });
    }
    if records.is_empty() {
        return Err(Error::parse(path, 0, "no feature records"));
    }
    Ok(records)
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn tight_config() -> ProbeConfig {
        ProbeConfig {
            solver: LogisticOptions {
                tolerance: 1e-9,
                ..LogisticOptions::default()
            },
            ..ProbeConfig::default()
        }
    }

    fn random_design(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| rng.gen_range(-1.5..1.5))
    }

    /// Labels with `pos` positives planted on a margin along a random direction.
    fn planted_feature(
        rng: &mut ChaCha8Rng,
        n: usize,
        d: usize,
        pos: usize,
        margin: f64,
    ) -> (Array2<f64>, Vec<u8>) {
        let direction: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        let direction: Vec<f64> = direction.iter().map(|v| v / norm).collect();
        let mut x = random_design(rng, n, d);
        let mut labels = vec![0u8; n];
        for i in 0..n {
            let dot: f64 = (0..d).map(|j| x[(i, j)] * direction[j]).sum();
            let target = if i < pos { margin } else { -margin };
            let shift = target - dot;
            for j in 0..d {
                x[(i, j)] += shift * direction[j];
            }
            labels[i] = u8::from(i < pos);
        }
        (x, labels)
    }

    #[test]
    fn loocv_rejects_single_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_design(&mut rng, 10, 3);
        let mut labels = vec![0u8; 10];
        labels[0] = 1;
        assert!(matches!(
            loocv_objective(&labels, x.view(), 1.0, &ProbeConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn loocv_regularization_dominated_limit() {
        // At huge lambda every fold predicts the training base rate
        // q = (pos-1)/(n-1), so the objective is log q + log(1-q).
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 30;
        let pos = 6;
        let x = random_design(&mut rng, n, 4);
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i < pos)).collect();
        let outcome = loocv_objective(&labels, x.view(), 1e9, &tight_config()).unwrap();
        let q = (pos as f64 - 1.0) / (n as f64 - 1.0);
        let expected = q.ln() + (1.0 - q).ln();
        assert_relative_eq!(outcome.objective, expected, max_relative = 1e-3);
    }

    #[test]
    fn loocv_separable_feature_scores_near_zero() {
        // strongly separated positives: both terms of every fold approach 0
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, labels) = planted_feature(&mut rng, 24, 3, 8, 2.0);
        let outcome = loocv_objective(&labels, x.view(), 0.01, &tight_config()).unwrap();
        assert!(
            outcome.objective > 2.0 * 0.9f64.ln(),
            "objective {} too low for a separable feature",
            outcome.objective
        );
    }

    #[test]
    fn loocv_invariant_under_concept_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 25;
        let x = random_design(&mut rng, n, 3);
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 5 == 0)).collect();
        let base = loocv_objective(&labels, x.view(), 0.5, &tight_config())
            .unwrap()
            .objective;

        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let x_perm = x.select(ndarray::Axis(0), &perm);
        let labels_perm: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        let permuted = loocv_objective(&labels_perm, x_perm.view(), 0.5, &tight_config())
            .unwrap()
            .objective;
        assert!(
            (base - permuted).abs() < 1e-6,
            "permutation moved objective: {base} vs {permuted}"
        );
    }

    #[test]
    fn duplicated_negatives_equal_reweighted_negatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20;
        let pos = 5;
        let x = random_design(&mut rng, n, 3);
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i < pos)).collect();

        // variant A: every negative row listed twice
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
        let mut labels_dup = labels.clone();
        for i in pos..n {
            rows.push(x.row(i).to_vec());
            labels_dup.push(0);
        }
        let x_dup = crate::numerics::design_from_rows(&rows).unwrap();
        let dup = loocv_objective(&labels_dup, x_dup.view(), 0.7, &tight_config())
            .unwrap()
            .objective;

        // variant B: negatives carry weight 2 instead
        let weights: Vec<f64> = (0..n).map(|i| if i < pos { 1.0 } else { 2.0 }).collect();
        let reweighted =
            loocv_objective_weighted(&labels, x.view(), Some(&weights), 0.7, &tight_config())
                .unwrap()
                .objective;

        assert!(
            (dup - reweighted).abs() < 1e-6,
            "duplicated {dup} vs reweighted {reweighted}"
        );
    }

    #[test]
    fn select_lambda_singleton_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (x, labels) = planted_feature(&mut rng, 20, 2, 6, 1.0);
        let sel = select_lambda(&labels, x.view(), &[1.0], &ProbeConfig::default()).unwrap();
        assert_eq!(sel.lambda, 1.0);
    }

    #[test]
    fn select_lambda_tie_prefers_larger() {
        // a grid listing the same value twice scores identically; adding a
        // strictly dominated larger value must not win, and among exact ties
        // the larger lambda is returned
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (x, labels) = planted_feature(&mut rng, 20, 2, 6, 1.0);
        let once = select_lambda(&labels, x.view(), &[0.5], &ProbeConfig::default()).unwrap();
        let tied = select_lambda(&labels, x.view(), &[0.5, 0.5], &ProbeConfig::default()).unwrap();
        assert_eq!(once.objective, tied.objective);
        assert_eq!(tied.lambda, 0.5);
    }

    #[test]
    fn perfectly_linear_feature_scores_hundred() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (x, labels) = planted_feature(&mut rng, 60, 8, 12, 1.5);
        let record = score_feature(
            "synthetic",
            "visual-perceptual",
            &labels,
            x.view(),
            &default_lambda_grid(),
            &ProbeConfig::default(),
        )
        .unwrap();
        assert_eq!(record.f1, 100.0);
        assert_eq!(record.positive_count, 12);
    }

    #[test]
    fn probe_equivalence_under_joint_rescaling() {
        // scaling vectors by c with the grid scaled by c^2 keeps predictions
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x, labels) = planted_feature(&mut rng, 30, 4, 8, 0.6);
        let c = 2.5;
        let x_scaled = &x * c;
        let grid = default_lambda_grid();
        let grid_scaled: Vec<f64> = grid.iter().map(|l| l * c * c).collect();
        let cfg = tight_config();

        let sel_a = select_lambda(&labels, x.view(), &grid, &cfg).unwrap();
        let sel_b = select_lambda(&labels, x_scaled.view(), &grid_scaled, &cfg).unwrap();
        let idx_a = grid.iter().position(|&l| l == sel_a.lambda).unwrap();
        let idx_b = grid_scaled.iter().position(|&l| l == sel_b.lambda).unwrap();
        assert_eq!(idx_a, idx_b, "selected grid index must match under rescaling");

        let model_a =
            fit_logistic_weighted(x.view(), &labels, None, sel_a.lambda, &cfg.solver).unwrap();
        let model_b =
            fit_logistic_weighted(x_scaled.view(), &labels, None, sel_b.lambda, &cfg.solver)
                .unwrap();
        for i in 0..x.nrows() {
            let row_a: Vec<f64> = x.row(i).to_vec();
            let row_b: Vec<f64> = x_scaled.row(i).to_vec();
            assert_relative_eq!(
                model_a.predict_prob(&row_a),
                model_b.predict_prob(&row_b),
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn summary_groups_and_ci() {
        let mk = |name: &str, cat: &str, f1: f64| FeatureFitRecord {
            feature: name.into(),
            category: cat.into(),
            lambda: 1.0,
            loocv_objective: -0.5,
            f1,
            positive_count: 5,
            converged: true,
        };
        let records = vec![
            mk("a", "visual-perceptual", 40.0),
            mk("b", "visual-perceptual", 50.0),
            mk("c", "functional", 70.0),
            mk("d", "taxonomic", 80.0),
            mk("e", "encyclopedic", 10.0),
        ];
        let perceptual = vec!["visual-perceptual".to_string()];
        let non_perceptual = vec!["functional".to_string(), "taxonomic".to_string()];
        let summary = summarize_categories(
            &records,
            &perceptual,
            &non_perceptual,
            &BootstrapParams {
                resamples: 500,
                ..BootstrapParams::default()
            },
        )
        .unwrap();
        assert_relative_eq!(summary.median_difference, 75.0 - 45.0);
        // encyclopedic is reported but not tested
        assert!(summary.per_category_scores.contains_key("encyclopedic"));
        assert!(summary.ci.low <= summary.ci.high);
    }

    #[test]
    fn identical_groups_straddle_zero() {
        let mk = |name: &str, cat: &str, f1: f64| FeatureFitRecord {
            feature: name.into(),
            category: cat.into(),
            lambda: 1.0,
            loocv_objective: -0.5,
            f1,
            positive_count: 5,
            converged: true,
        };
        let scores = [30.0, 50.0, 70.0, 90.0];
        let mut records = Vec::new();
        for (i, &s) in scores.iter().enumerate() {
            records.push(mk(&format!("p{i}"), "perc", s));
            records.push(mk(&format!("n{i}"), "nonperc", s));
        }
        let summary = summarize_categories(
            &records,
            &["perc".to_string()],
            &["nonperc".to_string()],
            &BootstrapParams {
                resamples: 2000,
                ..BootstrapParams::default()
            },
        )
        .unwrap();
        assert!(summary.ci.straddles_zero());
    }

    #[test]
    fn comparison_hand_arithmetic() {
        let mk = |name: &str, f1: f64| FeatureFitRecord {
            feature: name.into(),
            category: "x".into(),
            lambda: 1.0,
            loocv_objective: -0.1,
            f1,
            positive_count: 5,
            converged: true,
        };
        let a = vec![mk("f1", 0.0), mk("f2", 50.0), mk("f3", 100.0)];
        let b = vec![mk("f1", 0.0), mk("f2", 25.0), mk("f3", 50.0)];
        let cmp = compare_representations(&a, &b).unwrap();
        assert_relative_eq!(cmp.slope, 0.5);
        assert_relative_eq!(cmp.pearson_r, 1.0);

        let self_cmp = compare_representations(&a, &a).unwrap();
        assert_relative_eq!(self_cmp.slope, 1.0);
        assert_relative_eq!(self_cmp.pearson_r, 1.0);
    }

    #[test]
    fn comparison_needs_three_shared() {
        let mk = |name: &str| FeatureFitRecord {
            feature: name.into(),
            category: "x".into(),
            lambda: 1.0,
            loocv_objective: -0.1,
            f1: 10.0,
            positive_count: 5,
            converged: true,
        };
        let a = vec![mk("f1"), mk("f2"), mk("f3")];
        let b = vec![mk("f1"), mk("f2"), mk("other")];
        assert!(compare_representations(&a, &b).is_err());
    }

    #[test]
    fn feature_csv_roundtrip() {
        let records = vec![FeatureFitRecord {
            feature: "has_a_tail".into(),
            category: "visual-perceptual".into(),
            lambda: 0.1,
            loocv_objective: -0.748291,
            f1: 87.5,
            positive_count: 11,
            converged: true,
        }];
        let mut buf = Vec::new();
        write_feature_csv(&records, &mut buf).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        std::io::Write::write_all(&mut f, &buf).unwrap();
        let back = read_feature_csv(f.path()).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].feature, "has_a_tail");
        assert_eq!(back[0].lambda, 0.1);
        assert_eq!(back[0].f1, 87.5);
    }
}
