//! The five subcommands. Each validates its inputs before touching the
//! output directory, so config failures never leave partial files behind.

use std::collections::BTreeMap;

use normprobe::conceptview::{build_profiles, profile_statistics, ConceptViewInputs};
use normprobe::domains::{agglomerate, domain_summary, write_concept_domain_csv, write_domain_csv};
use normprobe::featfit::{
    compare_representations, read_feature_csv, summarize_categories, write_feature_csv,
    BootstrapParams, FeatureFitRecord,
};
use normprobe::ingest::{load_frequency_table, load_ic_table, Taxonomy};

use crate::config::RunConfig;
use crate::pipeline::{load_aligned, obtain_records, OutputDir};
use crate::CliError;

fn bootstrap_params(config: &RunConfig) -> BootstrapParams {
    BootstrapParams {
        resamples: config.resamples,
        level: config.level,
        seed: config.seed,
    }
}

/// Per-concept median feature fit (percent) over its scored features.
fn concept_median_ff(
    data: &crate::pipeline::LoadedData,
    records: &[FeatureFitRecord],
) -> (Vec<String>, Vec<f64>, Vec<String>) {
    let score_of: BTreeMap<&str, f64> = records
        .iter()
        .map(|r| (r.feature.as_str(), r.f1))
        .collect();
    let lm = &data.aligned.label_matrix;
    let mut concepts = Vec::new();
    let mut medians = Vec::new();
    let mut skipped = Vec::new();
    for (idx, concept) in lm.concepts().iter().enumerate() {
        let scores: Vec<f64> = lm
            .features_of_concept(idx)
            .into_iter()
            .filter_map(|f| score_of.get(lm.features()[f].as_str()).copied())
            .collect();
        if scores.is_empty() {
            skipped.push(concept.clone());
        } else {
            concepts.push(concept.clone());
            medians.push(normprobe::numerics::median(&scores));
        }
    }
    (concepts, medians, skipped)
}

pub fn cmd_featfit(config: &RunConfig) -> Result<(), CliError> {
    config.validate_common()?;
    config.require_inputs(&[
        ("embedding", config.embedding.as_ref()),
        ("norms", config.norms.as_ref()),
    ])?;
    let out_path = config
        .out
        .clone()
        .ok_or_else(|| CliError::Config("missing required output directory (--out)".into()))?;

    let data = load_aligned(config)?;
    let records = obtain_records(config, &data)?;
    let summary = summarize_categories(
        &records,
        &config.perceptual,
        &config.non_perceptual,
        &bootstrap_params(config),
    )?;

    let out = OutputDir::acquire(&out_path)?;
    let mut csv = Vec::new();
    write_feature_csv(&records, &mut csv)?;
    out.write("features.csv", &csv)?;
    out.write(
        "categories.json",
        format!("{:#}\n", serde_json::to_value(&summary).map_err(CliError::runtime)?).as_bytes(),
    )?;
    write_warnings(&out, &data, &records, &[])?;
    out.write_manifest("featfit", config)?;

    eprintln!(
        "featfit: {} concepts, {} features, median diff {:.2} (CI {:.2}..{:.2})",
        data.aligned.concepts().len(),
        records.len(),
        summary.median_difference,
        summary.ci.low,
        summary.ci.high
    );
    Ok(())
}

pub fn cmd_compare(
    config: &RunConfig,
    a: &std::path::Path,
    b: &std::path::Path,
) -> Result<(), CliError> {
    let a = config.resolve(a);
    let b = config.resolve(b);
    for (name, path) in [("a", &a), ("b", &b)] {
        if !path.exists() {
            return Err(CliError::Config(format!(
                "{name} path does not exist: {}",
                path.display()
            )));
        }
    }
    let out_path = config
        .out
        .clone()
        .ok_or_else(|| CliError::Config("missing required output directory (--out)".into()))?;

    let records_a = read_feature_csv(&a)?;
    let records_b = read_feature_csv(&b)?;
    let comparison = compare_representations(&records_a, &records_b)?;

    let out = OutputDir::acquire(&out_path)?;
    let mut scatter = Vec::new();
    {
        use std::io::Write;
        writeln!(scatter, "feature,score_a,score_b").map_err(CliError::runtime)?;
        for (feature, sa, sb) in &comparison.pairs {
            writeln!(scatter, "{feature},{sa},{sb}").map_err(CliError::runtime)?;
        }
    }
    out.write("scatter.csv", &scatter)?;
    let stats = serde_json::json!({
        "slope": comparison.slope,
        "intercept": comparison.intercept,
        "pearson_r": comparison.pearson_r,
        "shared_features": comparison.pairs.len(),
    });
    out.write("comparison.json", format!("{:#}\n", stats).as_bytes())?;
    out.write_manifest("compare", config)?;

    eprintln!(
        "compare: {} shared features, slope {:.4}, r {:.4}",
        comparison.pairs.len(),
        comparison.slope,
        comparison.pearson_r
    );
    Ok(())
}

pub fn cmd_conceptview(config: &RunConfig) -> Result<(), CliError> {
    config.validate_common()?;
    config.require_inputs(&[
        ("embedding", config.embedding.as_ref()),
        ("norms", config.norms.as_ref()),
        ("wordnet", config.wordnet.as_ref()),
        ("ic", config.ic.as_ref()),
        ("frequency", config.frequency.as_ref()),
    ])?;
    let out_path = config
        .out
        .clone()
        .ok_or_else(|| CliError::Config("missing required output directory (--out)".into()))?;

    let data = load_aligned(config)?;
    let records = obtain_records(config, &data)?;
    let taxonomy = Taxonomy::from_wordnet_dir(config.resolve(config.wordnet.as_ref().unwrap()))?;
    let ic = load_ic_table(config.resolve(config.ic.as_ref().unwrap()))?;
    let frequency = load_frequency_table(config.resolve(config.frequency.as_ref().unwrap()))?;

    let output = build_profiles(&ConceptViewInputs {
        label_matrix: &data.aligned.label_matrix,
        embeddings: data.design.view(),
        records: &records,
        norms: &data.norms,
        taxonomy: &taxonomy,
        ic: &ic,
        frequency: &frequency,
        lsa: config.lsa_policy(),
    })?;
    let statistics = profile_statistics(&output.profiles)?;

    let out = OutputDir::acquire(&out_path)?;
    let mut profile_csv = Vec::new();
    normprobe::conceptview::write_profile_csv(&output.profiles, &mut profile_csv)?;
    out.write("profiles.csv", &profile_csv)?;
    let stats = serde_json::json!({
        "r_norms_taxonomy": statistics.r_norms_taxonomy,
        "r_norms_median_ff": statistics.r_norms_median_ff,
        "f_test": serde_json::to_value(&statistics.f_test).map_err(CliError::runtime)?,
        "profiles": statistics.profile_count,
        "dropped": output.dropped.len(),
        "lsa_k": output.lsa_k,
    });
    out.write("statistics.json", format!("{:#}\n", stats).as_bytes())?;
    if config.emit_matrices {
        for (name, matrix) in [
            ("matrix_embedding.csv", &output.embedding_matrix),
            ("matrix_lsa.csv", &output.lsa_matrix),
            ("matrix_resnik.csv", &output.resnik_matrix),
        ] {
            let mut buf = Vec::new();
            matrix.write_csv(&mut buf)?;
            out.write(name, &buf)?;
        }
    }
    let dropped: Vec<String> = output
        .dropped
        .iter()
        .map(|(c, why)| format!("{c}: {why}"))
        .collect();
    write_warnings(&out, &data, &records, &dropped)?;
    out.write_manifest("conceptview", config)?;

    eprintln!(
        "conceptview: {} profiles (lsa k = {}), r(m_norms, m_taxonomy) = {:.4}, r(m_norms, median_ff) = {:.4}, F = {:.3} (p = {:.3e})",
        statistics.profile_count,
        output.lsa_k,
        statistics.r_norms_taxonomy,
        statistics.r_norms_median_ff,
        statistics.f_test.f_statistic,
        statistics.f_test.p_value
    );
    Ok(())
}

pub fn cmd_domains(config: &RunConfig) -> Result<(), CliError> {
    config.validate_common()?;
    config.require_inputs(&[
        ("embedding", config.embedding.as_ref()),
        ("norms", config.norms.as_ref()),
    ])?;
    let out_path = config
        .out
        .clone()
        .ok_or_else(|| CliError::Config("missing required output directory (--out)".into()))?;

    let data = load_aligned(config)?;
    let records = obtain_records(config, &data)?;
    let (concepts, medians, skipped) = concept_median_ff(&data, &records);
    if config.clusters > concepts.len() {
        return Err(CliError::Config(format!(
            "clusters = {} exceeds the {} concepts available",
            config.clusters,
            concepts.len()
        )));
    }

    // LSA vectors for exactly the concepts that carry a feature-fit score
    let lm = &data.aligned.label_matrix;
    let y = lm.to_f64();
    let (lsa_all, lsa_k) =
        normprobe::conceptview::lsa_concept_vectors_with_policy(y.view(), config.lsa_policy())?;
    let keep: Vec<usize> = concepts
        .iter()
        .map(|c| lm.concept_index(c).expect("concept from matrix"))
        .collect();
    let lsa = lsa_all.select(ndarray::Axis(0), &keep);

    let ff_map: BTreeMap<String, f64> = concepts
        .iter()
        .cloned()
        .zip(medians.iter().copied())
        .collect();

    let mut alphas = vec![config.alpha];
    if !config.alpha_sweep.is_empty() {
        alphas = config.alpha_sweep.clone();
    }

    let out = OutputDir::acquire(&out_path)?;
    for &alpha in &alphas {
        let clustering = agglomerate(&concepts, lsa.view(), &medians, alpha, config.clusters)?;
        let summaries = domain_summary(&clustering, &ff_map)?;

        let suffix = if alphas.len() == 1 {
            String::new()
        } else {
            format!("-alpha{alpha}")
        };
        let mut csv = Vec::new();
        write_domain_csv(&summaries, &mut csv)?;
        out.write(&format!("domains{suffix}.csv"), &csv)?;
        let mut plot = Vec::new();
        write_concept_domain_csv(&clustering, &ff_map, &mut plot)?;
        out.write(&format!("concept_domains{suffix}.csv"), &plot)?;

        eprintln!(
            "domains: alpha = {alpha}, {} domains over {} concepts (lsa k = {lsa_k})",
            summaries.len(),
            concepts.len()
        );
    }
    write_warnings(&out, &data, &records, &skipped)?;
    out.write_manifest("domains", config)?;
    Ok(())
}

pub fn cmd_selftest() -> Result<(), CliError> {
    let checks = normprobe::selftest::run_all();
    let mut failures = 0;
    for check in &checks {
        let status = if check.passed { "pass" } else { "FAIL" };
        println!("{status}  {}  {}", check.name, check.detail);
        if !check.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CliError::Runtime(format!("{failures} self-test checks failed")));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}

/// warnings.json: alignment drops plus probes that failed to converge.
fn write_warnings(
    out: &OutputDir,
    data: &crate::pipeline::LoadedData,
    records: &[FeatureFitRecord],
    extra: &[String],
) -> Result<(), CliError> {
    let mut nonconverged: Vec<&str> = records
        .iter()
        .filter(|r| !r.converged)
        .map(|r| r.feature.as_str())
        .collect();
    nonconverged.sort_unstable();
    let warnings = serde_json::json!({
        "dropped_excluded": data.aligned.dropped_excluded,
        "dropped_missing_vector": data.aligned.dropped_missing_vector,
        "dropped_features_below_threshold": data.aligned.dropped_features,
        "nonconverged_probes": nonconverged,
        "notes": extra,
    });
    out.write("warnings.json", format!("{:#}\n", warnings).as_bytes())?;
    Ok(())
}
