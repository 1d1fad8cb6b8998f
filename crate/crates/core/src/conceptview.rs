//! The concept view: compact LSA vectors for concepts, pairwise similarity
//! matrices under three metrics (embedding cosine, norm-LSA cosine, WordNet
//! Resnik), per-concept correlations between the metrics' similarity rows,
//! and a baseline-controlled F-test of whether cross-metric agreement
//! predicts feature fit.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::featfit::FeatureFitRecord;
use crate::ingest::{FrequencyTable, IcTable, LabelMatrix, NormDataset, Taxonomy};
use crate::numerics::{median, nested_f_test, pearson, truncated_svd, FTestResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricKind {
    EmbeddingCosine,
    NormsLsaCosine,
    WordnetResnik,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::EmbeddingCosine => "embedding-cosine",
            MetricKind::NormsLsaCosine => "norms-lsa-cosine",
            MetricKind::WordnetResnik => "wordnet-resnik",
        }
    }
}

/// Symmetric pairwise similarity matrix over an ordered concept list.
///
/// All three metrics store *similarities*: the diagonal holds each metric's
/// self-similarity maximum (1 for cosine, the concept's own information
/// content for Resnik).
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub metric: MetricKind,
    concepts: Vec<String>,
    values: Array2<f64>,
}

impl DistanceMatrix {
    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn concept_index(&self, concept: &str) -> Option<usize> {
        self.concepts.iter().position(|c| c == concept)
    }

    /// Row of similarities for concept `i` with the self-entry removed.
    pub fn row_without_self(&self, i: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.concepts.len() - 1);
        for j in 0..self.concepts.len() {
            if j != i {
                row.push(self.values[(i, j)]);
            }
        }
        row
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        write!(out, "concept")?;
        for c in &self.concepts {
            write!(out, ",{c}")?;
        }
        writeln!(out)?;
        for i in 0..self.concepts.len() {
            write!(out, "{}", self.concepts[i])?;
            for j in 0..self.concepts.len() {
                write!(out, ",{}", self.values[(i, j)])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// How many LSA dimensions to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LsaPolicy {
    /// Smallest k whose leading singular values retain at least `mass` of the
    /// total squared singular mass, capped at `cap`.
    Auto { mass: f64, cap: usize },
    Fixed(usize),
}

impl Default for LsaPolicy {
    fn default() -> Self {
        LsaPolicy::Auto {
            mass: 0.9,
            cap: 300,
        }
    }
}

/// Smallest k retaining `mass` of the squared singular mass.
pub fn mass_dimension(singular_values: &[f64], mass: f64, cap: usize) -> usize {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 1;
    }
    let mut acc = 0.0;
    for (i, s) in singular_values.iter().enumerate() {
        acc += s * s;
        if acc >= mass * total {
            return (i + 1).min(cap).max(1);
        }
    }
    singular_values.len().min(cap).max(1)
}

/// Rank-k LSA embedding of the label-matrix rows: left singular vectors
/// scaled by their singular values.
pub fn lsa_concept_vectors(y: ArrayView2<f64>, k: usize) -> Result<Array2<f64>> {
    let svd = truncated_svd(y, k)?;
    Ok(&svd.u * &svd.s)
}

/// LSA vectors with the dimension chosen by policy. Returns the vectors and
/// the dimension used.
pub fn lsa_concept_vectors_with_policy(
    y: ArrayView2<f64>,
    policy: LsaPolicy,
) -> Result<(Array2<f64>, usize)> {
    match policy {
        LsaPolicy::Fixed(k) => Ok((lsa_concept_vectors(y, k)?, k)),
        LsaPolicy::Auto { mass, cap } => {
            let full_k = y.nrows().min(y.ncols());
            let svd = truncated_svd(y, full_k)?;
            let k = mass_dimension(svd.s.as_slice().expect("contiguous"), mass, cap);
            let scaled = &svd.u.slice(ndarray::s![.., ..k]) * &svd.s.slice(ndarray::s![..k]);
            Ok((scaled, k))
        }
    }
}

/// Pairwise cosine-similarity matrix over row vectors.
pub fn pairwise_cosine(
    concepts: &[String],
    vectors: ArrayView2<f64>,
    metric: MetricKind,
) -> Result<DistanceMatrix> {
    let n = concepts.len();
    if vectors.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "{} concepts but {} vector rows",
            n,
            vectors.nrows()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vectors.row(i).to_vec()).collect();
    let triangles: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    crate::numerics::cosine_sim(&rows[i], &rows[j]).map_err(|_| {
                        Error::InvalidInput(format!(
                            "cosine undefined between {:?} and {:?} (zero vector)",
                            concepts[i], concepts[j]
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        values[(i, i)] = 1.0;
        for (offset, &v) in triangles[i].iter().enumerate() {
            let j = i + 1 + offset;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(DistanceMatrix {
        metric,
        concepts: concepts.to_vec(),
        values,
    })
}

/// Resnik similarity between two words: the highest information content
/// among common hypernym ancestors, maximized over all noun synset pairs.
pub fn resnik_sim(word_a: &str, word_b: &str, taxonomy: &Taxonomy, ic: &IcTable) -> Result<f64> {
    let union_a = word_ancestor_union(word_a, taxonomy)?;
    let union_b = word_ancestor_union(word_b, taxonomy)?;
    Ok(best_common_ic(&union_a, &union_b, ic))
}

/// Union of all ancestors over a word's synsets (each synset counts as its
/// own ancestor). A common ancestor of some synset pair is exactly a member
/// of both words' unions.
fn word_ancestor_union(word: &str, taxonomy: &Taxonomy) -> Result<HashSet<String>> {
    let synsets = taxonomy
        .synsets(word)
        .ok_or_else(|| Error::InvalidInput(format!("word {word:?} absent from taxonomy")))?;
    if synsets.is_empty() {
        return Err(Error::InvalidInput(format!(
            "word {word:?} has no synsets in the taxonomy"
        )));
    }
    let mut union = HashSet::new();
    for synset in synsets {
        union.extend(taxonomy.ancestors(synset));
    }
    Ok(union)
}

fn best_common_ic(a: &HashSet<String>, b: &HashSet<String>, ic: &IcTable) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0.0f64;
    for id in small {
        if large.contains(id) {
            if let Some(value) = ic.get(id) {
                best = best.max(value);
            }
        }
    }
    best
}

/// Pairwise Resnik similarity matrix. Errors list the first unresolvable
/// concept.
pub fn pairwise_resnik(
    concepts: &[String],
    taxonomy: &Taxonomy,
    ic: &IcTable,
) -> Result<DistanceMatrix> {
    let n = concepts.len();
    let unions: Vec<HashSet<String>> = concepts
        .iter()
        .map(|c| word_ancestor_union(c, taxonomy))
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| best_common_ic(&unions[i], &unions[j], ic))
                .collect()
        })
        .collect();

    let mut values = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for (offset, &v) in rows[i].iter().enumerate() {
            let j = i + offset;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(DistanceMatrix {
        metric: MetricKind::WordnetResnik,
        concepts: concepts.to_vec(),
        values,
    })
}

/// Pearson correlation between a concept's similarity rows under two metrics,
/// self-entries removed from both.
pub fn concept_correlation(a: &DistanceMatrix, b: &DistanceMatrix, concept: &str) -> Result<f64> {
    if a.concepts != b.concepts {
        return Err(Error::InvalidInput(
            "matrices do not share a concept ordering".into(),
        ));
    }
    let idx = a
        .concept_index(concept)
        .ok_or_else(|| Error::InvalidInput(format!("concept {concept:?} not in matrix")))?;
    pearson(&a.row_without_self(idx), &b.row_without_self(idx))
}

/// One concept's cross-metric agreement scores plus baseline covariates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConceptProfile {
    pub concept: String,
    /// Pearson r between the embedding similarity row and the norms-LSA row.
    pub m_norms: f64,
    /// Pearson r between the embedding similarity row and the Resnik row.
    pub m_taxonomy: f64,
    /// Median feature fit over the concept's surviving features, percent.
    pub median_ff: f64,
    pub log_frequency: f64,
    pub log_feature_count: f64,
    pub log_report_total: f64,
    pub sense_count: f64,
}

/// Everything the concept view consumes. The embedding rows must align with
/// `label_matrix.concepts()`.
pub struct ConceptViewInputs<'a> {
    pub label_matrix: &'a LabelMatrix,
    pub embeddings: ArrayView2<'a, f64>,
    pub records: &'a [FeatureFitRecord],
    pub norms: &'a NormDataset,
    pub taxonomy: &'a Taxonomy,
    pub ic: &'a IcTable,
    pub frequency: &'a FrequencyTable,
    pub lsa: LsaPolicy,
}

pub struct ConceptViewOutput {
    pub profiles: Vec<ConceptProfile>,
    pub lsa_k: usize,
    pub embedding_matrix: DistanceMatrix,
    pub lsa_matrix: DistanceMatrix,
    pub resnik_matrix: DistanceMatrix,
    /// (concept, reason) pairs for concepts without a complete profile.
    pub dropped: Vec<(String, String)>,
}

/// Builds per-concept profiles: restricts to concepts resolvable in the
/// taxonomy with at least one scored feature, builds the three similarity
/// matrices over that set, and computes the m correlations and covariates.
pub fn build_profiles(inputs: &ConceptViewInputs) -> Result<ConceptViewOutput> {
    let lm = inputs.label_matrix;
    let concepts = lm.concepts();
    if inputs.embeddings.nrows() != concepts.len() {
        return Err(Error::InvalidInput(format!(
            "embedding matrix has {} rows for {} concepts",
            inputs.embeddings.nrows(),
            concepts.len()
        )));
    }
    let score_of: HashMap<&str, f64> = inputs
        .records
        .iter()
        .map(|r| (r.feature.as_str(), r.f1))
        .collect();

    // LSA runs on the full aligned label matrix; rows are then restricted to
    // the usable subset.
    let y = lm.to_f64();
    let (lsa_vectors, lsa_k) = lsa_concept_vectors_with_policy(y.view(), inputs.lsa)?;

    let mut dropped: Vec<(String, String)> = Vec::new();
    let mut usable: Vec<usize> = Vec::new();
    for (idx, concept) in concepts.iter().enumerate() {
        if !inputs.taxonomy.contains_word(concept) {
            dropped.push((concept.clone(), "not in taxonomy".into()));
            continue;
        }
        let scored: Vec<f64> = lm
            .features_of_concept(idx)
            .into_iter()
            .filter_map(|f| score_of.get(lm.features()[f].as_str()).copied())
            .collect();
        if scored.is_empty() {
            dropped.push((concept.clone(), "no scored features".into()));
            continue;
        }
        usable.push(idx);
    }
    if usable.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} concepts usable for the concept view",
            usable.len()
        )));
    }

    let subset: Vec<String> = usable.iter().map(|&i| concepts[i].clone()).collect();
    let embed_rows = inputs.embeddings.select(ndarray::Axis(0), &usable);
    let lsa_rows = lsa_vectors.select(ndarray::Axis(0), &usable);

    let embedding_matrix =
        pairwise_cosine(&subset, embed_rows.view(), MetricKind::EmbeddingCosine)?;
    let lsa_matrix = pairwise_cosine(&subset, lsa_rows.view(), MetricKind::NormsLsaCosine)?;
    let resnik_matrix = pairwise_resnik(&subset, inputs.taxonomy, inputs.ic)?;

    let mut profiles = Vec::with_capacity(subset.len());
    for (pos, &orig_idx) in usable.iter().enumerate() {
        let concept = &subset[pos];
        let m_norms = match concept_correlation(&embedding_matrix, &lsa_matrix, concept) {
            Ok(v) => v,
            Err(_) => {
                dropped.push((concept.clone(), "degenerate norms correlation".into()));
                continue;
            }
        };
        let m_taxonomy = match concept_correlation(&embedding_matrix, &resnik_matrix, concept) {
            Ok(v) => v,
            Err(_) => {
                dropped.push((concept.clone(), "degenerate taxonomy correlation".into()));
                continue;
            }
        };
        let scored: Vec<f64> = lm
            .features_of_concept(orig_idx)
            .into_iter()
            .filter_map(|f| score_of.get(lm.features()[f].as_str()).copied())
            .collect();
        profiles.push(ConceptProfile {
            concept: concept.clone(),
            m_norms,
            m_taxonomy,
            median_ff: median(&scored),
            log_frequency: (inputs.frequency.count_or_floor(concept) as f64).ln(),
            log_feature_count: (inputs.norms.features_of_concept(concept) as f64).ln(),
            log_report_total: (inputs.norms.report_total_of_concept(concept) as f64).ln(),
            sense_count: inputs.taxonomy.sense_count(concept) as f64,
        });
    }

    Ok(ConceptViewOutput {
        profiles,
        lsa_k,
        embedding_matrix,
        lsa_matrix,
        resnik_matrix,
        dropped,
    })
}

/// Headline statistics over the profiles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileStatistics {
    /// r between m(embedding, norms) and m(embedding, taxonomy).
    pub r_norms_taxonomy: f64,
    /// r between m(embedding, norms) and the median feature fit.
    pub r_norms_median_ff: f64,
    /// F-test of median feature fit on baseline covariates vs baseline plus
    /// m(embedding, norms).
    pub f_test: FTestResult,
    pub profile_count: usize,
}

pub fn profile_statistics(profiles: &[ConceptProfile]) -> Result<ProfileStatistics> {
    if profiles.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "need at least 10 complete profiles, got {}",
            profiles.len()
        )));
    }
    let m_norms: Vec<f64> = profiles.iter().map(|p| p.m_norms).collect();
    let m_taxonomy: Vec<f64> = profiles.iter().map(|p| p.m_taxonomy).collect();
    let median_ff: Vec<f64> = profiles.iter().map(|p| p.median_ff).collect();

    let n = profiles.len();
    let mut x_base = Array2::<f64>::zeros((n, 5));
    let mut x_extra = Array2::<f64>::zeros((n, 1));
    for (i, p) in profiles.iter().enumerate() {
        x_base[(i, 0)] = 1.0;
        x_base[(i, 1)] = p.log_frequency;
        x_base[(i, 2)] = p.log_feature_count;
        x_base[(i, 3)] = p.log_report_total;
        x_base[(i, 4)] = p.sense_count;
        x_extra[(i, 0)] = p.m_norms;
    }
    Ok(ProfileStatistics {
        r_norms_taxonomy: pearson(&m_norms, &m_taxonomy)?,
        r_norms_median_ff: pearson(&m_norms, &median_ff)?,
        f_test: nested_f_test(&median_ff, x_base.view(), x_extra.view())?,
        profile_count: n,
    })
}

/// Profile CSV: concept, m_norms, m_taxonomy, median_ff, four covariates.
pub fn write_profile_csv(profiles: &[ConceptProfile], out: &mut impl Write) -> Result<()> {
    writeln!(
        out,
        "concept,m_norms,m_taxonomy,median_ff,log_frequency,log_feature_count,log_report_total,sense_count"
    )?;
    for p in profiles {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.concept,
            p.m_norms,
            p.m_taxonomy,
            p.median_ff,
            p.log_frequency,
            p.log_feature_count,
            p.log_report_total,
            p.sense_count
        )?;
    }
    Ok(())
}
