//! Filtering and alignment of a norm dataset against one or more embedding
//! tables, producing the binary concept-by-feature label matrix in canonical
//! (lexicographic) concept order.

use std::collections::HashSet;

use ndarray::Array2;

use crate::ingest::{EmbeddingTable, NormDataset};
use crate::{Error, Result};

/// Binary label matrix: rows are concepts in lexicographic order, columns are
/// surviving features in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    concepts: Vec<String>,
    features: Vec<String>,
    y: Array2<u8>,
}

impl LabelMatrix {
    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn matrix(&self) -> &Array2<u8> {
        &self.y
    }

    pub fn concept_index(&self, concept: &str) -> Option<usize> {
        self.concepts.binary_search_by(|c| c.as_str().cmp(concept)).ok()
    }

    pub fn feature_index(&self, feature: &str) -> Option<usize> {
        self.features.binary_search_by(|f| f.as_str().cmp(feature)).ok()
    }

    /// Label column for one feature, indexed by concept.
    pub fn feature_labels(&self, feature_idx: usize) -> Vec<u8> {
        self.y.column(feature_idx).to_vec()
    }

    pub fn positive_count(&self, feature_idx: usize) -> usize {
        self.y
            .column(feature_idx)
            .iter()
            .filter(|&&v| v == 1)
            .count()
    }

    /// Indices of the features a concept bears.
    pub fn features_of_concept(&self, concept_idx: usize) -> Vec<usize> {
        self.y
            .row(concept_idx)
            .iter()
            .enumerate()
            .filter_map(|(j, &v)| (v == 1).then_some(j))
            .collect()
    }

    pub fn to_f64(&self) -> Array2<f64> {
        self.y.mapv(f64::from)
    }
}

/// Alignment output plus an account of what was dropped and why, so runs on
/// real datasets can report their delta against expected concept counts.
#[derive(Debug, Clone)]
pub struct AlignedData {
    pub label_matrix: LabelMatrix,
    pub dropped_excluded: Vec<String>,
    pub dropped_missing_vector: Vec<String>,
    pub dropped_features: usize,
}

impl AlignedData {
    pub fn concepts(&self) -> &[String] {
        self.label_matrix.concepts()
    }
}

/// Aligns a norm dataset with the supplied embedding tables.
///
/// Drops concepts named in `exclusions`, then concepts lacking a vector in
/// *any* table (exact-case lookup with case-folded fallback), then features
/// with fewer than `min_concepts` surviving positive concepts. Ordering of
/// the output is lexicographic in both axes regardless of source-file order.
pub fn filter_and_align(
    norms: &NormDataset,
    embeddings: &[&EmbeddingTable],
    exclusions: &[String],
    min_concepts: usize,
) -> Result<AlignedData> {
    let excluded: HashSet<&str> = exclusions.iter().map(String::as_str).collect();

    let mut dropped_excluded = Vec::new();
    let mut dropped_missing_vector = Vec::new();
    let mut kept: Vec<String> = Vec::new();
    for concept in norms.concepts() {
        if excluded.contains(concept.as_str()) {
            dropped_excluded.push(concept.clone());
        } else if embeddings.iter().any(|table| !table.contains(concept)) {
            dropped_missing_vector.push(concept.clone());
        } else {
            kept.push(concept.clone());
        }
    }
    if kept.is_empty() {
        return Err(Error::InvalidInput(
            "no norm concept has a vector in every embedding table".into(),
        ));
    }
    kept.sort_unstable();
    kept.dedup();
    dropped_excluded.sort_unstable();
    dropped_missing_vector.sort_unstable();

    let kept_set: HashSet<&str> = kept.iter().map(String::as_str).collect();
    let mut features: Vec<String> = Vec::new();
    let mut dropped_features = 0usize;
    for feature in norms.features() {
        let positives = norms
            .concepts_of_feature(feature)
            .iter()
            .filter(|c| kept_set.contains(**c))
            .count();
        if positives >= min_concepts {
            features.push(feature.clone());
        } else {
            dropped_features += 1;
        }
    }
    features.sort_unstable();

    let mut y = Array2::<u8>::zeros((kept.len(), features.len()));
    for (j, feature) in features.iter().enumerate() {
        for concept in norms.concepts_of_feature(feature) {
            if let Ok(i) = kept.binary_search_by(|c| c.as_str().cmp(concept)) {
                y[(i, j)] = 1;
            }
        }
    }

    Ok(AlignedData {
        label_matrix: LabelMatrix {
            concepts: kept,
            features,
            y,
        },
        dropped_excluded,
        dropped_missing_vector,
        dropped_features,
    })
}

/// Stacks the vectors of `concepts` (in the given order) into a design
/// matrix. Errors on any concept without a vector.
pub fn embedding_matrix(concepts: &[String], table: &EmbeddingTable) -> Result<Array2<f64>> {
    let mut out = Array2::<f64>::zeros((concepts.len(), table.dimension()));
    for (i, concept) in concepts.iter().enumerate() {
        let vector = table.lookup(concept).ok_or_else(|| {
            Error::InvalidInput(format!("concept {concept:?} has no embedding vector"))
        })?;
        for (j, &v) in vector.iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_norm_file, NormSchema};
    use std::io::Write as _;

    fn toy_embeddings(words: &[&str]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        for (i, w) in words.iter().enumerate() {
            t.insert(w, vec![i as f64, 1.0]).unwrap();
        }
        t
    }

    fn toy_norms() -> NormDataset {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        // zebra precedes apple in the file: output order must not care
        write!(
            f,
            "concept,feature,category,count\n\
             zebra,has_stripes,visual,7\n\
             zebra,is_animal,taxonomic,5\n\
             apple,is_food,functional,6\n\
             apple,is_animal,taxonomic,2\n\
             banana,is_food,functional,4\n\
             banana,is_animal,taxonomic,3\n\
             cherry,is_food,functional,2\n\
             cherry,is_animal,taxonomic,2\n\
             dog,is_animal,taxonomic,9\n\
             elk,is_animal,taxonomic,4\n"
        )
        .unwrap();
        parse_norm_file(f.path(), &NormSchema::default()).unwrap()
    }

    #[test]
    fn alignment_filters_and_sorts() {
        let norms = toy_norms();
        let emb = toy_embeddings(&["zebra", "apple", "banana", "cherry", "dog", "elk"]);
        let aligned = filter_and_align(&norms, &[&emb], &[], 5).unwrap();
        let lm = &aligned.label_matrix;
        assert_eq!(
            lm.concepts(),
            ["apple", "banana", "cherry", "dog", "elk", "zebra"]
        );
        // is_animal has 6 positives; is_food 3; has_stripes 1
        assert_eq!(lm.features(), ["is_animal"]);
        assert_eq!(aligned.dropped_features, 2);
        assert_eq!(lm.positive_count(0), 6);
    }

    #[test]
    fn missing_vectors_drop_concepts_everywhere() {
        let norms = toy_norms();
        let emb_all = toy_embeddings(&["zebra", "apple", "banana", "cherry", "dog", "elk"]);
        let emb_partial = toy_embeddings(&["apple", "banana", "cherry", "dog", "elk"]);
        let aligned = filter_and_align(&norms, &[&emb_all, &emb_partial], &[], 2).unwrap();
        assert!(!aligned.concepts().contains(&"zebra".to_string()));
        assert_eq!(aligned.dropped_missing_vector, ["zebra"]);
    }

    #[test]
    fn exclusion_list_applies() {
        let norms = toy_norms();
        let emb = toy_embeddings(&["zebra", "apple", "banana", "cherry", "dog", "elk"]);
        let aligned = filter_and_align(&norms, &[&emb], &["dog".to_string()], 2).unwrap();
        assert!(!aligned.concepts().contains(&"dog".to_string()));
        assert_eq!(aligned.dropped_excluded, ["dog"]);
    }

    #[test]
    fn threshold_rule_drops_small_features() {
        let norms = toy_norms();
        let emb = toy_embeddings(&["zebra", "apple", "banana", "cherry", "dog", "elk"]);
        // is_food has 3 positive concepts
        let with3 = filter_and_align(&norms, &[&emb], &[], 3).unwrap();
        assert!(with3.label_matrix.feature_index("is_food").is_some());
        let with4 = filter_and_align(&norms, &[&emb], &[], 4).unwrap();
        assert!(with4.label_matrix.feature_index("is_food").is_none());
    }

    #[test]
    fn empty_intersection_is_error() {
        let norms = toy_norms();
        let emb = toy_embeddings(&["pluto"]);
        assert!(filter_and_align(&norms, &[&emb], &[], 2).is_err());
    }

    #[test]
    fn column_sums_respect_threshold() {
        let norms = toy_norms();
        let emb = toy_embeddings(&["zebra", "apple", "banana", "cherry", "dog", "elk"]);
        let aligned = filter_and_align(&norms, &[&emb], &[], 3).unwrap();
        for j in 0..aligned.label_matrix.features().len() {
            assert!(aligned.label_matrix.positive_count(j) >= 3);
        }
    }

    #[test]
    fn case_folded_lookup_counts_as_present() {
        let norms = toy_norms();
        let mut emb = toy_embeddings(&["apple", "banana", "cherry", "dog", "elk"]);
        emb.insert("Zebra", vec![9.0, 1.0]).unwrap();
        let aligned = filter_and_align(&norms, &[&emb], &[], 2).unwrap();
        assert!(aligned.concepts().contains(&"zebra".to_string()));
        let x = embedding_matrix(aligned.concepts(), &emb).unwrap();
        let zi = aligned
            .label_matrix
            .concept_index("zebra")
            .unwrap();
        assert_eq!(x[(zi, 0)], 9.0);
    }
}
