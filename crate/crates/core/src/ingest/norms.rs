//! Semantic-norm dataset ingestion: delimited exports of concept/feature
//! production norms, with a schema config mapping column names to roles.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::{Error, Result};

/// Column mapping plus category-label normalization for a norm export.
#[derive(Debug, Clone)]
pub struct NormSchema {
    pub concept_column: String,
    pub feature_column: String,
    pub category_column: String,
    pub count_column: String,
    pub delimiter: u8,
    /// Native category label -> canonical label. Labels not in the map pass
    /// through unchanged.
    pub category_map: BTreeMap<String, String>,
}

impl Default for NormSchema {
    fn default() -> Self {
        NormSchema {
            concept_column: "concept".into(),
            feature_column: "feature".into(),
            category_column: "category".into(),
            count_column: "count".into(),
            delimiter: b',',
            category_map: BTreeMap::new(),
        }
    }
}

impl NormSchema {
    fn normalize_category(&self, raw: &str) -> String {
        let trimmed = raw.trim();
        self.category_map
            .get(trimmed)
            .cloned()
            .unwrap_or_else(|| trimmed.to_string())
    }
}

/// Concepts, features, per-feature category labels, and per-pair production
/// counts (how many participants named the feature for the concept).
#[derive(Debug, Clone, Default)]
pub struct NormDataset {
    concepts: Vec<String>,
    concept_set: HashSet<String>,
    features: Vec<String>,
    categories: HashMap<String, String>,
    pairs: HashMap<(String, String), u32>,
}

impl NormDataset {
    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn category(&self, feature: &str) -> Option<&str> {
        self.categories.get(feature).map(String::as_str)
    }

    pub fn production_count(&self, concept: &str, feature: &str) -> Option<u32> {
        self.pairs
            .get(&(concept.to_string(), feature.to_string()))
            .copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.pairs.iter().map(|((c, f), &n)| (c.as_str(), f.as_str(), n))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Number of distinct features listed for a concept.
    pub fn features_of_concept(&self, concept: &str) -> usize {
        self.pairs.keys().filter(|(c, _)| c == concept).count()
    }

    /// Sum of production counts over all of a concept's features.
    pub fn report_total_of_concept(&self, concept: &str) -> u64 {
        self.pairs
            .iter()
            .filter(|((c, _), _)| c == concept)
            .map(|(_, &n)| n as u64)
            .sum()
    }

    /// Concepts bearing a feature.
    pub fn concepts_of_feature(&self, feature: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .pairs
            .keys()
            .filter(|(_, f)| f == feature)
            .map(|(c, _)| c.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn mean_concepts_per_feature(&self) -> f64 {
        self.pairs.len() as f64 / self.features.len() as f64
    }

    pub fn mean_features_per_concept(&self) -> f64 {
        self.pairs.len() as f64 / self.concepts.len() as f64
    }

    fn add_row(&mut self, concept: &str, feature: &str, category: String, count: u32) -> Result<()> {
        if !self.categories.contains_key(feature) {
            self.features.push(feature.to_string());
            self.categories.insert(feature.to_string(), category);
        } else if self.categories[feature] != category {
            return Err(Error::InvalidInput(format!(
                "feature {feature:?} listed under two categories: {:?} and {category:?}",
                self.categories[feature]
            )));
        }
        if self.concept_set.insert(concept.to_string()) {
            self.concepts.push(concept.to_string());
        }
        // repeated pairs accumulate their counts
        *self
            .pairs
            .entry((concept.to_string(), feature.to_string()))
            .or_insert(0) += count;
        Ok(())
    }
}

/// Reads a delimited norm export under the given schema.
pub fn parse_norm_file(path: impl AsRef<Path>, schema: &NormSchema) -> Result<NormDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Config(format!("cannot open norm file {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!(
                "norm file {} has no column {name:?} (headers: {})",
                path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let concept_idx = column(&schema.concept_column)?;
    let feature_idx = column(&schema.feature_column)?;
    let category_idx = column(&schema.category_column)?;
    let count_idx = column(&schema.count_column)?;

    let mut dataset = NormDataset::default();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        let field = |idx: usize| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| Error::parse(path, line, "short record"))
        };
        let concept = field(concept_idx)?;
        let feature = field(feature_idx)?;
        let category = schema.normalize_category(field(category_idx)?);
        let raw_count = field(count_idx)?;
        let count: u32 = raw_count.parse().map_err(|_| {
            Error::parse(
                path,
                line,
                format!("production count {raw_count:?} is not an integer"),
            )
        })?;
        if count == 0 {
            return Err(Error::parse(path, line, "production count must be positive"));
        }
        if concept.is_empty() || feature.is_empty() {
            return Err(Error::parse(path, line, "empty concept or feature name"));
        }
        dataset.add_row(concept, feature, category, count)?;
    }
    if dataset.pairs.is_empty() {
        return Err(Error::parse(path, 0, "norm file contains no rows"));
    }
    Ok(dataset)
}
