//! Run configuration: defaults, key=value config file, flag overrides, and
//! validation. Flags always win over the config file; the config file wins
//! over defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use normprobe::conceptview::LsaPolicy;
use normprobe::featfit::{default_lambda_grid, F1Mode};
use normprobe::ingest::{EmbeddingFormat, NormSchema};

use crate::CliError;

/// Environment variable naming the default data directory; relative input
/// paths resolve against it when set.
pub const DATA_DIR_ENV: &str = "NORMPROBE_DATA_DIR";

#[derive(Debug, Clone)]
pub struct RunConfig {
    // input paths
    pub embedding: Option<PathBuf>,
    pub embedding_format: EmbeddingFormat,
    pub align_with: Vec<PathBuf>,
    pub align_with_format: EmbeddingFormat,
    pub norms: Option<PathBuf>,
    pub exclusions: Option<PathBuf>,
    pub category_map: Option<PathBuf>,
    pub wordnet: Option<PathBuf>,
    pub ic: Option<PathBuf>,
    pub frequency: Option<PathBuf>,
    pub features: Option<PathBuf>,
    // norm schema columns
    pub concept_column: String,
    pub feature_column: String,
    pub category_column: String,
    pub count_column: String,
    // probe parameters
    pub min_concepts: usize,
    pub lambda_grid: Vec<f64>,
    pub intercept: bool,
    pub f1_mode: F1Mode,
    // bootstrap
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
    // category groups for the median-difference test
    pub perceptual: Vec<String>,
    pub non_perceptual: Vec<String>,
    // concept view
    pub lsa_k: Option<usize>,
    pub lsa_mass: f64,
    pub lsa_cap: usize,
    pub emit_matrices: bool,
    // domains
    pub alpha: f64,
    pub alpha_sweep: Vec<f64>,
    pub clusters: usize,
    // output
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub no_cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            embedding: None,
            embedding_format: EmbeddingFormat::PlainText,
            align_with: Vec::new(),
            align_with_format: EmbeddingFormat::PlainText,
            norms: None,
            exclusions: None,
            category_map: None,
            wordnet: None,
            ic: None,
            frequency: None,
            features: None,
            concept_column: "concept".into(),
            feature_column: "feature".into(),
            category_column: "category".into(),
            count_column: "count".into(),
            min_concepts: 5,
            lambda_grid: default_lambda_grid(),
            intercept: true,
            f1_mode: F1Mode::InSample,
            resamples: 10_000,
            level: 0.95,
            seed: 1,
            perceptual: vec!["visual-perceptual".into(), "other-perceptual".into()],
            non_perceptual: vec!["functional".into(), "taxonomic".into()],
            lsa_k: None,
            lsa_mass: 0.9,
            lsa_cap: 300,
            emit_matrices: false,
            alpha: 1.0,
            alpha_sweep: Vec::new(),
            clusters: 40,
            out: None,
            cache_dir: None,
            no_cache: false,
        }
    }
}

impl RunConfig {
    pub fn lsa_policy(&self) -> LsaPolicy {
        match self.lsa_k {
            Some(k) => LsaPolicy::Fixed(k),
            None => LsaPolicy::Auto {
                mass: self.lsa_mass,
                cap: self.lsa_cap,
            },
        }
    }

    pub fn schema(&self) -> Result<NormSchema, CliError> {
        let mut schema = NormSchema {
            concept_column: self.concept_column.clone(),
            feature_column: self.feature_column.clone(),
            category_column: self.category_column.clone(),
            count_column: self.count_column.clone(),
            ..NormSchema::default()
        };
        if let Some(path) = &self.category_map {
            for (key, value) in read_key_value_file(path)? {
                schema.category_map.insert(key, value);
            }
        }
        Ok(schema)
    }

    /// Applies one config-file entry. Unknown keys are config errors so that
    /// typos never silently fall back to defaults.
    fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("bad value for {key}: {what}"));
        match key {
            "embedding" => self.embedding = Some(PathBuf::from(value)),
            "embedding_format" => {
                self.embedding_format =
                    EmbeddingFormat::parse_name(value).map_err(|e| bad(&e.to_string()))?
            }
            "align_with" => {
                self.align_with = value.split(',').map(PathBuf::from).collect();
            }
            "align_with_format" => {
                self.align_with_format =
                    EmbeddingFormat::parse_name(value).map_err(|e| bad(&e.to_string()))?
            }
            "norms" => self.norms = Some(PathBuf::from(value)),
            "exclusions" => self.exclusions = Some(PathBuf::from(value)),
            "category_map" => self.category_map = Some(PathBuf::from(value)),
            "wordnet" => self.wordnet = Some(PathBuf::from(value)),
            "ic" => self.ic = Some(PathBuf::from(value)),
            "frequency" => self.frequency = Some(PathBuf::from(value)),
            "features" => self.features = Some(PathBuf::from(value)),
            "concept_column" => self.concept_column = value.to_string(),
            "feature_column" => self.feature_column = value.to_string(),
            "category_column" => self.category_column = value.to_string(),
            "count_column" => self.count_column = value.to_string(),
            "min_concepts" => {
                self.min_concepts = value.parse().map_err(|_| bad("expected integer"))?
            }
            "lambda_grid" => self.lambda_grid = parse_f64_list(value).map_err(|e| bad(&e))?,
            "intercept" => self.intercept = parse_bool(value).map_err(|e| bad(&e))?,
            "f1_mode" => self.f1_mode = parse_f1_mode(value)?,
            "resamples" => self.resamples = value.parse().map_err(|_| bad("expected integer"))?,
            "level" => self.level = value.parse().map_err(|_| bad("expected number"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("expected integer"))?,
            "perceptual" => self.perceptual = parse_string_list(value),
            "non_perceptual" => self.non_perceptual = parse_string_list(value),
            "lsa_k" => self.lsa_k = Some(value.parse().map_err(|_| bad("expected integer"))?),
            "lsa_mass" => self.lsa_mass = value.parse().map_err(|_| bad("expected number"))?,
            "lsa_cap" => self.lsa_cap = value.parse().map_err(|_| bad("expected integer"))?,
            "emit_matrices" => self.emit_matrices = parse_bool(value).map_err(|e| bad(&e))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad("expected number"))?,
            "alpha_sweep" => self.alpha_sweep = parse_f64_list(value).map_err(|e| bad(&e))?,
            "clusters" => self.clusters = value.parse().map_err(|_| bad("expected integer"))?,
            "out" => self.out = Some(PathBuf::from(value)),
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            "no_cache" => self.no_cache = parse_bool(value).map_err(|e| bad(&e))?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown config key {other:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        for (key, value) in read_key_value_file(path)? {
            self.apply(&key, &value)?;
        }
        Ok(())
    }

    /// Resolves an input path against the data directory when relative.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_relative() {
            if let Ok(base) = std::env::var(DATA_DIR_ENV) {
                if !base.is_empty() {
                    return PathBuf::from(base).join(path);
                }
            }
        }
        path.to_path_buf()
    }

    /// Common sanity checks shared by every subcommand.
    pub fn validate_common(&self) -> Result<(), CliError> {
        if !(0.0 < self.level && self.level < 1.0) {
            return Err(CliError::Config(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.resamples < 100 {
            return Err(CliError::Config(format!(
                "resamples must be at least 100, got {}",
                self.resamples
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(CliError::Config("lambda grid is empty".into()));
        }
        if self.lambda_grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(CliError::Config(
                "lambda grid values must be finite and nonnegative".into(),
            ));
        }
        if self.alpha < 0.0 || self.alpha_sweep.iter().any(|a| *a < 0.0) {
            return Err(CliError::Config("alpha must be nonnegative".into()));
        }
        if self.clusters < 1 {
            return Err(CliError::Config("clusters must be at least 1".into()));
        }
        if !(0.0 < self.lsa_mass && self.lsa_mass <= 1.0) {
            return Err(CliError::Config(format!(
                "lsa_mass must lie in (0, 1], got {}",
                self.lsa_mass
            )));
        }
        Ok(())
    }

    /// Requires a set of named paths to be configured and existing on disk.
    pub fn require_inputs(&self, inputs: &[(&str, Option<&PathBuf>)]) -> Result<(), CliError> {
        for (name, path) in inputs {
            let Some(path) = path else {
                return Err(CliError::Config(format!("missing required input: {name}")));
            };
            let resolved = self.resolve(path);
            if !resolved.exists() {
                return Err(CliError::Config(format!(
                    "{name} path does not exist: {}",
                    resolved.display()
                )));
            }
        }
        Ok(())
    }

    /// Canonical string rendering of the full configuration; its hash keys
    /// manifests and caches.
    pub fn canonical_string(&self) -> String {
        let mut fields: BTreeMap<&str, String> = BTreeMap::new();
        let path_str = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| self.resolve(p).display().to_string())
                .unwrap_or_default()
        };
        fields.insert("embedding", path_str(&self.embedding));
        fields.insert("embedding_format", format!("{:?}", self.embedding_format));
        fields.insert(
            "align_with",
            self.align_with
                .iter()
                .map(|p| self.resolve(p).display().to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        fields.insert(
            "align_with_format",
            format!("{:?}", self.align_with_format),
        );
        fields.insert("norms", path_str(&self.norms));
        fields.insert("exclusions", path_str(&self.exclusions));
        fields.insert("category_map", path_str(&self.category_map));
        fields.insert("wordnet", path_str(&self.wordnet));
        fields.insert("ic", path_str(&self.ic));
        fields.insert("frequency", path_str(&self.frequency));
        fields.insert("features", path_str(&self.features));
        fields.insert(
            "schema",
            format!(
                "{},{},{},{}",
                self.concept_column, self.feature_column, self.category_column, self.count_column
            ),
        );
        fields.insert("min_concepts", self.min_concepts.to_string());
        fields.insert(
            "lambda_grid",
            self.lambda_grid
                .iter()
                .map(|l| format!("{:e}", l))
                .collect::<Vec<_>>()
                .join(","),
        );
        fields.insert("intercept", self.intercept.to_string());
        fields.insert("f1_mode", format!("{:?}", self.f1_mode));
        fields.insert("resamples", self.resamples.to_string());
        fields.insert("level", self.level.to_string());
        fields.insert("seed", self.seed.to_string());
        fields.insert("perceptual", self.perceptual.join(","));
        fields.insert("non_perceptual", self.non_perceptual.join(","));
        fields.insert(
            "lsa",
            match self.lsa_k {
                Some(k) => format!("fixed:{k}"),
                None => format!("auto:{}:{}", self.lsa_mass, self.lsa_cap),
            },
        );
        fields.insert("emit_matrices", self.emit_matrices.to_string());
        fields.insert("alpha", self.alpha.to_string());
        fields.insert(
            "alpha_sweep",
            self.alpha_sweep
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        fields.insert("clusters", self.clusters.to_string());
        let mut out = String::new();
        for (key, value) in fields {
            let _ = writeln!(out, "{key}={value}");
        }
        out
    }
}

pub fn parse_f1_mode(value: &str) -> Result<F1Mode, CliError> {
    match value {
        "in-sample" => Ok(F1Mode::InSample),
        "leave-one-out" => Ok(F1Mode::LeaveOneOut),
        other => Err(CliError::Config(format!(
            "f1 mode must be in-sample or leave-one-out, got {other:?}"
        ))),
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(format!("expected boolean, got {other:?}")),
    }
}

fn parse_f64_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("expected number, got {t:?}"))
        })
        .collect()
}

fn parse_string_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn read_key_value_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let contents = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut pairs = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                idx + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}
