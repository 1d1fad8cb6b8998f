//! Shared pipeline stages: input loading, alignment, probe caching, and the
//! output directory protocol (lockfile, manifests, deterministic bytes).

use std::collections::HashSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use normprobe::featfit::{score_all_features, FeatureFitRecord, ProbeConfig};
use normprobe::ingest::{
    embedding_matrix, filter_and_align, parse_embedding_file_filtered, parse_norm_file,
    AlignedData, EmbeddingTable, NormDataset,
};
use normprobe::numerics::LogisticOptions;

use crate::config::RunConfig;
use crate::CliError;

pub struct LoadedData {
    pub norms: NormDataset,
    pub aligned: AlignedData,
    pub design: ndarray::Array2<f64>,
}

/// Parses norms, embeddings (vocabulary-filtered to the norm concepts), and
/// the exclusion list, then aligns everything into the label matrix.
pub fn load_aligned(config: &RunConfig) -> Result<LoadedData, CliError> {
    let norms_path = config.resolve(config.norms.as_ref().expect("validated"));
    let schema = config.schema()?;
    let norms = parse_norm_file(&norms_path, &schema)?;

    let vocabulary: HashSet<String> = norms
        .concepts()
        .iter()
        .map(|c| c.to_lowercase())
        .collect();

    let embedding_path = config.resolve(config.embedding.as_ref().expect("validated"));
    let (table, report) =
        parse_embedding_file_filtered(&embedding_path, config.embedding_format, &vocabulary)?;
    if report.duplicates_dropped > 0 {
        eprintln!(
            "warning: {} duplicate vectors dropped from {}",
            report.duplicates_dropped,
            embedding_path.display()
        );
    }

    let mut align_tables: Vec<EmbeddingTable> = Vec::new();
    for path in &config.align_with {
        let path = config.resolve(path);
        let (extra, _) =
            parse_embedding_file_filtered(&path, config.align_with_format, &vocabulary)?;
        align_tables.push(extra);
    }

    let exclusions = match &config.exclusions {
        Some(path) => read_exclusions(&config.resolve(path))?,
        None => Vec::new(),
    };

    let mut tables: Vec<&EmbeddingTable> = vec![&table];
    tables.extend(align_tables.iter());
    let aligned = filter_and_align(&norms, &tables, &exclusions, config.min_concepts)?;
    let design = embedding_matrix(aligned.concepts(), &table)?;

    Ok(LoadedData {
        norms,
        aligned,
        design,
    })
}

fn read_exclusions(path: &Path) -> Result<Vec<String>, CliError> {
    let contents = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read exclusions {}: {e}", path.display())))?;
    Ok(contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn probe_config(config: &RunConfig) -> ProbeConfig {
    ProbeConfig {
        solver: LogisticOptions {
            intercept: config.intercept,
            ..LogisticOptions::default()
        },
        f1_mode: config.f1_mode,
    }
}

/// Returns per-feature records: from `--features`, from the probe cache, or
/// by running the probes (and filling the cache).
pub fn obtain_records(
    config: &RunConfig,
    data: &LoadedData,
) -> Result<Vec<FeatureFitRecord>, CliError> {
    if let Some(path) = &config.features {
        return Ok(normprobe::featfit::read_feature_csv(config.resolve(path))?);
    }

    let cache_key = probe_cache_key(config, data)?;
    let cache_path = cache_dir(config).join(format!("probes-{cache_key}.json"));
    if !config.no_cache {
        if let Ok(bytes) = fs::read(&cache_path) {
            if let Ok(records) = serde_json::from_slice::<Vec<FeatureFitRecord>>(&bytes) {
                eprintln!("probe cache hit: {}", cache_path.display());
                return Ok(records);
            }
        }
    }

    let records = score_all_features(
        &data.aligned.label_matrix,
        data.design.view(),
        |feature| {
            data.norms
                .category(feature)
                .unwrap_or("uncategorized")
                .to_string()
        },
        &config.lambda_grid,
        &probe_config(config),
    )?;

    if !config.no_cache {
        if let Some(parent) = cache_path.parent() {
            fs::create_dir_all(parent).map_err(CliError::runtime)?;
        }
        let bytes = serde_json::to_vec(&records).map_err(CliError::runtime)?;
        fs::write(&cache_path, bytes).map_err(CliError::runtime)?;
    }
    Ok(records)
}

fn cache_dir(config: &RunConfig) -> PathBuf {
    match &config.cache_dir {
        Some(dir) => dir.clone(),
        None => PathBuf::from(".normprobe-cache"),
    }
}

/// Cache key: embedding file content, label-matrix content, lambda grid, and
/// the probe options. Any input change changes the key.
fn probe_cache_key(config: &RunConfig, data: &LoadedData) -> Result<String, CliError> {
    let mut hasher = Sha256::new();
    let embedding_path = config.resolve(config.embedding.as_ref().expect("validated"));
    hash_file(&mut hasher, &embedding_path)?;

    let lm = &data.aligned.label_matrix;
    for concept in lm.concepts() {
        hasher.update(concept.as_bytes());
        hasher.update([0u8]);
    }
    for feature in lm.features() {
        hasher.update(feature.as_bytes());
        hasher.update([0u8]);
    }
    hasher.update(lm.matrix().iter().copied().collect::<Vec<u8>>());

    for lambda in &config.lambda_grid {
        hasher.update(lambda.to_le_bytes());
    }
    hasher.update([u8::from(config.intercept)]);
    hasher.update([match config.f1_mode {
        normprobe::featfit::F1Mode::InSample => 0u8,
        normprobe::featfit::F1Mode::LeaveOneOut => 1u8,
    }]);
    Ok(hex(&hasher.finalize()))
}

fn hash_file(hasher: &mut Sha256, path: &Path) -> Result<(), CliError> {
    let mut file = fs::File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf).map_err(CliError::runtime)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(())
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    hex(&hasher.finalize())
}

/// Output directory with an exclusive lockfile, released on drop. Manifest
/// contents carry the config hash and library version but no timestamps, so
/// identical runs produce identical bytes.
pub struct OutputDir {
    dir: PathBuf,
    lock: PathBuf,
}

impl OutputDir {
    pub fn acquire(dir: &Path) -> Result<OutputDir, CliError> {
        fs::create_dir_all(dir).map_err(CliError::runtime)?;
        let lock = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(OutputDir {
                dir: dir.to_path_buf(),
                lock,
            }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Runtime(
                format!(
                    "output directory {} is locked by another run (remove {} if stale)",
                    dir.display(),
                    lock.display()
                ),
            )),
            Err(e) => Err(CliError::runtime(e)),
        }
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(CliError::runtime)?;
        Ok(path)
    }

    pub fn write_manifest(&self, command: &str, config: &RunConfig) -> Result<(), CliError> {
        let manifest = serde_json::json!({
            "command": command,
            "config_hash": sha256_hex(config.canonical_string().as_bytes()),
            "version": normprobe::VERSION,
        });
        self.write(
            "manifest.json",
            format!("{:#}\n", manifest).as_bytes(),
        )?;
        Ok(())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
