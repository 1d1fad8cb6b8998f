//! Parsing of plain-text word-vector files (GloVe-style, with or without the
//! word2vec `count dim` header line).

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// One record per line: `<word> <v1> ... <vd>`.
    PlainText,
    /// First line is `<count> <dim>`, then plain-text records.
    HeaderText,
}

impl EmbeddingFormat {
    pub fn parse_name(name: &str) -> Result<Self> {
        match name {
            "plain-text" | "plain" => Ok(EmbeddingFormat::PlainText),
            "header-text" | "header" => Ok(EmbeddingFormat::HeaderText),
            other => Err(Error::Config(format!(
                "unknown embedding format {other:?} (expected plain-text or header-text)"
            ))),
        }
    }
}

/// Word-to-vector map with a fixed dimensionality. Lookup of an absent word
/// is a `None`, never a default vector.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
    /// lowercase form -> first-seen original key, for case-folded fallback
    folded: HashMap<String, String>,
}

/// What the parser skipped or collapsed while reading a file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmbeddingParseReport {
    pub records: usize,
    pub duplicates_dropped: usize,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Self {
        EmbeddingTable {
            dimension,
            entries: HashMap::new(),
            folded: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts a vector; returns false (and keeps the existing entry) when the
    /// word is already present.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::InvalidInput(format!(
                "vector for {word:?} has {} components, table dimension is {}",
                vector.len(),
                self.dimension
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "vector for {word:?} has non-finite components"
            )));
        }
        if self.entries.contains_key(word) {
            return Ok(false);
        }
        self.folded
            .entry(word.to_lowercase())
            .or_insert_with(|| word.to_string());
        self.entries.insert(word.to_string(), vector);
        Ok(true)
    }

    /// Exact-case lookup.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }

    /// Exact-case lookup first, case-folded fallback second.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        if let Some(v) = self.entries.get(word) {
            return Some(v.as_slice());
        }
        self.folded
            .get(&word.to_lowercase())
            .and_then(|orig| self.entries.get(orig))
            .map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Serializes in the plain-text format, words in lexicographic order so
    /// output bytes are reproducible.
    pub fn write_plain_text(&self, out: &mut impl Write) -> Result<()> {
        let mut words: Vec<&String> = self.entries.keys().collect();
        words.sort();
        for word in words {
            write!(out, "{word}")?;
            for v in &self.entries[word] {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Parses a whole embedding file.
pub fn parse_embedding_file(
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
) -> Result<(EmbeddingTable, EmbeddingParseReport)> {
    parse_impl(path.as_ref(), format, None)
}

/// Parses only the records whose case-folded word appears in `vocabulary`
/// (already lowercased). Large pretrained files hold millions of words; the
/// pipeline only ever needs vectors for the norm concepts.
pub fn parse_embedding_file_filtered(
    path: impl AsRef<Path>,
    format: EmbeddingFormat,
    vocabulary: &HashSet<String>,
) -> Result<(EmbeddingTable, EmbeddingParseReport)> {
    parse_impl(path.as_ref(), format, Some(vocabulary))
}

fn parse_impl(
    path: &Path,
    format: EmbeddingFormat,
    vocabulary: Option<&HashSet<String>>,
) -> Result<(EmbeddingTable, EmbeddingParseReport)> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot open embedding file {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let mut declared: Option<(usize, usize)> = None;
    if format == EmbeddingFormat::HeaderText {
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 0, "empty file"))?;
        let first = first?;
        let mut parts = first.split_whitespace();
        let count = parts
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(path, 1, "header must start with a vocabulary count"))?;
        let dim = parts
            .next()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(path, 1, "header must give the dimension"))?;
        if parts.next().is_some() {
            return Err(Error::parse(path, 1, "header has trailing tokens"));
        }
        declared = Some((count, dim));
    }

    let mut table: Option<EmbeddingTable> = declared.map(|(_, dim)| EmbeddingTable::new(dim));
    let mut report = EmbeddingParseReport::default();

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "blank record"))?;

        if let Some(vocab) = vocabulary {
            if !vocab.contains(&word.to_lowercase()) {
                // still validate shape cheaply: count components
                let n = parts.count();
                if let Some(t) = &table {
                    if n != t.dimension() {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("expected {} components, found {n}", t.dimension()),
                        ));
                    }
                }
                report.records += 1;
                continue;
            }
        }

        let mut vector = Vec::with_capacity(table.as_ref().map_or(16, EmbeddingTable::dimension));
        for token in parts {
            let value: f64 = token.parse().map_err(|_| {
                Error::parse(path, line_no, format!("non-numeric component {token:?}"))
            })?;
            vector.push(value);
        }
        if vector.is_empty() {
            return Err(Error::parse(path, line_no, "record has no components"));
        }

        let t = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
        if vector.len() != t.dimension() {
            return Err(Error::parse(
                path,
                line_no,
                format!(
                    "expected {} components, found {}",
                    t.dimension(),
                    vector.len()
                ),
            ));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(path, line_no, "non-finite component"));
        }
        if t.insert(word, vector)? {
            report.records += 1;
        } else {
            report.duplicates_dropped += 1;
        }
    }

    let table = table.ok_or_else(|| Error::parse(path, 0, "empty file"))?;
    if table.is_empty() && vocabulary.is_none() {
        return Err(Error::parse(path, 0, "no records in file"));
    }
    if let Some((count, _)) = declared {
        if vocabulary.is_none() && table.len() + report.duplicates_dropped != count {
            return Err(Error::parse(
                path,
                0,
                format!(
                    "header declared {count} records, file contains {}",
                    table.len() + report.duplicates_dropped
                ),
            ));
        }
    }
    Ok((table, report))
}
