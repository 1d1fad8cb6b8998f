//! Key/value lookup tables: synset information content and corpus word
//! frequency. Plain two-column whitespace-delimited files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::{Error, Result};

/// Synset id -> information content (-log of the synset's corpus probability).
#[derive(Debug, Clone, Default)]
pub struct IcTable {
    values: HashMap<String, f64>,
}

impl IcTable {
    pub fn get(&self, synset_id: &str) -> Option<f64> {
        self.values.get(synset_id).copied()
    }

    pub fn insert(&mut self, synset_id: impl Into<String>, ic: f64) {
        self.values.insert(synset_id.into(), ic);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Word -> corpus occurrence count.
#[derive(Debug, Clone, Default)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
}

impl FrequencyTable {
    pub fn get(&self, word: &str) -> Option<u64> {
        self.counts.get(word).copied()
    }

    /// Count with the add-nothing floor: absent words map to 1 so that
    /// log-frequency is always defined.
    pub fn count_or_floor(&self, word: &str) -> u64 {
        self.get(word).unwrap_or(1).max(1)
    }

    pub fn insert(&mut self, word: impl Into<String>, count: u64) {
        self.counts.insert(word.into(), count);
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Reads `<synset-id> <ic-value>` lines. Negative values are rejected.
pub fn load_ic_table(path: impl AsRef<Path>) -> Result<IcTable> {
    let path = path.as_ref();
    let mut table = IcTable::default();
    for (line_no, line) in open_lines(path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "missing synset id"))?;
        let raw = parts
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "missing ic value"))?;
        let value: f64 = raw
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad ic value {raw:?}")))?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::parse(
                path,
                line_no,
                format!("ic value must be finite and nonnegative, got {value}"),
            ));
        }
        table.insert(key, value);
    }
    Ok(table)
}

/// Reads `<word> <count>` lines. Negative counts are unrepresentable and any
/// non-integer token is a parse error.
pub fn load_frequency_table(path: impl AsRef<Path>) -> Result<FrequencyTable> {
    let path = path.as_ref();
    let mut table = FrequencyTable::default();
    for (line_no, line) in open_lines(path)? {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "missing word"))?;
        let raw = parts
            .next()
            .ok_or_else(|| Error::parse(path, line_no, "missing count"))?;
        let count: u64 = raw
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad count {raw:?}")))?;
        table.insert(word, count);
    }
    Ok(table)
}

fn open_lines(
    path: &Path,
) -> Result<impl Iterator<Item = (usize, std::io::Result<String>)> + '_> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot open table {}: {e}", path.display())))?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l)))
}
