//! Noun taxonomy: word -> synsets and synset -> hypernym edges.
//!
//! Two ways in: parse the standard WordNet database layout (`index.noun` +
//! `data.noun`), or assemble a hand-built taxonomy through the builder
//! methods (used by the oracle tests and available for custom hierarchies).
//! Synset ids from the WordNet reader are `"<8-digit-offset>-n"`; hand-built
//! taxonomies may use any strings, as long as the information-content table
//! uses the same ids.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    synsets_of_word: HashMap<String, Vec<String>>,
    hypernyms_of: HashMap<String, Vec<String>>,
}

impl Taxonomy {
    pub fn new() -> Self {
        Taxonomy::default()
    }

    /// Registers a synset and its hypernym edges. Re-registering extends the
    /// edge list.
    pub fn add_synset(&mut self, id: impl Into<String>, hypernyms: &[&str]) {
        let entry = self.hypernyms_of.entry(id.into()).or_default();
        entry.extend(hypernyms.iter().map(|h| h.to_string()));
    }

    /// Maps a word onto its synsets (appending to any existing mapping).
    pub fn add_word(&mut self, word: impl Into<String>, synsets: &[&str]) {
        let entry = self.synsets_of_word.entry(word.into()).or_default();
        entry.extend(synsets.iter().map(|s| s.to_string()));
    }

    /// Synsets of a word under WordNet lemma conventions (lowercase, spaces
    /// as underscores). `None` when the word is absent.
    pub fn synsets(&self, word: &str) -> Option<&[String]> {
        let lemma = normalize_lemma(word);
        self.synsets_of_word.get(&lemma).map(Vec::as_slice)
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.synsets(word).is_some()
    }

    pub fn sense_count(&self, word: &str) -> usize {
        self.synsets(word).map_or(0, <[String]>::len)
    }

    pub fn hypernyms(&self, synset_id: &str) -> &[String] {
        self.hypernyms_of
            .get(synset_id)
            .map_or(&[], Vec::as_slice)
    }

    /// Hypernym closure of a synset, including the synset itself.
    pub fn ancestors(&self, synset_id: &str) -> HashSet<String> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(synset_id.to_string());
        queue.push_back(synset_id.to_string());
        while let Some(current) = queue.pop_front() {
            for parent in self.hypernyms(&current) {
                if seen.insert(parent.clone()) {
                    queue.push_back(parent.clone());
                }
            }
        }
        seen
    }

    pub fn synset_count(&self) -> usize {
        self.hypernyms_of.len()
    }

    pub fn word_count(&self) -> usize {
        self.synsets_of_word.len()
    }

    /// Reads the noun hierarchy from a WordNet database directory containing
    /// `index.noun` and `data.noun`.
    pub fn from_wordnet_dir(dir: impl AsRef<Path>) -> Result<Taxonomy> {
        let dir = dir.as_ref();
        let mut taxonomy = Taxonomy::new();
        taxonomy.read_index(&dir.join("index.noun"))?;
        taxonomy.read_data(&dir.join("data.noun"))?;
        Ok(taxonomy)
    }

    fn read_index(&mut self, path: &Path) -> Result<()> {
        let file = File::open(path)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.starts_with(' ') || line.is_empty() {
                continue; // license header
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            // lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt offsets...
            if tokens.len() < 6 {
                return Err(Error::parse(path, line_no, "short index record"));
            }
            let lemma = tokens[0];
            let pos = tokens[1];
            if pos != "n" {
                continue;
            }
            let synset_cnt: usize = tokens[2]
                .parse()
                .map_err(|_| Error::parse(path, line_no, "bad synset count"))?;
            let p_cnt: usize = tokens[3]
                .parse()
                .map_err(|_| Error::parse(path, line_no, "bad pointer count"))?;
            let offsets_start = 4 + p_cnt + 2; // skip ptr symbols, sense_cnt, tagsense_cnt
            if tokens.len() < offsets_start + synset_cnt {
                return Err(Error::parse(path, line_no, "truncated index record"));
            }
            let mut ids = Vec::with_capacity(synset_cnt);
            for raw in &tokens[offsets_start..offsets_start + synset_cnt] {
                let offset: u64 = raw
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, format!("bad offset {raw:?}")))?;
                ids.push(synset_id(offset));
            }
            let entry = self
                .synsets_of_word
                .entry(lemma.to_string())
                .or_default();
            entry.extend(ids);
        }
        Ok(())
    }

    fn read_data(&mut self, path: &Path) -> Result<()> {
        let file = File::open(path)
            .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.starts_with(' ') || line.is_empty() {
                continue;
            }
            let body = line.split('|').next().unwrap_or(&line);
            let tokens: Vec<&str> = body.split_whitespace().collect();
            // offset lex_filenum ss_type w_cnt [word lex_id]... p_cnt [ptr]...
            if tokens.len() < 4 {
                return Err(Error::parse(path, line_no, "short data record"));
            }
            let offset: u64 = tokens[0]
                .parse()
                .map_err(|_| Error::parse(path, line_no, "bad synset offset"))?;
            let w_cnt = usize::from_str_radix(tokens[3], 16)
                .map_err(|_| Error::parse(path, line_no, "bad word count"))?;
            let p_cnt_idx = 4 + 2 * w_cnt;
            if tokens.len() <= p_cnt_idx {
                return Err(Error::parse(path, line_no, "truncated data record"));
            }
            let p_cnt: usize = tokens[p_cnt_idx]
                .parse()
                .map_err(|_| Error::parse(path, line_no, "bad pointer count"))?;
            let mut hypernyms = Vec::new();
            for p in 0..p_cnt {
                let base = p_cnt_idx + 1 + 4 * p;
                if tokens.len() < base + 4 {
                    return Err(Error::parse(path, line_no, "truncated pointer list"));
                }
                let symbol = tokens[base];
                let target: u64 = tokens[base + 1]
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, "bad pointer offset"))?;
                let target_pos = tokens[base + 2];
                if (symbol == "@" || symbol == "@i") && target_pos == "n" {
                    hypernyms.push(synset_id(target));
                }
            }
            let entry = self.hypernyms_of.entry(synset_id(offset)).or_default();
            entry.extend(hypernyms);
        }
        Ok(())
    }
}

fn synset_id(offset: u64) -> String {
    format!("{offset:08}-n")
}

fn normalize_lemma(word: &str) -> String {
    word.to_lowercase().replace(' ', "_")
}
