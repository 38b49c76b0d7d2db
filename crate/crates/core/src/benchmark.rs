//! Evaluation criteria: the Plutchik emotion matrix and flat keyword lists.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One criterion: a label and the token chunk that represents it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BenchmarkEntry {
    pub label: String,
    pub chunk: Vec<String>,
}

/// An ordered list of labelled keyword chunks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Benchmark {
    entries: Vec<BenchmarkEntry>,
}

impl Benchmark {
    pub fn new(entries: Vec<BenchmarkEntry>) -> Result<Self> {
        let mut labels = HashSet::new();
        for entry in &entries {
            if entry.chunk.is_empty() {
                return Err(Error::input(format!(
                    "empty chunk for label {:?}",
                    entry.label
                )));
            }
            if !labels.insert(entry.label.as_str()) {
                return Err(Error::input(format!("duplicate label {:?}", entry.label)));
            }
        }
        Ok(Benchmark { entries })
    }

    pub fn entries(&self) -> &[BenchmarkEntry] {
        &self.entries
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `label: token [token ...]` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries: Vec<BenchmarkEntry> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = n + 1;
            let (label, chunk) = line.split_once(':').ok_or_else(|| {
                Error::parse(origin, lineno, "expected `label: token [token ...]`")
            })?;
            let label = label.trim();
            if label.is_empty() {
                return Err(Error::parse(origin, lineno, "empty label"));
            }
            let chunk: Vec<String> = chunk.split_whitespace().map(str::to_owned).collect();
            if chunk.is_empty() {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("empty chunk for {label:?}"),
                ));
            }
            if entries.iter().any(|e| e.label == label) {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("duplicate label {label:?}"),
                ));
            }
            entries.push(BenchmarkEntry {
                label: label.to_owned(),
                chunk,
            });
        }
        Ok(Benchmark { entries })
    }
}

pub fn load_benchmark(path: &Path) -> Result<Benchmark> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    Benchmark::parse(&text, &path.display().to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Intensity {
    Low,
    Mid,
    High,
}

impl Intensity {
    pub const ALL: [Intensity; 3] = [Intensity::Low, Intensity::Mid, Intensity::High];

    pub fn column(self) -> usize {
        self as usize
    }
}

pub const CHANNELS: usize = 8;

/// A named sum of two adjacent channels' mid-intensity scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub first: &'static str,
    pub second: &'static str,
    pub name: &'static str,
    /// Channel (row) indices of `first` and `second`.
    pub channels: (usize, usize),
}

/// Plutchik's wheel: 8 channels × (low, mid, high) intensity words and the
/// 8 primary dyads formed by adjacent channels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmotionBenchmark {
    pub matrix: [[&'static str; 3]; CHANNELS],
    pub conditions: [Condition; CHANNELS],
}

const MATRIX: [[&str; 3]; CHANNELS] = [
    ["serenity", "joy", "ecstasy"],
    ["acceptance", "trust", "admiration"],
    ["apprehension", "fear", "terror"],
    ["distraction", "surprise", "amazement"],
    ["pensiveness", "sadness", "grief"],
    ["boredom", "disgust", "loathing"],
    ["annoyance", "anger", "rage"],
    ["interest", "anticipation", "vigilance"],
];

const CONDITION_NAMES: [&str; CHANNELS] = [
    "love",
    "submission",
    "awe",
    "disapproval",
    "remorse",
    "contempt",
    "aggressiveness",
    "optimism",
];

/// The Plutchik emotion benchmark.
pub fn plutchik() -> EmotionBenchmark {
    let conditions = std::array::from_fn(|i| {
        let j = (i + 1) % CHANNELS;
        Condition {
            first: MATRIX[i][1],
            second: MATRIX[j][1],
            name: CONDITION_NAMES[i],
            channels: (i, j),
        }
    });
    EmotionBenchmark {
        matrix: MATRIX,
        conditions,
    }
}

impl EmotionBenchmark {
    pub fn word(&self, channel: usize, intensity: Intensity) -> &'static str {
        self.matrix[channel][intensity.column()]
    }

    /// Channel names, i.e. the mid-intensity words.
    pub fn channel_names(&self) -> [&'static str; CHANNELS] {
        std::array::from_fn(|i| self.matrix[i][1])
    }

    /// The 24 words in row-major order.
    pub fn words(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.matrix.iter().flat_map(|row| row.iter().copied())
    }

    /// Position `(channel, intensity)` of an emotion word.
    pub fn position(&self, word: &str) -> Option<(usize, Intensity)> {
        self.matrix.iter().enumerate().find_map(|(c, row)| {
            row.iter()
                .position(|w| *w == word)
                .map(|col| (c, Intensity::ALL[col]))
        })
    }

    pub fn channel_of(&self, name: &str) -> Option<usize> {
        self.matrix.iter().position(|row| row[1] == name)
    }

    /// The same 24 words as a flat single-token benchmark.
    pub fn to_benchmark(&self) -> Benchmark {
        let entries = self
            .words()
            .map(|w| BenchmarkEntry {
                label: w.to_owned(),
                chunk: vec![w.to_owned()],
            })
            .collect();
        Benchmark { entries }
    }
}
