//! Simset construction and document scoring against benchmarks.
//!
//! A word is expanded into its simset: the word itself (weight 1) plus up
//! to `k` vocabulary neighbours whose cosine to it exceeds `t`, each
//! weighted by that cosine. Its score against a benchmark vector `b` is
//!
//! ```text
//! score(word, b) = Σ_j ω_j · cos(w_j, b) / |simset(word)|
//! ```
//!
//! A document's score is the arithmetic mean of its in-vocabulary tokens'
//! scores, counting repeated tokens once per occurrence.

use std::collections::HashMap;
use std::sync::RwLock;

use log::warn;
use serde::Serialize;

use crate::benchmark::{Benchmark, EmotionBenchmark, CHANNELS};
use crate::corpus::TokenizedDocument;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::room::{dot, norm, Room};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimsetConfig {
    pub t: f64,
    pub k: usize,
}

impl Default for SimsetConfig {
    fn default() -> Self {
        SimsetConfig { t: 0.7, k: 10 }
    }
}

impl SimsetConfig {
    pub fn new(t: f64, k: usize) -> Result<Self> {
        let cfg = SimsetConfig { t, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t) {
            return Err(Error::input(format!(
                "simset threshold {} outside [0, 1]",
                self.t
            )));
        }
        Ok(())
    }
}

/// A seed token and its similarity-weighted neighbours. The seed comes
/// first with weight exactly 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Simset {
    pub seed: String,
    pub members: Vec<(String, f64)>,
}

impl Simset {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|(_, w)| *w).collect()
    }
}

pub fn build_simset(room: &Room, seed: &str, cfg: &SimsetConfig) -> Result<Simset> {
    cfg.validate()?;
    let members = simset_indices(room, seed, cfg, Execution::default())?;
    Ok(Simset {
        seed: seed.to_owned(),
        members: members
            .into_iter()
            .map(|(i, w)| (room.token(i).to_owned(), w))
            .collect(),
    })
}

fn simset_indices(
    room: &Room,
    seed: &str,
    cfg: &SimsetConfig,
    exec: Execution,
) -> Result<Vec<(usize, f64)>> {
    let i = room
        .index_of(seed)
        .ok_or_else(|| Error::NotFound(seed.to_owned()))?;
    let mut members = Vec::with_capacity(cfg.k + 1);
    members.push((i, 1.0));
    members.extend(room.ranked_indices(room.row(i), Some(i), cfg.k, cfg.t, exec)?);
    Ok(members)
}

/// What to do when a benchmark word or chunk is missing from the room.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OovPolicy {
    #[default]
    Error,
    /// Score missing entries as 0 and log a warning.
    Skip,
}

/// A benchmark target resolved against a room: a vector and its norm.
#[derive(Clone, Debug)]
struct Target {
    vector: Vec<f64>,
    norm: f64,
}

impl Target {
    fn new(vector: Vec<f64>, what: &str) -> Result<Self> {
        let n = norm(&vector);
        if n == 0.0 {
            return Err(Error::Degenerate(format!(
                "benchmark entry {what:?} has a zero vector"
            )));
        }
        Ok(Target { vector, norm: n })
    }
}

/// Simset-weighted scores of one room token against a list of targets.
/// Missing targets score 0.
struct Expander<'r> {
    room: &'r Room,
    cfg: SimsetConfig,
    targets: Vec<Option<Target>>,
    exec: Execution,
    cache: RwLock<HashMap<usize, Vec<f64>>>,
}

impl<'r> Expander<'r> {
    fn new(room: &'r Room, cfg: SimsetConfig, targets: Vec<Option<Target>>) -> Result<Self> {
        cfg.validate()?;
        Ok(Expander {
            room,
            cfg,
            targets,
            exec: Execution::default(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    fn scores(&self, index: usize) -> Result<Vec<f64>> {
        if let Some(hit) = self.cache.read().expect("cache lock").get(&index) {
            return Ok(hit.clone());
        }
        let members = simset_indices(self.room, self.room.token(index), &self.cfg, self.exec)?;
        let size = members.len() as f64;
        let scores: Vec<f64> = self
            .targets
            .iter()
            .map(|target| match target {
                None => 0.0,
                Some(t) => {
                    let sum = members.iter().fold(0.0, |acc, &(j, weight)| {
                        let sim =
                            dot(self.room.row(j), &t.vector) / (self.room.row_norm(j) * t.norm);
                        acc + sim * weight
                    });
                    sum / size
                }
            })
            .collect();
        self.cache
            .write()
            .expect("cache lock")
            .entry(index)
            .or_insert_with(|| scores.clone());
        Ok(scores)
    }

    /// Mean of token scores over a document, summed in vocabulary-index
    /// order so the result does not depend on token order.
    fn aggregate(&self, doc: &TokenizedDocument) -> Result<(Vec<f64>, Coverage)> {
        let mut indices: Vec<usize> = doc
            .tokens
            .iter()
            .filter_map(|t| self.room.index_of(t))
            .collect();
        let coverage = Coverage {
            tokens_scored: indices.len(),
            tokens_oov: doc.tokens.len() - indices.len(),
            tokens_total: doc.tokens.len(),
        };
        let mut sums = vec![0.0; self.targets.len()];
        if indices.is_empty() {
            return Ok((sums, coverage));
        }
        indices.sort_unstable();
        for &i in &indices {
            for (s, v) in sums.iter_mut().zip(self.scores(i)?) {
                *s += v;
            }
        }
        let n = indices.len() as f64;
        for s in &mut sums {
            *s /= n;
        }
        Ok((sums, coverage))
    }
}

fn resolve_words<'a>(
    room: &Room,
    words: impl Iterator<Item = &'a str>,
    policy: OovPolicy,
) -> Result<Vec<Option<Target>>> {
    let mut missing = Vec::new();
    let mut targets = Vec::new();
    for w in words {
        match room.lookup(w) {
            Some(row) => targets.push(Some(Target::new(
                row.iter().map(|&x| x as f64).collect(),
                w,
            )?)),
            None => {
                missing.push(w.to_owned());
                targets.push(None);
            }
        }
    }
    if !missing.is_empty() {
        match policy {
            OovPolicy::Error => return Err(Error::MissingBenchmarkWords(missing)),
            OovPolicy::Skip => warn!(
                "benchmark entries missing from room, scored as 0: {}",
                missing.join(", ")
            ),
        }
    }
    Ok(targets)
}

/// Per-word emotion scores, laid out like the Plutchik matrix.
pub type WordEmotionMatrix = [[f64; 3]; CHANNELS];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub tokens_scored: usize,
    pub tokens_oov: usize,
    pub tokens_total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmotionProfile {
    pub doc_id: String,
    pub scores: WordEmotionMatrix,
    pub conditions: [f64; CHANNELS],
    pub coverage: Coverage,
    /// No token was in the room; scores and conditions are all zero.
    pub degenerate: bool,
}

impl EmotionProfile {
    pub fn from_scores(
        doc_id: impl Into<String>,
        scores: WordEmotionMatrix,
        coverage: Coverage,
    ) -> Self {
        EmotionProfile {
            doc_id: doc_id.into(),
            conditions: condition_scores(&scores),
            scores,
            degenerate: coverage.tokens_scored == 0,
            coverage,
        }
    }
}

/// Each condition is the sum of its two mid-intensity channel scores.
pub fn condition_scores(scores: &WordEmotionMatrix) -> [f64; CHANNELS] {
    let bench = crate::benchmark::plutchik();
    std::array::from_fn(|i| {
        let (a, b) = bench.conditions[i].channels;
        scores[a][1] + scores[b][1]
    })
}

/// Scores words and documents against the Plutchik benchmark through one
/// room. Word results are cached, so a scorer should be reused across
/// documents.
pub struct EmotionScorer<'r> {
    inner: Expander<'r>,
}

impl<'r> EmotionScorer<'r> {
    pub fn new(
        room: &'r Room,
        bench: &EmotionBenchmark,
        cfg: SimsetConfig,
        policy: OovPolicy,
    ) -> Result<Self> {
        let targets = resolve_words(room, bench.words(), policy)?;
        Ok(EmotionScorer {
            inner: Expander::new(room, cfg, targets)?,
        })
    }

    pub fn room(&self) -> &Room {
        self.inner.room
    }

    /// Execution mode for the neighbour scans behind each simset.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.inner.exec = exec;
        self
    }

    pub fn word_emotion(&self, word: &str) -> Result<WordEmotionMatrix> {
        let i = self
            .inner
            .room
            .index_of(word)
            .ok_or_else(|| Error::NotFound(word.to_owned()))?;
        Ok(to_matrix(&self.inner.scores(i)?))
    }

    pub fn score_document(&self, doc: &TokenizedDocument) -> Result<EmotionProfile> {
        let (sums, coverage) = self.inner.aggregate(doc)?;
        Ok(EmotionProfile::from_scores(
            doc.id.clone(),
            to_matrix(&sums),
            coverage,
        ))
    }

    /// Scores every document; output order follows input order.
    pub fn score_documents(
        &self,
        docs: &[TokenizedDocument],
        exec: Execution,
    ) -> Result<Vec<EmotionProfile>> {
        par::map(exec, docs, |d| self.score_document(d))
            .into_iter()
            .collect()
    }
}

fn to_matrix(flat: &[f64]) -> WordEmotionMatrix {
    std::array::from_fn(|c| std::array::from_fn(|i| flat[c * 3 + i]))
}

/// Plutchik scores of a single word; see [`EmotionScorer`] for batches.
pub fn word_emotion(
    room: &Room,
    word: &str,
    bench: &EmotionBenchmark,
    cfg: &SimsetConfig,
    policy: OovPolicy,
) -> Result<WordEmotionMatrix> {
    EmotionScorer::new(room, bench, *cfg, policy)?.word_emotion(word)
}

pub fn score_document(
    room: &Room,
    doc: &TokenizedDocument,
    bench: &EmotionBenchmark,
    cfg: &SimsetConfig,
    policy: OovPolicy,
) -> Result<EmotionProfile> {
    EmotionScorer::new(room, bench, *cfg, policy)?.score_document(doc)
}

/// Raw and stacked-bar views of a profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmotionalDna {
    pub raw: WordEmotionMatrix,
    /// Negative entries floored at 0, then scaled so all 24 sum to 1.
    pub normalized: WordEmotionMatrix,
    /// Sum of each channel's three raw intensities.
    pub channel_totals: [f64; CHANNELS],
    pub normalized_channel_totals: [f64; CHANNELS],
}

pub fn emotional_dna(profile: &EmotionProfile) -> Result<EmotionalDna> {
    if profile.degenerate {
        return Err(Error::Degenerate(format!(
            "document {:?} has no scored tokens",
            profile.doc_id
        )));
    }
    let raw = profile.scores;
    let mass: f64 = raw.iter().flatten().map(|v| v.max(0.0)).sum();
    if mass <= 0.0 {
        return Err(Error::Degenerate(format!(
            "document {:?} has no positive emotion mass",
            profile.doc_id
        )));
    }
    let normalized: WordEmotionMatrix =
        std::array::from_fn(|c| std::array::from_fn(|i| raw[c][i].max(0.0) / mass));
    Ok(EmotionalDna {
        raw,
        normalized,
        channel_totals: std::array::from_fn(|c| raw[c].iter().sum()),
        normalized_channel_totals: std::array::from_fn(|c| normalized[c].iter().sum()),
    })
}

/// Per-label document scores for a flat benchmark. `None` marks a label
/// whose chunk is entirely out of vocabulary (skipped by policy).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericProfile {
    pub doc_id: String,
    pub scores: Vec<(String, Option<f64>)>,
    pub coverage: Coverage,
    pub degenerate: bool,
}

impl GenericProfile {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.scores
            .iter()
            .find(|(l, _)| l == label)
            .and_then(|(_, s)| *s)
    }
}

/// Scores documents against arbitrary keyword chunks. A chunk's vector is
/// the unweighted mean of its in-vocabulary token vectors.
pub struct GenericScorer<'r> {
    inner: Expander<'r>,
    labels: Vec<String>,
}

impl<'r> GenericScorer<'r> {
    pub fn new(
        room: &'r Room,
        bench: &Benchmark,
        cfg: SimsetConfig,
        policy: OovPolicy,
    ) -> Result<Self> {
        let mut missing = Vec::new();
        let mut targets = Vec::with_capacity(bench.len());
        for entry in bench.entries() {
            match chunk_vector(room, &entry.chunk) {
                Some(v) => targets.push(Some(Target::new(v, &entry.label)?)),
                None => {
                    missing.push(entry.label.clone());
                    targets.push(None);
                }
            }
        }
        if !missing.is_empty() {
            match policy {
                OovPolicy::Error => return Err(Error::MissingBenchmarkWords(missing)),
                OovPolicy::Skip => warn!(
                    "benchmark chunks missing from room, skipped: {}",
                    missing.join(", ")
                ),
            }
        }
        Ok(GenericScorer {
            inner: Expander::new(room, cfg, targets)?,
            labels: bench.labels().map(str::to_owned).collect(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.inner.exec = exec;
        self
    }

    /// Simset-weighted score of one in-vocabulary word against each label.
    pub fn score_word(&self, word: &str) -> Result<Vec<(String, Option<f64>)>> {
        let i = self
            .inner
            .room
            .index_of(word)
            .ok_or_else(|| Error::NotFound(word.to_owned()))?;
        Ok(self.label(self.inner.scores(i)?))
    }

    pub fn score_document(&self, doc: &TokenizedDocument) -> Result<GenericProfile> {
        let (sums, coverage) = self.inner.aggregate(doc)?;
        Ok(GenericProfile {
            doc_id: doc.id.clone(),
            scores: self.label(sums),
            degenerate: coverage.tokens_scored == 0,
            coverage,
        })
    }

    pub fn score_documents(
        &self,
        docs: &[TokenizedDocument],
        exec: Execution,
    ) -> Result<Vec<GenericProfile>> {
        par::map(exec, docs, |d| self.score_document(d))
            .into_iter()
            .collect()
    }

    fn label(&self, values: Vec<f64>) -> Vec<(String, Option<f64>)> {
        self.labels
            .iter()
            .zip(values)
            .zip(&self.inner.targets)
            .map(|((l, v), t)| (l.clone(), t.as_ref().map(|_| v)))
            .collect()
    }
}

/// Component-wise mean of a chunk's in-vocabulary token vectors.
pub fn chunk_vector(room: &Room, chunk: &[String]) -> Option<Vec<f64>> {
    let rows: Vec<&[f32]> = chunk.iter().filter_map(|t| room.lookup(t)).collect();
    if rows.is_empty() {
        return None;
    }
    let mut mean = vec![0.0; room.dim()];
    for row in &rows {
        for (m, &x) in mean.iter_mut().zip(row.iter()) {
            *m += x as f64;
        }
    }
    let n = rows.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Some(mean)
}
