//! Skip-gram training with negative sampling.
//!
//! Vocabulary is built in one pass; training then walks the corpus in order
//! for a fixed number of epochs. For every centre token a window radius is
//! drawn uniformly from `1..=window`, each context token inside it is a
//! positive pair, and `negatives` noise tokens per positive are drawn from
//! the unigram distribution raised to the 3/4 power. The learning rate
//! decays linearly from `learning_rate` to `min_learning_rate` over all
//! epochs. The centre-token matrix becomes the room.
//!
//! With `workers == 1` the run is bit-reproducible for a given seed. More
//! workers shard the corpus and update shared weights without locking.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::room::{Room, RoomMeta};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f32,
    pub min_learning_rate: f32,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            window: 5,
            min_count: 2,
            epochs: 5,
            negatives: 5,
            learning_rate: 0.025,
            min_learning_rate: 1e-4,
            subsample: None,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.dim >= 1, "dim must be at least 1"),
            (self.window >= 1, "window must be at least 1"),
            (self.min_count >= 1, "min_count must be at least 1"),
            (self.epochs >= 1, "epochs must be at least 1"),
            (self.negatives >= 1, "negatives must be at least 1"),
            (self.workers >= 1, "workers must be at least 1"),
            (
                self.learning_rate > 0.0 && self.learning_rate.is_finite(),
                "learning_rate must be positive",
            ),
            (
                self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.learning_rate,
                "min_learning_rate must lie in [0, learning_rate]",
            ),
            (
                self.subsample.is_none_or(|s| s > 0.0 && s.is_finite()),
                "subsample threshold must be positive",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::input(*msg)),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VocabStats {
    pub counts: HashMap<String, u64>,
    pub total_tokens: u64,
    /// Tokens with frequency ≥ `min_count`, by descending frequency then
    /// lexicographically. A token's position is its index.
    pub kept: Vec<String>,
    pub index: HashMap<String, usize>,
}

impl VocabStats {
    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }
}

pub fn build_vocab<S: AsRef<str>>(corpus: &[Vec<S>], min_count: u64) -> Result<VocabStats> {
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(Error::input("empty corpus"));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total_tokens = 0;
    for token in corpus.iter().flatten() {
        *counts.entry(token.as_ref().to_owned()).or_default() += 1;
        total_tokens += 1;
    }
    let mut kept: Vec<(&String, u64)> = counts
        .iter()
        .filter(|(_, &c)| c >= min_count)
        .map(|(t, &c)| (t, c))
        .collect();
    if kept.is_empty() {
        return Err(Error::input("corpus below min_count"));
    }
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let kept: Vec<String> = kept.into_iter().map(|(t, _)| t.clone()).collect();
    let index = kept
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(VocabStats {
        counts,
        total_tokens,
        kept,
        index,
    })
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub vocab_size: usize,
    pub total_tokens: u64,
    pub train_tokens: u64,
    /// Mean negative-sampling loss on a fixed probe batch, measured after
    /// each epoch.
    pub epoch_losses: Vec<f64>,
    pub elapsed: Duration,
}

pub fn train_skipgram<S: AsRef<str>>(corpus: &[Vec<S>], config: &TrainConfig) -> Result<Room> {
    train_with_report(corpus, config).map(|(room, _)| room)
}

pub fn train_with_report<S: AsRef<str>>(
    corpus: &[Vec<S>],
    config: &TrainConfig,
) -> Result<(Room, TrainReport)> {
    config.validate()?;
    let started = Instant::now();
    let vocab = build_vocab(corpus, config.min_count)?;
    let sentences: Vec<Vec<u32>> = corpus
        .iter()
        .map(|s| {
            s.iter()
                .filter_map(|t| vocab.index.get(t.as_ref()).map(|&i| i as u32))
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .collect();
    let train_tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let freqs: Vec<u64> = vocab.kept.iter().map(|t| vocab.counts[t]).collect();

    let model = Model::new(vocab.kept.len(), config, &freqs)?;
    let probe = Probe::sample(&sentences, &model, config);

    let progress = AtomicU64::new(0);
    let total_steps = train_tokens * config.epochs as u64;
    let shards = shard(&sentences, config.workers);
    let mut rngs: Vec<ChaCha8Rng> = (0..shards.len())
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(w as u64 + 1);
            rng
        })
        .collect();

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        if shards.len() == 1 {
            model.run_shard(shards[0], &mut rngs[0], &progress, total_steps, config);
        } else {
            let model = &model;
            let progress = &progress;
            std::thread::scope(|scope| {
                for (shard, rng) in shards.iter().zip(rngs.iter_mut()) {
                    scope.spawn(move || model.run_shard(shard, rng, progress, total_steps, config));
                }
            });
        }
        epoch_losses.push(probe.loss(&model));
    }

    let data = model.input_weights();
    let room = Room::new(
        vocab.kept.clone(),
        config.dim,
        data,
        RoomMeta::Trained {
            window: config.window,
            min_count: config.min_count,
            epochs: config.epochs,
            negatives: config.negatives,
            seed: config.seed,
        },
    )
    .map_err(|e| Error::Internal(format!("training produced an invalid room: {e}")))?;
    let report = TrainReport {
        vocab_size: vocab.kept.len(),
        total_tokens: vocab.total_tokens,
        train_tokens,
        epoch_losses,
        elapsed: started.elapsed(),
    };
    Ok((room, report))
}

fn shard(sentences: &[Vec<u32>], workers: usize) -> Vec<&[Vec<u32>]> {
    if workers <= 1 || sentences.len() < 2 {
        return vec![sentences];
    }
    let size = sentences.len().div_ceil(workers);
    sentences.chunks(size).collect()
}

/// `f32` weights shared between workers. Relaxed loads and stores compile
/// to plain moves; concurrent updates may overwrite one another, which is
/// the usual lock-free skip-gram trade-off.
struct Weights {
    cells: Vec<AtomicU32>,
}

impl Weights {
    fn from_fn(len: usize, mut f: impl FnMut() -> f32) -> Self {
        Weights {
            cells: (0..len).map(|_| AtomicU32::new(f().to_bits())).collect(),
        }
    }

    #[inline]
    fn get(&self, i: usize) -> f32 {
        f32::from_bits(self.cells[i].load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, i: usize, v: f32) {
        self.cells[i].store(v.to_bits(), Ordering::Relaxed);
    }
}

struct Model {
    dim: usize,
    input: Weights,
    output: Weights,
    noise: WeightedIndex<f64>,
    keep_prob: Option<Vec<f64>>,
}

impl Model {
    fn new(vocab: usize, config: &TrainConfig, freqs: &[u64]) -> Result<Self> {
        let dim = config.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let scale = 0.5 / dim as f32;
        let input = Weights::from_fn(vocab * dim, || rng.random_range(-scale..scale));
        let output = Weights::from_fn(vocab * dim, || 0.0);
        let noise = WeightedIndex::new(freqs.iter().map(|&c| (c as f64).powf(0.75)))
            .map_err(|e| Error::Internal(format!("noise distribution: {e}")))?;
        let keep_prob = config.subsample.map(|sample| {
            let total: u64 = freqs.iter().sum();
            freqs
                .iter()
                .map(|&c| {
                    let f = c as f64 / total as f64;
                    ((sample / f).sqrt() + sample / f).min(1.0)
                })
                .collect()
        });
        Ok(Model {
            dim,
            input,
            output,
            noise,
            keep_prob,
        })
    }

    fn input_weights(&self) -> Vec<f32> {
        (0..self.input.cells.len())
            .map(|i| self.input.get(i))
            .collect()
    }

    fn run_shard(
        &self,
        sentences: &[Vec<u32>],
        rng: &mut ChaCha8Rng,
        progress: &AtomicU64,
        total_steps: u64,
        config: &TrainConfig,
    ) {
        let lr0 = config.learning_rate;
        let lr_min = config.min_learning_rate;
        let mut center = vec![0f32; self.dim];
        let mut delta = vec![0f32; self.dim];
        let mut kept = Vec::new();
        for sentence in sentences {
            let words: &[u32] = match &self.keep_prob {
                None => sentence,
                Some(p) => {
                    kept.clear();
                    kept.extend(
                        sentence
                            .iter()
                            .copied()
                            .filter(|&w| rng.random::<f64>() < p[w as usize]),
                    );
                    &kept
                }
            };
            let done = progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            let frac = (done as f64 / total_steps.max(1) as f64).min(1.0) as f32;
            let lr = (lr0 - (lr0 - lr_min) * frac).max(lr_min);
            for (pos, &word) in words.iter().enumerate() {
                let radius = rng.random_range(1..=config.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(words.len() - 1);
                for (ctx_pos, &ctx) in words.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    self.train_pair(
                        word as usize,
                        ctx as usize,
                        lr,
                        config.negatives,
                        rng,
                        &mut center,
                        &mut delta,
                    );
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn train_pair(
        &self,
        word: usize,
        ctx: usize,
        lr: f32,
        negatives: usize,
        rng: &mut ChaCha8Rng,
        center: &mut [f32],
        delta: &mut [f32],
    ) {
        let base = word * self.dim;
        for (j, c) in center.iter_mut().enumerate() {
            *c = self.input.get(base + j);
        }
        delta.fill(0.0);
        self.update_output(center, delta, ctx, 1.0, lr);
        for _ in 0..negatives {
            let noise = self.noise.sample(rng);
            if noise == ctx {
                continue;
            }
            self.update_output(center, delta, noise, 0.0, lr);
        }
        for (j, d) in delta.iter().enumerate() {
            self.input.set(base + j, center[j] + d);
        }
    }

    #[inline]
    fn update_output(&self, center: &[f32], delta: &mut [f32], target: usize, label: f32, lr: f32) {
        let base = target * self.dim;
        let mut f = 0f32;
        for (j, c) in center.iter().enumerate() {
            f += c * self.output.get(base + j);
        }
        let g = (label - sigmoid(f)) * lr;
        for (j, c) in center.iter().enumerate() {
            let out = self.output.get(base + j);
            delta[j] += g * out;
            self.output.set(base + j, out + g * c);
        }
    }

    fn score(&self, word: usize, target: usize) -> f64 {
        let (a, b) = (word * self.dim, target * self.dim);
        (0..self.dim)
            .map(|j| self.input.get(a + j) as f64 * self.output.get(b + j) as f64)
            .sum()
    }
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x.clamp(-30.0, 30.0)).exp())
}

/// `-ln σ(x)`, computed without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// A fixed batch of positive pairs with pre-drawn negatives, used to track
/// the objective across epochs without touching the weights.
struct Probe {
    items: Vec<(usize, usize, Vec<usize>)>,
}

const PROBE_PAIRS: usize = 2000;

impl Probe {
    fn sample(sentences: &[Vec<u32>], model: &Model, config: &TrainConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(0x70726f6265);
        let candidates: Vec<&Vec<u32>> = sentences.iter().filter(|s| s.len() >= 2).collect();
        let mut items = Vec::new();
        if candidates.is_empty() {
            return Probe { items };
        }
        for _ in 0..PROBE_PAIRS {
            let s = candidates[rng.random_range(0..candidates.len())];
            let pos = rng.random_range(0..s.len());
            let radius = rng.random_range(1..=config.window);
            let lo = pos.saturating_sub(radius);
            let hi = (pos + radius).min(s.len() - 1);
            let mut ctx = rng.random_range(lo..=hi);
            if ctx == pos {
                ctx = if pos > lo { pos - 1 } else { pos + 1 };
            }
            let negs = (0..config.negatives)
                .map(|_| model.noise.sample(&mut rng))
                .collect();
            items.push((s[pos] as usize, s[ctx] as usize, negs));
        }
        Probe { items }
    }

    fn loss(&self, model: &Model) -> f64 {
        if self.items.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .items
            .iter()
            .map(|(w, c, negs)| {
                neg_log_sigmoid(model.score(*w, *c))
                    + negs
                        .iter()
                        .filter(|&&n| n != *c)
                        .map(|&n| neg_log_sigmoid(-model.score(*w, n)))
                        .sum::<f64>()
            })
            .sum();
        total / self.items.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn vocab_counts_and_order() {
        let v = build_vocab(&corpus(&["a b a"]), 2).unwrap();
        assert_eq!(v.kept, ["a"]);
        assert_eq!(v.count("a"), 2);
        assert_eq!(v.count("b"), 1);
        assert_eq!(v.total_tokens, 3);

        let v = build_vocab(&corpus(&["a b", "b a"]), 2).unwrap();
        assert_eq!(v.kept, ["a", "b"]);
        assert_eq!(v.index["b"], 1);
    }

    #[test]
    fn vocab_errors() {
        assert!(matches!(
            build_vocab::<String>(&[], 1),
            Err(Error::Input(_))
        ));
        assert!(
            matches!(build_vocab(&corpus(&["a b c"]), 2), Err(Error::Input(m)) if m.contains("min_count"))
        );
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Input(_))));
        assert!(train_skipgram(&corpus(&["x y"; 5]), &bad).is_err());
        assert!(TrainConfig {
            learning_rate: -1.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn repeated_pair_vocabulary() {
        let config = TrainConfig {
            dim: 8,
            epochs: 1,
            ..TrainConfig::default()
        };
        let room = train_skipgram(&corpus(&["x y"; 50]), &config).unwrap();
        let mut tokens = room.tokens().to_vec();
        tokens.sort();
        assert_eq!(tokens, ["x", "y"]);
        assert_eq!(room.dim(), 8);
    }

    #[test]
    fn single_worker_is_deterministic() {
        let lines: Vec<String> = (0..200)
            .map(|i| format!("w{} w{} w{} w{}", i % 7, (i * 3) % 11, i % 5, (i + 2) % 7))
            .collect();
        let c: Vec<Vec<String>> = lines
            .iter()
            .map(|l| l.split(' ').map(str::to_owned).collect())
            .collect();
        let config = TrainConfig {
            dim: 12,
            epochs: 2,
            seed: 9,
            ..TrainConfig::default()
        };
        let a = train_skipgram(&c, &config).unwrap();
        let b = train_skipgram(&c, &config).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        a.write_binary(&mut ba).unwrap();
        b.write_binary(&mut bb).unwrap();
        assert_eq!(ba, bb);
        let other = train_skipgram(
            &c,
            &TrainConfig {
                seed: 10,
                ..config.clone()
            },
        )
        .unwrap();
        assert_ne!(other, a);

        let sub = TrainConfig {
            subsample: Some(1e-2),
            ..config.clone()
        };
        assert_eq!(
            train_skipgram(&c, &sub).unwrap(),
            train_skipgram(&c, &sub).unwrap()
        );
    }

    #[test]
    fn multi_worker_produces_a_valid_room() {
        let lines: Vec<Vec<String>> = (0..400)
            .map(|i| (0..6).map(|j| format!("t{}", (i + j) % 13)).collect())
            .collect();
        let config = TrainConfig {
            dim: 10,
            epochs: 2,
            workers: 4,
            ..TrainConfig::default()
        };
        let room = train_skipgram(&lines, &config).unwrap();
        assert_eq!(room.len(), 13);
    }

    #[test]
    fn stable_log_sigmoid() {
        assert!((neg_log_sigmoid(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(neg_log_sigmoid(-800.0).is_finite());
        assert!(neg_log_sigmoid(800.0) >= 0.0);
    }
}
