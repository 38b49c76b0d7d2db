//! Context-specific embedding spaces ("rooms") and the machinery to read
//! documents through them.
//!
//! A [`Room`] is a frozen vocabulary plus one vector per token, either
//! trained from a corpus with [`trainer::train_skipgram`] or loaded from
//! disk. Documents are scored against a benchmark (by default the
//! Plutchik emotion matrix) using similarity-weighted neighbour sets, and
//! the same documents read through two different rooms can be compared
//! with the [`polarization`] metrics.

pub mod benchmark;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod export;
pub mod par;
pub mod polarization;
pub mod room;
pub mod scoring;
pub mod trainer;

pub use benchmark::{plutchik, Benchmark, BenchmarkEntry, EmotionBenchmark, Intensity};
pub use corpus::{HashtagSets, PartitionResult, RawDocument, TokenizedDocument, Tokenizer};
pub use error::{Error, Result};
pub use par::Execution;
pub use polarization::{EmotionClusters, EmotionSelector, PolarizationRow};
pub use room::{cosine, Neighbor, Query, Room, RoomFormat, RoomMeta};
pub use scoring::{
    EmotionProfile, EmotionScorer, GenericProfile, GenericScorer, OovPolicy, Simset, SimsetConfig,
    WordEmotionMatrix,
};
pub use trainer::{build_vocab, train_skipgram, TrainConfig, TrainReport, VocabStats};
