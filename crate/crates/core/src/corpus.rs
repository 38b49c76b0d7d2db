//! Tweet-aware cleaning, hashtag extraction and partisan partitioning.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::export::write_atomically;
use crate::par::{self, Execution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            id: id.into(),
            text: text.into(),
            meta: BTreeMap::new(),
        }
    }
}

/// A cleaned document. An empty token list means the document was dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TokenizedDocument {
    pub id: String,
    pub tokens: Vec<String>,
}

impl TokenizedDocument {
    pub fn new<S: Into<String>>(
        id: impl Into<String>,
        tokens: impl IntoIterator<Item = S>,
    ) -> Self {
        TokenizedDocument {
            id: id.into(),
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_dropped(&self) -> bool {
        self.tokens.is_empty()
    }
}

const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

/// Tweet cleaner.
///
/// Rules, applied per whitespace-separated token after NFC normalization
/// and lowercasing: URLs (`http://`, `https://`, `www.`) and `@mentions`
/// are removed, a leading `#` is stripped (the hashtag word stays),
/// apostrophes are deleted and every other non-alphanumeric character acts
/// as a separator. The retweet marker `rt` is removed. Digits are kept.
#[derive(Clone, Debug, Default)]
pub struct Tokenizer {
    pub remove_stopwords: bool,
}

impl Tokenizer {
    pub fn with_stopwords_removed() -> Self {
        Tokenizer {
            remove_stopwords: true,
        }
    }

    pub fn clean_and_tokenize(&self, doc: &RawDocument) -> TokenizedDocument {
        TokenizedDocument {
            id: doc.id.clone(),
            tokens: self.tokenize(&doc.text),
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let normalized: String = text.nfc().collect::<String>().to_lowercase();
        let mut tokens = Vec::new();
        for raw in normalized.split_whitespace() {
            let word =
                raw.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@' && c != '#');
            if is_url(word) || word.starts_with('@') {
                continue;
            }
            let mut current = String::new();
            for c in word.chars() {
                if c.is_alphanumeric() {
                    current.push(c);
                } else if c == '\'' || c == '\u{2019}' {
                    continue;
                } else if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            if !current.is_empty() {
                tokens.push(current);
            }
        }
        tokens.retain(|t| t != "rt" && !(self.remove_stopwords && STOPWORDS.contains(&t.as_str())));
        // Lowercasing can produce decomposed sequences (e.g. U+0130).
        for t in &mut tokens {
            if !unicode_normalization::is_nfc(t) {
                *t = t.nfc().collect();
            }
        }
        tokens
    }
}

fn is_url(word: &str) -> bool {
    word.starts_with("http://") || word.starts_with("https://") || word.starts_with("www.")
}

/// Lowercased hashtag bodies of every whitespace token starting with `#`.
/// The body runs up to the first character that is neither alphanumeric
/// nor `_`.
pub fn extract_hashtags(text: &str) -> BTreeSet<String> {
    let normalized: String = text.nfc().collect::<String>().to_lowercase();
    normalized
        .split_whitespace()
        .filter_map(|t| t.strip_prefix('#'))
        .map(|body| {
            body.chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .collect::<String>()
        })
        .filter(|body| !body.is_empty())
        .collect()
}

/// The four partisan hashtag sets, stored without `#` and lowercased.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagSets {
    pub pro_trump: BTreeSet<String>,
    pub anti_clinton: BTreeSet<String>,
    pub pro_clinton: BTreeSet<String>,
    pub anti_trump: BTreeSet<String>,
}

const ELECTION_2016: &str = include_str!("../fixtures/election2016_hashtags.json");

/// Which side of the partition a document's hashtags put it on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    T,
    C,
    Ambiguous,
    Unclassified,
}

impl HashtagSets {
    /// Builds the sets, normalizing entries (leading `#` and case) and
    /// checking that they are pairwise disjoint.
    pub fn new(
        pro_trump: impl IntoIterator<Item = String>,
        anti_clinton: impl IntoIterator<Item = String>,
        pro_clinton: impl IntoIterator<Item = String>,
        anti_trump: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        fn clean(set: impl IntoIterator<Item = String>) -> BTreeSet<String> {
            set.into_iter()
                .map(|t| {
                    t.trim()
                        .trim_start_matches('#')
                        .nfc()
                        .collect::<String>()
                        .to_lowercase()
                })
                .filter(|t| !t.is_empty())
                .collect()
        }
        let sets = HashtagSets {
            pro_trump: clean(pro_trump),
            anti_clinton: clean(anti_clinton),
            pro_clinton: clean(pro_clinton),
            anti_trump: clean(anti_trump),
        };
        sets.validate()?;
        Ok(sets)
    }

    /// The partisan sets used for the 2016 US election corpus.
    pub fn election_2016() -> Self {
        Self::from_json(ELECTION_2016, "bundled election 2016 sets")
            .expect("bundled hashtag sets are valid")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            pro_trump: Vec<String>,
            anti_clinton: Vec<String>,
            pro_clinton: Vec<String>,
            anti_trump: Vec<String>,
        }
        let f: File = serde_json::from_str(text)
            .map_err(|e| Error::parse(origin, e.line(), e.to_string()))?;
        Self::new(f.pro_trump, f.anti_clinton, f.pro_clinton, f.anti_trump)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("pro_trump", &self.pro_trump),
            ("anti_clinton", &self.anti_clinton),
            ("pro_clinton", &self.pro_clinton),
            ("anti_trump", &self.anti_trump),
        ];
        for (i, (a, sa)) in named.iter().enumerate() {
            for (b, sb) in &named[i + 1..] {
                if let Some(tag) = sa.intersection(sb).next() {
                    return Err(Error::input(format!(
                        "hashtag {tag:?} appears in both {a} and {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn classify(&self, tags: &BTreeSet<String>) -> Side {
        let t = tags
            .iter()
            .any(|h| self.pro_trump.contains(h) || self.anti_clinton.contains(h));
        let c = tags
            .iter()
            .any(|h| self.pro_clinton.contains(h) || self.anti_trump.contains(h));
        match (t, c) {
            (true, false) => Side::T,
            (false, true) => Side::C,
            (true, true) => Side::Ambiguous,
            (false, false) => Side::Unclassified,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PartitionResult {
    pub group_t: Vec<TokenizedDocument>,
    pub group_c: Vec<TokenizedDocument>,
    pub ambiguous: Vec<TokenizedDocument>,
    pub unclassified: Vec<TokenizedDocument>,
}

impl PartitionResult {
    pub fn counts(&self) -> [usize; 4] {
        [
            self.group_t.len(),
            self.group_c.len(),
            self.ambiguous.len(),
            self.unclassified.len(),
        ]
    }
}

/// Splits documents by the hashtags in their raw text, then cleans them.
/// Input order is preserved within each group.
pub fn partition(
    docs: &[RawDocument],
    sets: &HashtagSets,
    tokenizer: &Tokenizer,
    exec: Execution,
) -> PartitionResult {
    let classified = par::map(exec, docs, |doc| {
        (
            sets.classify(&extract_hashtags(&doc.text)),
            tokenizer.clean_and_tokenize(doc),
        )
    });
    let mut out = PartitionResult::default();
    for (side, doc) in classified {
        match side {
            Side::T => out.group_t.push(doc),
            Side::C => out.group_c.push(doc),
            Side::Ambiguous => out.ambiguous.push(doc),
            Side::Unclassified => out.unclassified.push(doc),
        }
    }
    out
}

/// Parses newline-delimited JSON documents; blank lines are skipped.
pub fn parse_jsonl(text: &str, origin: &str) -> Result<Vec<RawDocument>> {
    #[derive(Deserialize)]
    struct Line {
        id: serde_json::Value,
        text: String,
        #[serde(default)]
        meta: BTreeMap<String, serde_json::Value>,
    }
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, n + 1, e.to_string()))?;
        let id = match parsed.id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(Error::parse(
                    origin,
                    n + 1,
                    format!("id must be a string, got {other}"),
                ))
            }
        };
        if !ids.insert(id.clone()) {
            return Err(Error::parse(origin, n + 1, format!("duplicate id {id:?}")));
        }
        docs.push(RawDocument {
            id,
            text: parsed.text,
            meta: parsed.meta,
        });
    }
    Ok(docs)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RawDocument>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_jsonl(&text, &path.display().to_string())
}

/// One document per line, tokens separated by spaces. Document ids are the
/// 1-based line numbers.
pub fn parse_token_corpus(text: &str) -> Vec<TokenizedDocument> {
    text.lines()
        .enumerate()
        .map(|(n, line)| TokenizedDocument::new((n + 1).to_string(), line.split_whitespace()))
        .collect()
}

pub fn read_token_corpus(path: &Path) -> Result<Vec<TokenizedDocument>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    Ok(parse_token_corpus(&text))
}

/// Writes non-dropped documents in the tokenized-corpus format.
pub fn write_token_corpus(path: &Path, docs: &[TokenizedDocument]) -> Result<()> {
    write_atomically(path, |w| {
        for doc in docs.iter().filter(|d| !d.is_dropped()) {
            writeln!(w, "{}", doc.tokens.join(" "))?;
        }
        Ok(())
    })
}
