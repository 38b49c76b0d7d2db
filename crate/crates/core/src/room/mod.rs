//! Immutable embedding spaces and the similarity queries over them.

mod io;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use self::io::{load_room, save_room, RoomFormat};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Where a room's vectors came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RoomMeta {
    Loaded,
    Trained {
        window: usize,
        min_count: u64,
        epochs: usize,
        negatives: usize,
        seed: u64,
    },
}

/// A vocabulary and one `dim`-sized vector per token.
///
/// Rows are stored as `f32`; similarity arithmetic is carried out in `f64`.
/// Every row is finite and has a non-zero norm, so the cosine between any
/// two rows is defined.
#[derive(Clone, Debug)]
pub struct Room {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f32>,
    norms: Vec<f64>,
    meta: RoomMeta,
}

impl PartialEq for Room {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
            && self.dim == other.dim
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Room {
    /// Builds a room from tokens and a row-major `tokens.len() × dim` matrix.
    pub fn new(tokens: Vec<String>, dim: usize, data: Vec<f32>, meta: RoomMeta) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("embedding dimension must be at least 1"));
        }
        if data.len() != tokens.len() * dim {
            return Err(Error::Dimension {
                expected: tokens.len() * dim,
                found: data.len(),
            });
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::input(format!("invalid token {token:?} at row {i}")));
            }
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate token {token:?}")));
            }
        }
        let mut norms = Vec::with_capacity(tokens.len());
        for (i, row) in data.chunks_exact(dim).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!(
                    "non-finite component in row of {:?}",
                    tokens[i]
                )));
            }
            let n = norm(row);
            if n == 0.0 {
                return Err(Error::Degenerate(format!(
                    "zero vector for {:?}",
                    tokens[i]
                )));
            }
            norms.push(n);
        }
        Ok(Room {
            tokens,
            index,
            dim,
            data,
            norms,
            meta,
        })
    }

    /// Builds a room from `(token, vector)` pairs.
    pub fn from_rows<S, I>(rows: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<f32>)>,
    {
        let mut tokens = Vec::new();
        let mut data = Vec::new();
        let mut dim = None;
        for (token, row) in rows {
            let token = token.into();
            match dim {
                None => dim = Some(row.len()),
                Some(d) if d != row.len() => {
                    return Err(Error::Dimension {
                        expected: d,
                        found: row.len(),
                    })
                }
                _ => {}
            }
            tokens.push(token);
            data.extend_from_slice(&row);
        }
        let dim = dim.ok_or_else(|| Error::input("a room needs at least one row"))?;
        Room::new(tokens, dim, data, RoomMeta::Loaded)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn meta(&self) -> &RoomMeta {
        &self.meta
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// The stored vector for `token`, or `None` when it is out of vocabulary.
    pub fn lookup(&self, token: &str) -> Option<&[f32]> {
        self.index_of(token).map(|i| self.row(i))
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub(crate) fn row_norm(&self, index: usize) -> f64 {
        self.norms[index]
    }

    /// Row-major `len() × dim()` data.
    pub fn matrix(&self) -> &[f32] {
        &self.data
    }

    /// Ranked neighbours of `query` with similarity strictly above
    /// `threshold`, at most `k` of them. A token query never returns
    /// itself. Ties are broken by ascending vocabulary index.
    pub fn nearest(&self, query: Query<'_>, k: usize, threshold: f64) -> Result<Vec<Neighbor>> {
        self.nearest_with(query, k, threshold, Execution::default())
    }

    pub fn nearest_with(
        &self,
        query: Query<'_>,
        k: usize,
        threshold: f64,
        exec: Execution,
    ) -> Result<Vec<Neighbor>> {
        let (vector, exclude) = match query {
            Query::Token(token) => {
                let i = self
                    .index_of(token)
                    .ok_or_else(|| Error::NotFound(token.to_owned()))?;
                (self.row(i), Some(i))
            }
            Query::Vector(v) => {
                if v.len() != self.dim {
                    return Err(Error::Dimension {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                (v, None)
            }
        };
        let ranked = self.ranked_indices(vector, exclude, k, threshold, exec)?;
        Ok(ranked
            .into_iter()
            .map(|(index, score)| Neighbor {
                token: self.tokens[index].clone(),
                index,
                score,
            })
            .collect())
    }

    pub(crate) fn ranked_indices(
        &self,
        vector: &[f32],
        exclude: Option<usize>,
        k: usize,
        threshold: f64,
        exec: Execution,
    ) -> Result<Vec<(usize, f64)>> {
        if k == 0 {
            return Ok(Vec::new());
        }
        let query_norm = match exclude {
            Some(i) => self.norms[i],
            None => norm(vector),
        };
        if query_norm == 0.0 {
            return Err(Error::Degenerate("query vector has zero norm".into()));
        }
        let scores = par::map_range(exec, self.len(), |i| {
            dot(vector, self.row(i)) / (query_norm * self.norms[i])
        });
        let mut hits: Vec<(usize, f64)> = scores
            .into_iter()
            .enumerate()
            .filter(|&(i, s)| Some(i) != exclude && s > threshold)
            .collect();
        if hits.len() > k {
            hits.select_nth_unstable_by(k - 1, rank_order);
            hits.truncate(k);
        }
        hits.sort_unstable_by(rank_order);
        Ok(hits)
    }
}

fn rank_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// What to search around: an in-vocabulary token or a raw vector.
#[derive(Clone, Copy, Debug)]
pub enum Query<'a> {
    Token(&'a str),
    Vector(&'a [f32]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub token: String,
    pub index: usize,
    pub score: f64,
}

pub(crate) fn dot<A, B>(a: &[A], b: &[B]) -> f64
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (&x, &y)| acc + x.into() * y.into())
}

pub(crate) fn norm<A: Copy + Into<f64>>(a: &[A]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity `a·b / (‖a‖‖b‖)`, unclamped.
pub fn cosine<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: Copy + Into<f64>,
    B: Copy + Into<f64>,
{
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("zero-norm input to cosine".into()));
    }
    Ok(dot(a, b) / (na * nb))
}
