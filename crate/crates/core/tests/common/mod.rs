#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rooms::{plutchik, Room};

pub const TARGET: &str = "candidate";

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

pub fn fillers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Which channels the target token is embedded among.
#[derive(Clone, Copy, Debug)]
pub enum Bias {
    Trust,
    FearAnger,
}

/// A corpus where every Plutchik word appears with its channel siblings and
/// the target token appears among the words of the biased channels.
pub fn biased_corpus(bias: Bias, sentences: usize, seed: u64) -> Vec<Vec<String>> {
    let bench = plutchik();
    let fill = fillers(200);
    let biased: Vec<&str> = match bias {
        Bias::Trust => bench.matrix[1].to_vec(),
        Bias::FearAnger => bench.matrix[2]
            .iter()
            .chain(&bench.matrix[6])
            .copied()
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..sentences)
        .map(|_| {
            let mut s: Vec<String> = (0..12)
                .map(|_| fill.choose(&mut rng).unwrap().clone())
                .collect();
            let roll: f64 = rng.random();
            if roll < 0.25 {
                let at = rng.random_range(3..9);
                s[at] = TARGET.to_owned();
                for off in [-2i64, -1, 1, 2] {
                    s[(at as i64 + off) as usize] = biased.choose(&mut rng).unwrap().to_string();
                }
            } else if roll < 0.65 {
                let row = &bench.matrix[rng.random_range(0..8)];
                let at = rng.random_range(0..9);
                for slot in &mut s[at..at + 3] {
                    *slot = row.choose(&mut rng).unwrap().to_string();
                }
            }
            s
        })
        .collect()
}

/// Pairs `(a_i, b_i)` that are interchangeable: each sentence carrying a pair
/// slot uses one of the two, always next to the pair's own context words.
pub fn planted_corpus(
    pairs: usize,
    sentences: usize,
    seed: u64,
) -> (Vec<Vec<String>>, Vec<(String, String)>) {
    let fill = fillers(300);
    let planted: Vec<(String, String)> = (0..pairs)
        .map(|i| (format!("pa{i}"), format!("pb{i}")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = (0..sentences)
        .map(|_| {
            let mut s: Vec<String> = (0..10)
                .map(|_| fill.choose(&mut rng).unwrap().clone())
                .collect();
            if rng.random_bool(0.6) {
                let p = rng.random_range(0..pairs);
                let at = rng.random_range(2..8);
                s[at] = if rng.random_bool(0.5) {
                    planted[p].0.clone()
                } else {
                    planted[p].1.clone()
                };
                s[at - 2] = format!("ctx{p}a");
                s[at - 1] = format!("ctx{p}b");
                s[at + 1] = format!("ctx{p}c");
                s[at + 2] = format!("ctx{p}d");
            }
            s
        })
        .collect();
    (corpus, planted)
}

/// A room of `v` vectors in `dim` dimensions drawn around a handful of
/// centres, so that neighbourhoods above typical thresholds are non-empty.
pub fn clustered_room(v: usize, dim: usize, seed: u64) -> Room {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Vec<f32>> = (0..8)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect();
    let spread: f32 = rng.random_range(0.1..0.8);
    let rows = (0..v).map(|i| {
        let c = &centres[rng.random_range(0..centres.len())];
        let mut row: Vec<f32> = c
            .iter()
            .map(|x| x + spread * rng.random_range(-1.0f32..1.0))
            .collect();
        if row.iter().all(|x| *x == 0.0) {
            row[0] = 1.0;
        }
        (format!("tok{i}"), row)
    });
    Room::from_rows(rows).expect("valid room")
}
