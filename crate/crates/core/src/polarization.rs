//! Two-group comparison of emotion perception.
//!
//! For each emotion, `d = |avg_T − avg_C|` and
//! `P = (1 − |pop_T − pop_C| / (pop_T + pop_C)) · d`, where the
//! populations count the documents each group contributed.

use std::fmt;

use serde::Serialize;

use crate::benchmark::{plutchik, Intensity, CHANNELS};
use crate::error::{Error, Result};
use crate::par::{pairwise_sum, Execution};
use crate::scoring::EmotionProfile;

/// Which number of a profile represents an emotion channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmotionSelector {
    Word {
        channel: usize,
        intensity: Intensity,
    },
    ChannelSum {
        channel: usize,
    },
}

impl EmotionSelector {
    /// The eight channels, each represented by the given intensity word.
    pub fn all(intensity: Intensity) -> Vec<EmotionSelector> {
        (0..CHANNELS)
            .map(|channel| EmotionSelector::Word { channel, intensity })
            .collect()
    }

    pub fn all_sums() -> Vec<EmotionSelector> {
        (0..CHANNELS)
            .map(|channel| EmotionSelector::ChannelSum { channel })
            .collect()
    }

    /// Selector for an emotion word (any intensity) or a channel name
    /// suffixed with `+` for the channel sum, e.g. `fear+`.
    pub fn parse(label: &str) -> Option<Self> {
        let bench = plutchik();
        let label = label.to_lowercase();
        if let Some(name) = label.strip_suffix('+') {
            return bench
                .channel_of(name)
                .map(|channel| EmotionSelector::ChannelSum { channel });
        }
        bench
            .position(&label)
            .map(|(channel, intensity)| EmotionSelector::Word { channel, intensity })
    }

    pub fn value(&self, profile: &EmotionProfile) -> f64 {
        match *self {
            EmotionSelector::Word { channel, intensity } => {
                profile.scores[channel][intensity.column()]
            }
            EmotionSelector::ChannelSum { channel } => profile.scores[channel].iter().sum(),
        }
    }

    pub fn label(&self) -> String {
        let bench = plutchik();
        match *self {
            EmotionSelector::Word { channel, intensity } => {
                bench.word(channel, intensity).to_owned()
            }
            EmotionSelector::ChannelSum { channel } => format!("{}+", bench.matrix[channel][1]),
        }
    }
}

impl fmt::Display for EmotionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::input("mean over an empty group is undefined"));
    }
    Ok(pairwise_sum(Execution::default(), values) / values.len() as f64)
}

/// Mean of one emotion across a group's profiles.
pub fn group_average(profiles: &[EmotionProfile], selector: EmotionSelector) -> Result<f64> {
    let values: Vec<f64> = profiles.iter().map(|p| selector.value(p)).collect();
    mean(&values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupStats {
    pub label: String,
    pub population: u64,
    pub means: Vec<(String, f64)>,
}

impl GroupStats {
    /// Population is the number of non-degenerate profiles; degenerate
    /// ones are excluded from the means as well.
    pub fn from_profiles(
        label: &str,
        profiles: &[EmotionProfile],
        selectors: &[EmotionSelector],
    ) -> Result<Self> {
        let scored: Vec<EmotionProfile> =
            profiles.iter().filter(|p| !p.degenerate).cloned().collect();
        let means = selectors
            .iter()
            .map(|s| Ok((s.label(), group_average(&scored, *s)?)))
            .collect::<Result<_>>()?;
        Ok(GroupStats {
            label: label.to_owned(),
            population: scored.len() as u64,
            means,
        })
    }
}

/// Returns `(d, P)`.
pub fn polarization(avg_t: f64, avg_c: f64, pop_t: u64, pop_c: u64) -> Result<(f64, f64)> {
    let total = pop_t
        .checked_add(pop_c)
        .ok_or_else(|| Error::input("population overflow"))?;
    if total == 0 {
        return Err(Error::input("both populations are zero"));
    }
    let d = (avg_t - avg_c).abs();
    let factor = 1.0 - pop_t.abs_diff(pop_c) as f64 / total as f64;
    Ok((d, factor * d))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarizationRow {
    pub emotion: String,
    pub avg_t: f64,
    pub avg_c: f64,
    pub d: f64,
    pub p: f64,
}

/// Populations to weigh P with; `None` means "count the scored profiles".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Populations {
    pub t: Option<u64>,
    pub c: Option<u64>,
}

/// One row per selector, sorted by descending P (stable for ties).
/// Degenerate profiles are ignored.
pub fn polarization_table(
    profiles_t: &[EmotionProfile],
    profiles_c: &[EmotionProfile],
    emotions: &[EmotionSelector],
    populations: Populations,
) -> Result<Vec<PolarizationRow>> {
    let t: Vec<&EmotionProfile> = profiles_t.iter().filter(|p| !p.degenerate).collect();
    let c: Vec<&EmotionProfile> = profiles_c.iter().filter(|p| !p.degenerate).collect();
    let columns = emotions
        .iter()
        .map(|s| {
            (
                s.label(),
                t.iter().map(|p| s.value(p)).collect::<Vec<_>>(),
                c.iter().map(|p| s.value(p)).collect::<Vec<_>>(),
            )
        })
        .collect::<Vec<_>>();
    compare_columns(&columns, populations)
}

/// Rows from raw per-label value columns `(label, values_T, values_C)`.
pub fn compare_columns(
    columns: &[(String, Vec<f64>, Vec<f64>)],
    populations: Populations,
) -> Result<Vec<PolarizationRow>> {
    let mut rows = Vec::with_capacity(columns.len());
    for (label, values_t, values_c) in columns {
        let avg_t = mean(values_t)
            .map_err(|_| Error::input(format!("group T has no scored documents for {label}")))?;
        let avg_c = mean(values_c)
            .map_err(|_| Error::input(format!("group C has no scored documents for {label}")))?;
        let pop_t = populations.t.unwrap_or(values_t.len() as u64);
        let pop_c = populations.c.unwrap_or(values_c.len() as u64);
        let (d, p) = polarization(avg_t, avg_c, pop_t, pop_c)?;
        rows.push(PolarizationRow {
            emotion: label.clone(),
            avg_t,
            avg_c,
            d,
            p,
        });
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn sort_rows(rows: &mut [PolarizationRow]) {
    rows.sort_by(|a, b| b.p.partial_cmp(&a.p).unwrap_or(std::cmp::Ordering::Equal));
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmotionClusters {
    /// Polarizing emotions: P ≥ threshold.
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub threshold: f64,
}

impl EmotionClusters {
    pub fn is_polarizing(&self, emotion: &str) -> bool {
        self.a.iter().any(|e| e == emotion)
    }
}

pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.1;

pub fn cluster(rows: &[PolarizationRow], threshold: f64) -> EmotionClusters {
    let (a, b): (Vec<&PolarizationRow>, Vec<&PolarizationRow>) =
        rows.iter().partition(|r| r.p >= threshold);
    EmotionClusters {
        a: a.into_iter().map(|r| r.emotion.clone()).collect(),
        b: b.into_iter().map(|r| r.emotion.clone()).collect(),
        threshold,
    }
}
