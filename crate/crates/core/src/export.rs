//! Report writers (CSV and JSON) and atomic file output.
//!
//! Profile CSV columns, in order:
//!
//! ```text
//! doc_id, serenity, joy, ecstasy, acceptance, trust, admiration,
//! apprehension, fear, terror, distraction, surprise, amazement,
//! pensiveness, sadness, grief, boredom, disgust, loathing,
//! annoyance, anger, rage, interest, anticipation, vigilance,
//! love, submission, awe, disapproval, remorse, contempt,
//! aggressiveness, optimism, tokens_scored, tokens_oov, tokens_total
//! ```
//!
//! Numbers use the shortest representation that round-trips.

use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::benchmark::plutchik;
use crate::error::{Error, Result};
use crate::polarization::{EmotionClusters, PolarizationRow};
use crate::scoring::{EmotionProfile, EmotionalDna, GenericProfile};

/// Runs `write` against a temporary file next to `path` and renames it
/// into place only if every write succeeded.
pub fn write_atomically<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut NamedTempFile>) -> io::Result<()>,
{
    let wrap = |source| Error::Write {
        path: path.to_owned(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(wrap)?;
    {
        let mut w = BufWriter::new(&mut tmp);
        write(&mut w).map_err(wrap)?;
        w.flush().map_err(wrap)?;
    }
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::input(format!("unknown report format {other:?}"))),
        }
    }
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn join_row<W: Write + ?Sized>(w: &mut W, cells: &[String]) -> io::Result<()> {
    w.write_all(cells.join(",").as_bytes())?;
    w.write_all(b"\n")
}

pub fn profile_columns() -> Vec<String> {
    let bench = plutchik();
    let mut cols = vec!["doc_id".to_owned()];
    cols.extend(bench.words().map(str::to_owned));
    cols.extend(bench.conditions.iter().map(|c| c.name.to_owned()));
    cols.extend(["tokens_scored", "tokens_oov", "tokens_total"].map(str::to_owned));
    cols
}

fn profile_cells(p: &EmotionProfile) -> Vec<String> {
    let mut cells = vec![field(&p.doc_id)];
    cells.extend(p.scores.iter().flatten().map(|v| v.to_string()));
    cells.extend(p.conditions.iter().map(|v| v.to_string()));
    cells.extend(
        [
            p.coverage.tokens_scored,
            p.coverage.tokens_oov,
            p.coverage.tokens_total,
        ]
        .map(|v| v.to_string()),
    );
    cells
}

pub fn write_profiles_csv<W: Write + ?Sized>(
    w: &mut W,
    profiles: &[EmotionProfile],
) -> io::Result<()> {
    join_row(w, &profile_columns())?;
    for p in profiles {
        join_row(w, &profile_cells(p))?;
    }
    Ok(())
}

/// A profile as a JSON object whose keys follow the CSV column order.
struct ProfileRecord<'a>(&'a EmotionProfile);

impl Serialize for ProfileRecord<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p = self.0;
        let bench = plutchik();
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("doc_id", &p.doc_id)?;
        for (w, v) in bench.words().zip(p.scores.iter().flatten()) {
            map.serialize_entry(w, v)?;
        }
        for (c, v) in bench.conditions.iter().zip(&p.conditions) {
            map.serialize_entry(c.name, v)?;
        }
        map.serialize_entry("tokens_scored", &p.coverage.tokens_scored)?;
        map.serialize_entry("tokens_oov", &p.coverage.tokens_oov)?;
        map.serialize_entry("tokens_total", &p.coverage.tokens_total)?;
        map.serialize_entry("degenerate", &p.degenerate)?;
        map.end()
    }
}

pub fn write_profiles_json<W: Write + ?Sized>(
    w: &mut W,
    profiles: &[EmotionProfile],
) -> io::Result<()> {
    let records: Vec<ProfileRecord> = profiles.iter().map(ProfileRecord).collect();
    serde_json::to_writer_pretty(&mut *w, &records)?;
    w.write_all(b"\n")
}

pub fn write_generic_csv<W: Write + ?Sized>(
    w: &mut W,
    labels: &[String],
    profiles: &[GenericProfile],
) -> io::Result<()> {
    let mut header = vec!["doc_id".to_owned()];
    header.extend(labels.iter().map(|l| field(l)));
    header.extend(["tokens_scored", "tokens_oov", "tokens_total"].map(str::to_owned));
    join_row(w, &header)?;
    for p in profiles {
        let mut cells = vec![field(&p.doc_id)];
        cells.extend(
            p.scores
                .iter()
                .map(|(_, v)| v.map(|x| x.to_string()).unwrap_or_default()),
        );
        cells.extend(
            [
                p.coverage.tokens_scored,
                p.coverage.tokens_oov,
                p.coverage.tokens_total,
            ]
            .map(|v| v.to_string()),
        );
        join_row(w, &cells)?;
    }
    Ok(())
}

struct GenericRecord<'a>(&'a GenericProfile);

impl Serialize for GenericRecord<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p = self.0;
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("doc_id", &p.doc_id)?;
        for (label, v) in &p.scores {
            map.serialize_entry(label, v)?;
        }
        map.serialize_entry("tokens_scored", &p.coverage.tokens_scored)?;
        map.serialize_entry("tokens_oov", &p.coverage.tokens_oov)?;
        map.serialize_entry("tokens_total", &p.coverage.tokens_total)?;
        map.serialize_entry("degenerate", &p.degenerate)?;
        map.end()
    }
}

pub fn write_generic_json<W: Write + ?Sized>(
    w: &mut W,
    profiles: &[GenericProfile],
) -> io::Result<()> {
    let records: Vec<GenericRecord> = profiles.iter().map(GenericRecord).collect();
    serde_json::to_writer_pretty(&mut *w, &records)?;
    w.write_all(b"\n")
}

/// Stacked-bar data: doc_id, the 24 floored-and-normalized entries, then
/// the 8 raw channel totals (`total_<channel>`).
pub fn write_dna_csv<W: Write + ?Sized>(
    w: &mut W,
    rows: &[(String, EmotionalDna)],
) -> io::Result<()> {
    let bench = plutchik();
    let mut header = vec!["doc_id".to_owned()];
    header.extend(bench.words().map(str::to_owned));
    header.extend(bench.channel_names().iter().map(|c| format!("total_{c}")));
    join_row(w, &header)?;
    for (id, dna) in rows {
        let mut cells = vec![field(id)];
        cells.extend(dna.normalized.iter().flatten().map(|v| v.to_string()));
        cells.extend(dna.channel_totals.iter().map(|v| v.to_string()));
        join_row(w, &cells)?;
    }
    Ok(())
}

pub fn write_dna_json<W: Write + ?Sized>(
    w: &mut W,
    rows: &[(String, EmotionalDna)],
) -> io::Result<()> {
    #[derive(Serialize)]
    struct Record<'a> {
        doc_id: &'a str,
        #[serde(flatten)]
        dna: &'a EmotionalDna,
    }
    let records: Vec<Record> = rows
        .iter()
        .map(|(id, dna)| Record { doc_id: id, dna })
        .collect();
    serde_json::to_writer_pretty(&mut *w, &records)?;
    w.write_all(b"\n")
}

fn cluster_name(clusters: &EmotionClusters, emotion: &str) -> &'static str {
    if clusters.is_polarizing(emotion) {
        "A"
    } else {
        "B"
    }
}

/// Columns: emotion, avg_T, avg_C, d, P, cluster. Rows keep their order
/// (callers pass them sorted by descending P).
pub fn write_polarization_csv<W: Write + ?Sized>(
    w: &mut W,
    rows: &[PolarizationRow],
    clusters: &EmotionClusters,
) -> io::Result<()> {
    writeln!(w, "emotion,avg_T,avg_C,d,P,cluster")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            field(&r.emotion),
            r.avg_t,
            r.avg_c,
            r.d,
            r.p,
            cluster_name(clusters, &r.emotion)
        )?;
    }
    Ok(())
}

pub fn write_polarization_json<W: Write + ?Sized>(
    w: &mut W,
    rows: &[PolarizationRow],
    clusters: &EmotionClusters,
) -> io::Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        emotion: &'a str,
        #[serde(rename = "avg_T")]
        avg_t: f64,
        #[serde(rename = "avg_C")]
        avg_c: f64,
        d: f64,
        #[serde(rename = "P")]
        p: f64,
        cluster: &'static str,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        threshold: f64,
        rows: Vec<Row<'a>>,
    }
    let report = Report {
        threshold: clusters.threshold,
        rows: rows
            .iter()
            .map(|r| Row {
                emotion: &r.emotion,
                avg_t: r.avg_t,
                avg_c: r.avg_c,
                d: r.d,
                p: r.p,
                cluster: cluster_name(clusters, &r.emotion),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &report)?;
    w.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::cluster;
    use crate::scoring::Coverage;

    #[test]
    fn profile_header_layout() {
        let cols = profile_columns();
        assert_eq!(cols.len(), 1 + 24 + 8 + 3);
        assert_eq!(cols[1], "serenity");
        assert_eq!(cols[24], "vigilance");
        assert_eq!(cols[25], "love");
        assert_eq!(cols[32], "optimism");
        assert_eq!(cols[35], "tokens_total");
    }

    #[test]
    fn csv_quotes_ids() {
        let p = EmotionProfile::from_scores("a,\"b\"", [[0.0; 3]; 8], Coverage::default());
        let mut out = Vec::new();
        write_profiles_csv(&mut out, &[p]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("\"a,\"\"b\"\"\",0,"));
    }

    #[test]
    fn json_keys_follow_columns() {
        let p = EmotionProfile::from_scores(
            "x",
            [[0.25; 3]; 8],
            Coverage {
                tokens_scored: 1,
                tokens_oov: 0,
                tokens_total: 1,
            },
        );
        let mut out = Vec::new();
        write_profiles_json(&mut out, &[p]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let serenity = text.find("\"serenity\"").unwrap();
        let vigilance = text.find("\"vigilance\"").unwrap();
        let love = text.find("\"love\"").unwrap();
        assert!(serenity < vigilance && vigilance < love);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed[0]["love"], 0.5);
    }

    #[test]
    fn polarization_report() {
        let rows = vec![
            PolarizationRow {
                emotion: "trust".into(),
                avg_t: 0.3,
                avg_c: 0.1,
                d: 0.2,
                p: 0.2,
            },
            PolarizationRow {
                emotion: "joy".into(),
                avg_t: 0.1,
                avg_c: 0.1,
                d: 0.0,
                p: 0.0,
            },
        ];
        let clusters = cluster(&rows, 0.1);
        let mut out = Vec::new();
        write_polarization_csv(&mut out, &rows, &clusters).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "emotion,avg_T,avg_C,d,P,cluster\ntrust,0.3,0.1,0.2,0.2,A\njoy,0.1,0.1,0,0,B\n"
        );
        let mut out = Vec::new();
        write_polarization_json(&mut out, &rows, &clusters).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(v["rows"][0]["cluster"], "A");
        assert_eq!(v["rows"][0]["P"], 0.2);
    }

    #[test]
    fn atomic_write_leaves_nothing_on_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let err = write_atomically(&path, |w| {
            w.write_all(b"partial")?;
            Err(io::Error::other("boom"))
        });
        assert!(err.is_err());
        assert!(!path.exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        write_atomically(&path, |w| w.write_all(b"ok")).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"ok");
    }
}
