mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rooms::room::save_room;
use rooms::{plutchik, Room, RoomFormat};

fn rooms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rooms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small room holding every Plutchik word plus a few news words.
fn news_room(dir: &Path, name: &str, drop: &[&str]) -> PathBuf {
    let dim = 30;
    let mut rows = Vec::new();
    let words: Vec<&str> = plutchik()
        .words()
        .chain(["terrorist", "attack", "paris", "market"])
        .filter(|w| !drop.contains(w))
        .collect();
    for (i, w) in words.iter().enumerate() {
        let mut v = vec![0.05f32; dim];
        v[i % dim] = 1.0;
        v[(i * 7 + 3) % dim] += 0.5;
        rows.push((w.to_string(), v));
    }
    let room = Room::from_rows(rows).unwrap();
    let path = dir.join(name);
    save_room(&room, &path, RoomFormat::Text).unwrap();
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn partition_counts_small_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = write(
        dir.path(),
        "tweets.jsonl",
        r##"{"id":1,"text":"#MAGA rally"}
{"id":2,"text":"#TrumpTrain all aboard"}
{"id":3,"text":"#CrookedHillary again"}
{"id":4,"text":"#ImWithHer today"}
{"id":5,"text":"#NeverTrump forever"}
{"id":6,"text":"#MAGA and #ImWithHer"}
{"id":7,"text":"nothing tagged here"}
"##,
    );
    let (out_t, out_c) = (dir.path().join("t.txt"), dir.path().join("c.txt"));
    let out = rooms(&[
        "partition",
        "--tweets",
        s(&tweets),
        "--out-t",
        s(&out_t),
        "--out-c",
        s(&out_c),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        stdout(&out).trim(),
        "group_T=3 group_C=2 ambiguous=1 unclassified=1"
    );
    let t = fs::read_to_string(&out_t).unwrap();
    assert_eq!(
        t,
        "maga rally\ntrumptrain all aboard\ncrookedhillary again\n"
    );
    assert_eq!(fs::read_to_string(&out_c).unwrap().lines().count(), 2);
}

#[test]
fn partition_with_empty_sets_leaves_everything_unclassified() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = write(
        dir.path(),
        "t.jsonl",
        "{\"id\":1,\"text\":\"#MAGA\"}\n{\"id\":2,\"text\":\"#ImWithHer\"}\n",
    );
    let sets = write(
        dir.path(),
        "sets.json",
        r#"{"pro_trump":[],"anti_clinton":[],"pro_clinton":[],"anti_trump":[]}"#,
    );
    let out = rooms(&[
        "partition",
        "--tweets",
        s(&tweets),
        "--sets",
        s(&sets),
        "--out-t",
        s(&dir.path().join("a")),
        "--out-c",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        stdout(&out).trim(),
        "group_T=0 group_C=0 ambiguous=0 unclassified=2"
    );
}

#[test]
fn overlapping_sets_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let tweets = write(dir.path(), "t.jsonl", "{\"id\":1,\"text\":\"#MAGA\"}\n");
    let sets = write(
        dir.path(),
        "sets.json",
        r#"{"pro_trump":["maga"],"anti_clinton":[],"pro_clinton":["maga"],"anti_trump":[]}"#,
    );
    let out_t = dir.path().join("a");
    let out = rooms(&[
        "partition",
        "--tweets",
        s(&tweets),
        "--sets",
        s(&sets),
        "--out-t",
        s(&out_t),
        "--out-c",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!out_t.exists());
}

#[test]
fn score_emits_one_row_per_document() {
    let dir = tempfile::tempdir().unwrap();
    let room = news_room(dir.path(), "news.txt", &[]);
    let docs = write(dir.path(), "docs.txt", "terrorist attack paris\n");
    let report = dir.path().join("scores.csv");
    let out = rooms(&[
        "score",
        "--room",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("tokens scored 3"));
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), 36);
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(&row[33..], ["3", "0", "3"]);

    let again = dir.path().join("again.csv");
    let out = rooms(&[
        "score",
        "--room",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&again),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&report).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn score_json_and_workers_agree_with_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let room = news_room(dir.path(), "news.bin", &[]);
    let docs = write(
        dir.path(),
        "docs.txt",
        "terrorist attack\nparis market joy\nunknown words\n",
    );
    let one = dir.path().join("one.json");
    let four = dir.path().join("four.json");
    for (path, workers) in [(&one, "1"), (&four, "4")] {
        let out = rooms(&[
            "score",
            "--room",
            s(&room),
            "--docs",
            s(&docs),
            "--out",
            s(path),
            "--format",
            "json",
            "--workers",
            workers,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(fs::read(&one).unwrap(), fs::read(&four).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&one).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
    assert_eq!(json[2]["degenerate"], true);
}

#[test]
fn score_missing_benchmark_word_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let room = news_room(dir.path(), "news.txt", &["vigilance"]);
    let docs = write(dir.path(), "docs.txt", "paris\n");
    let report = dir.path().join("r.csv");
    let out = rooms(&[
        "score",
        "--room",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("vigilance"));
    assert!(!report.exists());

    let out = rooms(&[
        "score",
        "--room",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
        "--skip-missing",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn score_empty_docs_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let room = news_room(dir.path(), "news.txt", &[]);
    let docs = write(dir.path(), "docs.txt", "");
    let report = dir.path().join("r.csv");
    let out = rooms(&[
        "score",
        "--room",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 1);
}

#[test]
fn missing_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let docs = write(dir.path(), "docs.txt", "a\n");
    let out = rooms(&[
        "score",
        "--room",
        s(&dir.path().join("nope.bin")),
        "--docs",
        s(&docs),
        "--out",
        s(&dir.path().join("r.csv")),
    ]);
    assert_eq!(code(&out), 2);
    let out = rooms(&[
        "train",
        "--corpus",
        s(&dir.path().join("missing.txt")),
        "--out",
        s(&dir.path().join("room.bin")),
    ]);
    assert_eq!(code(&out), 2);
    assert_eq!(code(&rooms(&["score", "--frobnicate"])), 2);
}

#[test]
fn help_lists_flags() {
    let out = rooms(&["compare", "--help"]);
    assert_eq!(code(&out), 0);
    let help = stdout(&out);
    for flag in [
        "--room-t",
        "--room-c",
        "--docs",
        "--benchmark",
        "--out",
        "--format",
        "--threshold",
        "--pop-t",
        "--pop-c",
        "--t",
        "--k",
        "--workers",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn compare_identical_rooms_has_no_polarization() {
    let dir = tempfile::tempdir().unwrap();
    let room = news_room(dir.path(), "news.txt", &[]);
    let docs = write(dir.path(), "docs.txt", "terrorist attack\nparis market\n");
    let report = dir.path().join("p.csv");
    let out = rooms(&[
        "compare",
        "--room-t",
        s(&room),
        "--room-c",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
        "--threshold",
        "0.1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("emotion,avg_T,avg_C,d,P,cluster"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        assert_eq!(row[1], row[2]);
        assert_eq!((row[3], row[4], row[5]), ("0", "0", "B"));
    }
}

#[test]
fn compare_detects_planted_bias() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (name, bias, seed) in [
        ("t", common::Bias::Trust, 0u64),
        ("c", common::Bias::FearAnger, 1),
    ] {
        let corpus: String = common::biased_corpus(bias, 3000, seed)
            .iter()
            .map(|s| s.join(" ") + "\n")
            .collect();
        let corpus_path = write(dir.path(), &format!("{name}.txt"), &corpus);
        let room_path = dir.path().join(format!("{name}.bin"));
        let out = rooms(&[
            "train",
            "--corpus",
            s(&corpus_path),
            "--out",
            s(&room_path),
            "--dim",
            "32",
            "--seed",
            "5",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).starts_with("vocab_size="));
        paths.push(room_path);
    }
    let docs = write(dir.path(), "docs.txt", &"candidate w1 w2\n".repeat(10));
    let report = dir.path().join("p.json");
    let out = rooms(&[
        "compare",
        "--room-t",
        s(&paths[0]),
        "--room-c",
        s(&paths[1]),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    let rows = json["rows"].as_array().unwrap();
    let row = |e: &str| rows.iter().find(|r| r["emotion"] == e).unwrap();
    assert!(row("trust")["avg_T"].as_f64() > row("trust")["avg_C"].as_f64());
    assert!(row("fear")["avg_C"].as_f64() > row("fear")["avg_T"].as_f64());
}

#[test]
fn train_is_deterministic_and_simset_reads_the_room() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, pairs) = common::planted_corpus(4, 800, 3);
    let text: String = corpus.iter().map(|s| s.join(" ") + "\n").collect();
    let corpus_path = write(dir.path(), "corpus.txt", &text);
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for path in [&a, &b] {
        let out = rooms(&[
            "train",
            "--corpus",
            s(&corpus_path),
            "--out",
            s(path),
            "--dim",
            "16",
            "--format",
            "text",
            "--seed",
            "9",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).contains("dim=16"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let header = fs::read_to_string(&a)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    assert!(header.ends_with(" 16"));

    let out = rooms(&[
        "simset",
        "--room",
        s(&a),
        "--token",
        &pairs[0].0,
        "--t",
        "0",
        "--k",
        "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], format!("{}\t1", pairs[0].0));

    let out = rooms(&["simset", "--room", s(&a), "--token", "not-a-token"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn dna_rows_are_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let room = news_room(dir.path(), "news.txt", &[]);
    let docs = write(
        dir.path(),
        "docs.txt",
        "terrorist attack paris\njoy trust\n",
    );
    let report = dir.path().join("dna.json");
    let out = rooms(&[
        "dna",
        "--room",
        s(&room),
        "--docs",
        s(&docs),
        "--out",
        s(&report),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let total: f64 = row["normalized"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
