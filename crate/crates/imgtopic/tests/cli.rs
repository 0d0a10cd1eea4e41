use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn imgtopic(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imgtopic"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Three images, two of them close together and sharing words.
fn tiny() -> TempDir {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    fs::write(p.join("triads.tsv"), "i1\tred barn\t3\ni2\tred tractor barn\t2\ni3\tgreen field\t4\n").unwrap();
    fs::write(p.join("features.txt"), "3 2\ni1 0 0\ni2 0.1 0\ni3 5 5\n").unwrap();
    fs::write(p.join("emb.txt"), "4 3\nred 1 0 0\nbarn 0.8 0.6 0\nzeta 0 0 1\ncrimson 0.95 0.1 0\n").unwrap();
    fs::write(p.join("dict.txt"), "zeta\ncrimson\n").unwrap();
    fs::write(
        p.join("config.json"),
        r#"{"paths":{"features":"features.txt","triads":"triads.tsv","embeddings":"emb.txt"},
            "lsh":{"bits":4,"seed":1},"query":{"k_neighbors":2}}"#,
    )
    .unwrap();
    dir
}

fn synth() -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = imgtopic(
        dir.path(),
        &["synth", "--out", "data", "--images", "300", "--topics", "4", "--queries-per-topic", "5", "--seed", "3"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

#[test]
fn index_reports_counts_and_lexicon() {
    let dir = tiny();
    let out = imgtopic(dir.path(), &["--config", "config.json", "index", "--out", "lex.tsv"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("images=3 "), "{}", stdout(&out));
    let lex = fs::read_to_string(dir.path().join("lex.tsv")).unwrap();
    assert!(lex.lines().any(|l| l == "red\t2"));
    assert!(lex.lines().any(|l| l == "field\t1"));
}

#[test]
fn topic_words_come_from_the_neighbourhood() {
    let dir = tiny();
    let out = imgtopic(dir.path(), &["--config", "config.json", "topic", "--images", "i1,i2", "--method", "tfidf"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["method"], "tfidf");
    assert_eq!(json["n_queries"], 2);
    let words: BTreeSet<&str> = json["words"].as_array().unwrap().iter().map(|w| w["word"].as_str().unwrap()).collect();
    assert!(words.contains("red") && words.contains("barn"));
    assert!(!words.contains("green"));
}

#[test]
fn mapped_words_stay_inside_the_dictionary() {
    let dir = tiny();
    let out = imgtopic(dir.path(), &["--config", "config.json", "topic", "--images", "i1", "--map", "dict.txt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["method"], "walk+map_crf");
    let words = json["words"].as_array().unwrap();
    assert!(!words.is_empty());
    for w in words {
        assert!(["zeta", "crimson"].contains(&w["word"].as_str().unwrap()));
    }
}

#[test]
fn exit_codes() {
    let dir = tiny();
    let p = dir.path();
    let run = |args: &[&str]| code(&imgtopic(p, args));

    assert_eq!(run(&["--config", "config.json", "topic", "--images", "nope"]), 4);
    assert_eq!(run(&["--config", "config.json", "bogus"]), 64);
    assert_eq!(run(&["--config", "config.json", "topic", "--method", "best"]), 64);
    assert_eq!(run(&["--help"]), 0);

    fs::write(p.join("missing.json"), r#"{"paths":{"features":"gone.txt","triads":"triads.tsv"}}"#).unwrap();
    assert_eq!(run(&["--config", "missing.json", "index"]), 2);
    assert_eq!(run(&["--config", "absent.json", "index"]), 2);

    fs::write(p.join("unknown.json"), r#"{"lsh":{"bits":4},"extra":true}"#).unwrap();
    assert_eq!(run(&["--config", "unknown.json", "index"]), 3);
    fs::write(p.join("zero.json"), r#"{"lsh":{"bits":0}}"#).unwrap();
    assert_eq!(run(&["--config", "zero.json", "index"]), 3);
    fs::write(p.join("broken.tsv"), "i1\tonly two\n").unwrap();
    fs::write(p.join("broken.json"), r#"{"paths":{"features":"features.txt","triads":"broken.tsv"}}"#).unwrap();
    let out = imgtopic(p, &["--config", "broken.json", "index"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    // No neighbour word has an embedding.
    fs::write(p.join("far.txt"), "1 3\nzeta 0 0 1\n").unwrap();
    fs::write(
        p.join("far.json"),
        r#"{"paths":{"features":"features.txt","triads":"triads.tsv","embeddings":"far.txt"},"lsh":{"bits":4},"query":{"k_neighbors":2}}"#,
    )
    .unwrap();
    assert_eq!(run(&["--config", "far.json", "topic", "--images", "i1"]), 5);
}

#[test]
fn evaluate_writes_one_row_per_point_and_is_deterministic() {
    let dir = synth();
    let p = dir.path();
    let args = ["--config", "data/config.json", "evaluate", "--modes", "original,worst_first"];
    let first = imgtopic(p, &args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let csv = stdout(&first);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mode,method,n_images,mean_jaccard"));
    // 2 modes x 4 methods x n = 1..=5
    assert_eq!(lines.count(), 40);
    for row in csv.lines().skip(1) {
        let j: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&j));
    }

    let second = imgtopic(p, &[&args[..], &["--out", "curves.csv"]].concat());
    assert_eq!(code(&second), 0);
    assert_eq!(fs::read_to_string(p.join("curves.csv")).unwrap(), csv);
}

#[test]
fn topic_from_query_file_is_reproducible() {
    let dir = synth();
    let p = dir.path();
    let args = ["--config", "data/config.json", "topic", "--queries", "data/query_features.txt", "--method", "walk+map_baseline"];
    let a = imgtopic(p, &args);
    let b = imgtopic(p, &args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(json["n_queries"], 20);
    let dictionary = fs::read_to_string(p.join("data/dictionary.txt")).unwrap();
    let allowed: BTreeSet<&str> = dictionary.lines().collect();
    for w in json["words"].as_array().unwrap() {
        assert!(allowed.contains(w["word"].as_str().unwrap()));
    }
}
