use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = hon(&["build", "--order", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("hon: error[usage]: "));
    assert_eq!(stderr(&o).lines().count(), 1);

    let o = hon(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));

    let o = hon(&["build", "--ngram", "/nonexistent/x.ngram", "-k", "1", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/x.ngram"));

    let bad = write(dir.path(), "bad.ngram", "a,b\n\nc,d\n");
    let o = hon(&["build", "--ngram", &bad, "-k", "1", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let ok = write(dir.path(), "ok.ngram", "a,b,a\n");
    let o = hon(&["pagerank", "--ngram", &ok, "-k", "1", "--alpha", "1.5", "--out", out]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let skewed = write(dir.path(), "skewed.ngram", "a,b,c,a,b\na,c\n");
    let o = hon(&[
        "pagerank",
        "--ngram",
        &skewed,
        "-k",
        "1",
        "--max-iter",
        "1",
        "--tol",
        "1e-15",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("hon: error[numerical]: "));

    assert_eq!(hon(&["--help"]).status.code(), Some(0));
    assert_eq!(hon(&["--version"]).status.code(), Some(0));
}

#[test]
fn pagerank_on_two_cycle_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let ngram = write(dir.path(), "cycle.ngram", "a,b,a\n");
    let out = dir.path().join("out");
    let o = hon(&["pagerank", "--ngram", &ngram, "-k", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("pagerank.csv")).unwrap();
    let rows: Vec<(String, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let (n, s) = l.split_once(',').unwrap();
            (n.to_string(), s.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2);
    for (_, s) in rows {
        assert!((s - 0.5).abs() < 1e-12);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("pagerank.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "pagerank");
    assert_eq!(manifest["inputs"][0]["role"], "ngram");
    assert!(manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .any(|o| o == "pagerank.csv"));
}

#[test]
fn build_then_analyse_saved_model() {
    let dir = tempfile::tempdir().unwrap();
    let ngram = write(dir.path(), "c.ngram", "a,b,c,d,*3\nb,b,c,a\nd,a,b,c\nc,b,d\n");
    let out = dir.path().to_str().unwrap();
    let o = hon(&["build", "--ngram", &ngram, "-k", "2", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = dir.path().join("model.json");
    assert!(model.exists() && dir.path().join("model_edges.csv").exists());

    let from_model = dir.path().join("m");
    let from_corpus = dir.path().join("c");
    let o = hon(&[
        "betweenness",
        "--model",
        model.to_str().unwrap(),
        "--out",
        from_model.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = hon(&[
        "betweenness",
        "--ngram",
        &ngram,
        "-k",
        "2",
        "--out",
        from_corpus.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read(from_model.join("betweenness.csv")).unwrap(),
        fs::read(from_corpus.join("betweenness.csv")).unwrap()
    );

    let o = hon(&[
        "predict",
        "--ngram",
        &ngram,
        "-K",
        "2",
        "--context",
        "a,b",
        "--context",
        "d",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("context=a,b used_order=2 top=c"), "{text}");
    let o = hon(&["predict", "--ngram", &ngram, "--context", "zz", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stats_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let ngram = write(dir.path(), "c.ngram", "# comment\na,b,c\na,b,*3\n");
    let o = hon(&["stats", "--ngram", &ngram, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "paths=4 mean_length=2.2500");
    assert!(dir.path().join("length_histogram.csv").exists());
}

#[test]
fn synth_then_detect_finds_planted_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hon(&[
        "synth", "--nodes", "12", "--paths", "8000", "-k", "2", "--seed", "4", "--out", out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let corpus = dir.path().join("corpus.ngram");
    let graph = dir.path().join("graph.tsv");
    let o = hon(&[
        "detect-order",
        "--ngram",
        corpus.to_str().unwrap(),
        "--graph",
        graph.to_str().unwrap(),
        "-K",
        "4",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().last(), Some("optimal_order=2"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("k=")).count(), 3);
    for name in [
        "synth.manifest.json",
        "detect-order.manifest.json",
        "detect_order.json",
        "planted.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
