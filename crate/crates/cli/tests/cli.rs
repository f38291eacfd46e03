use std::path::Path;
use std::process::{Command, Output};

fn cirlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cirlab"))
        .args(args)
        .env("CIRLAB_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = cirlab(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn code(out: &Path, args: &[&str]) -> (i32, String) {
    let o = cirlab(out, args);
    let stderr = String::from_utf8_lossy(&o.stderr).into_owned();
    (o.status.code().unwrap(), stderr)
}

#[test]
fn reference_sweep_prints_five_rows_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(
        dir.path(),
        &["sweep", "--seed", "42", "--docs", "50", "--dim", "256"],
    );
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 7, "{stdout}");
    assert!(lines[0].starts_with("strategy,mean_cir,ndcg10"));
    let names: Vec<&str> = lines[1..6]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(names, ["baseline", "low", "medium", "high", "overload"]);
    assert!(lines[6].starts_with("# flags "));
    assert!(lines[6].contains("inverted_u=true"));
    assert!(!lines[6].ends_with("curve_cross_cir=none"));

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv, lines[..6].join("\n") + "\n");
    assert!(dir.path().join("sweep.jsonl").exists());
    assert!(dir.path().join("sweep.config.toml").exists());
}

#[test]
fn reruns_overwrite_with_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--docs", "12", "--with-ddai"];
    ok(dir.path(), &args);
    let first = std::fs::read(dir.path().join("sweep.csv")).unwrap();
    let first_jsonl = std::fs::read(dir.path().join("sweep.jsonl")).unwrap();
    ok(dir.path(), &args);
    assert_eq!(first, std::fs::read(dir.path().join("sweep.csv")).unwrap());
    assert_eq!(
        first_jsonl,
        std::fs::read(dir.path().join("sweep.jsonl")).unwrap()
    );
}

#[test]
fn stage_chain_matches_sweep_and_answers_queries() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let common = ["--docs", "12", "--seed", "5"];
    let with = |cmd: &str, extra: &[&str]| -> String {
        let mut args = vec![cmd];
        args.extend(common);
        args.extend(extra);
        ok(d, &args)
    };
    with("gen", &[]);
    let gen_bytes = std::fs::read(d.join("corpus.jsonl")).unwrap();
    with("gen", &[]);
    assert_eq!(gen_bytes, std::fs::read(d.join("corpus.jsonl")).unwrap());

    with("chunk", &[]);
    with("inject", &["--strategy", "high"]);
    with("embed", &["--strategy", "high"]);
    with("index", &["--strategy", "high"]);
    assert_eq!(
        std::fs::read(d.join("vectors_high.cirx")).unwrap(),
        std::fs::read(d.join("index_high.cirx")).unwrap()
    );
    let hits = with(
        "query",
        &[
            "--strategy",
            "high",
            "--text",
            "anything at all",
            "--k",
            "10",
        ],
    );
    assert_eq!(hits.lines().count(), 10);
    let ranks: Vec<&str> = hits
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(ranks, ["1", "2", "3", "4", "5", "6", "7", "8", "9", "10"]);

    // Sweeping the stored corpus reproduces the sweep that generates it.
    let corpus = d.join("corpus.jsonl");
    let from_file = with("sweep", &["--corpus", corpus.to_str().unwrap()]);
    let generated = with("sweep", &[]);
    assert_eq!(from_file, generated);
}

#[test]
fn report_plotdata_writes_one_series_per_strategy() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sweep", "--docs", "12", "--with-ddai"]);
    let listed = ok(dir.path(), &["report", "--format", "plotdata"]);
    assert_eq!(listed.lines().count(), 6);
    let series = std::fs::read_to_string(dir.path().join("plot_medium.dat")).unwrap();
    for line in series.lines() {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols.len(), 2, "{line}");
        cols[1].parse::<f64>().unwrap();
    }
    let csv_before = std::fs::read(dir.path().join("sweep.csv")).unwrap();
    ok(dir.path(), &["report", "--format", "csv"]);
    assert_eq!(
        csv_before,
        std::fs::read(dir.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "docs = 9\nseed = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = ok(dir.path(), &["gen", "--config", cfg]);
    assert!(out.starts_with("9 documents"), "{out}");
    let out = ok(dir.path(), &["gen", "--config", cfg, "--docs", "10"]);
    assert!(out.starts_with("10 documents"), "{out}");
    let echo = std::fs::read_to_string(dir.path().join("gen.config.toml")).unwrap();
    assert!(
        echo.contains("docs = 10") && echo.contains("seed = 3"),
        "{echo}"
    );
}

#[test]
fn failures_have_distinct_exit_codes_and_one_line_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let (c, _) = code(d, &["sweep", "--k", "many"]);
    assert_eq!(c, 2);
    let (c, _) = code(d, &["report", "--format", "xml"]);
    assert_eq!(c, 2);

    let (c, err) = code(d, &["chunk"]);
    assert_eq!(c, 3);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("corpus.jsonl"));

    let bad = d.join("bad.cirx");
    std::fs::write(&bad, b"CIRX\x09\x00").unwrap();
    let (c, err) = code(
        d,
        &["query", "--index", bad.to_str().unwrap(), "--text", "x"],
    );
    assert_eq!(c, 4);
    assert_eq!(err.lines().count(), 1, "{err}");

    let broken = d.join("corpus.jsonl");
    std::fs::write(&broken, "{not json\n").unwrap();
    let (c, _) = code(d, &["chunk"]);
    assert_eq!(c, 4);

    let cfg = d.join("c.toml");
    std::fs::write(&cfg, "dims = 3\n").unwrap();
    let (c, _) = code(d, &["gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(c, 5);
    let (c, _) = code(d, &["gen", "--target", "4"]);
    assert_eq!(c, 5);
    let (c, _) = code(d, &["sweep", "--docs", "6", "--dim", "2"]);
    assert_eq!(c, 5);
    let (c, _) = code(
        d,
        &["gen", "--config", d.join("absent.toml").to_str().unwrap()],
    );
    assert_eq!(c, 3);
}

#[test]
fn help_documents_formats() {
    let dir = tempfile::tempdir().unwrap();
    let help = ok(dir.path(), &["--help"]);
    for needle in [
        "corpus.jsonl",
        "CIRX",
        "sweep.csv",
        "plot_<s>.dat",
        "Exit codes",
        "CIRLAB_OUT_DIR",
    ] {
        assert!(help.contains(needle), "help lacks {needle}");
    }
}
