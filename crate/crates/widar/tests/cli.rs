//! End-to-end checks of the command-line surface: score output layout,
//! determinism at the byte level, strict mode, and correlation tables.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn widar_bin() -> &'static str {
    env!("CARGO_BIN_EXE_widar")
}

fn run(args: &[&str]) -> Output {
    Command::new(widar_bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_corpus(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("corpus.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"id\":\"r1\",\"document\":\"the cat sat down. it was tired. the end came soon.\",\"references\":[\"the cat sat down\"],\"summary\":\"the cat was tired\",\"judgments\":{\"coherence\":4,\"consistency\":5,\"fluency\":4,\"relevance\":3}}\n",
            "{\"id\":\"r2\",\"document\":\"a b c d. e f g.\",\"references\":[\"a b c\",\"e f\"],\"summary\":\"a b e f\",\"judgments\":{\"coherence\":2,\"consistency\":3,\"fluency\":5,\"relevance\":2}}\n",
            "{\"id\":\"r3\",\"document\":\"markets rose today. traders were happy. volume was high.\",\"references\":[\"markets rose. traders were happy.\"],\"summary\":\"markets rose today\",\"judgments\":{\"coherence\":5,\"consistency\":4,\"fluency\":3,\"relevance\":5}}\n",
        ),
    )
    .unwrap();
    path
}

fn payload_lines(stdout: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(stdout)
        .lines()
        .filter(|l| !l.contains("\"header\""))
        .map(str::to_owned)
        .collect()
}

#[test]
fn score_writes_header_and_sorted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = run(&["score", "--input", corpus.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("\"header\""));
    assert!(lines[0].contains("\"fingerprint\""));
    let ids: Vec<&str> = lines[1..]
        .iter()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            assert_eq!(v["metric"], "WIDAR_L");
            // six decimal places on every float
            assert!(l.contains("\"lambda\":0.500000"));
            Box::leak(v["record_id"].as_str().unwrap().to_owned().into_boxed_str()) as &str
        })
        .collect();
    assert_eq!(ids, ["r1", "r2", "r3"]);
}

#[test]
fn score_payload_is_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let base = run(&["score", "--input", corpus.to_str().unwrap(), "--jobs", "1"]);
    let again = run(&["score", "--input", corpus.to_str().unwrap(), "--jobs", "1"]);
    let parallel = run(&["score", "--input", corpus.to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(payload_lines(&base.stdout), payload_lines(&again.stdout));
    assert_eq!(payload_lines(&base.stdout), payload_lines(&parallel.stdout));
}

#[test]
fn lambda_zero_rows_equal_idss_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = run(&[
        "score",
        "--input",
        corpus.to_str().unwrap(),
        "--lambda",
        "0",
    ]);
    for line in payload_lines(&out.stdout) {
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["recall"], v["precision"]);
        assert_eq!(v["recall"], v["fscore"]);
    }
}

#[test]
fn strict_mode_fails_on_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"id\":\"ok\",\"document\":\"a b.\",\"references\":[\"a b\"],\"summary\":\"a\"}\n",
            "{\"id\":\"bad\",\"document\":\"a b.\",\"references\":[\"a b\"],\"summary\":\"\"}\n",
        ),
    )
    .unwrap();

    let strict = run(&["score", "--input", path.to_str().unwrap(), "--strict"]);
    assert!(!strict.status.success());

    // non-strict: warns, still writes the good row, exits nonzero
    let lax = run(&["score", "--input", path.to_str().unwrap()]);
    assert!(!lax.status.success());
    assert!(String::from_utf8_lossy(&lax.stderr).contains("bad"));
    let rows = payload_lines(&lax.stdout);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains("\"ok\""));
}

#[test]
fn csv_output_has_six_decimal_floats() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let csv_path = dir.path().join("scores.csv");
    let out = run(&[
        "score",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        dir.path().join("scores.jsonl").to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "record_id,metric,recall,precision,fscore,lambda,config"
    );
    let first = lines.next().unwrap();
    assert!(first.starts_with("r1,WIDAR_L,0."));
    assert!(first.contains(",0.500000,"));
}

#[test]
fn weights_dump_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("twins.jsonl");
    // reference with twin sentences and a unique one
    fs::write(
        &path,
        "{\"id\":\"t\",\"document\":\"a b. x y.\",\"references\":[\"a b. a b. p q.\"],\"summary\":\"a b\"}\n",
    )
    .unwrap();
    let out = run(&["weights", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stdout).lines().next().unwrap()).unwrap();
    let w_red: Vec<f64> = v["w_red"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((w_red[0] - 2.0 / 3.0).abs() < 1e-9);
    assert!((w_red[1] - 2.0 / 3.0).abs() < 1e-9);
    assert!((w_red[2] - 1.0).abs() < 1e-9);
}

#[test]
fn weights_theta1_zero_gives_full_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = run(&[
        "weights",
        "--input",
        corpus.to_str().unwrap(),
        "--theta1",
        "0",
    ]);
    assert!(out.status.success());
    for line in String::from_utf8_lossy(&out.stdout).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for x in v["w_cov"].as_array().unwrap() {
            assert_eq!(x.as_f64().unwrap(), 1.0);
        }
    }
}

#[test]
fn correlate_identical_column_ranks_first() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    // third-party score file equal to the relevance column
    let scores = dir.path().join("relevance-clone.jsonl");
    fs::write(
        &scores,
        "{\"record_id\":\"r1\",\"score\":3}\n{\"record_id\":\"r2\",\"score\":2}\n{\"record_id\":\"r3\",\"score\":5}\n",
    )
    .unwrap();
    let noise = dir.path().join("noise.jsonl");
    fs::write(
        &noise,
        "{\"record_id\":\"r1\",\"score\":0.2}\n{\"record_id\":\"r2\",\"score\":0.9}\n{\"record_id\":\"r3\",\"score\":0.1}\n",
    )
    .unwrap();
    let out = run(&[
        "correlate",
        "--scores",
        scores.to_str().unwrap(),
        noise.to_str().unwrap(),
        "--judgments",
        corpus.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let clone_line = text
        .lines()
        .find(|l| l.starts_with("relevance-clone"))
        .unwrap();
    assert!(clone_line.contains("1.000000 ( 1)"), "line: {clone_line}");
}

#[test]
fn correlate_refuses_mixed_fingerprints() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for (path, lambda) in [(&a, "0.5"), (&b, "0.7")] {
        let out = run(&[
            "score",
            "--input",
            corpus.to_str().unwrap(),
            "--lambda",
            lambda,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let refused = run(&[
        "correlate",
        "--scores",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--judgments",
        corpus.to_str().unwrap(),
    ]);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("different configurations"));

    let allowed = run(&[
        "correlate",
        "--scores",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--judgments",
        corpus.to_str().unwrap(),
        "--allow-mixed-config",
    ]);
    assert!(allowed.status.success());
}

#[test]
fn ablate_emits_all_rows() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let json_out = dir.path().join("ablation.json");
    let out = run(&[
        "ablate",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        json_out.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_out).unwrap()).unwrap();
    for row in [
        "WIDAR_L",
        "ROUGE-L_W",
        "-W_red",
        "-W_cov",
        "ROUGE-L_SL",
        "ROUGE-L",
        "IDSS",
    ] {
        assert!(v.get(row).is_some(), "missing ablation row {row}");
    }
}

#[test]
fn human_corr_prints_symmetric_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out = run(&["human-corr", "--input", corpus.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("coherence"));
    assert!(text.contains("1.000000"));
}

#[test]
fn bench_rejects_zero_records() {
    let out = run(&["bench", "-n", "0"]);
    assert!(!out.status.success());
}

#[test]
fn summeval_format_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summeval.jsonl");
    fs::write(
        &path,
        "{\"id\":\"cnn-1\",\"model_id\":\"M9\",\"text\":\"the cat sat. it left.\",\"decoded\":\"the cat sat\",\"references\":[\"a cat sat\",\"the cat was sitting\"],\"expert_annotations\":[{\"coherence\":4,\"consistency\":5,\"fluency\":5,\"relevance\":4},{\"coherence\":5,\"consistency\":5,\"fluency\":5,\"relevance\":4}]}\n",
    )
    .unwrap();
    let out = run(&[
        "score",
        "--input",
        path.to_str().unwrap(),
        "--format",
        "summeval",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = payload_lines(&out.stdout);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains("cnn-1::M9"));
}
