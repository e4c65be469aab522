//! Behavior tests for the executable: formats, flags and exit codes.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use lingcomp::fixtures;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lingcomp"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).to_string()
}

struct Ground {
    dir: tempfile::TempDir,
}

impl Ground {
    fn new(n_docs: usize, seed: u64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let corpus = fixtures::synth_corpus(n_docs, seed);
        let root = dir.path();
        fixtures::write_corpus_jsonl(&corpus.manual, &root.join("manual.jsonl")).unwrap();
        fixtures::write_corpus_jsonl(&corpus.asr, &root.join("asr.jsonl")).unwrap();
        fixtures::write_resource_dir(&root.join("resources"), &corpus.manual).unwrap();
        fixtures::write_transcripts(&corpus.manual, &root.join("ref.tsv")).unwrap();
        fixtures::write_transcripts(&corpus.asr, &root.join("hyp.tsv")).unwrap();
        fixtures::write_labels_csv(&corpus.labels, &root.join("labels.csv")).unwrap();
        Ground { dir }
    }

    fn arg(&self, name: &str) -> String {
        self.dir.path().join(name).display().to_string()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

#[test]
fn version_embeds_registry_pattern_and_deflate() {
    let output = run(&["--version"]);
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout).to_string();
    assert!(text.contains("registry version: v1"), "{text}");
    assert!(text.contains("pattern-set version: v1"), "{text}");
    assert!(text.contains("deflate level: 5"), "{text}");
}

#[test]
fn analyze_writes_header_plus_row_per_document() {
    let ground = Ground::new(3, 7);
    let output = run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("resources"),
        "--out-dir",
        &ground.arg("out"),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let scores = fs::read_to_string(ground.path("out/scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 4);
    assert!(scores.starts_with("doc_id,"));
    assert!(ground.path("out/contours.csv").is_file());
    assert!(ground.path("out/metadata.json").is_file());
}

#[test]
fn analyze_missing_resource_exits_1_naming_it() {
    let ground = Ground::new(2, 9);
    // drop the ANC list from the manifest
    let manifest_path = ground.path("resources/manifest.tsv");
    let manifest = fs::read_to_string(&manifest_path).unwrap();
    let without_anc: String = manifest
        .lines()
        .filter(|line| !line.contains("ANC"))
        .map(|line| format!("{line}\n"))
        .collect();
    fs::write(&manifest_path, without_anc).unwrap();
    let output = run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("resources"),
        "--out-dir",
        &ground.arg("out"),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("frequency list ANC"), "{stderr}");
}

#[test]
fn analyze_missing_resource_dir_exits_1() {
    let ground = Ground::new(2, 9);
    let output = run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("nowhere"),
        "--out-dir",
        &ground.arg("out"),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr_of(&output).contains("nowhere"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let ground = Ground::new(2, 21);
    let config = ground.path("run.conf");
    fs::write(
        &config,
        format!(
            "resources = {}\nws = 3\nstep = 2\n",
            ground.arg("resources")
        ),
    )
    .unwrap();
    let output = run(&[
        "--config",
        &config.display().to_string(),
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--out-dir",
        &ground.arg("out"),
        "--ws",
        "4",
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let metadata = fs::read_to_string(ground.path("out/metadata.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&metadata).unwrap();
    assert_eq!(json["ws"], 4, "flag must beat config");
    assert_eq!(json["step"], 2, "config must beat default");
}

#[test]
fn wer_identity_scores_zero() {
    let ground = Ground::new(4, 13);
    let output = run(&[
        "wer",
        "--ref",
        &ground.arg("ref.tsv"),
        "--hyp",
        &ground.arg("ref.tsv"),
        "--out",
        &ground.arg("wer.json"),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ground.path("wer.json")).unwrap()).unwrap();
    assert_eq!(json["corpus"]["wer"], 0.0);
    for field in ["substitutions", "insertions", "deletions", "wer", "n_ref"] {
        assert!(
            json["corpus"].get(field).is_some(),
            "corpus section lacks {field}"
        );
    }
    // Table-4-style speaker statistics come per metric
    let metrics = json["speakers"]["metrics"].as_array().unwrap();
    let names: Vec<&str> = metrics
        .iter()
        .map(|m| m["metric"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["WER", "Substitutions", "Deletions", "Insertions"]);
    for metric in metrics {
        for field in ["mean", "min", "max"] {
            assert!(metric.get(field).is_some());
        }
    }
}

#[test]
fn wer_mismatched_ids_exit_1_listing_them() {
    let ground = Ground::new(3, 5);
    let hyp = ground.path("hyp_broken.tsv");
    let original = fs::read_to_string(ground.path("hyp.tsv")).unwrap();
    let mut lines: Vec<String> = original.lines().map(str::to_string).collect();
    lines[0] = lines[0].replace("rec000", "ghost");
    fs::write(&hyp, lines.join("\n") + "\n").unwrap();
    let output = run(&[
        "wer",
        "--ref",
        &ground.arg("ref.tsv"),
        "--hyp",
        &hyp.display().to_string(),
        "--out",
        &ground.arg("wer.json"),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = stderr_of(&output);
    assert!(
        stderr.contains("rec000") && stderr.contains("ghost"),
        "{stderr}"
    );
}

#[test]
fn filter_hesitations_changes_reference_size() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.tsv");
    let hypothesis = dir.path().join("hyp.tsv");
    fs::write(&reference, "d1\tuh the dog um barked\n").unwrap();
    fs::write(&hypothesis, "d1\tthe dog barked\n").unwrap();
    let out_plain = dir.path().join("plain.json");
    let out_filtered = dir.path().join("filtered.json");
    for (out, extra) in [
        (&out_plain, None),
        (&out_filtered, Some("--filter-hesitations")),
    ] {
        let mut args = vec![
            "wer",
            "--ref",
            reference.to_str().unwrap(),
            "--hyp",
            hypothesis.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend(extra);
        let output = run(&args);
        assert!(output.status.success(), "{}", stderr_of(&output));
    }
    let plain: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_plain).unwrap()).unwrap();
    let filtered: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_filtered).unwrap()).unwrap();
    assert_eq!(plain["corpus"]["n_ref"], 5);
    assert_eq!(filtered["corpus"]["n_ref"], 3);
    assert_eq!(filtered["corpus"]["wer"], 0.0);
    assert!(plain["corpus"]["wer"].as_f64().unwrap() > 0.0);
}

#[test]
fn agree_on_identical_tables_gives_unit_rho() {
    let ground = Ground::new(6, 3);
    let output = run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("resources"),
        "--out-dir",
        &ground.arg("scored"),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let scores = format!("{}/scores.csv", ground.arg("scored"));
    let output = run(&[
        "agree",
        "--manual",
        &scores,
        "--asr",
        &scores,
        "--out-dir",
        &ground.arg("agreement"),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ground.path("agreement/agreement.json")).unwrap())
            .unwrap();
    for measure in json["measures"].as_array().unwrap() {
        if let Some(rho) = measure["rho_overall"].as_f64() {
            assert!((rho - 1.0).abs() < 1e-12);
        }
    }
    let long = fs::read_to_string(ground.path("agreement/agreement_long.csv")).unwrap();
    assert!(long.starts_with("measure,subgroup,rho\n"));
}

#[test]
fn select_records_default_threshold() {
    let ground = Ground::new(8, 3);
    run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("resources"),
        "--out-dir",
        &ground.arg("scored"),
    ]);
    let output = run(&[
        "select",
        "--scores",
        &format!("{}/scores.csv", ground.arg("scored")),
        "--out",
        &ground.arg("selection.json"),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ground.path("selection.json")).unwrap()).unwrap();
    assert_eq!(json["r_threshold"], 0.9);
    assert!(!json["retained"].as_array().unwrap().is_empty());
}

#[test]
fn rank_output_is_sorted_descending() {
    let ground = Ground::new(12, 3);
    run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("resources"),
        "--out-dir",
        &ground.arg("scored"),
    ]);
    let output = run(&[
        "rank",
        "--scores",
        &format!("{}/scores.csv", ground.arg("scored")),
        "--labels",
        &ground.arg("labels.csv"),
        "--out",
        &ground.arg("ranking.csv"),
    ]);
    assert!(output.status.success(), "{}", stderr_of(&output));
    let csv = fs::read_to_string(ground.path("ranking.csv")).unwrap();
    let mut previous = f64::INFINITY;
    let mut rows = 0;
    for line in csv.lines().skip_while(|l| l.starts_with('#')).skip(1) {
        let fi: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(fi <= previous, "not sorted: {fi} after {previous}");
        previous = fi;
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn io_failures_exit_2() {
    let ground = Ground::new(4, 3);
    run(&[
        "analyze",
        "--corpus",
        &ground.arg("manual.jsonl"),
        "--resources",
        &ground.arg("resources"),
        "--out-dir",
        &ground.arg("scored"),
    ]);
    let output = run(&[
        "select",
        "--scores",
        &format!("{}/scores.csv", ground.arg("scored")),
        "--out",
        "/nonexistent-dir/selection.json",
    ]);
    assert_eq!(output.status.code(), Some(2), "{}", stderr_of(&output));
}

#[test]
fn usage_errors_exit_1() {
    let output = run(&["analyze"]); // missing required --corpus
    assert_eq!(output.status.code(), Some(1));
}
