//! End-to-end tests that drive the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const FIXTURE_CSV: &str = "\
subject,task,frame,AU1,AU2,AU4,AU6,AU7,AU10,AU12,AU14,AU15,AU17,AU23,AU24
F001,T1,1,0,0,0,0,0,0,0,0,0,0,0,0
F001,T1,2,0,0,0,0,0,0,0,0,1,1,0,0
F001,T1,3,0,0,0,1,0,0,1,0,0,0,0,0
F001,T1,4,0,0,0,0,0,0,1,0,0,0,0,0
";

fn aufacs() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_aufacs"));
    command.env_remove("AUFACS_CORPUS");
    command
}

fn run(args: &[&str]) -> Output {
    aufacs().args(args).output().expect("binary should run")
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    use std::io::Write;
    let mut child = aufacs()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary should start");
    child
        .stdin
        .take()
        .expect("stdin should be piped")
        .write_all(input.as_bytes())
        .expect("stdin should accept input");
    child.wait_with_output().expect("binary should finish")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr should be UTF-8")
}

fn code(output: &Output) -> i32 {
    output
        .status
        .code()
        .expect("binary should exit, not die on a signal")
}

fn write_fixture(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("fixture should be writable");
    path
}

const EVAL_VECTORS: &str = "\
a,1,0,0,0,0,0,0,0,0,0,0,0
b,0,1,0,0,0,0,0,0,0,0,0,0
";

const GT_VECTORS: &str = "\
g1,1,0,0,0,0,0,0,0,0,0,0,0
g2,0,0,1,0,0,0,0,0,0,0,0,0
";

#[test]
fn compose_prints_the_requested_paraphrase() {
    let output = run(&["compose", "15", "--paraphrase", "0"]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    assert_eq!(
        stdout(&output),
        "The lip corners are pulled down, with some lateral pulling and angling down \
         of the corners, and slight bulges and wrinkles appear beyond the lip corners.\n"
    );
}

#[test]
fn compose_merges_a_combinable_pair() {
    let output = run(&["compose", "15,17", "--paraphrase", "0"]);
    assert_eq!(code(&output), 0);
    let text = stdout(&output);
    assert!(
        text.starts_with("The lip corners are pulled down slightly"),
        "unexpected text: {text}"
    );
    assert_eq!(text.lines().count(), 1, "one construct means one line");
}

#[test]
fn compose_rejects_a_non_canonical_au() {
    let output = run(&["compose", "3"]);
    assert_eq!(code(&output), 2);
    assert!(stdout(&output).is_empty(), "errors must not reach stdout");
    assert!(
        stderr(&output).contains("AU3"),
        "stderr should name the bad AU: {}",
        stderr(&output)
    );
}

#[test]
fn compose_rejects_an_empty_au_list() {
    let output = run(&["compose", ","]);
    assert_eq!(code(&output), 2);
    assert!(stderr(&output).contains("no action units"));
}

#[test]
fn compose_is_deterministic_per_seed() {
    let first = run(&["compose", "1,2,4,6,12", "--seed", "9"]);
    let second = run(&["compose", "1,2,4,6,12", "--seed", "9"]);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn compose_records_format_carries_the_decomposition() {
    let output = run(&[
        "--format",
        "records",
        "compose",
        "15,17",
        "--paraphrase",
        "2",
    ]);
    assert_eq!(code(&output), 0);
    let line = stdout(&output);
    assert!(line.starts_with("constructs=15+17\tparaphrases=2\tseed=\ttext="));
}

#[test]
fn strict_parse_round_trips_composed_text() {
    let composed = run(&["compose", "6,12,15,23", "--seed", "3"]);
    assert_eq!(code(&composed), 0);
    let parsed = run_with_stdin(&["parse"], &stdout(&composed));
    assert_eq!(code(&parsed), 0, "stderr: {}", stderr(&parsed));
    let report = stdout(&parsed);
    assert!(
        report.contains("AU6, AU12 and AU15 [paraphrase "),
        "report: {report}"
    );
    assert!(report.contains("AU23 [paraphrase "), "report: {report}");
    assert!(
        report.contains("activation: 000100101010 (AU6, AU12, AU15, AU23)"),
        "report: {report}"
    );
}

#[test]
fn strict_parse_rejects_noise_with_exit_3() {
    let output = run_with_stdin(&["parse"], "total nonsense here");
    assert_eq!(code(&output), 3);
    assert!(stdout(&output).is_empty());
    assert!(
        stderr(&output).contains("byte offset 0"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn lenient_parse_keeps_noise_as_residual() {
    let output = run_with_stdin(&["parse", "--mode", "lenient"], "total nonsense here");
    assert_eq!(code(&output), 0);
    let report = stdout(&output);
    assert!(
        report.contains("activation: 000000000000 (none)"),
        "report: {report}"
    );
    assert!(
        report.contains("residual: total nonsense here"),
        "report: {report}"
    );
}

#[test]
fn lenient_parse_finds_an_embedded_paraphrase() {
    let composed = run(&["compose", "12", "--paraphrase", "1"]);
    let embedded = format!(
        "Noise before. {} Noise after.",
        stdout(&composed).trim_end()
    );
    let output = run_with_stdin(&["parse", "--mode", "lenient"], &embedded);
    assert_eq!(code(&output), 0);
    let report = stdout(&output);
    assert!(report.contains("AU12 [paraphrase 1]"), "report: {report}");
    assert!(
        report.contains("activation: 000000100000 (AU12)"),
        "report: {report}"
    );
    assert!(report.contains("Noise before."), "report: {report}");
    assert!(report.contains("Noise after."), "report: {report}");
}

#[test]
fn validate_corpus_reports_every_invariant() {
    let output = run(&["validate-corpus"]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let report = stdout(&output);
    assert!(
        report.contains("38 constructs (12 individual, 26 combined), 190 texts, OK"),
        "report: {report}"
    );
    assert!(report.contains("PASS "), "report: {report}");
}

#[test]
fn corpus_path_can_come_from_the_environment() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/au_text_corpus.txt");
    let output = aufacs()
        .env("AUFACS_CORPUS", &corpus)
        .args(["compose", "15", "--paraphrase", "0"])
        .output()
        .expect("binary should run");
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    assert_eq!(
        stdout(&output),
        stdout(&run(&["compose", "15", "--paraphrase", "0"]))
    );
}

#[test]
fn missing_corpus_file_fails_with_exit_2() {
    let output = run(&["--corpus", "/nonexistent/corpus.txt", "validate-corpus"]);
    assert_eq!(code(&output), 2);
    assert!(stdout(&output).is_empty());
    assert!(stderr(&output).contains("cannot load corpus"));
}

#[test]
fn build_writes_identical_files_for_the_same_seed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = write_fixture(dir.path(), "F001_T1.csv", FIXTURE_CSV);
    let csv = csv.to_str().expect("utf-8 path");
    let first = dir.path().join("first.txt");
    let second = dir.path().join("second.txt");
    for out in [&first, &second] {
        let output = run(&["build", csv, "--out", out.to_str().unwrap(), "--seed", "42"]);
        assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
        assert!(stdout(&output).contains("wrote 3 annotation records from 4 frames"));
    }
    let first = std::fs::read(&first).expect("first output");
    let second = std::fs::read(&second).expect("second output");
    assert!(!first.is_empty());
    assert_eq!(first, second, "same inputs and seed must reproduce bytes");
}

#[test]
fn build_streams_records_to_stdout_without_out() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = write_fixture(dir.path(), "F001_T1.csv", FIXTURE_CSV);
    let output = run(&["build", csv.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(code(&output), 0);
    let body = stdout(&output);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in &lines {
        assert!(
            line.starts_with("subject=F001\ttask=T1\tframe="),
            "line: {line}"
        );
        assert!(line.contains("\treference=F001/T1/1.jpg\t"), "line: {line}");
    }
}

#[test]
fn build_takes_subject_and_task_from_the_file_stem() {
    let dir = tempfile::tempdir().expect("tempdir");
    let headless = "\
frame,AU1,AU2,AU4,AU6,AU7,AU10,AU12,AU14,AU15,AU17,AU23,AU24
1,0,0,0,0,0,0,0,0,0,0,0,0
2,0,0,0,0,0,0,1,0,0,0,0,0
";
    let csv = write_fixture(dir.path(), "M042_T7.csv", headless);
    let output = run(&["build", csv.to_str().unwrap()]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let body = stdout(&output);
    assert!(
        body.starts_with("subject=M042\ttask=T7\tframe=2"),
        "body: {body}"
    );
    assert!(body.contains("\timage=M042/T7/2.jpg\t"), "body: {body}");
}

#[test]
fn build_rejects_duplicate_frames_across_inputs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let first = write_fixture(dir.path(), "F001_T1.csv", FIXTURE_CSV);
    let second = write_fixture(dir.path(), "other.csv", FIXTURE_CSV);
    let output = run(&["build", first.to_str().unwrap(), second.to_str().unwrap()]);
    assert_eq!(code(&output), 2);
    assert!(
        stderr(&output).contains("duplicate frame F001/T1/1"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn stats_tallies_the_fixture_by_hand_counts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = write_fixture(dir.path(), "F001_T1.csv", FIXTURE_CSV);
    let records = dir.path().join("records.txt");
    let built = run(&[
        "build",
        csv.to_str().unwrap(),
        "--out",
        records.to_str().unwrap(),
    ]);
    assert_eq!(code(&built), 0);

    let output = run(&["stats", records.to_str().unwrap()]);
    assert_eq!(code(&output), 0);
    let table = stdout(&output);
    assert!(table.contains("total records: 3"), "table: {table}");
    assert_eq!(table.matches("0.333333").count(), 3, "table: {table}");

    let machine = run(&["--format", "records", "stats", records.to_str().unwrap()]);
    let body = stdout(&machine);
    assert!(
        body.contains("category=individual\tentries=1\toccurrences=1\tdominant=1"),
        "body: {body}"
    );
    assert!(
        body.contains("category=conflicting\tentries=1"),
        "body: {body}"
    );
}

#[test]
fn stats_reads_from_standard_input() {
    let dir = tempfile::tempdir().expect("tempdir");
    let csv = write_fixture(dir.path(), "F001_T1.csv", FIXTURE_CSV);
    let built = run(&["build", csv.to_str().unwrap()]);
    let output = run_with_stdin(&["stats"], &stdout(&built));
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("total records: 3"));
}

#[test]
fn aaad_scores_identical_pairs_at_the_upper_bound() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ei = write_fixture(dir.path(), "ei.csv", EVAL_VECTORS);
    let et = write_fixture(dir.path(), "et.csv", EVAL_VECTORS);
    let gi = write_fixture(dir.path(), "gi.csv", GT_VECTORS);
    let gt = write_fixture(dir.path(), "gt.csv", GT_VECTORS);
    let output = run(&[
        "aaad",
        "--eval-images",
        ei.to_str().unwrap(),
        "--eval-texts",
        et.to_str().unwrap(),
        "--gt-images",
        gi.to_str().unwrap(),
        "--gt-texts",
        gt.to_str().unwrap(),
        "--seed",
        "7",
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let report = stdout(&output);
    assert!(report.contains("pairs evaluated: 2"), "report: {report}");
    assert!(report.contains("aaad: 1.000000"), "report: {report}");
    assert!(
        report.contains("(shuffled pairing, seed 7)"),
        "report: {report}"
    );
}

#[test]
fn aaad_accepts_supplied_bounds_in_records_format() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ei = write_fixture(dir.path(), "ei.csv", EVAL_VECTORS);
    let et = write_fixture(dir.path(), "et.csv", EVAL_VECTORS);
    let output = run(&[
        "--format",
        "records",
        "aaad",
        "--eval-images",
        ei.to_str().unwrap(),
        "--eval-texts",
        et.to_str().unwrap(),
        "--cmin",
        "0",
        "--cmax",
        "1",
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    assert_eq!(
        stdout(&output),
        "pairs=2\tmean_cosine=1\tc_min=0\tc_max=1\taaad=1\tbounds_warning=false\n"
    );
}

#[test]
fn aaad_degenerate_bounds_exit_4() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ei = write_fixture(dir.path(), "ei.csv", EVAL_VECTORS);
    let et = write_fixture(dir.path(), "et.csv", EVAL_VECTORS);
    let output = run(&[
        "aaad",
        "--eval-images",
        ei.to_str().unwrap(),
        "--eval-texts",
        et.to_str().unwrap(),
        "--cmin",
        "0.5",
        "--cmax",
        "0.5",
    ]);
    assert_eq!(code(&output), 4);
    assert!(stdout(&output).is_empty());
    assert!(
        stderr(&output).contains("degenerate normalization bounds"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn aaad_rejects_unpaired_ids() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ei = write_fixture(dir.path(), "ei.csv", EVAL_VECTORS);
    let et = write_fixture(
        dir.path(),
        "et.csv",
        "a,1,0,0,0,0,0,0,0,0,0,0,0\nzz,0,1,0,0,0,0,0,0,0,0,0,0\n",
    );
    let output = run(&[
        "aaad",
        "--eval-images",
        ei.to_str().unwrap(),
        "--eval-texts",
        et.to_str().unwrap(),
        "--cmin",
        "0",
        "--cmax",
        "1",
    ]);
    assert_eq!(code(&output), 2);
    assert!(
        stderr(&output).contains("present in only one of the two files"),
        "stderr: {}",
        stderr(&output)
    );
}
