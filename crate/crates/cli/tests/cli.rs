use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> String {
    root().join("fixtures").join(rel).to_string_lossy().into_owned()
}

fn golden(name: &str) -> String {
    fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn polyreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyreg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = polyreg(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

const SECTION_4: &str = "(1,1),(2,2),(2,1),(3,3),(3,2),(3,1),(4,4),(4,3),(4,2),(4,1)\n";

#[test]
fn eval_interp_reversed_prefixes() {
    assert_eq!(ok(&["eval-interp", &fixture("corpus/revprefix.json"), "--input", "abbb"]), "ababbabbba\n");
}

#[test]
fn eval_interp_json_lists_tuples() {
    let out = ok(&["eval-interp", &fixture("corpus/squaring.json"), "--input", "ab", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["output"], "abab");
    assert_eq!(v["tuples"], serde_json::json!([[1, 1], [1, 2], [2, 1], [2, 2]]));
}

#[test]
fn run_forp_letter_tuple_and_boolean() {
    assert_eq!(ok(&["run-forp", &fixture("corpus/identity.forp"), "--input", "ab"]), "ab\n");
    assert_eq!(ok(&["run-forp", &fixture("corpus/revprefix.forp"), "--input", "abbb"]), "ababbabbba\n");
    assert_eq!(ok(&["run-forp", &fixture("corpus/revprefix.enum.forp"), "--input", "abbb"]), SECTION_4);
    let b = ok(&["run-forp", &fixture("fig3.forp"), "--input", "abab", "--args", "1,3"]);
    assert!(b == "true\n" || b == "false\n");
}

#[test]
fn run_forp_trace_goes_to_stderr() {
    let o = polyreg(&["run-forp", &fixture("corpus/identity.forp"), "--input", "ab", "--trace"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "ab\n");
    assert!(!stderr(&o).is_empty());
}

#[test]
fn enumerate_and_pipeline_print_the_same_list() {
    let file = fixture("corpus/revprefix.enum.json");
    assert_eq!(ok(&["enumerate", &file, "--input", "abbb"]), SECTION_4);
    assert_eq!(ok(&["pipeline", &file, "--input", "abbb"]), SECTION_4);
}

#[test]
fn pipeline_json_matches_golden() {
    let out = ok(&["pipeline", &fixture("corpus/revprefix.enum.json"), "--input", "abbb", "--json"]);
    assert_eq!(out, golden("revprefix_enum_pipeline.json"));
}

#[test]
fn pipeline_on_interpretation_prints_output_word() {
    assert_eq!(ok(&["pipeline", &fixture("corpus/revprefix.json"), "--input", "abbb"]), "ababbabbba\n");
}

#[test]
fn pipeline_emits_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.txt");
    let out = ok(&[
        "pipeline",
        &fixture("corpus/revprefix.enum.json"),
        "--input",
        "abbb",
        "--emit-trace",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out, SECTION_4);
    let trace = fs::read_to_string(&path).unwrap();
    assert!(trace.starts_with("enumerate X1=[1,4] X2=[1,4]\n"), "{trace}");
    assert!(trace.contains("partition"));
}

#[test]
fn pipeline_rejects_mso() {
    let o = polyreg(&["pipeline", &fixture("corpus/even_distance.json"), "--input", "abab"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_equiv_counts_words() {
    let out = ok(&["check-equiv", &fixture("corpus/revprefix.json"), &fixture("corpus/revprefix.forp"), "--max-len", "6"]);
    let expected: usize = (2..=6).map(|n| 1 << n).sum();
    assert_eq!(out, format!("EQUIVALENT (words tested: {expected})\n"));
}

#[test]
fn check_equiv_reports_first_difference() {
    let o = polyreg(&["check-equiv", &fixture("corpus/identity.json"), &fixture("corpus/reverse.forp"), "--max-len", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "DIFFERENT on ab: ab vs ba\n");
}

#[test]
fn check_equiv_transducer_against_program() {
    let out = ok(&["check-equiv", &fixture("transducers/identity.json"), &fixture("corpus/identity.forp"), "--max-len", "4"]);
    assert_eq!(out, "EQUIVALENT (words tested: 28)\n");
}

#[test]
fn compose_reverse_twice_is_identity() {
    let r = fixture("corpus/reverse.json");
    assert_eq!(ok(&["compose", &r, &r, "--input", "aabab"]), "aabab\n");
    let text = ok(&["compose", &r, &fixture("corpus/squaring.json")]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["k"], 2);
}

#[test]
fn forest_matches_golden() {
    assert_eq!(ok(&["forest", &fixture("semigroups/last_letter.json"), "--input", "abbab"]), golden("forest_last_letter.txt"));
}

#[test]
fn forest_json_has_no_violations() {
    let out = ok(&["forest", &fixture("semigroups/seen_b.json"), "--input", "aababbba", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["violations"], serde_json::json!([]));
    assert!(v["height"].as_u64().unwrap() <= v["bound"].as_u64().unwrap());
}

#[test]
fn dominate_example_1_certifies_first_coordinate() {
    let out = ok(&["dominate", &fixture("corpus/revprefix.enum.json"), "--input", "abbb"]);
    let lines: Vec<&str> = out.lines().collect();
    assert!(!lines.is_empty());
    for l in lines {
        assert!(l.contains("d=1 p=+1"), "{l}");
    }
}

#[test]
fn dominate_with_blocks_json() {
    let out = ok(&["dominate", &fixture("corpus/colex_pairs.enum.json"), "--input", "abababab", "--blocks", "2,2,2,2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["gaps"], serde_json::json!([]));
    assert!(!v["certificates"].as_array().unwrap().is_empty());
}

#[test]
fn dominate_rejects_bad_blocks() {
    let o = polyreg(&["dominate", &fixture("corpus/revprefix.enum.json"), "--input", "abbb", "--blocks", "3,3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rational_dominate_fixtures() {
    for name in ["example1", "lex", "minor_first", "unary_down", "middle_first3"] {
        let file = fixture(&format!("orders/{name}.json"));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
        let (d, p) = (v["expect"][0].as_i64().unwrap(), v["expect"][1].as_i64().unwrap());
        assert_eq!(ok(&["rational-dominate", &file]), format!("d={d} p={p:+}\n"), "{name}");
    }
}

#[test]
fn corpus_check_shipped_corpus_agrees() {
    let out = ok(&["corpus-check", &fixture("corpus"), "--max-len", "6", "--json"]);
    let reports: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(reports.len(), 12);
    for r in &reports {
        assert_eq!(r["command"], "corpus-check");
        assert_eq!(r["oracle_agreement"], true, "{r}");
        assert_ne!(r["fallback"], true, "{r}");
        assert_eq!(r["outputs"]["words_tested"], 124);
        assert_eq!(r["inputs"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn corpus_check_text_matches_golden() {
    assert_eq!(ok(&["corpus-check", &fixture("corpus"), "--max-len", "4"]), golden("corpus_check_len4.txt"));
}

#[test]
fn corpus_check_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ok(&["corpus-check", dir.path().to_str().unwrap(), "--json"]), "[]\n");
    assert_eq!(ok(&["corpus-check", dir.path().to_str().unwrap()]), "0 of 0 fixtures agree\n");
}

#[test]
fn corpus_check_pinpoints_broken_order() {
    let o = polyreg(&["corpus-check", &fixture("broken")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("identity: FAILED"), "{out}");
    assert!(out.contains("order violation on aa:"), "{out}");
}

#[test]
fn corpus_check_missing_pairing_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("corpus/identity.json"), dir.path().join("identity.json")).unwrap();
    let o = polyreg(&["corpus-check", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("identity.json has no identity.forp"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(polyreg(&["bogus"]).status.code(), Some(2));
    assert_eq!(polyreg(&["eval-interp", &fixture("corpus/identity.json")]).status.code(), Some(2));
    assert_eq!(polyreg(&["check-equiv", "a.json", "b.json", "--max-len", "x"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1() {
    assert_eq!(polyreg(&["eval-interp", "missing.json", "--input", "ab"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let o = polyreg(&["eval-interp", bad.to_str().unwrap(), "--input", "ab"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: "));
    let o = polyreg(&["eval-interp", &fixture("corpus/identity.json"), "--input", "abc"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["pipeline", &fixture("corpus/increasing_triples.enum.json"), "--input", "abbab", "--json"];
    let a = polyreg(&args);
    let b = polyreg(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
