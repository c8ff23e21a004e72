use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

/// A word whose lower bound (8) is below its index (9), so deciding or
/// certifying it takes real search.
const HARD: &str = "0010111011000101101";

fn asmgram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asmgram"))
        .args(args)
        .env_remove("ASMGRAM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compute_exact_golden_and_trivial() {
    let out = asmgram(&["compute", "01010", "--exact"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("value: 3 (optimal)"), "{}", stdout(&out));

    let out = asmgram(&["compute", "0", "--exact", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["value"], 0);
    assert_eq!(v["optimal"], true);
}

#[test]
fn compute_json_is_versioned_and_sandwiched() {
    let word: String = (0..200u32).map(|i| if (i * 7919 + i / 3) % 5 < 2 { 'a' } else { 'b' }).collect();
    let out = asmgram(&["compute", &word, "--approx", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let value = v["value"].as_u64().unwrap();
    assert!(v["bounds"]["log_lower"].as_u64().unwrap() <= value);
    assert!(value <= 199);
    assert_eq!(v["n"], 200);
}

#[test]
fn compute_reads_file_and_bounds_only() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("w.txt");
    fs::write(&file, "aaaaaaaa\n").unwrap();
    let out = asmgram(&["compute", "--file", path_str(&file), "--bounds-only", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["n"], 8);
    assert!(v["value"].is_null());
    assert_eq!(v["bounds"]["log_lower"], 3);
}

#[test]
fn compute_malformed_input_exits_2() {
    assert_eq!(code(&asmgram(&["compute", ""])), 2);
    assert_eq!(code(&asmgram(&["compute", "abc", "--alphabet", "ab"])), 2);
    assert_eq!(code(&asmgram(&["compute", "--file", "/nonexistent/word"])), 2);
    assert_eq!(code(&asmgram(&["compute", "ab", "--exact", "--approx"])), 2);
}

#[test]
fn compute_strict_budget_exhaustion_exits_3() {
    let out = asmgram(&["compute", HARD, "--exact", "--strict", "--node-budget", "1", "--json"]);
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["optimal"], false);
    assert!(v["value"].as_u64().unwrap() >= 9);

    let out = asmgram(&["compute", HARD, "--exact", "--node-budget", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn emitted_witnesses_reverify() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("p.txt");
    let grammar = dir.path().join("g.txt");
    let witness = dir.path().join("w.bin");
    for word in ["01010", "abracadabra", "x"] {
        let out = asmgram(&[
            "compute",
            word,
            "--emit-plan",
            path_str(&plan),
            "--emit-grammar",
            path_str(&grammar),
            "--emit-witness",
            path_str(&witness),
            "--json",
        ]);
        assert_eq!(code(&out), 0, "{word}");
        let k = json(&out)["value"].as_u64().unwrap().to_string();
        assert_eq!(code(&asmgram(&["verify", "--plan", path_str(&plan), "--k", &k])), 0, "{word}");
        let out = asmgram(&["verify", "--witness", path_str(&witness), "--target", word, "--k", &k]);
        assert_eq!(code(&out), 0, "{word}");

        let converted = dir.path().join("from_grammar.txt");
        assert_eq!(code(&asmgram(&["convert", "--to", "plan", path_str(&grammar), path_str(&converted)])), 0);
        assert_eq!(code(&asmgram(&["verify", "--plan", path_str(&converted), "--k", &k])), 0, "{word}");
    }
}

#[test]
fn verify_accepts_rejects_and_reports() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("p.txt");
    fs::write(&plan, "alphabet: 0 1\ntarget: 01010\ns1 = '0' + '1'\ns2 = s1 + '0'\ns3 = s1 + s2\n").unwrap();
    assert_eq!(code(&asmgram(&["verify", "--plan", path_str(&plan), "--k", "3"])), 0);

    let out = asmgram(&["verify", "--plan", path_str(&plan), "--k", "2"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("produced: 01010"));

    let swapped = dir.path().join("swapped.txt");
    fs::write(&swapped, "alphabet: 0 1\ntarget: 01010\ns1 = '0' + '1'\ns2 = s1 + '0'\ns3 = s2 + s1\n").unwrap();
    let out = asmgram(&["verify", "--plan", path_str(&swapped), "--k", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("produced: 01001"));

    let out = asmgram(&["verify", "--plan", path_str(&swapped), "--target", "01001", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"]["accepted"], true);
}

#[test]
fn verify_parse_errors_exit_2_with_line() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("fwd.txt");
    fs::write(&plan, "target: aaa\ns1 = 'a' + 'a'\ns2 = s3 + 'a'\n").unwrap();
    let out = asmgram(&["verify", "--plan", path_str(&plan)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let junk = dir.path().join("junk.bin");
    fs::write(&junk, [3u8, 2, 0xff]).unwrap();
    assert_eq!(code(&asmgram(&["verify", "--witness", path_str(&junk), "--target", "01010"])), 2);
}

#[test]
fn decide_exit_codes() {
    let out = asmgram(&["decide", "01010", "3"]);
    assert_eq!((code(&out), stdout(&out).trim()), (0, "YES"));
    let out = asmgram(&["decide", "01010", "2"]);
    assert_eq!((code(&out), stdout(&out).trim()), (1, "NO"));

    let out = asmgram(&["decide", "011010", "5", "--json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["outcome"], "YES");
    assert_eq!(v["nodes"], 0);

    let out = asmgram(&["decide", HARD, "8", "--node-budget", "1"]);
    assert_eq!((code(&out), stdout(&out).trim()), (4, "UNKNOWN"));
    let out = asmgram(&["decide", HARD, "8"]);
    assert_eq!((code(&out), stdout(&out).trim()), (1, "NO"));
}

#[test]
fn convert_both_directions() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("p.txt");
    let grammar = dir.path().join("g.txt");
    fs::write(&plan, "alphabet: 0 1\ntarget: 01010\ns1 = '0' + '1'\ns2 = s1 + '0'\ns3 = s1 + s2\n").unwrap();
    assert_eq!(code(&asmgram(&["convert", "--to", "grammar", path_str(&plan), path_str(&grammar)])), 0);
    let text = fs::read_to_string(&grammar).unwrap();
    assert!(text.contains("R3 -> R1 R2"), "{text}");

    let back = dir.path().join("back.txt");
    let again = dir.path().join("again.txt");
    let regrammar = dir.path().join("g2.txt");
    assert_eq!(code(&asmgram(&["convert", "--to", "plan", path_str(&grammar), path_str(&back)])), 0);
    assert_eq!(code(&asmgram(&["convert", "--to", "grammar", path_str(&back), path_str(&regrammar)])), 0);
    assert_eq!(code(&asmgram(&["convert", "--to", "plan", path_str(&regrammar), path_str(&again)])), 0);
    assert_eq!(fs::read(&back).unwrap(), fs::read(&again).unwrap());
    assert_eq!(fs::read_to_string(&back).unwrap(), fs::read_to_string(&plan).unwrap());
}

#[test]
fn convert_singleton_and_cyclic_grammars() {
    let dir = TempDir::new().unwrap();
    let single = dir.path().join("single.txt");
    fs::write(&single, "start: S\nS -> 'x'\n").unwrap();
    let out = asmgram(&["convert", "--to", "plan", path_str(&single), "-"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "alphabet: x\ntarget: x\n");

    let cyclic = dir.path().join("cyclic.txt");
    fs::write(&cyclic, "start: S\nS -> A 'a'\nA -> B 'a'\nB -> A 'a'\n").unwrap();
    let out = asmgram(&["convert", "--to", "plan", path_str(&cyclic), "-"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycl"));
}

#[test]
fn oracle_command() {
    let out = asmgram(&["oracle", "01010"]);
    assert_eq!((code(&out), stdout(&out).trim()), (0, "3"));
    let out = asmgram(&["oracle", "01010", "--unpruned"]);
    assert_eq!(stdout(&out).trim(), "3");
    assert_eq!(code(&asmgram(&["oracle", "01010101010"])), 2);
}

#[test]
fn audit_writes_csv() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("audit.csv");
    let out = asmgram(&["audit", "--alphabet", "01", "--max-n", "5", "--report", path_str(&report)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("62 words, 0 violations"));
    let text = fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "word,n,oracle,exact,log_lower,lz_factors,lz_lower,approx_best,trivial_upper"
    );
    assert_eq!(lines.clone().count(), 62);
    assert!(text.contains("\n01010,5,3,3,3,3,2,3,4\n"));
}

#[test]
fn bench_unary_corpus_balanced_hits_log() {
    let dir = TempDir::new().unwrap();
    for k in 1..=10u32 {
        fs::write(dir.path().join(format!("u{k:02}")), "a".repeat(1 << k)).unwrap();
    }
    let out = asmgram(&["bench", "--corpus", path_str(dir.path()), "--methods", "balanced"]);
    assert_eq!(code(&out), 0);
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "balanced").unwrap();
    for (k, row) in reader.records().enumerate() {
        assert_eq!(row.unwrap()[col].parse::<usize>().unwrap(), k + 1);
    }
}

#[test]
fn bench_random_is_deterministic_and_sandwiched() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = asmgram(&["bench", "--random", "100", "20", "42", "--csv", path_str(path)]);
        assert_eq!(code(&out), 0);
        assert!(String::from_utf8_lossy(&out.stderr).contains("20 words, 0 violations"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let other = asmgram(&["bench", "--random", "100", "20", "43"]);
    assert_ne!(other.stdout, fs::read(&a).unwrap());
}

#[test]
fn bench_exact_column_and_timings() {
    let out = asmgram(&["bench", "--random", "10", "3", "1", "--methods", "exact,best", "--timings"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("id,n,log_lower,lz_lower,trivial_upper,exact,exact_ms,best,best_ms\n"), "{text}");
}

#[test]
fn bench_unreadable_corpus_exits_2() {
    assert_eq!(code(&asmgram(&["bench", "--corpus", "/nonexistent/corpus"])), 2);
}

#[test]
fn thread_variable_is_honored() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_asmgram"))
            .args(["compute", HARD, "--exact", "--json"])
            .env("ASMGRAM_THREADS", threads)
            .output()
            .unwrap()
    };
    let out = run("4");
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!((v["value"].as_u64(), v["optimal"].as_bool()), (Some(9), Some(true)));
    assert_eq!(code(&run("zero")), 2);
}
