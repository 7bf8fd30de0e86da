use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tsetlin_core::rng::derive_stream;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsetlin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// XOR of the first two of six bits, as dense CSV.
fn write_xor(path: &Path, seed: u64, n: usize) {
    let mut rng = derive_stream(seed, 1);
    let mut text = String::new();
    for _ in 0..n {
        let x: Vec<u64> = (0..6).map(|_| rng.next_u64() >> 63).collect();
        for b in &x {
            text.push_str(&format!("{b},"));
        }
        text.push_str(&format!("{}\n", x[0] ^ x[1]));
    }
    std::fs::write(path, text).unwrap();
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        write_xor(&root.join("train.csv"), 1, 1000);
        write_xor(&root.join("eval.csv"), 2, 200);
        Self { _dir: dir, root }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().into_owned()
    }

    fn train_listing(&self, extra: &[&str]) -> Output {
        let (train, eval) = (self.path("train.csv"), self.path("eval.csv"));
        let mut args = vec![
            "train", "--data", &train, "--eval", &eval, "--literals", "6", "--clauses", "8", "--classes", "2", "--s",
            "1.9", "--threshold", "11", "--budget", "3", "--epochs", "3", "--seed", "42", "--jobs", "-1",
        ];
        args.extend_from_slice(extra);
        run(&args)
    }
}

#[test]
fn listing_train_prints_three_epoch_lines() {
    let f = Fixture::new();
    let out = f.train_listing(&[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3, "{lines:?}");
    for (i, line) in lines.iter().enumerate() {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 6, "{line}");
        assert_eq!((parts[0], parts[2], parts[4]), ("epoch", "acc", "time_s"));
        assert_eq!(parts[1], (i + 1).to_string());
        parts[3].parse::<f64>().unwrap();
        parts[5].parse::<f64>().unwrap();
    }
    let err = stderr(&out);
    assert!(err.contains("config: n_literals=6 n_clauses=8 n_classes=2 s=1.9 threshold=11 n_literal_budget=3"));
    assert!(err.contains("boost_true_positive=false"));
    assert!(err.contains("seed=42"));
}

#[test]
fn train_without_eval_reports_na() {
    let f = Fixture::new();
    let train = f.path("train.csv");
    let out = run(&["train", "--data", &train, "--clauses", "8", "--epochs", "2", "--jobs", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    for line in stdout(&out).lines() {
        assert!(line.contains(" acc NA "), "{line}");
    }
    // blocks follow jobs when jobs is positive
    assert!(stderr(&out).contains("n_blocks=1 "));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["train", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("Usage"), "{err}");
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn data_errors_exit_2_with_one_line() {
    let f = Fixture::new();
    let bad = f.path("bad.csv");
    std::fs::write(&bad, "1,2,0\n").unwrap();
    let out = run(&["train", "--data", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error:") && err.contains("line 1"), "{err}");

    let missing = f.path("missing.csv");
    assert_eq!(run(&["train", "--data", &missing]).status.code(), Some(2));
    let out = run(&["predict", "--model", &f.path("train.csv"), "--data", &f.path("eval.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad magic"));
}

#[test]
fn invalid_hyperparameters_are_usage_errors() {
    let f = Fixture::new();
    let out = run(&["train", "--data", &f.path("train.csv"), "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn predict_and_explain() {
    let f = Fixture::new();
    let model = f.path("m.gtm");
    assert!(f.train_listing(&["--save", &model]).status.success());
    let out = run(&["predict", "--model", &model, "--data", &f.path("eval.csv")]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 200);
    assert!(stderr(&out).contains("accuracy:"));

    let out = run(&["predict", "--model", &model, "--data", &f.path("eval.csv"), "--explain", "feature", "--class", "1"]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols[1], "1");
        assert_eq!(cols[2].split(',').count(), 6);
    }
    let out = run(&["predict", "--model", &model, "--data", &f.path("eval.csv"), "--explain", "literal", "--class", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_matches_predict_when_compiled() {
    let f = Fixture::new();
    let model = f.path("m.gtm");
    assert!(f.train_listing(&["--save", &model]).status.success());

    let out = run(&["export", "--model", &model, "--rules-text"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().all(|l| l.contains(" : [")));

    assert_eq!(run(&["export", "--model", &model, "--prefix", "1bad"]).status.code(), Some(1));

    let header = f.path("inference_tm.h");
    let out = run(&["export", "--model", &model, "--out", &header, "--prefix", "inference_tm"]);
    assert!(out.status.success(), "{}", stderr(&out));

    let cc = ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c).arg("--version").stdout(Stdio::null()).stderr(Stdio::null()).status().is_ok_and(|s| s.success())
    });
    let Some(cc) = cc else {
        eprintln!("skipped compile step: no C compiler");
        return;
    };
    let main_c = f.path("main.c");
    std::fs::write(
        &main_c,
        r#"#include <stdio.h>
#include "inference_tm.h"
int main(void)
{
    char line[64];
    uint8_t x[6];
    while (fgets(line, sizeof line, stdin)) {
        int j;
        for (j = 0; j < 6; ++j) {
            x[j] = (uint8_t)(line[2 * j] == '1');
        }
        printf("%d\n", inference_tm_predict(x));
    }
    return 0;
}
"#,
    )
    .unwrap();
    let exe = f.path("infer");
    let status = Command::new(cc).args(["-std=c99", "-Wall", "-Werror", "-o", &exe, &main_c]).status().unwrap();
    assert!(status.success());
    let c_out = Command::new(&exe)
        .stdin(std::fs::File::open(f.path("eval.csv")).unwrap())
        .output()
        .unwrap();
    let predicted = run(&["predict", "--model", &model, "--data", &f.path("eval.csv")]);
    assert_eq!(stdout(&c_out), stdout(&predicted));
}

#[test]
fn sparse_engine_end_to_end() {
    let f = Fixture::new();
    let data = f.path("sparse.txt");
    let mut text = String::from("#literals=1000\n");
    let mut rng = derive_stream(3, 3);
    for _ in 0..200 {
        let label = (rng.next_u64() >> 63) as usize;
        let mut idx: Vec<u32> = (0..5).map(|_| (rng.below(400) as u32) * 2 + label as u32).collect();
        idx.sort_unstable();
        idx.dedup();
        let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        text.push_str(&format!("{label}\t{}\n", idx.join(" ")));
    }
    std::fs::write(&data, text).unwrap();
    let model = f.path("s.gtm");
    let out = run(&["train", "--data", &data, "--eval", &data, "--sparse", "--clauses", "10", "--epochs", "2", "--save", &model]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("negated_literals_enabled=false"));
    let out = run(&["predict", "--model", &model, "--data", &data]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 200);
}

#[test]
fn search_cv_and_bench() {
    let f = Fixture::new();
    let space = f.path("space.txt");
    std::fs::write(&space, "s real 1.5 4\nthreshold int 5 15\n").unwrap();
    let train = f.path("train.csv");
    let out = run(&["search", "--data", &train, "--space", &space, "--trials", "3", "--epochs", "2", "--clauses", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("rank trial acc params"));
    assert_eq!(text.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 3);
    assert!(text.contains("best: "));
    assert_eq!(stdout(&run(&["search", "--data", &train, "--space", &space, "--trials", "3", "--epochs", "2", "--clauses", "8"])), text);

    let out = run(&["cv", "--data", &train, "--k", "3", "--epochs", "2", "--clauses", "8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("fold ")).count(), 3);
    assert!(text.lines().last().unwrap().starts_with("mean "));

    let out = run(&["bench", "--data", &train, "--clauses-list", "4,8", "--jobs-list", "1,2", "--epochs", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("clauses jobs blocks time_s speedup acc"));
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().contains(" 1.00x "));

    let bad_space = f.path("bad_space.txt");
    std::fs::write(&bad_space, "s log 0 3\n").unwrap();
    let out = run(&["search", "--data", &train, "--space", &bad_space]);
    assert_eq!(out.status.code(), Some(1));
}
