#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use tsetlin_core::rng::{derive_stream, RngStream};
use tsetlin_core::{Config, DenseDataset, ExplanationLevel, Model, RuleSet, SparseDataset, SparseExample, Trainer};

/// The six-literal configuration from the reference listing.
pub fn listing_config(seed: u64) -> Config {
    let mut c = Config::new(6, 8, 2);
    c.s = 1.9;
    c.threshold = 11;
    c.n_literal_budget = Some(3);
    c.seed = seed;
    c
}

pub fn random_bits(rng: &mut RngStream, n: usize) -> Vec<u8> {
    (0..n).map(|_| (rng.next_u64() >> 63) as u8).collect()
}

/// `y = x0 XOR x1` over six bits; the other four are noise.
pub fn xor_data(seed: u64, n: usize) -> DenseDataset {
    let mut rng = derive_stream(seed, 0xDA7A);
    let rows: Vec<Vec<u8>> = (0..n).map(|_| random_bits(&mut rng, 6)).collect();
    let labels = rows.iter().map(|r| (r[0] ^ r[1]) as usize).collect();
    DenseDataset::from_rows(&rows, labels).unwrap()
}

/// Labels follow a random weighted threshold rule with 10% label noise.
pub fn rule_data(seed: u64, n_literals: usize, n_classes: usize, n: usize) -> DenseDataset {
    let mut rng = derive_stream(seed, 0xDA7B);
    let w: Vec<Vec<i64>> = (0..n_classes)
        .map(|_| (0..n_literals).map(|_| rng.below(7) as i64 - 3).collect())
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = random_bits(&mut rng, n_literals);
        let score = |k: usize| -> i64 { x.iter().zip(&w[k]).map(|(&b, &wi)| b as i64 * wi).sum() };
        let mut y = (0..n_classes).max_by_key(|&k| (score(k), std::cmp::Reverse(k))).unwrap();
        if rng.below(10) == 0 {
            y = rng.below(n_classes as u64) as usize;
        }
        rows.push(x);
        labels.push(y);
    }
    DenseDataset::from_rows(&rows, labels).unwrap()
}

pub fn random_sparse(seed: u64, n_literals: usize, n: usize, density: f64, n_classes: usize) -> SparseDataset {
    let mut rng = derive_stream(seed, 0xDA7C);
    let examples = (0..n)
        .map(|_| {
            let active: Vec<u32> = (0..n_literals as u32).filter(|_| rng.next_f64() < density).collect();
            // Label depends on the lower half of the universe.
            let label = active.iter().filter(|&&l| (l as usize) < n_literals / 2).count() % n_classes;
            SparseExample { active, label }
        })
        .collect();
    SparseDataset::new(n_literals, examples).unwrap()
}

/// A small dense model trained for a few epochs, with varied shape.
pub fn trained_model(seed: u64, max_literals: usize) -> Model {
    let mut rng = derive_stream(seed, 0x7E57);
    let n_literals = 3 + rng.below(max_literals as u64 - 2) as usize;
    let n_classes = 2 + rng.below(3) as usize;
    let n_clauses = 4 + rng.below(24) as usize;
    let mut cfg = Config::new(n_literals, n_clauses, n_classes);
    cfg.s = 1.5 + rng.next_f64() * 4.0;
    cfg.threshold = 5 + rng.below(20) as u32;
    cfg.n_literal_budget = if rng.below(2) == 0 { None } else { Some(1 + rng.below(4) as u32) };
    cfg.n_blocks = 1 + rng.below(n_clauses.min(4) as u64) as usize;
    cfg.seed = seed;
    let data = rule_data(seed, n_literals, n_classes, 300);
    Trainer::new(cfg).epochs(3).fit(&data.into(), None).unwrap().model
}

pub fn c_compiler() -> Option<String> {
    let mut candidates: Vec<String> = std::env::var("CC").into_iter().collect();
    candidates.extend(["cc", "gcc", "clang"].map(String::from));
    candidates.into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .is_ok_and(|s| s.success())
    })
}

/// Driver for an exported header: reads `count` then one 0/1 string per
/// input; per input prints predict, explain for the predicted class and for
/// each class (return value then scores), and explain's return for class K.
fn driver(prefix: &str) -> String {
    format!(
        r#"#include <stdio.h>
#include "model.h"

int main(void)
{{
    static uint8_t x[{p}_N_FEATURES + 1u];
    static int32_t scores[{p}_N_LITERALS + 1u];
    int count, i, c;
    unsigned j;
    if (scanf("%d", &count) != 1) {{
        return 3;
    }}
    for (i = 0; i < count; ++i) {{
        for (j = 0; j < {p}_N_FEATURES; ++j) {{
            int ch;
            do {{
                ch = getchar();
            }} while (ch == ' ' || ch == '\n');
            x[j] = (uint8_t)(ch == '1');
        }}
        printf("%d", {p}_predict(x));
        for (c = -1; c < {p}_N_CLASSES; ++c) {{
            printf(" %d", {p}_explain(x, c, scores));
            for (j = 0; j < {p}_N_LITERALS; ++j) {{
                printf(" %ld", (long)scores[j]);
            }}
        }}
        printf(" %d\n", {p}_explain(x, {p}_N_CLASSES, scores));
    }}
    return 0;
}}
"#,
        p = prefix
    )
}

/// What the driver should print for `x`, computed with the predictor.
pub fn expected_line(rs: &RuleSet, x: &[u8]) -> String {
    let mut out = rs.predict(x).unwrap().to_string();
    let classes = std::iter::once(None).chain((0..rs.n_classes()).map(Some));
    for c in classes {
        let (pred, ex) = rs.predict_and_explain(x, ExplanationLevel::Literal, c).unwrap();
        out.push_str(&format!(" {pred}"));
        for s in ex.scores {
            out.push_str(&format!(" {s}"));
        }
    }
    out.push_str(" -1");
    out
}

/// Compile `header` with a driver and run it on `inputs`; one output line
/// per input.
pub fn run_exported(cc: &str, dir: &Path, header: &str, prefix: &str, inputs: &[Vec<u8>]) -> Vec<String> {
    std::fs::write(dir.join("model.h"), header).unwrap();
    std::fs::write(dir.join("main.c"), driver(prefix)).unwrap();
    let exe = dir.join("driver");
    let out = Command::new(cc)
        .args(["-std=c99", "-pedantic", "-Wall", "-Wextra", "-Werror", "-O1", "-o"])
        .arg(&exe)
        .arg(dir.join("main.c"))
        .output()
        .unwrap();
    assert!(out.status.success(), "C compile failed:\n{}", String::from_utf8_lossy(&out.stderr));

    let mut stdin = format!("{}\n", inputs.len());
    for x in inputs {
        stdin.extend(x.iter().map(|&b| if b != 0 { '1' } else { '0' }));
        stdin.push('\n');
    }
    let mut child = Command::new(&exe)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect()
}

/// All `2^n` inputs in counting order, bit `i` of the index is feature `i`.
pub fn all_inputs(n: usize) -> Vec<Vec<u8>> {
    (0..1u32 << n).map(|v| (0..n).map(|i| ((v >> i) & 1) as u8).collect()).collect()
}
