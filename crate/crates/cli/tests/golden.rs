//! Committed dumps compared byte for byte, plus independent cross-checks of
//! the numbers they contain.

use std::collections::BTreeMap;
use std::path::PathBuf;

use gva_cli::{dump_artifact, load, Overrides};
use gva_core::exec::Exec;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn full(o: Overrides) -> gva_cli::Resolved {
    load(&root().join("../../scenarios/sl2_level3_full.toml"), &o).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(root().join("tests/golden").join(name)).unwrap()
}

/// Coefficients of Π_{n≥1} (1 - q^n)^{-3} up to `q^max`.
fn pbw_counts(max: usize) -> Vec<usize> {
    let mut c = vec![0usize; max + 1];
    c[0] = 1;
    for n in 1..=max {
        for _ in 0..3 {
            for d in n..=max {
                c[d] += c[d - n];
            }
        }
    }
    c
}

#[test]
fn basis_dump_matches_golden() {
    let r = full(Overrides { cutoff: Some(2), ..Default::default() });
    let text = dump_artifact(&r, "basis", Exec::Sequential).unwrap();
    assert_eq!(text, golden("basis_d2_l3.txt"));
    let mut by_degree = BTreeMap::new();
    for line in text.lines().skip(1).take_while(|l| !l.starts_with('#')) {
        let d: usize = line.split_whitespace().nth(1).unwrap().trim_start_matches("degree=").parse().unwrap();
        *by_degree.entry(d).or_insert(0usize) += 1;
    }
    assert_eq!(by_degree.into_values().collect::<Vec<_>>(), pbw_counts(2));
}

#[test]
fn closure_dump_matches_golden() {
    let r = full(Overrides::default());
    let text = dump_artifact(&r, "closure", Exec::Parallel).unwrap();
    assert_eq!(text, golden("closure_l3.txt"));
    // one element per nonempty (sector, weight) slice of the vacuum space
    // inside the closure window, read off the basis dump
    let basis = dump_artifact(&r, "basis", Exec::Sequential).unwrap();
    let mut slices = BTreeMap::new();
    for line in basis.lines().skip_while(|l| *l != "# vacuum space").skip(1) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let k: i64 = f[1].trim_matches(|c| c == '(' || c == ')').parse().unwrap();
        let w = f[2].to_string();
        let num: Vec<i64> = w.split('/').map(|x| x.parse().unwrap()).collect();
        let weight_le_2 = num[0] <= 2 * num.get(1).copied().unwrap_or(1);
        if k.abs() <= 2 && weight_le_2 {
            *slices.entry(format!("sector ({k}) weight {w}")).or_insert(0usize) += 1;
        }
    }
    let dims: BTreeMap<String, usize> = text
        .lines()
        .skip_while(|l| *l != "dimensions")
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .map(|l| {
            let (k, v) = l.trim().rsplit_once(": ").unwrap();
            (k.to_string(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(dims, slices);
}
