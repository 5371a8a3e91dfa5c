//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use gva_cli::{run_scenario, Outcome, Scenario};
use gva_core::exec::Exec;
use gva_core::scalars::{binom_q, q};
use gva_core::series::check_delta_identities;
use gva_core::series::DeltaFault;

fn scenario(name: &str) -> Scenario {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"));
    Scenario::load(&p).expect("bundled scenario")
}

/// Runs the level-3 scenario restricted to `families`.
fn run(families: &[&str]) -> (Outcome, Duration) {
    let mut s = scenario("sl2_level3_full");
    s.checks = families.iter().map(|f| f.to_string()).collect();
    let r = s.resolve().expect("valid scenario");
    let t = Instant::now();
    let o = run_scenario(&r, Exec::Parallel).expect("run");
    (o, t.elapsed())
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(o: &Outcome, extra: Result<(), String>) -> Verdict {
    let failed: Vec<String> = o.entries.iter().filter(|e| !e.report.passed).map(|e| e.report.summary_line()).collect();
    let checked: usize = o.entries.iter().map(|e| e.report.checked).sum();
    let mut detail = format!("{} checks, {} coefficients", o.entries.len(), checked);
    let mut ok = failed.is_empty() && !o.entries.is_empty() && checked > 0;
    if let Some(f) = failed.first() {
        detail.push_str(&format!("; {f}"));
    }
    if let Err(e) = extra {
        ok = false;
        detail.push_str(&format!("; {e}"));
    }
    Verdict { ok, detail }
}

fn ids(o: &Outcome, prefix: &str) -> Vec<String> {
    o.entries.iter().map(|e| e.report.id.clone()).filter(|i| i.starts_with(prefix)).collect()
}

fn require(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn within(t: Duration, secs: u64) -> Result<(), String> {
    require(t < Duration::from_secs(secs), format!("took {:.1}s, limit {secs}s", t.as_secs_f64()))
}

fn c1() -> (Verdict, Duration) {
    let mut s = scenario("delta_identities");
    s.checks = vec!["delta".into()];
    let r = s.resolve().unwrap();
    let t = Instant::now();
    let o = run_scenario(&r, Exec::Parallel).unwrap();
    let el = t.elapsed();
    let alphas: Vec<String> = ["0", "1/2", "-1/3", "2"].iter().map(|a| format!("delta.alpha[{a}]")).collect();
    let covered = alphas.iter().all(|a| o.entries.iter().any(|e| e.report.id == *a));
    let extra = require(r.scenario.windows.delta >= 12, "window below 12")
        .and(require(covered, "missing an exponent"))
        .and(within(el, 10));
    (verdict(&o, extra), el)
}

fn c2() -> (Verdict, Duration) {
    let (o, el) = run(&["affine"]);
    // one report covers all nine ordered pairs of e, h, f
    let extra = require(ids(&o, "affine.relations").len() == 1, "no relation check")
        .and(require(o.entries.iter().all(|e| e.report.window == "cutoff=4 |m|,|n|<=3"), "window is not cutoff 4, |m|,|n| <= 3"))
        .and(within(el, 30));
    (verdict(&o, extra), el)
}

fn c3() -> (Verdict, Duration) {
    let (o, el) = run(&["z"]);
    // the (e,f) relation carries (1 - z2/z1)^(-2/3); its first coefficients are nonintegral
    let frac = binom_q(&q(-2, 3), 1) == gva_core::scalars::rat(-2, 3);
    let rel = ids(&o, "z.relation");
    let extra = require(rel.len() == 4, format!("{} ordered pairs", rel.len()))
        .and(require(rel.iter().any(|i| i == "z.relation[e,f]") && frac, "mixed pair missing"))
        .and(require(o.entries.iter().filter(|e| e.report.id.starts_with("z.relation")).all(|e| e.report.window.contains("[-4,4]")), "window is not ±4"))
        .and(within(el, 60));
    (verdict(&o, extra), el)
}

fn c4() -> (Verdict, Duration) {
    let (o, el) = run(&["psi"]);
    let extra = require(!ids(&o, "psi.relation").is_empty(), "no relation checks")
        .and(require(!ids(&o, "psi.double_zero").is_empty(), "no double-zero checks"));
    (verdict(&o, extra), el)
}

fn c5() -> (Verdict, Duration) {
    let (o, el) = run(&["products", "representatives"]);
    let extra = ["product.vanishing", "product.vacuum", "product.derivative", "representatives.replay"]
        .iter()
        .try_for_each(|p| require(!ids(&o, p).is_empty(), format!("no {p} checks")));
    (verdict(&o, extra), el)
}

fn c6() -> (Verdict, Duration) {
    let (o, el) = run(&["jacobi", "adjoint"]);
    let jac = ids(&o, "jacobi");
    let adj = ids(&o, "adjoint_commutativity");
    let extra = require(!jac.is_empty() && !adj.is_empty(), "missing jacobi or adjoint checks")
        .and(require(jac.iter().chain(&adj).any(|i| i.contains('(')), "no product elements sampled"));
    (verdict(&o, extra), el)
}

fn c7() -> (Verdict, Duration) {
    let (o, el) = run(&["closure", "axioms"]);
    let extra = ["closure.fixed_point", "axioms.vacuum", "axioms.coset_support", "axioms.jacobi"]
        .iter()
        .try_for_each(|p| require(!ids(&o, p).is_empty(), format!("no {p} checks")));
    (verdict(&o, extra), el)
}

fn c8() -> (Verdict, Duration) {
    let (o, el) = run(&["eu"]);
    let extra = require(!ids(&o, "eu.relations").is_empty(), "no relation checks")
        .and(require(ids(&o, "eu.dimensions").len() == 1, "no dimension check"))
        .and(require(o.entries.iter().any(|e| e.report.window.contains('3')), "degree bound is not 3"));
    (verdict(&o, extra), el)
}

fn c9() -> (Verdict, Duration) {
    let (o, el) = run(&["faults"]);
    let kinds = ["c_sign", "binomial", "structure_constant"];
    let extra = kinds
        .iter()
        .try_for_each(|k| require(!ids(&o, &format!("fault.{k}")).is_empty(), format!("fault {k} not injected")))
        .and(require(
            o.entries.iter().all(|e| e.report.notes.iter().any(|n| n.starts_with("detected at "))),
            "a fault report lacks the failing location",
        ));
    // the delta binomial fault is also caught directly
    let direct = check_delta_identities(q(1, 2), 12, DeltaFault::Binomial).unwrap().iter().any(|r| !r.passed);
    let extra = extra.and(require(direct, "delta binomial fault undetected"));
    (verdict(&o, extra), el)
}

fn main() {
    // libtest-style flags are passed through by cargo; a filter that names no criterion skips all
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> (Verdict, Duration)); 9] = [
        ("delta calculus", c1),
        ("affine relations", c2),
        ("Z-algebra relations", c3),
        ("parafermion relations", c4),
        ("product laws", c5),
        ("Jacobi and adjoint", c6),
        ("closure and axioms", c7),
        ("reconstruction", c8),
        ("fault detection", c9),
    ];
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (v, el) = f();
        let tag = if v.ok { "PASS" } else { "FAIL" };
        println!("criterion {} {tag} {name} ({:.2}s): {}", i + 1, el.as_secs_f64(), v.detail);
        failures += usize::from(!v.ok);
    }
    let (o, el) = run(&scenario("sl2_level3_full").checks.iter().map(String::as_str).collect::<Vec<_>>());
    let whole = o.passed() && el < Duration::from_secs(300);
    println!(
        "pipeline {} full scenario ({:.2}s, limit 300s): {} checks",
        if whole { "PASS" } else { "FAIL" },
        el.as_secs_f64(),
        o.entries.len()
    );
    failures += usize::from(!whole);
    println!("acceptance: {} of 10 lines passed in {:.1}s", 10 - failures, start.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
