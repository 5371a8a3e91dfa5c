//! Scenario execution, structured reports and artifact dumps.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use gva_core::affine::eu::EModule;
use gva_core::affine::fock::Fock;
use gva_core::affine::omega::OmegaSpace;
use gva_core::affine::psi::PsiSystem;
use gva_core::affine::verma::Verma;
use gva_core::affine::zops::ZOps;
use gva_core::affine::{AffineData, E, F, H};
use gva_core::axioms::{
    check_associativity_equivalence, check_coset_support, check_derivation, check_full_jacobi, check_module_transfer,
    check_vacuum_axioms, default_triples, sample_products, AlgebraCandidate,
};
use gva_core::exec::Exec;
use gva_core::fields::{apply_field, check_lower_truncation, Field, Operator, Vector};
use gva_core::grading::check_gset;
use gva_core::products::{
    check_adjoint_commutativity, check_d_bracket, check_derivative_laws, check_jacobi_relation, check_skew_symmetry,
    check_vacuum_laws, check_vanishing, check_weak_associativity, generate_closure, CertOptions, ClosureAlgebra,
    ClosureOptions, Products,
};
use gva_core::report::CheckReport;
use gva_core::scalars::{fmt_q, int, q, q_to_rat, qi, Cyclo, CycloWire};
use gva_core::series::{check_delta_identities, check_vanishing_identity, DeltaFault};
use gva_core::Error;
use serde::Serialize;

use crate::config::{ConfigError, Resolved};

/// Elements allowed in a closure; more means the window is wrong.
const MAX_ELEMENTS: usize = 64;
/// Cutoff used when replaying a closure with representatives lifted by 2.
const REPLAY_CUTOFF: i64 = 8;

pub struct Entry {
    pub family: String,
    pub report: CheckReport,
}

pub struct Outcome {
    pub entries: Vec<Entry>,
    /// Deterministic part of the report.
    pub report: String,
    /// Wall-time section, kept apart so comparisons can drop it.
    pub timing: String,
    pub code: i32,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.code == 0
    }

    pub fn full_text(&self) -> String {
        format!("{}\n{}", self.report, self.timing)
    }

    /// Distinct check ids with any `[...]` argument removed.
    pub fn identity_families(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| family_of(&e.report.id)).collect()
    }
}

fn family_of(id: &str) -> String {
    id.split('[').next().unwrap_or(id).to_string()
}

/// Marker line opening the timing section of a report.
pub const TIMING_HEADER: &str = "[timing]";

/// The report without its timing section.
pub fn strip_timing(text: &str) -> &str {
    match text.find(&format!("\n{TIMING_HEADER}")) {
        Some(i) => &text[..i + 1],
        None => text,
    }
}

struct Ctx<'a> {
    r: &'a Resolved,
    exec: Exec,
    verma: Option<Arc<Verma>>,
    omega: Option<Arc<OmegaSpace>>,
    sys: Option<Arc<PsiSystem>>,
    reg: Option<Arc<Products>>,
    closure: Option<Arc<ClosureAlgebra>>,
    cand: Option<Arc<AlgebraCandidate>>,
}

type Res<T> = gva_core::Result<T>;

impl<'a> Ctx<'a> {
    fn new(r: &'a Resolved, exec: Exec) -> Self {
        Ctx { r, exec, verma: None, omega: None, sys: None, reg: None, closure: None, cand: None }
    }

    fn data(&self) -> AffineData {
        AffineData::sl2(self.r.level.expect("validated")).expect("validated")
    }

    fn cutoff(&self) -> i64 {
        self.r.scenario.algebra.as_ref().map(|a| a.cutoff).unwrap_or(0)
    }

    fn verma(&mut self) -> Res<Arc<Verma>> {
        if self.verma.is_none() {
            self.verma = Some(Arc::new(Verma::build(self.data(), self.cutoff())?));
        }
        Ok(self.verma.clone().unwrap())
    }

    fn omega(&mut self) -> Res<Arc<OmegaSpace>> {
        if self.omega.is_none() {
            self.omega = Some(Arc::new(OmegaSpace::extract(self.verma()?)?));
        }
        Ok(self.omega.clone().unwrap())
    }

    fn sys(&mut self) -> Res<Arc<PsiSystem>> {
        if self.sys.is_none() {
            let grading = self.r.grading.clone().expect("validated");
            self.sys = Some(Arc::new(PsiSystem::from_parts(self.omega()?, grading)));
        }
        Ok(self.sys.clone().unwrap())
    }

    fn reg(&mut self) -> Res<Arc<Products>> {
        if self.reg.is_none() {
            let sys = self.sys()?;
            let opts = CertOptions { window: self.r.scenario.windows.certify, sources: sys.sources(2), exec: self.exec, k_max: 8 };
            self.reg = Some(Arc::new(Products::new(opts)));
        }
        Ok(self.reg.clone().unwrap())
    }

    fn generators(&mut self) -> Res<Vec<Field>> {
        let sys = self.sys()?;
        Ok(self.r.scenario.generators.iter().map(|g| generator(&sys, g)).collect())
    }

    fn closure_options(&self) -> ClosureOptions {
        let k = self.r.scenario.windows.closure_sectors;
        ClosureOptions {
            max_weight: self.r.closure_weight,
            sector_ok: Arc::new(move |g| g.coords.iter().all(|c| c.abs() <= k)),
            max_rounds: 8,
            max_elements: MAX_ELEMENTS,
            full_table: true,
            extra_sources: vec![0],
        }
    }

    fn closure(&mut self) -> Res<Arc<ClosureAlgebra>> {
        if self.closure.is_none() {
            let sys = self.sys()?;
            let reg = self.reg()?;
            let gens = self.generators()?;
            let id = Field::identity(sys.module.clone());
            self.closure = Some(Arc::new(generate_closure(&reg, &id, &gens, &self.closure_options())?));
        }
        Ok(self.closure.clone().unwrap())
    }

    fn candidate(&mut self) -> Res<Arc<AlgebraCandidate>> {
        if self.cand.is_none() {
            self.cand = Some(Arc::new(AlgebraCandidate::new(self.closure()?)?));
        }
        Ok(self.cand.clone().unwrap())
    }

    fn samples(&mut self) -> Res<Vec<Field>> {
        let cand = self.candidate()?;
        let idx = sample_products(&cand, self.r.scenario.windows.samples, self.r.scenario.seed);
        Ok(idx.into_iter().map(|i| cand.element(i).clone()).collect())
    }
}

fn generator(sys: &PsiSystem, name: &str) -> Field {
    match name {
        "psi_e" => sys.psi(E),
        "psi_f" => sys.psi(F),
        other => unreachable!("unvalidated generator {other}"),
    }
}

fn pairs(gens: &[Field]) -> Vec<(Field, Field)> {
    gens.iter().flat_map(|a| gens.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

fn run_family(ctx: &mut Ctx, family: &str) -> Res<Vec<CheckReport>> {
    let w = ctx.r.scenario.windows.clone();
    let exec = ctx.exec;
    let mut out = Vec::new();
    match family {
        "grading" => {
            out.push(check_gset(ctx.r.grading.as_ref().expect("validated")));
            if ctx.r.level.is_some() {
                out.push(ctx.data().check_invariants());
            }
        }
        "delta" => {
            for a in &ctx.r.alphas {
                out.extend(check_delta_identities(*a, w.delta, DeltaFault::None)?);
            }
            out.push(check_vanishing_identity(3, w.delta)?);
        }
        "heisenberg" => {
            let level = q_to_rat(&ctx.r.level.expect("validated"));
            out.push(Fock::new(int(2), level, ctx.cutoff()).check_heisenberg(w.modes));
        }
        "affine" => {
            let v = ctx.verma()?;
            out.push(v.check_affine_relations(&v.data, w.modes, exec));
        }
        "omega" => out.push(ctx.omega()?.check()),
        "z" => {
            let v = ctx.verma()?;
            let z = ZOps::new(v.clone());
            let sources: Vec<_> = v.basis().iter().take(w.z_sources).cloned().collect();
            for (a, b) in [(E, E), (E, F), (F, E), (F, F)] {
                out.push(z.check_z_relations(&v.data, a, b, w.z, &sources, exec));
            }
            for a in [E, F] {
                out.push(z.check_h_commutation(a, 2, w.z, 2));
            }
        }
        "psi" => {
            let sys = ctx.sys()?;
            let data = sys.data().clone();
            let src = sys.sources(1);
            for (a, b) in [(E, E), (E, F), (F, E), (F, F)] {
                out.extend(sys.check_psi_relations(&data, a, b, w.psi, &src, exec));
            }
            for a in [E, F] {
                out.push(sys.check_preserves_omega(a, w.psi + 1, 2));
                out.push(check_lower_truncation(&sys.psi(a), 2)?);
            }
        }
        "eu" => {
            // E(U) cannot go past the truncation of the vacuum space
            let deg = w.eu_degree.min(ctx.cutoff());
            let omega = ctx.omega()?;
            let eu = EModule::build(omega.clone(), Arc::new(ZOps::new(omega.verma.clone())), deg)?;
            out.push(eu.check_affine_relations(&ctx.data(), w.modes.min(deg.max(1)), deg, exec));
            out.push(eu.check_dimensions(deg));
        }
        "certify" => {
            let reg = ctx.reg()?;
            for (a, b) in pairs(&ctx.generators()?) {
                out.push(reg.certify(&a, &b)?.report());
            }
        }
        "products" => {
            let reg = ctx.reg()?;
            let gens = ctx.generators()?;
            let id = Field::identity(ctx.sys()?.module.clone());
            for (a, b) in pairs(&gens) {
                out.push(check_vanishing(&reg, &a, &b, w.products)?);
                out.push(check_derivative_laws(&reg, &a, &b, w.products.min(2))?);
            }
            for a in &gens {
                out.push(check_vacuum_laws(&reg, &id, a, 2, w.products)?);
            }
        }
        "jacobi" => {
            let reg = ctx.reg()?;
            let sys = ctx.sys()?;
            let gens = ctx.generators()?;
            let vac = Vector::basis(sys.module.vacuum.expect("Ω has a vacuum"));
            for (a, b) in pairs(&gens) {
                out.push(check_jacobi_relation(&reg, &a, &b, &vac, w.jacobi, None)?);
                for j in sys.sources(1) {
                    out.push(check_weak_associativity(&reg, &a, &b, &Vector::basis(j), w.jacobi)?);
                }
                out.push(check_skew_symmetry(&reg, &a, &b, w.psi, false)?);
            }
            for s in ctx.samples()? {
                for g in &gens {
                    out.push(check_jacobi_relation(&reg, g, &s, &vac, w.jacobi, None)?);
                    out.push(check_jacobi_relation(&reg, &s, g, &vac, w.jacobi, None)?);
                }
            }
            let closure = ctx.closure()?;
            out.push(check_d_bracket(&sys.d_operator(), &gens, &closure.elements, &reg.opts.sources, w.psi)?);
        }
        "adjoint" => {
            let reg = ctx.reg()?;
            let gens = ctx.generators()?;
            for a in &gens {
                for (b, c) in pairs(&gens) {
                    out.push(check_adjoint_commutativity(&reg, a, &b, &c, w.jacobi)?);
                }
            }
            for s in ctx.samples()? {
                for (a, b) in pairs(&gens) {
                    out.push(check_adjoint_commutativity(&reg, &a, &b, &s, w.jacobi)?);
                }
            }
        }
        "closure" => {
            let c = ctx.closure()?;
            let mut rep = CheckReport::new("closure.fixed_point", format!("weight<={} |k|<={}", fmt_q(&ctx.r.closure_weight), w.closure_sectors));
            rep.checked = c.elements.len();
            if !c.is_fixed_point() {
                rep.fail("no fixed point within the round limit");
            }
            for ((g, wt), d) in c.dims() {
                rep.note(format!("sector {g} weight {}: {d}", fmt_q(&wt)));
            }
            out.push(rep);
        }
        "axioms" => {
            let reg = ctx.reg()?;
            let cand = ctx.candidate()?;
            out.push(check_vacuum_axioms(&cand, 3));
            out.push(check_coset_support(&cand));
            out.push(check_module_transfer(&cand)?);
            out.push(check_derivation(&reg, &cand, &ctx.r.closure_weight)?);
            // seeded triples with no retained coefficient are redrawn
            let n_gen = ctx.r.scenario.generators.len().pow(3);
            let triples = default_triples(&cand, 4 * w.samples, ctx.r.scenario.seed);
            let mut sampling = CheckReport::new("axioms.sampling", format!("{} seeded triples", w.samples));
            let mut kept = 0;
            for (i, t) in triples.into_iter().enumerate() {
                if i >= n_gen && kept == w.samples {
                    break;
                }
                let j = check_full_jacobi(&reg, &cand, t, w.jacobi, None)?;
                if i >= n_gen {
                    if j.checked == 0 {
                        sampling.note(format!("redrawn {}", j.id));
                        continue;
                    }
                    kept += 1;
                }
                out.push(j);
                out.push(check_associativity_equivalence(&reg, &cand, t, w.jacobi)?);
            }
            sampling.checked = kept;
            if kept < w.samples {
                sampling.fail(format!("only {kept} of {} seeded triples have retained coefficients", w.samples));
            }
            out.push(sampling);
        }
        "representatives" => out.push(representatives(ctx)?),
        "faults" => out.extend(faults(ctx)?),
        other => unreachable!("unvalidated family {other}"),
    }
    Ok(out)
}

/// Replays the closure with representatives lifted by 2 on a larger
/// truncation and compares the label-keyed coefficient dumps.
fn representatives(ctx: &mut Ctx) -> Res<CheckReport> {
    let c = ctx.closure()?;
    let sys = ctx.sys()?;
    let base = *sys.module.grading.lift_base() + 2;
    let big = PsiSystem::build(ctx.data(), REPLAY_CUTOFF.max(ctx.cutoff()), base)?;
    let mut rep = CheckReport::new("representatives.replay", format!("lift base {} cutoff {}", fmt_q(&base), REPLAY_CUTOFF));
    let mut sources = Vec::new();
    for &j in &c.sources {
        let label = &sys.module.info(j).label;
        match (0..big.module.dim()).find(|&i| big.module.info(i).label == *label) {
            Some(i) => sources.push(i),
            None => {
                rep.fail(format!("source {label} missing from the larger truncation"));
                return Ok(rep);
            }
        }
    }
    let gens: Vec<Field> = ctx.r.scenario.generators.iter().map(|g| generator(&big, g)).collect();
    let d = c.replay(&Field::identity(big.module.clone()), &gens, sources)?;
    let probes = c.probe_labels(&qi(3));
    let (x, y) = (c.coefficient_dump(&probes)?, d.coefficient_dump(&probes)?);
    rep.checked = x.lines().count();
    rep.skipped = x.matches('?').count();
    if x != y {
        let first = x.lines().zip(y.lines()).find(|(a, b)| a != b).map(|(a, b)| format!("{a} vs {b}"));
        rep.fail(first.unwrap_or_else(|| "dumps differ in length".into()));
    }
    Ok(rep)
}

/// A fault report passes when the faulted check fails.
fn detected(name: &str, faulted: &CheckReport) -> CheckReport {
    let mut rep = CheckReport::new(format!("fault.{name}"), faulted.window.clone());
    rep.checked = 1;
    match (&faulted.passed, &faulted.counterexample) {
        (false, Some(c)) => rep.note(format!("detected at {c}")),
        (false, None) => rep.note("detected"),
        (true, _) => rep.fail(format!("{} still passes", faulted.id)),
    }
    rep
}

fn faults(ctx: &mut Ctx) -> Res<Vec<CheckReport>> {
    let w = ctx.r.scenario.windows.clone();
    let exec = ctx.exec;
    let mut out = Vec::new();
    // sign of c(g,h)
    let reg = ctx.reg()?;
    let sys = ctx.sys()?;
    let gens = ctx.generators()?;
    let vac = Vector::basis(sys.module.vacuum.expect("Ω has a vacuum"));
    let (a, b) = (&gens[0], &gens[gens.len() - 1]);
    out.push(detected("c_sign", &check_jacobi_relation(&reg, a, b, &vac, w.jacobi, Some(Cyclo::from_int(-1)))?));
    out.push(detected("skew_phase", &check_skew_symmetry(&reg, a, b, w.psi, true)?));
    // one binomial coefficient
    let mut binom = CheckReport::new("delta.binomial_fault", format!("box=[-{},{}]^3", w.delta, w.delta));
    for r in check_delta_identities(q(1, 2), w.delta, DeltaFault::Binomial)? {
        binom.absorb(&r);
    }
    out.push(detected("binomial", &binom));
    // one structure constant, and one value of the invariant form
    let v = ctx.verma()?;
    let bad = v.data.with_structure_fault(H, E, E, int(1));
    out.push(detected("structure_constant", &v.check_affine_relations(&bad, 1, exec)));
    let omega = ctx.omega()?;
    let eu = EModule::build(omega.clone(), Arc::new(ZOps::new(omega.verma.clone())), w.eu_degree.min(2))?;
    out.push(detected("structure_constant.eu", &eu.check_affine_relations(&bad, 1, 1, exec)));
    let form = v.data.with_form_fault(E, F, int(2));
    let z = ZOps::new(v.clone());
    let src: Vec<_> = v.basis().iter().take(w.z_sources).cloned().collect();
    out.push(detected("form.z", &z.check_z_relations(&form, E, F, 2, &src, exec)));
    out.push(detected("form.psi", &sys.check_psi_relations(&form, E, F, w.psi, &sys.sources(1), exec)[0]));
    // corrupted candidates
    let cand = ctx.candidate()?;
    let moved = (0..cand.len()).find(|&i| i != cand.vacuum).unwrap_or(cand.vacuum);
    out.push(detected("vacuum", &check_vacuum_axioms(&cand.with_vacuum(moved), 3)));
    out.push(detected("coset_support", &check_coset_support(&cand.with_entry_moved(q(1, 3)))));
    let d = sys.d_operator();
    let doubled: Operator = Arc::new(move |j| Ok(d(j)?.scale(&Cyclo::from_int(2))));
    let mut hyp = CheckReport::new("d_bracket.doubled", format!("n=±{}", w.psi));
    match check_d_bracket(&doubled, &gens, &[], &reg.opts.sources, w.psi) {
        Err(Error::HypothesisViolated(m)) => hyp.fail(m),
        Err(e) => return Err(e),
        Ok(r) => hyp = r,
    }
    out.push(detected("derivation", &hyp));
    Ok(out)
}

#[derive(Serialize)]
struct Doc<'a> {
    scenario: Header<'a>,
    summary: Summary,
    certificate: Vec<CertDoc>,
    check: Vec<CheckDoc<'a>>,
}

#[derive(Serialize)]
struct Header<'a> {
    name: &'a str,
    seed: u64,
    checks: &'a [String],
}

#[derive(Serialize)]
struct Summary {
    status: &'static str,
    checks: usize,
    passed: usize,
    failed: usize,
    identity_families: Vec<String>,
}

#[derive(Serialize)]
struct CertDoc {
    a: String,
    b: String,
    k: Option<u32>,
    exponent: Option<String>,
    gh: String,
    c: CycloWire,
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    index: usize,
    family: &'a str,
    id: &'a str,
    status: &'static str,
    window: &'a str,
    checked: usize,
    skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<&'a str>,
    notes: &'a [String],
}

fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::WindowUnderflow(_) | Error::Config(_) | Error::InvalidLevel(_))
}

/// Runs every check family in dependency order.  Engine errors inside a
/// family become failed checks, except configuration-class errors.
pub fn run_scenario(r: &Resolved, exec: Exec) -> Result<Outcome, ConfigError> {
    let start = Instant::now();
    let mut ctx = Ctx::new(r, exec);
    let mut entries = Vec::new();
    for family in &r.checks {
        let t0 = Instant::now();
        match run_family(&mut ctx, family) {
            Ok(reports) => {
                for rep in reports {
                    let rep = if rep.elapsed_ms.is_none() { rep.timed(t0) } else { rep };
                    entries.push(Entry { family: family.clone(), report: rep });
                }
            }
            Err(e) if is_config_error(&e) => return Err(e.into()),
            Err(e) => {
                let mut rep = CheckReport::new(family.clone(), "");
                rep.fail(e.to_string());
                entries.push(Entry { family: family.clone(), report: rep.timed(t0) });
            }
        }
    }
    let failed = entries.iter().filter(|e| !e.report.passed).count();
    let mut certificates: Vec<CertDoc> = match &ctx.reg {
        Some(reg) => reg
            .certificates()
            .iter()
            .map(|c| CertDoc {
                a: c.a.name().to_string(),
                b: c.b.name().to_string(),
                k: c.k,
                exponent: c.exponent().map(|x| fmt_q(&x)),
                gh: fmt_q(&c.gh),
                c: c.c.to_wire(),
            })
            .collect(),
        None => Vec::new(),
    };
    // equal names can belong to distinct field instances
    certificates.sort_by(|x, y| (&x.a, &x.b, x.k).cmp(&(&y.a, &y.b, y.k)));
    certificates.dedup_by(|x, y| (&x.a, &x.b, x.k, &x.exponent) == (&y.a, &y.b, y.k, &y.exponent));
    let families: BTreeSet<String> = entries.iter().map(|e| family_of(&e.report.id)).collect();
    let doc = Doc {
        scenario: Header { name: &r.scenario.name, seed: r.scenario.seed, checks: &r.checks },
        summary: Summary {
            status: status(failed == 0),
            checks: entries.len(),
            passed: entries.len() - failed,
            failed,
            identity_families: families.into_iter().collect(),
        },
        certificate: certificates,
        check: entries
            .iter()
            .enumerate()
            .map(|(index, e)| CheckDoc {
                index,
                family: &e.family,
                id: &e.report.id,
                status: status(e.report.passed),
                window: &e.report.window,
                checked: e.report.checked,
                skipped: e.report.skipped,
                counterexample: e.report.counterexample.as_deref(),
                notes: &e.report.notes,
            })
            .collect(),
    };
    let report = toml::to_string(&doc).map_err(|e| ConfigError(format!("report serialisation: {e}")))?;
    let ms: Vec<String> = entries.iter().map(|e| e.report.elapsed_ms.unwrap_or(0).to_string()).collect();
    let timing = format!("{TIMING_HEADER}\ntotal_ms = {}\ncheck_ms = [{}]\n", start.elapsed().as_millis(), ms.join(", "));
    Ok(Outcome { code: if failed == 0 { 0 } else { 1 }, entries, report, timing })
}

/// Dump targets accepted by [`dump_artifact`].
pub const DUMP_TARGETS: &[&str] = &["basis", "closure", "fields"];

/// Stable text dump of one artifact of the scenario's algebra.
pub fn dump_artifact(r: &Resolved, what: &str, exec: Exec) -> Result<String, ConfigError> {
    if !DUMP_TARGETS.contains(&what) {
        return Err(ConfigError(format!("unknown dump target {what:?}; known: {}", DUMP_TARGETS.join(", "))));
    }
    if r.level.is_none() {
        return Err(ConfigError("dumps need an [algebra] section".into()));
    }
    if what != "basis" && r.scenario.generators.is_empty() {
        return Err(ConfigError("generator list is empty".into()));
    }
    let mut ctx = Ctx::new(r, exec);
    let text = (|| -> Res<String> {
        match what {
            "basis" => {
                let v = ctx.verma()?;
                let sys = ctx.sys()?;
                Ok(format!("{}# vacuum space\n{}", v.dump(&[(E, -1), (H, -1), (F, -1), (E, 1), (H, 1), (F, 1)]), sys.module.dump()))
            }
            "closure" => Ok(ctx.closure()?.dump()),
            _ => {
                let sys = ctx.sys()?;
                let mut s = String::new();
                for g in ctx.generators()? {
                    for j in sys.sources(2) {
                        s.push_str(&format!("# {} on {}\n", g.name(), sys.module.info(j).label));
                        let d = apply_field(&g, j)?.dump();
                        if !d.is_empty() {
                            s.push_str(&d);
                            s.push('\n');
                        }
                    }
                }
                Ok(s)
            }
        }
    })();
    text.map_err(|e| ConfigError(e.to_string()))
}
