//! Axiom checkers for an assembled candidate algebra: vacuum and creation,
//! coset support, the Jacobi identity on sampled triples, transfer to the
//! module action, and the derivation `D(v) = v_{-2} 1`.
//!
//! States are identified with module vectors through `σ(x) = x_{-1} 1`,
//! so the Jacobi identity on `Y(u,z1)Y(v,z2)w` is checked as the Jacobi
//! relation on the module vector `σ(w)`, and transfer checks
//! `σ(x_n y) = x_n σ(y)` entry by entry.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{derive_field, Field, Vector};
use crate::grading::Grading;
use crate::products::{
    check_jacobi_relation, check_weak_associativity, ClosureAlgebra, ElementSpec, Products,
};
use crate::report::CheckReport;
use crate::scalars::{fmt_q, qi, Cyclo, Q};

pub struct AlgebraCandidate {
    pub closure: Arc<ClosureAlgebra>,
    pub grading: Grading,
    /// Element index of the vacuum.
    pub vacuum: usize,
    /// Module basis index of the vacuum vector.
    pub vacuum_vector: usize,
    /// `σ(x_i) = (x_i)_{-1} 1`.
    pub states: Vec<Vector>,
}

impl AlgebraCandidate {
    pub fn new(closure: Arc<ClosureAlgebra>) -> Result<Self> {
        let module = closure.elements[closure.vacuum].module().clone();
        let vacuum_vector = module.vacuum.ok_or_else(|| {
            Error::HypothesisViolated(format!("module {} has no vacuum vector", module.name))
        })?;
        let states = closure
            .elements
            .iter()
            .map(|e| e.apply(&qi(-1), vacuum_vector))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraCandidate {
            grading: module.grading.clone(),
            vacuum: closure.vacuum,
            vacuum_vector,
            states,
            closure,
        })
    }

    pub fn element(&self, i: usize) -> &Field {
        &self.closure.elements[i]
    }

    pub fn len(&self) -> usize {
        self.closure.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closure.elements.is_empty()
    }

    /// Table entry `x_i _n x_j`; absent entries inside the window are zero.
    pub fn entry(&self, i: usize, n: &Q, j: usize) -> Vec<(usize, Cyclo)> {
        self.closure
            .table
            .get(&(i, *n, j))
            .cloned()
            .unwrap_or_default()
    }

    /// `D(x_i) = (x_i)_{-2} 1`.
    pub fn derivation(&self, i: usize) -> Vec<(usize, Cyclo)> {
        self.entry(i, &qi(-2), self.vacuum)
    }

    /// Same candidate with a different vacuum element (fault injection).
    pub fn with_vacuum(&self, vacuum: usize) -> Self {
        AlgebraCandidate {
            closure: self.closure.clone(),
            grading: self.grading.clone(),
            vacuum,
            vacuum_vector: self.vacuum_vector,
            states: self.states.clone(),
        }
    }

    /// Same candidate with the first product entry of a non-vacuum row
    /// moved to `n + shift` (fault injection).
    pub fn with_entry_moved(&self, shift: Q) -> Self {
        let mut table = self.closure.table.clone();
        let key = table.keys().find(|(i, _, _)| *i != self.vacuum).cloned();
        if let Some(k) = key {
            let v = table.remove(&k).unwrap();
            table.insert((k.0, k.1 + shift, k.2), v);
        }
        let c = &self.closure;
        let closure = ClosureAlgebra {
            generators: c.generators.clone(),
            elements: c.elements.clone(),
            specs: c.specs.clone(),
            vacuum: c.vacuum,
            table,
            status: c.status,
            sources: c.sources.clone(),
            notes: c.notes.clone(),
        };
        AlgebraCandidate {
            closure: Arc::new(closure),
            ..self.with_vacuum(self.vacuum)
        }
    }

    pub fn is_generator(&self, i: usize) -> bool {
        matches!(self.closure.specs[i], ElementSpec::Generator(_))
    }

    pub fn is_product(&self, i: usize) -> bool {
        matches!(self.closure.specs[i], ElementSpec::Product { .. })
    }

    fn combination_state(&self, c: &[(usize, Cyclo)]) -> Vector {
        let mut v = Vector::new();
        for (l, x) in c {
            v.add_scaled(&self.states[*l], x);
        }
        v
    }
}

fn single(i: usize) -> Vec<(usize, Cyclo)> {
    vec![(i, Cyclo::one())]
}

/// `Y(1,z) = id` and `Y(v,z)1 = v + O(z)` on the table: `1_n x_j = δ_{n,-1} x_j`
/// for `n ∈ [-1, window]`, `x_i _{-1} 1 = x_i` and `x_i _n 1 = 0` for
/// `n ∈ [0, window]`.
pub fn check_vacuum_axioms(cand: &AlgebraCandidate, window: i64) -> CheckReport {
    let mut rep = CheckReport::new("axioms.vacuum", format!("n=-1..{window}"));
    let vac = cand.vacuum;
    if !cand
        .grading
        .group
        .reduce(cand.element(vac).sector().coords.clone())
        .is_zero()
    {
        rep.fail(format!(
            "vacuum {} is not in sector 0",
            cand.closure.label(vac)
        ));
    }
    for j in 0..cand.len() {
        for n in -1..=window {
            let got = cand.entry(vac, &qi(n), j);
            let want = if n == -1 { single(j) } else { vec![] };
            rep.checked += 1;
            if got != want {
                rep.fail(format!("1_[{n}] {} = {:?}", cand.closure.label(j), got));
            }
        }
    }
    for i in 0..cand.len() {
        for n in -1..=window {
            let got = cand.entry(i, &qi(n), vac);
            let want = if n == -1 { single(i) } else { vec![] };
            rep.checked += 1;
            if got != want {
                rep.fail(format!("{}_[{n}] 1 = {:?}", cand.closure.label(i), got));
            }
        }
    }
    rep
}

/// Every table entry `x_i _n x_j` with `x_i ∈ V^g`, `x_j ∈ V^h` has
/// `n ∈ (g,h) + Z`.
pub fn check_coset_support(cand: &AlgebraCandidate) -> CheckReport {
    let mut rep = CheckReport::new(
        "axioms.coset_support",
        format!("entries={}", cand.closure.table.len()),
    );
    for ((i, n, j), c) in &cand.closure.table {
        if c.is_empty() {
            continue;
        }
        rep.checked += 1;
        let gh = cand
            .grading
            .pair(cand.element(*i).sector(), cand.element(*j).sector());
        if !(n - gh).is_integer() {
            rep.fail(format!(
                "{}_[{}] {} with (g,h) = {}",
                cand.closure.label(*i),
                fmt_q(n),
                cand.closure.label(*j),
                fmt_q(&gh)
            ));
        }
    }
    rep
}

/// The Jacobi identity for `(u, v)` acting on the state of `w`.
pub fn check_full_jacobi(
    reg: &Products,
    cand: &AlgebraCandidate,
    (u, v, w): (usize, usize, usize),
    window: i64,
    fault: Option<Cyclo>,
) -> Result<CheckReport> {
    let mut rep = check_jacobi_relation(
        reg,
        cand.element(u),
        cand.element(v),
        &cand.states[w],
        window,
        fault,
    )?;
    let l = &cand.closure;
    rep.id = format!(
        "{}[{},{},{}]",
        if rep.id.starts_with("jacobi.fault") {
            "axioms.jacobi.fault"
        } else {
            "axioms.jacobi"
        },
        l.label(u),
        l.label(v),
        l.label(w)
    );
    Ok(rep)
}

/// Jacobi identity and weak associativity on the same triple, with the
/// outcome that both agree.
pub fn check_associativity_equivalence(
    reg: &Products,
    cand: &AlgebraCandidate,
    t: (usize, usize, usize),
    window: i64,
) -> Result<CheckReport> {
    let j = check_full_jacobi(reg, cand, t, window, None)?;
    let a = check_weak_associativity(
        reg,
        cand.element(t.0),
        cand.element(t.1),
        &cand.states[t.2],
        window,
    )?;
    let l = &cand.closure;
    let mut rep = CheckReport::new(
        format!(
            "axioms.associativity_equivalence[{},{},{}]",
            l.label(t.0),
            l.label(t.1),
            l.label(t.2)
        ),
        format!("±{window}"),
    );
    rep.checked = j.checked + a.checked;
    rep.skipped = j.skipped + a.skipped;
    rep.notes = a.notes.clone();
    rep.note(format!(
        "jacobi {}, weak associativity {}",
        pass(j.passed),
        pass(a.passed)
    ));
    if j.passed != a.passed {
        rep.fail("jacobi and weak associativity disagree");
    }
    if a.checked == 0 {
        rep.note("weak associativity had no coefficient inside the truncation");
    }
    Ok(rep)
}

fn pass(b: bool) -> &'static str {
    if b {
        "passes"
    } else {
        "fails"
    }
}

/// `σ(x_i _n x_j) = (x_i)_n σ(x_j)` for every table entry.
pub fn check_module_transfer(cand: &AlgebraCandidate) -> Result<CheckReport> {
    let mut rep = CheckReport::new(
        "axioms.module_transfer",
        format!("entries={}", cand.closure.table.len()),
    );
    for ((i, n, j), c) in &cand.closure.table {
        match cand.element(*i).apply_vec(n, &cand.states[*j]) {
            Ok(v) => {
                rep.checked += 1;
                if v != cand.combination_state(c) {
                    rep.fail(format!(
                        "{}_[{}] {}",
                        cand.closure.label(*i),
                        fmt_q(n),
                        cand.closure.label(*j)
                    ));
                }
            }
            Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// `D(x_i) = (x_i)_{-2} 1` agrees with the derivative field, for every
/// element whose derivative stays in the window.
pub fn check_derivation(
    reg: &Products,
    cand: &AlgebraCandidate,
    max_weight: &Q,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("axioms.derivation", format!("weight≤{}", fmt_q(max_weight)));
    for i in 0..cand.len() {
        let e = cand.element(i);
        if e.weight() + 1 > *max_weight {
            continue;
        }
        let lhs = vec![(Cyclo::one(), derive_field(e))];
        let rhs: Vec<(Cyclo, Field)> = cand
            .derivation(i)
            .into_iter()
            .map(|(l, c)| (c, cand.element(l).clone()))
            .collect();
        let probes = reg.probes_for(e);
        let sub = if rhs.is_empty() {
            let mut s = CheckReport::new("zero", "");
            for x in crate::fields::probe_combination(&lhs, &probes)?.into_iter() {
                match x {
                    Some(v) => {
                        s.checked += 1;
                        if !v.is_zero() {
                            s.fail(format!(
                                "D({}) nonzero but x_-2 1 = 0",
                                cand.closure.label(i)
                            ));
                        }
                    }
                    None => s.skipped += 1,
                }
            }
            s
        } else {
            crate::fields::compare_combinations(
                &format!("D({})", cand.closure.label(i)),
                &lhs,
                &rhs,
                &probes,
            )?
        };
        rep.absorb(&sub);
    }
    Ok(rep)
}

/// All triples of generators plus `extra` seeded triples, each involving
/// at least one product element when there is one.
pub fn default_triples(
    cand: &AlgebraCandidate,
    extra: usize,
    seed: u64,
) -> Vec<(usize, usize, usize)> {
    let gens: Vec<usize> = (0..cand.len()).filter(|&i| cand.is_generator(i)).collect();
    let prods: Vec<usize> = (0..cand.len()).filter(|&i| cand.is_product(i)).collect();
    let mut out = Vec::new();
    for &a in &gens {
        for &b in &gens {
            for &c in &gens {
                out.push((a, b, c));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cand.len();
    for _ in 0..extra {
        let mut t = [
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
        ];
        if !prods.is_empty() && !t.iter().any(|i| cand.is_product(*i)) {
            let slot = rng.gen_range(0..3);
            t[slot] = prods[rng.gen_range(0..prods.len())];
        }
        out.push((t[0], t[1], t[2]));
    }
    out
}

/// Up to `count` distinct product elements, chosen by a seeded generator
/// and returned in ascending order.
pub fn sample_products(cand: &AlgebraCandidate, count: usize, seed: u64) -> Vec<usize> {
    let prods: Vec<usize> = (0..cand.len()).filter(|&i| cand.is_product(i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<usize> = prods.choose_multiple(&mut rng, count).copied().collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::psi::PsiSystem;
    use crate::affine::{AffineData, E, F};
    use crate::exec::Exec;
    use crate::products::{generate_closure, CertOptions, ClosureOptions};
    use crate::synthetic::quantum_torus;

    fn closure_opts(
        max_weight: Q,
        sector: fn(&crate::grading::GroupElement) -> bool,
    ) -> ClosureOptions {
        ClosureOptions {
            max_weight,
            sector_ok: Arc::new(sector),
            max_rounds: 8,
            max_elements: 64,
            full_table: true,
            extra_sources: vec![0],
        }
    }

    fn psi_candidate() -> (PsiSystem, Products, AlgebraCandidate) {
        let sys = PsiSystem::build(AffineData::sl2(qi(3)).unwrap(), 4, qi(0)).unwrap();
        let reg = Products::new(CertOptions {
            window: 2,
            sources: sys.sources(2),
            exec: Exec::Parallel,
            k_max: 4,
        });
        let id = Field::identity(sys.module.clone());
        let c = generate_closure(
            &reg,
            &id,
            &[sys.psi(E), sys.psi(F)],
            &closure_opts(qi(2), |g| g.coords[0].abs() <= 2),
        )
        .unwrap();
        let cand = AlgebraCandidate::new(Arc::new(c)).unwrap();
        (sys, reg, cand)
    }

    #[test]
    fn psi_candidate_axioms() {
        let (_sys, reg, cand) = psi_candidate();
        let v = check_vacuum_axioms(&cand, 3);
        assert!(v.passed && v.checked > 0, "{v:?}");
        assert!(!check_vacuum_axioms(&cand.with_vacuum(1), 3).passed);
        let c = check_coset_support(&cand);
        assert!(c.passed && c.checked > 0);
        assert!(!check_coset_support(&cand.with_entry_moved(crate::scalars::q(1, 3))).passed);
        let t = check_module_transfer(&cand).unwrap();
        assert!(t.passed && t.checked > 0, "{t:?}");
        let d = check_derivation(&reg, &cand, &qi(2)).unwrap();
        assert!(d.passed && d.checked > 0, "{d:?}");
    }

    #[test]
    fn psi_candidate_jacobi_on_triples() {
        let (_sys, reg, cand) = psi_candidate();
        let triples = default_triples(&cand, 5, 7);
        assert_eq!(triples.len(), 13);
        for t in triples {
            let r = check_full_jacobi(&reg, &cand, t, 2, None).unwrap();
            assert!(r.passed, "{r:?}");
            let e = check_associativity_equivalence(&reg, &cand, t, 2).unwrap();
            assert!(e.passed, "{e:?}");
        }
    }

    #[test]
    fn quantum_torus_jacobi_and_inverse_factor() {
        let qt = quantum_torus(crate::grading::Grading::quantum_torus());
        let reg = Products::new(CertOptions {
            window: 2,
            sources: (0..16).collect(),
            exec: Exec::Parallel,
            k_max: 2,
        });
        let id = Field::identity(qt.module.clone());
        let c = generate_closure(
            &reg,
            &id,
            &[qt.x.clone(), qt.y.clone()],
            &closure_opts(qi(0), |_| true),
        )
        .unwrap();
        assert!(c.is_fixed_point());
        assert_eq!(c.elements.len(), 16);
        let cand = AlgebraCandidate::new(Arc::new(c)).unwrap();
        assert!(check_vacuum_axioms(&cand, 2).passed);
        assert!(check_coset_support(&cand).passed);
        assert!(check_module_transfer(&cand).unwrap().passed);
        let (x, y) = (1, 2);
        let r = check_full_jacobi(&reg, &cand, (x, y, 0), 2, None).unwrap();
        assert!(r.passed && r.checked > 0, "{r:?}");
        let r = check_full_jacobi(&reg, &cand, (x, y, 3), 2, None).unwrap();
        assert!(r.passed && r.checked > 0, "{r:?}");
        // c replaced by c^{-1} scales the second term by c^{-2}
        let cxy = cand
            .grading
            .c(cand.element(x).sector(), cand.element(y).sector());
        let f = cxy.inv().unwrap().mul_ref(&cxy.inv().unwrap());
        assert!(
            !check_full_jacobi(&reg, &cand, (x, y, 0), 2, Some(f))
                .unwrap()
                .passed
        );
    }
}
