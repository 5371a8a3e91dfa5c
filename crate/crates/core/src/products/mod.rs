//! Weak commutativity certificates, n-th products of fields and the laws
//! they satisfy.
//!
//! A pair `(a, b)` of sectors `(g, h)` is certified at order `k` when
//! `(z1-z2)^{k+(g,h)} a(z1)b(z2) = (-1)^k c(g,h) (z2-z1)^{k+(g,h)} b(z2)a(z1)`
//! holds coefficient-wise on the probed vectors. Products `a_n b` exist only
//! for certified pairs.

mod closure;
mod jacobi;

pub use closure::{generate_closure, ClosureAlgebra, ClosureOptions, ClosureStatus, ElementSpec};
pub use jacobi::{
    check_adjoint_commutativity, check_d_bracket, check_jacobi_relation, check_skew_symmetry,
    check_weak_associativity, jacobi_coefficient, per_vector_order,
};

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fields::{
    combine, derive_field, sector_probes, Field, FieldKind, Probe, TruncatedModule, Vector,
};
use crate::report::CheckReport;
use crate::scalars::{binom_q, factorial, fmt_q, q_to_rat, qi, sign_pow, Cyclo, Q};

#[derive(Clone, Debug)]
pub struct CertOptions {
    /// Half-width of the `z1`-exponent window around the coset of each source.
    pub window: i64,
    /// Source basis vectors on which matrix elements are taken.
    pub sources: Vec<usize>,
    pub exec: Exec,
    pub k_max: u32,
}

#[derive(Clone, Debug)]
pub struct CommutativityCert {
    pub a: Field,
    pub b: Field,
    /// Least passing order, if any.
    pub k: Option<u32>,
    pub gh: Q,
    pub c: Cyclo,
    /// One report per scanned order, plus the monotonicity probe at `k+1`.
    pub scans: Vec<(u32, CheckReport)>,
}

impl CommutativityCert {
    pub fn passed(&self) -> bool {
        self.k.is_some()
    }

    /// The certified exponent `k + (g,h)`.
    pub fn exponent(&self) -> Option<Q> {
        self.k.map(|k| self.gh + i64::from(k))
    }

    pub fn report(&self) -> CheckReport {
        let mut rep = CheckReport::new(
            format!("commutativity[{},{}]", self.a.name(), self.b.name()),
            self.scans
                .last()
                .map(|(_, r)| r.window.clone())
                .unwrap_or_default(),
        );
        match self.k {
            Some(k) => {
                for (kk, r) in &self.scans {
                    if *kk >= k {
                        rep.absorb(r);
                    }
                }
                rep.note(format!("minimal k = {k}, (g,h) = {}", fmt_q(&self.gh)));
            }
            None => rep.fail(format!(
                "no k ≤ {} passes",
                self.scans.len().saturating_sub(1)
            )),
        }
        rep
    }
}

/// Both sides of the weak commutativity relation at order `k`, as the
/// coefficient of `z1^{-p-1} z2^{-q-1}` applied to basis vector `j`.
pub fn commutativity_coefficient(
    a: &Field,
    b: &Field,
    k: u32,
    p: &Q,
    q: &Q,
    j: usize,
) -> Result<(Vector, Vector)> {
    let m = a.module();
    let gr = &m.grading;
    let s = &m.info(j).sector;
    let gh = gr.pair(a.sector(), b.sector());
    let big_k = gh + i64::from(k);
    let tb = gr.act(b.sector(), s);
    let ta = gr.act(a.sector(), s);
    let mut lhs = Vector::new();
    let mut i = 0i64;
    loop {
        let bi = q + i;
        if m.vanishes_through(&tb, &b.target_degree(&bi, j)) {
            break;
        }
        let coef = binom_q(&big_k, i as u32);
        if !coef.is_zero() {
            let v = b.apply(&bi, j)?;
            if !v.is_zero() {
                let u = a.apply_vec(&(p + big_k - i), &v)?;
                lhs.add_scaled(
                    &u,
                    &Cyclo::from_rational(coef * crate::scalars::int(sign_pow(i))),
                );
            }
        }
        i += 1;
    }
    let outer = gr
        .c(a.sector(), b.sector())
        .scale(&crate::scalars::int(sign_pow(i64::from(k))));
    let mut rhs = Vector::new();
    let mut i = 0i64;
    loop {
        let ai = p + i;
        if m.vanishes_through(&ta, &a.target_degree(&ai, j)) {
            break;
        }
        let coef = binom_q(&big_k, i as u32);
        if !coef.is_zero() {
            let v = a.apply(&ai, j)?;
            if !v.is_zero() {
                let u = b.apply_vec(&(q + big_k - i), &v)?;
                rhs.add_scaled(&u, &outer.scale(&(coef * crate::scalars::int(sign_pow(i)))));
            }
        }
        i += 1;
    }
    Ok((lhs, rhs))
}

/// Retained degrees of sector `t`, ascending.
pub(crate) fn sector_degrees(m: &TruncatedModule, t: &crate::grading::GroupElement) -> Vec<Q> {
    let mut d: Vec<Q> = m.in_sector(t).iter().map(|&i| m.info(i).degree).collect();
    d.sort();
    d.dedup();
    d
}

/// Checks the relation at a fixed order on every source, every `z1`
/// exponent in the window and every retained target degree.
pub fn check_commutativity(
    a: &Field,
    b: &Field,
    k: u32,
    opts: &CertOptions,
) -> Result<CheckReport> {
    let m = a.module();
    let gr = &m.grading;
    let gh = gr.pair(a.sector(), b.sector());
    let big_k = gh + i64::from(k);
    let gsum = gr.add(a.sector(), b.sector());
    let mut jobs = Vec::new();
    for &j in &opts.sources {
        let info = m.info(j);
        let gs = gr.pair_gs(a.sector(), &info.sector);
        let t = gr.act(&gsum, &info.sector);
        for tt in -opts.window..=opts.window {
            let p = gs + tt;
            for d in sector_degrees(m, &t) {
                let q = info.degree + a.weight() + b.weight() - p - big_k - 2 - d;
                jobs.push((j, p, q));
            }
        }
    }
    let window = format!("k={k} p=±{} sources={}", opts.window, opts.sources.len());
    let results = opts.exec.map(jobs, |(j, p, q)| {
        ((j, p, q), commutativity_coefficient(a, b, k, &p, &q, j))
    });
    let mut rep = CheckReport::new(format!("commutativity[{},{}]", a.name(), b.name()), window);
    for ((j, p, q), r) in results {
        match r {
            Ok((l, rr)) => {
                rep.checked += 1;
                if l != rr {
                    rep.fail(format!(
                        "z1^{} z2^{} on basis {j}",
                        fmt_q(&(-p - 1)),
                        fmt_q(&(-q - 1))
                    ));
                }
            }
            Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// Least `k ≤ k_max` passing on the window, with `k+1` re-checked for
/// monotonicity.
pub fn find_commutativity_order(
    a: &Field,
    b: &Field,
    opts: &CertOptions,
) -> Result<CommutativityCert> {
    let gr = &a.module().grading;
    let mut cert = CommutativityCert {
        a: a.clone(),
        b: b.clone(),
        k: None,
        gh: gr.pair(a.sector(), b.sector()),
        c: gr.c(a.sector(), b.sector()),
        scans: Vec::new(),
    };
    for k in 0..=opts.k_max + 1 {
        if k > opts.k_max && cert.k.is_none() {
            break;
        }
        let rep = check_commutativity(a, b, k, opts)?;
        if rep.checked == 0 && cert.k.is_some() {
            let mut r = CheckReport::new("monotonicity", rep.window.clone());
            r.note(format!("k={k} has no matrix element inside the truncation"));
            cert.scans.push((k, r));
            break;
        }
        if rep.checked == 0 {
            return Err(Error::WindowUnderflow(format!(
                "no matrix element of ({}, {}) at k={k} fits the truncation",
                a.name(),
                b.name()
            )));
        }
        let passed = rep.passed;
        cert.scans.push((k, rep));
        match cert.k {
            None if passed => cert.k = Some(k),
            Some(k0) => {
                if !passed {
                    // monotonicity broken: the lower order cannot be trusted
                    cert.scans.push((k0, {
                        let mut r = CheckReport::new("monotonicity", "");
                        r.fail(format!("k={k0} passes but k={k} fails"));
                        r
                    }));
                    cert.k = None;
                }
                break;
            }
            None => {}
        }
    }
    Ok(cert)
}

/// `a(z)_n b(z)`; the zero field when `n ∉ (g,h)+Z`.
pub fn nth_product(a: &Field, b: &Field, n: &Q, cert: &CommutativityCert) -> Result<Field> {
    let Some(exponent) = cert.exponent() else {
        return Err(Error::UncertifiedPair(a.name().into(), b.name().into()));
    };
    if cert.a.id() != a.id() || cert.b.id() != b.id() {
        return Err(Error::UncertifiedPair(a.name().into(), b.name().into()));
    }
    Ok(product_with_exponent(
        a,
        b,
        n,
        exponent,
        cert.gh,
        cert.c.clone(),
    ))
}

fn product_name(a: &Field, b: &Field, n: &Q) -> String {
    format!("({}_[{}]{})", a.name(), fmt_q(n), b.name())
}

/// The finite-sum product built with an explicit exponent; any exponent at
/// least the certified one gives the same field.
pub fn product_with_exponent(a: &Field, b: &Field, n: &Q, exponent: Q, gh: Q, c: Cyclo) -> Field {
    let m = a.module();
    let sector = m.grading.add(a.sector(), b.sector());
    let weight = a.weight() + b.weight() - n - 1;
    if !(n - gh).is_integer() {
        return Field::zero(m.clone(), sector, weight).renamed(product_name(a, b, n));
    }
    Field::new(
        product_name(a, b, n),
        sector,
        weight,
        m.clone(),
        FieldKind::Product {
            a: a.clone(),
            b: b.clone(),
            n: *n,
            exponent,
            gh,
            c,
        },
    )
}

/// Certificate cache and product constructor.
pub struct Products {
    pub opts: CertOptions,
    certs: Mutex<HashMap<(u64, u64), Arc<CommutativityCert>>>,
    fields: Mutex<HashMap<(u64, u64, Q), Field>>,
}

impl Products {
    pub fn new(opts: CertOptions) -> Self {
        Products {
            opts,
            certs: Mutex::new(HashMap::new()),
            fields: Mutex::new(HashMap::new()),
        }
    }

    pub fn certify(&self, a: &Field, b: &Field) -> Result<Arc<CommutativityCert>> {
        let key = (a.id(), b.id());
        if let Some(c) = self.certs.lock().get(&key) {
            return Ok(c.clone());
        }
        let c = Arc::new(find_commutativity_order(a, b, &self.opts)?);
        self.certs.lock().insert(key, c.clone());
        Ok(c)
    }

    /// `a_n b`, memoised so that repeated requests share one mode cache.
    pub fn product(&self, a: &Field, b: &Field, n: &Q) -> Result<Field> {
        let key = (a.id(), b.id(), *n);
        if let Some(f) = self.fields.lock().get(&key) {
            return Ok(f.clone());
        }
        let cert = self.certify(a, b)?;
        let f = nth_product(a, b, n, &cert)?;
        Ok(self.fields.lock().entry(key).or_insert(f).clone())
    }

    /// Cached certificates, sorted by pair names.
    pub fn certificates(&self) -> Vec<Arc<CommutativityCert>> {
        let mut v: Vec<_> = self.certs.lock().values().cloned().collect();
        v.sort_by(|x, y| (x.a.name(), x.b.name()).cmp(&(y.a.name(), y.b.name())));
        v
    }

    /// Probes for fields of the sector of `f` on the configured sources.
    pub fn probes_for(&self, f: &Field) -> Vec<Probe> {
        sector_probes(f.module(), f.sector(), &self.opts.sources)
    }
}

fn one() -> Cyclo {
    Cyclo::one()
}

fn zero_check(id: &str, f: &Field, probes: &[Probe], rep: &mut CheckReport) -> Result<()> {
    for (p, e) in probes.iter().zip(crate::fields::probe_entries(f, probes)?) {
        match e {
            Some(v) => {
                rep.checked += 1;
                if !v.is_zero() {
                    rep.fail(format!(
                        "{id}: nonzero on basis {} at target degree {}",
                        p.source,
                        fmt_q(&p.target_degree)
                    ));
                }
            }
            None => rep.skipped += 1,
        }
    }
    Ok(())
}

fn compare_into(
    rep: &mut CheckReport,
    id: &str,
    lhs: &[(Cyclo, Field)],
    rhs: &[(Cyclo, Field)],
    probes: &[Probe],
) -> Result<()> {
    let r = crate::fields::compare_combinations(id, lhs, rhs, probes)?;
    rep.absorb(&r);
    Ok(())
}

/// Coset vanishing and eventual vanishing of `a_n b`: products off the
/// coset are zero, and on the coset the product computed with the
/// certified exponent `K` agrees with the one computed with `K+2`, which
/// is zero for `n ≥ K`. The observed threshold is noted.
pub fn check_vanishing(reg: &Products, a: &Field, b: &Field, n_window: i64) -> Result<CheckReport> {
    let cert = reg.certify(a, b)?;
    let big_k = cert
        .exponent()
        .ok_or_else(|| Error::UncertifiedPair(a.name().into(), b.name().into()))?;
    let mut rep = CheckReport::new(
        format!("product.vanishing[{},{}]", a.name(), b.name()),
        format!("n=(g,h)+[-{n_window},K+2]"),
    );
    let sector = a.module().grading.add(a.sector(), b.sector());
    let probes = sector_probes(a.module(), &sector, &reg.opts.sources);
    let mut last_nonzero: Option<Q> = None;
    let top = (big_k - cert.gh).to_integer() + 2;
    for t in -n_window..=top {
        let n = cert.gh + t;
        let off = nth_product(a, b, &(n + Q::new(1, 2)), &cert)?;
        zero_check("off-coset", &off, &probes, &mut rep)?;
        let f = nth_product(a, b, &n, &cert)?;
        let g = product_with_exponent(a, b, &n, big_k + 2, cert.gh, cert.c.clone());
        let ef = crate::fields::probe_entries(&f, &probes)?;
        let eg = crate::fields::probe_entries(&g, &probes)?;
        for ((p, x), y) in probes.iter().zip(ef).zip(eg) {
            match (x, y) {
                (Some(x), Some(y)) => {
                    rep.checked += 1;
                    if x != y {
                        rep.fail(format!(
                            "n={}: exponent K and K+2 disagree on basis {} at degree {}",
                            fmt_q(&n),
                            p.source,
                            fmt_q(&p.target_degree)
                        ));
                    }
                    if !y.is_zero() {
                        last_nonzero = Some(last_nonzero.map_or(n, |l| if n > l { n } else { l }));
                    }
                }
                _ => rep.skipped += 1,
            }
        }
    }
    match last_nonzero {
        Some(l) => rep.note(format!(
            "vanishing threshold n0 = {} (certified exponent {})",
            fmt_q(&(l + 1)),
            fmt_q(&big_k)
        )),
        None => rep.note("all tested products vanish".to_string()),
    }
    Ok(rep)
}

/// `I_n a = δ_{n,-1} a`, `a_n I = 0` for `n ≥ 0` and `a_{-1-r} I = a^{(r)}/r!`.
pub fn check_vacuum_laws(
    reg: &Products,
    id_field: &Field,
    a: &Field,
    max_r: u32,
    n_window: i64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new(
        format!("product.vacuum[{}]", a.name()),
        format!("r≤{max_r} n=±{n_window}"),
    );
    let probes = reg.probes_for(a);
    for t in -n_window..=n_window {
        let n = qi(t);
        let left = reg.product(id_field, a, &n)?;
        if t == -1 {
            compare_into(
                &mut rep,
                "I_-1 a",
                &[(one(), left)],
                &[(one(), a.clone())],
                &probes,
            )?;
        } else {
            zero_check(&format!("I_{t} a"), &left, &probes, &mut rep)?;
        }
        if t >= 0 {
            let right = reg.product(a, id_field, &n)?;
            zero_check(&format!("a_{t} I"), &right, &probes, &mut rep)?;
        }
    }
    let mut deriv = a.clone();
    for r in 0..=max_r {
        if r > 0 {
            deriv = derive_field(&deriv);
        }
        let f = reg.product(a, id_field, &qi(-1 - i64::from(r)))?;
        let inv = Cyclo::from_rational(factorial(r).recip());
        compare_into(
            &mut rep,
            &format!("a_{} I", -1 - i64::from(r)),
            &[(one(), f)],
            &[(inv, deriv.clone())],
            &reg.probes_for(&deriv),
        )?;
    }
    Ok(rep)
}

/// `(a')_n b = -n a_{n-1} b` and `D(a_n b) = (a')_n b + a_n (b')`; the
/// derived pairs are certified on the way.
pub fn check_derivative_laws(
    reg: &Products,
    a: &Field,
    b: &Field,
    n_window: i64,
) -> Result<CheckReport> {
    let cert = reg.certify(a, b)?;
    if !cert.passed() {
        return Err(Error::UncertifiedPair(a.name().into(), b.name().into()));
    }
    let da = derive_field(a);
    let db = derive_field(b);
    let mut rep = CheckReport::new(
        format!("product.derivative[{},{}]", a.name(), b.name()),
        format!("n=(g,h)+±{n_window}"),
    );
    for (x, y) in [(&da, b), (a, &db)] {
        let c = reg.certify(x, y)?;
        if !c.passed() {
            rep.fail(format!(
                "derived pair ({}, {}) not certified",
                x.name(),
                y.name()
            ));
            return Ok(rep);
        }
    }
    for t in -n_window..=n_window {
        let n = cert.gh + t;
        let lhs = reg.product(&da, b, &n)?;
        let rhs = reg.product(a, b, &(n - 1))?;
        let coef = Cyclo::from_rational(q_to_rat(&-n));
        let probes = reg.probes_for(&lhs);
        compare_into(
            &mut rep,
            "(a')_n b",
            &[(one(), lhs.clone())],
            &[(coef, rhs)],
            &probes,
        )?;
        let d_prod = derive_field(&reg.product(a, b, &n)?);
        let right = reg.product(a, &db, &n)?;
        let sum = combine("sum", vec![(one(), lhs), (one(), right)]);
        compare_into(
            &mut rep,
            "D(a_n b)",
            &[(one(), d_prod)],
            &[(one(), sum)],
            &probes,
        )?;
    }
    Ok(rep)
}

/// Stable text dump of `a_n b` on the probes, for representative
/// independence comparisons.
pub fn dump_product(reg: &Products, a: &Field, b: &Field, n: &Q) -> Result<String> {
    let f = reg.product(a, b, n)?;
    let probes = reg.probes_for(&f);
    let mut out = format!("{} weight {}\n", f.name(), fmt_q(&f.weight()));
    for (p, e) in probes
        .iter()
        .zip(crate::fields::probe_entries(&f, &probes)?)
    {
        let shown = match e {
            Some(v) => v
                .iter()
                .map(|(i, c)| format!("{i}:{c}"))
                .collect::<Vec<_>>()
                .join(" "),
            None => "?".into(),
        };
        out.push_str(&format!(
            "  w{} -> deg {}: {}\n",
            p.source,
            fmt_q(&p.target_degree),
            shown
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::psi::PsiSystem;
    use crate::affine::{AffineData, E, F};
    use crate::grading::Grading;
    use crate::synthetic::quantum_torus;
    use std::collections::BTreeMap;

    fn opts(sources: Vec<usize>, window: i64) -> CertOptions {
        CertOptions {
            window,
            sources,
            exec: Exec::Parallel,
            k_max: 4,
        }
    }

    fn psi(lift: i64) -> (PsiSystem, Products) {
        let sys = PsiSystem::build(AffineData::sl2(qi(3)).unwrap(), 4, qi(lift)).unwrap();
        let reg = Products::new(opts(sys.sources(2), 2));
        (sys, reg)
    }

    fn closure_opts(max_elements: usize) -> ClosureOptions {
        ClosureOptions {
            max_weight: qi(2),
            sector_ok: Arc::new(|g| g.coords[0].abs() <= 2),
            max_rounds: 8,
            max_elements,
            full_table: false,
            extra_sources: vec![0],
        }
    }

    #[test]
    fn quantum_torus_pair_commutes_at_zero() {
        let qt = quantum_torus(Grading::quantum_torus());
        let reg = Products::new(opts((0..16).collect(), 2));
        assert_eq!(reg.certify(&qt.x, &qt.y).unwrap().k, Some(0));
        let id = Field::identity(qt.module.clone());
        assert_eq!(reg.certify(&id, &id).unwrap().k, Some(0));
    }

    #[test]
    fn psi_orders_depend_only_on_the_exponent() {
        let (sys, reg) = psi(0);
        let (pe, pf) = (sys.psi(E), sys.psi(F));
        let c = reg.certify(&pe, &pf).unwrap();
        assert_eq!(
            (c.k, c.exponent()),
            (Some(0), Some(crate::scalars::q(4, 3)))
        );
        assert!(c.scans.iter().all(|(_, r)| r.passed));
        // with representatives in [-1, 1) the same exponent needs k = 2
        let low = sys.with_lift_base(qi(-1));
        let reg2 = Products::new(opts(low.sources(2), 2));
        let c = reg2.certify(&low.psi(E), &low.psi(F)).unwrap();
        assert_eq!(
            (c.k, c.exponent()),
            (Some(2), Some(crate::scalars::q(4, 3)))
        );
        assert!(!c.scans[0].1.passed && !c.scans[1].1.passed && c.scans[3].1.passed);
    }

    #[test]
    fn certification_errors() {
        let (sys, reg) = psi(0);
        let (pe, pf) = (sys.psi(E), sys.psi(F));
        let empty = Products::new(opts(vec![], 2));
        assert!(matches!(
            empty.certify(&pe, &pf),
            Err(Error::WindowUnderflow(_))
        ));
        let c = reg.certify(&pe, &pe).unwrap();
        assert!(matches!(
            nth_product(&pe, &pf, &qi(0), &c),
            Err(Error::UncertifiedPair(..))
        ));
    }

    #[test]
    fn product_laws_on_psi() {
        let (sys, reg) = psi(0);
        let (pe, pf) = (sys.psi(E), sys.psi(F));
        let id = Field::identity(sys.module.clone());
        let v = check_vanishing(&reg, &pe, &pf, 3).unwrap();
        assert!(v.passed && v.checked > 0, "{v:?}");
        assert!(v.notes[0].contains("n0 = 4/3"));
        for a in [&pe, &pf] {
            let r = check_vacuum_laws(&reg, &id, a, 2, 3).unwrap();
            assert!(r.passed && r.checked > 0, "{r:?}");
        }
        let d = check_derivative_laws(&reg, &pe, &pf, 2).unwrap();
        assert!(d.passed && d.checked > 0, "{d:?}");
    }

    #[test]
    fn top_product_matches_the_form() {
        // ψ(e)_{1/3} ψ(f) = ℓ⟨e,f⟩ I on every probe
        let (sys, reg) = psi(0);
        let id = Field::identity(sys.module.clone());
        let p = reg
            .product(&sys.psi(E), &sys.psi(F), &crate::scalars::q(1, 3))
            .unwrap();
        let r = crate::fields::compare_combinations(
            "top",
            &[(one(), p)],
            &[(Cyclo::from_int(3), id.clone())],
            &reg.probes_for(&id),
        )
        .unwrap();
        assert!(r.passed && r.checked > 0, "{r:?}");
    }

    #[test]
    fn jacobi_family_on_psi() {
        let (sys, reg) = psi(0);
        let (pe, pf) = (sys.psi(E), sys.psi(F));
        let w = Vector::basis(0);
        for (a, b) in [(&pe, &pf), (&pe, &pe), (&pf, &pe)] {
            let r = check_jacobi_relation(&reg, a, b, &w, 2, None).unwrap();
            assert!(r.passed && r.checked > 0, "{r:?}");
        }
        assert!(
            !check_jacobi_relation(&reg, &pe, &pf, &w, 2, Some(Cyclo::from_int(-1)))
                .unwrap()
                .passed
        );
        for j in sys.sources(1) {
            let r = check_weak_associativity(&reg, &pe, &pf, &Vector::basis(j), 2).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(
            check_skew_symmetry(&reg, &pe, &pf, 2, false)
                .unwrap()
                .passed
        );
        assert!(!check_skew_symmetry(&reg, &pe, &pf, 2, true).unwrap().passed);
        let adj = check_adjoint_commutativity(&reg, &pe, &pf, &pe, 1).unwrap();
        assert!(adj.passed && adj.checked > 0, "{adj:?}");
        assert!(adj.notes[0].contains("fails"));
    }

    #[test]
    fn d_bracket_and_its_fault() {
        let (sys, reg) = psi(0);
        let gens = [sys.psi(E), sys.psi(F)];
        let r = check_d_bracket(&sys.d_operator(), &gens, &[], &reg.opts.sources, 2).unwrap();
        assert!(r.passed && r.checked > 0);
        let d = sys.d_operator();
        let bad: crate::fields::Operator = Arc::new(move |j| Ok(d(j)?.scale(&Cyclo::from_int(2))));
        match check_d_bracket(&bad, &gens, &[], &reg.opts.sources, 2) {
            Err(Error::HypothesisViolated(m)) => assert!(m.contains("psi(e)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trivial_closures() {
        let (sys, reg) = psi(0);
        let id = Field::identity(sys.module.clone());
        for gens in [vec![], vec![id.clone()]] {
            let c = generate_closure(&reg, &id, &gens, &closure_opts(8)).unwrap();
            assert_eq!(c.elements.len(), 1);
            assert!(c.is_fixed_point());
        }
    }

    #[test]
    fn psi_closure_and_capacity() {
        let (sys, reg) = psi(0);
        let id = Field::identity(sys.module.clone());
        let gens = [sys.psi(E), sys.psi(F)];
        let c = generate_closure(&reg, &id, &gens, &closure_opts(64)).unwrap();
        assert!(c.is_fixed_point());
        // one element per nonempty slice of Ω up to weight 2 with |k| ≤ 2
        let mut omega = BTreeMap::new();
        for b in sys.module.basis() {
            if b.degree <= qi(2) && b.sector.coords[0].abs() <= 2 {
                *omega.entry((b.sector.clone(), b.degree)).or_insert(0usize) += 1;
            }
        }
        assert_eq!(c.dims(), omega);
        assert!(matches!(
            generate_closure(&reg, &id, &gens, &closure_opts(4)),
            Err(Error::CapacityExceeded(_))
        ));
    }

    #[test]
    fn closure_is_representative_independent() {
        let (sys, reg) = psi(0);
        let id = Field::identity(sys.module.clone());
        let c = generate_closure(&reg, &id, &[sys.psi(E), sys.psi(F)], &closure_opts(64)).unwrap();
        // the shifted exponents reach higher states, hence the larger truncation
        let big = PsiSystem::build(AffineData::sl2(qi(3)).unwrap(), 8, qi(2)).unwrap();
        let labels: Vec<&str> = c
            .sources
            .iter()
            .map(|&j| sys.module.info(j).label.as_str())
            .collect();
        let sources = labels
            .iter()
            .map(|l| {
                (0..big.module.dim())
                    .find(|&j| big.module.info(j).label == *l)
                    .unwrap()
            })
            .collect();
        let d = c
            .replay(
                &Field::identity(big.module.clone()),
                &[big.psi(E), big.psi(F)],
                sources,
            )
            .unwrap();
        let probes = c.probe_labels(&qi(3));
        let (x, y) = (
            c.coefficient_dump(&probes).unwrap(),
            d.coefficient_dump(&probes).unwrap(),
        );
        assert_eq!(x.matches('?').count(), 8);
        assert!(x.lines().count() > 50);
        assert_eq!(x, y);
    }
}
