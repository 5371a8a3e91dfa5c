//! Jacobi-type relations for products of fields: the Jacobi relation on the
//! module, weak associativity, skew-symmetry, adjoint commutativity and the
//! derivative bracket.

use num_traits::Zero;

use super::{one, sector_degrees, Products};
use crate::error::{Error, Result};
use crate::fields::{compare_combinations, derive_field, probe_entries, Field, Operator, Vector};
use crate::report::CheckReport;
use crate::scalars::{
    binom_q, factorial, fmt_q, int, phase_of_halfinteger, q_int, qi, sign_pow, Cyclo, Q,
};

fn sum_until_zero<F>(mut term: F) -> Result<Vector>
where
    F: FnMut(i64) -> Result<Option<Vector>>,
{
    let mut acc = Vector::new();
    let mut i = 0;
    while let Some(v) = term(i)? {
        acc.add_scaled(&v, &one());
        i += 1;
    }
    Ok(acc)
}

/// Coefficient of `z0^A z1^B z^C` of both sides of the Jacobi relation for
/// `(a, b)` applied to basis vector `j`; returns `(lhs, term1, term2)` with
/// `lhs = term1 - term2` expected.
pub fn jacobi_coefficient(
    reg: &Products,
    a: &Field,
    b: &Field,
    big_a: &Q,
    big_b: &Q,
    big_c: &Q,
    j: usize,
) -> Result<(Vector, Vector, Vector)> {
    let cert = reg.certify(a, b)?;
    let big_k = cert
        .exponent()
        .ok_or_else(|| Error::UncertifiedPair(a.name().into(), b.name().into()))?;
    let m = a.module();
    let gr = &m.grading;
    let s = &m.info(j).sector;
    let ta = gr.act(a.sector(), s);
    let tb = gr.act(b.sector(), s);
    // LHS: Σ_i C(B+i, i)(-1)^i (a_{i-1-A} b)_{-2-B-i-C} w, finite since a_n b = 0 for n ≥ K
    let lhs = sum_until_zero(|i| {
        let n = qi(i - 1) - big_a;
        if n >= big_k {
            return Ok(None);
        }
        let coef = binom_q(&(big_b + i), i as u32) * int(sign_pow(i));
        if coef.is_zero() {
            return Ok(Some(Vector::new()));
        }
        let p = reg.product(a, b, &n)?;
        let v = p.apply(&(qi(-2 - i) - big_b - big_c), j)?;
        Ok(Some(v.scale(&Cyclo::from_rational(coef))))
    })?;
    let beta = qi(-1) - big_a;
    let term1 = sum_until_zero(|i| {
        let bi = qi(i - 1) - big_c;
        if m.vanishes_through(&tb, &b.target_degree(&bi, j)) {
            return Ok(None);
        }
        let coef = binom_q(&beta, i as u32) * int(sign_pow(i));
        if coef.is_zero() {
            return Ok(Some(Vector::new()));
        }
        let v = b.apply(&bi, j)?;
        let u = a.apply_vec(&(beta - i - 1 - big_b), &v)?;
        Ok(Some(u.scale(&Cyclo::from_rational(coef))))
    })?;
    let sign = q_int(&(beta - cert.gh)).map(sign_pow).unwrap_or(0);
    let outer = cert.c.scale(&int(sign));
    let term2 = sum_until_zero(|i| {
        let ai = qi(i - 1) - big_b;
        if m.vanishes_through(&ta, &a.target_degree(&ai, j)) {
            return Ok(None);
        }
        let coef = binom_q(&beta, i as u32) * int(sign_pow(i));
        if coef.is_zero() {
            return Ok(Some(Vector::new()));
        }
        let v = a.apply(&ai, j)?;
        let u = b.apply_vec(&(beta - i - 1 - big_c), &v)?;
        Ok(Some(u.scale(&outer.scale(&coef))))
    })?;
    Ok((lhs, term1, term2))
}

fn jacobi_on_vector(
    reg: &Products,
    a: &Field,
    b: &Field,
    big_a: &Q,
    big_b: &Q,
    big_c: &Q,
    w: &Vector,
) -> Result<(Vector, Vector, Vector)> {
    let (mut l, mut t1, mut t2) = (Vector::new(), Vector::new(), Vector::new());
    for (j, c) in w.iter() {
        let (x, y, z) = jacobi_coefficient(reg, a, b, big_a, big_b, big_c, j)?;
        l.add_scaled(&x, c);
        t1.add_scaled(&y, c);
        t2.add_scaled(&z, c);
    }
    Ok((l, t1, t2))
}

/// Cosets of `(A, B, C)` for a homogeneous vector of sector `s`:
/// `A ∈ -1-(g,h)+Z`, `B ∈ -(g,s)+Z`, `C ∈ -(h,s)+Z`.
fn jacobi_cosets(a: &Field, b: &Field, j: usize) -> (Q, Q, Q) {
    let m = a.module();
    let gr = &m.grading;
    let s = &m.info(j).sector;
    (
        qi(-1) - gr.pair(a.sector(), b.sector()),
        -gr.pair_gs(a.sector(), s),
        -gr.pair_gs(b.sector(), s),
    )
}

/// Jacobi relation for `(a, b)` on the vector `w`, monomial by monomial over
/// `A, B` in `±window` around their cosets and every `C` whose target degree
/// is retained. A `fault` factor multiplies the second term, e.g. `-1` for a
/// flipped sign of `c(g,h)` or `c^{-2}` for `c` replaced by its inverse.
pub fn check_jacobi_relation(
    reg: &Products,
    a: &Field,
    b: &Field,
    w: &Vector,
    window: i64,
    fault: Option<Cyclo>,
) -> Result<CheckReport> {
    let m = a.module();
    let Some(j0) = w.support().next() else {
        return Err(Error::WindowUnderflow("zero vector".into()));
    };
    let (a0, b0, c0) = jacobi_cosets(a, b, j0);
    let info = m.info(j0);
    let gr = &m.grading;
    let t = gr.act(&gr.add(a.sector(), b.sector()), &info.sector);
    let degs = sector_degrees(m, &t);
    let mut jobs = Vec::new();
    for ta in -window..=window {
        for tb in -window..=window {
            let (big_a, big_b) = (a0 + ta, b0 + tb);
            for d in &degs {
                // the result has degree deg w + Δa + Δb + A + B + C + 1
                let big_c = d - info.degree - a.weight() - b.weight() - big_a - big_b - 1;
                if (big_c - c0).is_integer() {
                    jobs.push((big_a, big_b, big_c));
                }
            }
        }
    }
    let name = if fault.is_some() {
        "jacobi.fault"
    } else {
        "jacobi"
    };
    let mut rep = CheckReport::new(
        format!("{name}[{},{}]", a.name(), b.name()),
        format!("A,B=±{window} C=all retained"),
    );
    let results = reg.opts.exec.map(jobs, |(x, y, z)| {
        ((x, y, z), jacobi_on_vector(reg, a, b, &x, &y, &z, w))
    });
    for ((x, y, z), r) in results {
        match r {
            Ok((l, t1, t2)) => {
                rep.checked += 1;
                let t2 = match &fault {
                    Some(f) => t2.scale(f),
                    None => t2,
                };
                if l != t1.sub(&t2) {
                    rep.fail(format!("z0^{} z1^{} z^{}", fmt_q(&x), fmt_q(&y), fmt_q(&z)));
                }
            }
            Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(rep)
}

/// Least `r` with `a_n w_j = 0` for every `n ≥ r + (g,s)`, scanning up to
/// the lower bound of the target sector. `None` when `a(z) w_j` is unknown
/// near the top.
pub fn per_vector_order(a: &Field, j: usize) -> Result<Option<i64>> {
    let m = a.module();
    let gr = &m.grading;
    let info = m.info(j);
    let gs = gr.pair_gs(a.sector(), &info.sector);
    let t = gr.act(a.sector(), &info.sector);
    let Some(lb) = m.lower_bound(&t) else {
        return Ok(None);
    };
    let top = info.degree + a.weight() - 1;
    let mut r = (top - lb - gs).floor().to_integer() + 1;
    loop {
        let n = gs + r - 1;
        match a.apply(&n, j) {
            Ok(v) if v.is_zero() => r -= 1,
            Ok(_) => return Ok(Some(r)),
            Err(e) if e.is_out_of_truncation() => return Ok(None),
            Err(e) => return Err(e),
        }
    }
}

/// Weak associativity on a homogeneous vector `w`: with `α = r + (g,s)`
/// for the largest per-vector `r` over the support of `w`, the Jacobi
/// relation at `B = -1-α` has vanishing second term and reads
/// `Σ_i C(α,i)(a_{i-1-A}b)_{α-i-1-C} w = Σ_i C(A+i,i) a_{α-1-i-A} b_{i-1-C} w`.
pub fn check_weak_associativity(
    reg: &Products,
    a: &Field,
    b: &Field,
    w: &Vector,
    window: i64,
) -> Result<CheckReport> {
    let m = a.module();
    let mut rep = CheckReport::new(
        format!("weak_associativity[{},{}]", a.name(), b.name()),
        format!("A=±{window}"),
    );
    let Some(j0) = w.support().next() else {
        return Err(Error::WindowUnderflow("zero vector".into()));
    };
    let mut r = i64::MIN;
    for j in w.support() {
        match per_vector_order(a, j)? {
            Some(rj) => r = r.max(rj),
            None => {
                rep.skipped += 1;
                rep.note(format!("w{j}: order unknown within the truncation"));
                return Ok(rep);
            }
        }
    }
    let gs = m.grading.pair_gs(a.sector(), &m.info(j0).sector);
    let alpha = gs + r;
    rep.note(format!("r = {r}"));
    let (a0, _, c0) = jacobi_cosets(a, b, j0);
    let big_b = qi(-1) - alpha;
    let info = m.info(j0);
    let t = m
        .grading
        .act(&m.grading.add(a.sector(), b.sector()), &info.sector);
    for ta in -window..=window {
        let big_a = a0 + ta;
        for d in sector_degrees(m, &t) {
            let big_c = d - info.degree - a.weight() - b.weight() - big_a - big_b - 1;
            if !(big_c - c0).is_integer() {
                continue;
            }
            match jacobi_on_vector(reg, a, b, &big_a, &big_b, &big_c, w) {
                Ok((l, t1, t2)) => {
                    rep.checked += 1;
                    if !t2.is_zero() || l != t1 {
                        rep.fail(format!("z0^{} z^{}", fmt_q(&big_a), fmt_q(&big_c)));
                    }
                }
                Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rep)
}

/// Skew-symmetry `u_n v = c(g,h) e^{πi(g,h)} Σ_r (1/r!) e^{πi(-n-r-1)} D^r(v_{n+r} u)`
/// for `n` in `±window` around `(g,h)` up to the certified exponent.
/// `conjugate_phase` conjugates the factor `e^{πi(g,h)}` (fault injection;
/// conjugating every phase at once is invisible, since the total phase is
/// real on the coset).
pub fn check_skew_symmetry(
    reg: &Products,
    u: &Field,
    v: &Field,
    window: i64,
    conjugate_phase: bool,
) -> Result<CheckReport> {
    let cuv = reg.certify(u, v)?;
    let cvu = reg.certify(v, u)?;
    let (Some(kuv), Some(kvu)) = (cuv.exponent(), cvu.exponent()) else {
        return Err(Error::UncertifiedPair(u.name().into(), v.name().into()));
    };
    let ph = phase_of_halfinteger;
    let name = if conjugate_phase {
        "skew_symmetry.fault"
    } else {
        "skew_symmetry"
    };
    let mut rep = CheckReport::new(
        format!("{name}[{},{}]", u.name(), v.name()),
        format!("n=(g,h)+[-{window},K)"),
    );
    let pre = cuv.c.mul_ref(&if conjugate_phase {
        ph(&cuv.gh).conj()
    } else {
        ph(&cuv.gh)
    });
    let top = (kuv - cuv.gh).to_integer();
    for t in -window..top.max(-window + 1) {
        let n = cuv.gh + t;
        let lhs = reg.product(u, v, &n)?;
        let mut rhs = Vec::new();
        let mut r = 0u32;
        while n + i64::from(r) < kvu {
            let mut f = reg.product(v, u, &(n + i64::from(r)))?;
            for _ in 0..r {
                f = derive_field(&f);
            }
            let coef = pre
                .mul_ref(&ph(&(-n - i64::from(r) - 1)))
                .scale(&factorial(r).recip());
            rhs.push((coef, f));
            r += 1;
        }
        let probes = reg.probes_for(&lhs);
        let sub = if rhs.is_empty() {
            let mut s = CheckReport::new("skew", "");
            for e in probe_entries(&lhs, &probes)? {
                match e {
                    Some(x) => {
                        s.checked += 1;
                        if !x.is_zero() {
                            s.fail("nonzero left side with empty right side");
                        }
                    }
                    None => s.skipped += 1,
                }
            }
            s
        } else {
            compare_combinations(&format!("n={}", fmt_q(&n)), &[(one(), lhs)], &rhs, &probes)?
        };
        rep.absorb(&sub);
    }
    Ok(rep)
}

/// Adjoint commutativity
/// `Σ_i C(K,i)(-1)^i a_{K-i-1-A}(b_{i-1-B}c) = (-1)^r c(g1,g2) Σ_i C(K,i)(-1)^i b_{K-i-1-B}(a_{i-1-A}c)`
/// with `K = r + (g1,g2)`, over `A, B` in `[0, window]` above the lowest
/// coset values where the inner products `b_{-1-B}c` and `a_{-1-A}c` can be
/// nonzero.
pub fn adjoint_commutativity_at(
    reg: &Products,
    a: &Field,
    b: &Field,
    c: &Field,
    r: i64,
    window: i64,
) -> Result<CheckReport> {
    let gr = &a.module().grading;
    let gab = gr.pair(a.sector(), b.sector());
    let big_k = gab + r;
    let cab = gr.c(a.sector(), b.sector());
    let g_bc = gr.add(b.sector(), c.sector());
    let g_ac = gr.add(a.sector(), c.sector());
    let mut rep = CheckReport::new(
        format!(
            "adjoint_commutativity[{},{},{}]",
            a.name(),
            b.name(),
            c.name()
        ),
        format!("r={r} A,B=+[0,{window}]"),
    );
    let kbc = reg
        .certify(b, c)?
        .exponent()
        .ok_or_else(|| Error::UncertifiedPair(b.name().into(), c.name().into()))?;
    let kac = reg
        .certify(a, c)?
        .exponent()
        .ok_or_else(|| Error::UncertifiedPair(a.name().into(), c.name().into()))?;
    // A ∈ K - (g1, g2+g3) + Z with -1-A < K_ac, B ∈ -(g2, g3) + Z with -1-B < K_bc
    let lowest = |coset: Q, k: Q| coset + (qi(-1) - k - coset).floor() + 1;
    let a0 = lowest(big_k - gr.pair(a.sector(), &g_bc), kac);
    let b0 = lowest(-gr.pair(b.sector(), c.sector()), kbc);
    let outer = cab.scale(&int(sign_pow(r)));
    for ta in 0..=window {
        for tb in 0..=window {
            let (big_a, big_b) = (a0 + ta, b0 + tb);
            let point = || -> Result<CheckReport> {
                let mut lhs = Vec::new();
                let mut i = 0i64;
                while qi(i - 1) - big_b < kbc {
                    let coef = binom_q(&big_k, i as u32) * int(sign_pow(i));
                    if !coef.is_zero() {
                        let inner = reg.product(b, c, &(qi(i - 1) - big_b))?;
                        let f = reg.product(a, &inner, &(big_k - i - 1 - big_a))?;
                        lhs.push((Cyclo::from_rational(coef), f));
                    }
                    i += 1;
                }
                let mut rhs = Vec::new();
                let mut i = 0i64;
                while qi(i - 1) - big_a < kac {
                    let coef = binom_q(&big_k, i as u32) * int(sign_pow(i));
                    if !coef.is_zero() {
                        let inner = reg.product(a, c, &(qi(i - 1) - big_a))?;
                        let f = reg.product(b, &inner, &(big_k - i - 1 - big_b))?;
                        rhs.push((outer.scale(&coef), f));
                    }
                    i += 1;
                }
                let sector = gr.add(a.sector(), &g_bc);
                debug_assert_eq!(sector, gr.add(b.sector(), &g_ac));
                let probes = crate::fields::sector_probes(a.module(), &sector, &reg.opts.sources);
                let id = format!("x1^{} x2^{}", fmt_q(&big_a), fmt_q(&big_b));
                compare_combinations(&id, &lhs, &rhs, &probes)
            };
            match point() {
                Ok(sub) => rep.absorb(&sub),
                // a product too heavy to certify inside the truncation
                Err(Error::WindowUnderflow(_)) => rep.skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rep)
}

/// Adjoint commutativity at the certified order of `(a, b)`, plus the
/// boundary probe one order lower (possibly below zero for the fixed lift),
/// whose outcome is recorded in a note.
pub fn check_adjoint_commutativity(
    reg: &Products,
    a: &Field,
    b: &Field,
    c: &Field,
    window: i64,
) -> Result<CheckReport> {
    let cert = reg.certify(a, b)?;
    let Some(k) = cert.k else {
        return Err(Error::UncertifiedPair(a.name().into(), b.name().into()));
    };
    let k = i64::from(k);
    let mut rep = adjoint_commutativity_at(reg, a, b, c, k, window)?;
    let below = adjoint_commutativity_at(reg, a, b, c, k - 1, window)?;
    rep.note(format!(
        "boundary r={}: {} ({} checked)",
        k - 1,
        if below.passed { "passes" } else { "fails" },
        below.checked
    ));
    Ok(rep)
}

fn apply_operator(d: &Operator, v: &Vector) -> Result<Vector> {
    let mut out = Vector::new();
    for (j, c) in v.iter() {
        out.add_scaled(&d(j)?, c);
    }
    Ok(out)
}

/// `[D_W, f_n] w = -n f_{n-1} w` on the probes of `f`; unknown entries
/// are skipped.
fn d_bracket_one(
    d: &Operator,
    f: &Field,
    sources: &[usize],
    window: i64,
    rep: &mut CheckReport,
) -> Result<()> {
    let m = f.module();
    for &j in sources {
        let gs = m.grading.pair_gs(f.sector(), &m.info(j).sector);
        for t in -window..=window {
            let n = gs + t;
            let lhs = (|| -> Result<Vector> {
                let x = apply_operator(d, &f.apply(&n, j)?)?;
                let y = f.apply_vec(&n, &d(j)?)?;
                Ok(x.sub(&y))
            })();
            let rhs = f
                .apply(&(n - 1), j)
                .map(|v| v.scale(&Cyclo::from_rational(crate::scalars::q_to_rat(&-n))));
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    rep.checked += 1;
                    if l != r {
                        rep.fail(format!("{}: mode {} on basis {j}", f.name(), fmt_q(&n)));
                    }
                }
                (Err(e), _) | (_, Err(e)) if e.is_out_of_truncation() => rep.skipped += 1,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }
    Ok(())
}

/// `[D_W, Y(v,z)] = d/dz Y(v,z)`: first on each generator (a failure is a
/// `HypothesisViolated` naming it), then on every element.
pub fn check_d_bracket(
    d: &Operator,
    generators: &[Field],
    elements: &[Field],
    sources: &[usize],
    window: i64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("d_bracket", format!("n=±{window}"));
    for g in generators {
        let mut sub = CheckReport::new(g.name(), "");
        d_bracket_one(d, g, sources, window, &mut sub)?;
        if !sub.passed {
            return Err(Error::HypothesisViolated(format!(
                "[D_W, {}(z)] differs from its derivative: {}",
                g.name(),
                sub.counterexample.unwrap_or_default()
            )));
        }
        rep.checked += sub.checked;
        rep.skipped += sub.skipped;
    }
    for e in elements {
        let mut sub = CheckReport::new(e.name(), "");
        d_bracket_one(d, e, sources, window, &mut sub)?;
        rep.absorb(&sub);
    }
    Ok(rep)
}
