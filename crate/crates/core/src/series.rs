//! Multivariable formal series with rational exponents: binomial
//! expansions, delta kernels, residues, derivatives and windowed equality.
//!
//! Series are sparse maps from exponent vectors to coefficients. Every
//! materialised distribution is a truncation; equality is only asserted on
//! an explicit box of exponents, and [`check_delta_identities`] validates
//! its box by recomputing at a larger truncation and demanding agreement.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::SparseVec;
use crate::report::CheckReport;
use crate::scalars::{binom_q, fmt_q, phase_of_halfinteger, q, q_int, q_to_rat, qi, Cyclo, Q};

/// Coefficient space of a series.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn scale(&self, c: &Cyclo) -> Self;
    fn render(&self) -> String;
}

impl Coefficient for Cyclo {
    fn zero() -> Self {
        Cyclo::zero()
    }
    fn is_zero(&self) -> bool {
        Cyclo::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }
    fn scale(&self, c: &Cyclo) -> Self {
        self.mul_ref(c)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Coefficient for SparseVec<Cyclo> {
    fn zero() -> Self {
        SparseVec::new()
    }
    fn is_zero(&self) -> bool {
        SparseVec::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        self.add_scaled(other, &Cyclo::one());
    }
    fn scale(&self, c: &Cyclo) -> Self {
        SparseVec::scale(self, c)
    }
    fn render(&self) -> String {
        let parts: Vec<String> = self.iter().map(|(i, c)| format!("{i}:{c}")).collect();
        format!("[{}]", parts.join(", "))
    }
}

pub type Exps = Vec<Q>;

/// Inclusive per-variable exponent bounds; `None` is unbounded.
pub type Window = Vec<Option<(Q, Q)>>;

pub fn in_window(e: &[Q], w: &Window) -> bool {
    e.iter()
        .zip(w)
        .all(|(x, b)| b.as_ref().map_or(true, |(lo, hi)| x >= lo && x <= hi))
}

/// Symmetric box `[-w, w]` in every variable.
pub fn box_window(nvars: usize, w: i64) -> Window {
    vec![Some((qi(-w), qi(w))); nvars]
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiSeries<C> {
    nvars: usize,
    terms: BTreeMap<Exps, C>,
    /// Declared region in which the truncation is exact.
    pub window: Window,
    /// Variables carrying two-sided (distribution) support.
    pub distribution: Vec<bool>,
}

impl<C: Coefficient> MultiSeries<C> {
    pub fn new(nvars: usize) -> Self {
        MultiSeries {
            nvars,
            terms: BTreeMap::new(),
            window: vec![None; nvars],
            distribution: vec![false; nvars],
        }
    }

    pub fn monomial(nvars: usize, exps: Exps, c: C) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut s = Self::new(nvars);
        s.add_term(exps, &c);
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &C)> {
        self.terms.iter()
    }

    pub fn get(&self, exps: &[Q]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, exps: Exps, c: &C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), c);
        }
        r.window = intersect(&self.window, &other.window);
        r.distribution = or_flags(&self.distribution, &other.distribution);
        r
    }

    pub fn scale(&self, c: &Cyclo) -> Self {
        let mut r = self.clone();
        r.terms = self
            .terms
            .iter()
            .map(|(e, x)| (e.clone(), x.scale(c)))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Cyclo::from_int(-1)))
    }

    /// Multiplies by the monomial with exponent vector `shift`.
    pub fn shift(&self, shift: &[Q]) -> Self {
        let mut r = self.clone();
        r.terms = self
            .terms
            .iter()
            .map(|(e, c)| (add_exps(e, shift), c.clone()))
            .collect();
        r.window = self
            .window
            .iter()
            .zip(shift)
            .map(|(w, s)| w.as_ref().map(|(lo, hi)| (lo + s, hi + s)))
            .collect();
        r
    }

    /// Keeps only terms inside `w`.
    pub fn restrict(&self, w: &Window) -> Self {
        let mut r = self.clone();
        r.terms.retain(|e, _| in_window(e, w));
        r.window = intersect(&self.window, w);
        r
    }

    /// Term-wise derivative in `var`.
    pub fn derive(&self, var: usize) -> Self {
        let mut r = Self::new(self.nvars);
        r.window = self.window.clone();
        r.distribution = self.distribution.clone();
        for (e, c) in &self.terms {
            let p = e[var];
            if p.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] = p - 1;
            r.add_term(e2, &c.scale(&Cyclo::from_rational(q_to_rat(&p))));
        }
        if let Some((lo, hi)) = &self.window[var] {
            r.window[var] = Some((lo - 1, hi - 1));
        }
        r
    }

    /// Coefficient of `var^{-1}`, returned with that variable's exponent set to 0.
    pub fn residue(&self, var: usize) -> Self {
        let mut r = Self::new(self.nvars);
        r.window = self.window.clone();
        r.window[var] = None;
        r.distribution = self.distribution.clone();
        r.distribution[var] = false;
        for (e, c) in &self.terms {
            if e[var] == qi(-1) {
                let mut e2 = e.clone();
                e2[var] = Q::zero();
                r.add_term(e2, c);
            }
        }
        r
    }

    /// The substitution `var -> e^{πi} var`: the coefficient of `var^q` is
    /// multiplied by `e^{πi q}`.
    pub fn substitute_phase(&self, var: usize) -> Self {
        let mut r = self.clone();
        r.terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), c.scale(&phase_of_halfinteger(&e[var]))))
            .collect();
        r
    }

    /// Sorted one-line-per-monomial text dump.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .map(|(i, x)| format!("z{i}^{{{}}}", fmt_q(x)))
                    .collect();
                format!("{} : {}", mono.join(" "), c.render())
            })
            .collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

fn add_exps(a: &[Q], b: &[Q]) -> Exps {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn intersect(a: &Window, b: &Window) -> Window {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (None, y) => y.clone(),
            (x, None) => x.clone(),
            (Some((l1, h1)), Some((l2, h2))) => Some((*l1.max(l2), *h1.min(h2))),
        })
        .collect()
}

fn or_flags(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

/// Product of a scalar series with a series over any coefficient space,
/// keeping only output terms inside `out` when given.
pub fn series_mul<C: Coefficient>(
    a: &MultiSeries<Cyclo>,
    b: &MultiSeries<C>,
    out: Option<&Window>,
) -> Result<MultiSeries<C>> {
    assert_eq!(a.nvars, b.nvars);
    if let Some(v) = (0..a.nvars).find(|&v| a.distribution[v] && b.distribution[v]) {
        return Err(Error::IllFormedProduct(format!(
            "both factors are two-sided in z{v}"
        )));
    }
    let mut r = MultiSeries::new(a.nvars);
    r.distribution = or_flags(&a.distribution, &b.distribution);
    r.window = intersect(&a.window, &b.window);
    if let Some(w) = out {
        r.window = intersect(&r.window, w);
    }
    for (ea, ca) in &a.terms {
        for (eb, cb) in &b.terms {
            let e = add_exps(ea, eb);
            if let Some(w) = out {
                if !in_window(&e, w) {
                    continue;
                }
            }
            r.add_term(e, &cb.scale(ca));
        }
    }
    Ok(r)
}

/// `(s_l z_lead + s_s z_sub)^alpha` expanded in nonnegative powers of
/// `z_sub`, through `z_sub^cutoff`.
pub fn binom_expand(
    nvars: usize,
    alpha: Q,
    lead: (usize, i64),
    sub: (usize, i64),
    cutoff: u32,
    fault: Option<u32>,
) -> Result<MultiSeries<Cyclo>> {
    let (lv, ls) = lead;
    let (sv, ss) = sub;
    let lead_sign = if ls >= 0 {
        Cyclo::one()
    } else {
        let k = q_int(&alpha).ok_or_else(|| {
            Error::IllFormedProduct(format!(
                "non-integral power {} of a negated leading variable",
                fmt_q(&alpha)
            ))
        })?;
        Cyclo::from_int(crate::scalars::sign_pow(k))
    };
    let mut s = MultiSeries::new(nvars);
    for i in 0..=cutoff {
        let mut c = binom_q(&alpha, i);
        if fault == Some(i) {
            c += crate::scalars::int(1);
        }
        if c.is_zero() {
            continue;
        }
        // (s_l z_l)^{α-i} (s_s z_s)^i with s_l^{α-i} = s_l^α s_l^{-i}.
        let sgn = crate::scalars::sign_pow(
            if ls < 0 { i as i64 } else { 0 } + if ss < 0 { i as i64 } else { 0 },
        );
        let mut e = vec![Q::zero(); nvars];
        e[lv] = alpha - i as i64;
        e[sv] = qi(i as i64);
        s.add_term(
            e,
            &Cyclo::from_rational(c)
                .mul_ref(&lead_sign)
                .scale(&num_rational::BigRational::from_integer(sgn.into())),
        );
    }
    s.window[sv] = Some((Q::zero(), qi(cutoff as i64)));
    Ok(s)
}

/// `z_den^{offset} Σ_n den_sign^n (lead/den)^{n+α}`-type kernel: the series
/// `z_den^{offset} ((s_l z_l + s_s z_s)/z_den)^α δ((s_l z_l + s_s z_s)/(den_sign z_den))`.
#[derive(Clone, Debug)]
pub struct DeltaKernel {
    pub den: usize,
    pub den_sign: i64,
    pub lead: (usize, i64),
    pub sub: Option<(usize, i64)>,
    pub alpha: Q,
    pub offset: i64,
}

impl DeltaKernel {
    /// Standard `z_den^{-1} ((z_l + s z_s)/z_den)^α δ((z_l + s z_s)/z_den)`.
    pub fn standard(den: usize, lead: usize, sub: usize, sub_sign: i64, alpha: Q) -> Self {
        DeltaKernel {
            den,
            den_sign: 1,
            lead: (lead, 1),
            sub: Some((sub, sub_sign)),
            alpha,
            offset: -1,
        }
    }

    /// Materialises the terms with summation index `n ∈ [n_lo, n_hi]` and
    /// binomial order at most `cutoff`. `fault` perturbs one coefficient.
    pub fn materialize(
        &self,
        nvars: usize,
        n_lo: i64,
        n_hi: i64,
        cutoff: u32,
        fault: Option<(i64, u32)>,
    ) -> Result<MultiSeries<Cyclo>> {
        let mut s = MultiSeries::new(nvars);
        for n in n_lo..=n_hi {
            let beta = self.alpha + n;
            let sign = Cyclo::from_int(crate::scalars::sign_pow(if self.den_sign < 0 {
                n
            } else {
                0
            }));
            let part = match self.sub {
                Some(sub) => {
                    let f = fault.and_then(|(fn_, fi)| (fn_ == n).then_some(fi));
                    binom_expand(nvars, beta, self.lead, sub, cutoff, f)?
                }
                None => {
                    let mut e = vec![Q::zero(); nvars];
                    e[self.lead.0] = beta;
                    let c = if self.lead.1 < 0 {
                        let k = q_int(&beta).ok_or_else(|| {
                            Error::IllFormedProduct("non-integral negated power".into())
                        })?;
                        Cyclo::from_int(crate::scalars::sign_pow(k))
                    } else {
                        Cyclo::one()
                    };
                    MultiSeries::monomial(nvars, e, c)
                }
            };
            let mut shift = vec![Q::zero(); nvars];
            shift[self.den] = qi(self.offset) - beta;
            for (e, c) in part.shift(&shift).terms() {
                s.add_term(e.clone(), &c.mul_ref(&sign));
            }
        }
        let lo = qi(self.offset) - self.alpha - n_hi;
        let hi = qi(self.offset) - self.alpha - n_lo;
        s.window[self.den] = Some((lo, hi));
        if let Some((sv, _)) = self.sub {
            s.window[sv] = Some((Q::zero(), qi(cutoff as i64)));
        }
        s.distribution[self.den] = true;
        Ok(s)
    }
}

/// First monomial in `w` where `a` and `b` differ, and the number compared.
pub fn compare_in_window<C: Coefficient>(
    a: &MultiSeries<C>,
    b: &MultiSeries<C>,
    w: &Window,
) -> (usize, Option<(Exps, C, C)>) {
    let mut keys: Vec<&Exps> = a
        .terms
        .keys()
        .chain(b.terms.keys())
        .filter(|e| in_window(e, w))
        .collect();
    keys.sort();
    keys.dedup();
    let n = keys.len();
    for e in keys {
        let x = a.get(e);
        let y = b.get(e);
        if x != y {
            return (n, Some((e.clone(), x, y)));
        }
    }
    (n, None)
}

pub fn fmt_monomial(e: &[Q]) -> String {
    e.iter()
        .enumerate()
        .map(|(i, x)| format!("z{i}^{{{}}}", fmt_q(x)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Computes a pair of series at truncation `t`, then at `t + margin`, and
/// compares: the box must be stable under the larger truncation, and the
/// two sides must agree on it.
fn stable_compare<F>(id: &str, w: &Window, t: i64, margin: i64, build: F) -> Result<CheckReport>
where
    F: Fn(i64) -> Result<(MultiSeries<Cyclo>, MultiSeries<Cyclo>)>,
{
    let start = std::time::Instant::now();
    let (l1, r1) = build(t)?;
    let (l2, r2) = build(t + margin)?;
    for (x, y, side) in [(&l1, &l2, "lhs"), (&r1, &r2, "rhs")] {
        if let (_, Some((e, _, _))) = compare_in_window(x, y, w) {
            return Err(Error::WindowUnderflow(format!(
                "{id}: {side} coefficient at {} not stable at truncation {t}",
                fmt_monomial(&e)
            )));
        }
    }
    let mut rep = CheckReport::new(id, window_label(w));
    let (n, bad) = compare_in_window(&l1, &r1, w);
    rep.checked = n;
    if let Some((e, x, y)) = bad {
        rep.fail(format!("{} lhs={} rhs={}", fmt_monomial(&e), x, y));
    }
    Ok(rep.timed(start))
}

pub fn window_label(w: &Window) -> String {
    w.iter()
        .enumerate()
        .map(|(i, b)| match b {
            Some((lo, hi)) => format!("z{i}:[{},{}]", fmt_q(lo), fmt_q(hi)),
            None => format!("z{i}:*"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Which single coefficient to corrupt in [`check_delta_identities`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaFault {
    None,
    /// Adds 1 to the binomial coefficient `C(α+n, i)` at `n = 0, i = 1` of
    /// every left-hand kernel.
    Binomial,
}

const Z0: usize = 0;
const Z1: usize = 1;
const Z2: usize = 2;

/// Polynomial `p(z1, z2)` of total degree at most 4 used by the three-term identity.
fn test_polynomial() -> Vec<((i64, i64), i64)> {
    vec![
        ((0, 0), 2),
        ((1, 0), -1),
        ((0, 1), 3),
        ((2, 1), 1),
        ((1, 3), -2),
        ((0, 4), 1),
    ]
}

fn poly_series(nvars: usize, p: &[((i64, i64), i64)]) -> MultiSeries<Cyclo> {
    let mut s = MultiSeries::new(nvars);
    for ((a, b), c) in p {
        let mut e = vec![Q::zero(); nvars];
        e[Z1] = qi(*a);
        e[Z2] = qi(*b);
        s.add_term(e, &Cyclo::from_int(*c));
    }
    s
}

fn mono(nvars: usize, pairs: &[(usize, Q)]) -> MultiSeries<Cyclo> {
    let mut e = vec![Q::zero(); nvars];
    for (v, x) in pairs {
        e[*v] = *x;
    }
    MultiSeries::monomial(nvars, e, Cyclo::one())
}

/// `(z_a + z_b)^m` for `m ≥ 0`.
fn poly_power(nvars: usize, a: usize, b: usize, m: i64) -> MultiSeries<Cyclo> {
    binom_expand(nvars, qi(m), (a, 1), (b, 1), m as u32, None).expect("integral power")
}

/// Verifies the delta-function identities for exponent `alpha` on the box
/// `[-w, w]^3`, returning one report per identity family.
pub fn check_delta_identities(alpha: Q, w: i64, fault: DeltaFault) -> Result<Vec<CheckReport>> {
    if w < 1 {
        return Err(Error::WindowUnderflow(format!("window half-width {w} < 1")));
    }
    let nv = 3;
    let bx = box_window(nv, w);
    let t0 = w + 8;
    let margin = 4;
    let fault_at = (fault == DeltaFault::Binomial).then_some((0i64, 1u32));
    let mut reports = Vec::new();
    let a = alpha;

    // z0^{-1}((z1-z2)/z0)^α δ((z1-z2)/z0) = z1^{-1}((z0+z2)/z1)^{-α} δ((z0+z2)/z1)
    reports.push(stable_compare(
        &format!("delta.alpha[{}]", fmt_q(&a)),
        &bx,
        t0,
        margin,
        |t| {
            let lhs = DeltaKernel::standard(Z0, Z1, Z2, -1, a)
                .materialize(nv, -t, t, t as u32, fault_at)?;
            let rhs =
                DeltaKernel::standard(Z1, Z0, Z2, 1, -a).materialize(nv, -t, t, t as u32, None)?;
            Ok((lhs, rhs))
        },
    )?);

    // (z1-z2)^α z0^{-1}δ((z1-z2)/z0) = z1^{-1} z0^α ((z0+z2)/z1)^{-α} δ((z0+z2)/z1)
    reports.push(stable_compare(
        &format!("delta.alpha_power[{}]", fmt_q(&a)),
        &bx,
        t0,
        margin,
        |t| {
            let pw = binom_expand(nv, a, (Z1, 1), (Z2, -1), t as u32, fault_at.map(|x| x.1))?;
            let k = DeltaKernel::standard(Z0, Z1, Z2, -1, qi(0)).materialize(
                nv,
                -t - 2,
                t + 2,
                t as u32,
                None,
            )?;
            let lhs = series_mul(&pw, &k, Some(&bx))?;
            let rhs =
                DeltaKernel::standard(Z1, Z0, Z2, 1, -a).materialize(nv, -t, t, t as u32, None)?;
            let rhs = rhs.shift(&[a, Q::zero(), Q::zero()]).restrict(&bx);
            Ok((lhs, rhs))
        },
    )?);

    // Three-term identity with z1^r z2^s (z1-z2)^k p(z1,z2); k, r, s are
    // tied to alpha's numerator so each alpha exercises different data.
    let seed = *a.numer() + 2 * *a.denom();
    let params = [
        (1 + seed.rem_euclid(2), -1, seed.rem_euclid(3) - 1),
        (-2, 1, 2),
        (0, 0, -2),
    ];
    let p = test_polynomial();
    let mut three = CheckReport::new(
        format!("delta.three_term[{}]", fmt_q(&a)),
        window_label(&bx),
    );
    for (r, s, k) in params {
        let sub = stable_compare("three_term", &bx, w + 6, margin, |t| {
            let tt = t as u32;
            let d1 = DeltaKernel::standard(Z0, Z1, Z2, -1, qi(0))
                .materialize(nv, -t, t, tt, fault_at)?;
            // z0^{-1} δ((z2 - z1)/(-z0))
            let d2 = DeltaKernel {
                den: Z0,
                den_sign: -1,
                lead: (Z2, 1),
                sub: Some((Z1, -1)),
                alpha: qi(0),
                offset: -1,
            }
            .materialize(nv, -t, t, tt, None)?;
            let pre = mono(nv, &[(Z1, qi(r)), (Z2, qi(s))]);
            let pk1 = binom_expand(nv, qi(k), (Z1, 1), (Z2, -1), tt, None)?;
            let pk2 = binom_expand(nv, qi(k), (Z2, -1), (Z1, 1), tt, None)?;
            let ps = poly_series(nv, &p);
            let big = Some(&bx);
            let rest1 = series_mul(&series_mul(&pre, &pk1, None)?, &ps, None)?;
            let rest2 = series_mul(&series_mul(&pre, &pk2, None)?, &ps, None)?;
            let lhs = series_mul(&rest1, &d1, big)?.sub(&series_mul(&rest2, &d2, big)?);
            // z2^{-1} δ((z1 - z0)/z2) (z2+z0)^r z2^s z0^k p(z2+z0, z2)
            let d3 =
                DeltaKernel::standard(Z2, Z1, Z0, -1, qi(0)).materialize(nv, -t, t, tt, None)?;
            let pr = binom_expand(nv, qi(r), (Z2, 1), (Z0, 1), tt, None)?;
            let mut psub = MultiSeries::new(nv);
            for ((i, j), c) in &p {
                let term = poly_power(nv, Z2, Z0, *i).shift(&[Q::zero(), Q::zero(), qi(*j)]);
                psub = psub.add(&term.scale(&Cyclo::from_int(*c)));
            }
            let m = mono(nv, &[(Z2, qi(s)), (Z0, qi(k))]);
            let rest = series_mul(&series_mul(&pr, &m, None)?, &psub, None)?;
            let rhs = series_mul(&rest, &d3, big)?;
            Ok((lhs.restrict(&bx), rhs.restrict(&bx)))
        })?;
        three.note(format!("r={r} s={s} k={k}: {} monomials", sub.checked));
        three.absorb(&sub);
    }
    reports.push(three);

    // Special case r = s = k = 0, p = 1.
    reports.push(stable_compare(
        "delta.three_term_special",
        &bx,
        t0,
        margin,
        |t| {
            let tt = t as u32;
            let d1 = DeltaKernel::standard(Z0, Z1, Z2, -1, qi(0))
                .materialize(nv, -t, t, tt, fault_at)?;
            let d2 = DeltaKernel {
                den: Z0,
                den_sign: -1,
                lead: (Z2, 1),
                sub: Some((Z1, -1)),
                alpha: qi(0),
                offset: -1,
            }
            .materialize(nv, -t, t, tt, None)?;
            let d3 =
                DeltaKernel::standard(Z2, Z1, Z0, -1, qi(0)).materialize(nv, -t, t, tt, None)?;
            Ok((d1.sub(&d2).restrict(&bx), d3.restrict(&bx)))
        },
    )?);

    // f(z)δ(z) = f(1)δ(z) for f = 2z^3 - z^{-1}, in one variable.
    {
        let w1 = vec![Some((qi(-w), qi(w)))];
        reports.push(stable_compare(
            "delta.substitution",
            &w1,
            t0,
            margin,
            |t| {
                let mut delta = MultiSeries::new(1);
                for n in -t..=t {
                    delta.add_term(vec![qi(n)], &Cyclo::one());
                }
                delta.window = vec![Some((qi(-t), qi(t)))];
                let mut fz = MultiSeries::new(1);
                fz.add_term(vec![qi(3)], &Cyclo::from_int(2));
                fz.add_term(vec![qi(-1)], &Cyclo::from_int(-1));
                let lhs = series_mul(&fz, &delta, Some(&w1))?;
                let f1 = Cyclo::from_int(2 - 1);
                Ok((lhs, delta.scale(&f1).restrict(&w1)))
            },
        )?);
    }

    // ∂/∂z1 = -∂/∂z0 on ((z - z1)/z0)^α z0^{-1} δ((z - z1)/(-z0)) and on
    // ((z1 - z)/z0)^α z0^{-1} δ((z1 - z)/z0), with z = z2.
    let mut transfer = CheckReport::new(
        format!("delta.derivative_transfer[{}]", fmt_q(&a)),
        window_label(&bx),
    );
    for (lead, sub, den_sign) in [(Z2, Z1, -1), (Z1, Z2, 1)] {
        let sub_rep = stable_compare("derivative_transfer", &bx, t0, margin, |t| {
            let k = DeltaKernel {
                den: Z0,
                den_sign,
                lead: (lead, 1),
                sub: Some((sub, -1)),
                alpha: a,
                offset: -1,
            }
            .materialize(nv, -t, t, t as u32, fault_at)?;
            Ok((
                k.derive(Z1).restrict(&bx),
                k.derive(Z0).scale(&Cyclo::from_int(-1)).restrict(&bx),
            ))
        })?;
        transfer.absorb(&sub_rep);
    }
    reports.push(transfer);

    // (z1-z2)^α (z1-z2)^β = (z1-z2)^{α+β}
    let mut add = CheckReport::new(
        format!("binom.additivity[{}]", fmt_q(&a)),
        window_label(&bx),
    );
    for b in [q(1, 2), q(-1, 3), qi(2), qi(0)] {
        let sub = stable_compare("additivity", &bx, t0, margin, |t| {
            let tt = t as u32;
            let x = binom_expand(nv, a, (Z1, 1), (Z2, -1), tt, fault_at.map(|x| x.1))?;
            let y = binom_expand(nv, b, (Z1, 1), (Z2, -1), tt, None)?;
            let xy = binom_expand(nv, a + b, (Z1, 1), (Z2, -1), tt, None)?;
            Ok((series_mul(&x, &y, Some(&bx))?, xy.restrict(&bx)))
        })?;
        add.absorb(&sub);
    }
    reports.push(add);

    // Res_{z0} ∂_{z0} = 0 on a kernel whose z0 support lies inside the window.
    {
        let mut rep = CheckReport::new(
            format!("residue.derivative[{}]", fmt_q(&a)),
            window_label(&bx),
        );
        let k =
            DeltaKernel::standard(Z0, Z1, Z2, -1, qi(0)).materialize(nv, -w, w, w as u32, None)?;
        let r = k.derive(Z0).residue(Z0);
        rep.checked = k.len();
        if let Some((e, c)) = r.terms().next() {
            rep.fail(format!("{} : {}", fmt_monomial(e), c));
        }
        reports.push(rep);
    }
    Ok(reports)
}

/// `(z1 - z2)^m (∂/∂z2)^n z2^{-1} δ(z1/z2)` restricted to `[-w, w]^2`,
/// with the delta truncated at `|index| ≤ t`.
pub fn vanishing_product(m: i64, n: u32, w: i64, t: i64) -> Result<MultiSeries<Cyclo>> {
    let nv = 2;
    let d = DeltaKernel {
        den: 1,
        den_sign: 1,
        lead: (0, 1),
        sub: None,
        alpha: qi(0),
        offset: -1,
    }
    .materialize(nv, -t, t, 0, None)?;
    let mut dd = d;
    for _ in 0..n {
        dd = dd.derive(1);
    }
    let p = binom_expand(nv, qi(m), (0, 1), (1, -1), m.max(0) as u32, None)?;
    let bx = box_window(nv, w);
    series_mul(&p, &dd, Some(&bx))
}

/// `(z1-z2)^m ∂_{z2}^n z2^{-1}δ(z1/z2) = 0` for `m > n ≥ 0`, and nonzero for
/// `m ≤ n`, with `m, n ≤ max`.
pub fn check_vanishing_identity(max: i64, w: i64) -> Result<CheckReport> {
    // smaller boxes miss every nonzero coefficient of the m ≤ n cases
    if w <= max {
        return Err(Error::WindowUnderflow(format!("box half-width {w} must exceed {max}")));
    }
    let mut rep = CheckReport::new("delta.vanishing", format!("m,n<={max} box=[-{w},{w}]^2"));
    let t = w + max + 4;
    for m in 0..=max {
        for n in 0..=max {
            let s = vanishing_product(m, n as u32, w, t)?;
            rep.checked += 1;
            let vanishes = s.is_empty();
            if m > n && !vanishes {
                let (e, c) = s.terms().next().unwrap();
                rep.fail(format!("m={m} n={n}: {} : {}", fmt_monomial(e), c));
            }
            if m <= n && vanishes {
                rep.fail(format!("m={m} n={n}: unexpectedly zero"));
            }
        }
    }
    Ok(rep)
}

pub fn one_series(nvars: usize) -> MultiSeries<Cyclo> {
    MultiSeries::monomial(nvars, vec![Q::zero(); nvars], Cyclo::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{binomial, int, rat, Rational};

    fn c(n: i64, d: i64) -> Cyclo {
        Cyclo::from_rational(rat(n, d))
    }

    #[test]
    fn binomial_examples() {
        let s = binom_expand(3, qi(1), (1, 1), (2, -1), 5, None).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(&[qi(0), qi(1), qi(0)]), c(1, 1));
        assert_eq!(s.get(&[qi(0), qi(0), qi(1)]), c(-1, 1));
        let s = binom_expand(3, qi(0), (1, 1), (2, -1), 5, None).unwrap();
        assert_eq!(s, {
            let mut o = one_series(3);
            o.window = s.window.clone();
            o
        });
        let s = binom_expand(3, q(1, 2), (1, 1), (2, -1), 2, None).unwrap();
        assert_eq!(s.get(&[qi(0), q(1, 2), qi(0)]), c(1, 1));
        assert_eq!(s.get(&[qi(0), q(-1, 2), qi(1)]), c(-1, 2));
        assert_eq!(s.get(&[qi(0), q(-3, 2), qi(2)]), c(-1, 8));
    }

    #[test]
    fn delta_expansion_coefficients() {
        // Coefficient of z0^{-n} z1^{n-i} z2^i in δ((z1-z2)/z0) is C(n,i)(-1)^i.
        let k = DeltaKernel {
            den: 0,
            den_sign: 1,
            lead: (1, 1),
            sub: Some((2, -1)),
            alpha: qi(0),
            offset: 0,
        };
        let s = k.materialize(3, -4, 4, 6, None).unwrap();
        for n in -3i64..=3 {
            for i in 0..=3u32 {
                let want = binomial(&int(n), i)
                    * Rational::from_integer(crate::scalars::sign_pow(i as i64).into());
                assert_eq!(
                    s.get(&[qi(-n), qi(n - i as i64), qi(i as i64)]),
                    Cyclo::from_rational(want)
                );
            }
        }
        // Residue in z1 after multiplying by z1^{i-n}: picks n - i + i - n = 0 ... exponent -1 terms.
        let shifted = s.shift(&[qi(0), qi(-1), qi(0)]);
        let r = shifted.residue(1);
        assert_eq!(r.get(&[qi(-2), qi(0), qi(2)]), c(1, 1));
        assert_eq!(r.get(&[qi(-3), qi(0), qi(3)]), c(-1, 1));
    }

    #[test]
    fn delta_window_sum() {
        // δ(z) with n ∈ [-3, 3] is Σ z^n; the kernel here has den = lead,
        // so every term collapses onto z^0 with z^n tracked by the offset.
        let d = DeltaKernel {
            den: 1,
            den_sign: 1,
            lead: (0, 1),
            sub: None,
            alpha: qi(0),
            offset: 0,
        }
        .materialize(2, -3, 3, 0, None)
        .unwrap();
        assert_eq!(d.len(), 7);
        assert_eq!(d.get(&[qi(2), qi(-2)]), Cyclo::one());
    }

    #[test]
    fn products_and_derivatives() {
        let a = binom_expand(2, qi(1), (0, 1), (1, -1), 1, None).unwrap();
        let b = binom_expand(2, qi(1), (0, 1), (1, 1), 1, None).unwrap();
        let p = series_mul(&a, &b, None).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.get(&[qi(2), qi(0)]), c(1, 1));
        assert_eq!(p.get(&[qi(0), qi(2)]), c(-1, 1));
        assert_eq!(
            series_mul(&a, &one_series(2), None)
                .unwrap()
                .terms()
                .count(),
            a.len()
        );
        let z = MultiSeries::monomial(1, vec![q(2, 3)], Cyclo::one());
        assert_eq!(z.derive(0).get(&[q(-1, 3)]), c(2, 3));
        assert!(one_series(1).derive(0).is_empty());
        let mut r = MultiSeries::monomial(1, vec![qi(-1)], Cyclo::from_int(3));
        r.add_term(vec![qi(2)], &Cyclo::one());
        assert_eq!(r.residue(0).get(&[qi(0)]), c(3, 1));
        assert!(MultiSeries::monomial(1, vec![q(1, 2)], Cyclo::one())
            .residue(0)
            .is_empty());
    }

    #[test]
    fn half_powers_telescope() {
        let t = 8;
        let h = binom_expand(2, q(1, 2), (0, 1), (1, -1), t, None).unwrap();
        let w = vec![None, Some((qi(0), qi(t as i64)))];
        let sq = series_mul(&h, &h, Some(&w)).unwrap();
        let one = binom_expand(2, qi(1), (0, 1), (1, -1), t, None).unwrap();
        assert_eq!(compare_in_window(&sq, &one, &w).1, None);
    }

    #[test]
    fn distribution_products_rejected() {
        let k = DeltaKernel::standard(0, 1, 2, -1, qi(0))
            .materialize(3, -2, 2, 2, None)
            .unwrap();
        assert!(matches!(
            series_mul(&k, &k, None),
            Err(Error::IllFormedProduct(_))
        ));
    }

    #[test]
    fn dump_is_sorted() {
        let mut s = MultiSeries::new(2);
        s.add_term(vec![qi(1), q(-1, 3)], &Cyclo::from_int(2));
        s.add_term(vec![qi(-1), qi(0)], &Cyclo::from_int(-1));
        assert_eq!(s.dump(), "z0^{-1} z1^{0} : -1\nz0^{1} z1^{-1/3} : 2\n");
    }

    #[test]
    fn identities_hold() {
        for a in [qi(0), q(1, 2), q(-1, 3), qi(2)] {
            for r in check_delta_identities(a, 4, DeltaFault::None).unwrap() {
                assert!(r.passed, "{}", r.summary_line());
                assert!(r.checked > 0, "{}", r.id);
            }
        }
        assert!(check_vanishing_identity(4, 6).unwrap().passed);
    }

    #[test]
    fn binomial_fault_detected() {
        let reps = check_delta_identities(q(1, 2), 4, DeltaFault::Binomial).unwrap();
        let failing: Vec<_> = reps.iter().filter(|r| !r.passed).collect();
        assert!(failing.iter().any(|r| r.id.starts_with("delta.alpha")));
        for r in failing {
            assert!(r.counterexample.as_ref().unwrap().contains("z0^"));
        }
    }

    #[test]
    fn phase_substitution() {
        let s = MultiSeries::monomial(1, vec![qi(1)], Cyclo::one());
        assert_eq!(s.substitute_phase(0).get(&[qi(1)]), Cyclo::from_int(-1));
    }
}
