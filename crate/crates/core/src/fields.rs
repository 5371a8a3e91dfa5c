//! Truncated graded modules and fields on them.
//!
//! A [`Field`] `a(z) = Σ a_n z^{-n-1}` of sector `g` and weight `Δ` sends a
//! basis vector of sector `s` and degree `d` to sector `g+s` and degree
//! `d + Δ - n - 1`. Its modes are nonzero only for `n ∈ (g,s) + Z`. A mode
//! whose target degree exceeds the module cutoff is unknown and evaluates
//! to [`Error::OutOfTruncation`]; callers decide whether to skip it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_traits::Zero;
use parking_lot::Mutex;

use crate::error::{Error, Result};
use crate::grading::{Grading, GroupElement};
use crate::linalg::SparseVec;
use crate::report::CheckReport;
use crate::scalars::{binom_q, fmt_q, q_int, qi, sign_pow, Cyclo, Q};

pub type Vector = SparseVec<Cyclo>;

#[derive(Clone, Debug, PartialEq)]
pub struct BasisInfo {
    pub sector: GroupElement,
    pub degree: Q,
    pub label: String,
}

type CutoffFn = Arc<dyn Fn(&GroupElement) -> Option<Q> + Send + Sync>;

/// Finite slice of a graded module: basis vectors with sector and degree,
/// and a per-sector degree cutoff up to which the slice is complete.
#[derive(Clone)]
pub struct TruncatedModule {
    pub name: String,
    pub grading: Grading,
    basis: Vec<BasisInfo>,
    cutoff: CutoffFn,
    by_sector: BTreeMap<GroupElement, Vec<usize>>,
    pub vacuum: Option<usize>,
}

impl fmt::Debug for TruncatedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TruncatedModule({}, dim={})",
            self.name,
            self.basis.len()
        )
    }
}

impl TruncatedModule {
    pub fn new(
        name: impl Into<String>,
        grading: Grading,
        basis: Vec<BasisInfo>,
        cutoff: impl Fn(&GroupElement) -> Option<Q> + Send + Sync + 'static,
        vacuum: Option<usize>,
    ) -> Self {
        let mut by_sector: BTreeMap<GroupElement, Vec<usize>> = BTreeMap::new();
        for (i, b) in basis.iter().enumerate() {
            by_sector.entry(b.sector.clone()).or_default().push(i);
        }
        TruncatedModule {
            name: name.into(),
            grading,
            basis,
            cutoff: Arc::new(cutoff),
            by_sector,
            vacuum,
        }
    }

    /// Same basis and cutoffs with a different grading (e.g. another
    /// representative lift).
    pub fn with_grading(&self, grading: Grading) -> Self {
        let mut m = self.clone();
        m.grading = grading;
        m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisInfo] {
        &self.basis
    }

    pub fn info(&self, j: usize) -> &BasisInfo {
        &self.basis[j]
    }

    pub fn sectors(&self) -> impl Iterator<Item = &GroupElement> {
        self.by_sector.keys()
    }

    pub fn in_sector(&self, s: &GroupElement) -> &[usize] {
        self.by_sector.get(s).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn cutoff(&self, s: &GroupElement) -> Option<Q> {
        (self.cutoff)(s)
    }

    /// Whether the slice of sector `s` at degree `d` is fully retained.
    pub fn known(&self, s: &GroupElement, d: &Q) -> bool {
        self.cutoff(s).map_or(false, |c| *d <= c)
    }

    /// Whether every degree `≤ d` of sector `s` is known and empty.
    pub fn vanishes_through(&self, s: &GroupElement, d: &Q) -> bool {
        if !self.known(s, d) {
            return false;
        }
        !self
            .in_sector(s)
            .iter()
            .any(|&j| self.basis[j].degree <= *d)
    }

    /// Lowest retained degree in sector `s`.
    pub fn lower_bound(&self, s: &GroupElement) -> Option<Q> {
        self.in_sector(s)
            .iter()
            .map(|&j| self.basis[j].degree)
            .min()
    }

    /// Basis vectors of sector `s` with degree exactly `d`.
    pub fn slice(&self, s: &GroupElement, d: &Q) -> Vec<usize> {
        self.in_sector(s)
            .iter()
            .copied()
            .filter(|&j| self.basis[j].degree == *d)
            .collect()
    }

    /// Sorted text dump of the basis: `index sector degree label`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.basis.iter().enumerate() {
            out.push_str(&format!(
                "{i} {} {} {}\n",
                b.sector,
                fmt_q(&b.degree),
                b.label
            ));
        }
        out
    }
}

type LazyFn = Arc<dyn Fn(&Q, usize) -> Result<Vector> + Send + Sync>;

#[derive(Clone)]
pub enum FieldKind {
    Identity,
    Zero,
    /// Explicit nonzero modes `(n, source) -> target`.
    Stored(Arc<HashMap<(Q, usize), Vector>>),
    /// Modes computed on demand, subject to the degree and sector checks.
    Lazy(LazyFn),
    /// Modes computed on demand with no degree bookkeeping (fault injection).
    Raw(LazyFn),
    /// `a_n b` computed by the finite-sum formula; `exponent` is the
    /// certified `k + (g,h)` and `gh` the representative of `(g,h)` used.
    Product {
        a: Field,
        b: Field,
        n: Q,
        exponent: Q,
        gh: Q,
        c: Cyclo,
    },
    Derivative(Field),
    Combination(Vec<(Cyclo, Field)>),
}

pub struct FieldInner {
    pub id: u64,
    pub name: String,
    pub sector: GroupElement,
    pub weight: Q,
    pub module: Arc<TruncatedModule>,
    pub kind: FieldKind,
    cache: Mutex<HashMap<(Q, usize), Result<Vector>>>,
}

/// Shared handle to a field; clones are cheap and share the mode cache.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Field({}, sector={}, weight={})",
            self.0.name,
            self.0.sector,
            fmt_q(&self.0.weight)
        )
    }
}

impl Field {
    pub fn new(
        name: impl Into<String>,
        sector: GroupElement,
        weight: Q,
        module: Arc<TruncatedModule>,
        kind: FieldKind,
    ) -> Self {
        Field(Arc::new(FieldInner {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            sector,
            weight,
            module,
            kind,
            cache: Mutex::new(HashMap::new()),
        }))
    }

    pub fn identity(module: Arc<TruncatedModule>) -> Self {
        let z = module.grading.zero();
        Field::new("I", z, Q::zero(), module, FieldKind::Identity)
    }

    pub fn zero(module: Arc<TruncatedModule>, sector: GroupElement, weight: Q) -> Self {
        Field::new("0", sector, weight, module, FieldKind::Zero)
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn sector(&self) -> &GroupElement {
        &self.0.sector
    }

    pub fn weight(&self) -> Q {
        self.0.weight
    }

    pub fn module(&self) -> &Arc<TruncatedModule> {
        &self.0.module
    }

    pub fn kind(&self) -> &FieldKind {
        &self.0.kind
    }

    pub fn renamed(&self, name: impl Into<String>) -> Field {
        Field::new(
            name,
            self.sector().clone(),
            self.weight(),
            self.module().clone(),
            self.kind().clone(),
        )
    }

    /// Same definition re-bound to another module (with another grading lift);
    /// sub-fields are rebound recursively.
    pub fn rebind(&self, module: &Arc<TruncatedModule>) -> Field {
        let kind = match self.kind() {
            FieldKind::Product {
                a,
                b,
                n,
                exponent,
                gh,
                c,
            } => {
                let old = gh;
                let gr = &module.grading;
                let new_gh = gr.pair(a.sector(), b.sector());
                let shift = new_gh - old;
                FieldKind::Product {
                    a: a.rebind(module),
                    b: b.rebind(module),
                    n: *n,
                    exponent: exponent + shift,
                    gh: new_gh,
                    c: c.clone(),
                }
            }
            FieldKind::Derivative(a) => FieldKind::Derivative(a.rebind(module)),
            FieldKind::Combination(t) => FieldKind::Combination(
                t.iter()
                    .map(|(c, f)| (c.clone(), f.rebind(module)))
                    .collect(),
            ),
            other => other.clone(),
        };
        Field::new(
            self.name(),
            self.sector().clone(),
            self.weight(),
            module.clone(),
            kind,
        )
    }

    /// Target sector and degree of `a_n` on basis vector `j`, or `None` when
    /// `n` is off the coset `(g, s) + Z`.
    pub fn target(&self, n: &Q, j: usize) -> Option<(GroupElement, Q)> {
        let m = self.module();
        let info = m.info(j);
        let gamma = m.grading.pair_gs(self.sector(), &info.sector);
        if !(n - gamma).is_integer() {
            return None;
        }
        let t = m.grading.act(self.sector(), &info.sector);
        Some((t, info.degree + self.weight() - n - 1))
    }

    /// `a_n w_j`.
    pub fn apply(&self, n: &Q, j: usize) -> Result<Vector> {
        if let FieldKind::Raw(f) = self.kind() {
            return f(n, j);
        }
        let Some((t, d)) = self.target(n, j) else {
            return Ok(Vector::new());
        };
        let m = self.module();
        if !m.known(&t, &d) {
            return Err(Error::OutOfTruncation {
                sector: t.to_string(),
                degree: fmt_q(&d),
                cutoff: m.cutoff(&t).map_or("none".into(), |c| fmt_q(&c)),
            });
        }
        if m.vanishes_through(&t, &d) || m.lower_bound(&t).map_or(true, |lb| d < lb) {
            return Ok(Vector::new());
        }
        if matches!(self.kind(), FieldKind::Zero) {
            return Ok(Vector::new());
        }
        if let FieldKind::Identity = self.kind() {
            return Ok(if *n == qi(-1) {
                Vector::basis(j)
            } else {
                Vector::new()
            });
        }
        let key = (*n, j);
        if let Some(r) = self.0.cache.lock().get(&key) {
            return r.clone();
        }
        let r = self.compute(n, j, &t, &d);
        self.0.cache.lock().insert(key, r.clone());
        r
    }

    fn check_target(&self, v: Vector, t: &GroupElement, d: &Q, n: &Q, j: usize) -> Result<Vector> {
        let m = self.module();
        for i in v.support() {
            let info = m.info(i);
            if info.sector != *t || info.degree != *d {
                return Err(Error::SectorViolation(format!(
                    "{}_{{{}}} maps basis {j} to basis {i} (sector {}, degree {}), expected sector {t}, degree {}",
                    self.name(),
                    fmt_q(n),
                    info.sector,
                    fmt_q(&info.degree),
                    fmt_q(d)
                )));
            }
        }
        Ok(v)
    }

    fn compute(&self, n: &Q, j: usize, t: &GroupElement, d: &Q) -> Result<Vector> {
        match self.kind() {
            FieldKind::Identity | FieldKind::Zero | FieldKind::Raw(_) => unreachable!(),
            FieldKind::Stored(map) => {
                let v = map.get(&(*n, j)).cloned().unwrap_or_default();
                self.check_target(v, t, d, n, j)
            }
            FieldKind::Lazy(f) => {
                let v = f(n, j)?;
                self.check_target(v, t, d, n, j)
            }
            FieldKind::Derivative(a) => {
                // (a')_n = -n a_{n-1}
                if n.is_zero() {
                    return Ok(Vector::new());
                }
                let v = a.apply(&(n - 1), j)?;
                Ok(v.scale(&Cyclo::from_rational(crate::scalars::q_to_rat(&-n))))
            }
            FieldKind::Combination(terms) => {
                let mut acc = Vector::new();
                for (c, f) in terms {
                    acc.add_scaled(&f.apply(n, j)?, c);
                }
                Ok(acc)
            }
            FieldKind::Product {
                a,
                b,
                n: pn,
                exponent,
                gh,
                c,
            } => product_mode(a, b, pn, exponent, gh, c, n, j),
        }
    }

    /// `a_n v` for an arbitrary vector.
    pub fn apply_vec(&self, n: &Q, v: &Vector) -> Result<Vector> {
        let mut acc = Vector::new();
        for (j, c) in v.iter() {
            acc.add_scaled(&self.apply(n, j)?, c);
        }
        Ok(acc)
    }

    /// Degree of the target of `a_n` on basis vector `j` (ignoring cosets).
    pub fn target_degree(&self, n: &Q, j: usize) -> Q {
        self.module().info(j).degree + self.weight() - n - 1
    }

    /// Number of cached modes (for diagnostics).
    pub fn cache_len(&self) -> usize {
        self.0.cache.lock().len()
    }
}

/// Degree of a homogeneous vector, if it has one.
pub fn vector_degree(m: &TruncatedModule, v: &Vector) -> Option<Q> {
    v.support().next().map(|i| m.info(i).degree)
}

/// `(a_n b)_m w_j` by the finite-sum formula.
#[allow(clippy::too_many_arguments)]
fn product_mode(
    a: &Field,
    b: &Field,
    n: &Q,
    exponent: &Q,
    gh: &Q,
    c: &Cyclo,
    m: &Q,
    j: usize,
) -> Result<Vector> {
    let module = a.module();
    let gr = &module.grading;
    let s = &module.info(j).sector;
    let gs = gr.pair_gs(a.sector(), s);
    let Some(terms) = q_int(&(exponent - n)) else {
        return Ok(Vector::new());
    };
    if terms <= 0 {
        return Ok(Vector::new());
    }
    let Some(nm) = q_int(&(n - gh)) else {
        return Ok(Vector::new());
    };
    let ts_b = gr.act(b.sector(), s);
    let ts_a = gr.act(a.sector(), s);
    let mut acc = Vector::new();
    for i in 0..terms {
        let ci = binom_q(&-gs, i as u32);
        if ci.is_zero() {
            continue;
        }
        let ni = n + i;
        let ci = Cyclo::from_rational(ci);
        // Σ_j C(n+i, j)(-1)^j a_{γ+n+i-j} b_{m-γ-i+j} w
        let mut jj = 0i64;
        loop {
            let bi = m - gs - i + jj;
            let db = b.target_degree(&bi, j);
            if module.vanishes_through(&ts_b, &db) {
                break;
            }
            let bc = binom_q(&ni, jj as u32);
            if !bc.is_zero() {
                let v = b.apply(&bi, j)?;
                if !v.is_zero() {
                    let u = a.apply_vec(&(gs + ni - jj), &v)?;
                    let coef = ci.scale(&(bc * crate::scalars::int(sign_pow(jj))));
                    acc.add_scaled(&u, &coef);
                }
            }
            jj += 1;
        }
        // -(-1)^{n-(g,h)+i} c Σ_j C(n+i, j)(-1)^j b_{m+n-γ-j} a_{γ+j} w
        let outer = c.scale(&crate::scalars::int(-sign_pow(nm + i)));
        let mut jj = 0i64;
        loop {
            let ai = gs + jj;
            let da = a.target_degree(&ai, j);
            if module.vanishes_through(&ts_a, &da) {
                break;
            }
            let bc = binom_q(&ni, jj as u32);
            if !bc.is_zero() {
                let v = a.apply(&ai, j)?;
                if !v.is_zero() {
                    let u = b.apply_vec(&(m + n - gs - jj), &v)?;
                    let coef = ci
                        .mul_ref(&outer)
                        .scale(&(bc * crate::scalars::int(sign_pow(jj))));
                    acc.add_scaled(&u, &coef);
                }
            }
            jj += 1;
        }
    }
    Ok(acc)
}

/// Derivative field `a'(z)`.
pub fn derive_field(a: &Field) -> Field {
    Field::new(
        format!("D({})", a.name()),
        a.sector().clone(),
        a.weight() + 1,
        a.module().clone(),
        FieldKind::Derivative(a.clone()),
    )
}

/// Linear combination of fields sharing sector and weight.
pub fn combine(name: impl Into<String>, terms: Vec<(Cyclo, Field)>) -> Field {
    let first = &terms[0].1;
    debug_assert!(terms
        .iter()
        .all(|(_, f)| f.sector() == first.sector() && f.weight() == first.weight()));
    Field::new(
        name,
        first.sector().clone(),
        first.weight(),
        first.module().clone(),
        FieldKind::Combination(terms),
    )
}

/// The operator `z^g`: multiplies `w ∈ W^s` by `z^{(g,s)}`.
#[derive(Clone, Debug)]
pub struct SectorShift {
    pub g: GroupElement,
}

impl SectorShift {
    pub fn exponent(&self, module: &TruncatedModule, j: usize) -> Q {
        module.grading.pair_gs(&self.g, &module.info(j).sector)
    }
}

/// A probe point: source basis vector and target degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Probe {
    pub source: usize,
    pub target_degree: Q,
}

/// Mode index `n` realising a probe for a field of weight `weight`.
pub fn probe_mode(module: &TruncatedModule, weight: Q, p: &Probe) -> Q {
    module.info(p.source).degree + weight - 1 - p.target_degree
}

/// Entries of `a` at the probe points; `None` marks unknown entries.
pub fn probe_entries(a: &Field, probes: &[Probe]) -> Result<Vec<Option<Vector>>> {
    let m = a.module();
    probes
        .iter()
        .map(|p| {
            let n = probe_mode(m, a.weight(), p);
            match a.apply(&n, p.source) {
                Ok(v) => Ok(Some(v)),
                Err(e) if e.is_out_of_truncation() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Probe points on all basis vectors of degree `≤ source_max` and target
/// degrees in `targets`.
pub fn probes(module: &TruncatedModule, source_max: Q, targets: &[Q]) -> Vec<Probe> {
    let mut out = Vec::new();
    for (j, b) in module.basis().iter().enumerate() {
        if b.degree > source_max {
            continue;
        }
        for t in targets {
            out.push(Probe {
                source: j,
                target_degree: *t,
            });
        }
    }
    out
}

/// Compares two fields of the same sector and weight on probes; unknown
/// entries on either side are skipped.
pub fn compare_fields(id: &str, a: &Field, b: &Field, probes: &[Probe]) -> Result<CheckReport> {
    let mut rep = CheckReport::new(id, format!("probes={}", probes.len()));
    if a.weight() != b.weight() || a.sector() != b.sector() {
        rep.fail(format!(
            "shape mismatch: ({}, {}) vs ({}, {})",
            a.sector(),
            fmt_q(&a.weight()),
            b.sector(),
            fmt_q(&b.weight())
        ));
        return Ok(rep);
    }
    let ea = probe_entries(a, probes)?;
    let eb = probe_entries(b, probes)?;
    for ((p, x), y) in probes.iter().zip(ea).zip(eb) {
        match (x, y) {
            (Some(x), Some(y)) => {
                rep.checked += 1;
                if x != y {
                    let n = probe_mode(a.module(), a.weight(), p);
                    rep.fail(format!(
                        "mode {} on basis {}: {} vs {}",
                        fmt_q(&n),
                        p.source,
                        x,
                        y
                    ));
                }
            }
            _ => rep.skipped += 1,
        }
    }
    Ok(rep)
}

/// Scans `a_n w` for every basis vector over `n` up to the point where the
/// target degree falls below the sector's lower bound, and reports the
/// lowest power of `z` seen per sector. A field whose modes are still
/// nonzero at the end of the scan fails.
pub fn check_lower_truncation(a: &Field, extra: i64) -> Result<CheckReport> {
    let m = a.module();
    let mut rep = CheckReport::new(
        format!("lower_truncation[{}]", a.name()),
        format!("scan+{extra}"),
    );
    let mut bounds: BTreeMap<GroupElement, Q> = BTreeMap::new();
    for (j, info) in m.basis().iter().enumerate() {
        let gamma = m.grading.pair_gs(a.sector(), &info.sector);
        let t = m.grading.act(a.sector(), &info.sector);
        let Some(lb) = m
            .lower_bound(&t)
            .or_else(|| Some(info.degree + a.weight() - 1))
        else {
            continue;
        };
        let Some(cut) = m.cutoff(&t) else { continue };
        // n ranges from the top known target degree down to the lower bound, plus `extra`.
        let n_lo = (info.degree + a.weight() - 1 - cut - gamma).ceil() + gamma;
        let n_hi = (info.degree + a.weight() - 1 - lb - gamma).floor() + gamma + extra;
        let mut n = n_lo;
        let mut last_nonzero: Option<Q> = None;
        while n <= n_hi {
            match a.apply(&n, j) {
                Ok(v) if !v.is_zero() => last_nonzero = Some(n),
                Ok(_) => {}
                Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
                Err(e) => return Err(e),
            }
            rep.checked += 1;
            n += 1;
        }
        if let Some(nl) = last_nonzero {
            if nl + extra > n_hi {
                rep.fail(format!(
                    "basis {j}: mode {} still nonzero at the end of the scan",
                    fmt_q(&nl)
                ));
            }
            let e = -nl - 1;
            let entry = bounds.entry(info.sector.clone()).or_insert(e);
            if e < *entry {
                *entry = e;
            }
        }
    }
    for (s, b) in &bounds {
        rep.note(format!("sector {s}: lowest z-power {}", fmt_q(b)));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::q;

    /// One-sector module with basis e_0..e_{k-1} in degrees 0..k-1.
    pub(crate) fn toy_module(k: usize) -> Arc<TruncatedModule> {
        let mut gr = Grading::sl2(&qi(1));
        gr.gset = crate::grading::GSet::single(1);
        let basis = (0..k)
            .map(|i| BasisInfo {
                sector: GroupElement::zero(1),
                degree: qi(i as i64),
                label: format!("e{i}"),
            })
            .collect();
        let cut = qi(k as i64 - 1);
        Arc::new(TruncatedModule::new(
            "toy",
            gr,
            basis,
            move |_| Some(cut),
            Some(0),
        ))
    }

    /// `a(z) = Σ_n a_n z^{-n-1}` with `a_n e_i = e_{i-n}` for `n ≥ 0` and
    /// the weight-1 raising modes `a_{-1-p} e_i = e_{i+p+1}`... restricted to
    /// weight 1, i.e. `a_n e_i = e_{i-n}`.
    fn shift_field(m: &Arc<TruncatedModule>) -> Field {
        let mm = m.clone();
        Field::new(
            "x",
            GroupElement::zero(1),
            qi(1),
            m.clone(),
            FieldKind::Lazy(Arc::new(move |n, j| {
                let t = qi(j as i64) - n;
                let ti = t.to_integer() as usize;
                let _ = &mm;
                Ok(Vector::basis(ti))
            })),
        )
    }

    #[test]
    fn identity_field() {
        let m = toy_module(4);
        let i = Field::identity(m.clone());
        assert_eq!(i.apply(&qi(-1), 2).unwrap(), Vector::basis(2));
        assert!(i.apply(&qi(0), 2).unwrap().is_zero());
        let z = Field::zero(m, GroupElement::zero(1), qi(0));
        assert!(z.apply(&qi(-1), 1).unwrap().is_zero());
        let rep = check_lower_truncation(&i, 3).unwrap();
        assert!(rep.passed);
        assert!(
            rep.notes.iter().all(|n| n.ends_with("lowest z-power 0")),
            "{rep:?}"
        );
    }

    #[test]
    fn truncation_and_degrees() {
        let m = toy_module(4);
        let x = shift_field(&m);
        assert_eq!(x.apply(&qi(1), 2).unwrap(), Vector::basis(1));
        assert_eq!(x.apply(&qi(-1), 2).unwrap(), Vector::basis(3));
        assert!(x.apply(&qi(-2), 2).unwrap_err().is_out_of_truncation());
        assert!(x.apply(&qi(3), 2).unwrap().is_zero());
        assert!(x.apply(&q(1, 2), 2).unwrap().is_zero());
    }

    #[test]
    fn derivative_rule() {
        let m = toy_module(5);
        let x = shift_field(&m);
        let dx = derive_field(&x);
        // (x')_n = -n x_{n-1}
        assert_eq!(
            dx.apply(&qi(2), 3).unwrap(),
            Vector::basis(2).scale(&Cyclo::from_int(-2))
        );
        let ddx = derive_field(&dx);
        // (x'')_n = n(n-1) x_{n-2}
        assert_eq!(
            ddx.apply(&qi(3), 4).unwrap(),
            Vector::basis(3).scale(&Cyclo::from_int(6))
        );
        assert!(derive_field(&Field::identity(m.clone()))
            .apply(&qi(-2), 0)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn series_view() {
        let m = toy_module(4);
        let i = Field::identity(m.clone());
        let s = apply_field(&i, 2).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(&[qi(0)]), Vector::basis(2));
        let x = shift_field(&m);
        // modes -1..=2 on e_2 land in degrees 3..=0
        assert_eq!(apply_field(&x, 2).unwrap().len(), 4);
    }

    #[test]
    fn corrupted_field_fails_truncation() {
        let m = toy_module(3);
        let bad = Field::new(
            "bad",
            GroupElement::zero(1),
            qi(0),
            m.clone(),
            FieldKind::Raw(Arc::new(|_, j| Ok(Vector::basis(j)))),
        );
        assert!(!check_lower_truncation(&bad, 3).unwrap().passed);
    }

    #[test]
    fn sector_violation_detected() {
        let m = toy_module(3);
        let mut map = HashMap::new();
        map.insert((qi(0), 1), Vector::basis(2));
        let f = Field::new(
            "v",
            GroupElement::zero(1),
            qi(1),
            m,
            FieldKind::Stored(Arc::new(map)),
        );
        assert!(matches!(f.apply(&qi(0), 1), Err(Error::SectorViolation(_))));
    }
}

/// Linear endomorphism of a truncated module given on basis vectors.
pub type Operator = Arc<dyn Fn(usize) -> Result<Vector> + Send + Sync>;

/// `a(z) w_j` as a one-variable series in `z`, over every mode whose target
/// degree lies between the lower bound and the cutoff of the target sector.
pub fn apply_field(a: &Field, j: usize) -> Result<crate::series::MultiSeries<Vector>> {
    let m = a.module();
    let info = m.info(j);
    let gamma = m.grading.pair_gs(a.sector(), &info.sector);
    let t = m.grading.act(a.sector(), &info.sector);
    let mut out = crate::series::MultiSeries::new(1);
    let (Some(lb), Some(cut)) = (m.lower_bound(&t), m.cutoff(&t)) else {
        return Ok(out);
    };
    let top = info.degree + a.weight() - 1;
    let n_lo = (top - cut - gamma).ceil() + gamma;
    let n_hi = (top - lb - gamma).floor() + gamma;
    let mut n = n_lo;
    while n <= n_hi {
        let v = a.apply(&n, j)?;
        if !v.is_zero() {
            out.add_term(vec![-n - 1], &v);
        }
        n += 1;
    }
    Ok(out)
}

/// Probe points for fields of sector `g`: every source in `sources` paired
/// with every retained degree of its target sector.
pub fn sector_probes(module: &TruncatedModule, g: &GroupElement, sources: &[usize]) -> Vec<Probe> {
    let mut out = Vec::new();
    for &j in sources {
        let t = module.grading.act(g, &module.info(j).sector);
        let mut degs: Vec<Q> = module
            .in_sector(&t)
            .iter()
            .map(|&i| module.info(i).degree)
            .collect();
        degs.sort();
        degs.dedup();
        for d in degs {
            out.push(Probe {
                source: j,
                target_degree: d,
            });
        }
    }
    out
}

/// Entries of `Σ c_i f_i` at the probes; `None` marks unknown entries.
pub fn probe_combination(
    terms: &[(Cyclo, Field)],
    probes: &[Probe],
) -> Result<Vec<Option<Vector>>> {
    let mut out: Vec<Option<Vector>> = vec![Some(Vector::new()); probes.len()];
    for (c, f) in terms {
        let e = probe_entries(f, probes)?;
        for (slot, x) in out.iter_mut().zip(e) {
            match (slot.as_mut(), x) {
                (Some(acc), Some(v)) => acc.add_scaled(&v, c),
                _ => *slot = None,
            }
        }
    }
    Ok(out)
}

/// Compares two linear combinations of fields on probes, skipping unknown
/// entries.
pub fn compare_combinations(
    id: &str,
    lhs: &[(Cyclo, Field)],
    rhs: &[(Cyclo, Field)],
    probes: &[Probe],
) -> Result<CheckReport> {
    let mut rep = CheckReport::new(id, format!("probes={}", probes.len()));
    let l = probe_combination(lhs, probes)?;
    let r = probe_combination(rhs, probes)?;
    for ((p, x), y) in probes.iter().zip(l).zip(r) {
        match (x, y) {
            (Some(x), Some(y)) => {
                rep.checked += 1;
                if x != y {
                    rep.fail(format!(
                        "source {} target degree {}: {} vs {}",
                        p.source,
                        fmt_q(&p.target_degree),
                        x,
                        y
                    ));
                }
            }
            _ => rep.skipped += 1,
        }
    }
    Ok(rep)
}
