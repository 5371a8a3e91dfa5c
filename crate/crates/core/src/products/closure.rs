//! The closure `⟨Γ⟩`: the span of iterated products of generators applied
//! to the identity field, reduced to a basis by exact elimination on probe
//! entries, together with its table of products.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::Products;
use crate::error::{Error, Result};
use crate::fields::{probe_entries, sector_probes, Field, Probe};
use crate::grading::GroupElement;
use crate::linalg::{express_in_span, rank};
use crate::scalars::{fmt_q, Cyclo, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElementSpec {
    Identity,
    Generator(usize),
    /// `generator_n element`
    Product {
        gen: usize,
        n: Q,
        of: usize,
    },
}

#[derive(Clone)]
pub struct ClosureOptions {
    /// Elements of weight above this bound are outside the window.
    pub max_weight: Q,
    /// Sectors inside the window.
    pub sector_ok: Arc<dyn Fn(&GroupElement) -> bool + Send + Sync>,
    pub max_rounds: usize,
    pub max_elements: usize,
    /// Fill the product table for every pair of elements, not only for
    /// generator rows and the vacuum row.
    pub full_table: bool,
    /// Extra source vectors for probing, besides the certification sources.
    pub extra_sources: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureStatus {
    FixedPoint { rounds: usize },
    MaxRounds,
}

/// Linear combination of elements.
pub type Combination = Vec<(usize, Cyclo)>;

pub struct ClosureAlgebra {
    pub generators: Vec<Field>,
    pub elements: Vec<Field>,
    pub specs: Vec<ElementSpec>,
    pub vacuum: usize,
    /// `(i, n, j) -> element_i _n element_j`, for products inside the window.
    pub table: BTreeMap<(usize, Q, usize), Combination>,
    pub status: ClosureStatus,
    pub sources: Vec<usize>,
    /// Products whose reduction used fewer probes than the slice rank needs.
    pub notes: Vec<String>,
}

type SliceKey = (GroupElement, Q);

struct Reducer {
    sources: Vec<usize>,
    probes: HashMap<GroupElement, Vec<Probe>>,
    entries: HashMap<usize, Vec<Option<crate::fields::Vector>>>,
    slices: BTreeMap<SliceKey, Vec<usize>>,
}

enum Class {
    Zero,
    Span(Combination),
    New,
}

impl Reducer {
    fn probes(&mut self, f: &Field) -> Vec<Probe> {
        self.probes
            .entry(f.sector().clone())
            .or_insert_with(|| sector_probes(f.module(), f.sector(), &self.sources))
            .clone()
    }

    fn entries_of(&mut self, idx: usize, f: &Field) -> Result<Vec<Option<crate::fields::Vector>>> {
        if let Some(e) = self.entries.get(&idx) {
            return Ok(e.clone());
        }
        let p = self.probes(f);
        let e = probe_entries(f, &p)?;
        self.entries.insert(idx, e.clone());
        Ok(e)
    }

    /// Dense rows over the probe entries known for all of `fields`.
    fn rows(all: &[Vec<Option<crate::fields::Vector>>]) -> Vec<Vec<Cyclo>> {
        let np = all.first().map_or(0, |e| e.len());
        let mut keys: Vec<(usize, usize)> = Vec::new();
        for p in 0..np {
            if all.iter().any(|e| e[p].is_none()) {
                continue;
            }
            let mut idx: Vec<usize> = all
                .iter()
                .flat_map(|e| e[p].as_ref().unwrap().support().collect::<Vec<_>>())
                .collect();
            idx.sort();
            idx.dedup();
            keys.extend(idx.into_iter().map(|i| (p, i)));
        }
        all.iter()
            .map(|e| {
                keys.iter()
                    .map(|&(p, i)| e[p].as_ref().unwrap().get(i).cloned().unwrap_or_default())
                    .collect()
            })
            .collect()
    }

    fn classify(
        &mut self,
        elements: &[Field],
        f: &Field,
        notes: &mut Vec<String>,
    ) -> Result<Class> {
        let key = (f.sector().clone(), f.weight());
        let members = self.slices.get(&key).cloned().unwrap_or_default();
        let p = self.probes(f);
        let cand = probe_entries(f, &p)?;
        let mut all = Vec::new();
        for &m in &members {
            all.push(self.entries_of(m, &elements[m])?);
        }
        all.push(cand);
        let rows = Self::rows(&all);
        let target = rows.last().unwrap();
        if target.iter().all(|c| c.is_zero()) {
            return Ok(Class::Zero);
        }
        let basis = &rows[..rows.len() - 1];
        if !basis.is_empty() && rank(basis, target.len()) < basis.len() {
            notes.push(format!(
                "{}: slice rank drops on the shared probes",
                f.name()
            ));
        }
        Ok(match express_in_span(basis, target) {
            Some(c) => Class::Span(
                members
                    .iter()
                    .zip(c)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(&m, c)| (m, c))
                    .collect(),
            ),
            None => Class::New,
        })
    }

    fn admit(&mut self, idx: usize, f: &Field) {
        self.slices
            .entry((f.sector().clone(), f.weight()))
            .or_default()
            .push(idx);
    }
}

fn in_window(opts: &ClosureOptions, f: &Field) -> bool {
    f.weight() <= opts.max_weight && (opts.sector_ok)(f.sector())
}

/// Candidate modes `n` of `a_n b` in the window: on the coset `(g,h)+Z`,
/// below the certified exponent, with weight at most `max_weight`.
fn modes(reg: &Products, a: &Field, b: &Field, max_weight: &Q) -> Result<Vec<Q>> {
    let cert = reg.certify(a, b)?;
    let k = cert
        .exponent()
        .ok_or_else(|| Error::UncertifiedPair(a.name().into(), b.name().into()))?;
    let lo = a.weight() + b.weight() - 1 - max_weight;
    let mut n = cert.gh + (lo - cert.gh).ceil();
    let mut out = Vec::new();
    while n < k {
        out.push(n);
        n += 1;
    }
    Ok(out)
}

/// Fixed-point generation of `⟨Γ⟩` from `generators` inside the window.
pub fn generate_closure(
    reg: &Products,
    id_field: &Field,
    generators: &[Field],
    opts: &ClosureOptions,
) -> Result<ClosureAlgebra> {
    let mut sources = reg.opts.sources.clone();
    for s in &opts.extra_sources {
        if !sources.contains(s) {
            sources.push(*s);
        }
    }
    let mut red = Reducer {
        sources: sources.clone(),
        probes: HashMap::new(),
        entries: HashMap::new(),
        slices: BTreeMap::new(),
    };
    let mut notes = Vec::new();
    let mut elements = vec![id_field.clone()];
    let mut specs = vec![ElementSpec::Identity];
    red.admit(0, id_field);
    for (i, g) in generators.iter().enumerate() {
        if let Class::New = red.classify(&elements, g, &mut notes)? {
            red.admit(elements.len(), g);
            elements.push(g.clone());
            specs.push(ElementSpec::Generator(i));
        }
    }
    let gen_index: Vec<Option<usize>> = generators
        .iter()
        .map(|g| elements.iter().position(|e| e.id() == g.id()))
        .collect();
    let mut done: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut status = ClosureStatus::MaxRounds;
    for round in 1..=opts.max_rounds {
        let mut added = false;
        let snapshot = elements.len();
        for (gi, g) in generators.iter().enumerate() {
            for e in 0..snapshot {
                if !done.insert((gi, e)) {
                    continue;
                }
                let of = elements[e].clone();
                for n in modes(reg, g, &of, &opts.max_weight)? {
                    let p = reg.product(g, &of, &n)?;
                    if !in_window(opts, &p) {
                        continue;
                    }
                    if let Class::New = red.classify(&elements, &p, &mut notes)? {
                        if elements.len() >= opts.max_elements {
                            return Err(Error::CapacityExceeded(format!(
                                "closure exceeds {} elements at {}",
                                opts.max_elements,
                                p.name()
                            )));
                        }
                        red.admit(elements.len(), &p);
                        elements.push(p);
                        specs.push(ElementSpec::Product { gen: gi, n, of: e });
                        added = true;
                    }
                }
            }
        }
        if !added {
            status = ClosureStatus::FixedPoint { rounds: round };
            break;
        }
    }
    let mut table = BTreeMap::new();
    let rows: Vec<usize> = if opts.full_table {
        (0..elements.len()).collect()
    } else {
        let mut r: Vec<usize> = std::iter::once(0)
            .chain(gen_index.iter().flatten().copied())
            .collect();
        r.dedup();
        r
    };
    for &i in &rows {
        for j in 0..elements.len() {
            let (a, b) = (elements[i].clone(), elements[j].clone());
            for n in modes(reg, &a, &b, &opts.max_weight)? {
                let p = reg.product(&a, &b, &n)?;
                if !in_window(opts, &p) {
                    continue;
                }
                match red.classify(&elements, &p, &mut notes)? {
                    Class::Zero => {}
                    Class::Span(c) => {
                        table.insert((i, n, j), c);
                    }
                    Class::New => {
                        notes.push(format!("{} lies outside the closure", p.name()));
                        status = ClosureStatus::MaxRounds;
                    }
                }
            }
        }
    }
    Ok(ClosureAlgebra {
        generators: generators.to_vec(),
        elements,
        specs,
        vacuum: 0,
        table,
        status,
        sources,
        notes,
    })
}

impl ClosureAlgebra {
    pub fn is_fixed_point(&self) -> bool {
        matches!(self.status, ClosureStatus::FixedPoint { .. })
    }

    /// Number of elements per `(sector, weight)`.
    pub fn dims(&self) -> BTreeMap<(GroupElement, Q), usize> {
        let mut out = BTreeMap::new();
        for e in &self.elements {
            *out.entry((e.sector().clone(), e.weight())).or_insert(0) += 1;
        }
        out
    }

    pub fn label(&self, i: usize) -> String {
        format!("x{i}")
    }

    fn spec_text(&self, i: usize) -> String {
        match &self.specs[i] {
            ElementSpec::Identity => "I".into(),
            ElementSpec::Generator(g) => self.generators[*g].name().to_string(),
            ElementSpec::Product { gen, n, of } => {
                format!(
                    "{}_[{}] {}",
                    self.generators[*gen].name(),
                    fmt_q(n),
                    self.label(*of)
                )
            }
        }
    }

    /// Rebuilds the elements from their specs over new generators and
    /// identity (e.g. the same construction with representatives shifted by
    /// 2, possibly on a larger truncation). Each product keeps its certified
    /// exponent, moved by the change of representative of `(g,h)`.
    pub fn replay(
        &self,
        id_field: &Field,
        generators: &[Field],
        sources: Vec<usize>,
    ) -> Result<ClosureAlgebra> {
        let mut elements: Vec<Field> = Vec::new();
        for (i, spec) in self.specs.iter().enumerate() {
            let f = match spec {
                ElementSpec::Identity => id_field.clone(),
                ElementSpec::Generator(g) => generators[*g].clone(),
                ElementSpec::Product { gen, n, of } => {
                    let crate::fields::FieldKind::Product {
                        exponent, gh, c, ..
                    } = self.elements[i].kind()
                    else {
                        return Err(Error::IllFormedProduct(format!(
                            "{} is not a product",
                            self.label(i)
                        )));
                    };
                    let (a, b) = (&generators[*gen], &elements[*of]);
                    let new_gh = a.module().grading.pair(a.sector(), b.sector());
                    super::product_with_exponent(a, b, n, exponent - gh + new_gh, new_gh, c.clone())
                }
            };
            elements.push(f);
        }
        Ok(ClosureAlgebra {
            generators: generators.to_vec(),
            elements,
            specs: self.specs.clone(),
            vacuum: self.vacuum,
            table: self.table.clone(),
            status: self.status,
            sources,
            notes: self.notes.clone(),
        })
    }

    /// Probes of each element's sector on the sources, as `(source label,
    /// target degree)`, up to target degree `max_target`.
    pub fn probe_labels(&self, max_target: &Q) -> Vec<Vec<(String, Q)>> {
        self.elements
            .iter()
            .map(|e| {
                let m = e.module();
                sector_probes(m, e.sector(), &self.sources)
                    .into_iter()
                    .filter(|p| p.target_degree <= *max_target)
                    .map(|p| (m.info(p.source).label.clone(), p.target_degree))
                    .collect()
            })
            .collect()
    }

    /// Stable dump of every element's entries on the given probes, with
    /// basis vectors named by their labels; unknown entries print as `?`.
    pub fn coefficient_dump(&self, probes: &[Vec<(String, Q)>]) -> Result<String> {
        let mut s = String::new();
        for (i, (e, ps)) in self.elements.iter().zip(probes).enumerate() {
            let m = e.module();
            let probes: Vec<Probe> = ps
                .iter()
                .map(|(l, d)| {
                    let source =
                        (0..m.dim())
                            .find(|&j| m.info(j).label == *l)
                            .ok_or_else(|| {
                                Error::WindowUnderflow(format!("basis vector {l} is not retained"))
                            })?;
                    Ok(Probe {
                        source,
                        target_degree: *d,
                    })
                })
                .collect::<Result<_>>()?;
            s.push_str(&format!("{}\n", self.label(i)));
            for (p, v) in probes.iter().zip(probe_entries(e, &probes)?) {
                let shown = match v {
                    None => "?".to_string(),
                    Some(v) if v.is_zero() => "0".to_string(),
                    Some(v) => v
                        .iter()
                        .map(|(j, c)| format!("({c}){}", m.info(j).label))
                        .collect::<Vec<_>>()
                        .join(" + "),
                };
                s.push_str(&format!(
                    "  {} -> deg {}: {shown}\n",
                    m.info(p.source).label,
                    fmt_q(&p.target_degree)
                ));
            }
        }
        Ok(s)
    }

    /// Stable text dump: status, dimension table, elements and products.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        match self.status {
            ClosureStatus::FixedPoint { rounds } => {
                s.push_str(&format!("status fixed_point rounds={rounds}\n"))
            }
            ClosureStatus::MaxRounds => s.push_str("status max_rounds\n"),
        }
        s.push_str("dimensions\n");
        for ((g, w), d) in self.dims() {
            s.push_str(&format!("  sector {g} weight {}: {d}\n", fmt_q(&w)));
        }
        s.push_str("elements\n");
        for (i, e) in self.elements.iter().enumerate() {
            s.push_str(&format!(
                "  {} = {}  (sector {}, weight {})\n",
                self.label(i),
                self.spec_text(i),
                e.sector(),
                fmt_q(&e.weight())
            ));
        }
        s.push_str("products\n");
        for ((i, n, j), c) in &self.table {
            let rhs = c
                .iter()
                .map(|(k, x)| format!("({x}) {}", self.label(*k)))
                .collect::<Vec<_>>()
                .join(" + ");
            s.push_str(&format!(
                "  {}_[{}] {} = {}\n",
                self.label(*i),
                fmt_q(n),
                self.label(*j),
                rhs
            ));
        }
        s
    }
}
