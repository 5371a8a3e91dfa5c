//! The grading group `G`, its symmetric and alternating forms, and G-sets
//! of module sectors.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::report::CheckReport;
use crate::scalars::{fmt_q, qi, Cyclo, Q};

/// Element of `Z^r / (torsion)`, always stored reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<i64>,
}

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        GroupElement { coords }
    }

    pub fn zero(rank: usize) -> Self {
        GroupElement {
            coords: vec![0; rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Presentation of `G` as `Z^r` with optional torsion moduli (0 = free).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub torsion: Vec<u32>,
}

impl Group {
    pub fn free(rank: usize) -> Self {
        Group {
            torsion: vec![0; rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.torsion.len()
    }

    pub fn reduce(&self, coords: Vec<i64>) -> GroupElement {
        let coords = coords
            .into_iter()
            .zip(&self.torsion)
            .map(|(c, &t)| if t == 0 { c } else { c.rem_euclid(t as i64) })
            .collect();
        GroupElement { coords }
    }

    pub fn element(&self, coords: &[i64]) -> GroupElement {
        self.reduce(coords.to_vec())
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.reduce(g.coords.iter().zip(&h.coords).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self, g: &GroupElement) -> GroupElement {
        self.reduce(g.coords.iter().map(|a| -a).collect())
    }

    pub fn generator(&self, i: usize) -> GroupElement {
        let mut c = vec![0; self.rank()];
        c[i] = 1;
        self.reduce(c)
    }
}

/// Lifts `q` into the half-open interval `[base, base + 2)` modulo `2Z`.
pub fn lift_mod2(x: &Q, base: &Q) -> Q {
    let fl = ((x - base) / 2).floor();
    x - fl * 2
}

/// Symmetric form valued in `Q/2Z` with a configurable representative window.
#[derive(Clone, Debug, PartialEq)]
pub struct SymForm {
    pub matrix: Vec<Vec<Q>>,
    pub lift_base: Q,
}

impl SymForm {
    pub fn new(matrix: Vec<Vec<Q>>) -> Self {
        SymForm {
            matrix,
            lift_base: Q::zero(),
        }
    }

    pub fn with_lift_base(mut self, base: Q) -> Self {
        self.lift_base = base;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        let r = self.matrix.len();
        (0..r).all(|i| (0..r).all(|j| self.matrix[i][j] == self.matrix[j][i]))
    }

    /// `gᵀ M h` before reduction.
    pub fn raw(&self, g: &GroupElement, h: &GroupElement) -> Q {
        let mut acc = Q::zero();
        for (i, gi) in g.coords.iter().enumerate() {
            if *gi == 0 {
                continue;
            }
            for (j, hj) in h.coords.iter().enumerate() {
                if *hj != 0 {
                    acc += self.matrix[i][j] * (gi * hj);
                }
            }
        }
        acc
    }

    pub fn lift(&self, q: &Q) -> Q {
        lift_mod2(q, &self.lift_base)
    }

    pub fn eval(&self, g: &GroupElement, h: &GroupElement) -> Q {
        self.lift(&self.raw(g, h))
    }

    /// Least common denominator of the matrix entries.
    pub fn denominator(&self) -> i64 {
        use num_integer::Integer;
        self.matrix
            .iter()
            .flatten()
            .map(|x| *x.denom())
            .fold(1, |a, b| a.lcm(&b))
    }
}

/// Alternating form `c(g,h) = ζ_order^{gᵀAh}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltForm {
    pub exponents: Vec<Vec<i64>>,
    pub order: u32,
}

impl AltForm {
    pub fn trivial(rank: usize) -> Self {
        AltForm {
            exponents: vec![vec![0; rank]; rank],
            order: 1,
        }
    }

    pub fn is_alternating(&self) -> bool {
        let r = self.exponents.len();
        (0..r).all(|i| (0..r).all(|j| self.exponents[i][j] == -self.exponents[j][i]))
    }

    pub fn exponent(&self, g: &GroupElement, h: &GroupElement) -> i64 {
        let mut acc = 0;
        for (i, gi) in g.coords.iter().enumerate() {
            for (j, hj) in h.coords.iter().enumerate() {
                acc += gi * self.exponents[i][j] * hj;
            }
        }
        acc
    }

    pub fn eval(&self, g: &GroupElement, h: &GroupElement) -> Cyclo {
        Cyclo::root_of_unity(self.order.max(1), self.exponent(g, h))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Action {
    /// `S = G` acting on itself by translation.
    Regular,
    /// A single sector fixed by every element.
    Trivial,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pairing {
    /// `(g, s)` given by the symmetric form (requires `S = G`).
    Form,
    /// `(generator i, sector index) -> value`.
    Table(BTreeMap<(usize, usize), Q>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GSet {
    pub elements: Vec<GroupElement>,
    pub action: Action,
    pub pairing: Pairing,
}

impl GSet {
    pub fn single(rank: usize) -> Self {
        GSet {
            elements: vec![GroupElement::zero(rank)],
            action: Action::Trivial,
            pairing: Pairing::Form,
        }
    }

    pub fn act(&self, group: &Group, g: &GroupElement, s: &GroupElement) -> GroupElement {
        match self.action {
            Action::Regular => group.add(g, s),
            Action::Trivial => s.clone(),
        }
    }

    fn index(&self, s: &GroupElement) -> Option<usize> {
        self.elements.iter().position(|x| x == s)
    }

    /// Unlifted `(g, s)`, additive in `g`.
    pub fn raw_pairing(&self, form: &SymForm, g: &GroupElement, s: &GroupElement) -> Q {
        match (&self.pairing, &self.action) {
            (Pairing::Form, Action::Regular) => form.raw(g, s),
            (Pairing::Form, Action::Trivial) => Q::zero(),
            (Pairing::Table(t), _) => {
                let si = self.index(s).expect("sector belongs to the G-set");
                g.coords
                    .iter()
                    .enumerate()
                    .map(|(i, c)| t.get(&(i, si)).cloned().unwrap_or_default() * *c)
                    .sum()
            }
        }
    }
}

/// Complete grading data: group, forms, sector set.
#[derive(Clone, Debug, PartialEq)]
pub struct Grading {
    pub group: Group,
    pub sym: SymForm,
    pub alt: AltForm,
    pub gset: GSet,
}

impl Grading {
    /// Root lattice of sl2 at level `level`: `G = Zα`, `(α,α) = 2/level`,
    /// `c ≡ 1`, sectors are `G` itself.
    pub fn sl2(level: &Q) -> Self {
        Grading {
            group: Group::free(1),
            sym: SymForm::new(vec![vec![qi(2) / level]]),
            alt: AltForm::trivial(1),
            gset: GSet {
                elements: Vec::new(),
                action: Action::Regular,
                pairing: Pairing::Form,
            },
        }
    }

    /// `G = (Z/4)^2` with zero symmetric form and `c(e1,e2) = ζ_4^{-1}`.
    pub fn quantum_torus() -> Self {
        let group = Group {
            torsion: vec![4, 4],
        };
        let mut elements = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                elements.push(group.element(&[a, b]));
            }
        }
        Grading {
            group,
            sym: SymForm::new(vec![vec![Q::zero(); 2]; 2]),
            alt: AltForm {
                exponents: vec![vec![0, -1], vec![1, 0]],
                order: 4,
            },
            gset: GSet {
                elements,
                action: Action::Regular,
                pairing: Pairing::Form,
            },
        }
    }

    pub fn with_lift_base(mut self, base: Q) -> Self {
        self.sym.lift_base = base;
        self
    }

    pub fn lift_base(&self) -> &Q {
        &self.sym.lift_base
    }

    pub fn rank(&self) -> usize {
        self.group.rank()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement::zero(self.rank())
    }

    pub fn add(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        self.group.add(g, h)
    }

    /// Lifted `(g, h)` on `G`.
    pub fn pair(&self, g: &GroupElement, h: &GroupElement) -> Q {
        self.sym.eval(g, h)
    }

    /// Lifted `(g, s)` for a sector `s`.
    pub fn pair_gs(&self, g: &GroupElement, s: &GroupElement) -> Q {
        self.sym.lift(&self.gset.raw_pairing(&self.sym, g, s))
    }

    pub fn c(&self, g: &GroupElement, h: &GroupElement) -> Cyclo {
        self.alt.eval(g, h)
    }

    pub fn act(&self, g: &GroupElement, s: &GroupElement) -> GroupElement {
        self.gset.act(&self.group, g, s)
    }
}

fn is_even_integer(x: &Q) -> bool {
    x.is_integer() && x.numer() % 2 == 0
}

/// Checks `(g1+g2, g3+s) = (g1,g3)+(g2,g3)+(g1,s)+(g2,s)` modulo `2Z` over
/// all generator triples and sectors.
pub fn check_gset(grading: &Grading) -> CheckReport {
    let g = &grading.group;
    let r = g.rank();
    let mut rep = CheckReport::new("gset_compatibility", format!("generators={r}"));
    let gens: Vec<GroupElement> = (0..r).map(|i| g.generator(i)).collect();
    let mut sectors = grading.gset.elements.clone();
    if sectors.is_empty() {
        sectors.push(grading.zero());
    }
    let gs = &grading.gset;
    let f = &grading.sym;
    for (i1, g1) in gens.iter().enumerate() {
        for (i2, g2) in gens.iter().enumerate() {
            for (i3, g3) in gens.iter().enumerate() {
                for s in &sectors {
                    rep.checked += 1;
                    let target = grading.act(g3, s);
                    if matches!(gs.pairing, Pairing::Table(_)) && !gs.elements.contains(&target) {
                        rep.skipped += 1;
                        continue;
                    }
                    let lhs = gs.raw_pairing(f, &g.add(g1, g2), &target);
                    let rhs = f.raw(g1, g3)
                        + f.raw(g2, g3)
                        + gs.raw_pairing(f, g1, s)
                        + gs.raw_pairing(f, g2, s);
                    if !is_even_integer(&(lhs - rhs)) {
                        rep.fail(format!(
                            "g1=e{i1} g2=e{i2} g3=e{i3} s={s}: lhs={} rhs={}",
                            fmt_q(&lhs),
                            fmt_q(&rhs)
                        ));
                    }
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::q;

    fn e(c: &[i64]) -> GroupElement {
        GroupElement::new(c.to_vec())
    }

    #[test]
    fn sl2_values() {
        let gr = Grading::sl2(&qi(3));
        assert_eq!(gr.pair(&e(&[1]), &e(&[1])), q(2, 3));
        assert_eq!(gr.pair(&e(&[0]), &e(&[1])), qi(0));
        assert_eq!(gr.pair(&e(&[1]), &e(&[-1])), q(4, 3));
        let shifted = gr.clone().with_lift_base(qi(2));
        assert_eq!(shifted.pair(&e(&[1]), &e(&[-1])), q(10, 3));
        let neg = gr.with_lift_base(qi(-2));
        assert_eq!(neg.pair(&e(&[1]), &e(&[-1])), q(-2, 3));
    }

    #[test]
    fn alternating_values() {
        let a = AltForm {
            exponents: vec![vec![0, 1], vec![-1, 0]],
            order: 4,
        };
        assert_eq!(a.eval(&e(&[1, 0]), &e(&[0, 1])), Cyclo::root_of_unity(4, 1));
        assert!(a.eval(&e(&[1, 1]), &e(&[1, 1])).is_one());
        assert!(AltForm::trivial(2).eval(&e(&[1, 0]), &e(&[0, 1])).is_one());
    }

    #[test]
    fn gset_checks() {
        let gr = Grading::sl2(&qi(3));
        assert!(check_gset(&gr).passed);
        let mut single = Grading::sl2(&qi(3));
        single.gset = GSet::single(1);
        single.sym = SymForm::new(vec![vec![qi(0)]]);
        assert!(check_gset(&single).passed);
        // A table pairing with one entry perturbed by 1/3.
        let sectors: Vec<GroupElement> = (-3..=3).map(|k| e(&[k])).collect();
        let mut table = BTreeMap::new();
        for (i, s) in sectors.iter().enumerate() {
            let mut v = q(2 * s.coords[0], 3);
            if s.coords[0] == 1 {
                v += q(1, 3);
            }
            table.insert((0, i), v);
        }
        let mut bad = Grading::sl2(&qi(3));
        bad.gset = GSet {
            elements: sectors,
            action: Action::Regular,
            pairing: Pairing::Table(table),
        };
        let rep = check_gset(&bad);
        assert!(!rep.passed);
        assert!(rep.counterexample.unwrap().contains("s=(0)"));
    }

    proptest::proptest! {
        #[test]
        fn bilinear_mod_two(a in -5i64..5, b in -5i64..5, c in -5i64..5) {
            let gr = Grading::sl2(&qi(3));
            let d = gr.pair(&e(&[a + b]), &e(&[c])) - gr.pair(&e(&[a]), &e(&[c])) - gr.pair(&e(&[b]), &e(&[c]));
            proptest::prop_assert!(is_even_integer(&d));
            proptest::prop_assert_eq!(gr.pair(&e(&[a]), &e(&[c])), gr.pair(&e(&[c]), &e(&[a])));
        }

        #[test]
        fn c_bilinear(a in -4i64..4, b in -4i64..4, x in -4i64..4, y in -4i64..4, p in -4i64..4, q in -4i64..4) {
            let gr = Grading::quantum_torus();
            let g1 = gr.group.element(&[a, b]);
            let g2 = gr.group.element(&[x, y]);
            let h = gr.group.element(&[p, q]);
            proptest::prop_assert_eq!(gr.c(&gr.add(&g1, &g2), &h), &gr.c(&g1, &h) * &gr.c(&g2, &h));
            proptest::prop_assert!((&gr.c(&g1, &h) * &gr.c(&h, &g1)).is_one());
            proptest::prop_assert!(gr.c(&g1, &g1).is_one());
        }
    }
}
