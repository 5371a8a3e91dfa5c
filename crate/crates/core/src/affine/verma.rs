//! The generalized Verma module `M(ℓ,0)` as `U(ĝ_-)·1` with an exact,
//! memoized action of every mode `x(n)`.
//!
//! Vectors are combinations of PBW monomials. A monomial is a sorted list of
//! `(letter, mode)` pairs with negative modes, ordered by letter and then by
//! increasing mode, so `e(-2)e(-1)h(-1)f(-3)·1` is already normal.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use parking_lot::Mutex;

use super::{AffineData, Letter, LinComb};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::solve_augmented;
use crate::report::CheckReport;
use crate::scalars::{fmt_rational, int, Rational};

pub type Mono = Vec<(Letter, i64)>;
pub type VVec = LinComb<Mono>;

type ActKey = (Letter, i64, Mono);

pub struct Verma {
    pub data: AffineData,
    pub cutoff: i64,
    basis: Vec<Mono>,
    index: HashMap<Mono, usize>,
    cache: Mutex<HashMap<ActKey, Arc<VVec>>>,
}

impl std::fmt::Debug for Verma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Verma(cutoff={}, dim={})", self.cutoff, self.basis.len())
    }
}

pub fn degree(m: &Mono) -> i64 {
    -m.iter().map(|(_, n)| n).sum::<i64>()
}

fn enumerate(dim: usize, budget: i64, min: (Letter, i64), prefix: &mut Mono, out: &mut Vec<Mono>) {
    out.push(prefix.clone());
    for x in min.0..dim {
        let lo = if x == min.0 { min.1 } else { -budget };
        for n in lo.max(-budget)..=-1 {
            prefix.push((x, n));
            enumerate(dim, budget + n, (x, n), prefix, out);
            prefix.pop();
        }
    }
}

impl Verma {
    pub fn build(data: AffineData, cutoff: i64) -> Result<Self> {
        if data.level.is_zero() {
            return Err(Error::InvalidLevel("level must be nonzero".into()));
        }
        if cutoff < 0 {
            return Err(Error::Config("cutoff must be nonnegative".into()));
        }
        let mut basis = Vec::new();
        enumerate(
            data.dim(),
            cutoff,
            (0, -cutoff),
            &mut Vec::new(),
            &mut basis,
        );
        basis.sort_by(|a, b| degree(a).cmp(&degree(b)).then_with(|| a.cmp(b)));
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        Ok(Verma {
            data,
            cutoff,
            basis,
            index,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn basis(&self) -> &[Mono] {
        &self.basis
    }

    pub fn index_of(&self, m: &Mono) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Eigenvalue of `h(0)/2`, i.e. the root-lattice sector.
    pub fn weight(&self, m: &Mono) -> i64 {
        m.iter().map(|(x, _)| self.data.root[*x]).sum()
    }

    pub fn label(&self, m: &Mono) -> String {
        let mut s = String::new();
        for (x, n) in m {
            s.push_str(&format!("{}({})", self.data.names[*x], n));
        }
        s.push('1');
        s
    }

    pub fn dims_by_degree(&self) -> Vec<usize> {
        let mut d = vec![0; self.cutoff as usize + 1];
        for m in &self.basis {
            d[degree(m) as usize] += 1;
        }
        d
    }

    pub fn vacuum() -> VVec {
        VVec::single(Vec::new(), int(1))
    }

    pub fn mono(m: Mono) -> VVec {
        VVec::single(m, int(1))
    }

    /// `x(n)` applied to a PBW monomial.
    pub fn act_mono(&self, x: Letter, n: i64, m: &Mono) -> Arc<VVec> {
        let key = (x, n, m.clone());
        if let Some(v) = self.cache.lock().get(&key) {
            return v.clone();
        }
        let v = Arc::new(self.straighten(x, n, m));
        self.cache.lock().insert(key, v.clone());
        v
    }

    fn straighten(&self, x: Letter, n: i64, m: &Mono) -> VVec {
        let Some(&(y, k)) = m.first() else {
            return if n < 0 {
                Self::mono(vec![(x, n)])
            } else {
                VVec::new()
            };
        };
        if n < 0 && (x, n) <= (y, k) {
            let mut out = Vec::with_capacity(m.len() + 1);
            out.push((x, n));
            out.extend_from_slice(m);
            return Self::mono(out);
        }
        // x(n) y(k) rest = y(k) x(n) rest + [x,y](n+k) rest + n<x,y> δ ℓ rest
        let rest: Mono = m[1..].to_vec();
        let inner = self.act_mono(x, n, &rest);
        let mut acc = self.act(y, k, &inner);
        for (z, c) in &self.data.bracket[x][y] {
            acc.add_scaled(&self.act_mono(*z, n + k, &rest), c);
        }
        if n + k == 0 && n != 0 {
            let c = int(n) * &self.data.form[x][y] * self.data.level_rat();
            acc.add_scaled(&Self::mono(rest), &c);
        }
        acc
    }

    /// `x(n) v`.
    pub fn act(&self, x: Letter, n: i64, v: &VVec) -> VVec {
        let mut acc = VVec::new();
        for (m, c) in v.iter() {
            acc.add_scaled(&self.act_mono(x, n, m), c);
        }
        acc
    }

    /// Applies `x_1(n_1) ... x_k(n_k)` (rightmost first).
    pub fn act_word(&self, word: &[(Letter, i64)], v: &VVec) -> VVec {
        word.iter()
            .rev()
            .fold(v.clone(), |acc, (x, n)| self.act(*x, *n, &acc))
    }

    /// Dual basis of the invariant form, `u^a = Σ_b (G^{-1})_{ba} u_b`.
    fn dual_basis(&self) -> Result<Vec<Vec<Rational>>> {
        let n = self.data.dim();
        let mut cols = Vec::new();
        for a in 0..n {
            let mut rows: Vec<Vec<Rational>> = (0..n)
                .map(|i| {
                    let mut r = self.data.form[i].clone();
                    r.push(if i == a { int(1) } else { Rational::zero() });
                    r
                })
                .collect();
            let sol = solve_augmented(&mut rows, n)
                .ok_or_else(|| Error::HypothesisViolated("degenerate invariant form".into()))?;
            cols.push(sol);
        }
        Ok(cols)
    }

    /// Dual Coxeter number read off the Casimir on the adjoint representation:
    /// `Σ_a [u_a, [u^a, x]] = 2h∨ x`.
    pub fn dual_coxeter(&self) -> Result<Rational> {
        let n = self.data.dim();
        let dual = self.dual_basis()?;
        let x = 0;
        let mut out = vec![Rational::zero(); n];
        for a in 0..n {
            for b in 0..n {
                let cb = &dual[a][b];
                if cb.is_zero() {
                    continue;
                }
                for (z, c1) in &self.data.bracket[b][x] {
                    for (w, c2) in &self.data.bracket[a][*z] {
                        out[*w] += cb * c1 * c2;
                    }
                }
            }
        }
        Ok(&out[x] / int(2))
    }

    /// `Σ_m :u(m) w(n-m):` on `v` for fixed letters, with normal ordering
    /// putting nonnegative modes on the right.
    fn normal_square(&self, u: Letter, w: Letter, n: i64, v: &VVec) -> VVec {
        let d = v.iter().map(|(m, _)| degree(m)).max().unwrap_or(0);
        let mut acc = VVec::new();
        for m in (n - 1 - d)..=(d + 1) {
            let k = n - m;
            let t = if m < 0 {
                self.act_word(&[(u, m), (w, k)], v)
            } else {
                self.act_word(&[(w, k), (u, m)], v)
            };
            acc.add_assign(&t);
        }
        acc
    }

    /// Sugawara `L(n)`; requires `ℓ + h∨ ≠ 0`.
    pub fn sugawara(&self, n: i64, v: &VVec) -> Result<VVec> {
        let k = self.data.level_rat() + self.dual_coxeter()?;
        if k.is_zero() {
            return Err(Error::InvalidLevel("critical level".into()));
        }
        let dual = self.dual_basis()?;
        let mut acc = VVec::new();
        for a in 0..self.data.dim() {
            for b in 0..self.data.dim() {
                let c = &dual[a][b];
                if !c.is_zero() {
                    acc.add_scaled(&self.normal_square(a, b, n, v), c);
                }
            }
        }
        Ok(acc.scale(&(int(1) / (int(2) * k))))
    }

    /// Heisenberg Virasoro `L_h(n)` for the Cartan element.
    pub fn heisenberg_virasoro(&self, n: i64, v: &VVec) -> VVec {
        let h = self.data.cartan;
        let c = int(1) / (int(2) * self.data.level_rat() * &self.data.form[h][h]);
        self.normal_square(h, h, n, v).scale(&c)
    }

    /// `[a(m), b(n)] = [a,b](m+n) + m<a,b>δ_{m+n,0} ℓ` on every basis vector
    /// where all intermediate degrees stay within the cutoff. The right side
    /// uses `expected`, which may carry an injected fault.
    pub fn check_affine_relations(
        &self,
        expected: &AffineData,
        max_mode: i64,
        exec: Exec,
    ) -> CheckReport {
        let dim = self.data.dim();
        let mut jobs = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                for m in -max_mode..=max_mode {
                    for n in -max_mode..=max_mode {
                        jobs.push((a, b, m, n));
                    }
                }
            }
        }
        let results = exec.map(jobs, |(a, b, m, n)| {
            let mut rep = CheckReport::new("", "");
            for mono in &self.basis {
                let d = degree(mono);
                if d - m > self.cutoff || d - n > self.cutoff || d - m - n > self.cutoff {
                    rep.skipped += 1;
                    continue;
                }
                let v = Self::mono(mono.clone());
                let lhs = self
                    .act_word(&[(a, m), (b, n)], &v)
                    .sub(&self.act_word(&[(b, n), (a, m)], &v));
                let mut rhs = VVec::new();
                for (z, c) in &expected.bracket[a][b] {
                    rhs.add_scaled(&self.act(*z, m + n, &v), c);
                }
                if m + n == 0 {
                    rhs.add_scaled(&v, &(int(m) * &expected.form[a][b] * expected.level_rat()));
                }
                rep.checked += 1;
                if lhs != rhs {
                    rep.fail(format!(
                        "[{}({m}), {}({n})] on {}: lhs {} rhs {}",
                        self.data.names[a],
                        self.data.names[b],
                        self.label(mono),
                        self.fmt_vec(&lhs),
                        self.fmt_vec(&rhs)
                    ));
                }
            }
            rep
        });
        let mut rep = CheckReport::new(
            "affine.relations",
            format!("cutoff={} |m|,|n|<={max_mode}", self.cutoff),
        );
        for r in &results {
            rep.absorb(r);
        }
        rep
    }

    pub fn fmt_vec(&self, v: &VVec) -> String {
        if v.is_zero() {
            return "0".into();
        }
        v.iter()
            .map(|(m, c)| format!("({})*{}", fmt_rational(c), self.label(m)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Basis table and sparse triplets `target source coefficient` for each
    /// listed mode.
    pub fn dump(&self, modes: &[(Letter, i64)]) -> String {
        let mut out = String::new();
        out.push_str(&format!("# basis cutoff={}\n", self.cutoff));
        for (i, m) in self.basis.iter().enumerate() {
            out.push_str(&format!(
                "{i} degree={} weight={} {}\n",
                degree(m),
                2 * self.weight(m),
                self.label(m)
            ));
        }
        for &(x, n) in modes {
            out.push_str(&format!("# {}({n})\n", self.data.names[x]));
            for (j, m) in self.basis.iter().enumerate() {
                if degree(m) - n > self.cutoff {
                    continue;
                }
                for (t, c) in self.act_mono(x, n, m).iter() {
                    if let Some(i) = self.index_of(t) {
                        out.push_str(&format!("{i} {j} {}\n", fmt_rational(c)));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::{E, F, H};
    use super::*;
    use crate::scalars::{q, qi};

    fn verma(level: i64, d: i64) -> Verma {
        Verma::build(AffineData::sl2(qi(level)).unwrap(), d).unwrap()
    }

    #[test]
    fn pbw_dimensions() {
        // coefficients of Π (1 - q^n)^{-3}
        assert_eq!(
            verma(3, 6).dims_by_degree(),
            vec![1, 3, 9, 22, 51, 108, 221]
        );
        assert_eq!(verma(3, 0).basis().len(), 1);
    }

    #[test]
    fn vacuum_is_annihilated() {
        let v = verma(3, 2);
        for x in [E, H, F] {
            for n in 0..3 {
                assert!(v.act(x, n, &Verma::vacuum()).is_zero());
            }
        }
    }

    #[test]
    fn commutator_on_vacuum() {
        let v = verma(3, 2);
        let w = v.act_word(&[(E, 1), (F, -1)], &Verma::vacuum());
        assert_eq!(w, Verma::vacuum().scale(&int(3)));
    }

    #[test]
    fn affine_relations_hold() {
        let v = verma(3, 3);
        assert!(
            v.check_affine_relations(&v.data, 2, Exec::Sequential)
                .passed
        );
        let v = Verma::build(AffineData::sl2(q(-1, 2)).unwrap(), 2).unwrap();
        assert!(
            v.check_affine_relations(&v.data, 2, Exec::Sequential)
                .passed
        );
    }

    #[test]
    fn faulted_expectation_fails() {
        let v = verma(3, 2);
        let bad = v.data.with_form_fault(E, F, int(2));
        let rep = v.check_affine_relations(&bad, 1, Exec::Sequential);
        assert!(!rep.passed);
        assert!(rep.counterexample.unwrap().contains("e(-1), f(1)"));
    }

    #[test]
    fn sugawara_derivation() {
        let v = verma(3, 4);
        assert_eq!(v.dual_coxeter().unwrap(), int(2));
        // [L(-1), x(n)] = -n x(n-1) on a few vectors
        for mono in v.basis().iter().filter(|m| degree(m) <= 2) {
            let w = Verma::mono(mono.clone());
            for x in [E, H, F] {
                for n in -1..=2 {
                    let lhs = v.sugawara(-1, &v.act(x, n, &w)).unwrap().sub(&v.act(
                        x,
                        n,
                        &v.sugawara(-1, &w).unwrap(),
                    ));
                    assert_eq!(lhs, v.act(x, n - 1, &w).scale(&int(-n)));
                }
            }
        }
        assert!(Verma::build(AffineData::sl2(qi(-2)).unwrap(), 1)
            .unwrap()
            .sugawara(-1, &Verma::vacuum())
            .is_err());
    }
}
