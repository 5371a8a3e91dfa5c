//! Z-operators `Z(a,z) = E^-(α/ℓ,z) a(z) E^+(α/ℓ,z) = Σ_p Z(a,p) z^{-p}` on
//! the Verma truncation. `Z(a,p)` raises degree by `1 - p`.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use parking_lot::Mutex;

use super::heisenberg::{exp_heisenberg, Side};
use super::verma::{degree, Mono, VVec, Verma};
use super::{AffineData, Letter};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::report::CheckReport;
use crate::scalars::{binomial, int, sign_pow, Rational};

pub struct ZOps {
    pub verma: Arc<Verma>,
    cache: Mutex<HashMap<(Letter, i64, Mono), Arc<VVec>>>,
}

impl ZOps {
    pub fn new(verma: Arc<Verma>) -> Self {
        ZOps {
            verma,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Coefficient `β` with `α/ℓ = β h` for the root of `a`.
    pub fn beta(data: &AffineData, a: Letter) -> Rational {
        let h = data.cartan;
        int(2 * data.root[a]) / (&data.form[h][h] * data.level_rat())
    }

    fn h(&self, n: i64, v: &VVec) -> VVec {
        self.verma.act(self.verma.data.cartan, n, v)
    }

    fn out_of_range(&self, target: i64) -> Error {
        Error::OutOfTruncation {
            sector: "verma".into(),
            degree: target.to_string(),
            cutoff: self.verma.cutoff.to_string(),
        }
    }

    /// `Z(a,p)` on a PBW monomial.
    pub fn mode_mono(&self, a: Letter, p: i64, m: &Mono) -> Result<Arc<VVec>> {
        let d = degree(m);
        let target = d + 1 - p;
        if target > self.verma.cutoff {
            return Err(self.out_of_range(target));
        }
        if target < 0 {
            return Ok(Arc::new(VVec::new()));
        }
        let key = (a, p, m.clone());
        if let Some(v) = self.cache.lock().get(&key) {
            return Ok(v.clone());
        }
        let beta = Self::beta(&self.verma.data, a);
        let v = Verma::mono(m.clone());
        let plus = exp_heisenberg(Side::Plus, &beta, d as usize, &v, |n, x| self.h(n, x));
        let mut acc = VVec::new();
        for (jp, ep) in plus.iter().enumerate() {
            if ep.is_zero() {
                continue;
            }
            for jm in 0..=target {
                // z^{jm} z^{-m-1} z^{-jp} = z^{-p}
                let mode = jm - jp as i64 + p - 1;
                let u = self.verma.act(a, mode, ep);
                if u.is_zero() {
                    continue;
                }
                let em = exp_heisenberg(Side::Minus, &beta, jm as usize, &u, |n, x| self.h(n, x));
                acc.add_assign(&em[jm as usize]);
            }
        }
        let v = Arc::new(acc);
        self.cache.lock().insert(key, v.clone());
        Ok(v)
    }

    /// `Z(a,p) v`.
    pub fn mode(&self, a: Letter, p: i64, v: &VVec) -> Result<VVec> {
        let mut acc = VVec::new();
        for (m, c) in v.iter() {
            acc.add_scaled(&*self.mode_mono(a, p, m)?, c);
        }
        Ok(acc)
    }

    /// `[h(0), Z(a,p)] = ⟨α,h⟩ Z(a,p)` and `[h(n), Z(a,p)] = 0` for
    /// `0 < |n| ≤ max_n`, on every basis vector of degree `≤ source_max`.
    pub fn check_h_commutation(
        &self,
        a: Letter,
        max_n: i64,
        window: i64,
        source_max: i64,
    ) -> CheckReport {
        let name = &self.verma.data.names[a];
        let mut rep = CheckReport::new(
            format!("z.h_commutation[{name}]"),
            format!("|p|<={window} |n|<={max_n}"),
        );
        let weight = int(2 * self.verma.data.root[a]);
        for mono in self
            .verma
            .basis()
            .iter()
            .filter(|m| degree(m) <= source_max)
        {
            let v = Verma::mono(mono.clone());
            for p in -window..=window {
                for n in -max_n..=max_n {
                    let res = (|| -> Result<VVec> {
                        let zh = self.mode(a, p, &self.h(n, &v))?;
                        let hz = self.h(n, &self.mode(a, p, &v)?);
                        Ok(hz.sub(&zh))
                    })();
                    match res {
                        Ok(lhs) => {
                            rep.checked += 1;
                            let rhs = if n == 0 {
                                self.mode(a, p, &v).unwrap().scale(&weight)
                            } else {
                                VVec::new()
                            };
                            if lhs != rhs {
                                rep.fail(format!(
                                    "[h({n}), Z({name},{p})] on {}",
                                    self.verma.label(mono)
                                ));
                            }
                        }
                        Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
                        Err(e) => {
                            rep.fail(e.to_string());
                        }
                    }
                }
            }
        }
        rep
    }

    /// Coefficient of `z1^A z2^B` in both sides of the Z-algebra relation
    /// `(1-z2/z1)^γ Z(u,z1)Z(v,z2) - (1-z1/z2)^γ Z(v,z2)Z(u,z1) = RHS`, with
    /// `γ = ⟨α,β⟩/ℓ`. `expected` supplies the bracket and form on the right.
    pub fn relation_coefficient(
        &self,
        expected: &AffineData,
        u: Letter,
        v: Letter,
        a: i64,
        b: i64,
        w: &Mono,
    ) -> Result<(VVec, VVec)> {
        let data = &self.verma.data;
        let gamma = int(2 * data.root[u] * data.root[v]) / data.level_rat();
        let d = degree(w);
        let wv = Verma::mono(w.clone());
        let mut lhs = VVec::new();
        // Σ_i C(γ,i)(-1)^i Z(u,-A-i) Z(v,i-B) w
        let mut i = 0i64;
        while d + 1 - (i - b) >= 0 {
            let c = binomial(&gamma, i as u32) * int(sign_pow(i));
            if !c.is_zero() {
                let x = self.mode(v, i - b, &wv)?;
                lhs.add_scaled(&self.mode(u, -a - i, &x)?, &c);
            }
            i += 1;
        }
        // Σ_i C(γ,i)(-1)^i Z(v,-B-i) Z(u,i-A) w
        let mut i = 0i64;
        while d + 1 - (i - a) >= 0 {
            let c = binomial(&gamma, i as u32) * int(-sign_pow(i));
            if !c.is_zero() {
                let x = self.mode(u, i - a, &wv)?;
                lhs.add_scaled(&self.mode(v, -b - i, &x)?, &c);
            }
            i += 1;
        }
        let mut rhs = VVec::new();
        if data.root[u] + data.root[v] != 0 {
            // z1^{-1}δ(z2/z1) Z([u,v], z2)
            for (z, c) in &expected.bracket[u][v] {
                rhs.add_scaled(&self.mode(*z, -1 - a - b, &wv)?, c);
            }
        } else if a + b == -2 {
            // z1^{-1}δ(z2/z1)[u,v]z2^{-1} + ℓ⟨u,v⟩ ∂_{z2} z1^{-1}δ(z2/z1)
            for (z, c) in &expected.bracket[u][v] {
                rhs.add_scaled(&self.verma.act(*z, 0, &wv), c);
            }
            let c = expected.level_rat() * &expected.form[u][v] * int(-1 - a);
            rhs.add_scaled(&wv, &c);
        }
        Ok((lhs, rhs))
    }

    /// Runs the relation for `(u,v)` over `A, B ∈ [-window, window]` on the
    /// given source vectors; coefficients leaving the truncation are skipped.
    pub fn check_z_relations(
        &self,
        expected: &AffineData,
        u: Letter,
        v: Letter,
        window: i64,
        sources: &[Mono],
        exec: Exec,
    ) -> CheckReport {
        let names = &self.verma.data.names;
        let id = format!("z.relation[{},{}]", names[u], names[v]);
        let mut jobs = Vec::new();
        for w in sources {
            for a in -window..=window {
                for b in -window..=window {
                    jobs.push((a, b, w.clone()));
                }
            }
        }
        let results = exec.map(jobs, |(a, b, w)| {
            (
                a,
                b,
                w.clone(),
                self.relation_coefficient(expected, u, v, a, b, &w),
            )
        });
        let mut rep = CheckReport::new(
            id,
            format!("A,B in [-{window},{window}] cutoff={}", self.verma.cutoff),
        );
        for (a, b, w, r) in results {
            match r {
                Ok((l, r)) => {
                    rep.checked += 1;
                    if l != r {
                        rep.fail(format!(
                            "z1^{a} z2^{b} on {}: lhs {} rhs {}",
                            self.verma.label(&w),
                            self.verma.fmt_vec(&l),
                            self.verma.fmt_vec(&r)
                        ));
                    }
                }
                Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
                Err(e) => {
                    rep.fail(e.to_string());
                }
            }
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::super::{E, F, H};
    use super::*;
    use crate::scalars::qi;

    fn zops(d: i64) -> ZOps {
        ZOps::new(Arc::new(
            Verma::build(AffineData::sl2(qi(3)).unwrap(), d).unwrap(),
        ))
    }

    #[test]
    fn z_on_vacuum_is_regular() {
        let z = zops(3);
        let one: Mono = Vec::new();
        for p in 1..4 {
            assert!(z.mode_mono(E, p, &one).unwrap().is_zero());
        }
        assert_eq!(
            *z.mode_mono(E, 0, &one).unwrap(),
            Verma::mono(vec![(E, -1)])
        );
    }

    #[test]
    fn commutes_with_heisenberg() {
        let z = zops(4);
        assert!(z.check_h_commutation(E, 2, 2, 2).passed);
        assert!(z.check_h_commutation(F, 2, 2, 2).passed);
    }

    #[test]
    fn relations_small_window() {
        let z = zops(5);
        let sources: Vec<Mono> = vec![vec![], vec![(E, -1)], vec![(H, -1)], vec![(F, -1)]];
        let data = z.verma.data.clone();
        for (u, v) in [(E, E), (E, F), (F, E), (F, F)] {
            let rep = z.check_z_relations(&data, u, v, 2, &sources, Exec::Sequential);
            assert!(rep.passed, "{rep:?}");
            assert!(rep.checked > 0);
        }
        let bad = data.with_form_fault(E, F, int(2));
        assert!(
            !z.check_z_relations(&bad, E, F, 2, &sources, Exec::Sequential)
                .passed
        );
    }
}
