//! The functor `E(U) = M(ℓ) ⊗ U` rebuilding an affine module from its
//! vacuum space, with `a(z) ↦ E^-(-α/ℓ,z)E^+(-α/ℓ,z) ⊗ Z_U(a,z)`.

use std::sync::Arc;

use num_traits::Zero;

use super::fock::{Fock, Partition};
use super::heisenberg::{exp_heisenberg, Side};
use super::omega::OmegaSpace;
use super::zops::ZOps;
use super::{AffineData, Letter, LinComb};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::report::CheckReport;
use crate::scalars::{fmt_rational, int, Rational};

pub type Key = (Partition, usize);
pub type EVec = LinComb<Key>;

pub struct EModule {
    pub omega: Arc<OmegaSpace>,
    pub zops: Arc<ZOps>,
    pub fock: Fock,
    pub cutoff: i64,
    basis: Vec<Key>,
}

impl EModule {
    pub fn build(omega: Arc<OmegaSpace>, zops: Arc<ZOps>, cutoff: i64) -> Result<Self> {
        if cutoff > omega.cutoff() {
            return Err(Error::WindowUnderflow(format!(
                "E(U) cutoff {cutoff} exceeds the vacuum-space cutoff {}",
                omega.cutoff()
            )));
        }
        let data = &omega.verma.data;
        let h = data.cartan;
        let fock = Fock::new(data.form[h][h].clone(), data.level_rat(), cutoff);
        let mut basis = Vec::new();
        for total in 0..=cutoff {
            for j in 0..omega.dim() {
                let d = omega.entry(j).0;
                if d > total {
                    continue;
                }
                for p in fock.basis().iter().filter(|p| Fock::degree(p) == total - d) {
                    basis.push((p.clone(), j));
                }
            }
        }
        Ok(EModule {
            omega,
            zops,
            fock,
            cutoff,
            basis,
        })
    }

    pub fn data(&self) -> &AffineData {
        &self.omega.verma.data
    }

    pub fn basis(&self) -> &[Key] {
        &self.basis
    }

    pub fn degree(&self, k: &Key) -> i64 {
        Fock::degree(&k.0) + self.omega.entry(k.1).0
    }

    pub fn dims_by_degree(&self) -> Vec<usize> {
        let mut out = vec![0; self.cutoff as usize + 1];
        for k in &self.basis {
            out[self.degree(k) as usize] += 1;
        }
        out
    }

    pub fn label(&self, k: &Key) -> String {
        format!("{}⊗w{}", Fock::label(&k.0), k.1)
    }

    fn z_u(&self, a: Letter, p: i64, j: usize) -> Result<Vec<(usize, Rational)>> {
        let (d, k, _) = self.omega.entry(j);
        let v = self.zops.mode(a, p, self.omega.vector(j))?;
        let c = self.omega.coords(d + 1 - p, k + self.data().root[a], &v)?;
        Ok(c.iter()
            .map(|(i, x)| (i, x.as_rational().expect("rational coordinates").clone()))
            .collect())
    }

    /// `x(m)` on a basis key.
    pub fn act_key(&self, x: Letter, m: i64, key: &Key) -> Result<EVec> {
        let data = self.data();
        let (part, j) = key;
        if self.degree(key) - m > self.cutoff {
            return Err(Error::OutOfTruncation {
                sector: "E(U)".into(),
                degree: (self.degree(key) - m).to_string(),
                cutoff: self.cutoff.to_string(),
            });
        }
        let fv = LinComb::single(part.clone(), int(1));
        if data.root[x] == 0 {
            if m != 0 {
                let scale = if x == data.cartan {
                    int(1)
                } else {
                    Rational::zero()
                };
                let out = self.fock.act(m, &fv);
                return Ok(out
                    .iter()
                    .map(|(p, c)| ((p.clone(), *j), c * &scale))
                    .collect());
            }
            let k = self.omega.entry(*j).1;
            let w = if x == data.cartan {
                int(2 * k)
            } else {
                Rational::zero()
            };
            return Ok(EVec::single(key.clone(), w));
        }
        let beta = -ZOps::beta(data, x);
        let h = |n: i64, v: &LinComb<Partition>| self.fock.act(n, v);
        let plus = exp_heisenberg(Side::Plus, &beta, Fock::degree(part) as usize, &fv, h);
        let target = self.degree(key) - m;
        let mut out = EVec::new();
        for (jp, ep) in plus.iter().enumerate() {
            if ep.is_zero() {
                continue;
            }
            for jm in 0..=target.max(0) {
                let p = m + 1 + jm - jp as i64;
                let zu = self.z_u(x, p, *j)?;
                if zu.is_empty() {
                    continue;
                }
                let em = exp_heisenberg(Side::Minus, &beta, jm as usize, ep, h);
                for (part2, c1) in em[jm as usize].iter() {
                    for (i, c2) in &zu {
                        out.add_term((part2.clone(), *i), c1 * c2);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn act(&self, x: Letter, m: i64, v: &EVec) -> Result<EVec> {
        let mut out = EVec::new();
        for (k, c) in v.iter() {
            out.add_scaled(&self.act_key(x, m, k)?, c);
        }
        Ok(out)
    }

    fn fmt(&self, v: &EVec) -> String {
        if v.is_zero() {
            return "0".into();
        }
        v.iter()
            .map(|(k, c)| format!("({})*{}", fmt_rational(c), self.label(k)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Affine bracket relations on every basis vector of degree `≤ max_degree`
    /// whose intermediate degrees stay within the cutoff.
    pub fn check_affine_relations(
        &self,
        expected: &AffineData,
        max_mode: i64,
        max_degree: i64,
        exec: Exec,
    ) -> CheckReport {
        let dim = self.data().dim();
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
        let names = &self.data().names;
        let results = exec.map(jobs, |(a, b, m, n)| {
            let mut rep = CheckReport::new("", "");
            for key in self.basis.iter().filter(|k| self.degree(k) <= max_degree) {
                let v = EVec::single(key.clone(), int(1));
                let res = (|| -> Result<(EVec, EVec)> {
                    let lhs = self.act(a, m, &self.act(b, n, &v)?)?.sub(&self.act(
                        b,
                        n,
                        &self.act(a, m, &v)?,
                    )?);
                    let mut rhs = EVec::new();
                    for (z, c) in &expected.bracket[a][b] {
                        rhs.add_scaled(&self.act(*z, m + n, &v)?, c);
                    }
                    if m + n == 0 {
                        rhs.add_scaled(&v, &(int(m) * &expected.form[a][b] * expected.level_rat()));
                    }
                    Ok((lhs, rhs))
                })();
                match res {
                    Ok((l, r)) => {
                        rep.checked += 1;
                        if l != r {
                            rep.fail(format!(
                                "[{}({m}), {}({n})] on {}: lhs {} rhs {}",
                                names[a],
                                names[b],
                                self.label(key),
                                self.fmt(&l),
                                self.fmt(&r)
                            ));
                        }
                    }
                    Err(e) if e.is_out_of_truncation() => rep.skipped += 1,
                    Err(e) => rep.fail(e.to_string()),
                }
            }
            rep
        });
        let mut rep = CheckReport::new(
            "eu.relations",
            format!("cutoff={} |m|,|n|<={max_mode}", self.cutoff),
        );
        for r in &results {
            rep.absorb(r);
        }
        rep
    }

    /// `dim E(U)_d = dim M(ℓ,0)_d` for `d ≤ max_degree`.
    pub fn check_dimensions(&self, max_degree: i64) -> CheckReport {
        let mut rep = CheckReport::new("eu.dimensions", format!("degree<={max_degree}"));
        let e = self.dims_by_degree();
        let v = self.omega.verma.dims_by_degree();
        for d in 0..=max_degree.min(self.cutoff) as usize {
            rep.checked += 1;
            if e[d] != v[d] {
                rep.fail(format!("degree {d}: E(U) {} vs Verma {}", e[d], v[d]));
            }
        }
        rep.note(format!(
            "dims {:?}",
            &e[..=max_degree.min(self.cutoff) as usize]
        ));
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::super::verma::Verma;
    use super::super::{E, F, H};
    use super::*;
    use crate::scalars::qi;

    fn module(d: i64) -> EModule {
        let verma = Arc::new(Verma::build(AffineData::sl2(qi(3)).unwrap(), d).unwrap());
        let omega = Arc::new(OmegaSpace::extract(verma.clone()).unwrap());
        EModule::build(omega, Arc::new(ZOps::new(verma)), d).unwrap()
    }

    #[test]
    fn vacuum_sector() {
        let m = module(2);
        let one = EVec::single((vec![], 0), int(1));
        for x in [E, H, F] {
            for n in 0..2 {
                assert!(m.act(x, n, &one).unwrap().is_zero());
            }
        }
        let w = m.act(E, 1, &m.act(F, -1, &one).unwrap()).unwrap();
        assert_eq!(w, one.scale(&int(3)));
    }

    #[test]
    fn relations_and_dimensions() {
        let m = module(3);
        assert!(m.check_dimensions(3).passed);
        let rep = m.check_affine_relations(&m.data().clone(), 2, 2, Exec::Sequential);
        assert!(rep.passed, "{rep:?}");
        let bad = m.data().with_structure_fault(H, E, E, int(1));
        assert!(
            !m.check_affine_relations(&bad, 1, 1, Exec::Sequential)
                .passed
        );
    }
}
