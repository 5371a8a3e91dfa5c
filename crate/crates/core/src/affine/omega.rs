//! The vacuum space `Ω = {w : h(n)w = 0, n ≥ 1}` of the Verma truncation,
//! computed slice by slice as an exact nullspace.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::Zero;

use super::verma::{degree, Mono, VVec, Verma};
use crate::error::{Error, Result};
use crate::fields::{BasisInfo, TruncatedModule, Vector};
use crate::grading::{Grading, GroupElement};
use crate::linalg::nullspace;
use crate::report::CheckReport;
use crate::scalars::{qi, Cyclo, Rational, Q};

use super::fock::partition_count;

#[derive(Clone, Debug)]
pub struct OmegaSlice {
    pub monos: Vec<Mono>,
    pub basis: Vec<VVec>,
    /// Column of `monos` at which each basis vector has its unit entry.
    pub free: Vec<usize>,
    /// Global index of the first basis vector of this slice.
    pub offset: usize,
}

#[derive(Debug)]
pub struct OmegaSpace {
    pub verma: Arc<Verma>,
    /// Keyed by `(degree, sector)`.
    pub slices: BTreeMap<(i64, i64), OmegaSlice>,
    entries: Vec<(i64, i64, usize)>,
}

impl OmegaSpace {
    pub fn extract(verma: Arc<Verma>) -> Result<Self> {
        let h = verma.data.cartan;
        let mut by_slice: BTreeMap<(i64, i64), Vec<Mono>> = BTreeMap::new();
        for m in verma.basis() {
            by_slice
                .entry((degree(m), verma.weight(m)))
                .or_default()
                .push(m.clone());
        }
        let positions: HashMap<&Mono, usize> = by_slice
            .values()
            .flat_map(|ms| ms.iter().enumerate().map(|(i, m)| (m, i)))
            .collect();
        let mut slices = BTreeMap::new();
        let mut entries = Vec::new();
        for (&(d, k), monos) in &by_slice {
            let mut rows: Vec<Vec<Rational>> = Vec::new();
            for n in 1..=d {
                let Some(target) = by_slice.get(&(d - n, k)) else {
                    continue;
                };
                let mut block = vec![vec![Rational::zero(); monos.len()]; target.len()];
                for (c, m) in monos.iter().enumerate() {
                    for (t, x) in verma.act(h, n, &Verma::mono(m.clone())).iter() {
                        block[positions[t]][c] = x.clone();
                    }
                }
                rows.extend(block.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
            }
            let (basis, free) = nullspace(&rows, monos.len());
            let basis: Vec<VVec> = basis
                .into_iter()
                .map(|col| {
                    monos
                        .iter()
                        .cloned()
                        .zip(col)
                        .filter(|(_, c)| !c.is_zero())
                        .collect()
                })
                .collect();
            let offset = entries.len();
            for i in 0..basis.len() {
                entries.push((d, k, i));
            }
            slices.insert(
                (d, k),
                OmegaSlice {
                    monos: monos.clone(),
                    basis,
                    free,
                    offset,
                },
            );
        }
        Ok(OmegaSpace {
            verma,
            slices,
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn cutoff(&self) -> i64 {
        self.verma.cutoff
    }

    /// `(degree, sector, index in slice)` of a global basis index.
    pub fn entry(&self, j: usize) -> (i64, i64, usize) {
        self.entries[j]
    }

    pub fn vector(&self, j: usize) -> &VVec {
        let (d, k, i) = self.entries[j];
        &self.slices[&(d, k)].basis[i]
    }

    pub fn dims_by_degree(&self) -> Vec<usize> {
        let mut out = vec![0; self.cutoff() as usize + 1];
        for (d, _, _) in &self.entries {
            out[*d as usize] += 1;
        }
        out
    }

    /// Coordinates of a homogeneous vector of `Ω` in the global basis;
    /// fails if the vector is not in `Ω`.
    pub fn coords(&self, d: i64, k: i64, v: &VVec) -> Result<Vector> {
        if v.is_zero() {
            return Ok(Vector::new());
        }
        let Some(slice) = self.slices.get(&(d, k)) else {
            return Err(Error::HypothesisViolated(format!(
                "no slice ({d}, {k}) for a nonzero vector"
            )));
        };
        let mut recon = VVec::new();
        let mut out = Vector::new();
        for (i, &f) in slice.free.iter().enumerate() {
            let c = v.get(&slice.monos[f]);
            if !c.is_zero() {
                recon.add_scaled(&slice.basis[i], &c);
                out.add_at(slice.offset + i, &Cyclo::from_rational(c));
            }
        }
        if recon != *v {
            return Err(Error::HypothesisViolated(format!(
                "vector of degree {d}, sector {k} is not in the vacuum space: {}",
                self.verma.fmt_vec(v)
            )));
        }
        Ok(out)
    }

    /// Ω-degree `d - k²/ℓ` (the conformal-weight shift removing the
    /// Heisenberg part).
    pub fn shifted_degree(&self, d: i64, k: i64) -> Q {
        qi(d) - qi(k * k) / self.verma.data.level
    }

    /// The truncated module seen by fields: sectors `kα`, degrees `d - k²/ℓ`,
    /// complete up to `D - k²/ℓ` in every sector.
    pub fn module(&self, grading: Grading) -> TruncatedModule {
        let basis = self
            .entries
            .iter()
            .map(|&(d, k, i)| {
                let lead = &self.slices[&(d, k)].monos[self.slices[&(d, k)].free[i]];
                BasisInfo {
                    sector: GroupElement::new(vec![k]),
                    degree: self.shifted_degree(d, k),
                    label: format!("w[{d},{k},{i}]={}+...", self.verma.label(lead)),
                }
            })
            .collect();
        let cut = self.cutoff();
        let level = self.verma.data.level;
        let vacuum = self.slices.get(&(0, 0)).map(|s| s.offset);
        TruncatedModule::new(
            "omega",
            grading,
            basis,
            move |s: &GroupElement| {
                let k = s.coords[0];
                Some(qi(cut) - qi(k * k) / level)
            },
            vacuum,
        )
    }

    /// `h(n) w = 0` for every basis vector and `1 ≤ n ≤ D`, plus the count
    /// `Σ_d dim Ω_d · p(D' - d) = dim M_{D'}` for every `D' ≤ D`.
    pub fn check(&self) -> CheckReport {
        let mut rep = CheckReport::new("omega.extraction", format!("cutoff={}", self.cutoff()));
        let h = self.verma.data.cartan;
        for j in 0..self.dim() {
            for n in 1..=self.cutoff() {
                rep.checked += 1;
                if !self.verma.act(h, n, self.vector(j)).is_zero() {
                    rep.fail(format!("h({n}) does not kill basis vector {j}"));
                }
            }
        }
        let om = self.dims_by_degree();
        let vm = self.verma.dims_by_degree();
        for top in 0..om.len() {
            let conv: usize = (0..=top)
                .map(|d| om[d] * partition_count((top - d) as i64))
                .sum();
            rep.checked += 1;
            if conv != vm[top] {
                rep.fail(format!(
                    "degree {top}: convolution {conv} vs Verma {}",
                    vm[top]
                ));
            }
        }
        rep.note(format!("dims {om:?}"));
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::super::{AffineData, E, F, H};
    use super::*;

    fn omega(d: i64) -> OmegaSpace {
        OmegaSpace::extract(Arc::new(
            Verma::build(AffineData::sl2(qi(3)).unwrap(), d).unwrap(),
        ))
        .unwrap()
    }

    #[test]
    fn dimensions_and_kernel() {
        let o = omega(5);
        assert_eq!(o.dims_by_degree(), vec![1, 2, 5, 10, 20, 36]);
        assert!(o.check().passed);
    }

    #[test]
    fn degree_one_slice() {
        // h(1) on span{e(-1)1, h(-1)1, f(-1)1}: only h(-1)1 survives, with 2ℓ.
        let o = omega(1);
        assert_eq!(o.slices[&(1, 1)].basis, vec![Verma::mono(vec![(E, -1)])]);
        assert_eq!(o.slices[&(1, -1)].basis, vec![Verma::mono(vec![(F, -1)])]);
        assert!(o.slices[&(1, 0)].basis.is_empty());
        let bad = Verma::mono(vec![(H, -1)]);
        assert!(o.coords(1, 0, &bad).is_err());
    }

    #[test]
    fn module_degrees() {
        let o = omega(3);
        let m = o.module(Grading::sl2(&qi(3)));
        let s = GroupElement::new(vec![1]);
        assert_eq!(m.lower_bound(&s), Some(qi(1) - qi(1) / qi(3)));
        assert_eq!(m.cutoff(&s), Some(qi(3) - qi(1) / qi(3)));
        assert_eq!(m.vacuum, Some(0));
    }
}
