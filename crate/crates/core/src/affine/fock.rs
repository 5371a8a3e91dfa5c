//! Heisenberg Fock space `M(ℓ)` on partitions.

use num_traits::Zero;

use super::LinComb;
use crate::report::CheckReport;
use crate::scalars::{int, Rational};

/// Parts in weakly decreasing order; `[2,1]` is `h(-2)h(-1)·1`.
pub type Partition = Vec<i64>;
pub type FVec = LinComb<Partition>;

#[derive(Clone, Debug)]
pub struct Fock {
    /// `[h(m), h(n)] = m κ δ_{m+n,0}`.
    pub kappa: Rational,
    pub cutoff: i64,
    basis: Vec<Partition>,
}

fn partitions(n: i64, max: i64, prefix: &mut Partition, out: &mut Vec<Partition>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    for p in (1..=max.min(n)).rev() {
        prefix.push(p);
        partitions(n - p, p, prefix, out);
        prefix.pop();
    }
}

/// Partitions of `n`, parts weakly decreasing, in reverse lexicographic order.
pub fn partitions_of(n: i64) -> Vec<Partition> {
    let mut out = Vec::new();
    partitions(n, n, &mut Vec::new(), &mut out);
    out
}

pub fn partition_count(n: i64) -> usize {
    if n < 0 {
        0
    } else {
        partitions_of(n).len()
    }
}

impl Fock {
    /// Fock space for the Cartan element `h` with `⟨h,h⟩ = norm` at level `ℓ`.
    pub fn new(norm: Rational, level: Rational, cutoff: i64) -> Self {
        let basis = (0..=cutoff).flat_map(partitions_of).collect();
        Fock {
            kappa: norm * level,
            cutoff,
            basis,
        }
    }

    pub fn basis(&self) -> &[Partition] {
        &self.basis
    }

    pub fn degree(p: &Partition) -> i64 {
        p.iter().sum()
    }

    pub fn label(p: &Partition) -> String {
        let mut s: String = p.iter().map(|k| format!("h(-{k})")).collect();
        s.push('1');
        s
    }

    pub fn vacuum() -> FVec {
        FVec::single(Vec::new(), int(1))
    }

    pub fn act_part(&self, n: i64, p: &Partition) -> FVec {
        if n < 0 {
            let mut q = p.clone();
            let pos = q.iter().position(|&x| x < -n).unwrap_or(q.len());
            q.insert(pos, -n);
            return FVec::single(q, int(1));
        }
        if n == 0 {
            return FVec::new();
        }
        let count = p.iter().filter(|&&x| x == n).count() as i64;
        if count == 0 {
            return FVec::new();
        }
        let mut q = p.clone();
        let pos = q.iter().position(|&x| x == n).unwrap();
        q.remove(pos);
        FVec::single(q, int(count * n) * &self.kappa)
    }

    /// `h(n) v`.
    pub fn act(&self, n: i64, v: &FVec) -> FVec {
        let mut acc = FVec::new();
        for (p, c) in v.iter() {
            acc.add_scaled(&self.act_part(n, p), c);
        }
        acc
    }

    /// `[h(m), h(n)] = m κ δ_{m+n,0}` as matrices on the truncation.
    pub fn check_heisenberg(&self, max_mode: i64) -> CheckReport {
        let mut rep = CheckReport::new(
            "fock.heisenberg",
            format!("cutoff={} |m|,|n|<={max_mode}", self.cutoff),
        );
        for m in -max_mode..=max_mode {
            for n in -max_mode..=max_mode {
                for p in &self.basis {
                    let d = Self::degree(p);
                    if d - m > self.cutoff || d - n > self.cutoff || d - m - n > self.cutoff {
                        rep.skipped += 1;
                        continue;
                    }
                    let v = FVec::single(p.clone(), int(1));
                    let lhs = self
                        .act(m, &self.act(n, &v))
                        .sub(&self.act(n, &self.act(m, &v)));
                    let c = if m + n == 0 {
                        int(m) * &self.kappa
                    } else {
                        Rational::zero()
                    };
                    rep.checked += 1;
                    if lhs != v.scale(&c) {
                        rep.fail(format!("[h({m}), h({n})] on {}", Self::label(p)));
                    }
                }
            }
        }
        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..8).map(partition_count).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
    }

    #[test]
    fn heisenberg_relations() {
        let f = Fock::new(int(2), int(3), 4);
        assert!(f.check_heisenberg(3).passed);
        assert_eq!(
            f.act(1, &f.act(-1, &Fock::vacuum())),
            Fock::vacuum().scale(&int(6))
        );
    }
}
