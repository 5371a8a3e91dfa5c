//! Coefficients of the exponentials `E^±(βh, z)`.
//!
//! `E^+(βh,z) = Σ_j E^+_j z^{-j}` and `E^-(βh,z) = Σ_j E^-_j z^{j}` satisfy
//! `j E^+_j = Σ_{m=1}^{j} β h(m) E^+_{j-m}` and
//! `j E^-_j = -Σ_{m=1}^{j} β h(-m) E^-_{j-m}`.

use num_traits::Zero;

use super::LinComb;
use crate::scalars::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// `[E_0 v, E_1 v, ..., E_{jmax} v]` for `E^±(βh, z)`, where `h(n)` is given
/// by `h`.
pub fn exp_heisenberg<K: Ord + Clone>(
    side: Side,
    beta: &Rational,
    jmax: usize,
    v: &LinComb<K>,
    h: impl Fn(i64, &LinComb<K>) -> LinComb<K>,
) -> Vec<LinComb<K>> {
    let mut out = vec![v.clone()];
    if beta.is_zero() {
        out.resize(jmax + 1, LinComb::new());
        return out;
    }
    for j in 1..=jmax {
        let mut acc = LinComb::new();
        for m in 1..=j {
            let prev = &out[j - m];
            if prev.is_zero() {
                continue;
            }
            let (mode, sign) = match side {
                Side::Plus => (m as i64, int(1)),
                Side::Minus => (-(m as i64), int(-1)),
            };
            acc.add_scaled(&h(mode, prev), &sign);
        }
        out.push(acc.scale(&(beta / int(j as i64))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::fock::{FVec, Fock};
    use super::*;
    use crate::scalars::{binomial, rat};

    #[test]
    fn plus_fixes_vacuum_and_zero_coefficient_is_identity() {
        let f = Fock::new(int(2), int(3), 3);
        let e = exp_heisenberg(Side::Plus, &rat(1, 3), 3, &Fock::vacuum(), |n, v| {
            f.act(n, v)
        });
        assert_eq!(e[0], Fock::vacuum());
        assert!(e[1..].iter().all(|x| x.is_zero()));
        let w = FVec::single(vec![2, 1], int(1));
        let e0 = exp_heisenberg(Side::Minus, &int(0), 3, &w, |n, v| f.act(n, v));
        assert_eq!(e0[0], w);
        assert!(e0[1..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn minus_on_vacuum_first_terms() {
        // E^-(βh,z)1 = 1 - β h(-1) z + (β²/2 h(-1)² - β/2 h(-2)) z² + ...
        let f = Fock::new(int(2), int(3), 3);
        let b = rat(1, 3);
        let e = exp_heisenberg(Side::Minus, &b, 2, &Fock::vacuum(), |n, v| f.act(n, v));
        assert_eq!(e[1], FVec::single(vec![1], -b.clone()));
        let mut e2 = FVec::single(vec![1, 1], &b * &b / int(2));
        e2.add_term(vec![2], -&b / int(2));
        assert_eq!(e[2], e2);
    }

    /// `E^+(βh,z1)E^-(βh,z2) = (1 - z2/z1)^{β²κ} E^-(βh,z2)E^+(βh,z1)`,
    /// compared coefficient by coefficient up to order 3.
    #[test]
    fn exchange_factor() {
        let f = Fock::new(int(2), int(3), 6);
        let b = rat(1, 3);
        let expo = &b * &b * &f.kappa;
        let h = |n: i64, v: &FVec| f.act(n, v);
        for p in f.basis().iter().filter(|p| Fock::degree(p) <= 3) {
            let v = FVec::single(p.clone(), int(1));
            let em = exp_heisenberg(Side::Minus, &b, 3, &v, h);
            let ep = exp_heisenberg(Side::Plus, &b, 3, &v, h);
            for i in 0..=3usize {
                for j in 0..=3usize {
                    let lhs = exp_heisenberg(Side::Plus, &b, i, &em[j], h)[i].clone();
                    let mut rhs = FVec::new();
                    for k in 0..=i.min(j) {
                        let inner =
                            exp_heisenberg(Side::Minus, &b, j - k, &ep[i - k], h)[j - k].clone();
                        let c = binomial(&expo, k as u32) * int(if k % 2 == 0 { 1 } else { -1 });
                        rhs.add_scaled(&inner, &c);
                    }
                    assert_eq!(lhs, rhs, "i={i} j={j} p={p:?}");
                }
            }
        }
    }
}
