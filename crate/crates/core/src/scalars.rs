//! Exact scalars: arbitrary-precision rationals and elements of cyclotomic
//! fields `Q(ζ_N)`.
//!
//! A [`Cyclo`] is stored as the coefficient vector of a polynomial in `ζ_N`
//! of degree `< φ(N)`, reduced modulo the `N`-th cyclotomic polynomial, so
//! two values with the same order are equal exactly when their coefficient
//! vectors agree. Orders are normalised so that `N ≢ 2 (mod 4)` and purely
//! rational values always carry order 1. Mixed-order arithmetic lifts both
//! operands to the least common multiple of the orders.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision rational used for coefficients.
pub type Rational = BigRational;

/// Small rational used for exponents, modes, degrees and form values.
pub type Q = num_rational::Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn q_to_rat(x: &Q) -> Rational {
    Rational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

/// Parses `"p/q"` or `"p"` into a small rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let r = parse_rational(s)?;
    let n = r.numer().to_i64();
    let d = r.denom().to_i64();
    match (n, d) {
        (Some(n), Some(d)) => Ok(Q::new(n, d)),
        _ => Err(Error::Config(format!("rational out of range: {s:?}"))),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Integer value of a small rational, if integral.
pub fn q_int(x: &Q) -> Option<i64> {
    x.is_integer().then(|| x.to_integer())
}

/// Generalised binomial coefficient `C(alpha, i)` for a small rational `alpha`.
pub fn binom_q(alpha: &Q, i: u32) -> Rational {
    binomial(&q_to_rat(alpha), i)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Integer value of `q`, if it is one and fits an `i64`.
pub fn as_integer(q: &Rational) -> Option<i64> {
    if q.is_integer() {
        q.numer().to_i64()
    } else {
        None
    }
}

pub fn is_integer(q: &Rational) -> bool {
    q.is_integer()
}

/// Generalised binomial coefficient `C(alpha, i)` for rational `alpha`.
pub fn binomial(alpha: &Rational, i: u32) -> Rational {
    let mut acc = Rational::one();
    for j in 0..i {
        acc = acc * (alpha - int(j as i64)) / int(j as i64 + 1);
    }
    acc
}

/// Falling factorial `x (x-1) ... (x-i+1)`.
pub fn falling(x: &Rational, i: u32) -> Rational {
    let mut acc = Rational::one();
    for j in 0..i {
        acc *= x - int(j as i64);
    }
    acc
}

pub fn factorial(i: u32) -> Rational {
    (1..=i as i64).fold(Rational::one(), |acc, j| acc * int(j))
}

/// `(-1)^k` for an integer `k`.
pub fn sign_pow(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn euler_phi(n: u32) -> usize {
    let mut n = n as u64;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

static CYCLOTOMIC: Lazy<RwLock<HashMap<u32, Arc<Vec<BigInt>>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

/// Integer coefficients (lowest degree first) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<BigInt>> {
    assert!(n >= 1);
    if let Some(p) = CYCLOTOMIC.read().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Φ_d with d | n, d < n.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            let div = cyclotomic_polynomial(d);
            num = exact_div_monic(&num, &div);
        }
    }
    let poly = Arc::new(num);
    CYCLOTOMIC.write().insert(n, poly.clone());
    poly
}

fn exact_div_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quo = vec![BigInt::zero(); qd + 1];
    for k in (0..=qd).rev() {
        let c = rem[k + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dc) in den.iter().enumerate() {
            rem[k + j] -= &c * dc;
        }
        quo[k] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quo
}

/// Element of the cyclotomic field `Q(ζ_order)`.
#[derive(Clone, Debug)]
pub struct Cyclo {
    order: u32,
    coeffs: Vec<Rational>,
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![Rational::zero()],
        }
    }

    pub fn one() -> Self {
        Cyclo::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        Cyclo {
            order: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Cyclo::from_rational(int(n))
    }

    /// `ζ_order^k`.
    pub fn root_of_unity(order: u32, k: i64) -> Self {
        assert!(order >= 1);
        let k = k.rem_euclid(order as i64) as usize;
        let mut raw = vec![Rational::zero(); order as usize];
        raw[k] = Rational::one();
        Cyclo::from_raw(order, raw)
    }

    /// Builds `Σ raw[k] ζ_order^k` for a coefficient list of any length.
    pub fn from_raw(order: u32, raw: Vec<Rational>) -> Self {
        let mut c = Cyclo {
            order,
            coeffs: reduce(order, raw),
        };
        c.normalize();
        c
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.order == 1 && self.coeffs[0].is_one()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        (self.order == 1).then(|| &self.coeffs[0])
    }

    fn normalize(&mut self) {
        if self.order == 1 {
            return;
        }
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            let c0 = self.coeffs[0].clone();
            *self = Cyclo::from_rational(c0);
            return;
        }
        if self.order % 4 == 2 {
            // ζ_{2m} = -ζ_m^{(m+1)/2} for odd m.
            let m = self.order / 2;
            let step = ((m + 1) / 2) as usize;
            let mut raw = vec![Rational::zero(); m as usize];
            for (k, c) in self.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let e = (k * step) % m as usize;
                if k % 2 == 0 {
                    raw[e] += c;
                } else {
                    raw[e] -= c;
                }
            }
            *self = Cyclo::from_raw(m, raw);
        }
    }

    fn lift(&self, target: u32) -> Vec<Rational> {
        if self.order == target {
            return self.coeffs.clone();
        }
        debug_assert_eq!(target % self.order, 0);
        let step = (target / self.order) as usize;
        let mut raw = vec![Rational::zero(); target as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            raw[(k * step) % target as usize] += c;
        }
        reduce(target, raw)
    }

    fn common_order(&self, other: &Cyclo) -> u32 {
        self.order.lcm(&other.order)
    }

    pub fn scale(&self, q: &Rational) -> Cyclo {
        if q.is_zero() {
            return Cyclo::zero();
        }
        Cyclo {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn add_ref(&self, other: &Cyclo) -> Cyclo {
        if self.order == 1 && other.order == 1 {
            return Cyclo::from_rational(&self.coeffs[0] + &other.coeffs[0]);
        }
        let n = self.common_order(other);
        let a = self.lift(n);
        let b = other.lift(n);
        let mut c = Cyclo {
            order: n,
            coeffs: a.into_iter().zip(b).map(|(x, y)| x + y).collect(),
        };
        c.normalize();
        c
    }

    pub fn neg_ref(&self) -> Cyclo {
        Cyclo {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub_ref(&self, other: &Cyclo) -> Cyclo {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &Cyclo) -> Cyclo {
        if other.order == 1 {
            return self.scale(&other.coeffs[0]);
        }
        if self.order == 1 {
            return other.scale(&self.coeffs[0]);
        }
        let n = self.common_order(other);
        let a = self.lift(n);
        let b = other.lift(n);
        let mut raw = vec![Rational::zero(); a.len() + b.len()];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    raw[i + j] += x * y;
                }
            }
        }
        Cyclo::from_raw(n, raw)
    }

    pub fn inv(&self) -> Result<Cyclo> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.order == 1 {
            return Ok(Cyclo::from_rational(self.coeffs[0].recip()));
        }
        // Solve (multiplication-by-self matrix) · x = e_0 over Q.
        let n = self.order;
        let phi = self.coeffs.len();
        let mut cols = Vec::with_capacity(phi);
        for k in 0..phi {
            let basis = Cyclo::root_of_unity(n, k as i64);
            cols.push(self.mul_ref(&basis).lift(n));
        }
        let mut rows: Vec<Vec<Rational>> = (0..phi)
            .map(|r| {
                let mut row: Vec<Rational> = cols.iter().map(|c| c[r].clone()).collect();
                row.push(if r == 0 {
                    Rational::one()
                } else {
                    Rational::zero()
                });
                row
            })
            .collect();
        let sol = crate::linalg::solve_augmented(&mut rows, phi).ok_or(Error::DivisionByZero)?;
        Ok(Cyclo::from_raw(n, sol))
    }

    pub fn div_ref(&self, other: &Cyclo) -> Result<Cyclo> {
        Ok(self.mul_ref(&other.inv()?))
    }

    /// Complex conjugate (ζ ↦ ζ^{-1}).
    pub fn conj(&self) -> Cyclo {
        let n = self.order as usize;
        let mut raw = vec![Rational::zero(); n.max(1)];
        for (k, c) in self.coeffs.iter().enumerate() {
            raw[(n - k % n) % n] += c;
        }
        Cyclo::from_raw(self.order, raw)
    }

    pub fn pow(&self, e: i64) -> Result<Cyclo> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Cyclo::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul_ref(&base);
        }
        Ok(acc)
    }

    /// Serialised as `{order, [[k, num, den], ...]}` with zero terms omitted.
    pub fn to_wire(&self) -> CycloWire {
        CycloWire {
            order: self.order,
            terms: self
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (k as u32, c.numer().to_string(), c.denom().to_string()))
                .collect(),
        }
    }

    pub fn from_wire(w: &CycloWire) -> Result<Cyclo> {
        if w.order == 0 {
            return Err(Error::Config("cyclotomic order must be positive".into()));
        }
        let mut raw = vec![Rational::zero(); w.order as usize];
        for (k, n, d) in &w.terms {
            let q = parse_rational(&format!("{n}/{d}"))?;
            raw[*k as usize % w.order as usize] += q;
        }
        Ok(Cyclo::from_raw(w.order, raw))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycloWire {
    pub order: u32,
    pub terms: Vec<(u32, String, String)>,
}

fn reduce(order: u32, mut raw: Vec<Rational>) -> Vec<Rational> {
    let phi_poly = cyclotomic_polynomial(order);
    let deg = phi_poly.len() - 1;
    debug_assert_eq!(deg, euler_phi(order));
    if raw.len() < deg {
        raw.resize(deg, Rational::zero());
        return raw;
    }
    for top in (deg..raw.len()).rev() {
        let c = std::mem::replace(&mut raw[top], Rational::zero());
        if c.is_zero() {
            continue;
        }
        for (j, pc) in phi_poly.iter().take(deg).enumerate() {
            if !pc.is_zero() {
                raw[top - deg + j] -= &c * Rational::from_integer(pc.clone());
            }
        }
    }
    raw.truncate(deg);
    raw
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        self.sub_ref(other).is_zero()
    }
}

impl Eq for Cyclo {}

impl Default for Cyclo {
    fn default() -> Self {
        Cyclo::zero()
    }
}

impl From<Rational> for Cyclo {
    fn from(q: Rational) -> Self {
        Cyclo::from_rational(q)
    }
}

impl From<i64> for Cyclo {
    fn from(n: i64) -> Self {
        Cyclo::from_int(n)
    }
}

impl Add for &Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        self.add_ref(rhs)
    }
}

impl Sub for &Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self.sub_ref(rhs)
    }
}

impl Mul for &Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        self.mul_ref(rhs)
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        self.neg_ref()
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 1 {
            return write!(f, "{}", fmt_rational(&self.coeffs[0]));
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if k == 0 {
                write!(f, "{}", fmt_rational(c))?;
            } else {
                write!(f, "({})*z{}^{}", fmt_rational(c), self.order, k)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `e^{πi x}` as an exact root of unity.
pub fn phase_of_halfinteger(x: &Q) -> Cyclo {
    let d = *x.denom();
    let p = x.numer().mod_floor(&(2 * d));
    Cyclo::root_of_unity(2 * d as u32, p)
}

/// Approximate complex value, for human-readable reports only.
pub fn approx(c: &Cyclo) -> (f64, f64) {
    let n = c.order() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for (k, q) in c.coeffs().iter().enumerate() {
        let v = q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN);
        let t = 2.0 * std::f64::consts::PI * k as f64 / n;
        re += v * t.cos();
        im += v * t.sin();
    }
    (re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn i_squared_is_minus_one() {
        let i = Cyclo::root_of_unity(4, 1);
        assert_eq!(&i * &i, Cyclo::from_int(-1));
        assert_eq!((&i * &i).order(), 1);
    }

    #[test]
    fn additive_identity() {
        let a = Cyclo::root_of_unity(5, 2);
        assert_eq!(&a + &Cyclo::zero(), a);
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let w = Cyclo::root_of_unity(3, 1);
        let s = &(&Cyclo::one() + &w) + &(&w * &w);
        assert!(s.is_zero());
        // Φ_3 = x² + x + 1 reduces x² to -x - 1.
        let w2 = Cyclo::root_of_unity(3, 2);
        assert_eq!(w2.coeffs(), &[int(-1), int(-1)]);
    }

    #[test]
    fn cyclotomic_polynomials() {
        let to_i = |n| {
            cyclotomic_polynomial(n)
                .iter()
                .map(|c| c.to_i64().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(to_i(1), vec![-1, 1]);
        assert_eq!(to_i(3), vec![1, 1, 1]);
        assert_eq!(to_i(4), vec![1, 0, 1]);
        assert_eq!(to_i(6), vec![1, -1, 1]);
        assert_eq!(to_i(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn order_two_mod_four_is_folded() {
        let z6 = Cyclo::root_of_unity(6, 1);
        assert_eq!(z6.order(), 3);
        // ζ_6 = -ζ_3^2
        assert_eq!(z6, Cyclo::root_of_unity(3, 2).neg_ref());
        assert_eq!(z6.pow(6).unwrap(), Cyclo::one());
        assert_eq!(z6.pow(3).unwrap(), Cyclo::from_int(-1));
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(
            Cyclo::one().div_ref(&Cyclo::zero()),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn phases() {
        assert_eq!(phase_of_halfinteger(&qi(1)), Cyclo::from_int(-1));
        assert_eq!(phase_of_halfinteger(&qi(0)), Cyclo::one());
        assert_eq!(phase_of_halfinteger(&q(2, 3)), Cyclo::root_of_unity(3, 1));
        assert_eq!(phase_of_halfinteger(&q(1, 2)), Cyclo::root_of_unity(4, 1));
        assert_eq!(
            phase_of_halfinteger(&q(-1, 3)).pow(3).unwrap(),
            Cyclo::from_int(-1)
        );
    }

    #[test]
    fn wire_round_trip() {
        let a = &Cyclo::root_of_unity(12, 5) + &Cyclo::from_rational(rat(3, 7));
        let w = a.to_wire();
        assert_eq!(Cyclo::from_wire(&w).unwrap(), a);
    }

    #[test]
    fn generalized_binomial() {
        assert_eq!(binomial(&rat(1, 2), 0), int(1));
        assert_eq!(binomial(&rat(1, 2), 1), rat(1, 2));
        assert_eq!(binomial(&rat(1, 2), 2), rat(-1, 8));
        assert_eq!(binomial(&int(5), 2), int(10));
        assert_eq!(binomial(&int(2), 3), int(0));
        assert_eq!(binomial(&int(-1), 3), int(-1));
    }

    fn arb_cyclo() -> impl Strategy<Value = Cyclo> {
        (
            1u32..=24,
            proptest::collection::vec(-5i64..=5, 24),
            1i64..=4,
        )
            .prop_map(|(n, cs, d)| {
                let raw = cs.into_iter().take(n as usize).map(|c| rat(c, d)).collect();
                Cyclo::from_raw(n, raw)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn field_laws(a in arb_cyclo(), b in arb_cyclo(), c in arb_cyclo()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.inv().unwrap(), Cyclo::one());
            }
        }

        #[test]
        fn phase_is_a_character(p1 in -12i64..12, p2 in -12i64..12, d in prop::sample::select(vec![1i64, 2, 3, 4, 6, 12])) {
            let q1 = q(p1, d);
            let q2 = q(p2, d);
            prop_assert_eq!(phase_of_halfinteger(&(q1 + q2)), &phase_of_halfinteger(&q1) * &phase_of_halfinteger(&q2));
            prop_assert!((&phase_of_halfinteger(&q1) * &phase_of_halfinteger(&-q1)).is_one());
        }
    }
}
