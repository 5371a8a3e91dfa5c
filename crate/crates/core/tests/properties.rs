use gva_core::exec::Exec;
use gva_core::scalars::{q, Cyclo, Rational, Q};
use gva_core::series::{binom_expand, check_delta_identities, series_mul, DeltaFault, MultiSeries};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// C(a, i) by the falling-factorial product, in plain `Ratio<i64>`.
fn binom_oracle(a: Q, i: u32) -> Q {
    let mut c = Q::one();
    for j in 0..i as i64 {
        c = c * (a - j) / (j + 1);
    }
    c
}

fn as_q(c: &Cyclo) -> Q {
    let r: &Rational = c.as_rational().expect("rational coefficient");
    let n: i64 = r.numer().try_into().unwrap();
    let d: i64 = r.denom().try_into().unwrap();
    Q::new(n, d)
}

fn small_q() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

fn poly() -> impl Strategy<Value = MultiSeries<Cyclo>> {
    proptest::collection::vec(((-3i64..=3, -3i64..=3), -4i64..=4), 1..6).prop_map(|ts| {
        let mut s = MultiSeries::new(2);
        for ((a, b), c) in ts {
            s.add_term(vec![Q::from(a), Q::from(b)], &Cyclo::from_int(c));
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn binomial_expansion_coefficients(a in small_q(), n in 0u32..8) {
        let s = binom_expand(2, a, (0, 1), (1, -1), n, None).unwrap();
        for i in 0..=n {
            let c = s.get(&[a - i as i64, Q::from(i as i64)]);
            let want = binom_oracle(a, i) * if i % 2 == 0 { 1 } else { -1 };
            prop_assert_eq!(if c.is_zero() { Q::zero() } else { as_q(&c) }, want);
        }
    }

    #[test]
    fn binomial_powers_add(a in small_q(), b in small_q()) {
        let n = 6;
        let x = binom_expand(2, a, (0, 1), (1, -1), n, None).unwrap();
        let y = binom_expand(2, b, (0, 1), (1, -1), n, None).unwrap();
        let xy = series_mul(&x, &y, None).unwrap();
        let s = binom_expand(2, a + b, (0, 1), (1, -1), n, None).unwrap();
        for i in 0..=n as i64 {
            let e = [a + b - i, Q::from(i)];
            prop_assert_eq!(xy.get(&e), s.get(&e));
        }
    }

    #[test]
    fn residue_of_derivative_vanishes(p in poly()) {
        prop_assert!(p.derive(0).residue(0).is_empty());
    }

    #[test]
    fn derivative_is_leibniz(p in poly(), r in poly()) {
        let lhs = series_mul(&p, &r, None).unwrap().derive(1);
        let rhs = series_mul(&p.derive(1), &r, None).unwrap().add(&series_mul(&p, &r.derive(1), None).unwrap());
        prop_assert_eq!(lhs.dump(), rhs.dump());
    }

    #[test]
    fn shift_then_unshift_is_identity(p in poly(), a in small_q(), b in small_q()) {
        prop_assert_eq!(p.shift(&[a, b]).shift(&[-a, -b]).dump(), p.dump());
    }

    #[test]
    fn exec_modes_agree(xs in proptest::collection::vec(-1000i64..1000, 0..64)) {
        let f = |x: i64| x * x - 3 * x;
        prop_assert_eq!(Exec::Sequential.map(xs.clone(), f), Exec::Parallel.map(xs, f));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn delta_identities_hold_and_detect_binomial_fault(a in small_q()) {
        for rep in check_delta_identities(a, 4, DeltaFault::None).unwrap() {
            prop_assert!(rep.passed, "{}", rep.summary_line());
        }
        let faulted = check_delta_identities(a, 4, DeltaFault::Binomial).unwrap();
        prop_assert!(faulted.iter().any(|r| !r.passed));
    }
}
