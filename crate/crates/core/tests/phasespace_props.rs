//! Randomized algebraic identities of the symbolic layer.

use std::collections::BTreeMap;

use emergentq::phasespace::{Coeff, PhaseSpace, SymExpr};
use num_rational::BigRational;
use proptest::prelude::*;

const VARS: [&str; 4] = ["x", "p_x", "qb_x", "pb_x"];

fn space() -> PhaseSpace {
    PhaseSpace::doubled(&["x"], &["a"]).unwrap()
}

/// Terms `(coefficient, exponents of x, p_x, qb_x, pb_x, a, weight of x in exp)`.
fn poly(max_terms: usize, with_exp: bool) -> impl Strategy<Value = SymExpr> {
    let exp_range = if with_exp { -2i64..=2 } else { 0i64..=0 };
    prop::collection::vec((-3i64..=3, prop::array::uniform5(0u32..=2), exp_range), 1..=max_terms).prop_map(
        |terms| {
            let mut acc = SymExpr::zero();
            for (c, exps, w) in terms {
                let mut t = SymExpr::int(c);
                for (v, e) in VARS.iter().chain(["a"].iter()).zip(exps) {
                    t = &t * &SymExpr::symbol(v).pow(e);
                }
                if w != 0 {
                    let weights = BTreeMap::from([("x".to_string(), BigRational::from_integer(w.into()))]);
                    t = &t * &SymExpr::exp_linear(weights);
                }
                acc += &t;
            }
            acc
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry(a in poly(4, true), b in poly(4, true)) {
        let s = space();
        let sum = &s.poisson_bracket(&a, &b).unwrap() + &s.poisson_bracket(&b, &a).unwrap();
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn jacobi(a in poly(3, false), b in poly(3, false), c in poly(3, false)) {
        let s = space();
        let br = |u: &SymExpr, v: &SymExpr| s.poisson_bracket(u, v).unwrap();
        let total = &(&br(&a, &br(&b, &c)) + &br(&b, &br(&c, &a))) + &br(&c, &br(&a, &b));
        prop_assert!(total.is_zero());
    }

    #[test]
    fn leibniz(a in poly(3, true), b in poly(3, true), c in poly(3, true)) {
        let s = space();
        let br = |u: &SymExpr, v: &SymExpr| s.poisson_bracket(u, v).unwrap();
        let lhs = br(&a, &(&b * &c));
        let rhs = &(&br(&a, &b) * &c) + &(&b * &br(&a, &c));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn serialization_roundtrip(a in poly(5, true), k in 1i64..5) {
        let s = space();
        let e = &a.scale(&Coeff::from_ratio(1, k)) - &SymExpr::constant(Coeff::sqrt2());
        let text = e.to_string();
        let back = s.parse(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn derivatives_commute(a in poly(5, true), i in 0usize..4, j in 0usize..4) {
        let (u, v) = (VARS[i], VARS[j]);
        prop_assert_eq!(a.differentiate(u).differentiate(v), a.differentiate(v).differentiate(u));
    }
}

#[test]
fn laurent_parameters_roundtrip() {
    let s = space();
    for text in ["-1/4*pb_x^2/a", "x/a^2 - 3/2*a*p_x", "(1 - sqrt(2))*x*exp(-1/2*x)"] {
        let e = s.parse(text).unwrap();
        assert_eq!(s.parse(&e.to_string()).unwrap(), e, "{text} -> {e}");
    }
}
