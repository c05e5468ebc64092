use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use qdist::algebra::{AlgElement, Algebra, AlgebraParams, DividedKind, GenKind, Monomial, Terms};
use qdist::arith::{CycNum, CyclotomicField, Rat};
use qdist::cache;
use qdist::expr::{eval, parse_expr, parse_for, Expr};
use qdist::format::element_text;
use qdist::hyper::{HypAlgebra, HypMonomial, HypParams};
use qdist::qnum::{gen_q_binom, lucas_binom};

fn field(ell: i64) -> Arc<CyclotomicField> {
    CyclotomicField::new(ell).unwrap()
}

fn cyc(ell: i64) -> impl Strategy<Value = CycNum> {
    let f = field(ell);
    prop::collection::vec((-4i64..5, 1i64..4), (ell - 1) as usize)
        .prop_map(move |cs| {
            let rats: Vec<Rat> = cs.iter().map(|&(n, d)| Rat::new(BigInt::from(n), BigInt::from(d))).collect();
            CycNum::from_x_coeffs(&f, &rats)
        })
}

fn monomial(bound: u64) -> impl Strategy<Value = Monomial> {
    (0..bound, 0..bound, 0..bound).prop_map(|(f, k, e)| Monomial::new(f, k, e))
}

fn element(params: AlgebraParams) -> impl Strategy<Value = AlgElement> {
    let ell = params.ell() as i64;
    prop::collection::vec((monomial(params.index_bound()), cyc(ell)), 0..5).prop_map(move |terms| {
        terms.into_iter().fold(AlgElement::from_terms(params, Terms::new()), |acc, (m, c)| {
            &acc + &AlgElement::monomial(params, m, c)
        })
    })
}

/// Expressions valid at `N = 1`, `ℓ = 3`.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0i64..7, 1i64..5).prop_map(|(n, d)| Expr::Scalar(Rat::new(BigInt::from(n), BigInt::from(d)))),
        (-4i64..5).prop_map(Expr::QPow),
        (0u32..2, prop_oneof![Just(GenKind::E), Just(GenKind::F), Just(GenKind::K), Just(GenKind::Kinv)])
            .prop_map(|(i, g)| Expr::Gen(g, i)),
        (0u64..9, prop_oneof![Just(DividedKind::E), Just(DividedKind::F)]).prop_map(|(m, d)| Expr::Divided(d, m)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (inner, 0u32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyclotomic_field_axioms(a in cyc(5), b in cyc(5), c in cyc(5)) {
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inv().unwrap(), CycNum::one(a.field()));
        }
    }

    #[test]
    fn generalized_q_binomial_symmetry(m in 0u64..60, n in 0u64..60) {
        let f = field(7);
        prop_assert_eq!(gen_q_binom(&f, m + n, m), gen_q_binom(&f, m + n, n));
    }

    #[test]
    fn lucas_satisfies_pascal(m in 1u64..500, n in 1u64..500) {
        for p in [2, 3, 7] {
            let lhs = lucas_binom(m, n, p).unwrap();
            let rhs = (lucas_binom(m - 1, n - 1, p).unwrap() + lucas_binom(m - 1, n, p).unwrap()) % p;
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn level_zero_is_associative(a in monomial(5), b in monomial(5), c in monomial(5)) {
        let alg = Algebra::new(AlgebraParams::new(5, 0, 2).unwrap()).unwrap();
        let (x, y, z) = (alg.basis_element(a), alg.basis_element(b), alg.basis_element(c));
        let left = alg.multiply(&alg.multiply(&x, &y).unwrap(), &z).unwrap();
        let right = alg.multiply(&x, &alg.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn multiplication_is_bilinear(x in element(AlgebraParams::new(3, 1, 1).unwrap()),
                                  y in element(AlgebraParams::new(3, 1, 1).unwrap()),
                                  z in element(AlgebraParams::new(3, 1, 1).unwrap())) {
        let alg = Algebra::new(x.params()).unwrap();
        let lhs = alg.multiply(&x, &(&y + &z)).unwrap();
        let rhs = &alg.multiply(&x, &y).unwrap() + &alg.multiply(&x, &z).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn canonical_text_evaluates_back(x in element(AlgebraParams::new(3, 1, 1).unwrap())) {
        let alg = Algebra::new(x.params()).unwrap();
        let text = element_text(&x);
        let back = eval(&parse_for(&text, &alg.params()).unwrap(), &alg).unwrap();
        prop_assert_eq!(back, x, "{}", text);
    }

    #[test]
    fn printing_is_a_parse_fixed_point(e in expr()) {
        let printed = e.to_string();
        let reparsed = parse_expr(&printed).unwrap();
        prop_assert_eq!(&reparsed, &e, "{}", printed);
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn cache_round_trip_after_products(a in monomial(9), b in monomial(9)) {
        let params = AlgebraParams::new(3, 1, 1).unwrap();
        let alg = Algebra::new(params).unwrap();
        let product = alg.mul_monomials(a, b);
        let bytes = cache::encode(&alg);
        let fresh = Algebra::new(params).unwrap();
        cache::decode_into(&bytes, &fresh).unwrap();
        prop_assert_eq!(fresh.ef_memo_entries(), alg.ef_memo_entries());
        prop_assert_eq!(fresh.mul_monomials(a, b), product);
    }

    #[test]
    fn hyperalgebra_is_associative(a in (0u64..4, 0u64..4, 0u64..4), b in (0u64..4, 0u64..4, 0u64..4), c in (0u64..4, 0u64..4, 0u64..4)) {
        let alg = HypAlgebra::new(HypParams::new(2, 2).unwrap());
        let m = |t: (u64, u64, u64)| alg.basis(HypMonomial::new(t.0, t.1, t.2));
        let (x, y, z) = (m(a), m(b), m(c));
        let left = alg.multiply(&alg.multiply(&x, &y).unwrap(), &z).unwrap();
        let right = alg.multiply(&x, &alg.multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }
}
