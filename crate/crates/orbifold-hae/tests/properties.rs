//! Randomized algebraic laws.

use orbifold_hae::cyclo::Cyc;
use orbifold_hae::field::{q, Field, Q};
use orbifold_hae::freering::{Evaluator, Mono, Poly};
use orbifold_hae::intnum::PsiCache;
use orbifold_hae::mirror::{build_all, MirrorData};
use orbifold_hae::series::Series;
use proptest::prelude::*;
use std::sync::OnceLock;

fn small_q() -> impl Strategy<Value = Q> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| q(n, d))
}

fn cyc() -> impl Strategy<Value = Cyc> {
    [small_q(), small_q(), small_q(), small_q()].prop_map(|[a, b, c, d]| Cyc::new(a, b, c, d))
}

fn series() -> impl Strategy<Value = Series<Q>> {
    (-2i64..=2, prop::collection::vec(small_q(), 1..12)).prop_map(|(lo, c)| Series::from_parts(lo, c))
}

fn mono() -> impl Strategy<Value = Mono> {
    (-2i16..=0, -1i16..=0, [0u16..=2, 0u16..=1, 0u16..=1, 0u16..=2], -2i32..=5)
        .prop_map(|(c1, c2, a, l)| Mono { c1, c2, a, l })
}

fn poly() -> impl Strategy<Value = Poly<Q>> {
    prop::collection::vec((mono(), small_q()), 0..4).prop_map(Poly::from_terms)
}

fn mirror() -> &'static MirrorData {
    static M: OnceLock<MirrorData> = OnceLock::new();
    M.get_or_init(|| build_all(20).unwrap())
}

fn agree(a: &Series<Q>, b: &Series<Q>, n: i64) -> bool {
    let n = n.min(a.order()).min(b.order());
    a.sub(b).truncate(n).is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cyc_field_laws(a in cyc(), b in cyc(), c in cyc()) {
        prop_assert_eq!(a.mul_ref(&b), b.mul_ref(&a));
        prop_assert_eq!(a.mul_ref(&b.add_ref(&c)), a.mul_ref(&b).add_ref(&a.mul_ref(&c)));
        prop_assert_eq!(a.mul_ref(&b).mul_ref(&c), a.mul_ref(&b.mul_ref(&c)));
        if let Some(i) = a.inv() {
            prop_assert_eq!(a.mul_ref(&i), Cyc::one());
        } else {
            prop_assert!(a.is_zero());
        }
    }

    #[test]
    fn galois_is_a_ring_automorphism(a in cyc(), b in cyc(), k in 1u32..5) {
        prop_assert_eq!(a.mul_ref(&b).galois(k), a.galois(k).mul_ref(&b.galois(k)));
        prop_assert_eq!(a.add_ref(&b).galois(k), a.galois(k).add_ref(&b.galois(k)));
        prop_assert_eq!(a.galois(k).galois(5 - k).galois(k).galois(5 - k), a.clone());
    }

    #[test]
    fn d_is_a_derivation_on_series(a in series(), b in series()) {
        let lhs = a.mul(&b).d_op();
        let rhs = a.d_op().mul(&b).add(&a.mul(&b.d_op()));
        prop_assert_eq!(lhs.order(), rhs.order());
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn truncation_commutes_with_products(a in series(), b in series(), n in -1i64..6) {
        let full = a.mul(&b).truncate(n);
        let cut = a.truncate(n + 4).mul(&b.truncate(n + 4)).truncate(n);
        prop_assert!(full.sub(&cut).truncate(n.min(full.order())).is_zero());
    }

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn ring_derivation_is_leibniz(a in poly(), b in poly()) {
        let lhs = a.mul(&b).d_derive();
        let rhs = a.d_derive().mul(&b).add(&a.mul(&b.d_derive()));
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_is_a_differential_homomorphism(a in poly(), b in poly()) {
        let m = mirror();
        let mut e = Evaluator::new(m);
        let (ea, eb) = (e.eval(&a), e.eval(&b));
        prop_assert!(agree(&e.eval(&a.mul(&b)), &ea.mul(&eb), 10));
        prop_assert!(agree(&e.eval(&a.d_derive()), &ea.d_op(), 10));
    }
}

/// A stable key with Σ a_i = 3g − 3 + n, the units of degree dropped into
/// random slots.
fn stable_key() -> impl Strategy<Value = (u32, Vec<u32>)> {
    (0u32..=3, 1usize..=5)
        .prop_filter("stable", |&(g, n)| 2 * g as usize + n > 2)
        .prop_flat_map(|(g, n)| {
            let dim = 3 * g as usize + n - 3;
            prop::collection::vec(0..n, dim).prop_map(move |slots| {
                let mut e = vec![0u32; n];
                for s in slots {
                    e[s] += 1;
                }
                (g, e)
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn string_and_dilaton((g, e) in stable_key()) {
        let psi = PsiCache::new();
        if let Some(ok) = psi.string_consistent(g, &e) {
            prop_assert!(ok);
        }
        if let Some(ok) = psi.dilaton_consistent(g, &e) {
            prop_assert!(ok);
        }
        // the equations themselves, against the memoized evaluator
        let n = e.len() as i64;
        // adding τ_0 raises the dimension by one, so shift one unit up first
        let mut up = e.clone();
        up[0] += 1;
        let mut with0 = up.clone();
        with0.push(0);
        let string = (0..up.len())
            .filter(|&j| up[j] > 0)
            .map(|j| {
                let mut r = up.clone();
                r[j] -= 1;
                psi.value(g, &r)
            })
            .fold(Q::zero(), |x, y| x + y);
        prop_assert_eq!(psi.value(g, &with0), string);
        let mut with1 = e.clone();
        with1.push(1);
        prop_assert_eq!(psi.value(g, &with1), psi.value(g, &e) * q(2 * g as i64 - 2 + n, 1));
    }
}
