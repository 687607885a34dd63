//! Lattice laws for subtyping, join and meet on random types.

use lsq_core::typeck::{join, meet, subtype};
use lsq_core::Type;
use proptest::prelude::*;

/// Types over a small leaf set so that random pairs often share a shape.
fn ty() -> impl Strategy<Value = Type> {
    let leaf = prop_oneof![Just(Type::Unit), Just(Type::Int), Just(Type::Bot), Just(Type::Top)];
    leaf.prop_recursive(3, 16, 3, |t| {
        prop_oneof![
            (t.clone(), t.clone()).prop_map(|(a, r)| Type::fun(a, r)),
            (t.clone(), t.clone(), t.clone()).prop_map(|(a, y, r)| Type::cor(a, y, r)),
            (t.clone(), t).prop_map(|(y, r)| Type::inst(y, r)),
        ]
    })
}

/// A second type with the same outer shape as `s`, mutated at the leaves.
fn near(s: Type) -> impl Strategy<Value = Type> {
    fn go(s: &Type, picks: &mut impl Iterator<Item = u8>) -> Type {
        let p = picks.next().unwrap_or(0);
        match s {
            Type::Fun(a, r) => Type::fun(go(a, picks), go(r, picks)),
            Type::Coroutine(a, y, r) => Type::cor(go(a, picks), go(y, picks), go(r, picks)),
            Type::Instance(y, r) => Type::inst(go(y, picks), go(r, picks)),
            leaf => [leaf.clone(), Type::Bot, Type::Top, Type::Int, Type::Unit][p as usize % 5].clone(),
        }
    }
    prop::collection::vec(any::<u8>(), 16).prop_map(move |picks| go(&s, &mut picks.into_iter()))
}

fn triple() -> impl Strategy<Value = (Type, Type, Type)> {
    prop_oneof![
        (ty(), ty(), ty()),
        ty().prop_flat_map(|s| (Just(s.clone()), near(s.clone()), near(s))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn subtyping_is_a_partial_order((s, t, u) in triple()) {
        prop_assert!(subtype(&s, &s));
        if subtype(&s, &t) && subtype(&t, &s) {
            prop_assert_eq!(&s, &t);
        }
        if subtype(&s, &t) && subtype(&t, &u) {
            prop_assert!(subtype(&s, &u));
        }
        prop_assert!(subtype(&Type::Bot, &s) && subtype(&s, &Type::Top));
    }

    #[test]
    fn join_is_the_least_upper_bound((s, t, u) in triple()) {
        let j = join(&s, &t);
        prop_assert!(subtype(&s, &j) && subtype(&t, &j), "{} v {} = {}", s, t, j);
        if subtype(&s, &u) && subtype(&t, &u) {
            prop_assert!(subtype(&j, &u));
        }
        prop_assert_eq!(&j, &join(&t, &s));
        prop_assert_eq!(join(&s, &s), s.clone());
        prop_assert_eq!(join(&j, &u), join(&s, &join(&t, &u)));
        prop_assert_eq!(subtype(&s, &t), j == t);
    }

    #[test]
    fn meet_is_the_greatest_lower_bound((s, t, u) in triple()) {
        let m = meet(&s, &t);
        prop_assert!(subtype(&m, &s) && subtype(&m, &t), "{} ^ {} = {}", s, t, m);
        if subtype(&u, &s) && subtype(&u, &t) {
            prop_assert!(subtype(&u, &m));
        }
        prop_assert_eq!(&m, &meet(&t, &s));
        prop_assert_eq!(meet(&s, &s), s.clone());
        prop_assert_eq!(meet(&m, &u), meet(&s, &meet(&t, &u)));
        prop_assert_eq!(subtype(&s, &t), m == s);
    }

    #[test]
    fn absorption((s, t, _u) in triple()) {
        prop_assert_eq!(join(&s, &meet(&s, &t)), s.clone());
        prop_assert_eq!(meet(&s, &join(&s, &t)), s.clone());
    }
}
