use permstab::lab::instances::ROUNDING_GROUPS;
use permstab::{hamming, hs_distance, FinGroup, Perm, PartialInjection, Rational};
use permstab::group::GroupSpec;
use proptest::prelude::*;

fn perm(n: usize) -> impl Strategy<Value = Perm> {
    Just((0..n as u32).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Perm::from_images(v).unwrap())
}

fn triple(max: usize) -> impl Strategy<Value = (Perm, Perm, Perm)> {
    (1..=max).prop_flat_map(|n| (perm(n), perm(n), perm(n)))
}

fn count_diff(a: &Perm, b: &Perm) -> usize {
    (0..a.len()).filter(|&x| a.apply(x) != b.apply(x)).count()
}

proptest! {
    #[test]
    fn hamming_matches_direct_count((a, b, _) in triple(40)) {
        let n = a.len() as i64;
        prop_assert_eq!(hamming(&a, &b).unwrap(), Rational::new(count_diff(&a, &b) as i64, n));
    }

    #[test]
    fn hamming_is_bi_invariant((a, b, g) in triple(40)) {
        let d = hamming(&a, &b).unwrap();
        let left = hamming(&g.compose(&a).unwrap(), &g.compose(&b).unwrap()).unwrap();
        let right = hamming(&a.compose(&g).unwrap(), &b.compose(&g).unwrap()).unwrap();
        prop_assert_eq!(d, left);
        prop_assert_eq!(d, right);
        prop_assert_eq!(d, hamming(&b, &a).unwrap());
    }

    #[test]
    fn hamming_triangle((a, b, c) in triple(40)) {
        let ab = hamming(&a, &b).unwrap();
        let bc = hamming(&b, &c).unwrap();
        prop_assert!(hamming(&a, &c).unwrap() <= ab + bc);
    }

    #[test]
    fn hs_is_root_of_twice_hamming((a, b, _) in triple(40)) {
        let d = count_diff(&a, &b) as f64 / a.len() as f64;
        prop_assert!((hs_distance(&a, &b).unwrap() - (2.0 * d).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn inverse_and_pow_agree((a, _, _) in triple(30), e in 0u64..50) {
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
        let mut direct = Perm::identity(a.len());
        for _ in 0..e {
            direct = a.compose(&direct).unwrap();
        }
        prop_assert_eq!(a.pow(e), direct);
    }

    #[test]
    fn partial_restriction_counts_undefined_points((a, b, _) in triple(30), keep in 0usize..30) {
        let n = a.len();
        let keep = keep.min(n);
        let pa = PartialInjection::restrict(&a, 0..keep);
        prop_assert_eq!(pa.defined_count(), keep);
        // undefined points count as disagreements
        let expected = (0..n).filter(|&x| x >= keep || a.apply(x) != b.apply(x)).count();
        prop_assert_eq!(hamming(&pa, &b.to_partial()).unwrap(), Rational::new(expected as i64, n as i64));
    }

    #[test]
    fn group_axioms(idx in 0..ROUNDING_GROUPS.len(), xs in prop::collection::vec(any::<u32>(), 3)) {
        let g: FinGroup = ROUNDING_GROUPS[idx].parse::<GroupSpec>().unwrap().build(&Default::default()).unwrap();
        let n = g.order() as u32;
        let (a, b, c) = (xs[0] % n, xs[1] % n, xs[2] % n);
        prop_assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
        prop_assert_eq!(g.mul(a, g.identity()), a);
        prop_assert_eq!(g.mul(g.inv(a), a), g.identity());
        prop_assert_eq!(g.closure(g.generators()).len(), g.order());
        // translations realise the multiplication
        prop_assert_eq!(g.left_translation(a).apply(b as usize), g.mul(a, b) as usize);
        prop_assert_eq!(g.right_translation(a).apply(b as usize), g.mul(b, g.inv(a)) as usize);
        // left and right translations commute
        let l = g.left_translation(a);
        let r = g.right_translation(c);
        prop_assert_eq!(l.compose(&r).unwrap(), r.compose(&l).unwrap());
    }
}

#[test]
fn sl2_orders_match_formula() {
    for p in [2u32, 3, 5, 7] {
        let g = FinGroup::sl2_mod(p).unwrap();
        // count 2x2 matrices of determinant 1 directly
        let p = p as i64;
        let mut count = 0;
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    for d in 0..p {
                        count += ((a * d - b * c).rem_euclid(p) == 1) as usize;
                    }
                }
            }
        }
        assert_eq!(g.order(), count);
    }
}

#[test]
fn product_spec_parses_and_builds() {
    let g = "sl2(3) x cyclic(4)".parse::<GroupSpec>().unwrap().build(&Default::default()).unwrap();
    assert_eq!(g.order(), 96);
    assert!(!g.is_abelian());
    let (l, r) = g.factors().unwrap();
    assert_eq!((l.order(), r.order()), (24, 4));
    assert!("nonsense(3)".parse::<GroupSpec>().is_err());
}
