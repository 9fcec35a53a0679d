use galoiscache::field::{FieldSpec, GfElement};
use galoiscache::skew::{SetLayout, SkewParams};
use proptest::prelude::*;

fn skew() -> impl Strategy<Value = SkewParams> {
    let field = prop_oneof![
        (2u32..=10).prop_map(|n| FieldSpec::binary(n).unwrap()),
        prop::sample::select(vec![3u32, 5, 7, 31, 127]).prop_map(|p| FieldSpec::prime(p).unwrap()),
    ];
    field.prop_flat_map(|f| {
        let q = f.order();
        (1..q, 1..q, 0..q).prop_map(move |(a, b, c)| SkewParams::new(f, a, b, c).unwrap())
    })
}

fn skew_with_points() -> impl Strategy<Value = (SkewParams, u32, u32, u32, u32)> {
    skew().prop_flat_map(|sp| {
        let q = sp.order();
        (Just(sp), 0..q, 0..q, 0..q, 0..q)
    })
}

proptest! {
    #[test]
    fn distinct_domains_meet_once((sp, t, t2, s, s2) in skew_with_points()) {
        prop_assume!(t != t2);
        let q = sp.order();
        let meets: Vec<u32> = (0..q).filter(|&w| sp.physical_set(t, s, w) == sp.physical_set(t2, s2, w)).collect();
        prop_assert_eq!(meets.len(), 1);
        let solved = sp.solve_intersection_way(GfElement(t), GfElement(t2), GfElement(s), GfElement(s2)).unwrap();
        prop_assert_eq!(solved.0, meets[0]);
    }

    #[test]
    fn same_domain_is_rejected((sp, t, _t2, s, s2) in skew_with_points()) {
        prop_assert!(sp.solve_intersection_way(GfElement(t), GfElement(t), GfElement(s), GfElement(s2)).is_err());
    }

    #[test]
    fn logical_set_inverts_permute((sp, t, s, w, _x) in skew_with_points()) {
        let (t, s, w) = (GfElement(t), GfElement(s), GfElement(w));
        let phys = sp.permute(t, s, w).unwrap();
        prop_assert_eq!(sp.logical_set(t, phys, w).unwrap(), s);
    }

    #[test]
    fn each_way_is_a_bijection((sp, t, w, _x, _y) in skew_with_points()) {
        let q = sp.order();
        let mut seen = vec![false; q as usize];
        for s in 0..q {
            let phys = sp.physical_set(t, s, w) as usize;
            prop_assert!(!seen[phys]);
            seen[phys] = true;
        }
    }

    #[test]
    fn all_ways_agrees_with_permute((sp, t, s, _x, _y) in skew_with_points()) {
        let all = sp.permute_all_ways(GfElement(t), GfElement(s)).unwrap();
        prop_assert_eq!(all.len() as u32, sp.order());
        for (w, phys) in all.iter().enumerate() {
            prop_assert_eq!(phys.0, sp.physical_set(t, s, w as u32));
        }
    }
}
