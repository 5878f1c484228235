use kzcocycle::cover::lift;
use kzcocycle::deviation::checkpoints;
use kzcocycle::{catalog_entries, orient_double_cover, project, push_forward, stratum_info, stratum_of, GeneralizedPermutation, Sign};
use proptest::prelude::*;

fn doubled(max_pairs: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_pairs).prop_flat_map(|n| prop::collection::vec(-1e3f64..1e3, 2 * n))
}

/// A catalog permutation with its letters renamed by `shift`.
fn renamed(p: &GeneralizedPermutation, shift: usize) -> GeneralizedPermutation {
    let name = |x: &usize| format!("s{}", (x + shift) % p.d());
    let top: Vec<String> = p.top().iter().map(name).collect();
    let bottom: Vec<String> = p.bottom().iter().map(name).collect();
    GeneralizedPermutation::from_tokens(&top, &bottom, false).unwrap()
}

proptest! {
    #[test]
    fn projectors_resolve_identity(v in doubled(12)) {
        let (p, m) = (project(&v, Sign::Plus).entries, project(&v, Sign::Minus).entries);
        for i in 0..v.len() {
            prop_assert!((p[i] + m[i] - v[i]).abs() < 1e-9);
        }
        prop_assert_eq!(&project(&p, Sign::Plus).entries, &p);
        prop_assert!(project(&m, Sign::Plus).entries.iter().all(|x| x.abs() < 1e-12));
        prop_assert!(push_forward(&m).iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn push_forward_of_lift_doubles(u in prop::collection::vec(-1e3f64..1e3, 1..12)) {
        let back = push_forward(&lift(&u));
        for (a, b) in back.iter().zip(&u) {
            prop_assert!((a - 2.0 * b).abs() < 1e-9);
        }
    }

    #[test]
    fn stratum_is_invariant_under_renaming_and_row_swap(i in 0usize..17, shift in 0usize..12) {
        let entries = catalog_entries();
        let e = &entries[i % entries.len()];
        let q = renamed(&e.permutation, shift);
        prop_assert_eq!(stratum_of(&q), e.stratum.clone());
        prop_assert_eq!(stratum_of(&q.swap_rows()), e.stratum.clone());
        prop_assert_eq!(q.fingerprint(), renamed(&q, 1).fingerprint());
        prop_assert_eq!(GeneralizedPermutation::parse(&q.render()).unwrap(), q);
    }

    #[test]
    fn checkpoints_double(t_max in 0u64..1u64 << 40) {
        let c = checkpoints(t_max);
        prop_assert!(c.windows(2).all(|w| w[1] == 2 * w[0]));
        prop_assert!(c.last().map_or(t_max < 1000, |&t| t <= t_max && 2 * t > t_max));
    }
}

#[test]
fn catalog_entries_are_consistent() {
    for e in catalog_entries() {
        let info = stratum_info(&e.stratum);
        assert_eq!(stratum_of(&e.permutation), e.stratum);
        assert_eq!(e.permutation.d() as i64, info.letters(), "{}", e.stratum);
        let c = orient_double_cover(&e.permutation).unwrap();
        assert_eq!(c.skeleton().genus(), info.cover_genus, "{}", e.stratum);
    }
}
