use proptest::prelude::*;

use szego_lab::combinatorics::*;
use szego_lab::LabError;

fn vecs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0f64..4.0, 1..=max_len)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn spec_examples() {
    let iv = |x: &[i64]| IntVector::from_ints(x).unwrap();
    let b = EnumerationBudget::default();
    assert_eq!(ghd_rhs(&iv(&[5, 7]), 2, b).unwrap(), 0.0);
    assert_eq!(hd_classic_rhs(&iv(&[3, 4])), 0.0);
    let (l, r): (f64, f64) = cf_bst_both_sides(&iv(&[0, 0, 0]), |x| x.cos() + 2.0, b).unwrap();
    assert_eq!((l, r), (18.0, 18.0));
    let (l, r): (f64, f64) = cf_bst_both_sides(&iv(&[2, -1, -3]), |x| x * x, b).unwrap();
    assert!((l - r).abs() < 1e-12);
}

#[test]
fn budget_cap_is_configurable() {
    let v = IntVector::new(vec![0.5; 10]).unwrap();
    assert!(matches!(ghd_lhs(&v, 1, EnumerationBudget::default()), Err(LabError::Budget { .. })));
    let small = IntVector::new(vec![0.5; 4]).unwrap();
    assert!(ghd_rhs(&small, 2, EnumerationBudget { max_len: 3 }).is_err());
}

#[test]
fn compositions_are_counted_by_binomials() {
    for m in 1..=8usize {
        for j in 1..=m {
            let n = compositions(m, j).len() as f64;
            let binom = factorial(m - 1) / (factorial(j - 1) * factorial(m - j));
            assert_eq!(n, binom);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn ghd_holds(v in vecs(6), n in 1u32..=4) {
        let v = IntVector::new(v).unwrap();
        let b = EnumerationBudget::default();
        prop_assert!(close(ghd_lhs(&v, n, b).unwrap(), ghd_rhs(&v, n, b).unwrap(), 1e-9));
    }

    #[test]
    fn ghd_at_one_is_classic(v in vecs(6)) {
        let v = IntVector::new(v).unwrap();
        let rhs = ghd_rhs(&v, 1, EnumerationBudget::default()).unwrap();
        prop_assert!(close(rhs, hd_classic_rhs(&v), 1e-12));
    }

    #[test]
    fn cyclic_subgroup_sum(v in vecs(7)) {
        // summing over rotations only already gives neg(Σv)
        let v = IntVector::new(v).unwrap();
        let s: f64 = v.values().iter().sum();
        prop_assert!(close(hd_cyclic_lhs(&v), neg(s), 1e-12));
        prop_assert!(close(hd_cyclic_lhs(&v) * factorial(v.len() - 1), hd_classic_rhs(&v), 1e-12));
    }

    #[test]
    fn max_variant_mirrors(v in vecs(5), n in 1u32..=3) {
        let b = EnumerationBudget::default();
        let iv = IntVector::new(v.clone()).unwrap();
        let flipped = IntVector::new(v.iter().map(|x| -x).collect()).unwrap();
        let l = ghd_lhs_with(Extremum::Max, &iv, n, b).unwrap();
        let r = ghd_rhs_with(Extremum::Max, &iv, n, b).unwrap();
        prop_assert!(close(l, r, 1e-9));
        // max over v equals −min over −v
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(l, sign * ghd_lhs(&flipped, n, b).unwrap(), 1e-12));
    }

    #[test]
    fn cf_bst_holds(v in vecs(6)) {
        let v = IntVector::new(v).unwrap();
        let b = EnumerationBudget::default();
        let fs: [fn(f64) -> f64; 4] = [|x| x, |x| x * x, |x| x * x * x, f64::exp];
        for f in fs {
            let (l, r): (f64, f64) = cf_bst_both_sides(&v, f, b).unwrap();
            prop_assert!(close(l, r, 1e-9));
        }
        let (l, r): (f64, f64) = cf_bst_both_sides_with(Extremum::Max, &v, |x| x * x, b).unwrap();
        prop_assert!(close(l, r, 1e-9));
    }

    #[test]
    fn relabeling_invariance(v in vecs(5), n in 1u32..=3, shift in 0usize..5) {
        let b = EnumerationBudget::default();
        let mut w = v.clone();
        let len = w.len();
        w.rotate_left(shift % len);
        w.reverse();
        let (a, c) = (IntVector::new(v).unwrap(), IntVector::new(w).unwrap());
        prop_assert!(close(ghd_lhs(&a, n, b).unwrap(), ghd_lhs(&c, n, b).unwrap(), 1e-12));
        prop_assert!(close(ghd_rhs(&a, n, b).unwrap(), ghd_rhs(&c, n, b).unwrap(), 1e-12));
        prop_assert!(close(hd_classic_rhs(&a), hd_classic_rhs(&c), 1e-12));
        let (l1, _): (f64, f64) = cf_bst_both_sides(&a, |x| x, b).unwrap();
        let (l2, _): (f64, f64) = cf_bst_both_sides(&c, |x| x, b).unwrap();
        prop_assert!(close(l1, l2, 1e-12));
    }

    #[test]
    fn block_sums_add_up(v in vecs(6), seed in 0usize..720) {
        let m = v.len();
        let iv = IntVector::new(v.clone()).unwrap();
        let comps = compositions(m, 1 + seed % m);
        let c = Composition::new(comps[seed % comps.len()].clone()).unwrap();
        let mut perm: Vec<usize> = (0..m).collect();
        perm.rotate_left(seed % m);
        let s = block_sums(&iv, &c, &perm).unwrap();
        prop_assert_eq!(s.len(), c.parts().len());
        let total: f64 = v.iter().sum();
        prop_assert!((s.iter().sum::<f64>() - total).abs() < 1e-12);
    }
}
