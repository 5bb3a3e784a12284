use num_complex::Complex64 as C;
use proptest::prelude::*;

use szego_lab::randwalk::*;

fn lopsided() -> StepDist {
    StepDist::new(vec![-2.0, 0.5, 1.0], vec![0.2, 0.5, 0.3]).unwrap()
}

fn dists() -> [StepDist; 2] {
    [StepDist::symmetric(), lopsided()]
}

#[test]
fn no_max_weight_gives_powers_of_the_characteristic_function() {
    for d in dists() {
        for (p, q) in [(1, 1), (2, 3), (4, 1)] {
            for alpha in [0.3, -1.1, 2.5] {
                let want = d.char_fn(alpha).powu(p as u32);
                assert!((enumerate_lhs(&d, p, q, alpha, 0.0).unwrap() - want).norm() < 1e-14);
                let rhs = formula_rhs_coeff(&d, p, q, alpha, 0.0, DEFAULT_PATH_BUDGET).unwrap();
                assert!((rhs - want).norm() < 1e-12, "p={p} q={q} α={alpha}");
            }
        }
    }
}

#[test]
fn convolution_powers_are_normalised() {
    let d = lopsided();
    for n in 0..=5 {
        let law = d.convolution_power(n);
        assert!((law.iter().map(|a| a.1).sum::<f64>() - 1.0).abs() < 1e-14);
        let mean: f64 = law.iter().map(|a| a.0 * a.1).sum();
        assert!((mean - n as f64 * 0.15).abs() < 1e-13);
    }
    // atoms of the ±1 walk after three steps
    assert_eq!(StepDist::symmetric().convolution_power(3).len(), 4);
}

#[test]
fn json_round_trip_and_validation() {
    let d = lopsided();
    let s = serde_json::to_string(&d).unwrap();
    let back: StepDist = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
    for bad in [
        r#"{"support":[1.0],"probs":[0.5]}"#,
        r#"{"support":[1.0,2.0],"probs":[1.0]}"#,
        r#"{"support":[],"probs":[]}"#,
        r#"{"support":[1.0,2.0],"probs":[1.5,-0.5]}"#,
    ] {
        assert!(serde_json::from_str::<StepDist>(bad).is_err(), "{bad}");
    }
    assert!(StepDist::new(vec![f64::NAN], vec![1.0]).is_err());
}

#[test]
fn invalid_sizes_and_budget() {
    let d = StepDist::symmetric();
    assert!(enumerate_lhs(&d, 0, 2, 0.1, 0.1).is_err());
    assert!(formula_rhs_coeff(&d, 2, 0, 0.1, 0.1, DEFAULT_PATH_BUDGET).is_err());
    assert!(enumerate_lhs_with(&d, 6, 6, 0.1, 0.1, 100).is_err());
    assert!(formula_rhs_coeff(&d, 4, 4, 0.1, 0.1, 10).is_err());
}

#[test]
fn grid_pairs_carry_their_parameters() {
    let grid = [(0.2, 0.7), (-0.4, 1.3)];
    let out = compare_grid(&lopsided(), 2, 2, &grid).unwrap();
    assert_eq!(out.len(), 2);
    for ((m, rhs), &(a, b)) in out.iter().zip(&grid) {
        assert_eq!((m.p, m.q, m.alpha, m.beta), (2, 2, a, b));
        assert!((m.value - *rhs).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn formula_matches_enumeration(
        which in 0usize..2,
        p in 1usize..=4,
        q in 1usize..=4,
        alpha in -3.2f64..3.2,
        beta in -3.2f64..3.2,
    ) {
        prop_assume!(p + q <= 6);
        let d = &dists()[which];
        let lhs = enumerate_lhs(d, p, q, alpha, beta).unwrap();
        let rhs = formula_rhs_coeff(d, p, q, alpha, beta, DEFAULT_PATH_BUDGET).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn hermitian_symmetry(which in 0usize..2, p in 1usize..=3, q in 1usize..=3, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let d = &dists()[which];
        let a = enumerate_lhs(d, p, q, alpha, beta).unwrap();
        let b = enumerate_lhs(d, p, q, -alpha, -beta).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-14);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        let r = formula_rhs_coeff(d, p, q, -alpha, -beta, DEFAULT_PATH_BUDGET).unwrap();
        prop_assert!((r - a.conj()).norm() < 1e-10);
        prop_assert!((enumerate_lhs(d, p, q, 0.0, 0.0).unwrap() - C::new(1.0, 0.0)).norm() < 1e-14);
    }
}
