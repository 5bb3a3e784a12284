use proptest::prelude::*;

use szego_lab::combinatorics::{max_partial_sum, min_partial_sum_i};
use szego_lab::omega::*;

fn ints(min_len: usize, max_len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-4i64..=4, min_len..=max_len)
}

fn ascending(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable();
    v
}

#[test]
fn split_examples() {
    assert_eq!(split_one(&[1, -2, 3], 1).unwrap(), (-1, -1));
    assert_eq!(split_one(&[0, 0, 0], 2).unwrap(), (0, 0));
    assert_eq!(split_two(&[0, 0, 0], 1).unwrap(), (0, 0));
    assert!(split_one(&[1, 2], 2).is_err());
    assert!(split_two(&[1, 2, 3], 2).is_err());
}

#[test]
fn random_walk_functional_examples() {
    assert_eq!(omega_rw(&[0.0], &[0.0]).unwrap(), 0.0);
    assert_eq!(omega_rw(&[-1.0], &[2.0]).unwrap(), 1.0);
    assert_eq!(omega_rw(&[2.0, -1.0], &[1.0]).unwrap(), 2.0);
    assert!(omega_rw(&[], &[1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn transcriptions_agree_and_are_nonpositive(
        k1 in -5i64..=5, k2 in -5i64..=5,
        mu in ints(1, 4), nu in ints(1, 4), rho in ints(1, 4),
    ) {
        let a = OmegaArgs::new((k1, k2), mu, nu, rho);
        let (o1, o2, o3) = (omega1(&a).unwrap(), omega2(&a).unwrap(), omega3(&a).unwrap());
        prop_assert_eq!(o1, omega1_blocks(&a).unwrap());
        prop_assert_eq!(o2, omega2_blocks(&a).unwrap());
        prop_assert_eq!(o3, omega3_blocks(&a).unwrap());
        prop_assert!(o1 <= 0 && o2 <= 0 && o3 <= 0);
    }

    #[test]
    fn three_block_pattern_is_a_running_minimum(
        k1 in -5i64..=5, k2 in -5i64..=5,
        mu in ints(1, 3), nu in ints(1, 3), rho in ints(1, 3),
    ) {
        let (mu, nu, rho) = (ascending(mu), ascending(nu), ascending(rho));
        let mut flat = mu.clone();
        flat.push(k1);
        flat.extend(&nu);
        flat.push(k2);
        flat.extend(&rho);
        let a = OmegaArgs::new((k1, k2), mu, nu, rho);
        prop_assert_eq!(omega3(&a).unwrap(), min_partial_sum_i(&flat));
    }

    #[test]
    fn splits_hold(mu in ints(2, 8), j in 1usize..8) {
        let p = mu.len();
        if j < p {
            let (a, b) = split_one(&mu, j).unwrap();
            prop_assert_eq!(a, b);
        }
        if j + 2 <= p {
            let (a, b) = split_two(&mu, j).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn random_walk_functional(
        y in prop::collection::vec(-3.0f64..3.0, 1..4),
        z in prop::collection::vec(-3.0f64..3.0, 1..4),
    ) {
        let v = omega_rw(&y, &z).unwrap();
        prop_assert!(v >= 0.0);
        prop_assert!((v - omega_rw_blocks(&y, &z).unwrap()).abs() < 1e-12);
        let mut flat = y.clone();
        flat.sort_by(|a, b| b.total_cmp(a));
        let mut zs = z.clone();
        zs.sort_by(|a, b| b.total_cmp(a));
        flat.extend(zs);
        prop_assert!((v - max_partial_sum(&flat)).abs() < 1e-12);
    }

    #[test]
    fn m2_is_a_running_minimum(x in -9i64..9, y in -9i64..9) {
        prop_assert_eq!(m2(x, y), min_partial_sum_i(&[x, y]));
    }
}
