use num_complex::Complex64 as C;
use proptest::prelude::*;

use szego_lab::funcmaps::*;

fn cplx() -> impl Strategy<Value = C> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C::new(a, b))
}

fn series(max_deg: usize) -> impl Strategy<Value = PowerSeries> {
    prop::collection::vec(cplx(), 1..=max_deg).prop_map(|c| PowerSeries::new(c).unwrap())
}

#[test]
fn w2_integral_matches_monomials() {
    for m in 1..=6i32 {
        let fp = move |x: f64| m as f64 * x.powi(m - 1);
        let fpp = move |x: f64| (m * (m - 1)) as f64 * x.powi((m - 2).max(0));
        for (x1, x2) in [(0.3, 0.8), (1.2, -0.5), (-0.7, -0.9), (0.6, 0.6)] {
            let v = w2_integral(&fp, &fpp, x1, x2, 0.0, 1e-12);
            let want = w2_monomial(m as usize, C::new(x1, 0.0), C::new(x2, 0.0)).re;
            assert!((v - want).abs() < 1e-8, "m={m} ({x1},{x2}): {v} vs {want}");
            let vt = w2_tilde_integral(&fp, &fpp, x1, x2, 0.0, 1e-12);
            let want_t = w2_tilde_monomial(m as usize, C::new(x1, 0.0), C::new(x2, 0.0)).re;
            assert!((vt - want_t).abs() < 1e-8, "tilde m={m}: {vt} vs {want_t}");
        }
    }
}

#[test]
fn log_closed_forms_with_base_point_one() {
    let fp = |x: f64| 1.0 / x;
    let fpp = |x: f64| -1.0 / (x * x);
    for (x1, x2) in [(0.5, 1.7), (2.0, 2.0), (1.3, 0.6)] {
        let v = w2_integral(&fp, &fpp, x1, x2, 1.0, 1e-12);
        assert!((v - w2_log(x1, x2).unwrap()).abs() < 1e-10);
        // the single integral gives −½ log x1 / x2
        let t = w2_tilde_integral(&fp, &fpp, x1, x2, 1.0, 1e-12);
        assert!((t + 0.5 * x1.ln() / x2).abs() < 1e-10);
    }
    assert!(w2_log(-1.0, 2.0).is_err());
}

#[test]
fn phi2_residue_form() {
    // f = z² + 0.5 z³ − 0.25 z⁵, g = f/z
    let f = PowerSeries::from_real(&[0.0, 1.0, 0.5, 0.0, -0.25]).unwrap();
    let g = |x: f64| x + 0.5 * x * x - 0.25 * x.powi(4);
    let dg = |x: f64| 1.0 + x - x.powi(3);
    for (x1, x2) in [(0.4, 0.9), (-0.6, 0.3), (1.1, 1.1)] {
        let v = phi2_integral(&g, &dg, x1, x2, 1e-12);
        let want = phi_series(2, &f, &[C::new(x1, 0.0), C::new(x2, 0.0)]).unwrap().re;
        assert!((v - want).abs() < 1e-8);
    }
}

#[test]
fn tilde_is_not_symmetric() {
    let (a, b) = (C::new(2.0, 0.0), C::new(3.0, 0.0));
    assert_ne!(w2_tilde_monomial(3, a, b), w2_tilde_monomial(3, b, a));
}

#[test]
fn recursion_matches_enumeration_above_threshold() {
    let x = [C::new(0.3, 0.1), C::new(-0.4, 0.2), C::new(0.5, -0.3)];
    let m = ENUMERATION_MAX_DEGREE + 4;
    let dp = phi_monomial(3, m, &x).unwrap();
    let w = weighted_products(&x, m, false);
    assert!((dp - w[m]).norm() < 1e-15);
    let mut lit = C::new(0.0, 0.0);
    szego_lab::combinatorics::for_each_composition(m, 3, |l| {
        lit += l.iter().zip(&x).map(|(&li, xi)| xi.powu(li as u32) / li as f64).product::<C>();
    });
    assert!((dp - lit).norm() < 1e-14);
}

#[test]
fn merge_zero_inputs() {
    let z = vec![C::new(0.0, 0.0); 4];
    let (l, r) = phi_merge_check(6, &z, &z, &z).unwrap();
    assert_eq!((l, r), (C::new(0.0, 0.0), C::new(0.0, 0.0)));
    assert!(phi_merge_check(6, &z[..2], &z, &z).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn maps_are_linear(f in series(7), g in series(7), a in cplx(), b in cplx(), x in prop::collection::vec(cplx(), 3)) {
        let h = f.combine(a, &g, b);
        for kind in [MapKind::W2, MapKind::W2Tilde, MapKind::W3, MapKind::F(3), MapKind::Phi(2), MapKind::Phi(3)] {
            let xs = &x[..kind.arity()];
            let lhs = apply(kind, &h, xs).unwrap().value;
            let rhs = a * apply(kind, &f, xs).unwrap().value + b * apply(kind, &g, xs).unwrap().value;
            prop_assert!((lhs - rhs).norm() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn two_variable_h_identity(u in cplx(), v in cplx(), r in 0usize..=12) {
        prop_assume!((u - v).norm() > 1e-3);
        let want = (u.powu(r as u32 + 1) - v.powu(r as u32 + 1)) / (u - v);
        prop_assert!((phi_tilde(2, r, &[u, v]).unwrap() - want).norm() < 1e-10);
    }

    #[test]
    fn symmetric_maps(x in prop::collection::vec(cplx(), 4), m in 1usize..10) {
        let mut y = x.clone();
        y.rotate_left(1);
        y.swap(0, 2);
        prop_assert!((phi_tilde(4, m, &x).unwrap() - phi_tilde(4, m, &y).unwrap()).norm() < 1e-12);
        prop_assert!((phi_monomial(4, m, &x).unwrap() - phi_monomial(4, m, &y).unwrap()).norm() < 1e-12);
        prop_assert!((w2_monomial(m, x[0], x[1]) - w2_monomial(m, x[1], x[0])).norm() < 1e-12);
    }

    #[test]
    fn merge_identity(p in 3usize..=7, x in prop::collection::vec(cplx(), 5), y in prop::collection::vec(cplx(), 5), z in prop::collection::vec(cplx(), 5)) {
        let (l, r) = phi_merge_check(p, &x[..p - 2], &y[..p - 2], &z[..p - 2]).unwrap();
        prop_assert!((l - r).norm() < 1e-12);
    }

    #[test]
    fn taylor_tail_drops_low_terms(f in series(9), t in 2usize..5) {
        match f.taylor_tail_shifted(t) {
            None => prop_assert!(f.degree() <= t),
            Some(g) => {
                for k in 1..=g.degree() {
                    let want = if k + 2 > t { f.coeff(k + 2) } else { C::new(0.0, 0.0) };
                    prop_assert_eq!(g.coeff(k), want);
                }
            }
        }
    }
}
