use proptest::prelude::*;

use quantlab::coherent::{sigma, sigma_closed_form};
use quantlab::irrep::{Irrep, IrrepLabel};
use quantlab::psh::{theta_spectrum, CubicSpline, InvariantPotential};
use quantlab::report::{from_json, to_json};
use quantlab::sampling::sample_rng;
use quantlab::suite::Suite;
use quantlab::{AlgebraVec, CheckReport, LieModel};

fn potential(which: usize) -> InvariantPotential {
    match which {
        0 => InvariantPotential::square(),
        1 => InvariantPotential::log_eta(),
        _ => InvariantPotential::combined(std::f64::consts::TAU, 2.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potentials_are_adjoint_invariant(
        seed in any::<u64>(),
        which in 0usize..3,
        y in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let model = LieModel::su2();
        let k = potential(which);
        let mut rng = sample_rng(seed, 0, 0);
        let g = model.random_group_point(&mut rng).unwrap();
        let y = AlgebraVec::new(y);
        let moved = model.adjoint_action(&g, &y).unwrap();
        // Extend K to the whole algebra through conjugation into the torus.
        let on_g = |v: &AlgebraVec| k.value(&model, &model.torus_conjugate(v).unwrap().1);
        let (a, b) = (on_g(&y), on_g(&moved));
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn convex_potentials_have_nonnegative_spectrum(which in 0usize..3, y in -6.0f64..6.0) {
        let s = theta_spectrum(&LieModel::su2(), &potential(which), &[y]);
        prop_assert!(s.min_eigenvalue >= -1e-10, "min eigenvalue {} at y = {y}", s.min_eigenvalue);
    }

    #[test]
    fn negative_square_is_never_psh(y in -6.0f64..6.0) {
        let s = theta_spectrum(&LieModel::su2(), &InvariantPotential::neg_square(), &[y]);
        prop_assert!(s.min_eigenvalue < 0.0);
    }

    #[test]
    fn spline_interpolates_its_knots(
        steps in prop::collection::vec(0.05f64..1.0, 3..12),
        ys in prop::collection::vec(-5.0f64..5.0, 12),
    ) {
        let mut x = vec![0.0];
        for s in &steps {
            x.push(x.last().unwrap() + s);
        }
        let y = ys[..x.len()].to_vec();
        let spline = CubicSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            prop_assert!((spline.eval(*xi).0 - yi).abs() < 1e-10);
        }
    }

    #[test]
    fn su2_sigma_quadrature_matches_closed_form(twice_j in 0u32..13) {
        let model = LieModel::su2();
        let label = IrrepLabel::Su2 { twice_j };
        let irrep = Irrep::new(&model, label.clone()).unwrap();
        let q = sigma(&model, &irrep).unwrap().value;
        let c = sigma_closed_form(&model, &label).unwrap();
        prop_assert!((q - c).abs() <= 1e-10 * c.max(1.0), "{q} vs {c}");
    }

    #[test]
    fn u1_sigma_quadrature_matches_closed_form(n in -8i64..=8) {
        let model = LieModel::u1();
        let label = IrrepLabel::Torus(vec![n]);
        let irrep = Irrep::new(&model, label.clone()).unwrap();
        let q = sigma(&model, &irrep).unwrap().value;
        let c = sigma_closed_form(&model, &label).unwrap();
        prop_assert!((q - c).abs() <= 1e-10 * c.max(1.0), "{q} vs {c}");
    }

    #[test]
    fn report_json_round_trips(
        id in "[a-z]{1,8}(\\.[a-z_]{1,8}){0,3}",
        tol in 1e-14f64..1.0,
        err in 0.0f64..10.0,
        samples in any::<u32>(),
    ) {
        let r = CheckReport::new(&id, "citation", tol, err).with("samples", samples as u64);
        let back = from_json(&to_json(std::slice::from_ref(&r)).unwrap()).unwrap();
        prop_assert_eq!(back, vec![r]);
    }

    #[test]
    fn suite_names_round_trip(i in 0usize..6) {
        let s: Suite = Suite::NAMES[i].parse().unwrap();
        prop_assert_eq!(s.to_string(), Suite::NAMES[i]);
    }
}
