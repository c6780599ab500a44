mod common;

use std::collections::BTreeMap;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use superlift::analytic::{winding_degree, AnalyticFn, Laurent};
use superlift::cech::{solve_coboundary, splitting_residual, CLaurent, CoboundaryOutcome, CoboundaryProblem};
use superlift::json;
use superlift::nsalg::{loop_exponential, make_generator, super_bracket, NsFamily, SuperDerivation};
use superlift::supermap::{f1_functor, f2_functor};
use superlift::torus::{is_trivial_type, validate_theta_type, ThetaType};
use superlift::{Grassmann, Parity};

const TOL: f64 = 1e-12;

fn sign(x: &SuperDerivation, y: &SuperDerivation) -> f64 {
    if x.parity == Parity::Odd && y.parity == Parity::Odd {
        -1.0
    } else {
        1.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grassmann_ring_laws(seed in any::<u64>(), l in 1usize..=7) {
        let mut r = rng(seed);
        let a = rand_grassmann(&mut r, l, Kind::Any);
        let b = rand_grassmann(&mut r, l, Kind::Any);
        let c = rand_grassmann(&mut r, l, Kind::Any);
        prop_assert!((&(&a * &b) * &c).approx_eq(&(&a * &(&b * &c)), TOL));
        prop_assert!((&a * &(&b + &c)).approx_eq(&(&(&a * &b) + &(&a * &c)), TOL));
    }

    #[test]
    fn homogeneous_elements_supercommute(seed in any::<u64>(), l in 1usize..=8) {
        let mut r = rng(seed);
        let e = rand_grassmann(&mut r, l, Kind::Even);
        let o1 = rand_grassmann(&mut r, l, Kind::Odd);
        let o2 = rand_grassmann(&mut r, l, Kind::Odd);
        prop_assert!((&e * &o1).approx_eq(&(&o1 * &e), TOL));
        prop_assert!((&o1 * &o2).approx_eq(&-(&o2 * &o1), TOL));
        prop_assert!((&o1 * &o1).is_zero());
    }

    #[test]
    fn unit_inverse_log_exp_sqrt(seed in any::<u64>(), l in 0usize..=8) {
        let mut r = rng(seed);
        let u = rand_unit(&mut r, l);
        let one = Grassmann::one(l);
        prop_assert!((&u * &u.invert().unwrap()).approx_eq(&one, 1e-11));
        prop_assert!(u.log().unwrap().exp().approx_eq(&u, 1e-11));
        let s = u.sqrt(true).unwrap();
        prop_assert!((&s * &s).approx_eq(&u, 1e-11));
    }

    #[test]
    fn laurent_leibniz(seed in any::<u64>(), l in 0usize..=5) {
        let mut r = rng(seed);
        let p = rand_laurent(&mut r, l, Kind::Even, -4, 4, 4, 1.0);
        let q = rand_laurent(&mut r, l, Kind::Any, -4, 4, 4, 1.0);
        let lhs = p.mul(&q).derivative();
        let rhs = p.derivative().mul(&q).add(&p.mul(&q.derivative()));
        prop_assert!(coeff_diff(&lhs.into(), &rhs.into()) <= TOL);
    }

    #[test]
    fn winding_degree_of_dominant_monomial(seed in any::<u64>(), k in -4i32..=4) {
        let mut r = rng(seed);
        let mut f = Laurent::monomial(k, Grassmann::scalar(2, Complex64::from_polar(1.0, r.gen_range(0.0..std::f64::consts::TAU))));
        for j in -3..=3 {
            if j != k {
                f = f.add(&Laurent::monomial(j, Grassmann::scalar(2, rand_c(&mut r, 0.08))));
            }
        }
        f = f.add(&rand_laurent(&mut r, 2, Kind::EvenSoul, -3, 3, 2, 1.0));
        prop_assert_eq!(winding_degree(&f.into()).unwrap(), k as i64);
    }

    #[test]
    fn coordinate_systems_round_trip(seed in any::<u64>(), k in prop::sample::select(vec![-1, 1, 2])) {
        let mut r = rng(seed);
        let h = rand_n2_superconformal(&mut r, 4, k, 3);
        let back = h.to_nonhomogeneous().to_homogeneous();
        prop_assert!(n2_coeff_diff(&back, &h) <= TOL);
    }

    #[test]
    fn functors_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = rand_n1_superconformal(&mut r, 4, 3);
        let back = f1_functor(&f2_functor(&m, false).unwrap()).unwrap();
        prop_assert!(n1_coeff_diff(&back, &m) <= TOL);
    }

    #[test]
    fn coboundary_splitting_reproduces_cocycle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ell: CLaurent = (0..r.gen_range(1..6)).map(|_| (r.gen_range(-6..=6), rand_c(&mut r, 1.0))).collect();
        let p = CoboundaryProblem::new(ell, Complex64::new(-1.0, 0.0), -2);
        match solve_coboundary(&p).unwrap() {
            CoboundaryOutcome::Solved(s) => {
                let worst = splitting_residual(&p, &s).values().fold(0.0f64, |a, v| a.max(v.norm()));
                prop_assert!(worst <= TOL);
            }
            CoboundaryOutcome::Obstructed(o) => prop_assert!(false, "unexpected obstruction {:?}", o),
        }
    }

    #[test]
    fn chern_is_additive(seed in any::<u64>(), l in 0usize..=3) {
        let mut r = rng(seed);
        let tau = rand_tau(&mut r);
        let (t1, k1) = rand_theta_type(&mut r, l, tau);
        let (t2, k2) = rand_theta_type(&mut r, l, tau);
        prop_assert_eq!(validate_theta_type(&t1).unwrap(), k1);
        prop_assert_eq!(validate_theta_type(&t1.add(&t2)).unwrap(), k1 + k2);
    }

    #[test]
    fn trivial_types_are_detected(seed in any::<u64>(), l in 0usize..=4) {
        let mut r = rng(seed);
        let tau = rand_tau(&mut r);
        let a = &Grassmann::scalar(l, rand_c(&mut r, 0.5)) + &rand_grassmann(&mut r, l, Kind::EvenSoul);
        let b = &Grassmann::scalar(l, rand_c(&mut r, 0.5)) + &rand_grassmann(&mut r, l, Kind::EvenSoul);
        prop_assert!(is_trivial_type(&ThetaType::trivial_from(&a, &b, tau)));
        prop_assert!(!is_trivial_type(&ThetaType::jacobi(l, tau).add(&ThetaType::trivial_from(&a, &b, tau))));
    }

    #[test]
    fn loop_exponential_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = 4;
        let rand_a = |r: &mut rand_chacha::ChaCha8Rng| -> BTreeMap<i32, Grassmann> {
            (0..r.gen_range(1..=3)).map(|_| (r.gen_range(-2..=2), rand_grassmann_with(r, l, Kind::EvenSoul, 0.4, 1.0, false))).collect()
        };
        let a = rand_a(&mut r);
        let b = rand_a(&mut r);
        let mut sum = a.clone();
        for (k, v) in &b {
            let e = sum.entry(*k).or_insert_with(|| Grassmann::zero(l));
            *e = &*e + v;
        }
        let one = Grassmann::one(l);
        let lhs = loop_exponential(&a, &one, l).unwrap().compose(&loop_exponential(&b, &one, l).unwrap(), false).unwrap();
        let rhs = loop_exponential(&sum, &one, l).unwrap();
        prop_assert!(n2_coeff_diff(&lhs, &rhs) <= TOL);
    }

    #[test]
    fn ns_brackets_antisymmetric_and_jacobi(
        family in prop::sample::select(vec![NsFamily::N1, NsFamily::N2Nonhomogeneous, NsFamily::N1Extended, NsFamily::N2Homogeneous]),
        picks in prop::collection::vec((0usize..8, -3i32..=3), 3),
    ) {
        let kinds = family.kinds();
        let gens: Vec<SuperDerivation> = picks
            .iter()
            .map(|&(i, n)| make_generator(kinds[i % kinds.len()], n, family.coords()).unwrap())
            .collect();
        let (x, y, z) = (&gens[0], &gens[1], &gens[2]);
        let xy = super_bracket(x, y).unwrap();
        let yx = super_bracket(y, x).unwrap();
        prop_assert!(xy.distance(&yx.scale_c(Complex64::new(-sign(x, y), 0.0))) <= TOL);
        let lhs = super_bracket(x, &super_bracket(y, z).unwrap()).unwrap();
        let rhs = super_bracket(&xy, z).unwrap().add(&super_bracket(y, &super_bracket(x, z).unwrap()).unwrap().scale_c(Complex64::new(sign(x, y), 0.0)));
        prop_assert!(lhs.distance(&rhs) <= TOL);
    }

    #[test]
    fn json_round_trips(seed in any::<u64>(), l in 1usize..=5) {
        let mut r = rng(seed);
        let g = rand_grassmann(&mut r, l, Kind::Any);
        prop_assert_eq!(json::decode_grassmann(&json::encode_grassmann(&g), "$", l).unwrap(), g);
        let f: AnalyticFn = rand_laurent(&mut r, l, Kind::Any, -3, 3, 3, 1.0).into();
        let back = json::decode_fn(&json::encode_fn(&f).unwrap(), "$", l).unwrap();
        prop_assert!(coeff_diff(&back, &f) == 0.0);
        let h = rand_n2_superconformal(&mut r, l, 1, 2);
        let back = json::decode_n2(&json::encode_n2(&h).unwrap(), "$", l).unwrap();
        prop_assert!(n2_coeff_diff(&back, &h) == 0.0);
        let tau = rand_tau(&mut r);
        let (t, _) = rand_theta_type(&mut r, l, tau);
        prop_assert_eq!(json::decode_theta_type(&json::encode_theta_type(&t), "$", l).unwrap(), t);
    }
}
