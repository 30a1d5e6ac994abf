use proptest::prelude::*;

use schrlat::experiments::fit_exponent;
use schrlat::lattice::LatticeJson;
use schrlat::profile::ProfileJson;
use schrlat::propagator::{lattice_phase_deviation, phase_theta};
use schrlat::weight::WeightJson;
use schrlat::{
    build_lattice, line_integral, lower_bound_check, AxisFamily, BoxUnionWeight, Cuboid, DyadicParams,
    FrequencyProfile, QuadratureSpec, Rational,
};

fn params() -> impl Strategy<Value = (u32, u32, u32)> {
    (6u32..=14)
        .prop_flat_map(|a| (Just(a), 1u32..a.div_ceil(2), 1u32..=3))
        .prop_filter("small profile", |&(a, c, k)| {
            DyadicParams::new(a, c).map(|p| p.ell_count().pow(k) <= 2048).unwrap_or(false)
        })
}

fn profile(a: u32, c: u32, k: u32) -> FrequencyProfile {
    FrequencyProfile::new(DyadicParams::new(a, c).unwrap(), k).unwrap()
}

fn dyadic(num: i64, log2: u32) -> Rational {
    Rational::new(num as i128, 1i128 << log2)
}

fn axis() -> impl Strategy<Value = AxisFamily> {
    prop::collection::btree_set(-20i64..20, 1..5).prop_map(|cs| {
        let centers = cs.into_iter().map(|c| dyadic(4 * c, 2)).collect();
        AxisFamily::uniform(centers, dyadic(1, 2)).unwrap()
    })
}

fn product_weight() -> impl Strategy<Value = BoxUnionWeight> {
    (1usize..=3).prop_flat_map(|n| prop::collection::vec(axis(), n).prop_map(|a| BoxUnionWeight::product(a).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mass_recursion((a, c, k) in params()) {
        let p = DyadicParams::new(a, c).unwrap();
        let g = FrequencyProfile::new(p, k).unwrap();
        let expected = (0..k).fold(Rational::from_integer(2), |m, _| {
            m * p.delta() * Rational::from_integer(p.ell_count() as i128)
        });
        prop_assert_eq!(g.support_mass(), expected);
        if k >= 2 {
            let (base, maps) = g.self_similar_decomposition().unwrap();
            prop_assert_eq!(maps.len() as u64, p.ell_count());
            let factor = p.delta() * Rational::from_integer(p.ell_count() as i128);
            prop_assert_eq!(base.support_mass() * factor, g.support_mass());
        }
    }

    #[test]
    fn profile_json_round_trip((a, c, k) in params()) {
        let g = profile(a, c, k);
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back: ProfileJson = serde_json::from_str(&text).unwrap();
        let h = FrequencyProfile::from_json(&back).unwrap();
        prop_assert_eq!(g.intervals(), h.intervals());
    }

    #[test]
    fn conjugation_symmetry(s in -40.0f64..40.0, t in -40.0f64..40.0) {
        let g = profile(8, 2, 2);
        let q = QuadratureSpec::default();
        let u = line_integral(&g, s, t, &q);
        let v = line_integral(&g, -s, -t, &q);
        prop_assert!((u - v.conj()).norm() < 1e-12);
    }

    #[test]
    fn certificate_is_a_lower_bound(
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
        ds in -0.5f64..0.5,
        dt in -0.5f64..0.5,
    ) {
        let p = DyadicParams::new(10, 2).unwrap();
        let g = FrequencyProfile::new(p, 1).unwrap();
        let l = build_lattice(p, 1, 2, &Rational::new(1, 40)).unwrap();
        let s = schrlat::rational::to_f64(i.get(l.x_values())) + ds;
        let t = schrlat::rational::to_f64(j.get(l.t_values())) + dt;
        let theta = phase_theta(&g, s, t);
        prop_assume!(theta < 0.25);
        let check = lower_bound_check(&g, 2, &[s], t, &QuadratureSpec::default()).unwrap();
        prop_assert!(check.holds, "bound {} measured {}", check.bound, check.measured);
    }

    #[test]
    fn theta_is_dominated_by_small_terms(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let p = DyadicParams::new(12, 3).unwrap();
        let g = FrequencyProfile::new(p, 2).unwrap();
        let l = build_lattice(p, 2, 2, &Rational::new(1, 40)).unwrap();
        let pm = i.get(l.x_indices()).clone();
        let qm = j.get(l.t_indices()).clone();
        let cert = lattice_phase_deviation(&g, &pm, &qm).unwrap();
        prop_assert!(cert.theta <= cert.small_term_bound() + 1e-9);
    }

    #[test]
    fn lattice_json_round_trip(n in 2usize..=3, den in 20i128..80) {
        let p = DyadicParams::new(12, 3).unwrap();
        let l = build_lattice(p, 1, n, &Rational::new(1, den)).unwrap();
        let text = serde_json::to_string(&l.to_json()).unwrap();
        let back: LatticeJson = serde_json::from_str(&text).unwrap();
        let m = schrlat::LatticeSet::from_json(&back).unwrap();
        prop_assert_eq!(l.x_values(), m.x_values());
        prop_assert_eq!(l.t_values(), m.t_values());
    }

    #[test]
    fn weight_json_round_trip(w in product_weight()) {
        let text = serde_json::to_string(&w.to_json()).unwrap();
        let back: WeightJson = serde_json::from_str(&text).unwrap();
        prop_assert!(BoxUnionWeight::from_json(&back).unwrap().same_boxes(&w));
    }

    #[test]
    fn box_mass_is_monotone_in_the_radius(
        w in product_weight(),
        x in prop::collection::vec(-30.0f64..30.0, 3),
        r in 0.0f64..20.0,
        dr in 0.0f64..5.0,
    ) {
        let x = &x[..w.dimension()];
        let small = w.box_mass(x, r);
        let large = w.box_mass(x, r + dr);
        prop_assert!(small <= large + 1e-12);
        prop_assert!(large <= w.volume_f64() + 1e-9);
        prop_assert!((small - w.box_mass_enumerated(x, r)).abs() < 1e-9);
    }

    #[test]
    fn box_mass_is_additive(
        x in prop::collection::vec(-10.0f64..10.0, 2),
        r in 0.0f64..12.0,
        c1 in -8i64..0,
        c2 in 1i64..8,
    ) {
        let half = vec![dyadic(1, 1); 2];
        let b1 = Cuboid::new(vec![Rational::from_integer(c1 as i128); 2], half.clone()).unwrap();
        let b2 = Cuboid::new(vec![Rational::from_integer(c2 as i128); 2], half).unwrap();
        let both = BoxUnionWeight::from_boxes(2, vec![b1.clone(), b2.clone()]).unwrap();
        let sum = BoxUnionWeight::from_boxes(2, vec![b1]).unwrap().box_mass(&x, r)
            + BoxUnionWeight::from_boxes(2, vec![b2]).unwrap().box_mass(&x, r);
        prop_assert!((both.box_mass(&x, r) - sum).abs() < 1e-12);
    }

    #[test]
    fn box_mass_scales_with_dilation(
        w in product_weight(),
        x in prop::collection::vec(-30.0f64..30.0, 3),
        r in 0.1f64..20.0,
        e in -3i32..=3,
    ) {
        let n = w.dimension();
        let x = &x[..n];
        let lambda = 2f64.powi(e);
        let scaled = w.scale(&schrlat::rational::pow2(e)).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        let lhs = scaled.box_mass(&xs, r * lambda);
        let rhs = lambda.powi(n as i32) * w.box_mass(x, r);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn fit_recovers_exact_power_laws(slope in -4.0f64..4.0, scale in 0.01f64..100.0, start in 2i64..10) {
        let samples: Vec<(f64, f64)> = (start..start + 5)
            .map(|a| (2f64.powi(a as i32), scale * 2f64.powf(slope * a as f64)))
            .collect();
        let fit = fit_exponent(&samples).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!(fit.max_residual < 1e-9);
    }
}
