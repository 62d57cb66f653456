use olb_core::billiard;
use olb_core::forge::{from_f, radon_like, ArcInput, FourPeriodicSpec, Harmonic, Profile};
use olb_core::genfun::ChordConfig;
use olb_core::periodic::invariant_curve_scan;
use olb_core::PlanePoint;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

fn spec() -> impl Strategy<Value = FourPeriodicSpec> {
    (-0.2..0.2f64, -0.01..0.01f64, -0.004..0.004f64).prop_map(|(e2, e6, c6)| {
        FourPeriodicSpec::new(vec![
            Harmonic { k: 2, sin: e2, cos: 0.0 },
            Harmonic { k: 6, sin: e6, cos: c6 },
            Harmonic { k: 2, sin: 0.0, cos: -c6 },
        ])
        .unwrap()
    })
}

fn diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn profile_conditions(s in spec(), x in 0.0..TAU) {
        prop_assert!((s.jet(x + FRAC_PI_2)[0] + s.jet(x)[0]).abs() < 1e-12);
        prop_assert!(s.jet(x)[1].abs() < 2.0);
        prop_assert!(s.jet(0.0)[0].abs() < 1e-12);
    }

    #[test]
    fn four_periodic_tables(s in spec(), x in 0.0..TAU) {
        let table = from_f(Arc::new(s)).unwrap();
        let oval = &table.oval;
        prop_assert!(oval.validate().passed);

        let st = table.parallelogram(x);
        prop_assert!(st.normalization_defect().abs() < 1e-12);
        prop_assert!((st.perimeter() - 4.0).abs() < 1e-12);
        prop_assert!(st.omega() > 0.0 && st.omega() < PI && st.p1 > 0.0 && st.p2 > 0.0);

        // tangency extraction reproduces the parameterization
        prop_assert!(diff(table.alpha(x), st.alpha1) < 1e-12);
        let [p, dp, _] = table.support_jet(x);
        let a = st.alpha1;
        let gamma = PlanePoint::new(a.cos(), a.sin()) * p + PlanePoint::new(-a.sin(), a.cos()) * dp;
        prop_assert!((oval.point_at(a) - gamma).norm() < 1e-9);
        prop_assert!((oval.p(st.alpha1) - st.p1).abs() < 1e-9);
        prop_assert!((oval.p(st.alpha2) - st.p2).abs() < 1e-9);
        prop_assert!(diff(table.x_of_alpha(a), x) < 1e-9);

        // the family consists of closing parallelograms
        let rows = billiard::orbit(oval, &ChordConfig::new(st.alpha1, st.alpha2).unwrap(), 4).unwrap();
        prop_assert!(billiard::closure_residual(&rows) < 1e-8);
        for i in 0..2 {
            prop_assert!(diff(rows[i + 2].alpha1, rows[i].alpha1 + PI) < 1e-9);
            prop_assert!((oval.p(rows[i + 2].alpha1) - oval.p(rows[i].alpha1)).abs() < 1e-9);
        }

        // a quarter turn of the parameter relabels the sides
        let next = table.parallelogram(x + FRAC_PI_2);
        let rot = st.rotate_labels();
        prop_assert!(diff(next.alpha1, rot.alpha1) < 1e-12 && diff(next.alpha2, rot.alpha2) < 1e-12);
        prop_assert!((next.p1 - rot.p1).abs() < 1e-12 && (next.p2 - rot.p2).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn radon_tables(eps in -0.03..0.03f64, del in -0.01..0.01f64) {
        let samples: Vec<f64> = (0..=256)
            .map(|k| {
                let a = FRAC_PI_2 * k as f64 / 256.0;
                let s = (2.0 * a).sin();
                0.5 + eps * (2.0 * a).cos() * s * s + del * s * s * (4.0 * a).sin()
            })
            .collect();
        let t = radon_like(&ArcInput::Samples(samples)).unwrap();
        prop_assert!(t.oval.validate().passed);
        prop_assert!(t.seam_defect < 1e-8);
        prop_assert!(t.oval.is_symmetric());
        let scan = invariant_curve_scan(&t.oval, 4, 1, 24, 1e-8).unwrap();
        prop_assert!(scan.all_closed, "max residual {:.2e}", scan.max_residual);
    }
}
