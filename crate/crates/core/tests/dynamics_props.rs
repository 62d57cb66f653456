use olb_core::billiard::{self, LinePairState};
use olb_core::genfun::{self, ChordConfig};
use olb_core::periodic;
use olb_core::{PlanePoint, SupportOval};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

/// Unit circle plus harmonics 1..=4 small enough to keep `p + p''` positive.
fn oval() -> impl Strategy<Value = SupportOval> {
    (
        prop::collection::vec(-0.02..0.02f64, 4),
        prop::collection::vec(-0.02..0.02f64, 4),
    )
        .prop_map(|(c, s)| SupportOval::fourier(1.0, c, s).unwrap())
}

/// Even harmonics only.
fn symmetric_oval() -> impl Strategy<Value = SupportOval> {
    (-0.03..0.03f64, -0.02..0.02f64, -0.01..0.01f64).prop_map(|(c2, s2, c4)| {
        SupportOval::fourier(1.0, vec![0.0, c2, 0.0, c4], vec![0.0, s2]).unwrap()
    })
}

fn state() -> impl Strategy<Value = LinePairState> {
    (0.0..TAU, 0.2..PI - 0.2).prop_map(|(a, w)| ChordConfig {
        alpha1: a,
        alpha2: a + w,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tangent_vector_identity(o in oval(), a in 0.0..TAU) {
        let h = 1e-5;
        let d = (o.point_at(a + h) - o.point_at(a - h)) * (0.5 / h);
        let expect = PlanePoint::new(-a.sin(), a.cos()) * o.curvature_radius(a);
        prop_assert!((d - expect).norm() < 1e-6);
    }

    #[test]
    fn arc_length_adds(o in oval(), a in 0.0..TAU, g1 in 0.1..2.0f64, g2 in 0.1..2.0f64) {
        let (b, c) = (a + g1, a + g1 + g2);
        let whole = o.arc_length(a, c).unwrap();
        let parts = o.arc_length(a, b).unwrap() + o.arc_length(b, c).unwrap();
        prop_assert!((whole - parts).abs() < 1e-10);
    }

    #[test]
    fn tangent_angles_touch(o in oval(), s in state()) {
        let m = billiard::corner(&o, &s);
        let (a1, a2) = o.tangent_angles_from(m).unwrap();
        prop_assert!(o.support_excess(m, a1).abs() < 1e-10);
        prop_assert!(o.support_excess(m, a2).abs() < 1e-10);
        prop_assert!(diff(a1, s.alpha1) < 1e-8 && diff(a2, s.alpha2) < 1e-8);
    }

    #[test]
    fn central_symmetry_of_boundary(o in symmetric_oval(), a in 0.0..TAU) {
        prop_assert!(o.is_symmetric());
        prop_assert!((o.point_at(a + PI) + o.point_at(a)).norm() < 1e-10);
    }

    #[test]
    fn derivatives_of_s_match_differences(o in oval(), s in state()) {
        let (g1, g2) = genfun::grad_s(&o, &s).unwrap();
        let (f1, f2) = genfun::fd_grad_s(&o, &s, 1e-5);
        prop_assert!(rel(g1, f1) < 1e-6 && rel(g2, f2) < 1e-6);
        let (b1, b2) = genfun::grad_s_support_form(&o, &s).unwrap();
        prop_assert!(rel(g1, b1) < 1e-10 && rel(g2, b2) < 1e-10);
        let h = genfun::hess_s(&o, &s).unwrap();
        let fh = genfun::fd_hess_s(&o, &s, 1e-4);
        prop_assert!(rel(h.s11, fh.s11) < 1e-4 && rel(h.s12, fh.s12) < 1e-4 && rel(h.s22, fh.s22) < 1e-4);
    }

    #[test]
    fn hessian_signs(o in oval(), s in state()) {
        let h = genfun::hess_s(&o, &s).unwrap();
        prop_assert!(h.s11 > 0.0 && h.s22 > 0.0 && h.s12 < 0.0);
    }

    #[test]
    fn s_is_tangent_lengths_minus_arc(o in oval(), s in state()) {
        let (l1, l2) = genfun::tangent_lengths(&o, &s).unwrap();
        let arc = o.arc_length(s.alpha1, s.alpha2).unwrap();
        prop_assert!((genfun::generating_s(&o, &s).unwrap() - (l1 + l2 - arc)).abs() < 1e-10);
        prop_assert!(l1 > 0.0 && l2 > 0.0);
        let (r1, r2) = genfun::radii(&o, &s).unwrap();
        prop_assert!(r1 > 0.0 && r2 > 0.0);
    }

    #[test]
    fn circle_quantities_depend_on_gap_only(r in 0.3..3.0f64, s in state(), c in 0.0..TAU) {
        let o = SupportOval::circle(r);
        let t = s.shifted(c);
        prop_assert!((genfun::generating_s(&o, &s).unwrap() - genfun::generating_s(&o, &t).unwrap()).abs() < 1e-10);
        let (a, b) = (genfun::radii(&o, &s).unwrap(), genfun::radii(&o, &t).unwrap());
        prop_assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
        let (n, m) = (billiard::step(&o, &s).unwrap(), billiard::step(&o, &t).unwrap());
        prop_assert!(diff(n.alpha1 + c, m.alpha1) < 1e-10 && diff(n.alpha2 + c, m.alpha2) < 1e-10);
    }

    #[test]
    fn step_matches_cartesian_construction(o in oval(), s in state()) {
        let next = billiard::step(&o, &s).unwrap();
        let via = billiard::cartesian_step(&o, billiard::corner(&o, &s)).unwrap();
        prop_assert!((billiard::corner(&o, &next) - via).norm() < 1e-8);
    }

    #[test]
    fn map_preserves_area_and_twists(o in oval(), s in state()) {
        prop_assert!(billiard::symplectic_defect(&o, &s).unwrap() < 1e-6);
        prop_assert!((billiard::jacobian(&o, &s).unwrap().determinant() - 1.0).abs() < 1e-9);
        prop_assert!(billiard::jacobian(&o, &s).unwrap()[(1, 0)] > 0.0);
        prop_assert!(billiard::twist_t2(&o, &s).unwrap() > 0.0);
    }

    #[test]
    fn map_commutes_with_antipode(o in symmetric_oval(), s in state()) {
        let a = billiard::step(&o, &s).unwrap();
        let b = billiard::step(&o, &s.shifted(PI)).unwrap();
        prop_assert!(diff(a.alpha1 + PI, b.alpha1) < 1e-9 && diff(a.alpha2 + PI, b.alpha2) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_orbits_are_critical_and_close(o in oval(), n in 3usize..7) {
        let orbit = periodic::find_periodic(&o, n, 1, None).unwrap();
        let g = periodic::action_gradient(&o, &orbit.angles, 1).unwrap();
        prop_assert!(g.iter().all(|v| v.abs() < 1e-9));
        prop_assert!(periodic::closure_defect(&o, &orbit.angles, 1).unwrap() < 1e-8);
        let total: f64 = orbit.gaps().iter().sum();
        prop_assert!((total - TAU).abs() < 1e-12);
        prop_assert!(orbit.gaps().iter().all(|&g| g > 0.0 && g < PI));
    }

    #[test]
    fn star_orbits_on_circles_are_regular(r in 0.5..2.0f64, (n, m) in prop_oneof![Just((5usize, 2usize)), Just((7, 2)), Just((7, 3)), Just((4, 1))]) {
        let orbit = periodic::find_periodic(&SupportOval::circle(r), n, m, None).unwrap();
        for g in orbit.gaps() {
            prop_assert!((g - TAU * m as f64 / n as f64).abs() < 1e-9);
        }
    }
}
