use std::f64::consts::PI;

use bukhgeim::domain::{Axis, CurveFn, GraphSegment, SubDomain};
use bukhgeim::stationary::{
    degenerate_locus, find_stationary, locus_residuals, osc_integral_1d, phase_on_curve, tangent_set_area, track_roots,
    Order, DEFAULT_ROOT_TOL,
};
use bukhgeim::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn poly(axis: Axis, interval: [f64; 2], coeffs: &[f64]) -> GraphSegment {
    GraphSegment::new(axis, interval, true, CurveFn::Polynomial { coeffs: coeffs.to_vec() })
}

#[test]
fn restricted_phase_examples() {
    // Diagonal line through x: phi_x vanishes identically.
    let diag = poly(Axis::Z1, [-1.0, 1.0], &[0.1, 1.0]);
    let x = [0.2, 0.3];
    for p in [-0.7, 0.0, 0.4] {
        let [g, d1, d2] = phase_on_curve(x, &diag).eval(p);
        assert!(g.abs() < 1e-15 && d1.abs() < 1e-15 && d2.abs() < 1e-15);
    }
    // Horizontal axis seen from (0, 1): g = p^2 - 1.
    let axis = poly(Axis::Z1, [-1.0, 1.0], &[0.0]);
    let [g, d1, d2] = phase_on_curve([0.0, 1.0], &axis).eval(0.5);
    assert!((g + 0.75).abs() < 1e-15 && (d1 - 1.0).abs() < 1e-15 && (d2 - 2.0).abs() < 1e-15);
    // Vertical axis seen from (1, 0): g = 1 - p^2.
    let vert = poly(Axis::Z2, [-1.0, 1.0], &[0.0]);
    let [g, d1, d2] = phase_on_curve([1.0, 0.0], &vert).eval(0.5);
    assert!((g - 0.75).abs() < 1e-15 && (d1 + 1.0).abs() < 1e-15 && (d2 + 2.0).abs() < 1e-15);
}

#[test]
fn restricted_phase_derivatives_match_finite_differences() {
    let seg = GraphSegment::new(Axis::Z2, [-0.8, 0.6], false, CurveFn::CompactBump { amplitude: 0.3, center: -0.1, width: 0.9 });
    let ph = phase_on_curve([0.4, -0.2], &seg);
    let h = 1e-5;
    for p in [-0.5, 0.0, 0.3] {
        let [g0, d1, d2] = ph.eval(p);
        let (gp, gm) = (ph.eval(p + h), ph.eval(p - h));
        assert!(((gp[0] - gm[0]) / (2.0 * h) - d1).abs() < 1e-8);
        assert!(((gp[0] - 2.0 * g0 + gm[0]) / (h * h) - d2).abs() < 1e-4);
    }
}

#[test]
fn stationary_point_classification() {
    // Transversal line: no stationary points, not flat.
    let line = poly(Axis::Z1, [-1.0, 1.0], &[0.5, 1.0]);
    let scan = find_stationary([0.0, 0.0], &line, DEFAULT_ROOT_TOL);
    assert!(scan.points.is_empty() && !scan.flat);

    let diag = poly(Axis::Z1, [-1.0, 1.0], &[0.0, 1.0]);
    assert!(find_stationary([0.3, 0.3], &diag, DEFAULT_ROOT_TOL).flat);

    let axis = poly(Axis::Z1, [-1.0, 1.0], &[0.0]);
    let scan = find_stationary([0.2, 1.0], &axis, DEFAULT_ROOT_TOL);
    assert_eq!(scan.points.len(), 1);
    let sp = &scan.points[0];
    assert!((sp.param - 0.2).abs() < 1e-9);
    assert!((sp.location[0] - 0.2).abs() < 1e-9 && sp.location[1] == 0.0);
    assert_eq!(sp.order, Order::One);
    assert!((sp.g2 - 2.0).abs() < 1e-12);

    // Parabola p^2/2 seen from (0, -1): g' = -p^3, a triple root.
    let parabola = poly(Axis::Z1, [-1.5, 1.2], &[0.0, 0.0, 0.5]);
    let scan = find_stationary([0.0, -1.0], &parabola, DEFAULT_ROOT_TOL);
    assert_eq!(scan.points.len(), 1);
    assert_eq!(scan.points[0].order, Order::Degenerate);
    assert!(scan.is_degenerate(0.05));

    // From (0, 1): g' = 4p - p^3, only p = 0 inside [-1.5, 1.2].
    let scan = find_stationary([0.0, 1.0], &parabola, DEFAULT_ROOT_TOL);
    assert_eq!(scan.points.len(), 1);
    assert!(scan.points[0].param.abs() < 1e-9);
    assert!((scan.points[0].g2 - 4.0).abs() < 1e-9);
    assert!((scan.min_g2() - 4.0).abs() < 1e-9);
}

#[test]
fn parabola_degenerate_locus_is_explicit() {
    let parabola = poly(Axis::Z1, [-1.0, 1.0], &[0.0, 0.0, 0.5]);
    let locus = degenerate_locus(&parabola, 64, 0.01, 2.0);
    assert!(locus.flat_params.is_empty() && locus.tangent_family.is_empty());
    assert_eq!(locus.points.len(), locus.source_params.len());
    for (g, &z) in locus.points.iter().zip(&locus.source_params) {
        assert!((g[0] - z.powi(3)).abs() < 1e-12);
        assert!((g[1] - (3.0 * z * z - 2.0) / 2.0).abs() < 1e-12);
        let r = locus_residuals(&parabola, z, *g);
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
        let scan = find_stationary(*g, &parabola, DEFAULT_ROOT_TOL);
        assert!(scan.points.iter().any(|sp| (sp.param - z).abs() < 1e-3 && sp.g2.abs() < 1e-3));
    }
}

#[test]
fn straight_segments_have_no_locus_points() {
    let steep = poly(Axis::Z2, [-1.0, 1.0], &[0.0, 2.0]);
    let locus = degenerate_locus(&steep, 32, 0.01, 2.0);
    assert!(locus.points.is_empty());
    assert_eq!(locus.flat_params.len(), steep.probe_params(32).len());
    assert!(locus.tangent_family.is_empty());

    let diag = poly(Axis::Z1, [-1.0, 1.0], &[0.0, 1.0]);
    let locus = degenerate_locus(&diag, 32, 0.01, 2.0);
    assert_eq!(locus.tangent_family.len(), diag.probe_params(32).len());
    assert!(locus.tangent_family.iter().all(|t| t.2 == 1.0));
}

#[test]
fn tangent_set_area_examples() {
    let disk = SubDomain::disk([0.0, 0.0], 1.0).unwrap();
    let diag = poly(Axis::Z1, [-0.5, 0.5], &[0.0, 1.0]);
    assert_eq!(tangent_set_area(&diag, 1.0, 0.1, &disk, 10_000, 1, 0.0), 0.0);
    // Strip of half-width 0.1 about the diagonal.
    let strip = 2.0 * (0.1f64.asin() + 0.1 * 0.99f64.sqrt());
    let area = tangent_set_area(&diag, 1.0, 0.1, &disk, 200_000, 1, 0.1);
    assert!((area - strip).abs() < 0.01, "{area} vs {strip}");

    // Every tangent of the parabola qualifies: horizontal lines 0 <= y <= 1/2.
    let parabola = poly(Axis::Z1, [-1.0, 1.0], &[0.0, 0.0, 0.5]);
    let band = 0.5 * 0.75f64.sqrt() + 0.5f64.asin();
    let area = tangent_set_area(&parabola, 0.0, 10.0, &disk, 200_000, 2, 0.0);
    assert!((area - band).abs() < 0.01, "{area} vs {band}");
    assert!(tangent_set_area(&parabola, 5.0, 0.1, &disk, 1000, 3, 0.0) == 0.0);
}

#[test]
fn oscillatory_integrals() {
    let zero = |_: f64| Complex64::new(0.0, 0.0);
    let one = |_: f64| Complex64::new(1.0, 0.0);
    let quad = |t: f64| [t * t, 2.0 * t, 2.0];
    assert_eq!(osc_integral_1d(&quad, &zero, -1.0, 1.0, 100.0).unwrap(), Complex64::new(0.0, 0.0));

    let linear = |t: f64| [t, 1.0, 0.0];
    for lambda in [1.0, 50.0, 3000.0] {
        let exact = (Complex64::from_polar(1.0, lambda) - 1.0) / Complex64::new(0.0, lambda);
        let got = osc_integral_1d(&linear, &one, 0.0, 1.0, lambda).unwrap();
        assert!((got - exact).norm() < 1e-12, "lambda {lambda}");
    }

    // Nondegenerate stationary point: |I| ~ sqrt(pi / lam).
    let lambda = 1e4;
    let got = osc_integral_1d(&quad, &one, -1.0, 1.0, lambda).unwrap();
    let lead = Complex64::from_polar((PI / lambda).sqrt(), PI / 4.0);
    assert!((got - lead).norm() < 2.0 / lambda, "{got} vs {lead}");

    let slope = |lam: f64| osc_integral_1d(&quad, &one, -1.0, 1.0, lam).unwrap().norm().ln();
    let s = (slope(4e4) - slope(1e3)) / (4e4f64.ln() - 1e3f64.ln());
    assert!((s + 0.5).abs() < 0.02, "slope {s}");

    assert!(matches!(osc_integral_1d(&linear, &one, 0.0, 1.0, 1e12), Err(Error::ResolutionExceeded { .. })));
}

#[test]
fn root_tracking() {
    let f = |x: f64| [x.sin(), x.cos()];
    let interval = [0.5, 7.0];
    let same = track_roots(&f, &f, interval, 1.0).unwrap();
    assert_eq!(same.pairs.len(), 2);
    for (r, s) in &same.pairs {
        assert_eq!(r, s);
    }
    assert!((same.pairs[0].0 - PI).abs() < 1e-12 && (same.pairs[1].0 - 2.0 * PI).abs() < 1e-12);

    let c = 1e-3;
    let shifted = |x: f64| [(x - c).sin(), (x - c).cos()];
    let t = track_roots(&f, &shifted, interval, 1.0).unwrap();
    for (r, s) in &t.pairs {
        assert!((s - r - c).abs() < 1e-9);
    }

    let wobble = |x: f64| [x.sin() + 0.01 * (3.0 * x).cos(), x.cos() - 0.03 * (3.0 * x).sin()];
    let t = track_roots(&f, &wobble, interval, 1.0).unwrap();
    assert!(t.c1_distance < t.delta);
    for (r, s) in &t.pairs {
        assert!((s - r).abs() <= t.radius);
        assert!(wobble(*s)[0].abs() < 1e-9);
    }

    let lifted = |x: f64| [x.sin() + 0.5, x.cos()];
    assert!(matches!(track_roots(&f, &lifted, interval, 1.0), Err(Error::PerturbationTooLarge { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn located_points_are_stationary(a in -0.5..0.5f64, b in -0.8..0.8f64, x1 in -1.5..1.5f64, x2 in -1.5..1.5f64) {
        let seg = poly(Axis::Z2, [-1.0, 1.0], &[0.1, a, b]);
        let ph = phase_on_curve([x1, x2], &seg);
        for sp in find_stationary([x1, x2], &seg, DEFAULT_ROOT_TOL).points {
            prop_assert!(ph.eval(sp.param)[1].abs() <= DEFAULT_ROOT_TOL);
            prop_assert_eq!(sp.location, seg.point(sp.param));
        }
    }

    #[test]
    fn tangent_area_is_monotone_in_eps(e1 in 0.01..0.5f64, e2 in 0.01..0.5f64) {
        let disk = SubDomain::disk([0.0, 0.0], 1.5).unwrap();
        let parabola = poly(Axis::Z1, [-1.0, 1.0], &[0.0, 0.0, 0.5]);
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let a = tangent_set_area(&parabola, 0.3, lo, &disk, 20_000, 9, 0.0);
        let b = tangent_set_area(&parabola, 0.3, hi, &disk, 20_000, 9, 0.0);
        prop_assert!(a <= b);
    }
}
