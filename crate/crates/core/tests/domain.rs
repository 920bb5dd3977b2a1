use std::f64::consts::PI;

use bukhgeim::domain::{
    chi_hr_norm, curve_distance_c2, dsr_norm_upper, hr_norm, make_rhombus, perturb_segment, rasterize, w_s1_norm,
    Axis, CurveFn, GraphSegment, Piece, PiecewiseBoundary, PiecewisePotential, SmoothFn, SubDomain, RHOMBUS_VERTICES,
};
use bukhgeim::spline::ClampedSpline;
use bukhgeim::{ComplexField, Error, FourierGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(n: usize, side: f64) -> FourierGrid {
    FourierGrid::new(n, side, [0.0, 0.0]).unwrap()
}

fn constant(v: f64) -> SmoothFn {
    SmoothFn::Constant { value: [v, 0.0] }
}

fn disk_piece(center: [f64; 2], radius: f64, q: SmoothFn) -> Piece {
    Piece { q, domain: SubDomain::disk(center, radius).unwrap() }
}

fn potential(pieces: Vec<Piece>) -> PiecewisePotential {
    PiecewisePotential::new(pieces, 2.5, 0.3).unwrap()
}

#[test]
fn zero_potential_rasterizes_to_zero() {
    let g = grid(64, 4.0);
    assert_eq!(rasterize(&potential(Vec::new()), &g).unwrap().max_abs(), 0.0);
}

#[test]
fn unit_disk_integral() {
    let g = grid(512, 4.2);
    let f = rasterize(&potential(vec![disk_piece([0.0, 0.0], 1.0, constant(1.0))]), &g).unwrap();
    let area = f.integral().re;
    assert!((area - PI).abs() <= 0.005 * PI, "area {area}");
}

#[test]
fn disjoint_pieces_add() {
    let g = grid(128, 4.0);
    let a = disk_piece([-0.4, 0.0], 0.3, constant(1.0));
    let b = disk_piece(
        [0.4, 0.1],
        0.3,
        SmoothFn::GaussianBump { amplitude: [0.5, -1.0], center: [0.4, 0.1], sigma: 0.2 },
    );
    let both = rasterize(&potential(vec![a.clone(), b.clone()]), &g).unwrap();
    let sum = &rasterize(&potential(vec![a]), &g).unwrap() + &rasterize(&potential(vec![b]), &g).unwrap();
    assert_eq!(both.values, sum.values);
}

#[test]
fn rasterize_rejects_pieces_outside_the_cutoff() {
    let g = grid(64, 4.0);
    let v = potential(vec![disk_piece([0.8, 0.0], 0.5, constant(1.0))]);
    assert!(matches!(rasterize(&v, &g), Err(Error::SupportViolation { .. })));
}

#[test]
fn potential_hypotheses_are_enforced() {
    assert!(PiecewisePotential::new(Vec::new(), 2.5, 0.3).is_ok());
    assert!(PiecewisePotential::new(Vec::new(), 2.5, 0.2).is_err());
    assert!(PiecewisePotential::new(Vec::new(), 2.5, 0.6).is_err());
    assert!(PiecewisePotential::new(Vec::new(), 3.5, 0.3).is_err());
}

#[test]
fn indicator_norms() {
    let g = grid(256, 4.0);
    let h = g.h();
    let tiny = SubDomain::disk([0.3 * h, 0.3 * h], 0.1 * h).unwrap();
    assert_eq!(chi_hr_norm(&tiny, 0.25, &g), 0.0);

    let disk = SubDomain::disk([0.0, 0.0], 1.0).unwrap();
    let l2 = chi_hr_norm(&disk, 0.0, &g);
    assert!((l2 - PI.sqrt()).abs() <= 0.01 * PI.sqrt(), "L2 norm {l2}");
}

#[test]
fn indicator_regularity_threshold() {
    let disk = SubDomain::disk([0.0, 0.0], 1.0).unwrap();
    let norms = |r: f64| -> Vec<f64> { [256, 512, 1024].iter().map(|&n| chi_hr_norm(&disk, r, &grid(n, 4.0))).collect() };
    let change = |v: &[f64]| v.windows(2).map(|w| (w[1] - w[0]).abs() / w[0]).collect::<Vec<_>>();
    let below = change(&norms(0.4));
    let above = change(&norms(0.6));
    assert!(below.iter().all(|&c| c < 0.05), "r = 0.4 changes {below:?}");
    assert!(above.iter().any(|&c| c >= 0.05), "r = 0.6 changes {above:?}");
}

#[test]
fn dsr_norm_of_zero_and_disk() {
    let g = grid(256, 4.2);
    assert_eq!(dsr_norm_upper(&potential(Vec::new()), &g), 0.0);

    let v = PiecewisePotential::new(vec![disk_piece([0.0, 0.0], 1.0, constant(1.0))], 2.0, 0.25).unwrap();
    let one = ComplexField::from_real_fn(&g, |_| 1.0);
    let expect = w_s1_norm(&one, 2.0) * (1.0 + chi_hr_norm(&v.pieces[0].domain, 0.25, &g));
    assert!((dsr_norm_upper(&v, &g) - expect).abs() <= 1e-12 * expect);
    assert!((w_s1_norm(&one, 2.0) - g.side() * g.side()).abs() <= 1e-9);
}

#[test]
fn dsr_norm_is_homogeneous() {
    let g = grid(128, 4.2);
    let v = potential(vec![disk_piece(
        [0.1, 0.0],
        0.6,
        SmoothFn::GaussianBump { amplitude: [1.0, 0.5], center: [0.0, 0.0], sigma: 0.3 },
    )]);
    let base = dsr_norm_upper(&v, &g);
    for c in [Complex64::new(2.0, 0.0), Complex64::new(-0.5, 1.5)] {
        let scaled = dsr_norm_upper(&v.scaled(c), &g);
        assert!((scaled - c.norm() * base).abs() <= 1e-12 * scaled);
    }
}

fn poly_segment(coeffs: Vec<f64>) -> GraphSegment {
    GraphSegment::new(Axis::Z1, [-1.0, 1.0], true, CurveFn::Polynomial { coeffs })
}

fn single(seg: GraphSegment) -> PiecewiseBoundary {
    PiecewiseBoundary { segments: vec![seg], closed: false }
}

#[test]
fn curve_distance_examples() {
    let c1 = single(poly_segment(vec![0.1, 0.2, -0.3]));
    assert_eq!(curve_distance_c2(&c1, &c1), 0.0);

    let c2 = single(poly_segment(vec![0.1 + 0.03, 0.2, -0.3]));
    assert!((curve_distance_c2(&c1, &c2) - 0.03).abs() <= 1e-15);

    let two = PiecewiseBoundary { segments: vec![poly_segment(vec![0.0]), poly_segment(vec![1.0])], closed: false };
    assert_eq!(curve_distance_c2(&c1, &two), f64::INFINITY);

    let flipped = single(GraphSegment::new(Axis::Z2, [-1.0, 1.0], true, CurveFn::Polynomial { coeffs: vec![0.1] }));
    assert_eq!(curve_distance_c2(&c1, &flipped), f64::INFINITY);
}

#[test]
fn perturbed_disk_distance_is_the_bump_size() {
    let disk = SubDomain::disk([0.0, 0.0], 0.5).unwrap();
    let bump = CurveFn::CompactBump { amplitude: 0.01, center: 0.0, width: 0.2 };
    let moved = perturb_segment(&disk.boundary, 0, &bump).unwrap();
    let d = curve_distance_c2(&disk.boundary, &moved);
    let [_, _, d2] = bump.eval(0.0);
    assert!((d - d2.abs()).abs() <= 1e-12, "distance {d}, |bump''(0)| {}", d2.abs());
}

#[test]
fn rhombus_geometry() {
    let r = make_rhombus();
    assert_eq!(RHOMBUS_VERTICES, [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [1.0, -1.0]]);
    assert!((r.area - 2.0).abs() <= 1e-12);
    assert!(r.contains([1.0, 0.0]));
    assert!(!r.contains([-1.0, -1.0]));
    let corners: Vec<[f64; 2]> = r.boundary.segments.iter().map(|s| s.start()).collect();
    for v in RHOMBUS_VERTICES {
        assert!(corners.iter().any(|c| (c[0] - v[0]).hypot(c[1] - v[1]) <= 1e-14), "missing vertex {v:?}");
    }
}

#[test]
fn disk_membership_matches_winding() {
    let d = SubDomain::disk([0.2, -0.1], 0.7).unwrap();
    for k in 0..400 {
        let z = [-1.0 + 0.1 * (k % 20) as f64 + 0.013, -1.0 + 0.1 * (k / 20) as f64 + 0.007];
        assert_eq!(d.contains(z), d.winding(z) != 0, "{z:?}");
    }
    assert!((d.area - PI * 0.49).abs() <= 1e-12);
}

#[test]
fn open_or_self_intersecting_boundaries_are_rejected() {
    let a = GraphSegment::new(Axis::Z1, [0.0, 1.0], true, CurveFn::Constant { value: 0.0 });
    let b = GraphSegment::new(Axis::Z1, [0.0, 1.0], false, CurveFn::Constant { value: 0.5 });
    assert!(PiecewiseBoundary::new(vec![a, b]).is_err());
    assert!(SubDomain::polygon(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
}

#[test]
fn segment_consistency_check() {
    assert!(poly_segment(vec![0.0, 1.0, 0.5, -0.2]).check_consistency().is_ok());
    let s = ClampedSpline::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.3, 0.1], 0.5, -1.0).unwrap();
    let seg = GraphSegment::new(Axis::Z2, [0.0, 1.0], true, CurveFn::Spline { spline: s });
    assert!(seg.check_consistency().is_ok());
}

#[test]
fn smooth_fn_closed_forms() {
    let g = SmoothFn::GaussianBump { amplitude: [2.0, -1.0], center: [0.5, 0.0], sigma: 0.25 };
    let v = g.eval([0.75, 0.0]);
    let e = (-0.5f64).exp();
    assert!((v - Complex64::new(2.0 * e, -e)).norm() <= 1e-15);
    let p = SmoothFn::Polynomial { terms: vec![(0, 0, [1.0, 0.0]), (2, 1, [0.0, 3.0])] };
    assert_eq!(p.eval([2.0, -1.0]), Complex64::new(1.0, -12.0));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn curve_distance_is_a_metric(a in prop::collection::vec(-1.0..1.0f64, 4),
                                  b in prop::collection::vec(-1.0..1.0f64, 4),
                                  c in prop::collection::vec(-1.0..1.0f64, 4)) {
        let (x, y, z) = (single(poly_segment(a)), single(poly_segment(b)), single(poly_segment(c)));
        let (xy, yx) = (curve_distance_c2(&x, &y), curve_distance_c2(&y, &x));
        prop_assert_eq!(xy, yx);
        prop_assert!(curve_distance_c2(&x, &z) <= xy + curve_distance_c2(&y, &z) + 1e-12);
    }

    #[test]
    fn indicator_norm_increases_with_r(r1 in 0.01..0.49f64, r2 in 0.01..0.49f64, radius in 0.2..0.9f64) {
        let g = grid(64, 4.0);
        let d = SubDomain::disk([0.05, -0.02], radius).unwrap();
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        prop_assert!(chi_hr_norm(&d, lo, &g) <= chi_hr_norm(&d, hi, &g));
    }

    #[test]
    fn sobolev_embedding_budget(a in 0.1..2.0f64, cx in -0.3..0.3f64, cy in -0.3..0.3f64, sigma in 0.08..0.25f64) {
        let g = grid(128, 4.0);
        let q = ComplexField::from_real_fn(&g, |z| a * (-((z[0] - cx).powi(2) + (z[1] - cy).powi(2)) / (2.0 * sigma * sigma)).exp());
        prop_assert!(hr_norm(&q, 0.25) <= 10.0 * w_s1_norm(&q, 1.25));
    }

    #[test]
    fn rasterize_is_additive(c1 in -0.65..-0.5f64, c2 in 0.5..0.65f64, r1 in 0.05..0.3f64, r2 in 0.05..0.3f64,
                             v1 in -2.0..2.0f64, v2 in -2.0..2.0f64) {
        let g = grid(64, 4.0);
        let a = disk_piece([c1, 0.0], r1, constant(v1));
        let b = disk_piece([c2, 0.0], r2, constant(v2));
        let both = rasterize(&potential(vec![a.clone(), b.clone()]), &g).unwrap();
        let sum = &rasterize(&potential(vec![a]), &g).unwrap() + &rasterize(&potential(vec![b]), &g).unwrap();
        prop_assert_eq!(both.values, sum.values);
    }
}
