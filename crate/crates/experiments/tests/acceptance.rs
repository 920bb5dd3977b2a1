//! Acceptance suite: one PASS/FAIL line per check, a verdict line per criterion.
//!
//! Checks marked `known` are reported but do not fail the run; see README for their status.

use std::path::PathBuf;
use std::time::Instant;

use bukhgeim::domain::{Axis, CurveFn, GraphSegment, SubDomain};
use bukhgeim::dtn::{dtn_matrix_with, BoundaryMesh, DirichletOperator, PolarGrid};
use bukhgeim::scattering::{k_norm, FarFieldData};
use bukhgeim::stationary::{degenerate_locus, find_stationary, locus_residuals, tangent_set_area, DEFAULT_ROOT_TOL};
use experiments::convergence::run_convergence;
use experiments::counterexample::run_counterexample;
use experiments::lemmas::run_lemmas;
use experiments::scatter::run_scatter;
use experiments::stability::{run_stability, schedule_lambda};
use experiments::ExperimentConfig;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Suite {
    criterion: Vec<bool>,
    unexpected: Vec<String>,
}

impl Suite {
    fn begin(&mut self, id: usize, title: &str) {
        println!("\ncriterion {id}: {title}");
        self.criterion.clear();
    }

    fn check(&mut self, label: &str, pass: bool, detail: String) {
        self.record(label, pass, detail, false);
    }

    fn known(&mut self, label: &str, pass: bool, detail: String) {
        self.record(label, pass, detail, true);
    }

    fn info(&self, label: &str, detail: String) {
        println!("  INFO  {label}: {detail}");
    }

    fn record(&mut self, label: &str, pass: bool, detail: String, known: bool) {
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "FAIL (known)",
        };
        println!("  {tag}  {label}: {detail}");
        self.criterion.push(pass);
        if !pass && !known {
            self.unexpected.push(label.to_string());
        }
    }

    fn end(&mut self, id: usize) {
        let ok = self.criterion.iter().all(|&p| p);
        println!("{} criterion {id}", if ok { "PASS" } else { "FAIL" });
    }

    fn error(&mut self, label: &str, e: anyhow::Error) {
        self.check(label, false, format!("error: {e:#}"));
    }
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let mut cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
    cfg.cache_dir = None;
    cfg
}

fn criterion_1(s: &mut Suite) {
    s.begin(1, "rhombus counterexample");
    let cfg = config("counterexample.json");
    let start = Instant::now();
    let r = match run_counterexample(&cfg, None) {
        Ok(r) => r,
        Err(e) => return s.error("run", e),
    };
    let secs = start.elapsed().as_secs_f64();
    let side = r.per_t.iter().map(|t| t.side_phase_error).fold(0.0, f64::max);
    s.check("side-phase identities", side <= 1e-12, format!("max error {side:.2e} <= 1e-12"));
    let line = r.per_t.iter().map(|t| (t.line_integral - t.line_integral_exact).abs()).fold(0.0, f64::max);
    s.check("line integral", line <= 1e-8, format!("max error {line:.2e} <= 1e-8"));
    for t in &r.per_t {
        let [re, im] = t.limit;
        let modulus = re.hypot(im);
        s.check(
            &format!("t = {}: limit imaginary", t.t),
            re.abs() < 0.05 * im.abs(),
            format!("limit {re:.5} + {im:.5}i, |Re| < 5% |Im|"),
        );
        s.check(
            &format!("t = {}: limit nonzero", t.t),
            modulus >= 1e-2 && modulus > 5.0 * t.dispersion,
            format!("|limit| {modulus:.4}, tail dispersion {:.2e}", t.dispersion),
        );
        s.check(
            &format!("t = {}: independent quadrature", t.t),
            t.oracle_rel_error <= 0.1,
            format!("relative difference {:.2}% <= 10%", 100.0 * t.oracle_rel_error),
        );
    }
    s.check(
        "log-ratio scaling",
        r.ratio_spread <= 0.1,
        format!("spread {:.2}% <= 10%, constant {:.4}", 100.0 * r.ratio_spread, r.constant),
    );
    s.info(
        "constant",
        format!(
            "fitted {:.4}; candidates {:.4} and {:.4}",
            r.constant, r.candidate_jacobian, r.candidate_printed
        ),
    );
    let off = r.per_t.iter().map(|t| t.off_diagonal_limit[0].hypot(t.off_diagonal_limit[1])).fold(0.0, f64::max);
    s.info("off-diagonal probes", format!("max |limit| {off:.2e}"));
    s.check("runtime", secs <= 600.0, format!("{secs:.1} s <= 600 s"));
    s.end(1);
}

fn criterion_2(s: &mut Suite) {
    s.begin(2, "smooth-bump convergence");
    let start = Instant::now();
    let cfg = config("convergence_bump.json");
    match run_convergence(&cfg, None) {
        Ok(r) => {
            let pts: Vec<_> = r.evaluated().collect();
            let slope = pts.iter().filter_map(|p| p.slope_interior).fold(f64::NEG_INFINITY, f64::max);
            let all = pts.iter().all(|p| p.slope_interior.is_some());
            s.check(
                "interior-route slopes",
                all && slope <= -0.3,
                format!("{} points, worst slope {slope:.3} <= -0.3", pts.len()),
            );
            let err = pts.iter().filter_map(|p| p.error_interior).fold(0.0, f64::max);
            let budget = 0.1 * r.max_abs_potential;
            s.check(
                "interior-route error at largest lambda",
                all && err <= budget,
                format!("max error {err:.4} <= {budget:.4}"),
            );
        }
        Err(e) => s.error("interior route", e),
    }

    let cfg = config("convergence_bump_routes.json");
    match run_convergence(&cfg, None) {
        Ok(r) => {
            let pts: Vec<_> = r.evaluated().collect();
            let err = pts.iter().filter_map(|p| p.error_boundary).fold(0.0, f64::max);
            let budget = 0.1 * r.max_abs_potential;
            s.known(
                "boundary-route error at lambda 512",
                err <= budget,
                format!("max error {err:.3e} <= {budget:.4}"),
            );
            let slope = pts.iter().filter_map(|p| p.slope_boundary).fold(f64::NEG_INFINITY, f64::max);
            s.known("boundary-route slopes", slope <= -0.3, format!("worst slope {slope:.3} <= -0.3"));
            let dis = pts.iter().filter_map(|p| p.route_disagreement).fold(0.0, f64::max);
            s.known("route agreement at lambda 512", dis <= 0.02, format!("max relative gap {dis:.3e} <= 2%"));
            let resolved = pts.iter().map(|p| p.lambda_resolved).fold(f64::INFINITY, f64::min);
            s.info("boundary-route grid", format!("resolved lambda {resolved:.0} on this grid"));
        }
        Err(e) => s.error("boundary route", e),
    }

    let cfg = config("convergence_bump_feasible.json");
    match run_convergence(&cfg, None) {
        Ok(r) => {
            let pts: Vec<_> = r.evaluated().collect();
            let dis = pts.iter().filter_map(|p| p.route_disagreement).fold(0.0, f64::max);
            let all = pts.iter().all(|p| p.route_disagreement.is_some());
            let lam = r.lambdas.last().copied().unwrap_or(0.0);
            s.check(
                "route agreement, feasible regime",
                all && !pts.is_empty() && dis <= 0.02,
                format!("{} points at lambda {lam}, max relative gap {dis:.2e} <= 2%", pts.len()),
            );
        }
        Err(e) => s.error("feasible routes", e),
    }
    let secs = start.elapsed().as_secs_f64();
    s.check("runtime", secs <= 900.0, format!("{secs:.1} s <= 900 s"));
    s.end(2);
}

fn criterion_3(s: &mut Suite) {
    s.begin(3, "piecewise-constant disk");
    let cfg = config("convergence_disk.json");
    let r = match run_convergence(&cfg, None) {
        Ok(r) => r,
        Err(e) => return s.error("run", e),
    };
    let budget = 0.15 * r.max_abs_potential;
    let pts: Vec<_> = r.evaluated().collect();
    let worst = pts.iter().filter_map(|p| p.error_interior).fold(0.0, f64::max);
    s.known(
        "error at lambda 512",
        !pts.is_empty() && worst <= budget,
        format!("{} points, max error {worst:.3} <= {budget:.3}", pts.len()),
    );
    let far: Vec<_> = pts.iter().filter(|p| p.curve_distance >= 0.05).collect();
    let far_worst = far.iter().filter_map(|p| p.error_interior).fold(0.0, f64::max);
    let failing = pts.iter().filter(|p| p.error_interior.is_some_and(|e| e > budget)).count();
    let nearest = pts
        .iter()
        .filter(|p| p.error_interior.is_some_and(|e| e > budget))
        .map(|p| p.curve_distance)
        .fold(0.0, f64::max);
    s.info(
        "distance analysis",
        format!(
            "{failing} points over budget, all within {nearest:.3} of the circle; max error {far_worst:.3} over {} points at distance >= 0.05",
            far.len()
        ),
    );
    s.check(
        "masked fraction",
        r.masked_fraction <= 0.05,
        format!("{:.1}% <= 5%", 100.0 * r.masked_fraction),
    );
    s.end(3);
}

fn criterion_4(s: &mut Suite) {
    s.begin(4, "lemma rate checks");
    let cfg = config("lemmas.json");
    let start = Instant::now();
    let r = match run_lemmas(&cfg, None) {
        Ok(r) => r,
        Err(e) => return s.error("run", e),
    };
    let secs = start.elapsed().as_secs_f64();
    for e in &r.entries {
        let slope = e.slope.map_or("skipped".into(), |v| format!("{v:.3}"));
        let detail = format!("{} slope {slope} in [{:.2}, {:.2}]", e.quantity, e.lo, e.hi);
        if e.supplementary {
            s.info(&e.name, detail);
        } else if e.name == "product" {
            s.known(&e.name, e.pass == Some(true), detail);
        } else {
            s.check(&e.name, e.pass == Some(true), detail);
        }
    }
    s.check("runtime", secs <= 600.0, format!("{secs:.1} s <= 600 s"));

    let ext = config("lemmas_extended.json");
    match run_lemmas(&ext, None) {
        Ok(x) => {
            let flips: Vec<_> = r
                .entries
                .iter()
                .filter(|e| !e.supplementary && e.pass == Some(true))
                .filter(|e| x.entry(&e.name).and_then(|f| f.pass) != Some(true))
                .map(|e| e.name.clone())
                .collect();
            s.check(
                "extended schedule",
                flips.is_empty(),
                if flips.is_empty() { "no passing entry flips".into() } else { format!("flipped: {flips:?}") },
            );
        }
        Err(e) => s.error("extended schedule", e),
    }
    s.end(4);
}

fn criterion_5(s: &mut Suite) {
    s.begin(5, "Dirichlet-to-Neumann operator");
    if let Err(e) = dtn_checks(s) {
        s.error("run", e);
    }
    s.end(5);
}

fn dtn_checks(s: &mut Suite) -> anyhow::Result<()> {
    {
        let mesh = BoundaryMesh::circle([0.0, 0.0], 1.0, 128)?;
        let op0 = DirichletOperator::new(PolarGrid::new(&mesh, 64)?, &|_| Complex64::new(0.0, 0.0))?;
        let a0 = dtn_matrix_with(&op0, &mesh, "zero")?;
        let mode = |n: i64| -> Vec<Complex64> {
            (0..mesh.len()).map(|j| Complex64::from_polar(1.0, n as f64 * mesh.angle(j))).collect()
        };
        let mut worst = 0.0f64;
        for n in -8i64..=8 {
            let f = mode(n);
            let g = mode(-n);
            let ev = (mesh.pair(&a0.apply(&f), &g) / mesh.pair(&f, &g)).re;
            let err = if n == 0 { ev.abs() } else { (ev - n.abs() as f64).abs() / n.abs() as f64 };
            worst = worst.max(err);
        }
        s.check("zero-potential spectrum", worst <= 0.05, format!("max relative error {worst:.2e} <= 5% for |n| <= 8"));

        let v = |z: [f64; 2]| {
            let (a, b) = (z[0] - 0.2, z[1] + 0.1);
            Complex64::new(1.0, 0.5) * (-(a * a + b * b) / (2.0 * 0.09)).exp()
        };
        let op1 = DirichletOperator::new(PolarGrid::new(&mesh, 64)?, &v)?;
        let a1 = dtn_matrix_with(&op1, &mesh, "complex-gaussian")?;
        let asym = a1.asymmetry();
        s.check("symmetry, complex potential", asym <= 1e-6, format!("{asym:.2e} <= 1e-6"));

        let (f1, f2) = (mode(2), mode(1));
        let diff: Vec<Complex64> = a1.apply(&f1).iter().zip(a0.apply(&f1)).map(|(a, b)| a - b).collect();
        let lhs = mesh.pair(&diff, &f2);
        let (u1, u2) = (op1.solve(&f1)?, op0.solve(&f2)?);
        let rhs: Complex64 = op1
            .masses()
            .iter()
            .zip(&op1.potential)
            .zip(u1.values.iter().zip(&u2.values))
            .map(|((m, p), (a, b))| *m * p * a * b)
            .sum();
        let rel = (lhs - rhs).norm() / rhs.norm();
        s.check(
            "boundary-interior identity",
            rel <= 0.01,
            format!("boundary {lhs:.4e}, interior {rhs:.4e}, relative gap {rel:.2e} <= 1%"),
        );
    }
    Ok(())
}

/// Roots of `g'` by a fine sign scan and bisection, from the phase written out directly.
fn oracle_roots(seg: &GraphSegment, x: [f64; 2]) -> Vec<f64> {
    let dg = |p: f64| {
        let [f, d1, _] = seg.function.eval(p);
        let (z, dz) = match seg.orientation {
            Axis::Z1 => ([p, f], [1.0, d1]),
            Axis::Z2 => ([f, p], [d1, 1.0]),
        };
        -2.0 * (x[0] - z[0]) * dz[0] + 2.0 * (x[1] - z[1]) * dz[1]
    };
    let [a, b] = seg.interval;
    let m = 100_000;
    let mut roots = Vec::new();
    let mut prev = dg(a);
    for k in 1..=m {
        let p1 = a + (b - a) * k as f64 / m as f64;
        let v1 = dg(p1);
        if prev * v1 < 0.0 {
            let (mut lo, mut hi) = (a + (b - a) * (k - 1) as f64 / m as f64, p1);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if dg(mid) * dg(lo) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = v1;
    }
    roots
}

fn random_segment(rng: &mut ChaCha8Rng) -> GraphSegment {
    let axis = if rng.gen_bool(0.5) { Axis::Z1 } else { Axis::Z2 };
    let a = rng.gen_range(-1.0..0.0);
    let b = a + rng.gen_range(0.5..2.0);
    let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GraphSegment::new(axis, [a, b], true, CurveFn::Polynomial { coeffs })
}

fn criterion_6(s: &mut Suite) {
    s.begin(6, "stationary points and degenerate locus");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut count_mismatch, mut worst, mut total) = (0usize, 0.0f64, 0usize);
    for _ in 0..100 {
        let seg = random_segment(&mut rng);
        let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
        let found: Vec<f64> = find_stationary(x, &seg, DEFAULT_ROOT_TOL).points.iter().map(|p| p.param).collect();
        let expect = oracle_roots(&seg, x);
        total += expect.len();
        if found.len() != expect.len() {
            count_mismatch += 1;
            continue;
        }
        for (f, e) in found.iter().zip(&expect) {
            worst = worst.max((f - e).abs());
        }
    }
    s.check(
        "root counts vs dense scan",
        count_mismatch == 0,
        format!("{count_mismatch} of 100 configurations differ ({total} roots)"),
    );
    s.check("root locations", worst <= 1e-6, format!("max difference {worst:.2e} <= 1e-6"));

    let mut resid = 0.0f64;
    let mut n = 0;
    for _ in 0..20 {
        let seg = random_segment(&mut rng);
        let locus = degenerate_locus(&seg, 200, 1e-3, 2.0);
        for (pt, &p) in locus.points.iter().zip(&locus.source_params) {
            let [r5, r6] = locus_residuals(&seg, p, *pt);
            resid = resid.max(r5.abs()).max(r6.abs());
            n += 1;
        }
    }
    s.check("locus residuals", n > 0 && resid <= 1e-6, format!("{n} points, max residual {resid:.2e} <= 1e-6"));

    let parabola = GraphSegment::new(Axis::Z1, [-1.0, 1.0], true, CurveFn::Polynomial { coeffs: vec![0.0, 0.0, 0.5] });
    let omega = SubDomain::disk([0.0, 0.0], 1.5).expect("disk");
    let areas: Vec<f64> =
        [0.1, 0.01, 0.001].iter().map(|&eps| tangent_set_area(&parabola, 1.0, eps, &omega, 200_000, 6, 0.0)).collect();
    s.check(
        "tangent-set area",
        areas.windows(2).all(|w| w[1] < w[0]),
        format!("eps 0.1, 0.01, 0.001 give {:.3e}, {:.3e}, {:.3e}, decreasing", areas[0], areas[1], areas[2]),
    );
    s.end(6);
}

fn criterion_7(s: &mut Suite) {
    s.begin(7, "scattering data");
    let cfg = config("scatter.json");
    match run_scatter(&cfg, None) {
        Ok(r) => {
            let ok = !r.born_ratios.is_empty() && r.born_ratios.iter().all(|q| (1.5..=2.5).contains(q));
            s.check("Born ratios", ok, format!("{:?} in [1.5, 2.5]", r.born_ratios));
            s.check("Lippmann-Schwinger residual", r.ls_residual <= 1e-6, format!("{:.2e} <= 1e-6", r.ls_residual));
        }
        Err(e) => s.error("run", e),
    }
    let mut worst = 0.0f64;
    let c = Complex64::new(0.3, -0.4);
    for (n, m, k, exact) in [
        (0i64, 0i64, 2.0, 0.5),
        (1, 0, 3.0, 1.0),
        (2, -3, 3.0, (81.0f64 * 4096.0).sqrt() * 0.5),
        (-4, 1, 5.0, 81.0 * 1.2 * 0.5),
    ] {
        let (ne, nt) = (64usize, 64usize);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); ne * nt];
        coeffs[n.rem_euclid(ne as i64) as usize * nt + m.rem_euclid(nt as i64) as usize] = c;
        let got = FarFieldData::from_coeffs(k, ne, nt, coeffs).and_then(|f| k_norm(&f, 16)).map(|v| v.norm);
        worst = worst.max(got.map_or(f64::INFINITY, |g| (g - exact).abs() / exact));
    }
    s.check("weighted norm, single coefficient", worst <= 1e-12, format!("max relative error {worst:.2e}"));
    s.end(7);
}

fn criterion_8(s: &mut Suite) {
    s.begin(8, "stability under curve perturbation");
    let cfg = config("stability.json");
    let r = match run_stability(&cfg, None) {
        Ok(r) => r,
        Err(e) => return s.error("run", e),
    };
    let mut rows: Vec<_> = r.rows.iter().collect();
    rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let gaps: Vec<f64> = rows.iter().map(|x| x.dtn_gap).collect();
    s.check(
        "gap monotone in delta",
        gaps.windows(2).all(|w| w[1] < w[0]),
        format!("gaps {}", gaps.iter().map(|g| format!("{g:.2e}")).collect::<Vec<_>>().join(", ")),
    );
    let schedule_ok = rows.iter().all(|x| {
        let expect = schedule_lambda(x.dtn_gap, r.diameter);
        let raw_ok = if expect.is_finite() { (x.lambda_raw - expect).abs() <= 1e-12 * expect } else { x.lambda_raw == expect };
        raw_ok && (x.lambda == x.lambda_raw || (x.clamped && x.lambda == r.lambda_clamp))
    });
    s.check(
        "lambda schedule",
        schedule_ok,
        format!(
            "lambda {}",
            rows.iter().map(|x| format!("{:.3}{}", x.lambda, if x.clamped { " (clamped)" } else { "" })).collect::<Vec<_>>().join(", ")
        ),
    );
    let mut nonzero: Vec<_> = rows.iter().filter(|x| x.delta > 0.0).collect();
    nonzero.sort_by(|a, b| b.modulus.total_cmp(&a.modulus));
    let errs: Vec<f64> = nonzero.iter().map(|x| x.sup_error).collect();
    s.check(
        "error nonincreasing with the modulus",
        errs.len() == 4 && errs.windows(2).all(|w| w[1] <= w[0]),
        format!("sup errors {}", errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")),
    );
    s.end(8);
}

fn main() {
    let mut s = Suite::default();
    criterion_1(&mut s);
    criterion_2(&mut s);
    criterion_3(&mut s);
    criterion_4(&mut s);
    criterion_5(&mut s);
    criterion_6(&mut s);
    criterion_7(&mut s);
    criterion_8(&mut s);
    if !s.unexpected.is_empty() {
        eprintln!("\nunexpected failures: {:?}", s.unexpected);
        std::process::exit(1);
    }
    println!("\nno unexpected failures");
}
