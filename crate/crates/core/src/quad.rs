//! Gauss-Legendre rules and a bracketing root finder shared by several modules.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let len = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * len;
        for k in 0..order {
            nodes.push(lo + 0.5 * len * (x[k] + 1.0));
            weights.push(0.5 * len * w[k]);
        }
    }
    (nodes, weights)
}

/// Roots of `f` on `[a, b]`: sign changes on a uniform lattice refined by bisection
/// and two guarded Newton steps. `f` returns value and derivative.
pub fn lattice_roots(f: &dyn Fn(f64) -> [f64; 2], a: f64, b: f64, lattice: usize, tol: f64) -> Vec<f64> {
    let m = lattice.max(2);
    let xs: Vec<f64> = (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)[0]).collect();
    let mut roots: Vec<f64> = Vec::new();
    let mut k = 0;
    while k < m {
        let (x0, x1, v0, v1) = (xs[k], xs[k + 1], vs[k], vs[k + 1]);
        if v0 == 0.0 {
            roots.push(x0);
            if v1 == 0.0 {
                k += 1;
            }
        } else if v0 * v1 < 0.0 {
            let r = refine(f, x0, x1, v0);
            if f(r)[0].abs() <= tol {
                roots.push(r);
            }
        }
        k += 1;
    }
    if vs[m] == 0.0 && roots.last().is_none_or(|&r| r < xs[m]) {
        roots.push(xs[m]);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + b.abs()));
    roots
}

fn refine(f: &dyn Fn(f64) -> [f64; 2], mut lo: f64, mut hi: f64, vlo: f64) -> f64 {
    let slo = vlo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)[0];
        if v == 0.0 {
            return mid;
        }
        if v.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let [v, d] = f(x);
        if d != 0.0 {
            let nx = x - v / d;
            if nx >= lo && nx <= hi {
                x = nx;
            }
        }
    }
    x
}
