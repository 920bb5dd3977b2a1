//! Forward Dirichlet solver for `Delta u = V u` on a disk and discrete
//! Dirichlet-to-Neumann matrices assembled from the weak form
//! `<Lambda_V f, v> = int V u v + grad u . grad v`.
//!
//! The disk is discretized by a vertex-centered finite-volume scheme on a polar
//! lattice: a center node plus `nr` rings of `ntheta` nodes, the last ring being
//! the boundary mesh. Each node couples to its four lattice neighbours (the center
//! couples to the whole first ring), so the discrete bilinear form is symmetric
//! without conjugation and the discrete Alessandrini identity holds exactly.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::persist::{read_blob, write_blob};

pub const MIN_BOUNDARY_NODES: usize = 64;
pub const NEAR_SINGULAR_COND: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMesh {
    pub center: [f64; 2],
    pub radius: f64,
    pub nodes: Vec<[f64; 2]>,
    pub arc_weights: Vec<f64>,
}

impl BoundaryMesh {
    /// `n` equally spaced nodes on the circle, counterclockwise from angle 0.
    pub fn circle(center: [f64; 2], radius: f64, n: usize) -> Result<Self> {
        if n < MIN_BOUNDARY_NODES {
            return Err(Error::Invalid(format!("boundary mesh needs at least {MIN_BOUNDARY_NODES} nodes, got {n}")));
        }
        if !(radius > 0.0) {
            return Err(Error::Invalid("radius must be positive".into()));
        }
        let nodes = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect();
        Ok(Self { center, radius, nodes, arc_weights: vec![2.0 * PI * radius / n as f64; n] })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.len() as f64
    }

    pub fn length(&self) -> f64 {
        self.arc_weights.iter().sum()
    }

    /// Signed Fourier mode of column `k` in the FFT ordering.
    pub fn mode(&self, k: usize) -> i64 {
        let n = self.len() as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Unitary matrix whose column `k` samples `exp(i mode(k) theta) / sqrt(n)`.
    pub fn fourier_basis(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let s = 1.0 / (n as f64).sqrt();
        DMatrix::from_fn(n, n, |j, k| Complex64::from_polar(s, self.mode(k) as f64 * self.angle(j)))
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&(self.center, self.radius, self.len())).expect("mesh serializes"));
        hex::encode(h.finalize())
    }

    /// Arc-weighted pairing `int f g` without conjugation.
    pub fn pair(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter().zip(g).zip(&self.arc_weights).map(|((a, b), w)| a * b * w).sum()
    }
}

/// Polar lattice on the mesh disk with `nr` rings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub center: [f64; 2],
    pub radius: f64,
    pub nr: usize,
    pub ntheta: usize,
}

impl PolarGrid {
    pub fn new(mesh: &BoundaryMesh, nr: usize) -> Result<Self> {
        if nr < 2 {
            return Err(Error::Invalid("polar grid needs at least two rings".into()));
        }
        Ok(Self { center: mesh.center, radius: mesh.radius, nr, ntheta: mesh.len() })
    }

    /// Ring count matching a Cartesian spacing `h`.
    pub fn rings_for_spacing(radius: f64, h: f64) -> usize {
        ((radius / h).round() as usize).max(2)
    }

    pub fn len(&self) -> usize {
        1 + self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.nr as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    /// Node index of ring `i >= 1`, angle `j`; index 0 is the center.
    pub fn index(&self, i: usize, j: usize) -> usize {
        1 + (i - 1) * self.ntheta + j % self.ntheta
    }

    pub fn boundary_index(&self, j: usize) -> usize {
        self.index(self.nr, j)
    }

    pub fn ring_of(&self, idx: usize) -> (usize, usize) {
        if idx == 0 {
            (0, 0)
        } else {
            (1 + (idx - 1) / self.ntheta, (idx - 1) % self.ntheta)
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.ring_of(idx).0 == self.nr
    }

    pub fn node(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.ring_of(idx);
        let r = i as f64 * self.dr();
        let t = j as f64 * self.dtheta();
        [self.center[0] + r * t.cos(), self.center[1] + r * t.sin()]
    }

    /// Control-volume area of each node.
    pub fn masses(&self) -> Vec<f64> {
        let (dr, dt) = (self.dr(), self.dtheta());
        let mut m = vec![0.0; self.len()];
        m[0] = PI * 0.25 * dr * dr;
        for i in 1..=self.nr {
            let r = i as f64 * dr;
            let w = if i == self.nr { (r - 0.25 * dr) * 0.5 * dr * dt } else { r * dr * dt };
            for j in 0..self.ntheta {
                m[self.index(i, j)] = w;
            }
        }
        m
    }

    /// Edges `(a, b, weight)` of the discrete Dirichlet form `sum w (u_a - u_b)(v_a - v_b)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let (dr, dt) = (self.dr(), self.dtheta());
        let mut e = Vec::with_capacity(2 * self.len());
        for j in 0..self.ntheta {
            e.push((0, self.index(1, j), 0.5 * dt));
        }
        for i in 1..=self.nr {
            let r = i as f64 * dr;
            let ang = if i == self.nr { 0.5 * dr / (r * dt) } else { dr / (r * dt) };
            for j in 0..self.ntheta {
                e.push((self.index(i, j), self.index(i, j + 1), ang));
                if i < self.nr {
                    e.push((self.index(i, j), self.index(i + 1, j), (r + 0.5 * dr) * dt / dr));
                }
            }
        }
        e
    }

    pub fn sample(&self, f: &dyn Fn([f64; 2]) -> Complex64) -> Vec<Complex64> {
        (0..self.len()).map(|k| f(self.node(k))).collect()
    }

    /// Control-volume averages of `f` from `sub x sub` midpoint samples in `(r, theta)`,
    /// weighted by `r`.
    pub fn sample_averaged(&self, f: &dyn Fn([f64; 2]) -> Complex64, sub: usize) -> Vec<Complex64> {
        let sub = sub.max(1);
        let (dr, dt) = (self.dr(), self.dtheta());
        (0..self.len())
            .map(|k| {
                let (i, j) = self.ring_of(k);
                let (r0, r1, t0, t1) = if k == 0 {
                    (0.0, 0.5 * dr, 0.0, 2.0 * PI)
                } else {
                    let r = i as f64 * dr;
                    let t = j as f64 * dt;
                    (r - 0.5 * dr, (r + 0.5 * dr).min(self.radius), t - 0.5 * dt, t + 0.5 * dt)
                };
                let (mut acc, mut wsum) = (Complex64::new(0.0, 0.0), 0.0);
                for a in 0..sub {
                    let r = r0 + (r1 - r0) * (a as f64 + 0.5) / sub as f64;
                    for b in 0..sub {
                        let t = t0 + (t1 - t0) * (b as f64 + 0.5) / sub as f64;
                        acc += f([self.center[0] + r * t.cos(), self.center[1] + r * t.sin()]) * r;
                        wsum += r;
                    }
                }
                acc / wsum
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct PolarField {
    pub grid: PolarGrid,
    pub values: Vec<Complex64>,
}

impl PolarField {
    pub fn boundary_values(&self) -> Vec<Complex64> {
        (0..self.grid.ntheta).map(|j| self.values[self.grid.boundary_index(j)]).collect()
    }

    /// Discrete `H^1` norm from the same edges and masses as the solver.
    pub fn h1_norm(&self) -> f64 {
        let u = &self.values;
        let grad: f64 = self.grid.edges().iter().map(|&(a, b, w)| w * (u[a] - u[b]).norm_sqr()).sum();
        let mass: f64 = self.grid.masses().iter().zip(u).map(|(m, v)| m * v.norm_sqr()).sum();
        (grad + mass).sqrt()
    }

    /// Bilinear interpolation in `(r, theta)`.
    pub fn interpolate(&self, z: [f64; 2]) -> Complex64 {
        let g = &self.grid;
        let (dx, dy) = (z[0] - g.center[0], z[1] - g.center[1]);
        let r = (dx * dx + dy * dy).sqrt().min(g.radius);
        let t = dy.atan2(dx).rem_euclid(2.0 * PI);
        let s = r / g.dr();
        let i0 = (s.floor() as usize).min(g.nr - 1);
        let fr = s - i0 as f64;
        let u = t / g.dtheta();
        let j0 = u.floor() as usize % g.ntheta;
        let ft = u - u.floor();
        let at = |i: usize, j: usize| if i == 0 { self.values[0] } else { self.values[g.index(i, j)] };
        let ring = |i: usize| at(i, j0) * (1.0 - ft) + at(i, j0 + 1) * ft;
        ring(i0) * (1.0 - fr) + ring(i0 + 1) * fr
    }
}

/// Banded LU without pivoting; rows store columns `i - b ..= i + b`.
#[derive(Clone, Debug)]
struct BandLu {
    n: usize,
    b: usize,
    a: Vec<Complex64>,
}

impl BandLu {
    fn at(&self, i: usize, j: usize) -> usize {
        i * (2 * self.b + 1) + (j + self.b - i)
    }

    fn factor(n: usize, b: usize, mut a: Vec<Complex64>) -> Result<Self> {
        let w = 2 * b + 1;
        for k in 0..n {
            let piv = a[k * w + b];
            if piv.norm() == 0.0 || !piv.is_finite() {
                return Err(Error::NearSingular { cond: f64::INFINITY });
            }
            let hi = (k + b).min(n - 1);
            for i in k + 1..=hi {
                let ik = i * w + (k + b - i);
                let l = a[ik] / piv;
                a[ik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=hi {
                    let kj = k * w + (j + b - k);
                    let ij = i * w + (j + b - i);
                    let v = a[kj];
                    a[ij] -= l * v;
                }
            }
        }
        Ok(Self { n, b, a })
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let (n, b) = (self.n, self.b);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let mut s = rhs[i];
            for j in lo..i {
                s -= self.a[self.at(i, j)] * rhs[j];
            }
            rhs[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + b).min(n - 1);
            let mut s = rhs[i];
            for j in i + 1..=hi {
                s -= self.a[self.at(i, j)] * rhs[j];
            }
            rhs[i] = s / self.a[self.at(i, i)];
        }
    }
}

/// Factored interior operator for one potential.
#[derive(Clone, Debug)]
pub struct DirichletOperator {
    pub grid: PolarGrid,
    pub potential: Vec<Complex64>,
    pub cond_estimate: f64,
    edges: Vec<(usize, usize, f64)>,
    masses: Vec<f64>,
    lu: BandLu,
}

impl DirichletOperator {
    pub fn new(grid: PolarGrid, v: &dyn Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let potential = grid.sample(v);
        Self::from_nodal(grid, potential)
    }

    /// Potential averaged over each control volume (see [`PolarGrid::sample_averaged`]).
    pub fn new_averaged(grid: PolarGrid, v: &dyn Fn([f64; 2]) -> Complex64, sub: usize) -> Result<Self> {
        let potential = grid.sample_averaged(v, sub);
        Self::from_nodal(grid, potential)
    }

    pub fn from_nodal(grid: PolarGrid, potential: Vec<Complex64>) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(Error::MeshMismatch);
        }
        if potential.iter().any(|z| !z.is_finite()) {
            return Err(Error::Invalid("potential is not finite on the polar grid".into()));
        }
        let edges = grid.edges();
        let masses = grid.masses();
        let n = grid.len() - grid.ntheta;
        let b = grid.ntheta;
        let w = 2 * b + 1;
        let mut a = vec![Complex64::new(0.0, 0.0); n * w];
        for k in 0..n {
            a[k * w + b] += potential[k] * masses[k];
        }
        for &(p, q, e) in &edges {
            if p < n {
                a[p * w + b] += e;
            }
            if q < n {
                a[q * w + b] += e;
            }
            if p < n && q < n {
                a[p * w + (q + b - p)] -= e;
                a[q * w + (p + b - q)] -= e;
            }
        }
        let norm1 = band_norm1(n, b, &a);
        let lu = BandLu::factor(n, b, a)?;
        let inv1 = hager_inverse_norm1(&lu);
        let cond_estimate = norm1 * inv1;
        if !(cond_estimate <= NEAR_SINGULAR_COND) {
            return Err(Error::NearSingular { cond: cond_estimate });
        }
        Ok(Self { grid, potential, cond_estimate, edges, masses, lu })
    }

    pub fn from_field(grid: PolarGrid, v: &ComplexField) -> Result<Self> {
        check_covers(&grid, v)?;
        Self::new(grid, &|z| v.interpolate(z))
    }

    fn n_interior(&self) -> usize {
        self.grid.len() - self.grid.ntheta
    }

    /// Solves with boundary values `f` given at the mesh nodes.
    pub fn solve(&self, f: &[Complex64]) -> Result<PolarField> {
        let g = &self.grid;
        if f.len() != g.ntheta {
            return Err(Error::MeshMismatch);
        }
        let n = self.n_interior();
        let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
        for (j, &v) in f.iter().enumerate() {
            values[g.boundary_index(j)] = v;
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for &(p, q, e) in &self.edges {
            if p < n && q >= n {
                rhs[p] += values[q] * e;
            } else if q < n && p >= n {
                rhs[q] += values[p] * e;
            }
        }
        self.lu.solve(&mut rhs);
        values[..n].copy_from_slice(&rhs);
        Ok(PolarField { grid: g.clone(), values })
    }

    /// `a_h(u, v) = sum_edges w (u_a - u_b)(v_a - v_b) + sum_nodes m V u v`.
    pub fn weak_form(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let grad: Complex64 = self.edges.iter().map(|&(a, b, w)| (u[a] - u[b]) * (v[a] - v[b]) * w).sum();
        let mass: Complex64 = (0..u.len()).map(|k| self.potential[k] * u[k] * v[k] * self.masses[k]).sum();
        grad + mass
    }

    /// Residual of the discrete equation at every interior node.
    pub fn interior_residual(&self, u: &PolarField) -> f64 {
        let n = self.n_interior();
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            r[k] = self.potential[k] * self.masses[k] * u.values[k];
        }
        for &(p, q, e) in &self.edges {
            let d = (u.values[p] - u.values[q]) * e;
            if p < n {
                r[p] += d;
            }
            if q < n {
                r[q] -= d;
            }
        }
        r.iter().zip(&self.masses).map(|(v, m)| v.norm() / m).fold(0.0, f64::max)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

fn check_covers(grid: &PolarGrid, v: &ComplexField) -> Result<()> {
    let lo = [grid.center[0] - grid.radius, grid.center[1] - grid.radius];
    let hi = [grid.center[0] + grid.radius, grid.center[1] + grid.radius];
    let g = &v.grid;
    let half = 0.5 * g.side();
    let c = g.center();
    let inside = |p: [f64; 2]| (0..2).all(|k| (p[k] - c[k]).abs() <= half);
    if inside(lo) && inside(hi) {
        Ok(())
    } else {
        Err(Error::SupportViolation { band_max: half, field_max: (grid.radius + (grid.center[0] - c[0]).abs()).max(grid.radius + (grid.center[1] - c[1]).abs()) })
    }
}

fn band_norm1(n: usize, b: usize, a: &[Complex64]) -> f64 {
    let w = 2 * b + 1;
    let mut col = vec![0.0; n];
    for i in 0..n {
        for j in i.saturating_sub(b)..=(i + b).min(n - 1) {
            col[j] += a[i * w + (j + b - i)].norm();
        }
    }
    col.into_iter().fold(0.0, f64::max)
}

/// Hager's estimate of `||A^{-1}||_1` for complex symmetric `A`.
fn hager_inverse_norm1(lu: &BandLu) -> f64 {
    let n = lu.n;
    let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0;
    for _ in 0..5 {
        let mut y = x.clone();
        lu.solve(&mut y);
        let new_est: f64 = y.iter().map(|v| v.norm()).sum();
        if !new_est.is_finite() {
            return f64::INFINITY;
        }
        if new_est <= est {
            break;
        }
        est = new_est;
        // A^{-H} xi = conj(A^{-1} conj(xi)) since A^T = A.
        let mut z: Vec<Complex64> =
            y.iter().map(|v| if v.norm() > 0.0 { (v / v.norm()).conj() } else { Complex64::new(1.0, 0.0) }).collect();
        lu.solve(&mut z);
        let z: Vec<Complex64> = z.into_iter().map(|v| v.conj()).collect();
        let (jmax, zmax) = z.iter().enumerate().map(|(j, v)| (j, v.norm())).fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if zmax <= ztx {
            break;
        }
        x = vec![Complex64::new(0.0, 0.0); n];
        x[jmax] = Complex64::new(1.0, 0.0);
    }
    est
}

/// Solves `Delta u = V u`, `u = f` on the mesh, on a polar grid with `nr` rings.
pub fn solve_dirichlet(v: &ComplexField, f: &[Complex64], mesh: &BoundaryMesh, nr: usize) -> Result<PolarField> {
    let op = DirichletOperator::from_field(PolarGrid::new(mesh, nr)?, v)?;
    op.solve(f)
}

#[derive(Clone, Debug)]
pub struct DtnMatrix {
    /// Nodal action: `(A f)_j` approximates `Lambda_V f` at node `j`.
    pub entries: DMatrix<Complex64>,
    pub mesh: BoundaryMesh,
    pub potential_tag: String,
    pub nr: usize,
}

impl DtnMatrix {
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.mesh.len();
        (0..n).map(|j| (0..n).map(|k| self.entries[(j, k)] * f[k]).sum()).collect()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.entries - self.entries.transpose()).norm() / self.entries.norm()
    }

    pub fn sub(&self, other: &DtnMatrix) -> Result<DMatrix<Complex64>> {
        if self.mesh != other.mesh || self.nr != other.nr {
            return Err(Error::MeshMismatch);
        }
        Ok(&self.entries - &other.entries)
    }

    pub fn save(&self, path: &Path, grid_params: serde_json::Value) -> Result<()> {
        let header = DtnHeader {
            mesh_hash: self.mesh.hash(),
            potential_tag: self.potential_tag.clone(),
            grid_params,
            mesh: self.mesh.clone(),
            nr: self.nr,
        };
        write_blob(path, &header, self.entries.iter().copied())
    }

    pub fn load(path: &Path) -> Result<(Self, serde_json::Value)> {
        let (head, vals): (DtnHeader, _) = read_blob(path)?;
        let n = head.mesh.len();
        if head.mesh.hash() != head.mesh_hash || vals.len() != n * n {
            return Err(Error::Invalid(format!("corrupt DtN blob {}", path.display())));
        }
        let entries = DMatrix::from_column_slice(n, n, &vals);
        Ok((Self { entries, mesh: head.mesh, potential_tag: head.potential_tag, nr: head.nr }, head.grid_params))
    }
}

#[derive(Serialize, Deserialize)]
struct DtnHeader {
    mesh_hash: String,
    potential_tag: String,
    grid_params: serde_json::Value,
    mesh: BoundaryMesh,
    nr: usize,
}

/// Assembles the DtN matrix column by column: column `k` solves with the nodal hat
/// `e_k` and evaluates the weak form against the zero extension of each test hat.
pub fn dtn_matrix_with(op: &DirichletOperator, mesh: &BoundaryMesh, tag: &str) -> Result<DtnMatrix> {
    let g = &op.grid;
    if g.ntheta != mesh.len() || g.center != mesh.center || g.radius != mesh.radius {
        return Err(Error::MeshMismatch);
    }
    let n = mesh.len();
    let mut entries = DMatrix::zeros(n, n);
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        f[k] = Complex64::new(1.0, 0.0);
        let u = op.solve(&f)?;
        f[k] = Complex64::new(0.0, 0.0);
        for j in 0..n {
            entries[(j, k)] = boundary_weak_form(op, &u.values, g.boundary_index(j)) / mesh.arc_weights[j];
        }
    }
    Ok(DtnMatrix { entries, mesh: mesh.clone(), potential_tag: tag.to_string(), nr: g.nr })
}

/// `a_h(u, e_idx)` using only the edges touching `idx`.
fn boundary_weak_form(op: &DirichletOperator, u: &[Complex64], idx: usize) -> Complex64 {
    let g = &op.grid;
    let (_, j) = g.ring_of(idx);
    let dr = g.dr();
    let dt = g.dtheta();
    let r = g.radius;
    let ang = 0.5 * dr / (r * dt);
    let rad = (r - 0.5 * dr) * dt / dr;
    let left = g.index(g.nr, j + g.ntheta - 1);
    let right = g.index(g.nr, j + 1);
    let inner = g.index(g.nr - 1, j);
    (u[idx] - u[left]) * ang + (u[idx] - u[right]) * ang + (u[idx] - u[inner]) * rad + op.potential[idx] * u[idx] * op.masses[idx]
}

pub fn dtn_matrix(v: &ComplexField, mesh: &BoundaryMesh, nr: usize, tag: &str) -> Result<DtnMatrix> {
    let op = DirichletOperator::from_field(PolarGrid::new(mesh, nr)?, v)?;
    dtn_matrix_with(&op, mesh, tag)
}

/// Spectral norm of `W^{-1} F^* (A - B) F W^{-1}` with `W = (1 + n^2)^{1/4}`.
pub fn dtn_opnorm_diff(a: &DtnMatrix, b: &DtnMatrix) -> Result<f64> {
    let d = a.sub(b)?;
    Ok(weighted_opnorm(&a.mesh, &d))
}

pub fn weighted_opnorm(mesh: &BoundaryMesh, d: &DMatrix<Complex64>) -> f64 {
    let f = mesh.fourier_basis();
    let mut m = f.adjoint() * d * &f;
    let n = mesh.len();
    for k in 0..n {
        let wk = (1.0 + (mesh.mode(k) as f64).powi(2)).powf(-0.25);
        for j in 0..n {
            let wj = (1.0 + (mesh.mode(j) as f64).powi(2)).powf(-0.25);
            m[(j, k)] *= wj * wk;
        }
    }
    m.singular_values().max()
}
