//! Content-addressed store of DtN matrices.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use bukhgeim::dtn::{dtn_matrix_with, BoundaryMesh, DirichletOperator, DtnMatrix, PolarGrid};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::MeshSpec;
use crate::description::PotentialSpec;

/// Bump when the forward discretization changes so stale blobs are not reused.
const FORMAT_VERSION: u32 = 1;

pub struct DtnCache {
    dir: PathBuf,
    lock: Mutex<()>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl DtnCache {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), lock: Mutex::new(()), hits: AtomicUsize::new(0), misses: AtomicUsize::new(0) })
    }

    /// Key over the potential description hash, the mesh and the solver resolution.
    pub fn key(potential_hash: &str, mesh: &BoundaryMesh, rings: usize, average: usize) -> String {
        let mut h = Sha256::new();
        h.update(FORMAT_VERSION.to_le_bytes());
        h.update(potential_hash.as_bytes());
        h.update(mesh.hash().as_bytes());
        h.update((rings as u64).to_le_bytes());
        h.update((average as u64).to_le_bytes());
        hex::encode(h.finalize())
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.dtn"))
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    /// Loads the matrix stored under `key` or computes and stores it. The computation
    /// runs outside the lock; reads and writes are serialized.
    pub fn get_or_compute(&self, key: &str, compute: impl FnOnce() -> Result<DtnMatrix>) -> Result<DtnMatrix> {
        let path = self.path(key);
        {
            let _g = self.lock.lock().expect("cache lock");
            if path.is_file() {
                if let Ok((m, _)) = DtnMatrix::load(&path) {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(m);
                }
            }
        }
        let m = compute()?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        let _g = self.lock.lock().expect("cache lock");
        let tmp = self.dir.join(format!("{key}.tmp"));
        m.save(&tmp, json!({ "rings": m.nr, "key": key }))?;
        std::fs::rename(&tmp, &path)?;
        Ok(m)
    }
}

impl MeshSpec {
    pub fn build(&self) -> Result<BoundaryMesh> {
        Ok(BoundaryMesh::circle(self.center, self.radius, self.nodes)?)
    }
}

/// DtN matrix of `spec` on `mesh`, through `cache` when given.
pub fn dtn_for(spec: &PotentialSpec, mesh: &MeshSpec, cache: Option<&DtnCache>) -> Result<DtnMatrix> {
    let boundary = mesh.build()?;
    let compute = || -> Result<DtnMatrix> {
        let v = spec.build()?;
        let grid = PolarGrid::new(&boundary, mesh.rings)?;
        let eval = |z: [f64; 2]| v.eval(z);
        let op = if mesh.average > 0 {
            DirichletOperator::new_averaged(grid, &eval, mesh.average)?
        } else {
            DirichletOperator::new(grid, &eval)?
        };
        Ok(dtn_matrix_with(&op, &boundary, &spec.hash())?)
    };
    match cache {
        Some(c) => c.get_or_compute(&DtnCache::key(&spec.hash(), &boundary, mesh.rings, mesh.average), compute),
        None => compute(),
    }
}
