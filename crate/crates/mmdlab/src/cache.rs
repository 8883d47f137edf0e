//! On-disk cache of harmonic measure matrices.
//!
//! File layout (`HMM1`): the four magic bytes, then little-endian `u64`
//! domain size `n` and boundary size `b`, the `n` domain ids and `b` boundary
//! ids as `u64`, and finally the `n × b` matrix in row-major `f64`. Files are
//! named by the SHA-256 of the space, the domain and the solver settings.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use mmdlab_core::harmonic::{harmonic_measure, HarmonicMeasureMatrix, MeasureSource};
use mmdlab_core::linalg::SolverConfig;
use mmdlab_core::{Executor, MetricMeasureGraph, VertexId};
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 4] = b"HMM1";
pub const ENV_VAR: &str = "MMDLAB_CACHE_DIR";

/// Serves harmonic measures from `dir`, solving and storing on a miss.
pub struct DiskCache<'a, E> {
    dir: PathBuf,
    exec: &'a E,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<'a, E: Executor> DiskCache<'a, E> {
    pub fn new(dir: impl Into<PathBuf>, exec: &'a E) -> Self {
        Self {
            dir: dir.into(),
            exec,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    /// Cache rooted at `$MMDLAB_CACHE_DIR`, if set and non-empty.
    pub fn from_env(exec: &'a E) -> Option<Self> {
        std::env::var_os(ENV_VAR).filter(|d| !d.is_empty()).map(|d| Self::new(d, exec))
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn path_for(&self, space: &MetricMeasureGraph, domain: &[VertexId], config: &SolverConfig) -> PathBuf {
        self.dir.join(format!("{}.hmm", cache_key(space, domain, config)))
    }
}

impl<E: Executor> MeasureSource for DiskCache<'_, E> {
    fn harmonic_measure(
        &self,
        space: &MetricMeasureGraph,
        domain: &[VertexId],
        config: &SolverConfig,
    ) -> mmdlab_core::Result<HarmonicMeasureMatrix> {
        let path = self.path_for(space, domain, config);
        if let Some(k) = load(&path).filter(|k| k.domain == domain) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(k);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let k = harmonic_measure(space, domain, config, self.exec)?;
        if let Err(e) = store(&path, &k) {
            log::warn!("cannot write cache file {}: {e}", path.display());
        }
        Ok(k)
    }
}

/// Hex SHA-256 over the space content, the domain and the solver settings.
pub fn cache_key(space: &MetricMeasureGraph, domain: &[VertexId], config: &SolverConfig) -> String {
    let mut h = Sha256::new();
    h.update(b"space");
    h.update([space.metric() as u8]);
    h.update((space.len() as u64).to_le_bytes());
    for m in space.measures() {
        h.update(m.to_bits().to_le_bytes());
    }
    h.update((space.edge_count() as u64).to_le_bytes());
    for e in space.edges() {
        h.update((e.u as u64).to_le_bytes());
        h.update((e.v as u64).to_le_bytes());
        h.update(e.conductance.to_bits().to_le_bytes());
        h.update(e.length.to_bits().to_le_bytes());
    }
    h.update(b"domain");
    h.update((domain.len() as u64).to_le_bytes());
    for &v in domain {
        h.update((v as u64).to_le_bytes());
    }
    h.update(b"solver");
    h.update(format!("{config:?}").as_bytes());
    hex::encode(h.finalize())
}

pub fn encode(k: &HarmonicMeasureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + 8 * (k.domain.len() + k.boundary.len() + k.values.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(k.domain.len() as u64).to_le_bytes());
    out.extend_from_slice(&(k.boundary.len() as u64).to_le_bytes());
    for &v in k.domain.iter().chain(&k.boundary) {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for x in &k.values {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// `None` on any structural mismatch.
pub fn decode(bytes: &[u8]) -> Option<HarmonicMeasureMatrix> {
    let rest = bytes.strip_prefix(MAGIC)?;
    let mut words = rest.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")));
    if rest.len() % 8 != 0 {
        return None;
    }
    let n = usize::try_from(words.next()?).ok()?;
    let b = usize::try_from(words.next()?).ok()?;
    let expected = n.checked_add(b)?.checked_add(n.checked_mul(b)?)?.checked_add(2)?;
    if rest.len() / 8 != expected {
        return None;
    }
    let domain: Vec<VertexId> = words.by_ref().take(n).map(|w| w as VertexId).collect();
    let boundary: Vec<VertexId> = words.by_ref().take(b).map(|w| w as VertexId).collect();
    let values: Vec<f64> = words.map(f64::from_bits).collect();
    HarmonicMeasureMatrix::new(domain, boundary, values).ok()
}

fn load(path: &Path) -> Option<HarmonicMeasureMatrix> {
    decode(&std::fs::read(path).ok()?)
}

/// Writes through a temporary file so readers never see a partial matrix.
fn store(path: &Path, k: &HarmonicMeasureMatrix) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, encode(k))?;
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mmdlab_core::generators::{generate, GeneratorSpec};
    use mmdlab_core::Sequential;

    #[test]
    fn encode_decode() {
        let k = HarmonicMeasureMatrix::new(vec![3, 4], vec![1, 5, 9], vec![0.25, 0.5, 0.25, 0.0, 1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let bytes = encode(&k);
        assert_eq!(&bytes[..4], b"HMM1");
        assert_eq!(decode(&bytes).unwrap(), k);
        assert!(decode(&bytes[..bytes.len() - 1]).is_none());
        assert!(decode(b"HMM2").is_none());
    }

    #[test]
    fn second_lookup_hits() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate(&GeneratorSpec::lattice(2, 9)).unwrap();
        let domain = g.ball(40, 3.0).unwrap();
        let cache = DiskCache::new(dir.path(), &Sequential);
        let cfg = SolverConfig::default();
        let a = cache.harmonic_measure(&g, &domain, &cfg).unwrap();
        let b = cache.harmonic_measure(&g, &domain, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
        assert_eq!(a, harmonic_measure(&g, &domain, &cfg, &Sequential).unwrap());
        let other = g.ball(40, 2.0).unwrap();
        assert_ne!(cache.path_for(&g, &domain, &cfg), cache.path_for(&g, &other, &cfg));
    }
}
