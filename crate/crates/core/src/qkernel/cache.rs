//! On-disk kernel cache.
//!
//! Gram construction dominates the kernel pipeline cost, so matrices are
//! persisted keyed by (dataset hash, kernel-config hash). File layout:
//! magic "QKMX", kind byte, row count u64 LE, 32-byte config hash, then
//! row-major f64 LE entries.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{KernelKind, KernelMatrix};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QKMX";

pub fn write_kernel_cache(path: impl AsRef<Path>, km: &KernelMatrix) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&[km.kind.tag_byte()])?;
    w.write_all(&(km.n() as u64).to_le_bytes())?;
    w.write_all(&km.kind.config_sha256())?;
    for v in km.entries.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read back (kind byte, config hash, entries). The caller re-attaches
/// kernel parameters; the header only pins what was hashed.
pub fn read_kernel_cache(path: impl AsRef<Path>) -> Result<(u8, [u8; 32], Array2<f64>)> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::invalid("not a kernel cache file"));
    }
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    let mut n_bytes = [0u8; 8];
    r.read_exact(&mut n_bytes)?;
    let n = u64::from_le_bytes(n_bytes) as usize;
    let mut hash = [0u8; 32];
    r.read_exact(&mut hash)?;
    let mut data = vec![0.0f64; n * n];
    let mut buf = [0u8; 8];
    for v in data.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    let entries =
        Array2::from_shape_vec((n, n), data).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((kind[0], hash, entries))
}

/// Plain CSV export of the Gram entries.
pub fn write_kernel_csv(path: impl AsRef<Path>, km: &KernelMatrix) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    for row in km.entries.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Directory-backed cache keyed by dataset and config hashes.
pub struct KernelCache {
    dir: PathBuf,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(KernelCache { dir })
    }

    fn path_for(&self, dataset_hash: &str, kind: &KernelKind) -> PathBuf {
        let cfg_hex = hex::encode(kind.config_sha256());
        self.dir
            .join(format!("{}-{}.qkmx", &dataset_hash[..16.min(dataset_hash.len())], &cfg_hex[..16]))
    }

    /// Load a cached Gram matrix or compute and persist it. Returns the
    /// matrix and whether it was a cache hit.
    pub fn get_or_compute(
        &self,
        dataset_hash: &str,
        kind: &KernelKind,
        compute: impl FnOnce() -> Result<KernelMatrix>,
    ) -> Result<(KernelMatrix, bool)> {
        let path = self.path_for(dataset_hash, kind);
        if path.exists() {
            let (tag, hash, entries) = read_kernel_cache(&path)?;
            if tag == kind.tag_byte() && hash == kind.config_sha256() {
                let n = entries.nrows();
                return Ok((
                    KernelMatrix {
                        entries,
                        kind: kind.clone(),
                        index_map: (0..n).collect(),
                    },
                    true,
                ));
            }
        }
        let km = compute()?;
        write_kernel_cache(&path, &km)?;
        Ok((km, false))
    }
}
