//! Binary cache of a similarity matrix.
//!
//! Layout, little endian:
//!
//! ```text
//! "AUTHSIM1"            8 bytes
//! kind code             u8
//! key                   32 bytes, sha256 of everything the matrix depends on
//! n                     u64
//! n ids                 u32 length + UTF-8 bytes each
//! upper triangle        n(n+1)/2 f64, row by row, diagonal included
//! checksum              32 bytes, sha256 of all preceding bytes
//! ```

use std::path::Path;

use authlab_core::similarity::{SimilarityKind, SimilarityMatrix};
use sha2::{Digest, Sha256};

use crate::failure::Failure;
use crate::io::write_atomic;

const MAGIC: &[u8; 8] = b"AUTHSIM1";

pub type CacheKey = [u8; 32];

pub fn encode(m: &SimilarityMatrix, key: &CacheKey) -> Vec<u8> {
    let n = m.len();
    let mut out = Vec::with_capacity(8 + 1 + 32 + 8 + n * 16 + n * (n + 1) * 4 + 32);
    out.extend_from_slice(MAGIC);
    out.push(m.kind.code());
    out.extend_from_slice(key);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for id in m.ids() {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
    }
    for i in 0..n {
        for &v in &m.row(i)[i..] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let sum = Sha256::digest(&out);
    out.extend_from_slice(&sum);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or("truncated")?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decode a cache file, checking it against the expected kind and key.
pub fn decode(bytes: &[u8], kind: SimilarityKind, key: &CacheKey) -> Result<SimilarityMatrix, String> {
    if bytes.len() < MAGIC.len() + 32 || &bytes[..8] != MAGIC {
        return Err("bad magic".into());
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { buf: body, pos: 8 };
    let code = r.take(1)?[0];
    if SimilarityKind::from_code(code) != Some(kind) {
        return Err(format!("cached kind {code} does not match {kind}"));
    }
    if r.take(32)? != key {
        return Err("computed from different inputs or settings".into());
    }
    let n = usize::try_from(r.u64()?).map_err(|_| "size overflow")?;
    // Every id takes at least 4 bytes, which bounds n before allocating.
    if n > body.len() / 4 {
        return Err("implausible account count".into());
    }
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        let len = r.u32()? as usize;
        let s = std::str::from_utf8(r.take(len)?).map_err(|e| e.to_string())?;
        ids.push(s.to_string());
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let raw = r.take((n - i) * 8)?;
        rows.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    if r.pos != body.len() {
        return Err("trailing bytes".into());
    }
    if rows.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
        return Err("similarity outside [0, 1]".into());
    }
    SimilarityMatrix::from_upper_rows(kind, ids, &rows).map_err(|e| e.to_string())
}

pub fn save(path: &Path, m: &SimilarityMatrix, key: &CacheKey) -> Result<(), Failure> {
    let bytes = encode(m, key);
    write_atomic(path, |w| w.write_all(&bytes))
}

/// Load a cached matrix if present and valid. A damaged or stale file is
/// reported with a warning and treated as absent.
pub fn load(path: &Path, kind: SimilarityKind, key: &CacheKey) -> Option<SimilarityMatrix> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
        Err(e) => {
            log::warn!("cannot read similarity cache `{}`: {e}; recomputing", path.display());
            return None;
        }
    };
    match decode(&bytes, kind, key) {
        Ok(m) => Some(m),
        Err(why) => {
            log::warn!("ignoring corrupt similarity cache `{}` ({why}); recomputing", path.display());
            None
        }
    }
}
