//! Binary cache for assembled operators.
//!
//! Layout: a 16-byte header (`b"NCDZ"`, format version, dimension, elements per axis as
//! little-endian `u32`), followed by little-endian `f64` arrays. Each array is preceded
//! by its length, also written as an `f64`. Index arrays are stored as exact integers in
//! `f64`, which is lossless for any grid that fits in memory.

use super::{Discretization, DomainSpec, MeshError};
use crate::linalg::CsrMatrix;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"NCDZ";
const VERSION: u32 = 1;

/// File name for the cache entry of `(domain, n)`, derived from an FNV-1a hash of the
/// domain bounds, star center and resolution.
pub fn cache_key(domain: &DomainSpec, n: usize) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for v in domain.lower().iter().chain(domain.upper()).chain(domain.star_center()) {
        feed(&v.to_le_bytes());
    }
    feed(&(n as u64).to_le_bytes());
    format!("disc_{}d_n{}_{:016x}.bin", domain.dim(), n, h)
}

fn write_array(out: &mut Vec<u8>, data: impl ExactSizeIterator<Item = f64>) {
    out.extend_from_slice(&(data.len() as f64).to_le_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn write_matrix(out: &mut Vec<u8>, m: &CsrMatrix) {
    write_array(out, m.row_ptr().iter().map(|&v| v as f64));
    write_array(out, m.col_idx().iter().map(|&v| v as f64));
    write_array(out, m.values().iter().copied());
}

pub fn save_cache(disc: &Discretization, path: &Path) -> Result<(), MeshError> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(disc.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(disc.elements_per_axis() as u32).to_le_bytes());
    let dom = disc.domain();
    write_array(
        &mut out,
        dom.lower().iter().chain(dom.upper()).chain(dom.star_center()).copied().collect::<Vec<_>>().into_iter(),
    );
    write_matrix(&mut out, disc.stiffness());
    write_matrix(&mut out, disc.mass());
    write_matrix(&mut out, disc.boundary_mass());
    write_array(&mut out, disc.pohozaev().iter().copied());
    let mut f = std::fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn f64(&mut self) -> Result<f64, MeshError> {
        let bytes =
            self.buf.get(self.pos..self.pos + 8).ok_or_else(|| MeshError::InvalidCache("truncated file".into()))?;
        self.pos += 8;
        Ok(f64::from_le_bytes(bytes.try_into().unwrap()))
    }

    fn array(&mut self) -> Result<Vec<f64>, MeshError> {
        let len = self.f64()?;
        if !(len >= 0.0 && len.fract() == 0.0 && len <= (self.buf.len() / 8) as f64) {
            return Err(MeshError::InvalidCache(format!("bad array length {len}")));
        }
        (0..len as usize).map(|_| self.f64()).collect()
    }

    fn indices(&mut self) -> Result<Vec<usize>, MeshError> {
        self.array()?
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(MeshError::InvalidCache(format!("bad index {v}")))
                }
            })
            .collect()
    }

    fn matrix(&mut self, n: usize) -> Result<CsrMatrix, MeshError> {
        let row_ptr = self.indices()?;
        let col_idx = self.indices()?;
        let values = self.array()?;
        let ok = row_ptr.len() == n + 1
            && col_idx.len() == values.len()
            && row_ptr.last() == Some(&values.len())
            && row_ptr.windows(2).all(|w| w[0] <= w[1])
            && col_idx.iter().all(|&c| c < n);
        if !ok {
            return Err(MeshError::InvalidCache("inconsistent sparse matrix".into()));
        }
        Ok(CsrMatrix::from_raw(n, n, row_ptr, col_idx, values))
    }
}

/// Loads a cache entry, checking that it was written for `(domain, n)`.
pub fn load_cache(path: &Path, domain: &DomainSpec, n: usize) -> Result<Discretization, MeshError> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 16 || &buf[0..4] != MAGIC {
        return Err(MeshError::InvalidCache("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
    if word(4) != VERSION {
        return Err(MeshError::InvalidCache(format!("unsupported version {}", word(4))));
    }
    if word(8) as usize != domain.dim() || word(12) as usize != n {
        return Err(MeshError::InvalidCache("dimension or resolution mismatch".into()));
    }
    let mut r = Reader { buf: &buf, pos: 16 };
    let geom = r.array()?;
    let expected: Vec<f64> = domain.lower().iter().chain(domain.upper()).chain(domain.star_center()).copied().collect();
    if geom != expected {
        return Err(MeshError::InvalidCache("domain mismatch".into()));
    }
    let nodes = (n + 1).pow(domain.dim() as u32);
    let k = r.matrix(nodes)?;
    let m = r.matrix(nodes)?;
    let b = r.matrix(nodes)?;
    let p = r.array()?;
    if r.pos != buf.len() {
        return Err(MeshError::InvalidCache("trailing bytes".into()));
    }
    Discretization::from_parts(domain.clone(), n, k, m, b, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{assemble, build_domain, DomainKind};

    #[test]
    fn roundtrip_is_bitwise() {
        let d = build_domain(DomainKind::Rectangle { ax: 0.0, bx: 1.0, ay: 0.0, by: 0.3 }, None).unwrap();
        let disc = assemble(&d, 5).unwrap();
        let dir = std::env::temp_dir().join(format!("normcrit-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(cache_key(&d, 5));
        save_cache(&disc, &path).unwrap();
        let back = load_cache(&path, &d, 5).unwrap();
        assert_eq!(back.stiffness(), disc.stiffness());
        assert_eq!(back.mass(), disc.mass());
        assert_eq!(back.boundary_mass(), disc.boundary_mass());
        assert_eq!(back.pohozaev(), disc.pohozaev());
        assert!(matches!(load_cache(&path, &d, 6), Err(MeshError::InvalidCache(_))));
        std::fs::write(&path, b"garbage").unwrap();
        assert!(matches!(load_cache(&path, &d, 5), Err(MeshError::InvalidCache(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn keys_differ_by_resolution_and_geometry() {
        let a = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        let b = build_domain(DomainKind::Interval { a: 0.0, b: 2.0 }, None).unwrap();
        assert_ne!(cache_key(&a, 8), cache_key(&a, 16));
        assert_ne!(cache_key(&a, 8), cache_key(&b, 8));
        assert_eq!(cache_key(&a, 8), cache_key(&a, 8));
    }
}
