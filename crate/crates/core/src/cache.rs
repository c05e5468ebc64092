//! Persisted kernel memo (`ef_normal` entries) for one parameter set.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes  "QDISTMEM"
//! version u32
//! ell     u32
//! level   u32
//! root    u32
//! sha256  32 bytes of the body
//! body    u64 record count, then per record:
//!           j u32, a u64, b u64, term count u32,
//!           per term: f u64, k u64, e u64, then φ(ℓ) coefficients in the
//!           internal power basis, each a u32 length and a decimal "p/q" string
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{AlgElement, Algebra, AlgebraError, AlgebraParams, Monomial, Terms};
use crate::arith::{CycNum, Rat};

pub const MAGIC: &[u8; 8] = b"QDISTMEM";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a cache file (bad magic)")]
    BadMagic,
    #[error("unsupported cache version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("cache content hash does not match; the file is corrupt")]
    HashMismatch,
    #[error("cache was written for {found}, session uses {expected}")]
    ParamsMismatch { expected: AlgebraParams, found: String },
    #[error("malformed cache body: {0}")]
    Malformed(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub fn encode(alg: &Algebra) -> Vec<u8> {
    let params = alg.params();
    let entries = alg.ef_memo_entries();
    let mut body = Vec::new();
    body.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for ((j, a, b), elem) in &entries {
        body.extend_from_slice(&j.to_le_bytes());
        body.extend_from_slice(&a.to_le_bytes());
        body.extend_from_slice(&b.to_le_bytes());
        body.extend_from_slice(&(elem.terms().len() as u32).to_le_bytes());
        for (m, c) in elem.terms() {
            for v in [m.f, m.k, m.e] {
                body.extend_from_slice(&v.to_le_bytes());
            }
            for r in c.coeffs() {
                let s = format!("{}/{}", r.numer(), r.denom());
                body.extend_from_slice(&(s.len() as u32).to_le_bytes());
                body.extend_from_slice(s.as_bytes());
            }
        }
    }
    let mut out = Vec::with_capacity(body.len() + 56);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, params.ell(), params.level(), params.root_exponent()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&Sha256::digest(&body));
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| CacheError::Malformed(format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn parse_rat(s: &str) -> Result<Rat, CacheError> {
    let bad = || CacheError::Malformed(format!("bad rational {s:?}"));
    let (n, d) = s.split_once('/').ok_or_else(bad)?;
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

/// Decodes a cache image and seeds the memo of `alg`. A header written for
/// other parameters is refused.
pub fn decode_into(bytes: &[u8], alg: &Algebra) -> Result<usize, CacheError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8).map_err(|_| CacheError::BadMagic)? != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CacheError::Version { found: version });
    }
    let (ell, level, root) = (r.u32()?, r.u32()?, r.u32()?);
    let params = alg.params();
    if (ell, level, root) != (params.ell(), params.level(), params.root_exponent()) {
        return Err(CacheError::ParamsMismatch {
            expected: params,
            found: format!("(ℓ={ell}, N={level}, r={root})"),
        });
    }
    let hash = r.take(32)?.to_vec();
    let body = &bytes[r.pos..];
    if Sha256::digest(body).as_slice() != hash.as_slice() {
        return Err(CacheError::HashMismatch);
    }
    let field = alg.field();
    let degree = field.degree();
    let count = r.u64()?;
    let mut entries = Vec::new();
    for _ in 0..count {
        let (j, a, b) = (r.u32()?, r.u64()?, r.u64()?);
        let ell64 = params.ell() as u64;
        if j > params.level() || a >= ell64 || b >= ell64 {
            return Err(CacheError::Malformed(format!("key ({j}, {a}, {b}) out of range")));
        }
        let nterms = r.u32()?;
        let mut terms = Terms::new();
        for _ in 0..nterms {
            let m = Monomial::new(r.u64()?, r.u64()?, r.u64()?);
            alg.check_monomial(&m)?;
            let mut coeffs = Vec::with_capacity(degree);
            for _ in 0..degree {
                let len = r.u32()? as usize;
                let s = std::str::from_utf8(r.take(len)?).map_err(|e| CacheError::Malformed(e.to_string()))?;
                coeffs.push(parse_rat(s)?);
            }
            terms.insert(m, CycNum::from_x_coeffs(field, &coeffs));
        }
        entries.push(((j, a, b), AlgElement::from_terms(params, terms)));
    }
    if r.pos != bytes.len() {
        return Err(CacheError::Malformed("trailing bytes".into()));
    }
    let n = entries.len();
    alg.load_ef_memo(entries)?;
    Ok(n)
}

pub fn load(path: &Path, alg: &Algebra) -> Result<usize, CacheError> {
    decode_into(&fs::read(path)?, alg)
}

/// Writes through a temporary sibling file and renames it into place.
pub fn save(path: &Path, alg: &Algebra) -> Result<(), CacheError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode(alg))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(ell: u32, level: u32) -> Algebra {
        let alg = Algebra::new(AlgebraParams::new(ell, level, 1).unwrap()).unwrap();
        alg.fill_ef_memo();
        alg
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let alg = filled(3, 1);
        let bytes = encode(&alg);
        let fresh = Algebra::new(alg.params()).unwrap();
        assert_eq!(decode_into(&bytes, &fresh).unwrap(), alg.ef_memo_len());
        assert_eq!(fresh.ef_memo_entries(), alg.ef_memo_entries());
        assert_eq!(encode(&fresh), bytes);
    }

    #[test]
    fn wrong_parameters_are_refused() {
        let bytes = encode(&filled(3, 0));
        let other = Algebra::new(AlgebraParams::new(5, 0, 1).unwrap()).unwrap();
        assert!(matches!(decode_into(&bytes, &other), Err(CacheError::ParamsMismatch { .. })));
        let other = Algebra::new(AlgebraParams::new(3, 0, 2).unwrap()).unwrap();
        assert!(matches!(decode_into(&bytes, &other), Err(CacheError::ParamsMismatch { .. })));
        assert_eq!(other.ef_memo_len(), 0);
    }

    #[test]
    fn corruption_is_detected() {
        let alg = filled(3, 0);
        let mut bytes = encode(&alg);
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        let fresh = Algebra::new(alg.params()).unwrap();
        assert!(matches!(decode_into(&bytes, &fresh), Err(CacheError::HashMismatch)));
        assert!(matches!(decode_into(b"nonsense", &fresh), Err(CacheError::BadMagic)));
    }
}
