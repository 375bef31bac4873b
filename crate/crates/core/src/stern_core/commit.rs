//! SIS-style string commitment over Z_q.
//!
//! COM(payload; ρ) = B1·ρ + B2·bits(BLAKE3(payload)) mod q. The payload is
//! compressed before the linear map; B1 and B2 are expanded from the
//! parameter digest with SHAKE256.

use rand::Rng;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::codec::Reader;
use crate::error::Result;
use crate::ring_arith::{reduce, Ring};

/// Rows of the commitment matrices.
pub const COM_ROWS: usize = 16;
/// Bits of commitment randomness.
pub const RHO_BITS: usize = 512;
pub const RHO_BYTES: usize = RHO_BITS / 8;
const MSG_BITS: usize = 256;

pub type ComRandomness = [u8; RHO_BYTES];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Commitment(pub [i32; COM_ROWS]);

#[derive(Debug, Clone)]
pub struct CommitKey {
    ring: Ring,
    /// Column-major: column i occupies [i·COM_ROWS, (i+1)·COM_ROWS).
    b1: Vec<i32>,
    b2: Vec<i32>,
}

fn expand_uniform(xof: &mut impl XofReader, q: i64, count: usize) -> Vec<i32> {
    let limit = (u32::MAX as u64 + 1) / q as u64 * q as u64;
    let mut out = Vec::with_capacity(count);
    let mut buf = [0u8; 4];
    while out.len() < count {
        xof.read(&mut buf);
        let v = u32::from_le_bytes(buf) as u64;
        if v < limit {
            out.push(reduce((v % q as u64) as i64, q));
        }
    }
    out
}

impl CommitKey {
    pub fn derive(ring: Ring, params_digest: &[u8; 32]) -> Self {
        let mut h = Shake256::default();
        h.update(b"ats/com/v1");
        h.update(params_digest);
        let mut xof = h.finalize_xof();
        let b1 = expand_uniform(&mut xof, ring.q, COM_ROWS * RHO_BITS);
        let b2 = expand_uniform(&mut xof, ring.q, COM_ROWS * MSG_BITS);
        Self { ring, b1, b2 }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    fn accumulate(acc: &mut [i64; COM_ROWS], mat: &[i32], bytes: &[u8]) {
        for (i, col) in mat.chunks(COM_ROWS).enumerate() {
            if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                for (a, &c) in acc.iter_mut().zip(col) {
                    *a += c as i64;
                }
            }
        }
    }

    /// Commitment to an already compressed payload.
    pub fn commit_digest(&self, digest: &[u8; 32], rho: &ComRandomness) -> Commitment {
        let mut acc = [0i64; COM_ROWS];
        Self::accumulate(&mut acc, &self.b1, rho);
        Self::accumulate(&mut acc, &self.b2, digest);
        Commitment(acc.map(|x| reduce(x, self.ring.q)))
    }

    pub fn commit(&self, payload: &[u8], rho: &ComRandomness) -> Commitment {
        let mut h = PayloadHasher::new();
        h.bytes(payload);
        self.commit_digest(&h.finish(), rho)
    }

    pub fn sample_rho<R: Rng + ?Sized>(rng: &mut R) -> ComRandomness {
        let mut r = [0u8; RHO_BYTES];
        rng.fill(&mut r[..]);
        r
    }
}

/// Streams a commitment payload into the compression hash.
pub struct PayloadHasher {
    h: blake3::Hasher,
    buf: Vec<u8>,
}

impl Default for PayloadHasher {
    fn default() -> Self {
        Self::new()
    }
}

impl PayloadHasher {
    pub fn new() -> Self {
        Self {
            h: blake3::Hasher::new_derive_key("ats com-payload v1"),
            buf: Vec::new(),
        }
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.h.update(b);
    }

    /// Canonical Z_q encoding of `v`.
    pub fn zq(&mut self, ring: &Ring, v: &[i32]) {
        const CHUNK: usize = 1 << 14;
        let w = ring.coeff_bytes();
        self.buf.resize(CHUNK * w, 0);
        for part in v.chunks(CHUNK) {
            let out = &mut self.buf[..part.len() * w];
            ring.write_coeffs(out, part);
            self.h.update(out);
        }
    }

    pub fn finish(self) -> [u8; 32] {
        self.h.finalize().into()
    }
}

impl Commitment {
    pub fn encode(&self, ring: &Ring, out: &mut Vec<u8>) {
        for &c in &self.0 {
            ring.put_coeff(out, c);
        }
    }

    pub fn decode(ring: &Ring, r: &mut Reader) -> Result<Self> {
        let mut c = [0i32; COM_ROWS];
        for x in c.iter_mut() {
            *x = ring.get_coeff(r)?;
        }
        Ok(Self(c))
    }

    pub fn encoded_len(ring: &Ring) -> usize {
        COM_ROWS * ring.coeff_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    fn key() -> CommitKey {
        let p = Params::desk();
        CommitKey::derive(p.ring(), &p.digest())
    }

    #[test]
    fn deterministic() {
        let k = key();
        let rho = [7u8; RHO_BYTES];
        assert_eq!(k.commit(b"abc", &rho), k.commit(b"abc", &rho));
        assert_ne!(k.commit(b"abc", &rho), k.commit(b"abd", &rho));
        let k2 = key();
        assert_eq!(k.b1, k2.b1);
    }

    #[test]
    fn randomness_changes_digest() {
        let k = key();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            let rho = CommitKey::sample_rho(&mut rng);
            assert!(seen.insert(k.commit(b"fixed payload", &rho)));
        }
    }

    #[test]
    fn constant_length() {
        let k = key();
        let r = k.ring();
        let rho = [1u8; RHO_BYTES];
        for len in [0usize, 1, 1000, 1 << 20] {
            let mut out = Vec::new();
            k.commit(&vec![5u8; len], &rho).encode(&r, &mut out);
            assert_eq!(out.len(), Commitment::encoded_len(&r));
        }
    }

    #[test]
    fn streamed_payload_matches_bytes() {
        let k = key();
        let r = k.ring();
        let v: Vec<i32> = (-5000..5000).collect();
        let mut bytes = Vec::new();
        for &c in &v {
            r.put_coeff(&mut bytes, c);
        }
        let mut h = PayloadHasher::new();
        h.zq(&r, &v);
        let rho = [3u8; RHO_BYTES];
        assert_eq!(k.commit_digest(&h.finish(), &rho), k.commit(&bytes, &rho));
    }
}
