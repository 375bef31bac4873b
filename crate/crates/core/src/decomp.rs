//! Ternary decomposition of bounded integers and ring elements, and the
//! reconstruction operators H_B / H_{m,B}.

use crate::error::{Error, Result};
use crate::params::delta;
use crate::ring_arith::{reduce, IntMatQ, IntVecQ, Ring, RingElem, RingVec};

/// Vector with entries in {−1, 0, 1}.
pub type TernaryVec = Vec<i8>;

/// (B_1, ..., B_δ) with B_j = ⌊(B + 2^{j−1}) / 2^j⌋.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BSequence {
    bound: i64,
    seq: Vec<i64>,
}

pub fn b_sequence(bound: i64) -> Result<BSequence> {
    if bound < 1 {
        return Err(Error::Domain(format!(
            "decomposition bound must be positive, got {bound}"
        )));
    }
    let seq = (1..=delta(bound) as u32)
        .map(|j| (bound + (1i64 << (j - 1))) >> j)
        .collect();
    Ok(BSequence { bound, seq })
}

impl BSequence {
    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn delta(&self) -> usize {
        self.seq.len()
    }

    pub fn seq(&self) -> &[i64] {
        &self.seq
    }
}

/// Greedy binary decomposition of 0 ≤ a ≤ B against the B-sequence.
pub fn idec(bs: &BSequence, a: i64) -> Result<TernaryVec> {
    if a < 0 || a > bs.bound {
        return Err(Error::Domain(format!(
            "idec input {a} outside [0, {}]",
            bs.bound
        )));
    }
    let mut rest = a;
    Ok(bs
        .seq
        .iter()
        .map(|&bj| {
            if rest >= bj {
                rest -= bj;
                1
            } else {
                0
            }
        })
        .collect())
}

/// τ(rdec_B(a)): one signed block of δ_B digits per coefficient, coefficient-major.
pub fn rdec_b_tau(a: &RingElem, bs: &BSequence) -> Result<TernaryVec> {
    let mut out = Vec::with_capacity(a.coeffs().len() * bs.delta());
    for &c in a.coeffs() {
        let c = c as i64;
        let sign = c.signum() as i8;
        out.extend(idec(bs, c.abs())?.into_iter().map(|d| d * sign));
    }
    Ok(out)
}

/// τ(rdec_B(v)) for a ring vector: blocks concatenated in order.
pub fn rdec_b_vec_tau(v: &[RingElem], bs: &BSequence) -> Result<TernaryVec> {
    let mut out = Vec::new();
    for a in v {
        out.extend(rdec_b_tau(a, bs)?);
    }
    Ok(out)
}

/// rdec_B(a) as δ_B ring elements with ternary coefficients.
pub fn rdec_b(ring: &Ring, a: &RingElem, bs: &BSequence) -> Result<RingVec> {
    let t = rdec_b_tau(a, bs)?;
    Ok(trits_to_ring(ring, &t))
}

/// The default decomposition at bound (q−1)/2; total on R_q.
pub fn rdec(ring: &Ring, a: &RingElem) -> RingVec {
    rdec_b(ring, a, &default_seq(ring)).expect("every centered element is (q-1)/2-bounded")
}

pub fn rdec_vec(ring: &Ring, v: &[RingElem]) -> RingVec {
    v.iter().flat_map(|a| rdec(ring, a)).collect()
}

pub fn default_seq(ring: &Ring) -> BSequence {
    b_sequence(ring.half()).expect("q >= 3")
}

pub fn trits_to_ring(ring: &Ring, t: &[i8]) -> RingVec {
    assert_eq!(t.len() % ring.n, 0);
    t.chunks(ring.n)
        .map(|c| {
            ring.elem(&c.iter().map(|&x| x as i64).collect::<Vec<_>>())
                .unwrap()
        })
        .collect()
}

/// H_{m,B}·w: blockwise weighted sums, never materialized.
pub fn apply_h(bs: &BSequence, w: &[i32], q: i64) -> Result<IntVecQ> {
    let d = bs.delta();
    if w.len() % d != 0 {
        return Err(Error::Shape(format!(
            "length {} is not a multiple of delta = {d}",
            w.len()
        )));
    }
    Ok(w.chunks(d)
        .map(|blk| {
            reduce(
                blk.iter().zip(&bs.seq).map(|(&x, &b)| x as i64 * b).sum(),
                q,
            )
        })
        .collect())
}

/// Dense H_{m,B} (rows n·m, columns n·m·δ); test oracle only.
pub fn dense_h(bs: &BSequence, n: usize, m: usize, q: i64) -> IntMatQ {
    let d = bs.delta();
    let mut h = IntMatQ::zeros(n * m, n * m * d, q);
    for r in 0..n * m {
        for (j, &b) in bs.seq.iter().enumerate() {
            h.set(r, r * d + j, b);
        }
    }
    h
}

/// Packs trits as 2-bit codes (00 = 0, 01 = 1, 11 = −1), four per byte, low bits first.
pub fn pack_trits(t: &[i8]) -> Vec<u8> {
    let mut out = vec![0u8; t.len().div_ceil(4)];
    for (i, &x) in t.iter().enumerate() {
        let code = match x {
            0 => 0b00,
            1 => 0b01,
            -1 => 0b11,
            _ => panic!("pack_trits on non-ternary entry {x}"),
        };
        out[i / 4] |= code << (2 * (i % 4));
    }
    out
}

pub fn unpack_trits(bytes: &[u8], len: usize) -> Result<TernaryVec> {
    if bytes.len() != len.div_ceil(4) {
        return Err(Error::Malformed(format!(
            "{} bytes cannot hold exactly {len} trits",
            bytes.len()
        )));
    }
    let mut out = Vec::with_capacity(len);
    for i in 0..len {
        out.push(match (bytes[i / 4] >> (2 * (i % 4))) & 3 {
            0b00 => 0,
            0b01 => 1,
            0b11 => -1,
            _ => return Err(Error::Malformed("invalid trit code 10".into())),
        });
    }
    // padding bits must be zero
    if len % 4 != 0 && bytes[len / 4] >> (2 * (len % 4)) != 0 {
        return Err(Error::Malformed("nonzero trit padding".into()));
    }
    Ok(out)
}
