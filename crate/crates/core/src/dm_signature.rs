//! Stateful Ducas–Micciancio style signatures with a base-3 gadget trapdoor.
//!
//! Preimages are exact but not Gaussian: the gadget system is solved by
//! balanced-ternary digits and shifted by a ternary perturbation.

use rand::Rng;

use crate::codec::{Reader, Writer};
use crate::decomp::rdec_vec;
use crate::error::{Error, Result};
use crate::params::Params;
use crate::ring_arith::{vec_inf_norm, RingElem, RingVec};

const PREIMAGE_ATTEMPTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmVerifKey {
    /// [Ā | G − Ā·R], length m̄.
    pub a: RingVec,
    /// A_[0], ..., A_[d], each of length k.
    pub a_tags: Vec<RingVec>,
    pub f: RingVec,
    pub f0: RingVec,
    pub f1: RingVec,
    pub u: RingElem,
}

/// Ternary trapdoor R (m rows of k ring elements).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmSignKey {
    pub r: Vec<RingVec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tag {
    bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmSignature {
    pub t: Tag,
    pub r: RingVec,
    pub v: RingVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignerState {
    pub s: u64,
}

impl Tag {
    pub fn from_bits(params: &Params, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != params.c_d() || bits.iter().any(|&b| b > 1) {
            return Err(Error::Domain(format!("tag must be {} bits", params.c_d())));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn state(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .map(|(j, &b)| (b as u64) << j)
            .sum()
    }

    /// t_[i](X) = Σ_{c_{i−1} ≤ j < c_i} t_j X^j for 1 ≤ i ≤ d.
    pub fn block_elem(&self, params: &Params, i: usize) -> RingElem {
        let r = params.ring();
        let mut acc = r.zero();
        for j in params.tags[i - 1]..params.tags[i] {
            if self.bits[j] == 1 {
                acc = r.add(&acc, &r.monomial(j));
            }
        }
        acc
    }

    pub fn encode(&self, w: &mut Writer) {
        w.u64(self.state());
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        let s = r.u64()?;
        tag_from_state(params, s).map_err(|_| Error::Malformed(format!("tag state {s} too large")))
    }
}

/// Little-endian bit expansion of the signer state.
pub fn tag_from_state(params: &Params, s: u64) -> Result<Tag> {
    let cd = params.c_d();
    if cd < 64 && s >> cd != 0 {
        return Err(Error::StateExhausted(1u64 << cd));
    }
    Ok(Tag {
        bits: (0..cd).map(|j| ((s >> j) & 1) as u8).collect(),
    })
}

fn ternary_vec<R: Rng + ?Sized>(params: &Params, rng: &mut R, len: usize) -> RingVec {
    params.ring().sample_chi_vec(rng, 1, len)
}

pub fn dm_keygen<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> (DmVerifKey, DmSignKey) {
    let ring = params.ring();
    let a_bar = ring.sample_uniform_vec(rng, params.m);
    let r: Vec<RingVec> = (0..params.m)
        .map(|_| ternary_vec(params, rng, params.k))
        .collect();
    let mut a = a_bar.clone();
    for j in 0..params.k {
        let col: RingVec = r.iter().map(|row| row[j].clone()).collect();
        let g = ring.scale(&ring.one(), 3i64.pow(j as u32));
        a.push(ring.sub(&g, &ring.dot(&a_bar, &col)));
    }
    let vk = DmVerifKey {
        a,
        a_tags: (0..=params.d())
            .map(|_| ring.sample_uniform_vec(rng, params.k))
            .collect(),
        f: ring.sample_uniform_vec(rng, params.ell),
        f0: ring.sample_uniform_vec(rng, params.m_bar),
        f1: ring.sample_uniform_vec(rng, params.m_bar_s),
        u: ring.sample_uniform(rng),
    };
    (vk, DmSignKey { r })
}

/// A_[0] + Σ t_[i]·A_[i]
pub fn tag_block(params: &Params, vk: &DmVerifKey, tag: &Tag) -> RingVec {
    let ring = params.ring();
    let mut acc = vk.a_tags[0].clone();
    for i in 1..=params.d() {
        let ti = tag.block_elem(params, i);
        acc = ring.add_vec(&acc, &ring.scale_vec(&ti, &vk.a_tags[i]));
    }
    acc
}

/// A_t·v with A_t = [A | A_[0] + Σ t_[i]·A_[i]].
pub fn eval_at(params: &Params, vk: &DmVerifKey, tag: &Tag, v: &[RingElem]) -> RingElem {
    let ring = params.ring();
    let (s, z) = v.split_at(params.m_bar);
    ring.add(
        &ring.dot(&vk.a, s),
        &ring.dot(&tag_block(params, vk, tag), z),
    )
}

/// u_p = F·rdec(F0·r + F1·rdec(m)) + u
pub fn signed_target(params: &Params, vk: &DmVerifKey, m: &[RingElem], r: &[RingElem]) -> RingElem {
    let ring = params.ring();
    let y = ring.add(&ring.dot(&vk.f0, r), &ring.dot(&vk.f1, &rdec_vec(&ring, m)));
    ring.add(&ring.dot(&vk.f, &rdec_vec(&ring, &[y])), &vk.u)
}

/// Balanced-ternary digits: returns x_0..x_{k−1} with Σ 3^j x_j = a exactly.
pub fn gadget_invert(params: &Params, a: &RingElem) -> RingVec {
    let ring = params.ring();
    let mut digits = vec![vec![0i64; params.n]; params.k];
    for (i, &c) in a.coeffs().iter().enumerate() {
        let mut v = c as i64;
        for row in digits.iter_mut() {
            let mut d = v.rem_euclid(3);
            if d == 2 {
                d = -1;
            }
            row[i] = d;
            v = (v - d) / 3;
        }
        debug_assert_eq!(v, 0);
    }
    digits.iter().map(|d| ring.elem(d).unwrap()).collect()
}

/// v with A_t·v = target and ‖v‖∞ ≤ β.
pub fn preimage_sample<R: Rng + ?Sized>(
    params: &Params,
    vk: &DmVerifKey,
    sk: &DmSignKey,
    tag: &Tag,
    target: &RingElem,
    rng: &mut R,
) -> Result<RingVec> {
    let ring = params.ring();
    let at = tag_block(params, vk, tag);
    for _ in 0..PREIMAGE_ATTEMPTS {
        let p1 = ternary_vec(params, rng, params.m);
        let p2 = ternary_vec(params, rng, params.k);
        let z = ternary_vec(params, rng, params.k);
        let (a_bar, a_gad) = vk.a.split_at(params.m);
        let shifted = ring.sub(
            target,
            &ring.add(
                &ring.add(&ring.dot(a_bar, &p1), &ring.dot(a_gad, &p2)),
                &ring.dot(&at, &z),
            ),
        );
        let x = gadget_invert(params, &shifted);
        let mut v: RingVec = p1
            .iter()
            .zip(&sk.r)
            .map(|(p, row)| ring.add(p, &ring.dot(row, &x)))
            .collect();
        v.extend(p2.iter().zip(&x).map(|(p, xi)| ring.add(p, xi)));
        v.extend(z);
        if vec_inf_norm(&v) <= params.beta {
            debug_assert_eq!(&eval_at(params, vk, tag, &v), target);
            return Ok(v);
        }
    }
    Err(Error::SamplingFailed(PREIMAGE_ATTEMPTS))
}

pub fn dm_sign<R: Rng + ?Sized>(
    params: &Params,
    vk: &DmVerifKey,
    sk: &DmSignKey,
    state: &mut SignerState,
    m: &[RingElem],
    rng: &mut R,
) -> Result<DmSignature> {
    if m.len() != params.m_s {
        return Err(Error::Shape(format!(
            "message must have {} ring elements, got {}",
            params.m_s,
            m.len()
        )));
    }
    let tag = tag_from_state(params, state.s)?;
    let r = params.ring().sample_chi_vec(rng, params.beta, params.m_bar);
    let target = signed_target(params, vk, m, &r);
    let v = preimage_sample(params, vk, sk, &tag, &target, rng)?;
    state.s += 1;
    Ok(DmSignature { t: tag, r, v })
}

pub fn dm_verify(params: &Params, vk: &DmVerifKey, m: &[RingElem], sig: &DmSignature) -> bool {
    if m.len() != params.m_s
        || sig.r.len() != params.m_bar
        || sig.v.len() != params.m_bar + params.k
        || sig.t.bits.len() != params.c_d()
    {
        return false;
    }
    if vec_inf_norm(&sig.r) > params.beta || vec_inf_norm(&sig.v) > params.beta {
        return false;
    }
    eval_at(params, vk, &sig.t, &sig.v) == signed_target(params, vk, m, &sig.r)
}

impl DmVerifKey {
    pub fn encode(&self, params: &Params, w: &mut Writer) {
        let ring = params.ring();
        ring.encode_vec(w, &self.a);
        for blk in &self.a_tags {
            ring.encode_vec(w, blk);
        }
        ring.encode_vec(w, &self.f);
        ring.encode_vec(w, &self.f0);
        ring.encode_vec(w, &self.f1);
        ring.encode_elem(w, &self.u);
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        let ring = params.ring();
        Ok(Self {
            a: ring.decode_vec(r, params.m_bar)?,
            a_tags: (0..=params.d())
                .map(|_| ring.decode_vec(r, params.k))
                .collect::<Result<_>>()?,
            f: ring.decode_vec(r, params.ell)?,
            f0: ring.decode_vec(r, params.m_bar)?,
            f1: ring.decode_vec(r, params.m_bar_s)?,
            u: ring.decode_elem(r)?,
        })
    }
}

impl DmSignKey {
    pub fn encode(&self, params: &Params, w: &mut Writer) {
        for row in &self.r {
            params.ring().encode_vec(w, row);
        }
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        let rows: Vec<RingVec> = (0..params.m)
            .map(|_| params.ring().decode_vec(r, params.k))
            .collect::<Result<_>>()?;
        if rows.iter().any(|row| vec_inf_norm(row) > 1) {
            return Err(Error::Malformed("trapdoor entries must be ternary".into()));
        }
        Ok(Self { r: rows })
    }
}

impl DmSignature {
    pub fn encode(&self, params: &Params, w: &mut Writer) {
        self.t.encode(w);
        params.ring().encode_vec(w, &self.r);
        params.ring().encode_vec(w, &self.v);
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        Ok(Self {
            t: Tag::decode(params, r)?,
            r: params.ring().decode_vec(r, params.m_bar)?,
            v: params.ring().decode_vec(r, params.m_bar + params.k)?,
        })
    }
}
