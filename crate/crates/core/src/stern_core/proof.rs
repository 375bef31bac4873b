//! Fiat–Shamir compilation of κ parallel rounds and the proof wire format.
//!
//! Layout: "ATSP" ‖ u16 version ‖ u8 relation ‖ u16 κ ‖ u32 L ‖ u32 |seed|, then per
//! round C1 ‖ C2 ‖ C3 ‖ challenge byte ‖ response. Responses pack {−1,0,1}
//! vectors at 2 bits per entry and Z_q vectors at the coefficient width.

use rand::Rng;
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use super::{
    stern_respond, stern_round_prove, stern_round_verify, Challenge, Commitment, RelationId,
    RelationInstance, SternCommitment, SternResponse, RHO_BYTES,
};
use crate::codec::{Reader, Writer};
use crate::decomp::{pack_trits, unpack_trits};
use crate::error::{Error, Result};
use crate::ring_arith::Ring;

const MAGIC: &[u8; 4] = b"ATSP";
const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 1 + 2 + 4 + 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NizkProof {
    pub relation: RelationId,
    pub witness_len: usize,
    pub seed_len: usize,
    pub rounds: Vec<(SternCommitment, SternResponse)>,
}

fn absorb_blob(h: &mut Shake256, b: &[u8]) {
    h.update(&(b.len() as u64).to_le_bytes());
    h.update(b);
}

/// κ challenges from SHAKE256 over the statement binding and all commitments.
pub fn fs_challenges(
    rel: &RelationInstance,
    msg: &[u8],
    ctx: &[u8],
    cmts: &[SternCommitment],
) -> Vec<Challenge> {
    let ring = rel.ring();
    let mut h = Shake256::default();
    h.update(b"ats/fs/v1");
    h.update(&[rel.id() as u8]);
    h.update(rel.binding());
    h.update(&(cmts.len() as u16).to_le_bytes());
    absorb_blob(&mut h, msg);
    absorb_blob(&mut h, ctx);
    let mut buf = Vec::with_capacity(cmts.len() * 3 * Commitment::encoded_len(&ring));
    for c in cmts {
        c.c1.encode(&ring, &mut buf);
        c.c2.encode(&ring, &mut buf);
        c.c3.encode(&ring, &mut buf);
    }
    h.update(&buf);
    let mut xof = h.finalize_xof();
    let mut out = Vec::with_capacity(cmts.len());
    let mut b = [0u8; 1];
    while out.len() < cmts.len() {
        xof.read(&mut b);
        if b[0] < 252 {
            out.push(Challenge::ALL[(b[0] % 3) as usize]);
        }
    }
    out
}

pub fn fs_prove<R: Rng + ?Sized>(
    rel: &RelationInstance,
    w: &[i32],
    msg: &[u8],
    ctx: &[u8],
    kappa: usize,
    rng: &mut R,
) -> Result<NizkProof> {
    let mut states = Vec::with_capacity(kappa);
    let mut cmts = Vec::with_capacity(kappa);
    for _ in 0..kappa {
        let (c, s) = stern_round_prove(rel, w, rng)?;
        cmts.push(c);
        states.push(s);
    }
    let chs = fs_challenges(rel, msg, ctx, &cmts);
    let rounds = cmts
        .into_iter()
        .zip(states.iter().zip(&chs))
        .map(|(c, (s, &ch))| (c, stern_respond(rel, s, ch)))
        .collect();
    Ok(NizkProof {
        relation: rel.id(),
        witness_len: rel.witness_len(),
        seed_len: rel.layout().seed_len(),
        rounds,
    })
}

pub fn fs_verify(
    rel: &RelationInstance,
    proof: &NizkProof,
    msg: &[u8],
    ctx: &[u8],
    kappa: usize,
) -> bool {
    if proof.relation != rel.id()
        || proof.rounds.len() != kappa
        || proof.witness_len != rel.witness_len()
        || proof.seed_len != rel.layout().seed_len()
    {
        return false;
    }
    let cmts: Vec<SternCommitment> = proof.rounds.iter().map(|(c, _)| c.clone()).collect();
    let chs = fs_challenges(rel, msg, ctx, &cmts);
    proof
        .rounds
        .iter()
        .zip(chs)
        .all(|((c, r), ch)| stern_round_verify(rel, c, ch, r))
}

impl NizkProof {
    pub fn kappa(&self) -> usize {
        self.rounds.len()
    }

    /// Exact byte length given the challenge sequence.
    pub fn encoded_len_for(ring: &Ring, l: usize, s: usize, chs: &[Challenge]) -> usize {
        let w = ring.coeff_bytes();
        let com = 3 * Commitment::encoded_len(ring);
        HEADER_LEN
            + chs
                .iter()
                .map(|ch| {
                    let packed = match ch {
                        Challenge::One => l.div_ceil(4),
                        _ => s.div_ceil(4),
                    };
                    com + 1 + packed + w * l + 2 * RHO_BYTES
                })
                .sum::<usize>()
    }

    pub fn encoded_len(&self, ring: &Ring) -> usize {
        let chs: Vec<Challenge> = self.rounds.iter().map(|(_, r)| r.challenge()).collect();
        Self::encoded_len_for(ring, self.witness_len, self.seed_len, &chs)
    }

    pub fn encode(&self, ring: &Ring) -> Vec<u8> {
        let mut w = Writer::with_capacity(self.encoded_len(ring));
        w.bytes(MAGIC);
        w.u16(VERSION);
        w.u8(self.relation as u8);
        w.u16(self.rounds.len() as u16);
        w.u32(self.witness_len as u32);
        w.u32(self.seed_len as u32);
        for (c, r) in &self.rounds {
            c.c1.encode(ring, w.buf_mut());
            c.c2.encode(ring, w.buf_mut());
            c.c3.encode(ring, w.buf_mut());
            w.u8(r.challenge() as u8);
            let (packed, v, ra, rb) = match r {
                SternResponse::One {
                    t_w,
                    t_r,
                    rho2,
                    rho3,
                } => (pack_trits(t_w), t_r, rho2, rho3),
                SternResponse::Two {
                    eta,
                    w2,
                    rho1,
                    rho3,
                } => (pack_trits(eta), w2, rho1, rho3),
                SternResponse::Three {
                    eta,
                    w3,
                    rho1,
                    rho2,
                } => (pack_trits(eta), w3, rho1, rho2),
            };
            w.bytes(&packed);
            ring.encode_zq(&mut w, v);
            w.bytes(ra);
            w.bytes(rb);
        }
        w.finish()
    }

    /// Parses a proof; dimensions are read from the header and bounded by `max_len`.
    pub fn decode(ring: &Ring, bytes: &[u8], max_len: usize) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            return Err(Error::Malformed("bad proof magic".into()));
        }
        let v = r.u16()?;
        if v != VERSION {
            return Err(Error::Malformed(format!("proof version {v}")));
        }
        let relation = RelationId::from_byte(r.u8()?)?;
        let kappa = r.u16()? as usize;
        let l = r.u32()? as usize;
        let s = r.u32()? as usize;
        if l > max_len || s > max_len {
            return Err(Error::Malformed("proof dimensions out of range".into()));
        }
        let mut rounds = Vec::with_capacity(kappa.min(256));
        for _ in 0..kappa {
            let c = SternCommitment {
                c1: Commitment::decode(ring, &mut r)?,
                c2: Commitment::decode(ring, &mut r)?,
                c3: Commitment::decode(ring, &mut r)?,
            };
            let ch = Challenge::from_byte(r.u8()?)?;
            let packed_len = if ch == Challenge::One { l } else { s };
            let trits = unpack_trits(r.take(packed_len.div_ceil(4))?, packed_len)?;
            let vec = ring.decode_zq(&mut r, l)?;
            let ra: [u8; RHO_BYTES] = r.array()?;
            let rb: [u8; RHO_BYTES] = r.array()?;
            let resp = match ch {
                Challenge::One => SternResponse::One {
                    t_w: trits,
                    t_r: vec,
                    rho2: ra,
                    rho3: rb,
                },
                Challenge::Two => SternResponse::Two {
                    eta: trits,
                    w2: vec,
                    rho1: ra,
                    rho3: rb,
                },
                Challenge::Three => SternResponse::Three {
                    eta: trits,
                    w3: vec,
                    rho1: ra,
                    rho2: rb,
                },
            };
            rounds.push((c, resp));
        }
        r.expect_end()?;
        Ok(Self {
            relation,
            witness_len: l,
            seed_len: s,
            rounds,
        })
    }
}
