//! Possession of a DM signature on a hidden message.

use super::{audit, finish_witness, reject, Asm};
use crate::decomp::{b_sequence, default_seq, rdec_b_tau, rdec_b_vec_tau};
use crate::dm_signature::{dm_verify, DmSignature, DmVerifKey};
use crate::error::Result;
use crate::layout::{Segment, Var, VarKind, WitnessLayout};
use crate::params::Params;
use crate::ring_arith::{IntVecQ, RingVec};
use crate::stern_core::{RelationId, RelationInstance, WitnessVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmRelationWitness {
    pub m: RingVec,
    pub sig: DmSignature,
}

/// (L1, L2) = ((kδβ + 2c_d·kδβ)·3n, 6n·m̄·δβ + 3nℓ + 3n·m̄_s)
pub fn dm_lengths(p: &Params) -> (usize, usize) {
    let (n, k, db, cd) = (p.n, p.k, p.delta_beta(), p.c_d());
    (
        (k * db + 2 * cd * k * db) * 3 * n,
        6 * n * p.m_bar * db + 3 * n * p.ell + 3 * n * p.m_bar_s,
    )
}

/// Column positions of the DM blocks inside a larger layout. The mix segment is segment 0.
pub(crate) struct DmCols<'a> {
    pub w2_seg: usize,
    pub s: usize,
    pub r: usize,
    pub y: usize,
    /// Column of entry `i` of τ(rdec(m)).
    pub msg: &'a dyn Fn(usize) -> usize,
}

/// Rows [row0, row0 + 2n): the signature equation and the hashed-message equation.
pub(crate) fn dm_rows(
    asm: &mut Asm,
    p: &Params,
    vk: &DmVerifKey,
    layout: &WitnessLayout,
    row0: usize,
    c: &DmCols,
) {
    let ring = p.ring();
    let n = p.n;
    let bsb = b_sequence(p.beta).expect("beta >= 1");
    let enc = |off: usize| move |i: usize| layout.col_enc(c.w2_seg, off + i);

    asm.rot_h(row0, &vk.a_tags[0], Some(&bsb), 1, |i| layout.col_enc(0, i));
    for blk in 1..=p.d() {
        for j in p.tags[blk - 1]..p.tags[blk] {
            let shifted: RingVec = vk.a_tags[blk]
                .iter()
                .map(|a| ring.mul(a, &ring.monomial(j)))
                .collect();
            asm.rot_h(row0, &shifted, Some(&bsb), 1, |i| {
                layout.col_mix_prod(0, j, i)
            });
        }
    }
    asm.rot_h(row0, &vk.a, Some(&bsb), 1, enc(c.s));
    asm.rot_h(row0, &vk.f, None, -1, enc(c.y));

    asm.rot_h(row0 + n, &vk.f0, Some(&bsb), 1, enc(c.r));
    asm.rot_h(row0 + n, &vk.f1, None, 1, c.msg);
    asm.h(row0 + n, n, &default_seq(&ring), -1, enc(c.y));
}

pub(crate) fn dm_target(p: &Params, vk: &DmVerifKey) -> IntVecQ {
    let mut u = p.ring().tau(std::slice::from_ref(&vk.u));
    u.extend(std::iter::repeat(0).take(p.n));
    u
}

/// Decomposed pieces of a verified signature.
pub(crate) struct DmTrits {
    pub t: Vec<i8>,
    pub z: Vec<i8>,
    pub s: Vec<i8>,
    pub r: Vec<i8>,
    pub y: Vec<i8>,
    pub msg: Vec<i8>,
}

pub(crate) fn dm_trits(
    p: &Params,
    vk: &DmVerifKey,
    m: &[crate::RingElem],
    sig: &DmSignature,
) -> Result<DmTrits> {
    if !dm_verify(p, vk, m, sig) {
        return Err(reject("signature does not verify on the message"));
    }
    let ring = p.ring();
    let bsb = b_sequence(p.beta)?;
    let dseq = default_seq(&ring);
    let msg = rdec_b_vec_tau(m, &dseq)?;
    let y_ring = ring.add(
        &ring.dot(&vk.f0, &sig.r),
        &ring.dot(&vk.f1, &crate::decomp::trits_to_ring(&ring, &msg)),
    );
    let (s, z) = sig.v.split_at(p.m_bar);
    Ok(DmTrits {
        t: sig.t.bits().iter().map(|&b| b as i8).collect(),
        z: rdec_b_vec_tau(z, &bsb)?,
        s: rdec_b_vec_tau(s, &bsb)?,
        r: rdec_b_vec_tau(&sig.r, &bsb)?,
        y: rdec_b_tau(&y_ring, &dseq)?,
        msg,
    })
}

fn layout(p: &Params) -> WitnessLayout {
    let (n, db) = (p.n, p.delta_beta());
    let l2 = 2 * n * p.m_bar * db + n * p.ell + n * p.m_bar_s;
    WitnessLayout::new(
        vec![
            Var {
                kind: VarKind::Bits,
                len: p.c_d(),
            },
            Var {
                kind: VarKind::Trits,
                len: n * p.k * db,
            },
            Var {
                kind: VarKind::Trits,
                len: l2,
            },
        ],
        vec![Segment::Mix { t: 0, z: 1 }, Segment::Enc { z: 2 }],
    )
}

/// w2 = (s* ‖ r* ‖ τ(y) ‖ τ(rdec m)).
fn offsets(p: &Params) -> (usize, usize, usize, usize) {
    let sl = p.n * p.m_bar * p.delta_beta();
    (0, sl, 2 * sl, 2 * sl + p.n * p.ell)
}

pub fn build_dm_relation(p: &Params, vk: &DmVerifKey) -> RelationInstance {
    let layout = layout(p);
    let (l1, l2) = dm_lengths(p);
    audit(&layout, l1 + l2, "DM relation");
    let (s, r, y, msg) = offsets(p);
    let mut asm = Asm::new(p.ring(), 2 * p.n, layout.len());
    let msg_col = |i: usize| layout.col_enc(1, msg + i);
    dm_rows(
        &mut asm,
        p,
        vk,
        &layout,
        0,
        &DmCols {
            w2_seg: 1,
            s,
            r,
            y,
            msg: &msg_col,
        },
    );
    let m = asm.finish();
    RelationInstance::new(p, RelationId::Dm, m, dm_target(p, vk), layout)
}

pub fn encode_dm_witness(
    p: &Params,
    vk: &DmVerifKey,
    rel: &RelationInstance,
    w: &DmRelationWitness,
) -> Result<WitnessVec> {
    let t = dm_trits(p, vk, &w.m, &w.sig)?;
    let mut w2 = t.s;
    w2.extend(t.r);
    w2.extend(t.y);
    w2.extend(t.msg);
    finish_witness(rel, &vec![t.t, t.z, w2])
}
