//! The signing statement: certificate possession, B·x = p, and two encryptions of rdec(p).

use super::dm::{dm_lengths, dm_rows, dm_target, dm_trits, DmCols};
use super::{audit, finish_witness, reject, Asm};
use crate::decomp::{b_sequence, default_seq, rdec_b_vec_tau};
use crate::dm_signature::{DmSignature, DmVerifKey};
use crate::error::{Error, Result};
use crate::koe::{koe_enc, KoeCiphertext, KoePublicKey, KoeRandomizer};
use crate::layout::{Segment, Var, VarKind, WitnessLayout};
use crate::params::Params;
use crate::ring_arith::{vec_inf_norm, RingElem, RingVec};
use crate::stern_core::{RelationId, RelationInstance, WitnessVec};

/// Public input ξ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtsStatement {
    pub vk: DmVerifKey,
    pub bmat: RingVec,
    pub ct: [KoeCiphertext; 2],
}

/// Secret input ζ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtsWitness {
    pub p: RingElem,
    pub epk: [KoePublicKey; 2],
    pub sig: DmSignature,
    pub x: RingVec,
    pub rnd: [KoeRandomizer; 2],
}

/// The certified message (p ‖ a′₁ ‖ b′₁ ‖ a′₂ ‖ b′₂).
pub fn ats_message(p: &RingElem, epk: &[KoePublicKey; 2]) -> RingVec {
    let mut m = vec![p.clone()];
    for k in epk {
        m.extend(k.a.iter().cloned());
        m.extend(k.b.iter().cloned());
    }
    m
}

/// [L1, L2, L3, L4] with L2 = 3L′2, L3 = 12nℓ², L4 = 36n²ℓ²δ_B.
pub fn ats_lengths(p: &Params) -> [usize; 4] {
    let (n, l, db) = (p.n, p.ell, p.delta_b());
    let l2p = 2 * n * p.m_bar * p.delta_beta() + 2 * n * l + n * p.m + 4 * n * l * db;
    [
        dm_lengths(p).0,
        3 * l2p,
        12 * n * l * l,
        36 * n * n * l * l * db,
    ]
}

struct Offs {
    s: usize,
    r: usize,
    y: usize,
    p: usize,
    x: usize,
    /// e*_{1,1}, e*_{1,2}, e*_{2,1}, e*_{2,2}
    e: [usize; 4],
    len: usize,
}

fn offsets(p: &Params) -> Offs {
    let (n, l) = (p.n, p.ell);
    let sl = n * p.m_bar * p.delta_beta();
    let el = n * l * p.delta_b();
    let x = 2 * sl + 2 * n * l;
    let e0 = x + n * p.m;
    Offs {
        s: 0,
        r: sl,
        y: 2 * sl,
        p: 2 * sl + n * l,
        x,
        e: [e0, e0 + el, e0 + 2 * el, e0 + 3 * el],
        len: e0 + 4 * el,
    }
}

/// Variable index of a*_{i,j} (`b = false`) or b*_{i,j} (`b = true`), i ∈ {0, 1}.
fn key_var(l: usize, i: usize, b: bool, j: usize) -> usize {
    3 + (2 * i + b as usize) * l + j
}

fn layout(p: &Params) -> WitnessLayout {
    let (n, l) = (p.n, p.ell);
    let o = offsets(p);
    let mut vars = vec![
        Var {
            kind: VarKind::Bits,
            len: p.c_d(),
        },
        Var {
            kind: VarKind::Trits,
            len: n * p.k * p.delta_beta(),
        },
        Var {
            kind: VarKind::Trits,
            len: o.len,
        },
    ];
    vars.extend((0..4 * l).map(|_| Var {
        kind: VarKind::Trits,
        len: n * l,
    }));
    let g = [vars.len(), vars.len() + 1];
    vars.extend((0..2).map(|_| Var {
        kind: VarKind::Trits,
        len: n * p.delta_b(),
    }));
    let mut segs = vec![Segment::Mix { t: 0, z: 1 }, Segment::Enc { z: 2 }];
    segs.extend((0..4 * l).map(|v| Segment::Enc { z: 3 + v }));
    segs.extend((0..4 * l).map(|v| Segment::Mult {
        a: 3 + v,
        g: g[v / (2 * l)],
        outer: n,
    }));
    WitnessLayout::new(vars, segs)
}

fn enc_seg(var: usize) -> usize {
    var - 1
}

fn mult_seg(l: usize, var: usize) -> usize {
    2 + 4 * l + (var - 3)
}

pub fn build_ats_relation(p: &Params, st: &AtsStatement) -> Result<RelationInstance> {
    let ring = p.ring();
    let (n, l) = (p.n, p.ell);
    if st.bmat.len() != p.m || st.ct.iter().any(|c| c.c1.len() != l || c.c2.len() != l) {
        return Err(Error::Shape("public input has wrong dimensions".into()));
    }
    let layout = layout(p);
    audit(&layout, ats_lengths(p).iter().sum(), "ATS signing relation");
    let o = offsets(p);
    let nl = n * l;
    let rows = 3 * n + 4 * nl;
    let mut asm = Asm::new(ring, rows, layout.len());
    let lay = &layout;
    let w2 = |off: usize| move |i: usize| lay.col_enc(1, off + i);

    // τ(rdec m) = τ(rdec p) ‖ w̄3
    let msg_col = |i: usize| {
        if i < nl {
            layout.col_enc(1, o.p + i)
        } else {
            let v = 3 + (i - nl) / nl;
            layout.col_enc(enc_seg(v), (i - nl) % nl)
        }
    };
    dm_rows(
        &mut asm,
        p,
        &st.vk,
        &layout,
        0,
        &DmCols {
            w2_seg: 1,
            s: o.s,
            r: o.r,
            y: o.y,
            msg: &msg_col,
        },
    );

    let dseq = default_seq(&ring);
    let bs = b_sequence(p.b)?;
    asm.rot_h(2 * n, &st.bmat, None, 1, w2(o.x));
    asm.h(2 * n, n, &dseq, -1, w2(o.p));

    let mut u = dm_target(p, &st.vk);
    u.extend(std::iter::repeat(0).take(n));
    for i in 0..2 {
        for (half, b) in [false, true].into_iter().enumerate() {
            let row0 = 3 * n + (2 * i + half) * nl;
            for j in 0..l {
                let seg = mult_seg(l, key_var(l, i, b, j));
                asm.q0(row0 + j * n, &dseq, &bs, |jj, kk, d| {
                    layout.col_mult(seg, jj, kk, d)
                });
            }
            asm.h(row0, nl, &bs, 1, w2(o.e[2 * i + half]));
            if b {
                asm.scaled_id(row0, nl, p.q_quarter(), w2(o.p));
            }
        }
        u.extend(ring.tau(&st.ct[i].c1));
        u.extend(ring.tau(&st.ct[i].c2));
    }
    Ok(RelationInstance::new(
        p,
        RelationId::AtsSign,
        asm.finish(),
        u,
        layout,
    ))
}

/// Checks the three signing conditions and builds the extended witness.
pub fn encode_ats_witness(
    p: &Params,
    rel: &RelationInstance,
    st: &AtsStatement,
    w: &AtsWitness,
) -> Result<WitnessVec> {
    let ring = p.ring();
    let (n, l) = (p.n, p.ell);
    let msg = ats_message(&w.p, &w.epk);
    if msg.len() != p.m_s {
        return Err(reject("encryption keys have wrong length"));
    }
    let dm = dm_trits(p, &st.vk, &msg, &w.sig)
        .map_err(|_| reject("condition (i): certificate signature does not verify"))?;
    for i in 0..2 {
        match koe_enc(p, &w.epk[i], &w.p, &w.rnd[i]) {
            Ok(c) if c == st.ct[i] => {}
            _ => {
                return Err(reject(&format!(
                    "condition (ii): c_{} is not an encryption of rdec(p)",
                    i + 1
                )))
            }
        }
    }
    if w.x.len() != p.m || vec_inf_norm(&w.x) > 1 {
        return Err(reject("condition (iii): x must be ternary of length m"));
    }
    if ring.dot(&st.bmat, &w.x) != w.p {
        return Err(reject("condition (iii): B·x != p"));
    }
    let bs = b_sequence(p.b)?;
    let nl = n * l;
    let mut w2 = dm.s;
    w2.extend(dm.r);
    w2.extend(dm.y);
    w2.extend_from_slice(&dm.msg[..nl]);
    w2.extend(ring.tau(&w.x).into_iter().map(|c| c as i8));
    for r in &w.rnd {
        w2.extend(rdec_b_vec_tau(&r.e1, &bs)?);
        w2.extend(rdec_b_vec_tau(&r.e2, &bs)?);
    }
    let mut x = vec![dm.t, dm.z, w2];
    x.extend(dm.msg[nl..].chunks(nl).map(<[i8]>::to_vec));
    for r in &w.rnd {
        x.push(rdec_b_vec_tau(std::slice::from_ref(&r.g), &bs)?);
    }
    finish_witness(rel, &x)
}
