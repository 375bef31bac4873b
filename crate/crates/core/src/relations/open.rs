//! Correct decryption of c₁ under the opener key: a₁·s₁ + e₁ = b₁ and
//! c₁,₂ − c₁,₁·s₁ = y + ⌊q/4⌋·rdec(p′).

use super::{audit, finish_witness, reject, Asm};
use crate::decomp::{b_sequence, rdec_b_tau, rdec_b_vec_tau};
use crate::error::{Error, Result};
use crate::koe::{scaled_message, KoeCiphertext, KoePublicKey};
use crate::layout::{Segment, Var, VarKind, WitnessLayout};
use crate::params::Params;
use crate::ring_arith::{vec_inf_norm, RingElem, RingVec};
use crate::stern_core::{RelationId, RelationInstance, WitnessVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenStatement {
    /// (a₁⁽¹⁾, b₁⁽¹⁾)
    pub pk: KoePublicKey,
    pub ct: KoeCiphertext,
    pub p: RingElem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenWitness {
    pub s1: RingElem,
    pub e1: RingVec,
    pub y: RingVec,
}

/// 3(nδ_B + nℓδ_B + nℓδ_{⌈q/10⌉})
pub fn open_length(p: &Params) -> usize {
    let (n, l, db) = (p.n, p.ell, p.delta_b());
    3 * (n * db + n * l * db + n * l * crate::params::delta(p.q_tenth()))
}

pub fn build_open_relation(p: &Params, st: &OpenStatement) -> Result<RelationInstance> {
    let ring = p.ring();
    let (n, l) = (p.n, p.ell);
    if st.pk.a.len() != l || st.pk.b.len() != l || st.ct.c1.len() != l || st.ct.c2.len() != l {
        return Err(Error::Shape(
            "opening statement has wrong dimensions".into(),
        ));
    }
    let bs = b_sequence(p.b)?;
    let by = b_sequence(p.q_tenth())?;
    let (sl, el) = (n * bs.delta(), n * l * bs.delta());
    let layout = WitnessLayout::new(
        vec![Var {
            kind: VarKind::Trits,
            len: sl + el + n * l * by.delta(),
        }],
        vec![Segment::Enc { z: 0 }],
    );
    audit(&layout, open_length(p), "opening relation");
    let lay = &layout;
    let col = |off: usize| move |i: usize| lay.col_enc(0, off + i);
    let nl = n * l;
    let mut asm = Asm::new(ring, 2 * nl, layout.len());
    for j in 0..l {
        asm.rot_h(
            j * n,
            std::slice::from_ref(&st.pk.a[j]),
            Some(&bs),
            1,
            col(0),
        );
        asm.rot_h(
            nl + j * n,
            std::slice::from_ref(&st.ct.c1[j]),
            Some(&bs),
            1,
            col(0),
        );
    }
    asm.h(0, nl, &bs, 1, col(sl));
    asm.h(nl, nl, &by, 1, col(sl + el));
    let mut u = ring.tau(&st.pk.b);
    u.extend(ring.tau(&ring.sub_vec(&st.ct.c2, &scaled_message(p, &st.p))));
    Ok(RelationInstance::new(
        p,
        RelationId::Open,
        asm.finish(),
        u,
        layout,
    ))
}

/// The noise term y = c₁,₂ − c₁,₁·s₁ − ⌊q/4⌋·rdec(p′).
pub fn open_noise(p: &Params, ct: &KoeCiphertext, s1: &RingElem, pv: &RingElem) -> RingVec {
    let ring = p.ring();
    ring.sub_vec(
        &ring.sub_vec(&ct.c2, &ring.scale_vec(s1, &ct.c1)),
        &scaled_message(p, pv),
    )
}

pub fn encode_open_witness(
    p: &Params,
    rel: &RelationInstance,
    st: &OpenStatement,
    w: &OpenWitness,
) -> Result<WitnessVec> {
    let ring = p.ring();
    if w.e1.len() != p.ell || w.y.len() != p.ell {
        return Err(reject("e1 and y must have length ell"));
    }
    if w.s1.inf_norm() > p.b || vec_inf_norm(&w.e1) > p.b {
        return Err(reject("s1 or e1 exceeds B"));
    }
    if vec_inf_norm(&w.y) > p.q_tenth() {
        return Err(reject("decryption noise exceeds ceil(q/10)"));
    }
    if ring.add_vec(&ring.scale_vec(&w.s1, &st.pk.a), &w.e1) != st.pk.b {
        return Err(reject("a1·s1 + e1 != b1"));
    }
    if open_noise(p, &st.ct, &w.s1, &st.p) != w.y {
        return Err(reject("c12 − c11·s1 != y + floor(q/4)·rdec(p')"));
    }
    let bs = b_sequence(p.b)?;
    let by = b_sequence(p.q_tenth())?;
    let mut v = rdec_b_tau(&w.s1, &bs)?;
    v.extend(rdec_b_vec_tau(&w.e1, &bs)?);
    v.extend(rdec_b_vec_tau(&w.y, &by)?);
    finish_witness(rel, &vec![v])
}
