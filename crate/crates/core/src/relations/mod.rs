//! The four statements compiled to (M, u, VALID) with their witness encoders.
//!
//! M is assembled sparse; columns that a block does not touch are simply absent.

mod ats;
mod dm;
mod open;
mod rlwe;

pub use ats::{
    ats_lengths, ats_message, build_ats_relation, encode_ats_witness, AtsStatement, AtsWitness,
};
pub use dm::{build_dm_relation, dm_lengths, encode_dm_witness, DmRelationWitness};
pub use open::{
    build_open_relation, encode_open_witness, open_length, open_noise, OpenStatement, OpenWitness,
};
pub use rlwe::{build_rlwe_relation, encode_rlwe_witness, rlwe_length, HiddenRlweWitness};

use crate::decomp::BSequence;
use crate::error::{Error, Result};
use crate::layout::{Assignment, WitnessLayout};
use crate::ring_arith::{Ring, RingElem, SparseBuilder, SparseMatQ};
use crate::stern_core::{RelationInstance, WitnessVec};

pub(crate) struct Asm {
    ring: Ring,
    b: SparseBuilder,
}

impl Asm {
    pub(crate) fn new(ring: Ring, rows: usize, cols: usize) -> Self {
        Self {
            ring,
            b: SparseBuilder::new(rows, cols, ring.q),
        }
    }

    /// sign·rot(a_1 | … | a_len)·H_{len,bs}; without `bs` the input is τ(·) itself.
    /// Input entry `idx` lives in column `col(idx)`.
    pub(crate) fn rot_h(
        &mut self,
        row0: usize,
        a: &[RingElem],
        bs: Option<&BSequence>,
        sign: i64,
        col: impl Fn(usize) -> usize,
    ) {
        let n = self.ring.n;
        let one = [1i64];
        let weights = bs.map_or(&one[..], |b| b.seq());
        let dl = weights.len();
        for (e, ae) in a.iter().enumerate() {
            let rm = self.ring.rot(ae);
            for c in 0..n {
                for (d, &w) in weights.iter().enumerate() {
                    let cc = col((e * n + c) * dl + d);
                    for r in 0..n {
                        let v = rm.get(r, c) as i64;
                        if v != 0 {
                            self.b.add(row0 + r, cc, sign * v * w);
                        }
                    }
                }
            }
        }
    }

    /// sign·H_{outputs,bs}: entry `rr·δ + d` feeds row `row0 + rr` with weight B_d.
    pub(crate) fn h(
        &mut self,
        row0: usize,
        outputs: usize,
        bs: &BSequence,
        sign: i64,
        col: impl Fn(usize) -> usize,
    ) {
        let dl = bs.delta();
        for rr in 0..outputs {
            for (d, &w) in bs.seq().iter().enumerate() {
                self.b.add(row0 + rr, col(rr * dl + d), sign * w);
            }
        }
    }

    /// s·I on `count` entries.
    pub(crate) fn scaled_id(
        &mut self,
        row0: usize,
        count: usize,
        s: i64,
        col: impl Fn(usize) -> usize,
    ) {
        for i in 0..count {
            self.b.add(row0 + i, col(i), s);
        }
    }

    /// Q_0 = [rot(X^j)·H·H_{ℓ,B}]_j acting on expd(a*, g*): column (j, kk, d) with
    /// kk = pos·ℓ + dd has one entry, B′_dd·B_d at row pos + j, negated on wrap.
    pub(crate) fn q0(
        &mut self,
        row0: usize,
        dec: &BSequence,
        bs: &BSequence,
        col: impl Fn(usize, usize, usize) -> usize,
    ) {
        let n = self.ring.n;
        let l = dec.delta();
        for j in 0..n {
            for kk in 0..n * l {
                let (pos, dd) = (kk / l, kk % l);
                let t = pos + j;
                let sign = if t >= n { -1 } else { 1 };
                for (d, &bd) in bs.seq().iter().enumerate() {
                    self.b
                        .add(row0 + t % n, col(j, kk, d), sign * dec.seq()[dd] * bd);
                }
            }
        }
    }

    pub(crate) fn finish(self) -> SparseMatQ {
        self.b.finish()
    }
}

/// Extends an assignment and checks the result against the instance (fail-closed).
pub(crate) fn finish_witness(rel: &RelationInstance, x: &Assignment) -> Result<WitnessVec> {
    let w: WitnessVec = rel.layout().extend(x)?.into_iter().map(i32::from).collect();
    if !rel.satisfies(&w) {
        return Err(Error::WitnessRejected(
            "encoded witness does not satisfy M·w = u".into(),
        ));
    }
    debug_assert!(rel.is_valid(&w));
    Ok(w)
}

pub(crate) fn audit(layout: &WitnessLayout, expect: usize, what: &str) {
    assert_eq!(
        layout.len(),
        expect,
        "{what}: constructed length differs from the dimension formula"
    );
}

pub(crate) fn reject(what: &str) -> Error {
    Error::WitnessRejected(what.to_string())
}
