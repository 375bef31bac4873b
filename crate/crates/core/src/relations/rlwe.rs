//! c = a·g + e with a, g and e all hidden.

use super::{audit, finish_witness, reject, Asm};
use crate::decomp::{b_sequence, default_seq, rdec_b_tau, rdec_b_vec_tau};
use crate::error::Result;
use crate::layout::{Segment, Var, VarKind, WitnessLayout};
use crate::params::Params;
use crate::ring_arith::{vec_inf_norm, RingElem, RingVec};
use crate::stern_core::{RelationId, RelationInstance, WitnessVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HiddenRlweWitness {
    pub a: RingVec,
    pub g: RingElem,
    pub e: RingVec,
}

/// 9n²ℓ²δ_B + 3nℓδ_B
pub fn rlwe_length(p: &Params) -> usize {
    let (n, l, db) = (p.n, p.ell, p.delta_b());
    9 * n * n * l * l * db + 3 * n * l * db
}

fn layout(p: &Params) -> WitnessLayout {
    let (n, l, db) = (p.n, p.ell, p.delta_b());
    let mut vars: Vec<Var> = (0..l)
        .map(|_| Var {
            kind: VarKind::Trits,
            len: n * l,
        })
        .collect();
    vars.push(Var {
        kind: VarKind::Trits,
        len: n * db,
    });
    vars.push(Var {
        kind: VarKind::Trits,
        len: n * l * db,
    });
    let mut segs: Vec<Segment> = (0..l)
        .map(|i| Segment::Mult {
            a: i,
            g: l,
            outer: n,
        })
        .collect();
    segs.push(Segment::Enc { z: l + 1 });
    WitnessLayout::new(vars, segs)
}

pub fn build_rlwe_relation(p: &Params, c: &[RingElem]) -> Result<RelationInstance> {
    if c.len() != p.ell {
        return Err(crate::Error::Shape(format!(
            "c must have {} ring elements",
            p.ell
        )));
    }
    let ring = p.ring();
    let (n, l) = (p.n, p.ell);
    let layout = layout(p);
    audit(&layout, rlwe_length(p), "hidden-key RLWE relation");
    let bs = b_sequence(p.b)?;
    let dseq = default_seq(&ring);
    let mut asm = Asm::new(ring, n * l, layout.len());
    for i in 0..l {
        asm.q0(i * n, &dseq, &bs, |j, kk, d| layout.col_mult(i, j, kk, d));
    }
    asm.h(0, n * l, &bs, 1, |x| layout.col_enc(l, x));
    Ok(RelationInstance::new(
        p,
        RelationId::Rlwe,
        asm.finish(),
        ring.tau(c),
        layout,
    ))
}

pub fn encode_rlwe_witness(
    p: &Params,
    rel: &RelationInstance,
    c: &[RingElem],
    w: &HiddenRlweWitness,
) -> Result<WitnessVec> {
    let ring = p.ring();
    if w.a.len() != p.ell || w.e.len() != p.ell {
        return Err(reject("a and e must have length ell"));
    }
    if w.g.inf_norm() > p.b || vec_inf_norm(&w.e) > p.b {
        return Err(reject("g or e exceeds the noise bound B"));
    }
    if ring.add_vec(&ring.scale_vec(&w.g, &w.a), &w.e) != c {
        return Err(reject("c != a·g + e"));
    }
    let bs = b_sequence(p.b)?;
    let dseq = default_seq(&ring);
    let mut x: Vec<Vec<i8>> =
        w.a.iter()
            .map(|ai| rdec_b_tau(ai, &dseq))
            .collect::<Result<_>>()?;
    x.push(rdec_b_tau(&w.g, &bs)?);
    x.push(rdec_b_vec_tau(&w.e, &bs)?);
    finish_witness(rel, &x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample(p: &Params, rng: &mut ChaCha20Rng) -> (RingVec, HiddenRlweWitness) {
        let r = p.ring();
        let a = r.sample_uniform_vec(rng, p.ell);
        let g = r.sample_chi(rng, p.b);
        let e = r.sample_chi_vec(rng, p.b, p.ell);
        let c = r.add_vec(&r.scale_vec(&g, &a), &e);
        (c, HiddenRlweWitness { a, g, e })
    }

    #[test]
    fn length_formula() {
        let p = Params::desk();
        assert_eq!(rlwe_length(&p), 9 * 64 * 196 * 2 + 3 * 8 * 14 * 2);
        let (c, _) = sample(&p, &mut ChaCha20Rng::seed_from_u64(0));
        assert_eq!(
            build_rlwe_relation(&p, &c).unwrap().witness_len(),
            rlwe_length(&p)
        );
    }

    #[test]
    fn honest_witness_satisfies() {
        let p = Params::desk();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..5 {
            let (c, w) = sample(&p, &mut rng);
            let rel = build_rlwe_relation(&p, &c).unwrap();
            let enc = encode_rlwe_witness(&p, &rel, &c, &w).unwrap();
            assert!(rel.is_valid(&enc));
        }
    }

    /// With e = 0 and g = g_j·X^j, the Q-part alone must reproduce τ(a·g).
    #[test]
    fn single_coefficient_g_matches_ring_mul() {
        let p = Params::desk();
        let r = p.ring();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for j in 0..p.n {
            let a = r.sample_uniform_vec(&mut rng, p.ell);
            let g = r.scale(&r.monomial(j), if j % 2 == 0 { 2 } else { -1 });
            let e = r.zeros(p.ell);
            let c: RingVec = a.iter().map(|ai| r.mul(ai, &g)).collect();
            let rel = build_rlwe_relation(&p, &c).unwrap();
            let w = encode_rlwe_witness(&p, &rel, &c, &HiddenRlweWitness { a, g, e }).unwrap();
            assert_eq!(rel.matrix().mul_vec(&w), r.tau(&c));
        }
    }

    #[test]
    fn wrong_noise_refused() {
        let p = Params::desk();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (c, mut w) = sample(&p, &mut rng);
        w.e[0] = p.ring().scale(&p.ring().one(), p.b + 1);
        let rel = build_rlwe_relation(&p, &c).unwrap();
        assert!(encode_rlwe_witness(&p, &rel, &c, &w).is_err());
    }

    #[test]
    fn valid_closed_under_permutations() {
        let p = Params::desk();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (c, w) = sample(&p, &mut rng);
        let rel = build_rlwe_relation(&p, &c).unwrap();
        let enc = encode_rlwe_witness(&p, &rel, &c, &w).unwrap();
        for _ in 0..100 {
            let seed = rel.layout().sample_seed(&mut rng);
            let perm = rel.layout().permutation(&seed).unwrap();
            assert!(rel.is_valid(&perm.apply(&enc)));
        }
    }
}
