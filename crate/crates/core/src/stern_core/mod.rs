//! Stern-type protocol for M·w = u with w ∈ VALID, its Fiat–Shamir compilation,
//! the three-transcript extractor and a witness-free simulator.

pub mod commit;
pub mod proof;
pub mod sim;
pub mod solve;

use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::layout::{PermSeed, WitnessLayout};
use crate::params::Params;
use crate::ring_arith::{IntVecQ, Ring, SparseMatQ};
use crate::scratch::Scratch;

pub use commit::{ComRandomness, CommitKey, Commitment, PayloadHasher, COM_ROWS, RHO_BYTES};
pub use proof::{fs_challenges, fs_prove, fs_verify, NizkProof};
pub use sim::{extract_witness, simulate_commitment, simulate_round, SimulatedRound};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum RelationId {
    Dm = 1,
    Rlwe = 2,
    AtsSign = 3,
    Open = 4,
}

impl RelationId {
    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            1 => Self::Dm,
            2 => Self::Rlwe,
            3 => Self::AtsSign,
            4 => Self::Open,
            _ => return Err(Error::Malformed(format!("unknown relation id {b}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Challenge {
    One = 1,
    Two = 2,
    Three = 3,
}

impl Challenge {
    pub const ALL: [Challenge; 3] = [Challenge::One, Challenge::Two, Challenge::Three];

    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            1 => Self::One,
            2 => Self::Two,
            3 => Self::Three,
            _ => return Err(Error::Malformed(format!("challenge byte {b}"))),
        })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..3)]
    }
}

/// (M, u, VALID, S, Γ) for one statement.
#[derive(Debug)]
pub struct RelationInstance {
    id: RelationId,
    ring: Ring,
    com: Arc<CommitKey>,
    m: SparseMatQ,
    u: IntVecQ,
    layout: WitnessLayout,
    binding: [u8; 32],
    particular: OnceLock<Result<IntVecQ>>,
}

/// Extended witness: entries in {−1, 0, 1} stored as Z_q values.
pub type WitnessVec = IntVecQ;

impl RelationInstance {
    pub fn new(
        params: &Params,
        id: RelationId,
        m: SparseMatQ,
        u: IntVecQ,
        layout: WitnessLayout,
    ) -> Self {
        assert_eq!(m.rows(), u.len(), "M and u disagree on K");
        assert_eq!(m.cols(), layout.len(), "M and VALID disagree on L");
        let ring = params.ring();
        let digest = params.digest();
        let binding = statement_digest(&ring, &digest, id, &m, &u);
        Self {
            id,
            ring,
            com: Arc::new(CommitKey::derive(ring, &digest)),
            m,
            u,
            layout,
            binding,
            particular: OnceLock::new(),
        }
    }

    /// Hash of (params, id, M, u), absorbed by the Fiat–Shamir challenge.
    pub fn binding(&self) -> &[u8; 32] {
        &self.binding
    }

    pub fn id(&self) -> RelationId {
        self.id
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn matrix(&self) -> &SparseMatQ {
        &self.m
    }

    pub fn target(&self) -> &[i32] {
        &self.u
    }

    pub fn layout(&self) -> &WitnessLayout {
        &self.layout
    }

    pub fn commit_key(&self) -> &CommitKey {
        &self.com
    }

    /// K
    pub fn rows(&self) -> usize {
        self.m.rows()
    }

    /// L
    pub fn witness_len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_valid(&self, w: &[i32]) -> bool {
        self.layout.is_valid(w)
    }

    pub fn satisfies(&self, w: &[i32]) -> bool {
        w.len() == self.witness_len() && self.m.mul_vec(w) == self.u
    }

    /// Some x with M·x = u, not necessarily in VALID; cached.
    pub fn particular_solution(&self) -> Result<&IntVecQ> {
        self.particular
            .get_or_init(|| solve::solve_particular(&self.m, &self.u))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub(crate) fn add<T: Copy + Into<i32>>(&self, a: &[T], b: &[i32]) -> Scratch<i32> {
        let q = self.ring.q as i32;
        let h = (q - 1) / 2;
        Scratch::collect(
            a.len(),
            a.iter().zip(b).map(|(&x, &y)| {
                let s = x.into() + y;
                if s > h {
                    s - q
                } else if s < -h {
                    s + q
                } else {
                    s
                }
            }),
        )
    }

    pub(crate) fn sub(&self, a: &[i32], b: &[i32]) -> IntVecQ {
        let neg: Vec<i32> = b.iter().map(|&x| -x).collect();
        self.add(a, &neg).into_vec()
    }

    pub(crate) fn sample_mask<R: Rng + ?Sized>(&self, rng: &mut R) -> Scratch<i32> {
        let mut r = Scratch::with_capacity(self.witness_len());
        self.ring.sample_zq_into(rng, self.witness_len(), &mut r);
        r
    }

    fn com_masked(&self, seed: &[u8], v: &[i32], rho: &ComRandomness) -> Commitment {
        let mut h = PayloadHasher::new();
        h.bytes(seed);
        h.zq(&self.ring, v);
        self.com.commit_digest(&h.finish(), rho)
    }

    fn com_vec(&self, v: &[i32], rho: &ComRandomness) -> Commitment {
        let mut h = PayloadHasher::new();
        h.zq(&self.ring, v);
        self.com.commit_digest(&h.finish(), rho)
    }
}

fn statement_digest(
    ring: &Ring,
    params: &[u8; 32],
    id: RelationId,
    m: &SparseMatQ,
    u: &[i32],
) -> [u8; 32] {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(b"ats/statement/v1");
    h.update(params);
    h.update([id as u8]);
    h.update((m.rows() as u64).to_le_bytes());
    h.update((m.cols() as u64).to_le_bytes());
    let mut buf = Vec::with_capacity(1 << 16);
    for c in 0..m.cols() {
        buf.extend((m.column(c).count() as u32).to_le_bytes());
        for (r, v) in m.column(c) {
            buf.extend((r as u32).to_le_bytes());
            ring.put_coeff(&mut buf, v);
        }
        if buf.len() > 1 << 15 {
            h.update(&buf);
            buf.clear();
        }
    }
    h.update(&buf);
    buf.clear();
    for &x in u {
        ring.put_coeff(&mut buf, x);
    }
    h.update(&buf);
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SternCommitment {
    pub c1: Commitment,
    pub c2: Commitment,
    pub c3: Commitment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SternResponse {
    One {
        t_w: Vec<i8>,
        t_r: IntVecQ,
        rho2: ComRandomness,
        rho3: ComRandomness,
    },
    Two {
        eta: Vec<i8>,
        w2: IntVecQ,
        rho1: ComRandomness,
        rho3: ComRandomness,
    },
    Three {
        eta: Vec<i8>,
        w3: IntVecQ,
        rho1: ComRandomness,
        rho2: ComRandomness,
    },
}

impl SternResponse {
    pub fn challenge(&self) -> Challenge {
        match self {
            Self::One { .. } => Challenge::One,
            Self::Two { .. } => Challenge::Two,
            Self::Three { .. } => Challenge::Three,
        }
    }
}

/// Prover-side openings of one round.
#[derive(Debug, Clone)]
pub struct SternProverState {
    eta: PermSeed,
    t_w: Scratch<i32>,
    t_r: Scratch<i32>,
    r_w: Scratch<i32>,
    w_plus_r: Scratch<i32>,
    rho: [ComRandomness; 3],
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum C1Mode {
    /// C1 = COM(η, M·r_w)
    Mask,
    /// C1 = COM(η, M·(w + r_w) − u)
    Shifted,
}

pub(crate) fn commit_with<R: Rng + ?Sized>(
    rel: &RelationInstance,
    w: &[i32],
    mode: C1Mode,
    rng: &mut R,
) -> (SternCommitment, SternProverState) {
    let layout = rel.layout();
    let eta = layout.sample_seed(rng);
    let perm = layout
        .permutation(&eta)
        .expect("sampled seed has layout shape");
    let r_w = rel.sample_mask(rng);
    let rho = [
        CommitKey::sample_rho(rng),
        CommitKey::sample_rho(rng),
        CommitKey::sample_rho(rng),
    ];
    let w_plus_r = rel.add(w, &r_w);
    let (t_w, t_r, t_wr) = perm.apply3(w, &r_w, &w_plus_r);
    let seed_bytes = layout.encode_seed(&eta);
    let c1_vec = match mode {
        C1Mode::Mask => rel.m.mul_vec(&r_w),
        C1Mode::Shifted => rel.sub(&rel.m.mul_vec(&w_plus_r), &rel.u),
    };
    let cmt = SternCommitment {
        c1: rel.com_masked(&seed_bytes, &c1_vec, &rho[0]),
        c2: rel.com_vec(&t_r, &rho[1]),
        c3: rel.com_vec(&t_wr, &rho[2]),
    };
    (
        cmt,
        SternProverState {
            eta,
            t_w,
            t_r,
            r_w,
            w_plus_r,
            rho,
        },
    )
}

/// Honest commitment for a witness with w ∈ VALID and M·w = u.
pub fn stern_round_prove<R: Rng + ?Sized>(
    rel: &RelationInstance,
    w: &[i32],
    rng: &mut R,
) -> Result<(SternCommitment, SternProverState)> {
    if !rel.is_valid(w) {
        return Err(Error::WitnessRejected("witness is not in VALID".into()));
    }
    if !rel.satisfies(w) {
        return Err(Error::WitnessRejected("M·w ≠ u".into()));
    }
    Ok(commit_with(rel, w, C1Mode::Mask, rng))
}

pub fn stern_respond(
    rel: &RelationInstance,
    st: &SternProverState,
    ch: Challenge,
) -> SternResponse {
    let eta = || rel.layout().flatten_seed(&st.eta);
    match ch {
        Challenge::One => SternResponse::One {
            t_w: st.t_w.iter().map(|&x| x as i8).collect(),
            t_r: st.t_r.to_vec(),
            rho2: st.rho[1],
            rho3: st.rho[2],
        },
        Challenge::Two => SternResponse::Two {
            eta: eta(),
            w2: st.w_plus_r.to_vec(),
            rho1: st.rho[0],
            rho3: st.rho[2],
        },
        Challenge::Three => SternResponse::Three {
            eta: eta(),
            w3: st.r_w.to_vec(),
            rho1: st.rho[0],
            rho2: st.rho[1],
        },
    }
}

fn in_zq(rel: &RelationInstance, v: &[i32]) -> bool {
    let h = rel.ring.half() as i32;
    v.len() == rel.witness_len() && v.iter().all(|&x| (-h..=h).contains(&x))
}

pub fn stern_round_verify(
    rel: &RelationInstance,
    cmt: &SternCommitment,
    ch: Challenge,
    rsp: &SternResponse,
) -> bool {
    if rsp.challenge() != ch {
        return false;
    }
    let layout = rel.layout();
    match rsp {
        SternResponse::One {
            t_w,
            t_r,
            rho2,
            rho3,
        } => {
            if t_w.len() != rel.witness_len() || !in_zq(rel, t_r) {
                return false;
            }
            layout.is_valid(t_w)
                && rel.com_vec(t_r, rho2) == cmt.c2
                && rel.com_vec(&rel.add(t_w, t_r), rho3) == cmt.c3
        }
        SternResponse::Two {
            eta,
            w2,
            rho1,
            rho3,
        } => {
            let Ok(seed) = layout.seed_from_flat(eta) else {
                return false;
            };
            if !in_zq(rel, w2) {
                return false;
            }
            let perm = layout.permutation(&seed).unwrap();
            let c1 = rel.sub(&rel.m.mul_vec(w2), &rel.u);
            rel.com_masked(&layout.encode_seed(&seed), &c1, rho1) == cmt.c1
                && rel.com_vec(&perm.apply_scratch(w2), rho3) == cmt.c3
        }
        SternResponse::Three {
            eta,
            w3,
            rho1,
            rho2,
        } => {
            let Ok(seed) = layout.seed_from_flat(eta) else {
                return false;
            };
            if !in_zq(rel, w3) {
                return false;
            }
            let perm = layout.permutation(&seed).unwrap();
            rel.com_masked(&layout.encode_seed(&seed), &rel.m.mul_vec(w3), rho1) == cmt.c1
                && rel.com_vec(&perm.apply_scratch(w3), rho2) == cmt.c2
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn honest_rounds_accept_every_challenge() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for s in 0..20 {
            let (rel, w) = toy::instance(s);
            let (cmt, st) = stern_round_prove(&rel, &w, &mut rng).unwrap();
            for ch in Challenge::ALL {
                assert!(stern_round_verify(
                    &rel,
                    &cmt,
                    ch,
                    &stern_respond(&rel, &st, ch)
                ));
            }
        }
    }

    #[test]
    fn prover_refuses_bad_witness() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (rel, mut w) = toy::instance(3);
        let mut bad = w.clone();
        bad[0] = 5;
        assert!(stern_round_prove(&rel, &bad, &mut rng).is_err());
        // VALID but wrong equation
        w = rel.layout().sample_valid(&mut rng);
        assert!(stern_round_prove(&rel, &w, &mut rng).is_err());
    }

    #[test]
    fn tampering_is_caught() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (rel, w) = toy::instance(5);
        let (cmt, st) = stern_round_prove(&rel, &w, &mut rng).unwrap();
        let r2 = stern_respond(&rel, &st, Challenge::Two);
        assert!(!stern_round_verify(&rel, &cmt, Challenge::Three, &r2));
        if let SternResponse::Two {
            eta,
            w2,
            rho1,
            rho3,
        } = r2.clone()
        {
            let as3 = SternResponse::Three {
                eta,
                w3: w2,
                rho1,
                rho2: rho3,
            };
            assert!(!stern_round_verify(&rel, &cmt, Challenge::Three, &as3));
        }
        let mut bad = cmt.clone();
        bad.c3.0[0] ^= 1;
        assert!(!stern_round_verify(&rel, &bad, Challenge::Two, &r2));
        if let SternResponse::One {
            mut t_w,
            t_r,
            rho2,
            rho3,
        } = stern_respond(&rel, &st, Challenge::One)
        {
            t_w[1] = if t_w[1] == 1 { 0 } else { 1 };
            let r = SternResponse::One {
                t_w,
                t_r,
                rho2,
                rho3,
            };
            assert!(!stern_round_verify(&rel, &cmt, Challenge::One, &r));
        }
    }

    #[test]
    fn ch1_response_is_uniform_over_valid() {
        // minimal layout: one trit var under Enc; Γ(w) takes each of 3 values equally
        use crate::layout::{Segment, Var, VarKind};
        use std::collections::HashMap;
        let p = toy::params();
        let layout = WitnessLayout::new(
            vec![Var {
                kind: VarKind::Trits,
                len: 1,
            }],
            vec![Segment::Enc { z: 0 }],
        );
        let mut b = crate::ring_arith::SparseBuilder::new(1, 3, p.q);
        b.add(0, 1, 1);
        let w: Vec<i32> = vec![0, 1, -1]; // enc3(1) with z=1 → ([2]_3, 1, 0) = (−1, 1, 0)
        let w = if layout.is_valid(&w) {
            w
        } else {
            vec![-1, 1, 0]
        };
        let rel = RelationInstance::new(&p, RelationId::Dm, b.finish(), vec![1], layout);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let mut counts: HashMap<Vec<i8>, u32> = HashMap::new();
        for _ in 0..3000 {
            let (_, st) = stern_round_prove(&rel, &w, &mut rng).unwrap();
            if let SternResponse::One { t_w, .. } = stern_respond(&rel, &st, Challenge::One) {
                *counts.entry(t_w).or_default() += 1;
            }
        }
        assert_eq!(counts.len(), 3);
        assert!(
            counts.values().all(|&c| (850..1150).contains(&c)),
            "{counts:?}"
        );
    }
}
