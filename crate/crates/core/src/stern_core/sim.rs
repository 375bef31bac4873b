//! Witness extraction from three accepting answers, and the witness-free simulator.

use rand::Rng;

use super::{
    commit_with, stern_respond, stern_round_verify, C1Mode, Challenge, RelationInstance,
    SternCommitment, SternProverState, SternResponse,
};
use crate::error::{Error, Result};
use crate::ring_arith::IntVecQ;

/// Recovers w′ ∈ VALID with M·w′ = u from accepting answers to all three challenges
/// on one commitment.
pub fn extract_witness(
    rel: &RelationInstance,
    cmt: &SternCommitment,
    rsps: [&SternResponse; 3],
) -> Result<IntVecQ> {
    for (rsp, ch) in rsps.iter().zip(Challenge::ALL) {
        if !stern_round_verify(rel, cmt, ch, rsp) {
            return Err(Error::Extraction(format!(
                "answer to challenge {} does not verify",
                ch as u8
            )));
        }
    }
    let (
        SternResponse::One { t_w, .. },
        SternResponse::Two { eta: e2, w2, .. },
        SternResponse::Three { eta: e3, w3, .. },
    ) = (rsps[0], rsps[1], rsps[2])
    else {
        unreachable!("challenge order checked above")
    };
    if e2 != e3 {
        return Err(Error::Extraction(
            "permutation seeds differ: commitment collision".into(),
        ));
    }
    let w = rel.sub(w2, w3);
    let layout = rel.layout();
    let perm = layout.permutation(&layout.seed_from_flat(e2)?)?;
    let t: Vec<i8> = perm.apply(&w).iter().map(|&x| x as i8).collect();
    if &t != t_w {
        return Err(Error::Extraction(
            "Γ(w2 − w3) differs from t_w: commitment collision".into(),
        ));
    }
    if !rel.is_valid(&w) || !rel.satisfies(&w) {
        return Err(Error::Extraction("difference is not a witness".into()));
    }
    Ok(w)
}

/// A commitment prepared to answer two of the three challenges.
#[derive(Debug, Clone)]
pub struct SimulatedRound {
    pub cmt: SternCommitment,
    pub avoided: Challenge,
    state: SternProverState,
}

impl SimulatedRound {
    pub fn respond(&self, rel: &RelationInstance, ch: Challenge) -> Option<SternResponse> {
        (ch != self.avoided).then(|| stern_respond(rel, &self.state, ch))
    }
}

pub fn simulate_commitment<R: Rng + ?Sized>(
    rel: &RelationInstance,
    rng: &mut R,
) -> Result<SimulatedRound> {
    let avoided = Challenge::random(rng);
    let (cmt, state) = match avoided {
        Challenge::One => commit_with(rel, rel.particular_solution()?, C1Mode::Mask, rng),
        Challenge::Two => commit_with(
            rel,
            &rel.layout().sample_valid_scratch(rng),
            C1Mode::Mask,
            rng,
        ),
        Challenge::Three => commit_with(
            rel,
            &rel.layout().sample_valid_scratch(rng),
            C1Mode::Shifted,
            rng,
        ),
    };
    Ok(SimulatedRound {
        cmt,
        avoided,
        state,
    })
}

/// One simulated transcript for challenge `ch`; `None` when the guess missed.
pub fn simulate_round<R: Rng + ?Sized>(
    rel: &RelationInstance,
    ch: Challenge,
    rng: &mut R,
) -> Result<Option<(SternCommitment, SternResponse)>> {
    let s = simulate_commitment(rel, rng)?;
    Ok(s.respond(rel, ch).map(|r| (s.cmt, r)))
}
