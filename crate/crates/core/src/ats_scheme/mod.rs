//! Accountable tracing signatures: setup, key generation, enrollment with a
//! registration table, sign/verify, open/judge and the public Account check.

pub mod census;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::codec::{Reader, Writer};
use crate::dm_signature::{
    dm_keygen, dm_sign, dm_verify, DmSignKey, DmSignature, DmVerifKey, SignerState,
};
use crate::error::{Error, Result};
use crate::koe::{
    koe_dec, koe_enc, koe_keygen, koe_keygen_from, koe_keyrand, KoeCiphertext, KoePublicKey,
    KoeRandomizer, KoeSecretKey,
};
use crate::params::Params;
use crate::relations::{
    ats_message, build_ats_relation, build_open_relation, encode_ats_witness, encode_open_witness,
    open_noise, AtsStatement, AtsWitness, OpenStatement, OpenWitness,
};
use crate::ring_arith::{vec_inf_norm, RingElem, RingVec};
use crate::stern_core::{fs_prove, fs_verify, NizkProof, RelationInstance};

const SIGN_CTX: &[u8] = b"ats/sign";

/// Public parameters: B and the two escrow-free key pairs (a_i⁽⁰⁾, b_i⁽⁰⁾).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub params: Params,
    pub bmat: RingVec,
    pub base: [KoePublicKey; 2],
}

/// The setup secrets. Only [`setup_with_secrets`] ever exposes them.
#[doc(hidden)]
#[derive(Debug, Clone)]
pub struct SetupSecrets {
    pub s: [RingElem; 2],
    pub e: [RingVec; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPublicKey {
    pub pp: PublicParams,
    pub vk: DmVerifKey,
    /// (a_i⁽¹⁾, b_i⁽¹⁾), i = 1, 2.
    pub gm: [KoePublicKey; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueKey(pub DmSignKey);

/// ok = (s₁, e₁).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpeningKey {
    pub s1: RingElem,
    pub e1: RingVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserKeyPair {
    /// p = B·x
    pub upk: RingElem,
    /// x, ternary of length m
    pub usk: RingVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub p: RingElem,
    pub epk: [KoePublicKey; 2],
    pub sig: DmSignature,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscrowWitness {
    pub rnd: [KoeRandomizer; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegEntry {
    pub index: u64,
    pub p: RingElem,
    pub traceable: bool,
    pub escrow: EscrowWitness,
}

/// GM-side state: the signer counter S and reg.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GmState {
    pub signer: SignerState,
    pub reg: Vec<RegEntry>,
    /// Accept an upk that is already registered. Open then reports the lowest index.
    pub allow_duplicates: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSignature {
    pub proof: NizkProof,
    pub ct: [KoeCiphertext; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpenResult {
    Bottom,
    Opened {
        p: RingElem,
        index: u64,
        proof: NizkProof,
    },
}

pub fn ats_setup(params: &Params, seed: [u8; 32]) -> PublicParams {
    setup_with_secrets(params, seed).0
}

#[doc(hidden)]
pub fn setup_with_secrets(params: &Params, seed: [u8; 32]) -> (PublicParams, SetupSecrets) {
    let ring = params.ring();
    let mut rng = ChaCha20Rng::from_seed(seed);
    let bmat = ring.sample_uniform_vec(&mut rng, params.m);
    let mut gen = || {
        let a = ring.sample_uniform_vec(&mut rng, params.ell);
        let s = ring.sample_chi(&mut rng, params.b);
        let e = ring.sample_chi_vec(&mut rng, params.b, params.ell);
        let (pk, sk) = koe_keygen_from(params, a, s, &e);
        (pk, sk.s, e)
    };
    let (pk1, s1, e1) = gen();
    let (pk2, s2, e2) = gen();
    (
        PublicParams {
            params: params.clone(),
            bmat,
            base: [pk1, pk2],
        },
        SetupSecrets {
            s: [s1, s2],
            e: [e1, e2],
        },
    )
}

pub fn gkeygen<R: Rng + ?Sized>(
    pp: &PublicParams,
    rng: &mut R,
) -> (GroupPublicKey, IssueKey, OpeningKey) {
    let (gpk, ik, ok, _) = gkeygen_with_second_key(pp, rng);
    (gpk, ik, ok)
}

/// As [`gkeygen`] but also returns the second decryption key, which the honest GM erases.
#[doc(hidden)]
pub fn gkeygen_with_second_key<R: Rng + ?Sized>(
    pp: &PublicParams,
    rng: &mut R,
) -> (GroupPublicKey, IssueKey, OpeningKey, KoeSecretKey) {
    let p = &pp.params;
    let ring = p.ring();
    let (vk, sk) = dm_keygen(p, rng);
    let a1 = ring.sample_uniform_vec(rng, p.ell);
    let s1 = ring.sample_chi(rng, p.b);
    let e1 = ring.sample_chi_vec(rng, p.b, p.ell);
    let (pk1, _) = koe_keygen_from(p, a1, s1.clone(), &e1);
    let (pk2, sk2) = koe_keygen(p, rng);
    (
        GroupPublicKey {
            pp: pp.clone(),
            vk,
            gm: [pk1, pk2],
        },
        IssueKey(sk),
        OpeningKey { s1, e1 },
        sk2,
    )
}

pub fn ukeygen<R: Rng + ?Sized>(pp: &PublicParams, rng: &mut R) -> UserKeyPair {
    let p = &pp.params;
    let ring = p.ring();
    let usk = ring.sample_chi_vec(rng, 1, p.m);
    UserKeyPair {
        upk: ring.dot(&pp.bmat, &usk),
        usk,
    }
}

impl GmState {
    pub fn lookup(&self, p: &RingElem) -> Option<&RegEntry> {
        self.reg.iter().find(|e| &e.p == p)
    }
}

/// Issues a certificate for `upk`, randomizing the GM keys (tr = 1) or the escrow-free keys (tr = 0).
/// On error the state is left unchanged.
pub fn enroll<R: Rng + ?Sized>(
    gpk: &GroupPublicKey,
    ik: &IssueKey,
    state: &mut GmState,
    upk: &RingElem,
    traceable: bool,
    rng: &mut R,
) -> Result<(Certificate, EscrowWitness)> {
    let p = &gpk.pp.params;
    if upk.degree_bound() != p.n {
        return Err(Error::Shape("upk is not a ring element of degree n".into()));
    }
    if !state.allow_duplicates {
        if let Some(e) = state.lookup(upk) {
            return Err(Error::DuplicateUser(e.index));
        }
    }
    let base = base_keys(gpk, traceable);
    let rnd = [KoeRandomizer::sample(p, rng), KoeRandomizer::sample(p, rng)];
    let epk = [
        koe_keyrand(p, base[0], &rnd[0])?,
        koe_keyrand(p, base[1], &rnd[1])?,
    ];
    let mut signer = state.signer;
    let index = signer.s;
    let sig = dm_sign(p, &gpk.vk, &ik.0, &mut signer, &ats_message(upk, &epk), rng)?;
    let escrow = EscrowWitness { rnd };
    state.signer = signer;
    state.reg.push(RegEntry {
        index,
        p: upk.clone(),
        traceable,
        escrow: escrow.clone(),
    });
    Ok((
        Certificate {
            p: upk.clone(),
            epk,
            sig,
        },
        escrow,
    ))
}

fn base_keys(gpk: &GroupPublicKey, traceable: bool) -> [&KoePublicKey; 2] {
    if traceable {
        [&gpk.gm[0], &gpk.gm[1]]
    } else {
        [&gpk.pp.base[0], &gpk.pp.base[1]]
    }
}

fn sign_relation(
    gpk: &GroupPublicKey,
    ct: &[KoeCiphertext; 2],
) -> Result<(AtsStatement, RelationInstance)> {
    let st = AtsStatement {
        vk: gpk.vk.clone(),
        bmat: gpk.pp.bmat.clone(),
        ct: ct.clone(),
    };
    let rel = build_ats_relation(&gpk.pp.params, &st)?;
    Ok((st, rel))
}

pub fn ats_sign<R: Rng + ?Sized>(
    gpk: &GroupPublicKey,
    cert: &Certificate,
    usk: &[RingElem],
    message: &[u8],
    rng: &mut R,
) -> Result<GroupSignature> {
    let p = &gpk.pp.params;
    let ring = p.ring();
    if usk.len() != p.m || vec_inf_norm(usk) > 1 || ring.dot(&gpk.pp.bmat, usk) != cert.p {
        return Err(Error::WitnessRejected(
            "usk does not match the certified upk".into(),
        ));
    }
    if !dm_verify(p, &gpk.vk, &ats_message(&cert.p, &cert.epk), &cert.sig) {
        return Err(Error::WitnessRejected("certificate does not verify".into()));
    }
    let rnd = [KoeRandomizer::sample(p, rng), KoeRandomizer::sample(p, rng)];
    let ct = [
        koe_enc(p, &cert.epk[0], &cert.p, &rnd[0])?,
        koe_enc(p, &cert.epk[1], &cert.p, &rnd[1])?,
    ];
    let (st, rel) = sign_relation(gpk, &ct)?;
    let w = AtsWitness {
        p: cert.p.clone(),
        epk: cert.epk.clone(),
        sig: cert.sig.clone(),
        x: usk.to_vec(),
        rnd,
    };
    let enc = encode_ats_witness(p, &rel, &st, &w)?;
    let proof = fs_prove(&rel, &enc, message, SIGN_CTX, p.kappa, rng)?;
    Ok(GroupSignature { proof, ct })
}

pub fn ats_verify(gpk: &GroupPublicKey, message: &[u8], sig: &GroupSignature) -> bool {
    match sign_relation(gpk, &sig.ct) {
        Ok((_, rel)) => fs_verify(&rel, &sig.proof, message, SIGN_CTX, gpk.pp.params.kappa),
        Err(_) => false,
    }
}

/// Challenge context for Π_open: Σ and p′ (M is the FS message).
fn open_ctx(p: &Params, sig: &GroupSignature, pv: &RingElem) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(b"ats/open");
    w.blob(&sig.to_bytes(p));
    p.ring().encode_elem(&mut w, pv);
    w.finish()
}

fn open_relation(
    gpk: &GroupPublicKey,
    sig: &GroupSignature,
    pv: &RingElem,
) -> Result<(OpenStatement, RelationInstance)> {
    let st = OpenStatement {
        pk: gpk.gm[0].clone(),
        ct: sig.ct[0].clone(),
        p: pv.clone(),
    };
    let rel = build_open_relation(&gpk.pp.params, &st)?;
    Ok((st, rel))
}

/// Decrypts c₁ and proves correct decryption if p′ is registered. Σ must verify.
pub fn ats_open<R: Rng + ?Sized>(
    gpk: &GroupPublicKey,
    ok: &OpeningKey,
    reg: &[RegEntry],
    message: &[u8],
    sig: &GroupSignature,
    rng: &mut R,
) -> Result<OpenResult> {
    if !ats_verify(gpk, message, sig) {
        return Err(Error::InvalidSignature);
    }
    let p = &gpk.pp.params;
    let pv = koe_dec(p, &KoeSecretKey { s: ok.s1.clone() }, &sig.ct[0]);
    let Some(entry) = reg.iter().find(|e| e.p == pv) else {
        return Ok(OpenResult::Bottom);
    };
    let (st, rel) = open_relation(gpk, sig, &pv)?;
    let y = open_noise(p, &sig.ct[0], &ok.s1, &pv);
    let w = OpenWitness {
        s1: ok.s1.clone(),
        e1: ok.e1.clone(),
        y,
    };
    let enc = encode_open_witness(p, &rel, &st, &w)?;
    let proof = fs_prove(&rel, &enc, message, &open_ctx(p, sig, &pv), p.kappa, rng)?;
    Ok(OpenResult::Opened {
        p: pv,
        index: entry.index,
        proof,
    })
}

/// 1 iff Σ verifies and Π_open proves that c₁ decrypts to p′. An opening of ⊥ is never accepted.
pub fn ats_judge(
    gpk: &GroupPublicKey,
    message: &[u8],
    sig: &GroupSignature,
    opened: Option<(&RingElem, &NizkProof)>,
) -> bool {
    let Some((pv, proof)) = opened else {
        return false;
    };
    if !ats_verify(gpk, message, sig) {
        return false;
    }
    let p = &gpk.pp.params;
    match open_relation(gpk, sig, pv) {
        Ok((_, rel)) => fs_verify(&rel, proof, message, &open_ctx(p, sig, pv), p.kappa),
        Err(_) => false,
    }
}

/// 1 iff the certificate verifies and both keys are the escrowed randomizations of the tr-selected base keys.
pub fn ats_account(
    gpk: &GroupPublicKey,
    cert: &Certificate,
    escrow: &EscrowWitness,
    traceable: bool,
) -> bool {
    let p = &gpk.pp.params;
    if !dm_verify(p, &gpk.vk, &ats_message(&cert.p, &cert.epk), &cert.sig) {
        return false;
    }
    base_keys(gpk, traceable)
        .iter()
        .zip(&escrow.rnd)
        .zip(&cert.epk)
        .all(|((base, rnd), epk)| matches!(koe_keyrand(p, base, rnd), Ok(k) if &k == epk))
}

impl PublicParams {
    pub fn encode(&self, w: &mut Writer) {
        let ring = self.params.ring();
        self.params.encode(w);
        ring.encode_vec(w, &self.bmat);
        self.base[0].encode(&ring, w);
        self.base[1].encode(&ring, w);
    }

    pub fn decode(r: &mut Reader) -> Result<Self> {
        let params = Params::decode(r)?;
        let bmat = params.ring().decode_vec(r, params.m)?;
        let base = [
            KoePublicKey::decode(&params, r)?,
            KoePublicKey::decode(&params, r)?,
        ];
        Ok(Self { params, bmat, base })
    }
}

impl GroupPublicKey {
    pub fn params(&self) -> &Params {
        &self.pp.params
    }

    pub fn encode(&self, w: &mut Writer) {
        let p = &self.pp.params;
        self.pp.encode(w);
        self.vk.encode(p, w);
        self.gm[0].encode(&p.ring(), w);
        self.gm[1].encode(&p.ring(), w);
    }

    pub fn decode(r: &mut Reader) -> Result<Self> {
        let pp = PublicParams::decode(r)?;
        let p = &pp.params;
        let vk = DmVerifKey::decode(p, r)?;
        let gm = [KoePublicKey::decode(p, r)?, KoePublicKey::decode(p, r)?];
        Ok(Self { pp, vk, gm })
    }
}

impl IssueKey {
    pub fn encode(&self, p: &Params, w: &mut Writer) {
        self.0.encode(p, w);
    }

    pub fn decode(p: &Params, r: &mut Reader) -> Result<Self> {
        DmSignKey::decode(p, r).map(Self)
    }
}

impl OpeningKey {
    pub fn encode(&self, p: &Params, w: &mut Writer) {
        let ring = p.ring();
        ring.encode_elem(w, &self.s1);
        ring.encode_vec(w, &self.e1);
    }

    pub fn decode(p: &Params, r: &mut Reader) -> Result<Self> {
        let ring = p.ring();
        let s1 = ring.decode_elem(r)?;
        let e1 = ring.decode_vec(r, p.ell)?;
        if s1.inf_norm() > p.b || vec_inf_norm(&e1) > p.b {
            return Err(Error::Malformed("opening key exceeds B".into()));
        }
        Ok(Self { s1, e1 })
    }
}

impl UserKeyPair {
    pub fn decode_secret(p: &Params, r: &mut Reader) -> Result<RingVec> {
        let x = p.ring().decode_vec(r, p.m)?;
        if vec_inf_norm(&x) > 1 {
            return Err(Error::Malformed("usk must be ternary".into()));
        }
        Ok(x)
    }
}

impl Certificate {
    pub fn encode(&self, p: &Params, w: &mut Writer) {
        let ring = p.ring();
        ring.encode_elem(w, &self.p);
        self.epk[0].encode(&ring, w);
        self.epk[1].encode(&ring, w);
        self.sig.encode(p, w);
    }

    pub fn decode(p: &Params, r: &mut Reader) -> Result<Self> {
        Ok(Self {
            p: p.ring().decode_elem(r)?,
            epk: [KoePublicKey::decode(p, r)?, KoePublicKey::decode(p, r)?],
            sig: DmSignature::decode(p, r)?,
        })
    }
}

impl EscrowWitness {
    pub fn encode(&self, p: &Params, w: &mut Writer) {
        self.rnd[0].encode(&p.ring(), w);
        self.rnd[1].encode(&p.ring(), w);
    }

    pub fn decode(p: &Params, r: &mut Reader) -> Result<Self> {
        Ok(Self {
            rnd: [KoeRandomizer::decode(p, r)?, KoeRandomizer::decode(p, r)?],
        })
    }
}

impl RegEntry {
    pub fn encode(&self, p: &Params, w: &mut Writer) {
        w.u64(self.index);
        p.ring().encode_elem(w, &self.p);
        w.u8(self.traceable as u8);
        self.escrow.encode(p, w);
    }

    pub fn decode(p: &Params, r: &mut Reader) -> Result<Self> {
        let index = r.u64()?;
        let pv = p.ring().decode_elem(r)?;
        let traceable = match r.u8()? {
            0 => false,
            1 => true,
            b => return Err(Error::Malformed(format!("tr byte {b}"))),
        };
        Ok(Self {
            index,
            p: pv,
            traceable,
            escrow: EscrowWitness::decode(p, r)?,
        })
    }
}

impl GroupSignature {
    pub fn encode(&self, p: &Params, w: &mut Writer) {
        let ring = p.ring();
        self.ct[0].encode(&ring, w);
        self.ct[1].encode(&ring, w);
        w.blob(&self.proof.encode(&ring));
    }

    pub fn to_bytes(&self, p: &Params) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode(p, &mut w);
        w.finish()
    }

    pub fn decode(p: &Params, r: &mut Reader) -> Result<Self> {
        let ct = [KoeCiphertext::decode(p, r)?, KoeCiphertext::decode(p, r)?];
        let max = crate::relations::ats_lengths(p).iter().sum();
        let proof = NizkProof::decode(&p.ring(), r.blob()?, max)?;
        Ok(Self { proof, ct })
    }
}

/// Π_open with its relation bound fixed by the opening statement size.
pub fn decode_open_proof(p: &Params, bytes: &[u8]) -> Result<NizkProof> {
    NizkProof::decode(&p.ring(), bytes, crate::relations::open_length(p))
}

#[cfg(test)]
mod tests;
