//! Artifact files: 4-byte magic ‖ u16 version ‖ params digest ‖ payload.

use ats_core::ats_scheme::{
    decode_open_proof, Certificate, EscrowWitness, GroupPublicKey, GroupSignature, IssueKey,
    OpeningKey, PublicParams, UserKeyPair,
};
use ats_core::codec::{Reader, Writer};
use ats_core::dm_signature::DmVerifKey;
use ats_core::stern_core::NizkProof;
use ats_core::{Error, Params, Result, RingElem, RingVec};

pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    PublicParams,
    Gpk,
    Secret,
    Verif,
    Cert,
    Escrow,
    Signature,
    OpenProof,
    GmState,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::PublicParams,
        Kind::Gpk,
        Kind::Secret,
        Kind::Verif,
        Kind::Cert,
        Kind::Escrow,
        Kind::Signature,
        Kind::OpenProof,
        Kind::GmState,
    ];

    pub fn magic(self) -> &'static [u8; 4] {
        match self {
            Kind::PublicParams => b"ATSA",
            Kind::Gpk => b"ATSG",
            Kind::Secret => b"ATSK",
            Kind::Verif => b"ATSV",
            Kind::Cert => b"ATSC",
            Kind::Escrow => b"ATSW",
            Kind::Signature => b"ATSS",
            Kind::OpenProof => b"ATSO",
            Kind::GmState => b"ATST",
        }
    }

    pub fn from_magic(m: &[u8]) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.magic() == m)
    }
}

pub fn seal(kind: Kind, digest: &[u8; 32], payload: &[u8]) -> Vec<u8> {
    let mut w = Writer::with_capacity(HEADER_LEN + payload.len());
    w.bytes(kind.magic());
    w.u16(VERSION);
    w.bytes(digest);
    w.bytes(payload);
    w.finish()
}

/// Splits a file into (kind, params digest, payload).
pub fn unseal(bytes: &[u8]) -> Result<(Kind, [u8; 32], &[u8])> {
    let mut r = Reader::new(bytes);
    let magic = r.take(4)?;
    let kind = Kind::from_magic(magic).ok_or_else(|| {
        Error::Malformed(format!(
            "unknown magic {:?}",
            String::from_utf8_lossy(magic)
        ))
    })?;
    let v = r.u16()?;
    if v != VERSION {
        return Err(Error::Malformed(format!("unsupported file version {v}")));
    }
    let digest = r.array()?;
    Ok((kind, digest, &bytes[HEADER_LEN..]))
}

const SECRET_GM: u8 = 1;
const SECRET_USER: u8 = 2;
const VERIF_DM: u8 = 1;
const VERIF_UPK: u8 = 2;

/// Every object the CLI reads or writes, except the GM state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Artifact {
    PublicParams(PublicParams),
    Gpk(GroupPublicKey),
    GmSecret(IssueKey, OpeningKey),
    Usk(RingVec),
    Vk(DmVerifKey),
    Upk(RingElem),
    Cert(Certificate),
    Escrow(EscrowWitness),
    Signature(GroupSignature),
    OpenProof(NizkProof),
}

impl Artifact {
    pub fn kind(&self) -> Kind {
        match self {
            Artifact::PublicParams(_) => Kind::PublicParams,
            Artifact::Gpk(_) => Kind::Gpk,
            Artifact::GmSecret(..) | Artifact::Usk(_) => Kind::Secret,
            Artifact::Vk(_) | Artifact::Upk(_) => Kind::Verif,
            Artifact::Cert(_) => Kind::Cert,
            Artifact::Escrow(_) => Kind::Escrow,
            Artifact::Signature(_) => Kind::Signature,
            Artifact::OpenProof(_) => Kind::OpenProof,
        }
    }

    pub fn is_secret(&self) -> bool {
        self.kind() == Kind::Secret
    }

    pub fn to_bytes(&self, p: &Params) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Artifact::PublicParams(pp) => pp.encode(&mut w),
            Artifact::Gpk(g) => g.encode(&mut w),
            Artifact::GmSecret(ik, ok) => {
                w.u8(SECRET_GM);
                ik.encode(p, &mut w);
                ok.encode(p, &mut w);
            }
            Artifact::Usk(x) => {
                w.u8(SECRET_USER);
                p.ring().encode_vec(&mut w, x);
            }
            Artifact::Vk(vk) => {
                w.u8(VERIF_DM);
                vk.encode(p, &mut w);
            }
            Artifact::Upk(u) => {
                w.u8(VERIF_UPK);
                p.ring().encode_elem(&mut w, u);
            }
            Artifact::Cert(c) => c.encode(p, &mut w),
            Artifact::Escrow(e) => e.encode(p, &mut w),
            Artifact::Signature(s) => s.encode(p, &mut w),
            Artifact::OpenProof(pr) => w.bytes(&pr.encode(&p.ring())),
        }
        seal(self.kind(), &p.digest(), &w.finish())
    }

    /// Parses any artifact. Self-describing kinds (pp, gpk) need no `expected`
    /// params but must agree with it when given; all others require it.
    pub fn from_bytes(expected: Option<&Params>, bytes: &[u8]) -> Result<Self> {
        let (kind, digest, payload) = unseal(bytes)?;
        let mut r = Reader::new(payload);
        let out = match kind {
            Kind::PublicParams => {
                let pp = PublicParams::decode(&mut r)?;
                own_params(&pp.params, &digest, expected)?;
                Artifact::PublicParams(pp)
            }
            Kind::Gpk => {
                let g = GroupPublicKey::decode(&mut r)?;
                own_params(g.params(), &digest, expected)?;
                Artifact::Gpk(g)
            }
            Kind::GmState => {
                return Err(Error::Malformed(
                    "GM state is not a standalone artifact".into(),
                ))
            }
            _ => {
                let p = expected.ok_or_else(|| {
                    Error::Malformed("parameters needed to parse this file".into())
                })?;
                if p.digest() != digest {
                    return Err(mismatch());
                }
                match kind {
                    Kind::Secret => match r.u8()? {
                        SECRET_GM => Artifact::GmSecret(
                            IssueKey::decode(p, &mut r)?,
                            OpeningKey::decode(p, &mut r)?,
                        ),
                        SECRET_USER => Artifact::Usk(UserKeyPair::decode_secret(p, &mut r)?),
                        t => return Err(Error::Malformed(format!("secret key subtype {t}"))),
                    },
                    Kind::Verif => match r.u8()? {
                        VERIF_DM => Artifact::Vk(DmVerifKey::decode(p, &mut r)?),
                        VERIF_UPK => Artifact::Upk(p.ring().decode_elem(&mut r)?),
                        t => return Err(Error::Malformed(format!("verification key subtype {t}"))),
                    },
                    Kind::Cert => Artifact::Cert(Certificate::decode(p, &mut r)?),
                    Kind::Escrow => Artifact::Escrow(EscrowWitness::decode(p, &mut r)?),
                    Kind::Signature => Artifact::Signature(GroupSignature::decode(p, &mut r)?),
                    Kind::OpenProof => {
                        let pr = decode_open_proof(p, payload)?;
                        return Ok(Artifact::OpenProof(pr));
                    }
                    Kind::PublicParams | Kind::Gpk | Kind::GmState => unreachable!(),
                }
            }
        };
        r.expect_end()?;
        Ok(out)
    }
}

fn mismatch() -> Error {
    Error::Malformed("artifact was made for different parameters".into())
}

fn own_params(own: &Params, digest: &[u8; 32], expected: Option<&Params>) -> Result<()> {
    if own.digest() != *digest || expected.is_some_and(|e| e != own) {
        return Err(mismatch());
    }
    Ok(())
}

/// Lowercase hex of the canonical ring-element encoding.
pub fn elem_hex(p: &Params, a: &RingElem) -> String {
    hex::encode(p.ring().elem_bytes(a))
}

pub fn elem_from_hex(p: &Params, s: &str) -> Result<RingElem> {
    let bytes = hex::decode(s.trim()).map_err(|e| Error::Malformed(format!("hex: {e}")))?;
    let mut r = Reader::new(&bytes);
    let a = p.ring().decode_elem(&mut r)?;
    r.expect_end()?;
    Ok(a)
}
