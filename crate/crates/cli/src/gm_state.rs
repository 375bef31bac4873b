//! Persistent GM state: signer counter S and the append-only, hash-chained reg table.
//!
//! Payload: gpk digest ‖ u64 S ‖ u32 count ‖ count × (prev hash ‖ blob(entry)) ‖ H(head ‖ S).
//! Writes go to `<path>.tmp` and are renamed into place while `<path>.lock` is held.

use std::ffi::OsString;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::os::unix::fs::OpenOptionsExt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use ats_core::ats_scheme::{GmState, GroupPublicKey, RegEntry};
use ats_core::codec::{Reader, Writer};
use ats_core::dm_signature::SignerState;
use ats_core::{Error, Params, Result};
use sha2::{Digest, Sha256};

use crate::artifact::{seal, unseal, Kind};
use crate::exit::{Code, Failure};

/// Set to `after-temp-write` to abort between the temp write and the rename.
pub const FAULT_ENV: &str = "ATS_FAULT";

pub fn gpk_digest(gpk: &GroupPublicKey) -> [u8; 32] {
    let mut w = Writer::new();
    gpk.encode(&mut w);
    let mut h = Sha256::new();
    h.update(b"ats/gpk/v1");
    h.update(w.finish());
    h.finalize().into()
}

fn genesis(gpk_digest: &[u8; 32]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ats/gm-state/genesis");
    h.update(gpk_digest);
    h.finalize().into()
}

fn link(prev: &[u8; 32], record: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ats/gm-state/record");
    h.update(prev);
    h.update((record.len() as u64).to_le_bytes());
    h.update(record);
    h.finalize().into()
}

/// Trailer binding the chain head to S.
fn trailer(head: &[u8; 32], s: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ats/gm-state/head");
    h.update(head);
    h.update(s.to_le_bytes());
    h.finalize().into()
}

pub fn encode(p: &Params, gpk: &GroupPublicKey, state: &GmState) -> Vec<u8> {
    let gd = gpk_digest(gpk);
    let mut w = Writer::new();
    w.bytes(&gd);
    w.u64(state.signer.s);
    w.u32(state.reg.len() as u32);
    let mut head = genesis(&gd);
    for e in &state.reg {
        let mut rec = Writer::new();
        e.encode(p, &mut rec);
        let rec = rec.finish();
        w.bytes(&head);
        w.blob(&rec);
        head = link(&head, &rec);
    }
    w.bytes(&trailer(&head, state.signer.s));
    seal(Kind::GmState, &p.digest(), &w.finish())
}

/// Parses and checks the chain, dense indices and binding to `gpk`.
pub fn decode(gpk: &GroupPublicKey, bytes: &[u8]) -> Result<GmState> {
    let p = gpk.params();
    let (kind, digest, payload) = unseal(bytes)?;
    if kind != Kind::GmState {
        return Err(Error::Malformed("not a GM state file".into()));
    }
    if digest != p.digest() {
        return Err(Error::Malformed(
            "GM state was made for different parameters".into(),
        ));
    }
    let mut r = Reader::new(payload);
    let gd: [u8; 32] = r.array()?;
    if gd != gpk_digest(gpk) {
        return Err(Error::Malformed(
            "GM state belongs to a different group public key".into(),
        ));
    }
    let s = r.u64()?;
    let count = r.u32()? as u64;
    if count > s {
        return Err(Error::Malformed(format!(
            "reg has {count} records but S = {s}"
        )));
    }
    let mut head = genesis(&gd);
    let mut reg = Vec::new();
    for i in 0..count {
        let prev: [u8; 32] = r.array()?;
        if prev != head {
            return Err(Error::Malformed(format!("hash chain broken at record {i}")));
        }
        let rec = r.blob()?;
        let mut rr = Reader::new(rec);
        let e = RegEntry::decode(p, &mut rr)?;
        rr.expect_end()?;
        if e.index != i {
            return Err(Error::Malformed(format!(
                "record {i} carries index {}",
                e.index
            )));
        }
        head = link(&head, rec);
        reg.push(e);
    }
    let end: [u8; 32] = r.array()?;
    if end != trailer(&head, s) {
        return Err(Error::Malformed("hash chain head mismatch".into()));
    }
    r.expect_end()?;
    Ok(GmState {
        signer: SignerState { s },
        reg,
        allow_duplicates: false,
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `bytes` to a sibling temp file, syncs, then renames over `path`.
/// `faultable` writes honour the crash hook in [`FAULT_ENV`].
pub fn write_atomic(path: &Path, bytes: &[u8], mode: u32, faultable: bool) -> io::Result<()> {
    let tmp = with_suffix(path, ".tmp");
    let mut f = OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .mode(mode)
        .open(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    if faultable && std::env::var(FAULT_ENV).as_deref() == Ok("after-temp-write") {
        eprintln!("fault injected after temp write");
        std::process::abort();
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        File::open(dir)?.sync_all()?;
    }
    Ok(())
}

/// Advisory exclusive lock held for the lifetime of the value.
#[derive(Debug)]
pub struct StateLock {
    path: PathBuf,
}

impl StateLock {
    pub fn acquire(state: &Path) -> anyhow::Result<Self> {
        let path = with_suffix(state, ".lock");
        match OpenOptions::new()
            .write(true)
            .create_new(true)
            .mode(0o600)
            .open(&path)
        {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(Failure::new(
                Code::Lock,
                format!(
                    "GM state is locked ({} exists); remove it if no enroll is running",
                    path.display()
                ),
            )
            .into()),
            Err(e) => Err(e).with_context(|| format!("creating {}", path.display())),
        }
    }
}

impl Drop for StateLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn load(gpk: &GroupPublicKey, path: &Path) -> anyhow::Result<GmState> {
    let bytes = fs::read(path).with_context(|| format!("reading GM state {}", path.display()))?;
    decode(gpk, &bytes).with_context(|| format!("parsing GM state {}", path.display()))
}

pub fn store(gpk: &GroupPublicKey, path: &Path, state: &GmState) -> anyhow::Result<()> {
    write_atomic(path, &encode(gpk.params(), gpk, state), 0o600, true)
        .with_context(|| format!("writing GM state {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ats_core::ats_scheme::{ats_setup, enroll, gkeygen, ukeygen};
    use ats_core::ParamSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn small() -> Params {
        Params::new(&ParamSpec {
            n: 4,
            k: 6,
            b: 1,
            tags: vec![0, 1, 2],
            ..ParamSpec::default()
        })
        .unwrap()
    }

    fn populated() -> (GroupPublicKey, GmState) {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let pp = ats_setup(&small(), [1; 32]);
        let (gpk, ik, _) = gkeygen(&pp, &mut rng);
        let mut st = GmState::default();
        for tr in [true, false, true] {
            let u = ukeygen(&pp, &mut rng);
            enroll(&gpk, &ik, &mut st, &u.upk, tr, &mut rng).unwrap();
        }
        (gpk, st)
    }

    #[test]
    fn round_trip() {
        let (gpk, st) = populated();
        let bytes = encode(gpk.params(), &gpk, &st);
        assert_eq!(decode(&gpk, &bytes).unwrap(), st);
        assert_eq!(
            decode(&gpk, &encode(gpk.params(), &gpk, &GmState::default())).unwrap(),
            GmState::default()
        );
    }

    #[test]
    fn tampering_is_detected() {
        let (gpk, st) = populated();
        let bytes = encode(gpk.params(), &gpk, &st);
        // every single-byte change past the header is caught
        for i in 38..bytes.len() {
            let mut b = bytes.clone();
            b[i] ^= 1;
            assert!(decode(&gpk, &b).is_err(), "byte {i}");
        }
        let mut reordered = st.clone();
        reordered.reg.swap(0, 1);
        assert!(decode(&gpk, &encode(gpk.params(), &gpk, &reordered)).is_err());
    }

    #[test]
    fn bound_to_gpk() {
        let (gpk, st) = populated();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (other, _, _) = gkeygen(&gpk.pp, &mut rng);
        assert!(decode(&other, &encode(gpk.params(), &gpk, &st)).is_err());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gm.state");
        let l = StateLock::acquire(&path).unwrap();
        let e = StateLock::acquire(&path).unwrap_err();
        assert_eq!(crate::exit::classify(&e), Code::Lock);
        drop(l);
        StateLock::acquire(&path).unwrap();
    }
}
