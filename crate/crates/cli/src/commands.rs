//! `ats` subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ats_core::ats_scheme::{
    ats_account, ats_judge, ats_open, ats_setup, ats_sign, ats_verify, enroll, gkeygen, ukeygen,
    GmState, GroupPublicKey, OpenResult, PublicParams,
};
use ats_core::{ParamSpec, Params};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::artifact::{elem_from_hex, elem_hex, Artifact};
use crate::exit::{Code, Failure};
use crate::gm_state::{self, write_atomic, StateLock};

/// Overrides `--seed` when set.
pub const SEED_ENV: &str = "ATS_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "ats",
    version,
    about = "Lattice-based accountable tracing signatures"
)]
pub struct Cli {
    /// Emit one JSON object instead of the plain result line.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate public parameters (B and the escrow-free keys).
    Setup(SetupArgs),
    /// Generate the group public key, issuing and opening keys, and an empty GM state.
    Gkeygen(GkeygenArgs),
    /// Generate a user key pair.
    Ukeygen(UkeygenArgs),
    /// Certify a user and append it to the registration table.
    Enroll(EnrollArgs),
    /// Check that a certificate was issued for the given tr.
    Account(AccountArgs),
    /// Sign a message as a group member.
    Sign(SignArgs),
    /// Verify a group signature.
    Verify(VerifyArgs),
    /// Recover the signer's upk and prove it.
    Open(OpenArgs),
    /// Check an opening.
    Judge(JudgeArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Deterministic randomness; ATS_SEED takes precedence.
    #[arg(long)]
    pub seed: Option<String>,
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// n,k,B,beta,kappa
    #[arg(long, default_value = "8,9,2,31,16")]
    pub params: String,
    /// Tag lengths c_0,...,c_d (default 0,2,4,8,16).
    #[arg(long, value_delimiter = ',')]
    pub tags: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GkeygenArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// Public parameters from `setup`.
    #[arg(long)]
    pub pp: PathBuf,
    /// Group public key.
    #[arg(long)]
    pub out: PathBuf,
    /// Issuing and opening keys (mode 0600).
    #[arg(long)]
    pub secret_out: PathBuf,
    /// New GM state file; must not exist.
    #[arg(long)]
    pub gm_state: PathBuf,
    /// Also export the signature verification key.
    #[arg(long)]
    pub vk_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UkeygenArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    /// Public parameters or group public key.
    #[arg(long)]
    pub pp: PathBuf,
    /// User public key.
    #[arg(long)]
    pub out: PathBuf,
    /// User secret key (mode 0600).
    #[arg(long)]
    pub secret_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub gpk: PathBuf,
    /// GM secret key file.
    #[arg(long)]
    pub ik: PathBuf,
    #[arg(long)]
    pub gm_state: PathBuf,
    #[arg(long)]
    pub upk: PathBuf,
    #[arg(long, value_parser = bit, action = clap::ArgAction::Set)]
    pub traceable: bool,
    #[arg(long)]
    pub cert_out: PathBuf,
    #[arg(long)]
    pub escrow_out: PathBuf,
    /// Accept an upk that is already enrolled.
    #[arg(long)]
    pub allow_duplicate: bool,
}

#[derive(Debug, Args)]
pub struct AccountArgs {
    #[arg(long)]
    pub gpk: PathBuf,
    #[arg(long)]
    pub cert: PathBuf,
    #[arg(long)]
    pub escrow: PathBuf,
    #[arg(long, value_parser = bit, action = clap::ArgAction::Set)]
    pub tr: bool,
}

#[derive(Debug, Args)]
pub struct SignArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub gpk: PathBuf,
    #[arg(long)]
    pub cert: PathBuf,
    #[arg(long)]
    pub usk: PathBuf,
    #[arg(long)]
    pub message_file: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub gpk: PathBuf,
    #[arg(long)]
    pub message_file: PathBuf,
    #[arg(long)]
    pub sig: PathBuf,
}

#[derive(Debug, Args)]
pub struct OpenArgs {
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub gpk: PathBuf,
    /// GM secret key file.
    #[arg(long)]
    pub ok: PathBuf,
    #[arg(long)]
    pub gm_state: PathBuf,
    #[arg(long)]
    pub message_file: PathBuf,
    #[arg(long)]
    pub sig: PathBuf,
    /// Where to write the opening proof.
    #[arg(long)]
    pub proof_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    #[arg(long)]
    pub gpk: PathBuf,
    #[arg(long)]
    pub message_file: PathBuf,
    #[arg(long)]
    pub sig: PathBuf,
    /// Hex upk printed by `open`, or BOTTOM.
    #[arg(long)]
    pub opened_upk: String,
    #[arg(long)]
    pub open_proof: Option<PathBuf>,
}

fn bit(s: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("expected 0 or 1, got {s:?}")),
    }
}

/// Parses "n,k,B,beta,kappa".
pub fn parse_params(s: &str, tags: Option<&[usize]>) -> anyhow::Result<Params> {
    let f: Vec<&str> = s.split(',').map(str::trim).collect();
    if f.len() != 5 {
        bail!("--params expects n,k,B,beta,kappa (got {s:?})");
    }
    let num = |i: usize, name: &str| -> anyhow::Result<i64> {
        f[i].parse()
            .with_context(|| format!("--params: {name} = {:?} is not an integer", f[i]))
    };
    let nonneg = |v: i64, name: &str| -> anyhow::Result<usize> {
        usize::try_from(v).map_err(|_| anyhow::anyhow!("--params: {name} must be non-negative"))
    };
    let mut spec = ParamSpec {
        n: nonneg(num(0, "n")?, "n")?,
        k: nonneg(num(1, "k")?, "k")?,
        b: num(2, "B")?,
        beta: num(3, "beta")?,
        kappa: nonneg(num(4, "kappa")?, "kappa")?,
        ..ParamSpec::default()
    };
    if let Some(t) = tags {
        spec.tags = t.to_vec();
    }
    Ok(Params::new(&spec)?)
}

fn rng_for(label: &str, seed: &SeedArg) -> ChaCha20Rng {
    match seed_material(seed) {
        Some(s) => ChaCha20Rng::from_seed(derive_seed(label, &s)),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn seed_material(seed: &SeedArg) -> Option<String> {
    std::env::var(SEED_ENV)
        .ok()
        .filter(|s| !s.is_empty())
        .or_else(|| seed.seed.clone())
}

fn derive_seed(label: &str, s: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"ats/cli/seed");
    h.update((label.len() as u64).to_le_bytes());
    h.update(label);
    h.update(s);
    h.finalize().into()
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path, p: Option<&Params>) -> anyhow::Result<Artifact> {
    Artifact::from_bytes(p, &read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn wrong(path: &Path, what: &str) -> anyhow::Error {
    Failure::new(
        Code::Malformed,
        format!("{} is not a {what} file", path.display()),
    )
    .into()
}

macro_rules! load_as {
    ($path:expr, $p:expr, $what:literal, $pat:pat => $v:expr) => {
        match load($path, $p)? {
            $pat => $v,
            _ => return Err(wrong($path, $what)),
        }
    };
}

fn load_gpk(path: &Path) -> anyhow::Result<GroupPublicKey> {
    Ok(load_as!(path, None, "group public key", Artifact::Gpk(g) => g))
}

fn load_pp(path: &Path) -> anyhow::Result<PublicParams> {
    Ok(
        load_as!(path, None, "public parameters", Artifact::PublicParams(pp) | Artifact::Gpk(GroupPublicKey { pp, .. }) => pp),
    )
}

fn save(path: &Path, p: &Params, a: &Artifact) -> anyhow::Result<()> {
    let mode = if a.is_secret() { 0o600 } else { 0o644 };
    write_atomic(path, &a.to_bytes(p), mode, false)
        .with_context(|| format!("writing {}", path.display()))
}

/// Outcome of a command: exit code, plain line (if any) and JSON fields.
pub struct Report {
    pub code: Code,
    pub line: Option<String>,
    pub fields: Value,
}

impl Report {
    fn quiet(fields: Value) -> Self {
        Self {
            code: Code::Ok,
            line: None,
            fields,
        }
    }

    fn verdict(ok: bool) -> Self {
        let (code, line) = if ok {
            (Code::Ok, "OK")
        } else {
            (Code::Negative, "FAIL")
        };
        Self {
            code,
            line: Some(line.into()),
            fields: json!({ "valid": ok }),
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<Code> {
    let (name, rep) = match &cli.command {
        Command::Setup(a) => ("setup", setup(a)?),
        Command::Gkeygen(a) => ("gkeygen", gkeygen_cmd(a)?),
        Command::Ukeygen(a) => ("ukeygen", ukeygen_cmd(a)?),
        Command::Enroll(a) => ("enroll", enroll_cmd(a)?),
        Command::Account(a) => ("account", account(a)?),
        Command::Sign(a) => ("sign", sign(a)?),
        Command::Verify(a) => ("verify", verify(a)?),
        Command::Open(a) => ("open", open(a)?),
        Command::Judge(a) => ("judge", judge(a)?),
    };
    if cli.json {
        let mut v = json!({ "command": name, "exit": rep.code.as_i32() });
        if let Some(l) = &rep.line {
            v["result"] = json!(l);
        }
        if let Value::Object(m) = rep.fields {
            v.as_object_mut().expect("object").extend(m);
        }
        writeln!(out, "{v}")?;
    } else if let Some(l) = &rep.line {
        writeln!(out, "{l}")?;
    }
    Ok(rep.code)
}

fn setup(a: &SetupArgs) -> anyhow::Result<Report> {
    let p = parse_params(&a.params, a.tags.as_deref())?;
    let seed = match seed_material(&a.seed) {
        Some(s) => derive_seed("setup", &s),
        None => rand::Rng::gen(&mut ChaCha20Rng::from_entropy()),
    };
    let pp = ats_setup(&p, seed);
    save(&a.out, &p, &Artifact::PublicParams(pp))?;
    Ok(Report::quiet(
        json!({ "params_digest": hex::encode(p.digest()) }),
    ))
}

fn gkeygen_cmd(a: &GkeygenArgs) -> anyhow::Result<Report> {
    let pp = load_pp(&a.pp)?;
    let p = pp.params.clone();
    if a.gm_state.exists() {
        return Err(Failure::new(
            Code::Malformed,
            format!("{} already exists", a.gm_state.display()),
        )
        .into());
    }
    let mut rng = rng_for("gkeygen", &a.seed);
    let (gpk, ik, ok) = gkeygen(&pp, &mut rng);
    let _lock = StateLock::acquire(&a.gm_state)?;
    save(&a.secret_out, &p, &Artifact::GmSecret(ik, ok))?;
    if let Some(v) = &a.vk_out {
        save(v, &p, &Artifact::Vk(gpk.vk.clone()))?;
    }
    gm_state::store(&gpk, &a.gm_state, &GmState::default())?;
    save(&a.out, &p, &Artifact::Gpk(gpk))?;
    Ok(Report::quiet(json!({})))
}

fn ukeygen_cmd(a: &UkeygenArgs) -> anyhow::Result<Report> {
    let pp = load_pp(&a.pp)?;
    let p = &pp.params;
    let u = ukeygen(&pp, &mut rng_for("ukeygen", &a.seed));
    save(&a.secret_out, p, &Artifact::Usk(u.usk))?;
    save(&a.out, p, &Artifact::Upk(u.upk.clone()))?;
    Ok(Report::quiet(json!({ "upk": elem_hex(p, &u.upk) })))
}

fn enroll_cmd(a: &EnrollArgs) -> anyhow::Result<Report> {
    let gpk = load_gpk(&a.gpk)?;
    let p = gpk.params().clone();
    let ik = load_as!(&a.ik, Some(&p), "GM secret key", Artifact::GmSecret(ik, _) => ik);
    let upk = load_as!(&a.upk, Some(&p), "user public key", Artifact::Upk(u) => u);
    let _lock = StateLock::acquire(&a.gm_state)?;
    let mut state = gm_state::load(&gpk, &a.gm_state)?;
    state.allow_duplicates = a.allow_duplicate;
    let (cert, escrow) = enroll(
        &gpk,
        &ik,
        &mut state,
        &upk,
        a.traceable,
        &mut rng_for("enroll", &a.seed),
    )?;
    let index = state.reg.last().expect("just enrolled").index;
    // Registration is committed before the certificate leaves the GM.
    gm_state::store(&gpk, &a.gm_state, &state)?;
    save(&a.cert_out, &p, &Artifact::Cert(cert))?;
    save(&a.escrow_out, &p, &Artifact::Escrow(escrow))?;
    let tr = a.traceable as u8;
    Ok(Report {
        code: Code::Ok,
        line: Some(format!("ENROLLED index={index} tr={tr}")),
        fields: json!({ "index": index, "tr": tr }),
    })
}

fn account(a: &AccountArgs) -> anyhow::Result<Report> {
    let gpk = load_gpk(&a.gpk)?;
    let p = gpk.params();
    let cert = load_as!(&a.cert, Some(p), "certificate", Artifact::Cert(c) => c);
    let esc = load_as!(&a.escrow, Some(p), "escrow", Artifact::Escrow(e) => e);
    let tr = a.tr as u8;
    Ok(if ats_account(&gpk, &cert, &esc, a.tr) {
        Report {
            code: Code::Ok,
            line: Some(format!("ACCOUNT-OK tr={tr}")),
            fields: json!({ "valid": true, "tr": tr }),
        }
    } else {
        Report {
            code: Code::Negative,
            line: Some("FAIL".into()),
            fields: json!({ "valid": false, "tr": tr }),
        }
    })
}

fn sign(a: &SignArgs) -> anyhow::Result<Report> {
    let gpk = load_gpk(&a.gpk)?;
    let p = gpk.params().clone();
    let cert = load_as!(&a.cert, Some(&p), "certificate", Artifact::Cert(c) => c);
    let usk = load_as!(&a.usk, Some(&p), "user secret key", Artifact::Usk(x) => x);
    let msg = read(&a.message_file)?;
    let sig = ats_sign(&gpk, &cert, &usk, &msg, &mut rng_for("sign", &a.seed))?;
    let art = Artifact::Signature(sig);
    save(&a.out, &p, &art)?;
    Ok(Report::quiet(json!({ "bytes": art.to_bytes(&p).len() })))
}

fn verify(a: &VerifyArgs) -> anyhow::Result<Report> {
    let gpk = load_gpk(&a.gpk)?;
    let sig = load_as!(&a.sig, Some(gpk.params()), "signature", Artifact::Signature(s) => s);
    let msg = read(&a.message_file)?;
    Ok(Report::verdict(ats_verify(&gpk, &msg, &sig)))
}

fn open(a: &OpenArgs) -> anyhow::Result<Report> {
    let gpk = load_gpk(&a.gpk)?;
    let p = gpk.params().clone();
    let ok = load_as!(&a.ok, Some(&p), "GM secret key", Artifact::GmSecret(_, ok) => ok);
    let sig = load_as!(&a.sig, Some(&p), "signature", Artifact::Signature(s) => s);
    let msg = read(&a.message_file)?;
    let state = gm_state::load(&gpk, &a.gm_state)?;
    match ats_open(
        &gpk,
        &ok,
        &state.reg,
        &msg,
        &sig,
        &mut rng_for("open", &a.seed),
    ) {
        Err(ats_core::Error::InvalidSignature) => Ok(Report::verdict(false)),
        Err(e) => Err(e.into()),
        Ok(OpenResult::Bottom) => Ok(Report {
            code: Code::Ok,
            line: Some("BOTTOM".into()),
            fields: json!({ "upk": null }),
        }),
        Ok(OpenResult::Opened {
            p: pv,
            index,
            proof,
        }) => {
            if let Some(path) = &a.proof_out {
                save(path, &p, &Artifact::OpenProof(proof))?;
            }
            let h = elem_hex(&p, &pv);
            Ok(Report {
                code: Code::Ok,
                line: Some(h.clone()),
                fields: json!({ "upk": h, "index": index }),
            })
        }
    }
}

fn judge(a: &JudgeArgs) -> anyhow::Result<Report> {
    let gpk = load_gpk(&a.gpk)?;
    let p = gpk.params().clone();
    let sig = load_as!(&a.sig, Some(&p), "signature", Artifact::Signature(s) => s);
    let msg = read(&a.message_file)?;
    if a.opened_upk.trim() == "BOTTOM" {
        return Ok(Report::verdict(ats_judge(&gpk, &msg, &sig, None)));
    }
    let pv = elem_from_hex(&p, &a.opened_upk).context("--opened-upk")?;
    let Some(path) = &a.open_proof else {
        bail!("--open-proof is required unless --opened-upk is BOTTOM");
    };
    let proof = load_as!(path, Some(&p), "open proof", Artifact::OpenProof(pr) => pr);
    Ok(Report::verdict(ats_judge(
        &gpk,
        &msg,
        &sig,
        Some((&pv, &proof)),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_flag() {
        assert_eq!(parse_params("8,9,2,31,16", None).unwrap(), Params::desk());
        let e = parse_params("6,9,2,31,16", None).unwrap_err();
        assert_eq!(crate::exit::classify(&e), Code::Malformed);
        assert!(e.to_string().contains("power of two"), "{e}");
        let e = parse_params("8,9,3,31,16", None).unwrap_err();
        assert!(e.to_string().contains("3*n^2*B^3 <= ceil(q/10)"), "{e}");
        assert!(parse_params("8,9,2,31", None).is_err());
        assert!(parse_params("8,x,2,31,16", None).is_err());
        assert_eq!(
            parse_params("4,6,1,31,16", Some(&[0, 1])).unwrap().tags,
            vec![0, 1]
        );
    }

    #[test]
    fn seeds_are_domain_separated() {
        assert_ne!(derive_seed("ukeygen", "1"), derive_seed("enroll", "1"));
        assert_ne!(derive_seed("a", "bc"), derive_seed("ab", "c"));
        assert_eq!(derive_seed("sign", "x"), derive_seed("sign", "x"));
    }

    #[test]
    fn bit_flag() {
        assert_eq!(bit("0"), Ok(false));
        assert_eq!(bit("1"), Ok(true));
        assert!(bit("2").is_err());
    }
}
