//! Artifact codecs and command-level error handling.

mod support;

use std::os::unix::fs::PermissionsExt;
use std::sync::OnceLock;

use ats_cli::artifact::{elem_from_hex, elem_hex, Artifact, HEADER_LEN};
use ats_cli::gm_state;
use ats_core::ats_scheme::{
    ats_setup, enroll, gkeygen, GmState, GroupPublicKey, IssueKey, OpeningKey, PublicParams,
};
use ats_core::{ParamSpec, Params};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::Sandbox;

struct Fixture {
    pp: PublicParams,
    gpk: GroupPublicKey,
    ik: IssueKey,
    ok: OpeningKey,
}

fn small() -> Params {
    Params::new(&ParamSpec {
        n: 4,
        k: 6,
        b: 1,
        tags: vec![0, 1, 2, 3],
        ..ParamSpec::default()
    })
    .unwrap()
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pp = ats_setup(&small(), [3; 32]);
        let (gpk, ik, ok) = gkeygen(&pp, &mut rng);
        Fixture { pp, gpk, ik, ok }
    })
}

/// Small artifacts of every kind, one user enrolled.
fn artifacts(seed: u64, tr: bool) -> Vec<Artifact> {
    let f = fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = ats_core::ats_scheme::ukeygen(&f.pp, &mut rng);
    let mut st = GmState::default();
    let (cert, esc) = enroll(&f.gpk, &f.ik, &mut st, &u.upk, tr, &mut rng).unwrap();
    vec![
        Artifact::PublicParams(f.pp.clone()),
        Artifact::Gpk(f.gpk.clone()),
        Artifact::GmSecret(f.ik.clone(), f.ok.clone()),
        Artifact::Usk(u.usk),
        Artifact::Upk(u.upk),
        Artifact::Vk(f.gpk.vk.clone()),
        Artifact::Cert(cert),
        Artifact::Escrow(esc),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn artifacts_round_trip(seed in any::<u64>(), tr in any::<bool>()) {
        let p = small();
        for a in artifacts(seed, tr) {
            let bytes = a.to_bytes(&p);
            prop_assert_eq!(&bytes[..4], a.kind().magic());
            let back = Artifact::from_bytes(Some(&p), &bytes).unwrap();
            prop_assert_eq!(back.to_bytes(&p), bytes);
            prop_assert_eq!(back, a);
        }
    }

    #[test]
    fn mutated_files_never_panic(seed in any::<u64>(), which in 0usize..8, edits in prop::collection::vec((any::<prop::sample::Index>(), any::<u8>()), 1..4), cut in any::<prop::sample::Index>()) {
        let p = small();
        let bytes = artifacts(seed, true)[which].to_bytes(&p);
        let mut m = bytes.clone();
        for (i, v) in &edits {
            let i = i.index(m.len());
            m[i] = *v;
        }
        // anything that still parses re-encodes to exactly the same bytes
        if let Ok(a) = Artifact::from_bytes(Some(&p), &m) {
            prop_assert_eq!(a.to_bytes(&p), m.clone());
        }
        let short = &m[..cut.index(m.len())];
        prop_assert!(Artifact::from_bytes(Some(&p), short).is_err());
    }

    #[test]
    fn upk_hex_round_trips(seed in any::<u64>()) {
        let p = small();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = p.ring().sample_uniform(&mut rng);
        let h = elem_hex(&p, &a);
        prop_assert!(h.bytes().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
        prop_assert_eq!(elem_from_hex(&p, &h).unwrap(), a);
    }

    #[test]
    fn mutated_state_never_panics(pos in any::<prop::sample::Index>(), v in any::<u8>()) {
        let f = fixture();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = GmState::default();
        for tr in [true, false] {
            let u = ats_core::ats_scheme::ukeygen(&f.pp, &mut rng);
            enroll(&f.gpk, &f.ik, &mut st, &u.upk, tr, &mut rng).unwrap();
        }
        let bytes = gm_state::encode(f.gpk.params(), &f.gpk, &st);
        let mut m = bytes.clone();
        let i = pos.index(m.len());
        m[i] = v;
        match gm_state::decode(&f.gpk, &m) {
            Ok(back) => prop_assert!(m == bytes && back == st),
            Err(_) => prop_assert!(m != bytes),
        }
    }
}

#[test]
fn wrong_params_are_rejected() {
    let p = small();
    let other = Params::desk();
    for a in artifacts(1, true).into_iter().skip(2) {
        assert!(
            Artifact::from_bytes(Some(&other), &a.to_bytes(&p)).is_err(),
            "{:?}",
            a.kind()
        );
        assert!(Artifact::from_bytes(None, &a.to_bytes(&p)).is_err());
    }
    let gpk = Artifact::Gpk(fixture().gpk.clone()).to_bytes(&p);
    assert!(Artifact::from_bytes(None, &gpk).is_ok());
    assert!(Artifact::from_bytes(Some(&other), &gpk).is_err());
    assert_eq!(HEADER_LEN, 38);
}

fn group(sb: &Sandbox) {
    sb.expect(
        0,
        &[
            "setup",
            "--seed",
            "t",
            "--params",
            "4,6,1,31,16",
            "--tags",
            "0,1,2,3",
            "--out",
            "pp.ats",
        ],
    );
    sb.expect(
        0,
        &[
            "gkeygen",
            "--seed",
            "t",
            "--pp",
            "pp.ats",
            "--out",
            "gpk.ats",
            "--secret-out",
            "gm.key",
            "--gm-state",
            "gm.state",
            "--vk-out",
            "vk.ats",
        ],
    );
    sb.expect(
        0,
        &[
            "ukeygen",
            "--seed",
            "u",
            "--pp",
            "gpk.ats",
            "--out",
            "u.pk",
            "--secret-out",
            "u.sk",
        ],
    );
}

fn mode(sb: &Sandbox, name: &str) -> u32 {
    std::fs::metadata(sb.path(name))
        .unwrap()
        .permissions()
        .mode()
        & 0o777
}

#[test]
fn file_modes() {
    let sb = Sandbox::new();
    group(&sb);
    for (f, m) in [
        ("pp.ats", 0o644),
        ("gpk.ats", 0o644),
        ("vk.ats", 0o644),
        ("u.pk", 0o644),
        ("gm.key", 0o600),
        ("u.sk", 0o600),
        ("gm.state", 0o600),
    ] {
        assert_eq!(mode(&sb, f), m, "{f}");
    }
    assert_eq!(&sb.read("vk.ats")[..4], b"ATSV");
}

#[test]
fn gkeygen_refuses_existing_state() {
    let sb = Sandbox::new();
    group(&sb);
    let before = sb.read("gm.state");
    let r = sb.expect(
        2,
        &[
            "gkeygen",
            "--pp",
            "pp.ats",
            "--out",
            "g2.ats",
            "--secret-out",
            "k2",
            "--gm-state",
            "gm.state",
        ],
    );
    assert!(r.stderr.contains("already exists"), "{}", r.stderr);
    assert_eq!(sb.read("gm.state"), before);
}

#[test]
fn wrong_kind_and_mismatched_params_exit_2() {
    let sb = Sandbox::new();
    group(&sb);
    let enroll = |gpk: &str, upk: &str| {
        [
            "enroll",
            "--gpk",
            gpk,
            "--ik",
            "gm.key",
            "--gm-state",
            "gm.state",
            "--upk",
            upk,
            "--traceable",
            "1",
            "--cert-out",
            "c",
            "--escrow-out",
            "e",
        ]
        .map(String::from)
    };
    let run =
        |code, a: [String; 15]| sb.expect(code, &a.iter().map(String::as_str).collect::<Vec<_>>());
    // a secret key where the upk is expected
    let r = run(2, enroll("gpk.ats", "u.sk"));
    assert!(!r.stderr.is_empty());
    run(2, enroll("pp.ats", "u.pk"));
    // upk for desk-size parameters
    sb.expect(0, &["setup", "--seed", "d", "--out", "big.ats"]);
    sb.expect(
        0,
        &[
            "ukeygen",
            "--pp",
            "big.ats",
            "--out",
            "big.pk",
            "--secret-out",
            "big.sk",
        ],
    );
    run(2, enroll("gpk.ats", "big.pk"));
    assert!(!sb.path("c").exists());
    run(0, enroll("gpk.ats", "u.pk"));
    sb.expect(
        2,
        &[
            "account", "--gpk", "gpk.ats", "--cert", "e", "--escrow", "c", "--tr", "1",
        ],
    );
    sb.expect(
        2,
        &[
            "verify",
            "--gpk",
            "gpk.ats",
            "--message-file",
            "missing",
            "--sig",
            "c",
        ],
    );
    sb.expect(2, &["frobnicate"]);
    sb.expect(2, &["enroll", "--gpk", "gpk.ats"]);
    let r = sb.expect(2, &["setup", "--params", "4,6,1", "--out", "x"]);
    assert!(r.stderr.contains("n,k,B,beta,kappa"), "{}", r.stderr);
}

#[test]
fn allow_duplicate_flag() {
    let sb = Sandbox::new();
    group(&sb);
    let args = |extra: &[&'static str]| {
        let mut v = vec![
            "enroll",
            "--gpk",
            "gpk.ats",
            "--ik",
            "gm.key",
            "--gm-state",
            "gm.state",
            "--upk",
            "u.pk",
            "--traceable",
            "0",
            "--cert-out",
            "c",
            "--escrow-out",
            "e",
        ];
        v.extend_from_slice(extra);
        v
    };
    sb.expect(0, &args(&[]));
    sb.expect(3, &args(&[]));
    assert_eq!(
        sb.expect(0, &args(&["--allow-duplicate"])).line(),
        "ENROLLED index=1 tr=0"
    );
}

#[test]
fn json_reports() {
    let sb = Sandbox::new();
    group(&sb);
    let r = sb.expect(
        0,
        &[
            "--json",
            "enroll",
            "--gpk",
            "gpk.ats",
            "--ik",
            "gm.key",
            "--gm-state",
            "gm.state",
            "--upk",
            "u.pk",
            "--traceable",
            "1",
            "--cert-out",
            "c",
            "--escrow-out",
            "e",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(r.line()).unwrap();
    assert_eq!(v["index"], 0);
    let r = sb.expect(
        1,
        &[
            "--json", "account", "--gpk", "gpk.ats", "--cert", "c", "--escrow", "e", "--tr", "0",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(r.line()).unwrap();
    assert_eq!(v["result"], "FAIL");
}
