use super::*;
use crate::koe::koe_dec;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

struct Group {
    gpk: GroupPublicKey,
    ik: IssueKey,
    ok: OpeningKey,
    sk2: KoeSecretKey,
    state: GmState,
}

fn group(seed: u8) -> (Group, ChaCha20Rng) {
    let p = Params::desk();
    let pp = ats_setup(&p, [seed; 32]);
    let mut rng = ChaCha20Rng::seed_from_u64(seed as u64);
    let (gpk, ik, ok, sk2) = gkeygen_with_second_key(&pp, &mut rng);
    (
        Group {
            gpk,
            ik,
            ok,
            sk2,
            state: GmState::default(),
        },
        rng,
    )
}

#[test]
fn setup_is_deterministic_and_well_formed() {
    let p = Params::desk();
    let ring = p.ring();
    assert_eq!(ats_setup(&p, [7; 32]), ats_setup(&p, [7; 32]));
    assert_ne!(ats_setup(&p, [7; 32]), ats_setup(&p, [8; 32]));
    let (pp, sec) = setup_with_secrets(&p, [7; 32]);
    for i in 0..2 {
        let e = ring.sub_vec(&pp.base[i].b, &ring.scale_vec(&sec.s[i], &pp.base[i].a));
        assert_eq!(e, sec.e[i]);
        assert!(vec_inf_norm(&e) <= p.b);
    }
    let mut w = Writer::new();
    pp.encode(&mut w);
    let bytes = w.finish();
    let back = PublicParams::decode(&mut Reader::new(&bytes)).unwrap();
    assert_eq!(back, pp);
    assert_eq!(back.params.digest(), p.digest());
}

#[test]
fn keys_are_consistent() {
    let (g, mut rng) = group(1);
    let p = g.gpk.params().clone();
    let ring = p.ring();
    let u = ukeygen(&g.gpk.pp, &mut rng);
    assert_eq!(ring.dot(&g.gpk.pp.bmat, &u.usk), u.upk);
    assert!(vec_inf_norm(&u.usk) <= 1);
    let e = ring.sub_vec(&g.gpk.gm[0].b, &ring.scale_vec(&g.ok.s1, &g.gpk.gm[0].a));
    assert_eq!(e, g.ok.e1);
    let m = ring.sample_uniform_vec(&mut rng, p.m_s);
    let mut st = SignerState::default();
    let sig = dm_sign(&p, &g.gpk.vk, &g.ik.0, &mut st, &m, &mut rng).unwrap();
    assert!(dm_verify(&p, &g.gpk.vk, &m, &sig));
}

#[test]
fn enroll_and_account() {
    let (mut g, mut rng) = group(2);
    for (i, tr) in [true, false, true].into_iter().enumerate() {
        let u = ukeygen(&g.gpk.pp, &mut rng);
        let (cert, esc) = enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, tr, &mut rng).unwrap();
        assert_eq!(g.state.reg[i].index, i as u64);
        assert_eq!(g.state.signer.s, i as u64 + 1);
        assert!(ats_account(&g.gpk, &cert, &esc, tr));
        assert!(!ats_account(&g.gpk, &cert, &esc, !tr));
        let mut bad = esc.clone();
        bad.rnd[0].g = g.gpk.params().ring().neg(&bad.rnd[0].g);
        if bad != esc {
            assert!(!ats_account(&g.gpk, &cert, &bad, tr));
        }
        assert_eq!(
            ats_account(&g.gpk, &cert, &esc, tr),
            ats_account(&g.gpk, &cert, &esc, tr)
        );
    }
}

#[test]
fn duplicate_policy() {
    let (mut g, mut rng) = group(3);
    let u = ukeygen(&g.gpk.pp, &mut rng);
    enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, true, &mut rng).unwrap();
    let before = g.state.clone();
    assert_eq!(
        enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, true, &mut rng).unwrap_err(),
        Error::DuplicateUser(0)
    );
    assert_eq!(g.state, before);
    g.state.allow_duplicates = true;
    enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, false, &mut rng).unwrap();
    assert_eq!(g.state.lookup(&u.upk).unwrap().index, 0);
}

#[test]
fn exhausted_state_leaves_reg_untouched() {
    let (mut g, mut rng) = group(4);
    g.state.signer.s = 1 << g.gpk.params().c_d();
    let u = ukeygen(&g.gpk.pp, &mut rng);
    let err = enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, true, &mut rng).unwrap_err();
    assert!(matches!(err, Error::StateExhausted(_)));
    assert!(g.state.reg.is_empty());
}

#[test]
fn lifecycle_traceable_and_not() {
    let (mut g, mut rng) = group(5);
    let p = g.gpk.params().clone();
    let users: Vec<_> = (0..2).map(|_| ukeygen(&g.gpk.pp, &mut rng)).collect();
    let certs: Vec<_> = users
        .iter()
        .zip([true, false])
        .map(|(u, tr)| {
            enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, tr, &mut rng)
                .unwrap()
                .0
        })
        .collect();
    let msg = b"hello group";
    for (i, u) in users.iter().enumerate() {
        let sig = ats_sign(&g.gpk, &certs[i], &u.usk, msg, &mut rng).unwrap();
        assert!(ats_verify(&g.gpk, msg, &sig));
        assert!(!ats_verify(&g.gpk, b"other", &sig));
        // Naor-Yung consistency
        if i == 0 {
            assert_eq!(
                koe_dec(&p, &KoeSecretKey { s: g.ok.s1.clone() }, &sig.ct[0]),
                u.upk
            );
            assert_eq!(koe_dec(&p, &g.sk2, &sig.ct[1]), u.upk);
        }
        let bytes = sig.to_bytes(&p);
        assert_eq!(
            GroupSignature::decode(&p, &mut Reader::new(&bytes)).unwrap(),
            sig
        );
        assert!(GroupSignature::decode(&p, &mut Reader::new(&bytes[..bytes.len() - 1])).is_err());

        match ats_open(&g.gpk, &g.ok, &g.state.reg, msg, &sig, &mut rng).unwrap() {
            OpenResult::Opened {
                p: pv,
                index,
                proof,
            } => {
                assert_eq!(i, 0);
                assert_eq!(pv, u.upk);
                assert_eq!(index, 0);
                assert!(ats_judge(&g.gpk, msg, &sig, Some((&pv, &proof))));
                assert!(!ats_judge(&g.gpk, msg, &sig, Some((&users[1].upk, &proof))));
                assert!(!ats_judge(&g.gpk, b"other", &sig, Some((&pv, &proof))));
            }
            OpenResult::Bottom => assert_eq!(i, 1),
        }
        assert!(!ats_judge(&g.gpk, msg, &sig, None));
    }
}

#[test]
fn swapped_ciphertext_breaks_verification() {
    let (mut g, mut rng) = group(6);
    let u = ukeygen(&g.gpk.pp, &mut rng);
    let (cert, _) = enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, true, &mut rng).unwrap();
    let s1 = ats_sign(&g.gpk, &cert, &u.usk, b"m", &mut rng).unwrap();
    let s2 = ats_sign(&g.gpk, &cert, &u.usk, b"m", &mut rng).unwrap();
    assert_ne!(s1, s2);
    let mixed = GroupSignature {
        proof: s1.proof.clone(),
        ct: [s2.ct[0].clone(), s1.ct[1].clone()],
    };
    assert!(!ats_verify(&g.gpk, b"m", &mixed));
    assert_eq!(
        ats_open(&g.gpk, &g.ok, &g.state.reg, b"m", &mixed, &mut rng).unwrap_err(),
        Error::InvalidSignature
    );
}

#[test]
fn wrong_usk_refused() {
    let (mut g, mut rng) = group(7);
    let u = ukeygen(&g.gpk.pp, &mut rng);
    let v = ukeygen(&g.gpk.pp, &mut rng);
    let (cert, _) = enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, true, &mut rng).unwrap();
    assert!(ats_sign(&g.gpk, &cert, &v.usk, b"m", &mut rng).is_err());
}

#[test]
fn artifact_round_trips() {
    let (mut g, mut rng) = group(8);
    let p = g.gpk.params().clone();
    let u = ukeygen(&g.gpk.pp, &mut rng);
    let (cert, esc) = enroll(&g.gpk, &g.ik, &mut g.state, &u.upk, false, &mut rng).unwrap();
    macro_rules! rt {
        ($x:expr, $enc:expr, $dec:expr) => {{
            let mut w = Writer::new();
            $enc(&$x, &mut w);
            let b = w.finish();
            let mut r = Reader::new(&b);
            assert_eq!($dec(&mut r).unwrap(), $x);
            r.expect_end().unwrap();
        }};
    }
    rt!(
        g.gpk,
        |x: &GroupPublicKey, w| x.encode(w),
        GroupPublicKey::decode
    );
    rt!(g.ik, |x: &IssueKey, w| x.encode(&p, w), |r| {
        IssueKey::decode(&p, r)
    });
    rt!(g.ok, |x: &OpeningKey, w| x.encode(&p, w), |r| {
        OpeningKey::decode(&p, r)
    });
    rt!(cert, |x: &Certificate, w| x.encode(&p, w), |r| {
        Certificate::decode(&p, r)
    });
    rt!(esc, |x: &EscrowWitness, w| x.encode(&p, w), |r| {
        EscrowWitness::decode(&p, r)
    });
    rt!(g.state.reg[0], |x: &RegEntry, w| x.encode(&p, w), |r| {
        RegEntry::decode(&p, r)
    });
}
