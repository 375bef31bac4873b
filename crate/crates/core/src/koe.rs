//! Key-oblivious encryption: RLWE keys that can be publicly re-randomized.

use rand::Rng;

use crate::codec::{Reader, Writer};
use crate::decomp::{apply_h, default_seq, rdec_b_vec_tau};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::ring_arith::{vec_inf_norm, Ring, RingElem, RingVec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoePublicKey {
    pub a: RingVec,
    pub b: RingVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoeSecretKey {
    pub s: RingElem,
}

/// (g, e1, e2); also the per-key half of an escrow witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoeRandomizer {
    pub g: RingElem,
    pub e1: RingVec,
    pub e2: RingVec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoeCiphertext {
    pub c1: RingVec,
    pub c2: RingVec,
}

impl KoeRandomizer {
    pub fn sample<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> Self {
        let r = params.ring();
        Self {
            g: r.sample_chi(rng, params.b),
            e1: r.sample_chi_vec(rng, params.b, params.ell),
            e2: r.sample_chi_vec(rng, params.b, params.ell),
        }
    }

    pub fn norm(&self) -> i64 {
        self.g
            .inf_norm()
            .max(vec_inf_norm(&self.e1))
            .max(vec_inf_norm(&self.e2))
    }

    fn check(&self, params: &Params) -> Result<()> {
        if self.e1.len() != params.ell || self.e2.len() != params.ell {
            return Err(Error::Shape(format!(
                "randomizer noise vectors must have length {}",
                params.ell
            )));
        }
        if self.norm() > params.b {
            return Err(Error::Domain(format!(
                "randomizer norm {} exceeds B = {}",
                self.norm(),
                params.b
            )));
        }
        Ok(())
    }

    pub fn encode(&self, ring: &Ring, w: &mut Writer) {
        ring.encode_elem(w, &self.g);
        ring.encode_vec(w, &self.e1);
        ring.encode_vec(w, &self.e2);
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        let ring = params.ring();
        let out = Self {
            g: ring.decode_elem(r)?,
            e1: ring.decode_vec(r, params.ell)?,
            e2: ring.decode_vec(r, params.ell)?,
        };
        out.check(params)?;
        Ok(out)
    }
}

impl KoePublicKey {
    pub fn encode(&self, ring: &Ring, w: &mut Writer) {
        ring.encode_vec(w, &self.a);
        ring.encode_vec(w, &self.b);
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        let ring = params.ring();
        Ok(Self {
            a: ring.decode_vec(r, params.ell)?,
            b: ring.decode_vec(r, params.ell)?,
        })
    }
}

impl KoeCiphertext {
    pub fn encode(&self, ring: &Ring, w: &mut Writer) {
        ring.encode_vec(w, &self.c1);
        ring.encode_vec(w, &self.c2);
    }

    pub fn decode(params: &Params, r: &mut Reader) -> Result<Self> {
        let ring = params.ring();
        Ok(Self {
            c1: ring.decode_vec(r, params.ell)?,
            c2: ring.decode_vec(r, params.ell)?,
        })
    }
}

/// Key pair from an explicit secret and noise (used by setup and tests).
pub fn koe_keygen_from(
    params: &Params,
    a: RingVec,
    s: RingElem,
    e: &[RingElem],
) -> (KoePublicKey, KoeSecretKey) {
    let r = params.ring();
    let b = a
        .iter()
        .zip(e)
        .map(|(ai, ei)| r.add(&r.mul(ai, &s), ei))
        .collect();
    (KoePublicKey { a, b }, KoeSecretKey { s })
}

pub fn koe_keygen<R: Rng + ?Sized>(params: &Params, rng: &mut R) -> (KoePublicKey, KoeSecretKey) {
    let r = params.ring();
    let s = r.sample_chi(rng, params.b);
    let e = r.sample_chi_vec(rng, params.b, params.ell);
    let a = r.sample_uniform_vec(rng, params.ell);
    koe_keygen_from(params, a, s, &e)
}

/// (a·g + e1, b·g + e2); deterministic in its inputs.
pub fn koe_keyrand(
    params: &Params,
    pk: &KoePublicKey,
    rnd: &KoeRandomizer,
) -> Result<KoePublicKey> {
    rnd.check(params)?;
    let r = params.ring();
    Ok(KoePublicKey {
        a: r.add_vec(&r.scale_vec(&rnd.g, &pk.a), &rnd.e1),
        b: r.add_vec(&r.scale_vec(&rnd.g, &pk.b), &rnd.e2),
    })
}

/// Sampling wrapper returning the randomness alongside the new key.
pub fn koe_keyrand_sampled<R: Rng + ?Sized>(
    params: &Params,
    pk: &KoePublicKey,
    rng: &mut R,
) -> (KoePublicKey, KoeRandomizer) {
    let rnd = KoeRandomizer::sample(params, rng);
    (
        koe_keyrand(params, pk, &rnd).expect("sampled randomizer is bounded"),
        rnd,
    )
}

/// ⌊q/4⌋·rdec(p) as a ring vector of length ℓ.
pub fn scaled_message(params: &Params, p: &RingElem) -> RingVec {
    let r = params.ring();
    let t: Vec<i32> = rdec_b_vec_tau(std::slice::from_ref(p), &default_seq(&r))
        .expect("rdec is total")
        .into_iter()
        .map(|x| x as i32 * params.q_quarter() as i32)
        .collect();
    r.tau_inv(&t).unwrap()
}

pub fn koe_enc(
    params: &Params,
    pk: &KoePublicKey,
    p: &RingElem,
    rnd: &KoeRandomizer,
) -> Result<KoeCiphertext> {
    rnd.check(params)?;
    let r = params.ring();
    let msg = scaled_message(params, p);
    Ok(KoeCiphertext {
        c1: r.add_vec(&r.scale_vec(&rnd.g, &pk.a), &rnd.e1),
        c2: r.add_vec(&r.add_vec(&r.scale_vec(&rnd.g, &pk.b), &rnd.e2), &msg),
    })
}

/// Nearest of {−⌊q/4⌋, 0, ⌊q/4⌋} to y in centered distance; ties prefer 0, then +1.
pub fn round_trit(y: i64, q: i64) -> i8 {
    let quarter = q / 4;
    let dist = |t: i64| (crate::ring_arith::reduce(y - t * quarter, q) as i64).abs();
    let mut best = 0i8;
    let mut bd = dist(0);
    for t in [1i8, -1] {
        let d = dist(t as i64);
        if d < bd {
            best = t;
            bd = d;
        }
    }
    best
}

/// c2 − c1·s, the noisy scaled message.
pub fn koe_noisy_plaintext(params: &Params, sk: &KoeSecretKey, ct: &KoeCiphertext) -> RingVec {
    let r = params.ring();
    r.sub_vec(&ct.c2, &r.scale_vec(&sk.s, &ct.c1))
}

pub fn koe_dec(params: &Params, sk: &KoeSecretKey, ct: &KoeCiphertext) -> RingElem {
    let r = params.ring();
    let y = r.tau(&koe_noisy_plaintext(params, sk, ct));
    let trits: Vec<i32> = y
        .iter()
        .map(|&v| round_trit(v as i64, params.q) as i32)
        .collect();
    let tp = apply_h(&default_seq(&r), &trits, params.q).expect("ciphertext length is n*ell");
    r.tau_inv(&tp).unwrap().remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn keygen_shape_and_noise() {
        let p = Params::desk();
        let r = p.ring();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (pk, sk) = koe_keygen(&p, &mut rng);
        for (a, b) in pk.a.iter().zip(&pk.b) {
            assert!(r.sub(b, &r.mul(a, &sk.s)).inf_norm() <= p.b);
        }
        let (zero, _) = koe_keygen_from(&p, pk.a.clone(), r.zero(), &r.zeros(p.ell));
        assert!(zero.b.iter().all(|x| *x == r.zero()));
        let again = koe_keygen(&p, &mut ChaCha20Rng::seed_from_u64(1));
        assert_eq!(again, (pk, sk));
    }

    #[test]
    fn keyrand_identity_and_zero() {
        let p = Params::desk();
        let r = p.ring();
        let (pk, _) = koe_keygen(&p, &mut ChaCha20Rng::seed_from_u64(2));
        let id = KoeRandomizer {
            g: r.one(),
            e1: r.zeros(p.ell),
            e2: r.zeros(p.ell),
        };
        assert_eq!(koe_keyrand(&p, &pk, &id).unwrap(), pk);
        let zero = KoeRandomizer { g: r.zero(), ..id };
        let z = koe_keyrand(&p, &pk, &zero).unwrap();
        assert!(z.a.iter().chain(&z.b).all(|x| *x == r.zero()));
    }

    #[test]
    fn keyrand_rejects_large_noise() {
        let p = Params::desk();
        let r = p.ring();
        let (pk, _) = koe_keygen(&p, &mut ChaCha20Rng::seed_from_u64(3));
        let bad = KoeRandomizer {
            g: r.scale(&r.one(), 3),
            e1: r.zeros(p.ell),
            e2: r.zeros(p.ell),
        };
        assert!(koe_keyrand(&p, &pk, &bad).is_err());
    }

    #[test]
    fn zero_randomizer_ciphertext() {
        let p = Params::desk();
        let r = p.ring();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (pk, sk) = koe_keygen(&p, &mut rng);
        let msg = r.sample_uniform(&mut rng);
        let zero = KoeRandomizer {
            g: r.zero(),
            e1: r.zeros(p.ell),
            e2: r.zeros(p.ell),
        };
        let ct = koe_enc(&p, &pk, &msg, &zero).unwrap();
        assert!(ct.c1.iter().all(|x| *x == r.zero()));
        assert_eq!(ct.c2, scaled_message(&p, &msg));
        assert_eq!(koe_dec(&p, &sk, &ct), msg);
    }

    #[test]
    fn round_trip_with_noise_bound() {
        let p = Params::desk();
        let r = p.ring();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let bound = 3 * (p.n as i64).pow(2) * p.b.pow(3);
        for _ in 0..1000 {
            let (pk, sk) = koe_keygen(&p, &mut rng);
            let (pk2, _) = koe_keyrand_sampled(&p, &pk, &mut rng);
            let msg = r.sample_uniform(&mut rng);
            let ct = koe_enc(&p, &pk2, &msg, &KoeRandomizer::sample(&p, &mut rng)).unwrap();
            let noise = r.sub_vec(
                &koe_noisy_plaintext(&p, &sk, &ct),
                &scaled_message(&p, &msg),
            );
            assert!(vec_inf_norm(&noise) <= bound);
            assert_eq!(koe_dec(&p, &sk, &ct), msg);
        }
    }

    #[test]
    fn unrelated_key_does_not_decrypt() {
        let p = Params::desk();
        let r = p.ring();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let (pk, _) = koe_keygen(&p, &mut rng);
            let (_, other) = koe_keygen(&p, &mut rng);
            let msg = r.sample_uniform(&mut rng);
            let ct = koe_enc(&p, &pk, &msg, &KoeRandomizer::sample(&p, &mut rng)).unwrap();
            assert_ne!(koe_dec(&p, &other, &ct), msg);
        }
    }

    #[test]
    fn keyrand_composes_only_without_noise() {
        let p = Params::desk();
        let r = p.ring();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (pk, _) = koe_keygen(&p, &mut rng);
        let g1 = r.sample_chi(&mut rng, 1);
        let g2 = r.sample_chi(&mut rng, 1);
        let z = r.zeros(p.ell);
        let k1 = KoeRandomizer {
            g: g1.clone(),
            e1: z.clone(),
            e2: z.clone(),
        };
        let k2 = KoeRandomizer {
            g: g2.clone(),
            e1: z.clone(),
            e2: z.clone(),
        };
        let twice = koe_keyrand(&p, &koe_keyrand(&p, &pk, &k1).unwrap(), &k2).unwrap();
        let g12 = r.mul(&g1, &g2);
        let once = KoePublicKey {
            a: r.scale_vec(&g12, &pk.a),
            b: r.scale_vec(&g12, &pk.b),
        };
        assert_eq!(twice, once);
        // with noise the two-step key is not the combined-g key
        let n1 = KoeRandomizer::sample(&p, &mut rng);
        let n2 = KoeRandomizer::sample(&p, &mut rng);
        let twice = koe_keyrand(&p, &koe_keyrand(&p, &pk, &n1).unwrap(), &n2).unwrap();
        let g = r.mul(&n1.g, &n2.g);
        assert_ne!(twice.a, r.scale_vec(&g, &pk.a));
    }

    #[test]
    fn rounding_boundary_exhaustive() {
        let q = 3i64.pow(5);
        let quarter = q / 4;
        for y in 0..q {
            let got = round_trit(y, q);
            let dist = |t: i64| (crate::ring_arith::reduce(y - t * quarter, q) as i64).abs();
            let best = [-1i64, 0, 1].iter().map(|&t| dist(t)).min().unwrap();
            assert_eq!(dist(got as i64), best, "y = {y}");
            let ties: Vec<i64> = [0i64, 1, -1]
                .into_iter()
                .filter(|&t| dist(t) == best)
                .collect();
            assert_eq!(got as i64, ties[0], "tie order at y = {y}");
        }
    }
}
