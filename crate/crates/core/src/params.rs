//! Scheme parameters and their validation.

use sha2::{Digest, Sha256};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

/// Number of bits needed to write `x` (0 for 0).
pub fn bit_len(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// δ_X = ⌊log2 X⌋ + 1 for X ≥ 1.
pub fn delta(x: i64) -> usize {
    assert!(x >= 1, "delta of non-positive bound");
    bit_len(x as u64) as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub q: i64,
    pub ell: usize,
    pub m: usize,
    pub m_bar: usize,
    pub m_s: usize,
    pub m_bar_s: usize,
    pub beta: i64,
    /// Noise bound `B` of the error distribution.
    pub b: i64,
    /// Tag lengths c_0 = 0 < c_1 < ... < c_d.
    pub tags: Vec<usize>,
    pub kappa: usize,
}

/// Unvalidated inputs for [`Params::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub n: usize,
    pub k: usize,
    /// `None` picks the minimum 2⌈log2 q⌉ + 2.
    pub m: Option<usize>,
    pub beta: i64,
    pub b: i64,
    pub tags: Vec<usize>,
    pub kappa: usize,
}

impl Default for ParamSpec {
    fn default() -> Self {
        Self {
            n: 8,
            k: 9,
            m: None,
            beta: 31,
            b: 2,
            tags: geometric_tags(2.0, 1.0, 10),
            kappa: 16,
        }
    }
}

/// c_j = ⌊α0·c^j⌋ for j ≥ 1, with d the first index reaching `min_len`.
pub fn geometric_tags(c: f64, alpha0: f64, min_len: usize) -> Vec<usize> {
    assert!(
        c > 1.0 && alpha0 * (c - 1.0) >= 1.0,
        "need c > 1 and alpha0 >= 1/(c-1)"
    );
    let mut tags = vec![0usize];
    let mut j = 1;
    loop {
        let cj = (alpha0 * c.powi(j)).floor() as usize;
        tags.push(cj);
        if cj >= min_len {
            break tags;
        }
        j += 1;
    }
}

fn ceil_log2_q(q: i64) -> usize {
    bit_len((q - 1) as u64) as usize
}

impl Params {
    pub fn new(spec: &ParamSpec) -> Result<Self> {
        let bad = |s: String| Err(Error::InvalidParams(s));
        let ParamSpec {
            n,
            k,
            m,
            beta,
            b,
            ref tags,
            kappa,
        } = *spec;
        if n < 4 || !n.is_power_of_two() {
            return bad(format!(
                "n must be a power of two with n >= 4 (got n = {n})"
            ));
        }
        if !(1..=19).contains(&k) {
            return bad(format!("k must satisfy 1 <= k <= 19 (got k = {k})"));
        }
        let q = 3i64.pow(k as u32);
        let half = (q - 1) / 2;
        let ell = delta(half);
        let m_min = 2 * ceil_log2_q(q) + 2;
        let m = m.unwrap_or(m_min);
        if m < m_min {
            return bad(format!(
                "m >= 2*ceil(log2 q) + 2 violated: m = {m} < {m_min}"
            ));
        }
        if b < 1 || b > half {
            return bad(format!(
                "1 <= B <= (q-1)/2 violated: B = {b}, (q-1)/2 = {half}"
            ));
        }
        if beta < 1 || beta > half {
            return bad(format!(
                "1 <= beta <= (q-1)/2 violated: beta = {beta}, (q-1)/2 = {half}"
            ));
        }
        let noise = 3 * (n as i64).pow(2) * b.pow(3);
        let room = (q + 9) / 10;
        if noise > room {
            return bad(format!(
                "3*n^2*B^3 <= ceil(q/10) violated: 3*{n}^2*{b}^3 = {noise} > {room}"
            ));
        }
        if tags.len() < 2 || tags[0] != 0 {
            return bad("tag lengths need c_0 = 0 and d >= 1".into());
        }
        if tags.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("c_j must be strictly increasing (got {tags:?})"));
        }
        if *tags.last().unwrap() > 63 {
            return bad(format!(
                "c_d <= 63 violated: c_d = {}",
                tags.last().unwrap()
            ));
        }
        if kappa < 1 || kappa > u16::MAX as usize {
            return bad(format!("1 <= kappa <= 65535 violated: kappa = {kappa}"));
        }
        let m_s = 4 * ell + 1;
        Ok(Self {
            n,
            k,
            q,
            ell,
            m,
            m_bar: m + k,
            m_s,
            m_bar_s: m_s * ell,
            beta,
            b,
            tags: tags.clone(),
            kappa,
        })
    }

    /// The default desk-scale set: n = 8, q = 3^9, B = 2, β = 31, κ = 16.
    pub fn desk() -> Self {
        Self::new(&ParamSpec::default()).expect("default parameters are valid")
    }

    pub fn spec(&self) -> ParamSpec {
        ParamSpec {
            n: self.n,
            k: self.k,
            m: Some(self.m),
            beta: self.beta,
            b: self.b,
            tags: self.tags.clone(),
            kappa: self.kappa,
        }
    }

    pub fn half_q(&self) -> i64 {
        (self.q - 1) / 2
    }

    /// ⌊q/4⌋
    pub fn q_quarter(&self) -> i64 {
        self.q / 4
    }

    /// ⌈q/10⌉
    pub fn q_tenth(&self) -> i64 {
        (self.q + 9) / 10
    }

    pub fn d(&self) -> usize {
        self.tags.len() - 1
    }

    pub fn c_d(&self) -> usize {
        *self.tags.last().unwrap()
    }

    pub fn delta_beta(&self) -> usize {
        delta(self.beta)
    }

    pub fn delta_b(&self) -> usize {
        delta(self.b)
    }

    /// Bytes per coefficient in canonical encodings.
    pub fn coeff_bytes(&self) -> usize {
        (bit_len((self.q - 1) as u64) as usize + 7) / 8
    }

    pub fn encode(&self, w: &mut Writer) {
        w.u16(self.n as u16);
        w.u8(self.k as u8);
        w.u16(self.m as u16);
        w.u64(self.beta as u64);
        w.u64(self.b as u64);
        w.u8(self.tags.len() as u8);
        for &c in &self.tags {
            w.u8(c as u8);
        }
        w.u16(self.kappa as u16);
    }

    pub fn decode(r: &mut Reader) -> Result<Self> {
        let n = r.u16()? as usize;
        let k = r.u8()? as usize;
        let m = r.u16()? as usize;
        let beta = r.u64()? as i64;
        let b = r.u64()? as i64;
        let len = r.u8()? as usize;
        let tags = (0..len)
            .map(|_| r.u8().map(|c| c as usize))
            .collect::<Result<Vec<_>>>()?;
        let kappa = r.u16()? as usize;
        Self::new(&ParamSpec {
            n,
            k,
            m: Some(m),
            beta,
            b,
            tags,
            kappa,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode(&mut w);
        w.finish()
    }

    /// SHA-256 of the canonical encoding; binds every artifact to its parameter set.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"ats/params/v1");
        h.update(self.to_bytes());
        h.finalize().into()
    }
}
