//! Second-preimage census for p = B·x with ternary x at toy size.
//!
//! The number of ternary x with B·x = t is counted exactly by splitting the m
//! columns in two halves and convolving the two image histograms.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ring_arith::{Ring, RingElem};

#[derive(Debug, Clone, PartialEq)]
pub struct CensusReport {
    pub n: usize,
    pub q: i64,
    pub m: usize,
    pub samples: usize,
    /// Sampled x for which some x′ ≠ x has B·x′ = B·x.
    pub with_second: usize,
    /// The same fraction taken over all 3^{nm} ternary x.
    pub exact_fraction: f64,
}

impl CensusReport {
    pub fn fraction(&self) -> f64 {
        self.with_second as f64 / self.samples as f64
    }
}

/// Smallest m with m ≥ 2⌈log₂ q⌉ + 2.
pub fn min_m(q: i64) -> usize {
    2 * (64 - (q as u64 - 1).leading_zeros()) as usize + 2
}

struct Images {
    ring: Ring,
    size: usize,
}

impl Images {
    fn index(&self, a: &RingElem) -> usize {
        a.coeffs().iter().rev().fold(0, |acc, &c| {
            acc * self.ring.q as usize + c.rem_euclid(self.ring.q as i32) as usize
        })
    }

    fn elem(&self, mut idx: usize) -> RingElem {
        let q = self.ring.q as usize;
        let c: Vec<i64> = (0..self.ring.n)
            .map(|_| {
                let d = idx % q;
                idx /= q;
                d as i64
            })
            .collect();
        self.ring.elem(&c).expect("n coefficients")
    }

    fn ternary(&self, mut idx: usize) -> RingElem {
        let c: Vec<i64> = (0..self.ring.n)
            .map(|_| {
                let d = idx % 3;
                idx /= 3;
                d as i64 - 1
            })
            .collect();
        self.ring.elem(&c).expect("n coefficients")
    }

    /// hist[t] = #{x_half : Σ b_j·x_j = t}
    fn histogram(&self, b: &[RingElem], add: &[Vec<u32>]) -> Vec<u64> {
        let tern = 3usize.pow(self.ring.n as u32);
        let prods: Vec<Vec<u32>> = b
            .iter()
            .map(|bj| {
                (0..tern)
                    .map(|x| self.index(&self.ring.mul(bj, &self.ternary(x))) as u32)
                    .collect()
            })
            .collect();
        let mut cur = vec![0u64; self.size];
        cur[0] = 1;
        for col in &prods {
            let mut next = vec![0u64; self.size];
            for (s, &cnt) in cur.iter().enumerate() {
                if cnt != 0 {
                    for &v in col {
                        next[add[s][v as usize] as usize] += cnt;
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

/// Exact preimage counts per image for a given B.
pub fn preimage_counts(ring: Ring, bmat: &[RingElem]) -> Result<Vec<u64>> {
    let size = (ring.q as usize)
        .checked_pow(ring.n as u32)
        .filter(|&s| s <= 1 << 16)
        .ok_or_else(|| {
            Error::InvalidParams(format!(
                "q^n must be at most 65536 for the census (q = {}, n = {})",
                ring.q, ring.n
            ))
        })?;
    let im = Images { ring, size };
    let elems: Vec<RingElem> = (0..size).map(|i| im.elem(i)).collect();
    let add: Vec<Vec<u32>> = elems
        .iter()
        .map(|a| {
            elems
                .iter()
                .map(|b| im.index(&ring.add(a, b)) as u32)
                .collect()
        })
        .collect();
    let (lo, hi) = bmat.split_at(bmat.len().div_ceil(2));
    let hl = im.histogram(lo, &add);
    let hr = im.histogram(hi, &add);
    let neg: Vec<usize> = elems.iter().map(|a| im.index(&ring.neg(a))).collect();
    Ok((0..size)
        .map(|t| {
            (0..size)
                .filter(|&a| hl[a] != 0)
                .map(|a| hl[a] * hr[add[t][neg[a]] as usize])
                .sum()
        })
        .collect())
}

/// Samples B uniformly and `samples` ternary x, then counts x with a second preimage.
pub fn second_preimage_census<R: Rng + ?Sized>(
    n: usize,
    q: i64,
    m: usize,
    samples: usize,
    rng: &mut R,
) -> Result<CensusReport> {
    if m < min_m(q) {
        return Err(Error::InvalidParams(format!(
            "m >= 2*ceil(log2 q) + 2 violated: m = {m} < {}",
            min_m(q)
        )));
    }
    if samples == 0 {
        return Err(Error::InvalidParams(
            "census needs at least one sample".into(),
        ));
    }
    let ring = Ring { n, q };
    let bmat = ring.sample_uniform_vec(rng, m);
    let counts = preimage_counts(ring, &bmat)?;
    let im = Images {
        ring,
        size: counts.len(),
    };
    let total: u64 = counts.iter().sum();
    let covered: u64 = counts.iter().filter(|&&c| c >= 2).sum();
    let with_second = (0..samples)
        .filter(|_| {
            let x = ring.sample_chi_vec(rng, 1, m);
            counts[im.index(&ring.dot(&bmat, &x))] >= 2
        })
        .count();
    Ok(CensusReport {
        n,
        q,
        m,
        samples,
        with_second,
        exact_fraction: covered as f64 / total as f64,
    })
}
