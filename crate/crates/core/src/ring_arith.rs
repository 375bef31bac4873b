//! Arithmetic in R_q = Z_q[X]/(X^n + 1), the embeddings τ and rot, and sampling.

use rand::Rng;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::params::Params;

/// Centered representative of `x` mod `q` (q odd), in [−(q−1)/2, (q−1)/2].
#[inline]
pub fn reduce(x: i64, q: i64) -> i32 {
    let r = x.rem_euclid(q);
    (if r > (q - 1) / 2 { r - q } else { r }) as i32
}

/// Integer vector mod q, entries centered.
pub type IntVecQ = Vec<i32>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElem {
    coeffs: Vec<i32>,
}

pub type RingVec = Vec<RingElem>;

impl RingElem {
    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn inf_norm(&self) -> i64 {
        inf_norm(&self.coeffs)
    }
}

pub fn inf_norm(v: &[i32]) -> i64 {
    v.iter().map(|&x| (x as i64).abs()).max().unwrap_or(0)
}

pub fn vec_inf_norm(v: &[RingElem]) -> i64 {
    v.iter().map(RingElem::inf_norm).max().unwrap_or(0)
}

/// The ring R_q for fixed (n, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ring {
    pub n: usize,
    pub q: i64,
}

impl Params {
    pub fn ring(&self) -> Ring {
        Ring {
            n: self.n,
            q: self.q,
        }
    }
}

impl Ring {
    pub fn half(&self) -> i64 {
        (self.q - 1) / 2
    }

    pub fn reduce(&self, x: i64) -> i32 {
        reduce(x, self.q)
    }

    pub fn elem(&self, coeffs: &[i64]) -> Result<RingElem> {
        if coeffs.len() != self.n {
            return Err(Error::Shape(format!(
                "ring element needs {} coefficients, got {}",
                self.n,
                coeffs.len()
            )));
        }
        Ok(RingElem {
            coeffs: coeffs.iter().map(|&c| self.reduce(c)).collect(),
        })
    }

    pub fn zero(&self) -> RingElem {
        RingElem {
            coeffs: vec![0; self.n],
        }
    }

    pub fn one(&self) -> RingElem {
        self.monomial(0)
    }

    /// X^j, wrapping negacyclically for j ≥ n.
    pub fn monomial(&self, j: usize) -> RingElem {
        let mut c = vec![0; self.n];
        let sign = if (j / self.n) % 2 == 0 { 1 } else { -1 };
        c[j % self.n] = sign;
        RingElem { coeffs: c }
    }

    pub fn zeros(&self, len: usize) -> RingVec {
        vec![self.zero(); len]
    }

    fn check(&self, a: &RingElem) {
        assert_eq!(a.coeffs.len(), self.n, "ring element of wrong degree");
    }

    pub fn add(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.check(a);
        self.check(b);
        let c = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| self.reduce(x as i64 + y as i64))
            .collect();
        RingElem { coeffs: c }
    }

    pub fn sub(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.check(a);
        self.check(b);
        let c = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| self.reduce(x as i64 - y as i64))
            .collect();
        RingElem { coeffs: c }
    }

    pub fn neg(&self, a: &RingElem) -> RingElem {
        RingElem {
            coeffs: a.coeffs.iter().map(|&x| -x).collect(),
        }
    }

    pub fn scale(&self, a: &RingElem, s: i64) -> RingElem {
        RingElem {
            coeffs: a
                .coeffs
                .iter()
                .map(|&x| self.reduce(x as i64 * s))
                .collect(),
        }
    }

    /// Negacyclic schoolbook product.
    pub fn mul(&self, a: &RingElem, b: &RingElem) -> RingElem {
        self.check(a);
        self.check(b);
        let n = self.n;
        let mut acc = vec![0i64; n];
        for (i, &ai) in a.coeffs.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as i64;
            for (j, &bj) in b.coeffs.iter().enumerate() {
                let t = ai * bj as i64;
                if i + j < n {
                    acc[i + j] += t;
                } else {
                    acc[i + j - n] -= t;
                }
            }
            // keep the accumulator far from overflow for large q
            if self.q > 1 << 20 {
                for x in acc.iter_mut() {
                    *x %= self.q;
                }
            }
        }
        RingElem {
            coeffs: acc.into_iter().map(|x| self.reduce(x)).collect(),
        }
    }

    /// Checked product: fails if either operand has the wrong degree.
    pub fn ring_mul(&self, a: &RingElem, b: &RingElem) -> Result<RingElem> {
        if a.coeffs.len() != self.n || b.coeffs.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "ring_mul operands have degrees {} and {}, ring has n = {}",
                a.coeffs.len(),
                b.coeffs.len(),
                self.n
            )));
        }
        Ok(self.mul(a, b))
    }

    pub fn add_vec(&self, a: &[RingElem], b: &[RingElem]) -> RingVec {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[RingElem], b: &[RingElem]) -> RingVec {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| self.sub(x, y)).collect()
    }

    /// a · v for a scalar ring element and a ring vector.
    pub fn scale_vec(&self, a: &RingElem, v: &[RingElem]) -> RingVec {
        v.iter().map(|x| self.mul(a, x)).collect()
    }

    /// Row-times-column product Σ a_i·v_i.
    pub fn dot(&self, a: &[RingElem], v: &[RingElem]) -> RingElem {
        assert_eq!(a.len(), v.len(), "dot product of mismatched lengths");
        let mut acc = vec![0i64; self.n];
        for (x, y) in a.iter().zip(v) {
            let p = self.mul(x, y);
            for (s, &c) in acc.iter_mut().zip(&p.coeffs) {
                *s += c as i64;
            }
        }
        RingElem {
            coeffs: acc.into_iter().map(|x| self.reduce(x)).collect(),
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> RingElem {
        let h = self.half();
        RingElem {
            coeffs: (0..self.n).map(|_| rng.gen_range(-h..=h) as i32).collect(),
        }
    }

    /// χ: coefficients uniform in [−bound, bound].
    pub fn sample_chi<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64) -> RingElem {
        assert!(bound >= 0 && bound <= self.half(), "chi bound out of range");
        RingElem {
            coeffs: (0..self.n)
                .map(|_| rng.gen_range(-bound..=bound) as i32)
                .collect(),
        }
    }

    /// `len` uniform centered Z_q values, drawn in bulk (Lemire's multiply-shift with rejection).
    pub fn sample_zq<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> IntVecQ {
        let mut out = Vec::with_capacity(len);
        self.sample_zq_into(rng, len, &mut out);
        out
    }

    pub(crate) fn sample_zq_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        len: usize,
        out: &mut Vec<i32>,
    ) {
        let q = self.q as u64;
        assert!(q < 1 << 31);
        let h = self.half() as i32;
        let reject_below = ((1u64 << 32) - q) % q;
        let len = out.len() + len;
        let mut buf = [0u32; 1024];
        while out.len() < len {
            rng.fill(&mut buf[..]);
            for &w in &buf {
                let m = w as u64 * q;
                if (m as u32 as u64) >= reject_below {
                    out.push((m >> 32) as i32 - h);
                    if out.len() == len {
                        break;
                    }
                }
            }
        }
    }

    pub fn sample_uniform_vec<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> RingVec {
        (0..len).map(|_| self.sample_uniform(rng)).collect()
    }

    pub fn sample_chi_vec<R: Rng + ?Sized>(&self, rng: &mut R, bound: i64, len: usize) -> RingVec {
        (0..len).map(|_| self.sample_chi(rng, bound)).collect()
    }

    /// τ: concatenated coefficient vectors.
    pub fn tau(&self, v: &[RingElem]) -> IntVecQ {
        let mut out = Vec::with_capacity(v.len() * self.n);
        for a in v {
            self.check(a);
            out.extend_from_slice(&a.coeffs);
        }
        out
    }

    pub fn tau_inv(&self, w: &[i32]) -> Result<RingVec> {
        if w.len() % self.n != 0 {
            return Err(Error::Shape(format!(
                "length {} is not a multiple of n = {}",
                w.len(),
                self.n
            )));
        }
        Ok(w.chunks(self.n)
            .map(|c| RingElem {
                coeffs: c.iter().map(|&x| self.reduce(x as i64)).collect(),
            })
            .collect())
    }

    /// Entry (r, c) of rot(a): coefficient r of a·X^c.
    #[inline]
    pub fn rot_entry(&self, a: &RingElem, r: usize, c: usize) -> i32 {
        if r >= c {
            a.coeffs[r - c]
        } else {
            -a.coeffs[r + self.n - c]
        }
    }

    pub fn rot(&self, a: &RingElem) -> IntMatQ {
        self.check(a);
        let n = self.n;
        let mut m = IntMatQ::zeros(n, n, self.q);
        for r in 0..n {
            for c in 0..n {
                m.set(r, c, self.rot_entry(a, r, c) as i64);
            }
        }
        m
    }

    /// [rot(a_1) | ... | rot(a_len)]
    pub fn rot_row(&self, a: &[RingElem]) -> IntMatQ {
        let n = self.n;
        let mut m = IntMatQ::zeros(n, n * a.len(), self.q);
        for (b, ai) in a.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    m.set(r, b * n + c, self.rot_entry(ai, r, c) as i64);
                }
            }
        }
        m
    }

    pub fn coeff_bytes(&self) -> usize {
        (crate::params::bit_len((self.q - 1) as u64) as usize + 7) / 8
    }

    /// Writes one coefficient as a fixed-width little-endian value in [0, q).
    #[inline]
    pub fn put_coeff(&self, out: &mut Vec<u8>, c: i32) {
        let v = (c as i64).rem_euclid(self.q) as u64;
        out.extend_from_slice(&v.to_le_bytes()[..self.coeff_bytes()]);
    }

    /// put_coeff over a slice of centered values.
    pub fn put_coeffs(&self, out: &mut Vec<u8>, v: &[i32]) {
        let start = out.len();
        out.resize(start + v.len() * self.coeff_bytes(), 0);
        self.write_coeffs(&mut out[start..], v);
    }

    /// Fills `out` (exactly `v.len()·coeff_bytes` long) with the canonical encoding of `v`.
    pub(crate) fn write_coeffs(&self, out: &mut [u8], v: &[i32]) {
        let q = self.q as i32;
        let canon = |c: i32| (c + (q & (c >> 31))) as u32;
        match self.coeff_bytes() {
            2 => {
                for (o, &c) in out.chunks_exact_mut(2).zip(v) {
                    o.copy_from_slice(&(canon(c) as u16).to_le_bytes());
                }
            }
            w => {
                for (o, &c) in out.chunks_exact_mut(w).zip(v) {
                    o.copy_from_slice(&canon(c).to_le_bytes()[..w]);
                }
            }
        }
    }

    pub fn get_coeff(&self, r: &mut Reader) -> Result<i32> {
        let w = self.coeff_bytes();
        let mut b = [0u8; 8];
        b[..w].copy_from_slice(r.take(w)?);
        let v = u64::from_le_bytes(b);
        if v >= self.q as u64 {
            return Err(Error::Malformed(format!(
                "coefficient {v} >= q = {}",
                self.q
            )));
        }
        Ok(self.reduce(v as i64))
    }

    pub fn encode_zq(&self, w: &mut Writer, v: &[i32]) {
        let buf = w.buf_mut();
        buf.reserve(v.len() * self.coeff_bytes());
        self.put_coeffs(buf, v);
    }

    pub fn decode_zq(&self, r: &mut Reader, len: usize) -> Result<IntVecQ> {
        (0..len).map(|_| self.get_coeff(r)).collect()
    }

    pub fn encode_elem(&self, w: &mut Writer, a: &RingElem) {
        self.check(a);
        self.encode_zq(w, &a.coeffs);
    }

    pub fn decode_elem(&self, r: &mut Reader) -> Result<RingElem> {
        Ok(RingElem {
            coeffs: self.decode_zq(r, self.n)?,
        })
    }

    pub fn encode_vec(&self, w: &mut Writer, v: &[RingElem]) {
        for a in v {
            self.encode_elem(w, a);
        }
    }

    pub fn decode_vec(&self, r: &mut Reader, len: usize) -> Result<RingVec> {
        (0..len).map(|_| self.decode_elem(r)).collect()
    }

    pub fn elem_bytes(&self, a: &RingElem) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode_elem(&mut w, a);
        w.finish()
    }
}

/// Dense integer matrix mod q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatQ {
    rows: usize,
    cols: usize,
    q: i64,
    data: Vec<i32>,
}

impl IntMatQ {
    pub fn zeros(rows: usize, cols: usize, q: i64) -> Self {
        Self {
            rows,
            cols,
            q,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, q: i64) -> Self {
        let mut m = Self::zeros(n, n, q);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = reduce(v, self.q);
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: i64) {
        let cur = self.get(r, c) as i64;
        self.set(r, c, cur + v);
    }

    pub fn mul_vec(&self, v: &[i32]) -> IntVecQ {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                let s: i64 = row
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as i64 * b as i64 % self.q)
                    .sum();
                reduce(s, self.q)
            })
            .collect()
    }

    pub fn mul(&self, other: &IntMatQ) -> IntMatQ {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = IntMatQ::zeros(self.rows, other.cols, self.q);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let s: i64 = (0..self.cols)
                    .map(|i| self.get(r, i) as i64 * other.get(i, c) as i64 % self.q)
                    .sum();
                out.set(r, c, s);
            }
        }
        out
    }
}

/// Sparse matrix mod q in compressed-column form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatQ {
    rows: usize,
    cols: usize,
    q: i64,
    col_start: Vec<u32>,
    row_idx: Vec<u32>,
    vals: Vec<i32>,
}

/// Collects (row, col, value) triples; duplicates are summed.
#[derive(Debug, Clone)]
pub struct SparseBuilder {
    rows: usize,
    cols: usize,
    q: i64,
    entries: Vec<(u32, u32, i64)>,
}

impl SparseBuilder {
    pub fn new(rows: usize, cols: usize, q: i64) -> Self {
        Self {
            rows,
            cols,
            q,
            entries: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: i64) {
        debug_assert!(
            r < self.rows && c < self.cols,
            "entry ({r},{c}) outside {}x{}",
            self.rows,
            self.cols
        );
        if v % self.q != 0 {
            self.entries.push((c as u32, r as u32, v));
        }
    }

    pub fn finish(mut self) -> SparseMatQ {
        self.entries.sort_unstable_by_key(|&(c, r, _)| (c, r));
        let mut col_start = vec![0u32; self.cols + 1];
        let mut row_idx = Vec::with_capacity(self.entries.len());
        let mut vals = Vec::with_capacity(self.entries.len());
        let mut i = 0;
        while i < self.entries.len() {
            let (c, r, _) = self.entries[i];
            let mut s = 0i64;
            while i < self.entries.len() && self.entries[i].0 == c && self.entries[i].1 == r {
                s = (s + self.entries[i].2) % self.q;
                i += 1;
            }
            let v = reduce(s, self.q);
            if v != 0 {
                row_idx.push(r);
                vals.push(v);
                col_start[c as usize + 1] += 1;
            }
        }
        for c in 0..self.cols {
            col_start[c + 1] += col_start[c];
        }
        SparseMatQ {
            rows: self.rows,
            cols: self.cols,
            q: self.q,
            col_start,
            row_idx,
            vals,
        }
    }
}

impl SparseMatQ {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero (row, value) pairs of column `c`.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, i32)> + '_ {
        let (a, b) = (self.col_start[c] as usize, self.col_start[c + 1] as usize);
        self.row_idx[a..b]
            .iter()
            .zip(&self.vals[a..b])
            .map(|(&r, &v)| (r as usize, v))
    }

    pub fn mul_vec(&self, v: &[i32]) -> IntVecQ {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        let mut acc = vec![0i64; self.rows];
        // reduce once at the end when no row sum can overflow
        let h = ((self.q - 1) / 2) as u128;
        let lazy = h * h * (self.vals.len() as u128 + 1) < 1 << 62;
        for (c, &x) in v.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let (a, b) = (self.col_start[c] as usize, self.col_start[c + 1] as usize);
            for (&r, &m) in self.row_idx[a..b].iter().zip(&self.vals[a..b]) {
                let t = acc[r as usize] + m as i64 * x as i64;
                acc[r as usize] = if lazy { t } else { t % self.q };
            }
        }
        acc.into_iter().map(|x| reduce(x, self.q)).collect()
    }

    pub fn to_dense(&self) -> IntMatQ {
        let mut d = IntMatQ::zeros(self.rows, self.cols, self.q);
        for c in 0..self.cols {
            for (r, v) in self.column(c) {
                d.set(r, c, v as i64);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ring() -> Ring {
        Params::desk().ring()
    }

    /// Independent oracle: full product in Z[X] of degree < 2n, then fold X^n = −1.
    fn schoolbook(a: &[i32], b: &[i32], q: i64) -> Vec<i32> {
        let n = a.len();
        let mut full = vec![0i64; 2 * n];
        for i in 0..n {
            for j in 0..n {
                full[i + j] += a[i] as i64 * b[j] as i64;
            }
        }
        (0..n).map(|t| reduce(full[t] - full[t + n], q)).collect()
    }

    #[test]
    fn x_times_x_pow_n_minus_one_is_minus_one() {
        let r = ring();
        let p = r.mul(&r.monomial(1), &r.monomial(r.n - 1));
        assert_eq!(p, r.neg(&r.one()));
    }

    #[test]
    fn product_matches_oracle() {
        let r = ring();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = r.sample_uniform(&mut rng);
            let b = r.sample_uniform(&mut rng);
            assert_eq!(
                r.mul(&a, &b).coeffs(),
                &schoolbook(a.coeffs(), b.coeffs(), r.q)[..]
            );
            assert_eq!(r.mul(&a, &r.one()), a);
        }
    }

    #[test]
    fn ring_mul_rejects_mismatched_degree() {
        let r = ring();
        let small = Ring { n: 4, q: r.q };
        assert!(matches!(
            r.ring_mul(&small.one(), &r.one()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn rot_of_x_is_signed_shift() {
        let r = ring();
        let m = r.rot(&r.monomial(1));
        for j in 0..r.n {
            let col = r.tau(&[r.mul(&r.monomial(1), &r.monomial(j))]);
            for i in 0..r.n {
                assert_eq!(m.get(i, j), col[i]);
            }
        }
        assert_eq!(m.get(0, r.n - 1), -1);
        assert_eq!(r.rot(&r.one()), IntMatQ::identity(r.n, r.q));
    }

    #[test]
    fn rot_is_multiplication() {
        let r = ring();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = r.sample_uniform(&mut rng);
            let b = r.sample_uniform(&mut rng);
            assert_eq!(
                r.rot(&a).mul_vec(&r.tau(&[b.clone()])),
                r.tau(&[r.mul(&a, &b)])
            );
            assert_eq!(r.rot(&r.mul(&a, &b)), r.rot(&a).mul(&r.rot(&b)));
        }
    }

    #[test]
    fn rot_row_is_dot() {
        let r = ring();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a = r.sample_uniform_vec(&mut rng, 5);
        let v = r.sample_uniform_vec(&mut rng, 5);
        assert_eq!(r.rot_row(&a).mul_vec(&r.tau(&v)), r.tau(&[r.dot(&a, &v)]));
    }

    #[test]
    fn tau_basics() {
        let r = ring();
        let mut t = vec![0; r.n];
        t[0] = 1;
        assert_eq!(r.tau(&[r.one()]), t);
        assert!(matches!(r.tau_inv(&[1, 2, 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn norms() {
        assert_eq!(inf_norm(&[1, -3, 2]), 3);
        assert_eq!(ring().zero().inf_norm(), 0);
    }

    #[test]
    fn chi_bounds() {
        let r = ring();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        assert_eq!(r.sample_chi(&mut rng, 0), r.zero());
        for _ in 0..10_000 {
            assert!(r.sample_chi(&mut rng, 2).inf_norm() <= 2);
        }
    }

    #[test]
    fn uniform_chi_square() {
        // 10^4 draws of a ring element; bucket each coefficient into 27 equal
        // residue classes mod 27 (q = 3^9 is divisible by 27) and test per position.
        let r = ring();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut counts = vec![[0u32; 27]; r.n];
        let draws = 10_000;
        for _ in 0..draws {
            let a = r.sample_uniform(&mut rng);
            for (i, &c) in a.coeffs().iter().enumerate() {
                counts[i][(c as i64).rem_euclid(27) as usize] += 1;
            }
        }
        let e = draws as f64 / 27.0;
        for pos in counts {
            let chi: f64 = pos.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
            // 26 degrees of freedom, p = 0.001 critical value
            assert!(chi < 54.05, "chi-square {chi}");
        }
    }

    #[test]
    fn encoding_round_trip_and_width() {
        let r = ring();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let v = r.sample_uniform_vec(&mut rng, 3);
        let mut w = Writer::new();
        r.encode_vec(&mut w, &v);
        let bytes = w.finish();
        assert_eq!(bytes.len(), 3 * r.n * 2);
        assert_eq!(r.decode_vec(&mut Reader::new(&bytes), 3).unwrap(), v);
        // −1 maps to q − 1 = 19682 = 0x4ce2
        assert_eq!(r.elem_bytes(&r.neg(&r.one()))[..2], [0xe2, 0x4c]);
    }

    #[test]
    fn sparse_matches_dense() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let q = 19683;
        let mut b = SparseBuilder::new(5, 9, q);
        let mut d = IntMatQ::zeros(5, 9, q);
        for _ in 0..30 {
            let (r, c, v) = (
                rng.gen_range(0..5),
                rng.gen_range(0..9),
                rng.gen_range(-50..50),
            );
            b.add(r, c, v);
            d.add_at(r, c, v);
        }
        let s = b.finish();
        assert_eq!(s.to_dense(), d);
        let x: Vec<i32> = (0..9).map(|_| rng.gen_range(-9841..=9841)).collect();
        assert_eq!(s.mul_vec(&x), d.mul_vec(&x));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn elem() -> impl Strategy<Value = RingElem> {
            let r = Params::desk().ring();
            proptest::collection::vec(-9841i64..=9841, 8).prop_map(move |c| r.elem(&c).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]
            #[test]
            fn ring_laws(a in elem(), b in elem(), c in elem()) {
                let r = Params::desk().ring();
                prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
                prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
                prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
                prop_assert_eq!(r.tau_inv(&r.tau(&[a.clone(), b.clone()])).unwrap(), vec![a, b]);
            }

            #[test]
            fn triangle_inequality(x in proptest::collection::vec(-2i64..=2, 8), y in proptest::collection::vec(-2i64..=2, 8)) {
                let r = Params::desk().ring();
                let (a, b) = (r.elem(&x).unwrap(), r.elem(&y).unwrap());
                prop_assert!(r.add(&a, &b).inf_norm() <= a.inf_norm() + b.inf_norm());
            }
        }
    }
}
