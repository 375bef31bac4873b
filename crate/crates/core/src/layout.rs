//! Witness layouts: the VALID set, the seed space S and the permutations Γ_η
//! of a relation, described as segments over shared secret variables.
//!
//! A seed has the same shape as a variable assignment; Γ_η maps the extension
//! of an assignment `x` to the extension of `x + η` (bitwise xor for bit
//! variables, addition mod 3 for trit variables).

use rand::Rng;

use crate::decomp::{pack_trits, unpack_trits};
use crate::error::{Error, Result};
use crate::perm_toolkit::{enc3, ext, mult3, trit3};
use crate::scratch::Scratch;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Bits,
    Trits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    pub kind: VarKind,
    pub len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// mix(t, z)
    Mix { t: usize, z: usize },
    /// enc(z)
    Enc { z: usize },
    /// mult(a, g) with g split into `outer` blocks.
    Mult { a: usize, g: usize, outer: usize },
}

/// Per-variable values: bits as 0/1, trits as −1/0/1.
pub type Assignment = Vec<Vec<i8>>;
/// η: one component per variable, same shapes as an assignment.
pub type PermSeed = Assignment;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessLayout {
    vars: Vec<Var>,
    segs: Vec<Segment>,
    offsets: Vec<usize>,
    len: usize,
}

impl WitnessLayout {
    pub fn new(vars: Vec<Var>, segs: Vec<Segment>) -> Self {
        let mut offsets = Vec::with_capacity(segs.len());
        let mut len = 0;
        for s in &segs {
            offsets.push(len);
            len += match *s {
                Segment::Mix { t, z } => {
                    assert_eq!(vars[t].kind, VarKind::Bits);
                    assert_eq!(vars[z].kind, VarKind::Trits);
                    3 * vars[z].len + 6 * vars[z].len * vars[t].len
                }
                Segment::Enc { z } => {
                    assert_eq!(vars[z].kind, VarKind::Trits);
                    3 * vars[z].len
                }
                Segment::Mult { a, g, outer } => {
                    assert_eq!(vars[a].kind, VarKind::Trits);
                    assert_eq!(vars[g].kind, VarKind::Trits);
                    assert_eq!(vars[g].len % outer, 0);
                    9 * vars[a].len * vars[g].len
                }
            };
        }
        Self {
            vars,
            segs,
            offsets,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    pub fn segment_offset(&self, seg: usize) -> usize {
        self.offsets[seg]
    }

    pub fn segment_len(&self, seg: usize) -> usize {
        self.offsets.get(seg + 1).copied().unwrap_or(self.len) - self.offsets[seg]
    }

    /// Total number of seed entries.
    pub fn seed_len(&self) -> usize {
        self.vars.iter().map(|v| v.len).sum()
    }

    /// Column of the linear value z_i in an `Enc` segment.
    pub fn col_enc(&self, seg: usize, i: usize) -> usize {
        match self.segs[seg] {
            Segment::Enc { z } | Segment::Mix { z, .. } => {
                debug_assert!(i < self.vars[z].len);
                self.offsets[seg] + 3 * i + 1
            }
            _ => panic!("segment {seg} has no enc part"),
        }
    }

    /// Column of t_j·z_i in a `Mix` segment.
    pub fn col_mix_prod(&self, seg: usize, j: usize, i: usize) -> usize {
        match self.segs[seg] {
            Segment::Mix { z, .. } => {
                let m = self.vars[z].len;
                self.offsets[seg] + 3 * m + 6 * (j * m + i) + 3
            }
            _ => panic!("segment {seg} is not a mix segment"),
        }
    }

    /// Column of a_i·g_{j,k} in a `Mult` segment.
    pub fn col_mult(&self, seg: usize, j: usize, i: usize, k: usize) -> usize {
        match self.segs[seg] {
            Segment::Mult { a, g, outer } => {
                let inner = self.vars[g].len / outer;
                self.offsets[seg] + 9 * ((j * self.vars[a].len + i) * inner + k) + 4
            }
            _ => panic!("segment {seg} is not a mult segment"),
        }
    }

    fn check_assignment(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.vars.len() {
            return Err(Error::Shape(format!(
                "{} variables expected, got {}",
                self.vars.len(),
                x.len()
            )));
        }
        for (i, (v, val)) in self.vars.iter().zip(x).enumerate() {
            if val.len() != v.len {
                return Err(Error::Shape(format!(
                    "variable {i}: length {} expected, got {}",
                    v.len,
                    val.len()
                )));
            }
            let ok = match v.kind {
                VarKind::Bits => val.iter().all(|&b| b == 0 || b == 1),
                VarKind::Trits => val.iter().all(|&t| (-1..=1).contains(&t)),
            };
            if !ok {
                return Err(Error::Domain(format!(
                    "variable {i} has out-of-range entries"
                )));
            }
        }
        Ok(())
    }

    /// The extended witness for an assignment.
    pub fn extend(&self, x: &Assignment) -> Result<Vec<i8>> {
        self.check_assignment(x)?;
        let mut out = Vec::with_capacity(self.len);
        for s in &self.segs {
            match *s {
                Segment::Mix { t, z } => {
                    out.extend(x[z].iter().flat_map(|&zi| enc3(zi)));
                    for &tj in &x[t] {
                        for &zi in &x[z] {
                            out.extend(ext(tj as u8, zi));
                        }
                    }
                }
                Segment::Enc { z } => out.extend(x[z].iter().flat_map(|&zi| enc3(zi))),
                Segment::Mult { a, g, outer } => {
                    let inner = x[g].len() / outer;
                    for j in 0..outer {
                        for &ai in &x[a] {
                            for &gk in &x[g][j * inner..(j + 1) * inner] {
                                out.extend(mult3(ai, gk));
                            }
                        }
                    }
                }
            }
        }
        debug_assert_eq!(out.len(), self.len);
        Ok(out)
    }

    /// Recovers the assignment if `w` ∈ VALID, else `None`.
    pub fn decode<T: Copy + Into<i32>>(&self, w: &[T]) -> Option<Assignment> {
        if w.len() != self.len || w.iter().any(|&x| !(-1..=1).contains(&x.into())) {
            return None;
        }
        let mut x: Vec<Option<Vec<i8>>> = vec![None; self.vars.len()];
        for (si, s) in self.segs.iter().enumerate() {
            let off = self.offsets[si];
            match *s {
                Segment::Mix { t, z } => {
                    let m = self.vars[z].len;
                    if x[z].is_none() {
                        x[z] = Some((0..m).map(|i| w[off + 3 * i + 1].into() as i8).collect());
                    }
                    if x[t].is_none() && m > 0 {
                        let base = off + 3 * m;
                        x[t] = Some(
                            (0..self.vars[t].len)
                                .map(|j| {
                                    let b = base + 6 * j * m;
                                    (w[b + 1].into() != 0
                                        || w[b + 3].into() != 0
                                        || w[b + 5].into() != 0)
                                        as i8
                                })
                                .collect(),
                        );
                    }
                }
                Segment::Enc { z } => {
                    if x[z].is_none() {
                        x[z] = Some(
                            (0..self.vars[z].len)
                                .map(|i| w[off + 3 * i + 1].into() as i8)
                                .collect(),
                        );
                    }
                }
                Segment::Mult { a, g, outer } => {
                    let (la, lg) = (self.vars[a].len, self.vars[g].len);
                    let inner = lg / outer;
                    if la == 0 || lg == 0 {
                        continue;
                    }
                    let block = |j: usize, i: usize, k: usize| {
                        let b = off + 9 * ((j * la + i) * inner + k);
                        decode_mult3(&w[b..b + 9])
                    };
                    if x[a].is_none() {
                        x[a] = Some(
                            (0..la)
                                .map(|i| block(0, i, 0).map(|(ai, _)| ai))
                                .collect::<Option<_>>()?,
                        );
                    }
                    if x[g].is_none() {
                        let mut gv = Vec::with_capacity(lg);
                        for j in 0..outer {
                            for k in 0..inner {
                                gv.push(block(j, 0, k)?.1);
                            }
                        }
                        x[g] = Some(gv);
                    }
                }
            }
        }
        let x: Assignment = x.into_iter().map(|v| v.unwrap_or_default()).collect();
        let ext = self.extend(&x).ok()?;
        if ext.iter().zip(w).all(|(&a, &b)| a as i32 == b.into()) {
            Some(x)
        } else {
            None
        }
    }

    pub fn is_valid<T: Copy + Into<i32>>(&self, w: &[T]) -> bool {
        self.decode(w).is_some()
    }

    pub fn sample_assignment<R: Rng + ?Sized>(&self, rng: &mut R) -> Assignment {
        self.vars
            .iter()
            .map(|v| match v.kind {
                VarKind::Bits => (0..v.len).map(|_| rng.gen_range(0..=1)).collect(),
                VarKind::Trits => (0..v.len).map(|_| rng.gen_range(-1..=1)).collect(),
            })
            .collect()
    }

    pub fn sample_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> PermSeed {
        self.sample_assignment(rng)
    }

    /// A uniformly random element of VALID.
    pub fn sample_valid<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i32> {
        let x = self.sample_assignment(rng);
        self.extend(&x)
            .unwrap()
            .into_iter()
            .map(i32::from)
            .collect()
    }

    pub(crate) fn sample_valid_scratch<R: Rng + ?Sized>(&self, rng: &mut R) -> Scratch<i32> {
        let x = self.sample_assignment(rng);
        Scratch::collect(
            self.len,
            self.extend(&x).unwrap().into_iter().map(i32::from),
        )
    }

    /// x + η componentwise.
    pub fn shift(&self, x: &Assignment, seed: &PermSeed) -> Assignment {
        self.vars
            .iter()
            .zip(x.iter().zip(seed))
            .map(|(v, (a, b))| match v.kind {
                VarKind::Bits => a.iter().zip(b).map(|(&p, &q)| p ^ q).collect(),
                VarKind::Trits => a
                    .iter()
                    .zip(b)
                    .map(|(&p, &q)| trit3(p as i64 + q as i64))
                    .collect(),
            })
            .collect()
    }

    /// Seed of the inverse permutation.
    pub fn inverse_seed(&self, seed: &PermSeed) -> PermSeed {
        self.vars
            .iter()
            .zip(seed)
            .map(|(v, s)| match v.kind {
                VarKind::Bits => s.clone(),
                VarKind::Trits => s.iter().map(|&t| -t).collect(),
            })
            .collect()
    }

    /// Index table of Γ_η: output position p takes input position `table[p]`.
    pub fn permutation(&self, seed: &PermSeed) -> Result<Permutation> {
        self.check_assignment(seed)?;
        let mut table = Scratch::with_capacity(self.len);
        // in-block source offsets for each shift value
        let p3 = |e: i8| [-1i64, 0, 1].map(|x| (trit3(x - e as i64) + 1) as u32);
        for (si, s) in self.segs.iter().enumerate() {
            let off = self.offsets[si] as u32;
            match *s {
                Segment::Enc { z } | Segment::Mix { z, .. } => {
                    for (i, &e) in seed[z].iter().enumerate() {
                        let base = off + 3 * i as u32;
                        table.extend(p3(e).map(|d| base + d));
                    }
                    if let Segment::Mix { t, .. } = *s {
                        let m = self.vars[z].len as u32;
                        for (j, &b) in seed[t].iter().enumerate() {
                            for (i, &e) in seed[z].iter().enumerate() {
                                let base = off + 3 * m + 6 * (j as u32 * m + i as u32);
                                let src = p3(e);
                                for xs in src {
                                    for c in 0..2u32 {
                                        table.push(base + 2 * xs + (c ^ b as u32));
                                    }
                                }
                            }
                        }
                    }
                }
                Segment::Mult { a, g, outer } => {
                    let inner = self.vars[g].len / outer;
                    // pat[b + 1][e + 1]: the 9 in-block sources
                    let pat: [[[u32; 9]; 3]; 3] = [-1i8, 0, 1].map(|b| {
                        [-1i8, 0, 1].map(|e| {
                            let (sx, sy) = (p3(b), p3(e));
                            std::array::from_fn(|k| 3 * sy[k / 3] + sx[k % 3])
                        })
                    });
                    let mut base = off;
                    for j in 0..outer {
                        for &b in &seed[a] {
                            let row = &pat[(b + 1) as usize];
                            for &e in &seed[g][j * inner..(j + 1) * inner] {
                                table.extend_from_slice(&row[(e + 1) as usize].map(|d| base + d));
                                base += 9;
                            }
                        }
                    }
                }
            }
        }
        debug_assert_eq!(table.len(), self.len);
        Ok(Permutation { table })
    }

    /// Seed serialized as 2-bit codes, components in declaration order.
    pub fn encode_seed(&self, seed: &PermSeed) -> Vec<u8> {
        let flat: Vec<i8> = seed.iter().flatten().copied().collect();
        pack_trits(&flat)
    }

    pub fn decode_seed(&self, bytes: &[u8]) -> Result<PermSeed> {
        self.seed_from_flat(&unpack_trits(bytes, self.seed_len())?)
    }

    pub fn flatten_seed(&self, seed: &PermSeed) -> Vec<i8> {
        seed.iter().flatten().copied().collect()
    }

    /// Splits a flat seed into components, checking kinds.
    pub fn seed_from_flat(&self, flat: &[i8]) -> Result<PermSeed> {
        if flat.len() != self.seed_len() {
            return Err(Error::Malformed(format!(
                "seed of length {} expected, got {}",
                self.seed_len(),
                flat.len()
            )));
        }
        let mut out = Vec::with_capacity(self.vars.len());
        let mut pos = 0;
        for v in &self.vars {
            out.push(flat[pos..pos + v.len].to_vec());
            pos += v.len;
        }
        self.check_assignment(&out)
            .map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(out)
    }
}

/// (a, g) with mult3(a, g) = v, if any.
fn decode_mult3<T: Copy + Into<i32>>(v: &[T]) -> Option<(i8, i8)> {
    for a in -1i8..=1 {
        for g in -1i8..=1 {
            if mult3(a, g)
                .iter()
                .zip(v)
                .all(|(&x, &y)| x as i32 == y.into())
            {
                return Some((a, g));
            }
        }
    }
    None
}

/// A permutation of witness positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    table: Scratch<u32>,
}

impl Permutation {
    pub fn apply<T: Copy>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.table.len(), "permutation length mismatch");
        self.table.iter().map(|&i| v[i as usize]).collect()
    }

    /// Γ applied to three vectors in one pass over the table.
    pub(crate) fn apply3(
        &self,
        a: &[i32],
        b: &[i32],
        c: &[i32],
    ) -> (Scratch<i32>, Scratch<i32>, Scratch<i32>) {
        let n = self.table.len();
        assert!(
            a.len() == n && b.len() == n && c.len() == n,
            "permutation length mismatch"
        );
        let (mut x, mut y, mut z) = (
            Scratch::with_capacity(n),
            Scratch::with_capacity(n),
            Scratch::with_capacity(n),
        );
        x.resize(n, 0);
        y.resize(n, 0);
        z.resize(n, 0);
        for (o, &i) in self.table.iter().enumerate() {
            let i = i as usize;
            x[o] = a[i];
            y[o] = b[i];
            z[o] = c[i];
        }
        (x, y, z)
    }

    pub(crate) fn apply_scratch(&self, v: &[i32]) -> Scratch<i32> {
        assert_eq!(v.len(), self.table.len(), "permutation length mismatch");
        Scratch::collect(v.len(), self.table.iter().map(|&i| v[i as usize]))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}
