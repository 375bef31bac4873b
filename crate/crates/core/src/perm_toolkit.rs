//! Extension gadgets and their permutations.
//!
//! Index conventions (shared by every consumer):
//! - `enc3(z)[x+1] = [z − x]_3` for x ∈ {−1,0,1}; the middle entry is z.
//! - `ext(t,z)[2(x+1)+c] = [c = t]·[z − x]_3`; entry 3 is t·z.
//! - `mult3(a,g)[3(y+1)+(x+1)] = [a − x]_3·[g − y]_3`; entry 4 is a·g.
//! - `expd(a, g)`: outer j over the n blocks of g, middle i over a, inner k over δ_B.

pub type Trit = i8;

/// [x]_3 ∈ {−1, 0, 1}.
#[inline]
pub fn trit3(x: i64) -> Trit {
    match x.rem_euclid(3) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

#[inline]
fn ix3(x: i64) -> usize {
    (x + 1) as usize
}

pub fn enc3(z: Trit) -> [i8; 3] {
    let z = z as i64;
    [trit3(z + 1), trit3(z), trit3(z - 1)]
}

/// Output x takes input [x − e]_3.
pub fn pi_e<T: Copy>(e: Trit, v: &[T]) -> [T; 3] {
    let e = e as i64;
    [-1i64, 0, 1].map(|x| v[ix3(trit3(x - e) as i64)])
}

pub fn ext(t: u8, z: Trit) -> [i8; 6] {
    let mut out = [0i8; 6];
    for x in -1i64..=1 {
        out[2 * ix3(x) + t as usize] = trit3(z as i64 - x);
    }
    out
}

/// Output (c, x) takes input (c ⊕ b, [x − e]_3).
pub fn psi_be<T: Copy>(b: u8, e: Trit, v: &[T]) -> [T; 6] {
    let mut out = [v[0]; 6];
    for x in -1i64..=1 {
        for c in 0..2usize {
            out[2 * ix3(x) + c] = v[2 * ix3(trit3(x - e as i64) as i64) + (c ^ b as usize)];
        }
    }
    out
}

pub fn mult3(a: Trit, g: Trit) -> [i8; 9] {
    let mut out = [0i8; 9];
    for y in -1i64..=1 {
        for x in -1i64..=1 {
            out[3 * ix3(y) + ix3(x)] = trit3(a as i64 - x) * trit3(g as i64 - y);
        }
    }
    out
}

/// Output (x, y) takes input ([x − b]_3, [y − e]_3).
pub fn phi_be<T: Copy>(b: Trit, e: Trit, v: &[T]) -> [T; 9] {
    let mut out = [v[0]; 9];
    for y in -1i64..=1 {
        for x in -1i64..=1 {
            out[3 * ix3(y) + ix3(x)] =
                v[3 * ix3(trit3(y - e as i64) as i64) + ix3(trit3(x - b as i64) as i64)];
        }
    }
    out
}

pub fn enc(z: &[Trit]) -> Vec<i8> {
    z.iter().flat_map(|&x| enc3(x)).collect()
}

pub fn pi_vec<T: Copy>(e: &[Trit], v: &[T]) -> Vec<T> {
    assert_eq!(v.len(), 3 * e.len(), "Pi shape mismatch");
    e.iter()
        .zip(v.chunks(3))
        .flat_map(|(&ei, blk)| pi_e(ei, blk))
        .collect()
}

/// enc(z) ‖ ext(t_0, z_1) ‖ ... ‖ ext(t_0, z_m) ‖ ... ‖ ext(t_{c−1}, z_m)
pub fn mix(t: &[u8], z: &[Trit]) -> Vec<i8> {
    let mut out = enc(z);
    for &tj in t {
        for &zi in z {
            out.extend(ext(tj, zi));
        }
    }
    out
}

pub fn psi_vec<T: Copy>(b: &[u8], e: &[Trit], v: &[T]) -> Vec<T> {
    let m = e.len();
    assert_eq!(v.len(), 3 * m + 6 * m * b.len(), "Psi shape mismatch");
    let mut out = pi_vec(e, &v[..3 * m]);
    for (j, &bj) in b.iter().enumerate() {
        for (i, &ei) in e.iter().enumerate() {
            let off = 3 * m + 6 * (j * m + i);
            out.extend(psi_be(bj, ei, &v[off..off + 6]));
        }
    }
    out
}

/// (a_i·g_{j,k}) with j outer, i middle, k inner; `g.len() = outer·δ`.
pub fn expd(a: &[Trit], g: &[Trit], outer: usize) -> Vec<i8> {
    assert_eq!(g.len() % outer, 0);
    let inner = g.len() / outer;
    let mut out = Vec::with_capacity(outer * a.len() * inner);
    for j in 0..outer {
        for &ai in a {
            for &gk in &g[j * inner..(j + 1) * inner] {
                out.push(ai * gk);
            }
        }
    }
    out
}

/// mult3 blocks in expd order.
pub fn mult_vec(a: &[Trit], g: &[Trit], outer: usize) -> Vec<i8> {
    assert_eq!(g.len() % outer, 0);
    let inner = g.len() / outer;
    let mut out = Vec::with_capacity(9 * outer * a.len() * inner);
    for j in 0..outer {
        for &ai in a {
            for &gk in &g[j * inner..(j + 1) * inner] {
                out.extend(mult3(ai, gk));
            }
        }
    }
    out
}

pub fn phi_vec<T: Copy>(b: &[Trit], e: &[Trit], outer: usize, v: &[T]) -> Vec<T> {
    let inner = e.len() / outer;
    assert_eq!(v.len(), 9 * b.len() * e.len(), "Phi shape mismatch");
    let mut out = Vec::with_capacity(v.len());
    let mut blk = v.chunks(9);
    for j in 0..outer {
        for &bi in b {
            for &ek in &e[j * inner..(j + 1) * inner] {
                out.extend(phi_be(bi, ek, blk.next().unwrap()));
            }
        }
    }
    out
}

pub fn add3(a: &[Trit], b: &[Trit]) -> Vec<Trit> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| trit3(x as i64 + y as i64))
        .collect()
}

pub fn xor_bits(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(&x, &y)| x ^ y).collect()
}
