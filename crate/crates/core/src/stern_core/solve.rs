//! Particular solutions of M·x = u over Z_{3^k}, used by the simulator.

use crate::error::{Error, Result};
use crate::ring_arith::{reduce, IntVecQ, SparseMatQ};

pub fn inv_mod(a: i64, q: i64) -> Option<i64> {
    let (mut r0, mut r1) = (q, a.rem_euclid(q));
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let f = r0 / r1;
        (r0, r1) = (r1, r0 - f * r1);
        (t0, t1) = (t1, t0 - f * t1);
    }
    (r0 == 1).then(|| t0.rem_euclid(q))
}

fn mod3(x: i64) -> u8 {
    x.rem_euclid(3) as u8
}

/// Some x with M·x = u mod q (q a power of 3).
///
/// Rows with a single-entry unit column are solved last by back-substitution;
/// the remaining rows get columns picked by rank over GF(3) and a dense solve.
pub fn solve_particular(m: &SparseMatQ, u: &[i32]) -> Result<IntVecQ> {
    let q = m.q();
    let rows = m.rows();
    assert_eq!(u.len(), rows);
    let mut pivot_col: Vec<Option<(usize, i64)>> = vec![None; rows];
    for c in 0..m.cols() {
        let mut it = m.column(c);
        if let (Some((r, v)), None) = (it.next(), it.next()) {
            if v % 3 != 0 && pivot_col[r].is_none() {
                pivot_col[r] = Some((c, v as i64));
            }
        }
    }
    let residual: Vec<usize> = (0..rows).filter(|&r| pivot_col[r].is_none()).collect();
    let mut pos = vec![usize::MAX; rows];
    for (i, &r) in residual.iter().enumerate() {
        pos[r] = i;
    }
    let k = residual.len();

    // incremental GF(3) basis in reduced form: (lead index, vector)
    let mut basis: Vec<(usize, Vec<u8>)> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let singleton: std::collections::HashSet<usize> =
        pivot_col.iter().flatten().map(|&(c, _)| c).collect();
    if k > 0 {
        for c in 0..m.cols() {
            if singleton.contains(&c) {
                continue;
            }
            let mut v = vec![0u8; k];
            let mut any = false;
            for (r, x) in m.column(c) {
                if pos[r] != usize::MAX {
                    v[pos[r]] = mod3(x as i64);
                    any |= v[pos[r]] != 0;
                }
            }
            if !any {
                continue;
            }
            for (lead, b) in &basis {
                let f = v[*lead];
                if f != 0 {
                    // v -= f·b (b has b[lead] = 1)
                    for (x, &y) in v.iter_mut().zip(b) {
                        *x = (*x + 3 - (f * y) % 3) % 3;
                    }
                }
            }
            if let Some(lead) = v.iter().position(|&x| x != 0) {
                let inv = if v[lead] == 1 { 1 } else { 2 };
                for x in v.iter_mut() {
                    *x = (*x * inv) % 3;
                }
                basis.push((lead, v));
                chosen.push(c);
                if chosen.len() == k {
                    break;
                }
            }
        }
        if chosen.len() < k {
            return Err(Error::Unsolvable(format!(
                "rank {} over GF(3) on {} residual rows",
                chosen.len(),
                k
            )));
        }
    }

    // dense k×k system on the residual rows, unit pivots mod q
    let mut a = vec![vec![0i64; k + 1]; k];
    for (j, &c) in chosen.iter().enumerate() {
        for (r, x) in m.column(c) {
            if pos[r] != usize::MAX {
                a[pos[r]][j] = x as i64;
            }
        }
    }
    for (i, &r) in residual.iter().enumerate() {
        a[i][k] = u[r] as i64;
    }
    for col in 0..k {
        let p = (col..k)
            .find(|&i| a[i][col] % 3 != 0)
            .ok_or_else(|| Error::Unsolvable("singular residual system".into()))?;
        a.swap(col, p);
        let inv = inv_mod(a[col][col], q).unwrap();
        for x in a[col].iter_mut() {
            *x = (*x * inv).rem_euclid(q);
        }
        for i in 0..k {
            if i != col && a[i][col] != 0 {
                let f = a[i][col];
                let (pr, row) = if i < col {
                    let (lo, hi) = a.split_at_mut(col);
                    (&hi[0], &mut lo[i])
                } else {
                    let (lo, hi) = a.split_at_mut(i);
                    (&lo[col], &mut hi[0])
                };
                for (x, &y) in row.iter_mut().zip(pr.iter()) {
                    *x = (*x - f * y).rem_euclid(q);
                }
            }
        }
    }
    let mut x = vec![0i32; m.cols()];
    for (j, &c) in chosen.iter().enumerate() {
        x[c] = reduce(a[j][k], q);
    }
    // back-substitute singleton rows: everything else is fixed now
    let partial = m.mul_vec(&x);
    for r in 0..rows {
        if let Some((c, v)) = pivot_col[r] {
            let inv = inv_mod(v, q).unwrap();
            x[c] = reduce((u[r] as i64 - partial[r] as i64) * inv, q);
        }
    }
    debug_assert_eq!(m.mul_vec(&x), u);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring_arith::SparseBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn inverses() {
        let q = 19683;
        for a in [1i64, 2, 4, 5, 9841, -1] {
            assert_eq!((a * inv_mod(a, q).unwrap()).rem_euclid(q), 1);
        }
        assert!(inv_mod(3, q).is_none());
    }

    #[test]
    fn random_systems() {
        let q = 19683;
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for trial in 0..50 {
            let (rows, cols) = (12, 60);
            let mut b = SparseBuilder::new(rows, cols, q);
            for c in 0..cols {
                if c % 5 == 0 && trial % 2 == 0 {
                    b.add(rng.gen_range(0..rows), c, rng.gen_range(1..3));
                } else {
                    for r in 0..rows {
                        if rng.gen_bool(0.4) {
                            b.add(r, c, rng.gen_range(-9841..=9841));
                        }
                    }
                }
            }
            let m = b.finish();
            let u: Vec<i32> = (0..rows).map(|_| rng.gen_range(-9841..=9841)).collect();
            let x = solve_particular(&m, &u).unwrap();
            assert_eq!(m.mul_vec(&x), u);
        }
    }

    #[test]
    fn rank_deficient_is_reported() {
        let q = 243;
        let mut b = SparseBuilder::new(2, 3, q);
        b.add(0, 0, 3);
        b.add(1, 0, 3);
        b.add(0, 1, 6);
        let m = b.finish();
        assert!(matches!(
            solve_particular(&m, &[1, 1]),
            Err(Error::Unsolvable(_))
        ));
    }
}
