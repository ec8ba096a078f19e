//! Smith normal form with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Result of `u · a · v = diag`, with `u` (m×m) and `v` (n×n) unimodular.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diag: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

// Row op: rows i,k <- (s·ri + t·rk, a·rk - b·ri) applied to both matrices.
fn combine_rows(
    m: &mut [Vec<BigInt>],
    i: usize,
    k: usize,
    s: &BigInt,
    t: &BigInt,
    a: &BigInt,
    b: &BigInt,
) {
    let ri = m[i].clone();
    let rk = m[k].clone();
    for c in 0..ri.len() {
        m[i][c] = s * &ri[c] + t * &rk[c];
        m[k][c] = a * &rk[c] - b * &ri[c];
    }
}

fn combine_cols(
    m: &mut [Vec<BigInt>],
    i: usize,
    k: usize,
    s: &BigInt,
    t: &BigInt,
    a: &BigInt,
    b: &BigInt,
) {
    for row in m.iter_mut() {
        let ci = row[i].clone();
        let ck = row[k].clone();
        row[i] = s * &ci + t * &ck;
        row[k] = a * &ck - b * &ci;
    }
}

/// Smith normal form of an m×n integer matrix. The diagonal has length
/// `min(m, n)`, is nonnegative and satisfies the divisibility chain.
pub fn smith(a: &[Vec<BigInt>], ncols: usize) -> Smith {
    let m = a.len();
    let n = ncols;
    let mut d: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = identity(m);
    let mut v = identity(n);
    let r = m.min(n);
    for t in 0..r {
        // choose pivot of minimal absolute value in the remaining block
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    if !d[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(d, u, v, r);
            };
            d.swap(t, pi);
            u.swap(t, pi);
            for row in d.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for k in t + 1..m {
                if d[k][t].is_zero() {
                    continue;
                }
                let e = d[t][t].extended_gcd(&d[k][t]);
                let (aa, bb) = (&d[t][t] / &e.gcd, &d[k][t] / &e.gcd);
                combine_rows(&mut d, t, k, &e.x, &e.y, &aa, &bb);
                combine_rows(&mut u, t, k, &e.x, &e.y, &aa, &bb);
            }
            for k in t + 1..n {
                if d[t][k].is_zero() {
                    continue;
                }
                let e = d[t][t].extended_gcd(&d[t][k]);
                let (aa, bb) = (&d[t][t] / &e.gcd, &d[t][k] / &e.gcd);
                combine_cols(&mut d, t, k, &e.x, &e.y, &aa, &bb);
                combine_cols(&mut v, t, k, &e.x, &e.y, &aa, &bb);
            }
            for k in t + 1..m {
                if !d[k][t].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // enforce divisibility of the rest of the block
            let p = d[t][t].clone();
            let mut bad: Option<usize> = None;
            'outer: for i in t + 1..m {
                for j in t + 1..n {
                    if !(&d[i][j] % &p).is_zero() {
                        bad = Some(i);
                        break 'outer;
                    }
                }
            }
            match bad {
                Some(i) => {
                    // add row i to row t and redo
                    let ri = d[i].clone();
                    for (c, x) in ri.iter().enumerate() {
                        d[t][c] += x;
                    }
                    let ui = u[i].clone();
                    for (c, x) in ui.iter().enumerate() {
                        u[t][c] += x;
                    }
                }
                None => break,
            }
        }
    }
    finish(d, u, v, r)
}

fn finish(
    mut d: Vec<Vec<BigInt>>,
    mut u: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
    r: usize,
) -> Smith {
    for t in 0..r {
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    let diag = (0..r).map(|t| d[t][t].clone()).collect();
    Smith { diag, u, v }
}

/// Invariant factors of a square nonsingular integer matrix, with the
/// trivial factors 1 removed.
pub fn invariant_factors(a: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = a.first().map_or(0, |r| r.len());
    smith(a, n)
        .diag
        .into_iter()
        .filter(|x| !x.is_one())
        .collect()
}
