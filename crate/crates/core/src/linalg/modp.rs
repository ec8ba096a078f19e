//! Linear algebra and split-polynomial root finding over a prime field F_p.

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        ((a as u128 + p as u128 - b as u128) % p as u128) as u64
    }
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn invmod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    powmod(a, p - 2, p)
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<u64>>, p: u64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..rows.len()).find(|&k| rows[k][c] != 0) else {
            continue;
        };
        rows.swap(r, k);
        let inv = invmod(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = mulmod(*x, inv, p);
        }
        for k in 0..rows.len() {
            if k != r && rows[k][c] != 0 {
                let f = rows[k][c];
                for j in 0..ncols {
                    let t = mulmod(f, rows[r][j], p);
                    rows[k][j] = submod(rows[k][j], t, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// Canonical basis (rref rows) of the span of `vecs`.
pub fn span(vecs: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut rows = vecs.to_vec();
    rref(&mut rows, p);
    rows
}

/// Basis of {x : A x = 0} for an r×c matrix A (given by rows of length c).
pub fn nullspace(a: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut rows = a.to_vec();
    let pivots = rref(&mut rows, p);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; ncols];
        v[free] = 1;
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = submod(0, rows[ri][free], p);
        }
        basis.push(v);
    }
    basis
}

pub fn transpose(m: &[Vec<u64>], ncols: usize) -> Vec<Vec<u64>> {
    (0..ncols)
        .map(|j| m.iter().map(|r| r[j]).collect())
        .collect()
}

/// Basis of {x : x · M = 0} for an r×c matrix M.
pub fn left_kernel(m: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let t = transpose(m, ncols);
    nullspace(&t, m.len(), p)
}

/// `x · M` for a row vector x.
pub fn vec_mat(x: &[u64], m: &[Vec<u64>], p: u64) -> Vec<u64> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut out = vec![0u64; ncols];
    for (xi, row) in x.iter().zip(m) {
        if *xi == 0 {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o = addmod(*o, mulmod(*xi, *r, p), p);
        }
    }
    out
}

pub fn mat_mul(a: &[Vec<u64>], b: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    a.iter().map(|r| vec_mat(r, b, p)).collect()
}

/// Intersection of two subspaces given by spanning rows.
pub fn intersect(a: &[Vec<u64>], b: &[Vec<u64>], dim: usize, p: u64) -> Vec<Vec<u64>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // x·A = y·B  <=>  (x, -y)·[A; B] = 0
    let mut stacked: Vec<Vec<u64>> = a.to_vec();
    stacked.extend(b.iter().cloned());
    let ker = left_kernel(&stacked, dim, p);
    let vecs: Vec<Vec<u64>> = ker.iter().map(|k| vec_mat(&k[..a.len()], a, p)).collect();
    span(&vecs, p)
}

// ---- polynomials over F_p, coefficient vectors in ascending degree ----

fn trim(mut f: Vec<u64>) -> Vec<u64> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let inv = invmod(b[db], p);
    while r.len() > db {
        let c = mulmod(*r.last().unwrap(), inv, p);
        let shift = r.len() - 1 - db;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = submod(r[shift + i], mulmod(c, *bi, p), p);
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = addmod(out[i + j], mulmod(*x, *y, p), p);
        }
    }
    poly_rem(&out, m, p)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    if let Some(&lc) = a.last() {
        let inv = invmod(lc, p);
        for x in a.iter_mut() {
            *x = mulmod(*x, inv, p);
        }
    }
    a
}

fn poly_divexact(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    let inv = invmod(b[db], p);
    let mut q = vec![0u64; r.len() - db];
    while r.len() > db {
        let c = mulmod(*r.last().unwrap(), inv, p);
        let shift = r.len() - 1 - db;
        q[shift] = c;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = submod(r[shift + i], mulmod(c, *bi, p), p);
        }
        r = trim(r);
    }
    q
}

fn eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter()
        .rev()
        .fold(0, |acc, c| addmod(mulmod(acc, x, p), *c, p))
}

/// Roots of a monic polynomial known to split into distinct linear factors.
/// Small fields are searched exhaustively; large ones use equal-degree
/// splitting with deterministic shifts. Output is sorted.
pub fn split_roots(f: &[u64], p: u64) -> Vec<u64> {
    let f = trim(f.to_vec());
    let deg = f.len().saturating_sub(1);
    let mut roots = if p <= 4096 {
        (0..p).filter(|&x| eval(&f, x, p) == 0).collect::<Vec<_>>()
    } else {
        let mut out = Vec::new();
        split_rec(&f, p, 1, &mut out);
        out
    };
    roots.sort_unstable();
    debug_assert_eq!(roots.len(), deg);
    roots
}

fn split_rec(f: &[u64], p: u64, mut shift: u64, out: &mut Vec<u64>) {
    let deg = f.len() - 1;
    if deg == 0 {
        return;
    }
    if deg == 1 {
        let inv = invmod(f[1], p);
        out.push(submod(0, mulmod(f[0], inv, p), p));
        return;
    }
    loop {
        // g = gcd((x + shift)^((p-1)/2) - 1, f)
        let mut base = vec![shift % p, 1];
        base = poly_rem(&base, f, p);
        let mut acc = vec![1u64];
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, f, p);
            }
            base = poly_mulmod(&base, &base, f, p);
            e >>= 1;
        }
        if acc.is_empty() {
            acc = vec![0];
        }
        acc[0] = submod(acc[0], 1, p);
        let g = poly_gcd(&acc, f, p);
        shift += 1;
        if g.len() > 1 && g.len() < f.len() {
            let h = poly_divexact(f, &g, p);
            split_rec(&g, p, shift, out);
            split_rec(&h, p, shift, out);
            return;
        }
    }
}
