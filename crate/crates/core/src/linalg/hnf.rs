//! Hermite normal form of integer row lattices.
//!
//! Rows are inserted one at a time into an upper-triangular echelon. As soon
//! as the echelon has full rank the product of its pivots `D` is a multiple of
//! the lattice determinant, so `D·Z^n` lies in the span and every subsequent
//! entry can be reduced modulo `D`. Pivots are never reduced, which keeps that
//! containment valid while the echelon shrinks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Incremental echelon builder.
#[derive(Clone, Debug)]
pub struct Echelon {
    n: usize,
    rows: Vec<Option<Vec<BigInt>>>,
    modulus: Option<BigInt>,
}

impl Echelon {
    pub fn new(n: usize) -> Self {
        Echelon {
            n,
            rows: vec![None; n],
            modulus: None,
        }
    }

    /// Seeds the echelon with `d·I`, which is legal whenever `d·Z^n` is known
    /// to lie in the final lattice.
    pub fn with_multiple(n: usize, d: &BigInt) -> Self {
        let d = d.abs();
        assert!(!d.is_zero());
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut r = vec![BigInt::zero(); n];
            r[i] = d.clone();
            rows.push(Some(r));
        }
        Echelon {
            n,
            rows,
            modulus: Some(d),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.iter().filter(|r| r.is_some()).count()
    }

    pub fn insert(&mut self, v: &[BigInt]) {
        debug_assert_eq!(v.len(), self.n);
        let mut v: Vec<BigInt> = v.to_vec();
        for j in 0..self.n {
            if let Some(m) = &self.modulus {
                for x in v[j..].iter_mut() {
                    *x = x.mod_floor(m);
                }
            }
            if v[j].is_zero() {
                continue;
            }
            match self.rows[j].take() {
                None => {
                    self.rows[j] = Some(v);
                    if self.modulus.is_none() && self.rank() == self.n {
                        self.refresh_modulus();
                    }
                    return;
                }
                Some(r) => {
                    let ext = r[j].extended_gcd(&v[j]);
                    let (g, s, t) = (ext.gcd, ext.x, ext.y);
                    let a = &r[j] / &g;
                    let b = &v[j] / &g;
                    let mut nr = Vec::with_capacity(self.n);
                    let mut nv = Vec::with_capacity(self.n);
                    for k in 0..self.n {
                        if k < j {
                            nr.push(BigInt::zero());
                            nv.push(BigInt::zero());
                        } else {
                            nr.push(&s * &r[k] + &t * &v[k]);
                            nv.push(&a * &v[k] - &b * &r[k]);
                        }
                    }
                    debug_assert!(nv[j].is_zero());
                    if let Some(m) = &self.modulus {
                        for x in nr[j + 1..].iter_mut() {
                            *x = x.mod_floor(m);
                        }
                    }
                    let pivot_changed = nr[j].abs() != r[j].abs();
                    self.rows[j] = Some(nr);
                    v = nv;
                    if pivot_changed && self.modulus.is_some() {
                        self.refresh_modulus();
                    }
                }
            }
        }
    }

    fn refresh_modulus(&mut self) {
        let mut d = BigInt::one();
        for r in self.rows.iter().enumerate() {
            match r.1 {
                Some(row) => d *= row[r.0].abs(),
                None => return,
            }
        }
        for (j, r) in self.rows.iter_mut().enumerate() {
            let row = r.as_mut().unwrap();
            for x in row[j + 1..].iter_mut() {
                *x = x.mod_floor(&d);
            }
        }
        self.modulus = Some(d);
    }

    /// Finishes into reduced echelon form. Rows without pivots are omitted,
    /// so a full-rank result is square upper triangular.
    pub fn finish(self) -> Vec<Vec<BigInt>> {
        let n = self.n;
        let mut rows: Vec<(usize, Vec<BigInt>)> = Vec::new();
        for (j, r) in self.rows.into_iter().enumerate() {
            if let Some(mut row) = r {
                if row[j].is_negative() {
                    for x in row.iter_mut() {
                        *x = -&*x;
                    }
                }
                rows.push((j, row));
            }
        }
        for idx in 0..rows.len() {
            let (j, pivot_row) = (rows[idx].0, rows[idx].1.clone());
            let p = &pivot_row[j];
            for other in rows[..idx].iter_mut() {
                let q = other.1[j].div_floor(p);
                if !q.is_zero() {
                    for k in j..n {
                        let t = &q * &pivot_row[k];
                        other.1[k] -= t;
                    }
                }
            }
        }
        rows.into_iter().map(|(_, r)| r).collect()
    }
}

/// Hermite normal form of the lattice spanned by `gens` (rows of length `n`).
pub fn hnf(n: usize, gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut e = Echelon::new(n);
    for g in gens {
        e.insert(g);
    }
    e.finish()
}

/// Hermite normal form when `d·Z^n` is known to lie in the span.
pub fn hnf_with_multiple(n: usize, d: &BigInt, gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let mut e = Echelon::with_multiple(n, d);
    for g in gens {
        e.insert(g);
    }
    e.finish()
}

/// Determinant of a square upper-triangular matrix.
pub fn triangular_det(m: &[Vec<BigInt>]) -> BigInt {
    m.iter().enumerate().map(|(i, r)| r[i].clone()).product()
}

/// For upper-triangular nonsingular `m`, returns `(adj, det)` with
/// `m · adj = det · I` and `adj` integral.
pub fn triangular_adjugate(m: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let n = m.len();
    let det = triangular_det(m);
    let mut x = vec![vec![BigInt::zero(); n]; n];
    for k in 0..n {
        for i in (0..=k).rev() {
            let mut acc = if i == k { det.clone() } else { BigInt::zero() };
            for j in i + 1..=k {
                acc -= &m[i][j] * &x[j][k];
            }
            debug_assert!((&acc % &m[i][i]).is_zero());
            x[i][k] = acc / &m[i][i];
        }
    }
    (x, det)
}

/// Solves `x · m = v` for upper-triangular `m`; `None` if `x` is not integral.
pub fn solve_row_triangular(m: &[Vec<BigInt>], v: &[BigInt]) -> Option<Vec<BigInt>> {
    let n = m.len();
    let mut w = v.to_vec();
    let mut x = vec![BigInt::zero(); n];
    for j in 0..n {
        if w[j].is_zero() {
            continue;
        }
        let (q, r) = w[j].div_rem(&m[j][j]);
        if !r.is_zero() {
            return None;
        }
        for k in j..n {
            let t = &q * &m[j][k];
            w[k] -= t;
        }
        x[j] = q;
    }
    Some(x)
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
