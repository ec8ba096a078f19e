//! Integer and rational polynomial helpers. Coefficients are ascending.

use crate::linalg::hnf::det;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QPoly = Vec<BigRational>;

pub fn to_q(f: &[BigInt]) -> QPoly {
    f.iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect()
}

fn trim_q(mut f: QPoly) -> QPoly {
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

pub fn derivative_q(f: &[BigRational]) -> QPoly {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

pub fn rem_q(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let b = trim_q(b.to_vec());
    let mut r = trim_q(a.to_vec());
    let db = b.len() - 1;
    while r.len() > db {
        let c = r.last().unwrap() / &b[db];
        let shift = r.len() - 1 - db;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &c * bi;
        }
        r = trim_q(r);
    }
    r
}

pub fn div_q(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let b = trim_q(b.to_vec());
    let mut r = trim_q(a.to_vec());
    let db = b.len() - 1;
    if r.len() <= db {
        return Vec::new();
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db {
        let c = r.last().unwrap() / &b[db];
        let shift = r.len() - 1 - db;
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &c * bi;
        }
        q[shift] = c;
        r = trim_q(r);
    }
    q
}

pub fn monic_q(f: QPoly) -> QPoly {
    let f = trim_q(f);
    match f.last().cloned() {
        Some(lc) => f.into_iter().map(|c| c / &lc).collect(),
        None => f,
    }
}

pub fn gcd_q(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut a = trim_q(a.to_vec());
    let mut b = trim_q(b.to_vec());
    while !b.is_empty() {
        let r = rem_q(&a, &b);
        a = b;
        b = r;
    }
    monic_q(a)
}

/// True when gcd(f, f') is constant.
pub fn is_squarefree(f: &[BigInt]) -> bool {
    let fq = to_q(f);
    gcd_q(&fq, &derivative_q(&fq)).len() <= 1
}

/// Squarefree part of a monic rational polynomial.
pub fn squarefree_part(f: &[BigRational]) -> QPoly {
    let g = gcd_q(f, &derivative_q(f));
    monic_q(div_q(f, &g))
}

/// Characteristic polynomial of a square rational matrix (Faddeev–LeVerrier).
pub fn charpoly(a: &[Vec<BigRational>]) -> QPoly {
    let n = a.len();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // m <- a·m + c_{n-k+1}·I
        let mut am = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for t in 0..n {
                    if !a[i][t].is_zero() && !m[t][j].is_zero() {
                        s += &a[i][t] * &m[t][j];
                    }
                }
                am[i][j] = s;
            }
        }
        for (i, row) in am.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = am;
        let mut tr = BigRational::zero();
        for i in 0..n {
            for t in 0..n {
                if !a[i][t].is_zero() && !m[t][i].is_zero() {
                    tr += &a[i][t] * &m[t][i];
                }
            }
        }
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    coeffs
}

/// Clears denominators and content of a rational polynomial, leading
/// coefficient positive.
pub fn primitive_integer(f: &[BigRational]) -> Vec<BigInt> {
    let lcm = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = f
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let mut out: Vec<BigInt> = if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|c| c / &g).collect()
    };
    if out.last().is_some_and(|c| c.is_negative()) {
        for c in out.iter_mut() {
            *c = -&*c;
        }
    }
    out
}

/// Resultant via the Sylvester determinant.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut s = vec![vec![BigInt::zero(); size]; size];
    // rows hold coefficients in descending order
    for i in 0..n {
        for (k, c) in f.iter().rev().enumerate() {
            s[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in g.iter().rev().enumerate() {
            s[n + i][i + k] = c.clone();
        }
    }
    det(&s)
}

/// Discriminant of a monic integer polynomial.
pub fn discriminant(f: &[BigInt]) -> BigInt {
    let n = f.len() - 1;
    let df: Vec<BigInt> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let r = resultant(f, &df);
    if (n * (n - 1) / 2) % 2 == 1 {
        -r
    } else {
        r
    }
}

/// Evaluates an integer polynomial.
pub fn eval(f: &[BigInt], x: &BigInt) -> BigInt {
    f.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// Solves `x · A = b` over Q; `None` when A is singular.
pub fn solve_left_q(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    // transpose to A^T x^T = b^T and eliminate
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = (0..n).map(|i| a[i][j].clone()).collect();
            row.push(b[j].clone());
            row
        })
        .collect();
    for c in 0..n {
        let k = (c..n).find(|&k| !m[k][c].is_zero())?;
        m.swap(c, k);
        let inv = BigRational::one() / &m[c][c];
        for x in m[c].iter_mut() {
            *x = &*x * &inv;
        }
        for k in 0..n {
            if k != c && !m[k][c].is_zero() {
                let f = m[k][c].clone();
                for j in c..=n {
                    let t = &f * &m[c][j];
                    m[k][j] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn discriminant_of_quadratic() {
        // x^2 - 4x + 13: 16 - 52 = -36
        assert_eq!(discriminant(&z(&[13, -4, 1])), BigInt::from(-36));
        // x^3 - 2: -108
        assert_eq!(discriminant(&z(&[-2, 0, 0, 1])), BigInt::from(-108));
    }

    #[test]
    fn squarefree_detection() {
        assert!(!is_squarefree(&z(&[0, 0, 1])));
        assert!(is_squarefree(&z(&[13, -4, 1])));
        // (x-1)^2 (x+2)
        assert!(!is_squarefree(&z(&[2, -3, 0, 1])));
    }

    #[test]
    fn charpoly_of_companion() {
        // companion of x^2 - 4x + 13 in row convention
        let q = |x: i64| BigRational::from_integer(BigInt::from(x));
        let a = vec![vec![q(0), q(1)], vec![q(-13), q(4)]];
        assert_eq!(primitive_integer(&charpoly(&a)), z(&[13, -4, 1]));
    }
}
