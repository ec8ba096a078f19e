//! The étale algebra K = Q[x]/(h) in the power basis 1, π, …, π^{n-1}.

use crate::error::{Error, Result};
use crate::poly;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::lattice::ZLattice;

pub(crate) struct Inner {
    h: Vec<BigInt>,
    n: usize,
    q: Option<BigInt>,
    p: Option<BigInt>,
    // reductions of π^k for k = n .. 2n-2
    high_powers: Vec<Vec<BigInt>>,
    pub(crate) colon_cache: Mutex<HashMap<ZLattice, ZLattice>>,
    pub(crate) maximal_order: OnceLock<ZLattice>,
}

/// K = Q[x]/(h) with h monic and squarefree. Cheap to clone; immutable.
#[derive(Clone)]
pub struct EtaleAlgebra {
    pub(crate) inner: Arc<Inner>,
}

impl fmt::Debug for EtaleAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "EtaleAlgebra(h = {:?}, q = {:?})",
            self.inner.h, self.inner.q
        )
    }
}

impl PartialEq for EtaleAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.h == other.inner.h && self.inner.q == other.inner.q)
    }
}

/// An element of K: `num / den` in power-basis coordinates, lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    pub num: Vec<BigInt>,
    pub den: BigInt,
}

impl AlgebraElement {
    pub fn new(num: Vec<BigInt>, den: BigInt) -> Self {
        assert!(!den.is_zero());
        let mut g = num.iter().fold(den.clone(), |acc, x| acc.gcd(x));
        if den.is_negative() {
            g = -g;
        }
        AlgebraElement {
            num: num.into_iter().map(|x| x / &g).collect(),
            den: den / g,
        }
    }

    pub fn integral(num: Vec<BigInt>) -> Self {
        AlgebraElement::new(num, BigInt::one())
    }

    pub fn from_int(n: usize, c: BigInt) -> Self {
        let mut v = vec![BigInt::zero(); n];
        v[0] = c;
        AlgebraElement::integral(v)
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        AlgebraElement::new(
            self.num.iter().map(|x| x * c.numer()).collect(),
            &self.den * c.denom(),
        )
    }

    pub fn coords(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|x| BigRational::new(x.clone(), self.den.clone()))
            .collect()
    }
}

impl EtaleAlgebra {
    /// Builds K from a monic polynomial (ascending coefficients) and an
    /// optional Weil parameter q.
    pub fn new(h: Vec<BigInt>, q: Option<BigInt>) -> Result<Self> {
        if h.len() < 2 || !h.last().unwrap().is_one() {
            return Err(Error::InvalidInput("h must be monic of degree >= 1".into()));
        }
        if !poly::is_squarefree(&h) {
            return Err(Error::NotSquarefree);
        }
        if h[0].is_zero() {
            return Err(Error::NotInvertible);
        }
        let n = h.len() - 1;
        let mut high_powers = Vec::new();
        // π^n = -(h_0 + h_1 π + … + h_{n-1} π^{n-1})
        let mut cur: Vec<BigInt> = h[..n].iter().map(|c| -c).collect();
        for _ in n..2 * n - 1 {
            high_powers.push(cur.clone());
            // multiply by π
            let top = cur[n - 1].clone();
            let mut next = vec![BigInt::zero(); n];
            for i in (1..n).rev() {
                next[i] = cur[i - 1].clone();
            }
            for i in 0..n {
                next[i] -= &top * &h[i];
            }
            cur = next;
        }
        let p = match &q {
            Some(q) => {
                if !q.is_positive() {
                    return Err(Error::InvalidInput("q must be positive".into()));
                }
                Some(crate::factor::smallest_prime_factor(q))
            }
            None => None,
        };
        let alg = EtaleAlgebra {
            inner: Arc::new(Inner {
                h,
                n,
                q,
                p,
                high_powers,
                colon_cache: Mutex::new(HashMap::new()),
                maximal_order: OnceLock::new(),
            }),
        };
        if let Some(q) = alg.q() {
            let qpi = alg.q_over_pi()?;
            if !alg.is_integral(&qpi) {
                return Err(Error::InvalidInput(format!(
                    "q/pi is not integral for q = {q}"
                )));
            }
        }
        Ok(alg)
    }

    pub fn from_i64(h: &[i64], q: Option<i64>) -> Result<Self> {
        EtaleAlgebra::new(
            h.iter().map(|&c| BigInt::from(c)).collect(),
            q.map(BigInt::from),
        )
    }

    pub fn degree(&self) -> usize {
        self.inner.n
    }

    pub fn h(&self) -> &[BigInt] {
        &self.inner.h
    }

    pub fn q(&self) -> Option<&BigInt> {
        self.inner.q.as_ref()
    }

    pub fn p(&self) -> Option<&BigInt> {
        self.inner.p.as_ref()
    }

    /// Coordinates of π^i·π^j for i, j < n.
    pub fn mult_table(&self) -> Vec<Vec<Vec<BigInt>>> {
        let n = self.degree();
        (0..n)
            .map(|i| (0..n).map(|j| self.power_coords(i + j)).collect())
            .collect()
    }

    fn power_coords(&self, k: usize) -> Vec<BigInt> {
        let n = self.degree();
        if k < n {
            let mut v = vec![BigInt::zero(); n];
            v[k] = BigInt::one();
            v
        } else {
            self.inner.high_powers[k - n].clone()
        }
    }

    /// Product of integer coordinate vectors.
    pub fn mul_int(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let n = self.degree();
        let mut conv = vec![BigInt::zero(); 2 * n - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    conv[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<BigInt> = conv[..n].to_vec();
        for k in n..2 * n - 1 {
            if conv[k].is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(&self.inner.high_powers[k - n]) {
                if !r.is_zero() {
                    *o += &conv[k] * r;
                }
            }
        }
        out
    }

    pub fn one(&self) -> AlgebraElement {
        AlgebraElement::from_int(self.degree(), BigInt::one())
    }

    pub fn pi(&self) -> AlgebraElement {
        let n = self.degree();
        if n == 1 {
            return AlgebraElement::from_int(1, -&self.inner.h[0]);
        }
        let mut v = vec![BigInt::zero(); n];
        v[1] = BigInt::one();
        AlgebraElement::integral(v)
    }

    pub fn q_over_pi(&self) -> Result<AlgebraElement> {
        let q = self
            .q()
            .ok_or_else(|| Error::InvalidInput("q not set".into()))?
            .clone();
        let inv = self.inverse(&self.pi())?;
        Ok(inv.scale(&BigRational::from_integer(q)))
    }

    pub fn add(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| x * &b.den + y * &a.den)
            .collect();
        AlgebraElement::new(num, &a.den * &b.den)
    }

    pub fn sub(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| x * &b.den - y * &a.den)
            .collect();
        AlgebraElement::new(num, &a.den * &b.den)
    }

    pub fn mul(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self.mul_int(&a.num, &b.num), &a.den * &b.den)
    }

    pub fn pow(&self, a: &AlgebraElement, e: u32) -> AlgebraElement {
        let mut r = self.one();
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }

    /// Matrix of y ↦ y·a in row convention (row i = π^i · a).
    pub fn mult_matrix(&self, a: &AlgebraElement) -> Vec<Vec<BigRational>> {
        let n = self.degree();
        (0..n)
            .map(|i| {
                let r = self.mul_int(&self.power_coords(i), &a.num);
                r.into_iter()
                    .map(|x| BigRational::new(x, a.den.clone()))
                    .collect()
            })
            .collect()
    }

    /// Integer matrix of y ↦ y·a for integral coordinates `a`.
    pub fn mult_matrix_int(&self, a: &[BigInt]) -> Vec<Vec<BigInt>> {
        (0..self.degree())
            .map(|i| self.mul_int(&self.power_coords(i), a))
            .collect()
    }

    pub fn inverse(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let m = self.mult_matrix(a);
        let one = self.one().coords();
        let x = poly::solve_left_q(&m, &one).ok_or(Error::ZeroDivisor)?;
        let den = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = x
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        Ok(AlgebraElement::new(num, den))
    }

    pub fn charpoly(&self, a: &AlgebraElement) -> Vec<BigRational> {
        poly::charpoly(&self.mult_matrix(a))
    }

    pub fn norm(&self, a: &AlgebraElement) -> BigRational {
        let cp = self.charpoly(a);
        if self.degree().is_multiple_of(2) {
            cp[0].clone()
        } else {
            -cp[0].clone()
        }
    }

    pub fn trace(&self, a: &AlgebraElement) -> BigRational {
        let m = self.mult_matrix(a);
        (0..self.degree()).map(|i| m[i][i].clone()).sum()
    }

    pub fn is_integral(&self, a: &AlgebraElement) -> bool {
        self.charpoly(a).iter().all(|c| c.is_integer())
    }

    /// Monic minimal polynomial of `a` over Q; integer-valued when `a` is
    /// integral (content 1 since it is monic).
    pub fn minimal_polynomial(&self, a: &AlgebraElement) -> Vec<BigRational> {
        poly::squarefree_part(&self.charpoly(a))
    }

    pub fn integer_minimal_polynomial(&self, a: &AlgebraElement) -> Result<Vec<BigInt>> {
        let m = self.minimal_polynomial(a);
        if m.iter().all(|c| c.is_integer()) {
            Ok(m.iter().map(|c| c.to_integer()).collect())
        } else {
            Err(Error::NotIntegral)
        }
    }

    pub fn check_same(&self, other: &EtaleAlgebra) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::MismatchedAlgebra)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn quadratic_inverse_of_pi() {
        let k = EtaleAlgebra::from_i64(&[13, -4, 1], Some(13)).unwrap();
        let inv = k.inverse(&k.pi()).unwrap();
        // (4 - π)/13
        assert_eq!(inv, AlgebraElement::new(z(&[4, -1]), BigInt::from(13)));
        let qpi = k.q_over_pi().unwrap();
        assert_eq!(
            k.mul(&k.pi(), &qpi),
            AlgebraElement::from_int(2, BigInt::from(13))
        );
    }

    #[test]
    fn rejects_repeated_roots_and_zero_constant() {
        assert_eq!(
            EtaleAlgebra::from_i64(&[0, 0, 1], None).unwrap_err(),
            Error::NotSquarefree
        );
        assert_eq!(
            EtaleAlgebra::from_i64(&[0, 1, 1], None).unwrap_err(),
            Error::NotInvertible
        );
    }

    #[test]
    fn zero_divisor_in_product_algebra() {
        // (x^2+1)(x^2+2) = x^4 + 3x^2 + 2; e = x^2 + 2 vanishes on the second factor
        let k = EtaleAlgebra::from_i64(&[2, 0, 3, 0, 1], None).unwrap();
        let e = AlgebraElement::integral(z(&[2, 0, 1, 0]));
        assert_eq!(k.inverse(&e).unwrap_err(), Error::ZeroDivisor);
    }

    #[test]
    fn minimal_polynomial_of_pi_is_h() {
        let h = [15625, 3750, 1450, 242, 58, 6, 1];
        let k = EtaleAlgebra::from_i64(&h, Some(25)).unwrap();
        assert_eq!(k.integer_minimal_polynomial(&k.pi()).unwrap(), z(&h));
    }
}
