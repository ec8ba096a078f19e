//! Full-rank Z-lattices in K, stored as `(1/den)·rowspan(rows)` with `rows`
//! in Hermite normal form (upper triangular, positive pivots, entries above a
//! pivot reduced into `[0, pivot)`) and `den` minimal. Equal lattices have
//! identical representations, so equality and hashing are structural.

use crate::algebra::{AlgebraElement, EtaleAlgebra};
use crate::error::{Error, Result};
use crate::linalg::hnf::{
    hnf, hnf_with_multiple, solve_row_triangular, triangular_adjugate, triangular_det,
};
use crate::linalg::snf::invariant_factors;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZLattice {
    den: BigInt,
    rows: Vec<Vec<BigInt>>,
}

impl ZLattice {
    fn normalize(rows: Vec<Vec<BigInt>>, den: BigInt) -> Self {
        let mut g = den.clone();
        for r in &rows {
            for x in r {
                g = g.gcd(x);
                if g.is_one() {
                    break;
                }
            }
        }
        if g.is_one() {
            return ZLattice { den, rows };
        }
        ZLattice {
            den: den / &g,
            rows: rows
                .into_iter()
                .map(|r| r.into_iter().map(|x| x / &g).collect())
                .collect(),
        }
    }

    /// Lattice spanned by integer vectors `gens`, scaled by `1/den`.
    pub fn from_generators(n: usize, gens: &[Vec<BigInt>], den: &BigInt) -> Result<Self> {
        let rows = hnf(n, gens);
        if rows.len() != n {
            return Err(Error::RankDeficient);
        }
        Ok(ZLattice::normalize(rows, den.abs()))
    }

    /// As `from_generators` when `mult·Z^n` lies in the integer span.
    pub fn from_generators_with_multiple(
        n: usize,
        mult: &BigInt,
        gens: &[Vec<BigInt>],
        den: &BigInt,
    ) -> Self {
        let rows = hnf_with_multiple(n, mult, gens);
        ZLattice::normalize(rows, den.abs())
    }

    pub fn from_elements(n: usize, elems: &[AlgebraElement]) -> Result<Self> {
        let den = elems.iter().fold(BigInt::one(), |acc, e| acc.lcm(&e.den));
        let gens: Vec<Vec<BigInt>> = elems
            .iter()
            .map(|e| e.num.iter().map(|x| x * (&den / &e.den)).collect())
            .collect();
        ZLattice::from_generators(n, &gens, &den)
    }

    /// Z^n, i.e. Z[π] in the power basis.
    pub fn standard(n: usize) -> Self {
        let rows = (0..n)
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
            .collect();
        ZLattice {
            den: BigInt::one(),
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<AlgebraElement> {
        self.rows
            .iter()
            .map(|r| AlgebraElement::new(r.clone(), self.den.clone()))
            .collect()
    }

    /// Rows rescaled to denominator `d` (which must be a multiple of `den`).
    fn rows_at(&self, d: &BigInt) -> Vec<Vec<BigInt>> {
        let f = d / &self.den;
        if f.is_one() {
            return self.rows.clone();
        }
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x * &f).collect())
            .collect()
    }

    /// Covolume: Π pivots / den^n.
    pub fn det(&self) -> BigRational {
        BigRational::new(triangular_det(&self.rows), self.den.pow(self.dim() as u32))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        assert!(!c.is_zero());
        let rows: Vec<Vec<BigInt>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x * c.numer().abs()).collect())
            .collect();
        // scaling by a positive integer keeps the echelon shape but not the reduction
        let n = self.dim();
        let m = triangular_det(&rows);
        ZLattice::from_generators_with_multiple(n, &m, &rows, &(&self.den * c.denom()))
    }

    pub fn contains_element(&self, e: &AlgebraElement) -> bool {
        let num: Vec<BigInt> = e.num.iter().map(|x| x * &self.den).collect();
        if num.iter().any(|x| !(x % &e.den).is_zero()) {
            return false;
        }
        let w: Vec<BigInt> = num.into_iter().map(|x| x / &e.den).collect();
        solve_row_triangular(&self.rows, &w).is_some()
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &ZLattice) -> bool {
        other.basis().iter().all(|b| self.contains_element(b))
    }

    /// Coordinates of `other`'s basis in `self`'s basis; requires containment.
    pub fn coordinates_of(&self, other: &ZLattice) -> Result<Vec<Vec<BigInt>>> {
        let mut out = Vec::with_capacity(self.dim());
        for b in other.basis() {
            let num: Vec<BigInt> = b.num.iter().map(|x| x * &self.den).collect();
            if num.iter().any(|x| !(x % &b.den).is_zero()) {
                return Err(Error::NotContained);
            }
            let w: Vec<BigInt> = num.into_iter().map(|x| x / &b.den).collect();
            out.push(solve_row_triangular(&self.rows, &w).ok_or(Error::NotContained)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            denominator: self.den.to_string(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        let parse = |s: &str| -> Result<BigInt> {
            s.parse()
                .map_err(|_| Error::InvalidInput(format!("bad integer {s}")))
        };
        let den = parse(&j.denominator)?;
        let rows: Vec<Vec<BigInt>> = j
            .rows
            .iter()
            .map(|r| r.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) || den.is_zero() {
            return Err(Error::InvalidInput(
                "lattice rows must form a square matrix".into(),
            ));
        }
        ZLattice::from_generators(n, &rows, &den)
    }
}

/// JSON interchange form `{denominator, rows}` with decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LatticeJson {
    pub denominator: String,
    pub rows: Vec<Vec<String>>,
}

fn same_dim(a: &ZLattice, b: &ZLattice) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::MismatchedAlgebra)
    }
}

pub fn lat_sum(a: &ZLattice, b: &ZLattice) -> Result<ZLattice> {
    same_dim(a, b)?;
    let d = a.den.lcm(&b.den);
    let ra = a.rows_at(&d);
    let m = triangular_det(&ra);
    let mut gens = ra;
    gens.extend(b.rows_at(&d));
    Ok(ZLattice::from_generators_with_multiple(
        a.dim(),
        &m,
        &gens,
        &d,
    ))
}

/// Intersection through the kernel of the stacked system
/// `[A A; B 0]`: rows with vanishing first block carry `A ∩ B` in the second.
pub fn lat_intersect(a: &ZLattice, b: &ZLattice) -> Result<ZLattice> {
    same_dim(a, b)?;
    let n = a.dim();
    let d = a.den.lcm(&b.den);
    let ra = a.rows_at(&d);
    let rb = b.rows_at(&d);
    let mult = triangular_det(&ra) * triangular_det(&rb);
    let mut gens = Vec::with_capacity(2 * n);
    for r in &ra {
        let mut v = r.clone();
        v.extend(r.iter().cloned());
        gens.push(v);
    }
    for r in &rb {
        let mut v = r.clone();
        v.extend(std::iter::repeat_n(BigInt::zero(), n));
        gens.push(v);
    }
    let h = hnf_with_multiple(2 * n, &mult, &gens);
    let lower: Vec<Vec<BigInt>> = h[n..].iter().map(|r| r[n..].to_vec()).collect();
    Ok(ZLattice::normalize(lower, d))
}

/// Generalized index [a : b] = det(b)/det(a).
pub fn index(a: &ZLattice, b: &ZLattice) -> Result<BigRational> {
    same_dim(a, b)?;
    Ok(b.det() / a.det())
}

/// Index [a : b] as an integer; requires b ⊆ a.
pub fn int_index(a: &ZLattice, b: &ZLattice) -> Result<BigInt> {
    let i = index(a, b)?;
    if !i.is_integer() {
        return Err(Error::NotContained);
    }
    Ok(i.to_integer())
}

/// Invariant factors of a/b (b ⊆ a), trivial factors omitted.
pub fn quotient_invariants(a: &ZLattice, b: &ZLattice) -> Result<Vec<BigInt>> {
    same_dim(a, b)?;
    let t = a.coordinates_of(b)?;
    Ok(invariant_factors(&t))
}

/// Dual lattice with respect to the standard coordinate pairing.
fn coordinate_dual(l: &ZLattice) -> ZLattice {
    let (adj, det) = triangular_adjugate(&l.rows);
    let n = l.dim();
    // rows of adj^T times den, over det
    let gens: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|i| &adj[i][j] * &l.den).collect())
        .collect();
    let mult: BigInt = (0..n).map(|i| adj[i][i].abs() * &l.den).product();
    let det = det.abs();
    ZLattice::from_generators_with_multiple(n, &mult, &gens, &det)
}

impl EtaleAlgebra {
    /// Z-span of all pairwise products of basis elements.
    pub fn lat_product(&self, a: &ZLattice, b: &ZLattice) -> Result<ZLattice> {
        let n = self.degree();
        if a.dim() != n || b.dim() != n {
            return Err(Error::MismatchedAlgebra);
        }
        let mut e = crate::linalg::hnf::Echelon::new(n);
        for x in &a.rows {
            for y in &b.rows {
                e.insert(&self.mul_int(x, y));
            }
        }
        let rows = e.finish();
        if rows.len() != n {
            return Err(Error::ZeroDivisor);
        }
        Ok(ZLattice::normalize(rows, &a.den * &b.den))
    }

    /// x·L for an element x.
    pub fn lat_mul_element(&self, l: &ZLattice, x: &AlgebraElement) -> Result<ZLattice> {
        let gens: Vec<Vec<BigInt>> = l.rows.iter().map(|r| self.mul_int(r, &x.num)).collect();
        ZLattice::from_generators(self.degree(), &gens, &(&l.den * &x.den))
            .map_err(|_| Error::ZeroDivisor)
    }

    pub fn lat_power(&self, l: &ZLattice, k: u32, unit: &ZLattice) -> Result<ZLattice> {
        let mut r = unit.clone();
        for _ in 0..k {
            r = self.lat_product(&r, l)?;
        }
        Ok(r)
    }

    /// (a : b) = {x ∈ K : x·b ⊆ a}.
    pub fn colon(&self, a: &ZLattice, b: &ZLattice) -> Result<ZLattice> {
        let n = self.degree();
        if a.dim() != n || b.dim() != n {
            return Err(Error::MismatchedAlgebra);
        }
        // x·(B_j/d2) ∈ (1/d1)·rowspan(A)  ⇔  x · (d1·M_j·adj(A)) / (d2·det A) ∈ Z^n
        let (adj, deta) = triangular_adjugate(&a.rows);
        let mut e = crate::linalg::hnf::Echelon::new(n);
        for bj in &b.rows {
            let mj = self.mult_matrix_int(bj);
            // columns of mj·adj
            for col in 0..n {
                let v: Vec<BigInt> = (0..n)
                    .map(|i| {
                        let mut s = BigInt::zero();
                        for k in 0..n {
                            if !mj[i][k].is_zero() && !adj[k][col].is_zero() {
                                s += &mj[i][k] * &adj[k][col];
                            }
                        }
                        s * &a.den
                    })
                    .collect();
                e.insert(&v);
            }
        }
        let rows = e.finish();
        if rows.len() != n {
            return Err(Error::ZeroDivisor);
        }
        let lambda = ZLattice::normalize(rows, (&b.den * &deta).abs());
        Ok(coordinate_dual(&lambda))
    }

    /// Multiplicator ring (L : L), memoized per algebra.
    pub fn multiplicator(&self, l: &ZLattice) -> Result<ZLattice> {
        if let Some(r) = self.inner.colon_cache.lock().unwrap().get(l) {
            return Ok(r.clone());
        }
        let r = self.colon(l, l)?;
        self.inner
            .colon_cache
            .lock()
            .unwrap()
            .insert(l.clone(), r.clone());
        Ok(r)
    }
}
