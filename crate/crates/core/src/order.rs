//! Orders, fractional ideals and maximal ideals above a rational prime.

use crate::algebra::{AlgebraElement, EtaleAlgebra};
use crate::error::{Error, Result};
use crate::factor::exact_log;
use crate::lattice::{int_index, lat_intersect, lat_sum, LatticeJson, ZLattice};
use crate::linalg::hnf::{hnf, solve_row_triangular, triangular_det};
use crate::linalg::modp::{self, mulmod};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// An order of K: a full-rank lattice that is a ring containing 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order {
    pub lattice: ZLattice,
}

/// A fractional ideal together with an order that stabilizes it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FractionalIdeal {
    pub lattice: ZLattice,
    pub over: Order,
}

/// A maximal ideal `m` of `order` with residue field of size `ell^degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MaximalIdeal {
    pub residue_size: BigInt,
    pub ideal: ZLattice,
    pub order: Order,
    pub ell: u64,
    pub degree: u32,
    pub is_singular: bool,
}

#[derive(Serialize)]
pub struct OrderJson {
    pub kind: &'static str,
    #[serde(flatten)]
    pub lattice: LatticeJson,
}

impl Order {
    /// Wraps a lattice already known to be an order.
    pub fn from_lattice_unchecked(lattice: ZLattice) -> Self {
        Order { lattice }
    }

    /// Checks ring axioms and integrality.
    pub fn from_lattice(alg: &EtaleAlgebra, lattice: ZLattice) -> Result<Self> {
        if !lattice.contains_element(&alg.one()) {
            return Err(Error::InvalidInput("lattice does not contain 1".into()));
        }
        if alg.lat_product(&lattice, &lattice)? != lattice {
            return Err(Error::InvalidInput(
                "lattice is not closed under multiplication".into(),
            ));
        }
        if lattice.basis().iter().any(|b| !alg.is_integral(b)) {
            return Err(Error::NotIntegral);
        }
        Ok(Order { lattice })
    }

    /// Z[π].
    pub fn equation_order(alg: &EtaleAlgebra) -> Self {
        Order {
            lattice: ZLattice::standard(alg.degree()),
        }
    }

    /// Z[π, q/π].
    pub fn z_pi_q_pi(alg: &EtaleAlgebra) -> Result<Self> {
        order_from_generators(alg, &[alg.pi(), alg.q_over_pi()?])
    }

    pub fn contains(&self, other: &Order) -> bool {
        self.lattice.contains(&other.lattice)
    }

    pub fn to_json(&self) -> OrderJson {
        OrderJson {
            kind: "order",
            lattice: self.lattice.to_json(),
        }
    }
}

impl MaximalIdeal {
    pub fn as_fractional(&self) -> FractionalIdeal {
        FractionalIdeal {
            lattice: self.ideal.clone(),
            over: self.order.clone(),
        }
    }

    pub fn ell_big(&self) -> BigInt {
        BigInt::from(self.ell)
    }
}

/// Smallest order containing Z and `elems`, found by saturating the module
/// under multiplication by the generators.
pub fn order_from_generators(alg: &EtaleAlgebra, elems: &[AlgebraElement]) -> Result<Order> {
    let n = alg.degree();
    for e in elems {
        if !alg.is_integral(e) {
            return Err(Error::NotIntegral);
        }
    }
    let mut den = elems.iter().fold(BigInt::one(), |acc, e| acc.lcm(&e.den));
    let mut gens: Vec<Vec<BigInt>> = vec![alg.one().num.iter().map(|x| x * &den).collect()];
    for e in elems {
        gens.push(e.num.iter().map(|x| x * (&den / &e.den)).collect());
    }
    let mut rows = hnf(n, &gens);
    loop {
        // products of the current module with each generator
        let mut new_den = den.clone();
        for e in elems {
            new_den = new_den.lcm(&(&den * &e.den));
        }
        let scale = &new_den / &den;
        let mut next: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|x| x * &scale).collect())
            .collect();
        for r in &rows {
            for e in elems {
                let f = &new_den / (&den * &e.den);
                next.push(alg.mul_int(r, &e.num).into_iter().map(|x| x * &f).collect());
            }
        }
        let mut next_rows = hnf(n, &next);
        // remove common content with the denominator
        let mut g = new_den.clone();
        for r in &next_rows {
            for x in r {
                g = g.gcd(x);
            }
        }
        let next_den = &new_den / &g;
        for r in next_rows.iter_mut() {
            for x in r.iter_mut() {
                *x = &*x / &g;
            }
        }
        if next_rows == rows && next_den == den {
            break;
        }
        rows = next_rows;
        den = next_den;
    }
    if rows.len() != n {
        return Err(Error::RankDeficient);
    }
    Ok(Order {
        lattice: ZLattice::from_generators(n, &rows, &den)?,
    })
}

/// The finite F_ℓ-algebra T/ℓT with structure constants in T's basis.
pub struct ResidueAlgebra {
    pub p: u64,
    pub n: usize,
    table: Vec<Vec<Vec<u64>>>,
    pub one: Vec<u64>,
}

fn coords_in(l: &ZLattice, e: &AlgebraElement) -> Option<Vec<BigInt>> {
    let num: Vec<BigInt> = e.num.iter().map(|x| x * l.den()).collect();
    if num.iter().any(|x| !(x % &e.den).is_zero()) {
        return None;
    }
    let w: Vec<BigInt> = num.into_iter().map(|x| x / &e.den).collect();
    solve_row_triangular(l.rows(), &w)
}

fn reduce_mod(v: &[BigInt], p: u64) -> Vec<u64> {
    let bp = BigInt::from(p);
    v.iter()
        .map(|x| x.mod_floor(&bp).to_u64().unwrap())
        .collect()
}

impl ResidueAlgebra {
    pub fn new(alg: &EtaleAlgebra, t: &Order, p: u64) -> Self {
        let basis = t.lattice.basis();
        let n = basis.len();
        let mut table = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in i..n {
                let prod = alg.mul(&basis[i], &basis[j]);
                let c = coords_in(&t.lattice, &prod).expect("order closed under multiplication");
                let c = reduce_mod(&c, p);
                table[i][j] = c.clone();
                table[j][i] = c;
            }
        }
        let one = reduce_mod(&coords_in(&t.lattice, &alg.one()).expect("1 in order"), p);
        ResidueAlgebra { p, n, table, one }
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut out = vec![0u64; self.n];
        for i in 0..self.n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.n {
                if y[j] == 0 {
                    continue;
                }
                let c = mulmod(x[i], y[j], p);
                for (o, t) in out.iter_mut().zip(&self.table[i][j]) {
                    if *t != 0 {
                        *o = modp::addmod(*o, mulmod(c, *t, p), p);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> Vec<u64> {
        let mut base = x.to_vec();
        let mut acc = self.one.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn unit(&self, i: usize) -> Vec<u64> {
        let mut v = vec![0u64; self.n];
        v[i] = 1;
        v
    }

    /// Matrix of the Frobenius x ↦ x^ℓ (row convention).
    pub fn frobenius(&self) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|i| self.pow(&self.unit(i), self.p))
            .collect()
    }

    /// Matrix of y ↦ y·x.
    pub fn mult_matrix(&self, x: &[u64]) -> Vec<Vec<u64>> {
        (0..self.n).map(|i| self.mul(&self.unit(i), x)).collect()
    }

    /// Nilradical as a subspace basis.
    pub fn radical(&self) -> Vec<Vec<u64>> {
        let f = self.frobenius();
        let mut fk = f.clone();
        let mut reach = self.p as u128;
        while reach < self.n as u128 {
            fk = modp::mat_mul(&fk, &f, self.p);
            reach *= self.p as u128;
        }
        modp::span(&modp::left_kernel(&fk, self.n, self.p), self.p)
    }

    /// Local factors A_i (as subspaces) of the decomposition A = ⊕ A·e_i.
    pub fn local_factors(&self) -> Vec<Vec<Vec<u64>>> {
        let p = self.p;
        let n = self.n;
        let mut fmi = self.frobenius();
        for (i, row) in fmi.iter_mut().enumerate() {
            row[i] = modp::submod(row[i], 1, p);
        }
        let fix = modp::span(&modp::left_kernel(&fmi, n, p), p);
        let r = fix.len();
        let full: Vec<Vec<u64>> = (0..n).map(|i| self.unit(i)).collect();
        let mut pieces = vec![full];
        for e in &fix {
            if pieces.len() == r {
                break;
            }
            let roots = self.eigenvalues(e);
            let me = self.mult_matrix(e);
            let mut next = Vec::new();
            for piece in &pieces {
                for &c in &roots {
                    let mut shifted = me.clone();
                    for (i, row) in shifted.iter_mut().enumerate() {
                        row[i] = modp::submod(row[i], c, p);
                    }
                    let images: Vec<Vec<u64>> = piece
                        .iter()
                        .map(|v| modp::vec_mat(v, &shifted, p))
                        .collect();
                    let ker = modp::left_kernel(&images, n, p);
                    if ker.is_empty() {
                        continue;
                    }
                    let vecs: Vec<Vec<u64>> =
                        ker.iter().map(|k| modp::vec_mat(k, piece, p)).collect();
                    next.push(modp::span(&vecs, p));
                }
            }
            pieces = next;
        }
        debug_assert_eq!(pieces.len(), r);
        pieces
    }

    // eigenvalues of multiplication by a Frobenius-fixed element
    fn eigenvalues(&self, e: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut powers = vec![self.one.clone()];
        loop {
            let next = self.mul(powers.last().unwrap(), e);
            let mut stacked = powers.clone();
            stacked.push(next.clone());
            let ker = modp::left_kernel(&stacked, self.n, p);
            if let Some(k) = ker.iter().find(|k| *k.last().unwrap() != 0) {
                let inv = modp::invmod(*k.last().unwrap(), p);
                let monic: Vec<u64> = k.iter().map(|c| mulmod(*c, inv, p)).collect();
                return modp::split_roots(&monic, p);
            }
            powers.push(next);
        }
    }
}

/// Lattice of T whose image in T/ℓT is the subspace `w` (coordinates in T's basis).
pub fn lift_subspace(t: &Order, p: u64, w: &[Vec<u64>]) -> ZLattice {
    let rows = t.lattice.rows();
    let n = rows.len();
    let bp = BigInt::from(p);
    let mut gens: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x * &bp).collect())
        .collect();
    for v in w {
        let mut g = vec![BigInt::zero(); n];
        for (c, r) in v.iter().zip(rows) {
            if *c != 0 {
                for (gi, ri) in g.iter_mut().zip(r) {
                    *gi += ri * BigInt::from(*c);
                }
            }
        }
        gens.push(g);
    }
    let mult = triangular_det(rows) * bp.pow(n as u32);
    ZLattice::from_generators_with_multiple(n, &mult, &gens, t.lattice.den())
}

fn check_prime(ell: &BigInt) -> Result<u64> {
    let p = ell.to_u64().filter(|&p| p < (1u64 << 62)).ok_or_else(|| {
        Error::InvalidInput(format!("prime {ell} is outside the supported range"))
    })?;
    if !crate::factor::is_probable_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    Ok(p)
}

/// ℓ-radical: the intersection of all maximal ideals of T above ℓ.
pub fn radical(alg: &EtaleAlgebra, t: &Order, ell: &BigInt) -> Result<ZLattice> {
    let p = check_prime(ell)?;
    let a = ResidueAlgebra::new(alg, t, p);
    Ok(lift_subspace(t, p, &a.radical()))
}

/// All maximal ideals of T containing ℓ, sorted by (residue size, lattice).
pub fn maximal_ideals_above(
    alg: &EtaleAlgebra,
    t: &Order,
    ell: &BigInt,
) -> Result<Vec<MaximalIdeal>> {
    let p = check_prime(ell)?;
    let a = ResidueAlgebra::new(alg, t, p);
    let j = a.radical();
    let pieces = a.local_factors();
    let mut out = Vec::new();
    for i in 0..pieces.len() {
        let mut gens = j.clone();
        for (k, piece) in pieces.iter().enumerate() {
            if k != i {
                gens.extend(piece.iter().cloned());
            }
        }
        let w = modp::span(&gens, p);
        let degree = (a.n - w.len()) as u32;
        let ideal = lift_subspace(t, p, &w);
        let is_singular = alg.multiplicator(&ideal)? != t.lattice;
        out.push(MaximalIdeal {
            residue_size: BigInt::from(p).pow(degree),
            ideal,
            order: t.clone(),
            ell: p,
            degree,
            is_singular,
        });
    }
    out.sort();
    Ok(out)
}

/// Maximal ideals of T lying over the maximal ideal `m` of a suborder.
pub fn maximal_ideals_over(
    alg: &EtaleAlgebra,
    t: &Order,
    m: &MaximalIdeal,
) -> Result<Vec<MaximalIdeal>> {
    Ok(maximal_ideals_above(alg, t, &m.ell_big())?
        .into_iter()
        .filter(|big| big.ideal.contains(&m.ideal))
        .collect())
}

pub fn is_singular(m: &MaximalIdeal) -> bool {
    m.is_singular
}

pub fn multiplicator_ring(alg: &EtaleAlgebra, i: &ZLattice) -> Result<Order> {
    Ok(Order {
        lattice: alg.multiplicator(i)?,
    })
}

/// Cohen–Macaulay type: dim over T/m of (T : m)/T.
pub fn cm_type(alg: &EtaleAlgebra, m: &MaximalIdeal) -> Result<u32> {
    let dual = alg.colon(&m.order.lattice, &m.ideal)?;
    let idx = int_index(&dual, &m.order.lattice)?;
    let e = exact_log(&idx, &m.ell_big())
        .ok_or_else(|| Error::InvalidInput("colon quotient not an ℓ-group".into()))?;
    Ok(e / m.degree)
}

pub fn is_gorenstein_at(alg: &EtaleAlgebra, t: &Order, ell: &BigInt) -> Result<bool> {
    for m in maximal_ideals_above(alg, t, ell)? {
        if cm_type(alg, &m)? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Gorenstein at every maximal ideal of T lying over `m`.
pub fn is_gorenstein_over(alg: &EtaleAlgebra, t: &Order, m: &MaximalIdeal) -> Result<bool> {
    for big in maximal_ideals_over(alg, t, m)? {
        if cm_type(alg, &big)? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The order R + I for an ideal-like lattice I.
pub fn order_plus(r: &Order, i: &ZLattice) -> Result<Order> {
    Ok(Order {
        lattice: lat_sum(&r.lattice, i)?,
    })
}

/// m ∩ R for an overorder's maximal ideal `big`, as a maximal ideal of `r`.
pub fn contract(
    alg: &EtaleAlgebra,
    r: &Order,
    big: &ZLattice,
    ell: &BigInt,
) -> Result<MaximalIdeal> {
    let small = lat_intersect(big, &r.lattice)?;
    maximal_ideals_above(alg, r, ell)?
        .into_iter()
        .find(|m| m.ideal == small)
        .ok_or_else(|| Error::InvalidInput("contraction is not a maximal ideal".into()))
}
