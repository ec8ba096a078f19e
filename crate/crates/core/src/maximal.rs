//! ℓ-maximal overorders by radical-multiplicator saturation, the maximal
//! order, and conductors.

use crate::algebra::EtaleAlgebra;
use crate::error::Result;
use crate::factor;
use crate::lattice::{lat_intersect, lat_sum, ZLattice};
use crate::order::{maximal_ideals_above, maximal_ideals_over, MaximalIdeal, Order};
use num_bigint::BigInt;
use std::collections::BTreeMap;

/// Where the list of candidate primes came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorSource {
    TrialDivision,
    PollardRho,
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredIndex {
    pub primes: BTreeMap<BigInt, u32>,
    pub source: FactorSource,
}

impl FactoredIndex {
    /// Primes whose square divides disc(h).
    pub fn from_discriminant(alg: &EtaleAlgebra) -> Result<Self> {
        let disc = crate::poly::discriminant(alg.h());
        let f = factor::factorize(&disc)?;
        let bound = BigInt::from(factor::trial_bound());
        let source = if f.keys().any(|p| p > &bound) {
            FactorSource::PollardRho
        } else {
            FactorSource::TrialDivision
        };
        Ok(FactoredIndex {
            primes: f.into_iter().filter(|(_, e)| *e >= 2).collect(),
            source,
        })
    }

    pub fn user(primes: BTreeMap<BigInt, u32>) -> Self {
        FactoredIndex {
            primes,
            source: FactorSource::UserSupplied,
        }
    }
}

/// The smallest overorder of T that is maximal at every prime above ℓ.
pub fn l_maximal_overorder(alg: &EtaleAlgebra, t: &Order, ell: &BigInt) -> Result<Order> {
    let mut cur = t.clone();
    loop {
        let rad = crate::order::radical(alg, &cur, ell)?;
        let next = alg.multiplicator(&rad)?;
        if next == cur.lattice {
            return Ok(cur);
        }
        cur = Order::from_lattice_unchecked(next);
    }
}

// intersection of the maximal ideals of T lying over m
fn radical_over(alg: &EtaleAlgebra, t: &Order, m: &MaximalIdeal) -> Result<ZLattice> {
    let over = maximal_ideals_over(alg, t, m)?;
    let mut acc = over[0].ideal.clone();
    for big in &over[1..] {
        acc = lat_intersect(&acc, &big.ideal)?;
    }
    Ok(acc)
}

/// R^{(m)}: the largest overorder S of R with (R : S) equal to R or
/// m-primary, i.e. the maximalization of R at m alone.
pub fn m_maximal_overorder(alg: &EtaleAlgebra, r: &Order, m: &MaximalIdeal) -> Result<Order> {
    let mut cur = r.clone();
    loop {
        let rad = radical_over(alg, &cur, m)?;
        let next = alg.multiplicator(&rad)?;
        if next == cur.lattice {
            return Ok(cur);
        }
        cur = Order::from_lattice_unchecked(next);
    }
}

/// O_K as the sum of ℓ-maximalizations of Z[π] over the candidate primes.
pub fn maximal_order(alg: &EtaleAlgebra, hints: Option<&FactoredIndex>) -> Result<Order> {
    if let Some(l) = alg.inner.maximal_order.get() {
        return Ok(Order::from_lattice_unchecked(l.clone()));
    }
    let owned;
    let primes = match hints {
        Some(h) => h,
        None => {
            owned = FactoredIndex::from_discriminant(alg)?;
            &owned
        }
    };
    let base = Order::equation_order(alg);
    let mut acc = base.lattice.clone();
    for ell in primes.primes.keys() {
        let om = l_maximal_overorder(alg, &base, ell)?;
        acc = lat_sum(&acc, &om.lattice)?;
    }
    let _ = alg.inner.maximal_order.set(acc.clone());
    Ok(Order::from_lattice_unchecked(acc))
}

/// f_T = (T : O_K).
pub fn conductor(alg: &EtaleAlgebra, t: &Order) -> Result<ZLattice> {
    let ok = maximal_order(alg, None)?;
    alg.colon(&t.lattice, &ok.lattice)
}

/// (T : O) for O the ℓ-maximal overorder of T; agrees with f_T locally at ℓ.
pub fn conductor_l_part(alg: &EtaleAlgebra, t: &Order, ell: &BigInt) -> Result<ZLattice> {
    let o = l_maximal_overorder(alg, t, ell)?;
    alg.colon(&t.lattice, &o.lattice)
}

/// All primes at which T is not maximal, with the maximal ideals of T there
/// that are singular.
pub fn singular_primes(
    alg: &EtaleAlgebra,
    t: &Order,
    hints: Option<&FactoredIndex>,
) -> Result<Vec<MaximalIdeal>> {
    let ok = maximal_order(alg, hints)?;
    let idx = crate::lattice::int_index(&ok.lattice, &t.lattice)?;
    let mut out = Vec::new();
    if idx == BigInt::from(1) {
        return Ok(out);
    }
    for ell in factor::factorize(&idx)?.keys() {
        for m in maximal_ideals_above(alg, t, ell)? {
            if m.is_singular {
                out.push(m);
            }
        }
    }
    Ok(out)
}
