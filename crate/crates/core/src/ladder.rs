//! Minimal l-overorders, splitting types, multiplicator ladders and overorder
//! enumeration.

use crate::algebra::{AlgebraElement, EtaleAlgebra};
use crate::error::{Error, NotALadderReason, Result};
use crate::factor;
use crate::lattice::{int_index, lat_intersect, lat_sum, ZLattice};
use crate::linalg::modp;
use crate::maximal::{conductor, m_maximal_overorder, maximal_order, singular_primes};
use crate::order::{cm_type, maximal_ideals_above, maximal_ideals_over, MaximalIdeal, Order};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Default bound on [top : bottom] for exhaustive order enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 16;

/// How l behaves in its multiplicator ring T = (l : l).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplittingType {
    /// T/l is a field of prime degree over R/l.
    Inert { degree: u32 },
    /// Two maximal ideals of T above l.
    Split { ideals: [ZLattice; 2] },
    /// Unique L above l with L² = l.
    Ramified { ideal: ZLattice },
    /// Unique L above l with L² ⊊ l.
    Singular { ideal: ZLattice },
}

impl SplittingType {
    /// δ_l: −1, 0, +1 for inert, ramified, split.
    pub fn delta(&self) -> Option<i8> {
        match self {
            SplittingType::Inert { .. } => Some(-1),
            SplittingType::Ramified { .. } => Some(0),
            SplittingType::Split { .. } => Some(1),
            SplittingType::Singular { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SplittingType::Inert { .. } => "inert",
            SplittingType::Split { .. } => "split",
            SplittingType::Ramified { .. } => "ramified",
            SplittingType::Singular { .. } => "singular",
        }
    }
}

impl std::fmt::Display for SplittingType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplittingType::Inert { degree } => write!(f, "Inert({degree})"),
            SplittingType::Split { .. } => write!(f, "Split"),
            SplittingType::Ramified { .. } => write!(f, "Ramified"),
            SplittingType::Singular { .. } => write!(f, "Singular"),
        }
    }
}

/// R = R_d ⊊ … ⊊ R_0 with `rungs[i]` = R_i.
#[derive(Clone, Debug)]
pub struct MultiplicatorLadder {
    pub rungs: Vec<Order>,
    pub base_prime: MaximalIdeal,
    /// `singular_ideals[i]` is L_i for i ≥ 1; entry 0 is unused.
    pub singular_ideals: Vec<Option<MaximalIdeal>>,
    /// f_{R_i} for each i.
    pub conductors: Vec<ZLattice>,
    /// Behaviour of L_1 in R_0; `None` when d = 0.
    pub top_splitting: Option<SplittingType>,
}

impl MultiplicatorLadder {
    pub fn length(&self) -> usize {
        self.rungs.len() - 1
    }

    pub fn base(&self) -> &Order {
        self.rungs.last().unwrap()
    }

    pub fn top(&self) -> &Order {
        &self.rungs[0]
    }

    pub fn delta(&self) -> Option<i8> {
        self.top_splitting.as_ref().and_then(|s| s.delta())
    }

    /// #(R/l).
    pub fn residue_size(&self) -> &BigInt {
        &self.base_prime.residue_size
    }
}

/// One normalized representative per line of F_p^k.
fn lines(k: usize, p: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for lead in 0..k {
        let free = k - lead - 1;
        let count = (p as u128).pow(free as u32);
        for mut idx in 0..count {
            let mut v = vec![0u64; k];
            v[lead] = 1;
            for j in (lead + 1)..k {
                v[j] = (idx % p as u128) as u64;
                idx /= p as u128;
            }
            out.push(v);
        }
    }
    out
}

/// S[x]: the smallest order containing S and x.
pub fn adjoin(alg: &EtaleAlgebra, s: &Order, x: &AlgebraElement) -> Result<Order> {
    let mut m = s.lattice.clone();
    loop {
        // x may be a zero divisor, so m·x need not have full rank
        let den = m.den() * &x.den;
        let mut gens: Vec<Vec<BigInt>> = m
            .rows()
            .iter()
            .map(|r| r.iter().map(|c| c * &x.den).collect())
            .collect();
        gens.extend(m.rows().iter().map(|r| alg.mul_int(r, &x.num)));
        let next = ZLattice::from_generators(alg.degree(), &gens, &den)?;
        if next == m {
            return Ok(Order::from_lattice_unchecked(m));
        }
        m = next;
    }
}

/// Representatives x (one per line) of the nonzero classes of U/S, where
/// U = top ∩ (1/ℓ)S; every minimal overorder of S inside top with
/// ℓ-power index is S[x] for one of them.
fn candidate_elements(
    alg: &EtaleAlgebra,
    s: &Order,
    top: &Order,
    ell: &BigInt,
) -> Result<Vec<AlgebraElement>> {
    let _ = alg;
    let p = ell
        .to_u64()
        .ok_or_else(|| Error::InvalidInput("prime too large".into()))?;
    let u = lat_intersect(
        &top.lattice,
        &s.lattice
            .scale(&BigRational::new(BigInt::one(), ell.clone())),
    )?;
    let coords = u.coordinates_of(&s.lattice)?;
    let bp = ell.clone();
    let mut rows: Vec<Vec<u64>> = coords
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| x.mod_floor(&bp).to_u64().unwrap())
                .collect()
        })
        .collect();
    let pivots = modp::rref(&mut rows, p);
    let n = u.dim();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis = u.basis();
    let mut out = Vec::new();
    for line in lines(free.len(), p) {
        let mut num = vec![BigInt::zero(); n];
        for (c, &col) in line.iter().zip(&free) {
            if *c != 0 {
                let b = &basis[col];
                // basis elements share the lattice denominator
                for (acc, x) in num.iter_mut().zip(&b.num) {
                    *acc += x * BigInt::from(*c) * (u.den() / &b.den);
                }
            }
        }
        out.push(AlgebraElement::new(num, u.den().clone()));
    }
    Ok(out)
}

/// Orders S' with S ⊊ S' ⊆ top reachable by adjoining one element of
/// (top ∩ (1/ℓ)S) for some prime ℓ dividing [top : S]; contains every
/// minimal overorder of S inside top.
pub fn one_step_overorders(alg: &EtaleAlgebra, s: &Order, top: &Order) -> Result<Vec<Order>> {
    let idx = int_index(&top.lattice, &s.lattice)?;
    let mut out = BTreeSet::new();
    if idx.is_one() {
        return Ok(Vec::new());
    }
    for ell in factor::factorize(&idx)?.keys() {
        for x in candidate_elements(alg, s, top, ell)? {
            out.insert(adjoin(alg, s, &x)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Minimal overorders of S inside top.
pub fn minimal_overorders_within(alg: &EtaleAlgebra, s: &Order, top: &Order) -> Result<Vec<Order>> {
    let cands = one_step_overorders(alg, s, top)?;
    Ok(cands
        .iter()
        .filter(|c| !cands.iter().any(|d| d != *c && c.contains(d)))
        .cloned()
        .collect())
}

/// All orders S with bottom ⊆ S ⊆ top, sorted by decreasing index in top
/// and then canonically.
pub fn orders_between(
    alg: &EtaleAlgebra,
    bottom: &Order,
    top: &Order,
    limit: u64,
) -> Result<Vec<Order>> {
    if !top.contains(bottom) {
        return Err(Error::NotContained);
    }
    let idx = int_index(&top.lattice, &bottom.lattice)?;
    if idx > BigInt::from(limit) {
        return Err(Error::EnumerationTooLarge {
            size: idx.to_string(),
            limit: limit.to_string(),
        });
    }
    let mut seen: HashSet<Order> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(bottom.clone());
    queue.push_back(bottom.clone());
    while let Some(s) = queue.pop_front() {
        for t in one_step_overorders(alg, &s, top)? {
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
    }
    sort_orders(top, seen.into_iter().collect())
}

fn sort_orders(top: &Order, v: Vec<Order>) -> Result<Vec<Order>> {
    let mut keyed = Vec::with_capacity(v.len());
    for o in v {
        keyed.push((int_index(&top.lattice, &o.lattice)?, o));
    }
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(keyed.into_iter().map(|(_, o)| o).collect())
}

/// All l-overorders of R: the orders between R and its l-maximalization.
pub fn l_overorders(
    alg: &EtaleAlgebra,
    r: &Order,
    l: &MaximalIdeal,
    limit: u64,
) -> Result<Vec<Order>> {
    let top = m_maximal_overorder(alg, r, l)?;
    orders_between(alg, r, &top, limit)
}

/// T = (l : l) together with whether T is certified to be the unique
/// minimal l-overorder of R.
pub fn minimal_l_overorder(
    alg: &EtaleAlgebra,
    r: &Order,
    l: &MaximalIdeal,
) -> Result<(Order, bool)> {
    if !l.is_singular {
        return Err(Error::NotSingular);
    }
    let t = Order::from_lattice_unchecked(alg.multiplicator(&l.ideal)?);
    if cm_type(alg, l)? == 1 {
        return Ok((t, true));
    }
    let top = m_maximal_overorder(alg, r, l)?;
    let unique = candidate_elements(alg, r, &top, &l.ell_big())?
        .iter()
        .map(|x| adjoin(alg, r, x))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .all(|s| s.contains(&t));
    Ok((t, unique))
}

/// Maximal ideals of T containing the R-ideal l.
fn ideals_of_over(alg: &EtaleAlgebra, t: &Order, l: &MaximalIdeal) -> Result<Vec<MaximalIdeal>> {
    maximal_ideals_over(alg, t, l)
}

/// Inert / split / ramified / singular behaviour of l in (l : l).
pub fn classify_splitting(
    alg: &EtaleAlgebra,
    r: &Order,
    l: &MaximalIdeal,
) -> Result<SplittingType> {
    let (t, unique) = minimal_l_overorder(alg, r, l)?;
    if !unique {
        return Err(Error::NotMinimal);
    }
    let above = ideals_of_over(alg, &t, l)?;
    match above.len() {
        2 => Ok(SplittingType::Split {
            ideals: [above[0].ideal.clone(), above[1].ideal.clone()],
        }),
        1 => {
            let m = &above[0];
            if m.ideal == l.ideal {
                Ok(SplittingType::Inert {
                    degree: m.degree / l.degree,
                })
            } else {
                let sq = alg.lat_product(&m.ideal, &m.ideal)?;
                if sq == l.ideal {
                    Ok(SplittingType::Ramified {
                        ideal: m.ideal.clone(),
                    })
                } else {
                    Ok(SplittingType::Singular {
                        ideal: m.ideal.clone(),
                    })
                }
            }
        }
        _ => Err(Error::NotMinimal),
    }
}

/// Builds the l-multiplicator ladder of R, or explains which condition of
/// the definition fails.
pub fn build_ladder(
    alg: &EtaleAlgebra,
    r: &Order,
    l: &MaximalIdeal,
) -> Result<MultiplicatorLadder> {
    // climb R_{i-1} = (L_i : L_i), bottom first
    let mut chain = vec![r.clone()];
    let mut ideals: Vec<MaximalIdeal> = Vec::new();
    let mut cur_l = l.clone();
    if l.is_singular {
        loop {
            let t = Order::from_lattice_unchecked(alg.multiplicator(&cur_l.ideal)?);
            let above = ideals_of_over(alg, &t, l)?;
            ideals.push(cur_l.clone());
            chain.push(t.clone());
            if above.iter().all(|m| !m.is_singular) {
                break;
            }
            if above.len() > 1 {
                // steps above the base at which the rung sits
                return Err(Error::NotALadder {
                    reason: NotALadderReason::MultipleMaximalIdeals {
                        rung: chain.len() - 1,
                        count: above.len(),
                    },
                });
            }
            cur_l = above[0].clone();
        }
    }
    chain.reverse();
    ideals.reverse();
    let d = chain.len() - 1;
    let top = chain[0].clone();
    let l_top = m_maximal_overorder(alg, r, l)?;
    if l_top != top {
        return Err(Error::NotALadder {
            reason: NotALadderReason::ExtraOverorders {
                found: 0,
                rungs: d + 1,
            },
        });
    }
    // every minimal l-overorder of R_i must be R_{i-1}
    for i in (1..=d).rev() {
        for x in candidate_elements(alg, &chain[i], &top, &l.ell_big())? {
            let s = adjoin(alg, &chain[i], &x)?;
            if !s.contains(&chain[i - 1]) {
                if chain[i - 1].contains(&s) {
                    return Err(Error::NotALadder {
                        reason: NotALadderReason::MultiplicatorRingJump { rung: i },
                    });
                }
                let found = orders_between(alg, r, &top, DEFAULT_ENUMERATION_LIMIT)
                    .map(|v| v.len())
                    .unwrap_or(d + 2);
                return Err(Error::NotALadder {
                    reason: NotALadderReason::ExtraOverorders {
                        found,
                        rungs: d + 1,
                    },
                });
            }
        }
    }
    let mut singular_ideals = vec![None];
    singular_ideals.extend(ideals.iter().cloned().map(Some));
    let conductors = chain
        .iter()
        .map(|o| conductor(alg, o))
        .collect::<Result<Vec<_>>>()?;
    let top_splitting = if d >= 1 {
        Some(classify_splitting(
            alg,
            &chain[1],
            singular_ideals[1].as_ref().unwrap(),
        )?)
    } else {
        None
    };
    Ok(MultiplicatorLadder {
        rungs: chain,
        base_prime: l.clone(),
        singular_ideals,
        conductors,
        top_splitting,
    })
}

/// Checks L_i = l·R_{i−1}, f_{R_i} = l^i·f_{R_0} and R_i = R + l^i·f_{R_0}.
pub fn check_ladder_laws(alg: &EtaleAlgebra, ladder: &MultiplicatorLadder) -> Result<bool> {
    let r = ladder.base();
    let l = &ladder.base_prime.ideal;
    let f0 = &ladder.conductors[0];
    let mut lp = ladder.rungs[0].lattice.clone();
    for i in 0..=ladder.length() {
        if i > 0 {
            lp = alg.lat_product(&lp, l)?;
            let li = ladder.singular_ideals[i].as_ref().unwrap();
            if alg.lat_product(l, &ladder.rungs[i - 1].lattice)? != li.ideal {
                return Ok(false);
            }
        }
        // lp = l^i·R_0 (R_0 for i = 0)
        let fi = alg.lat_product(&lp, f0)?;
        if fi != ladder.conductors[i] {
            return Ok(false);
        }
        if lat_sum(&r.lattice, &fi)? != ladder.rungs[i].lattice {
            return Ok(false);
        }
    }
    Ok(true)
}

/// v_P(f) for an O_K-ideal f and a maximal ideal P of O_K.
pub fn valuation(alg: &EtaleAlgebra, f: &ZLattice, p: &MaximalIdeal) -> Result<usize> {
    let ok = &p.order.lattice;
    let mut pk = ok.clone();
    let mut k = 0;
    loop {
        let next = alg.lat_product(&pk, &p.ideal)?;
        if !next.contains(f) {
            return Ok(k);
        }
        pk = next;
        k += 1;
    }
}

/// Recomputes d from the valuations of f_R at the primes of O_K above l.
pub fn ladder_length_from_conductor(
    alg: &EtaleAlgebra,
    ladder: &MultiplicatorLadder,
) -> Result<usize> {
    let d = ladder.length();
    let split = match &ladder.top_splitting {
        None => return Ok(0),
        Some(s) => s,
    };
    let ok = maximal_order(alg, None)?;
    let primes = maximal_ideals_above(alg, &ok, &ladder.base_prime.ell_big())?
        .into_iter()
        .filter(|p| p.ideal.contains(&ladder.base_prime.ideal))
        .collect::<Vec<_>>();
    let f = ladder.conductors.last().unwrap();
    let vals = primes
        .iter()
        .map(|p| valuation(alg, f, p))
        .collect::<Result<Vec<_>>>()?;
    let from_cond = match (split, vals.as_slice()) {
        (SplittingType::Ramified { .. }, [v]) => v / 2,
        (SplittingType::Inert { .. }, [v]) => *v,
        (SplittingType::Split { .. }, [a, b]) if a == b => *a,
        _ => usize::MAX,
    };
    if from_cond != d {
        return Err(Error::ValuationMismatch {
            constructed: d,
            from_conductor: from_cond.min(usize::MAX - 1),
        });
    }
    Ok(from_cond)
}

/// Every l-overorder of R is Gorenstein at the maximal ideals above l.
pub fn is_bass_at(alg: &EtaleAlgebra, r: &Order, l: &MaximalIdeal) -> Result<bool> {
    if !l.is_singular {
        return Ok(true);
    }
    for s in l_overorders(alg, r, l, DEFAULT_ENUMERATION_LIMIT)? {
        for big in ideals_of_over(alg, &s, l)? {
            if cm_type(alg, &big)? != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Same test run over all overorders of R.
pub fn is_bass_at_global(alg: &EtaleAlgebra, r: &Order, l: &MaximalIdeal) -> Result<bool> {
    for s in enumerate_overorders(alg, r)? {
        for big in ideals_of_over(alg, &s, l)? {
            if cm_type(alg, &big)? != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Bass at every singular maximal ideal.
pub fn is_bass(alg: &EtaleAlgebra, r: &Order) -> Result<bool> {
    for m in singular_primes(alg, r, None)? {
        if !is_bass_at(alg, r, &m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All overorders of R. Uses R + Π m_i^{k_i}·O_K when R has a ladder at
/// every singular prime, otherwise exhaustive enumeration up to O_K.
pub fn enumerate_overorders(alg: &EtaleAlgebra, r: &Order) -> Result<Vec<Order>> {
    let ok = maximal_order(alg, None)?;
    let sing = singular_primes(alg, r, None)?;
    let mut ladders = Vec::new();
    for m in &sing {
        match build_ladder(alg, r, m) {
            Ok(l) => ladders.push(l),
            Err(Error::NotALadder { .. }) | Err(Error::NotMinimal) => {
                return enumerate_overorders_brute(alg, r, DEFAULT_ENUMERATION_LIMIT)
            }
            Err(e) => return Err(e),
        }
    }
    // powers (m·O_K)^k for k = 0..=d
    let mut powers = Vec::new();
    for (m, lad) in sing.iter().zip(&ladders) {
        let mo = alg.lat_product(&m.ideal, &ok.lattice)?;
        let mut v = vec![ok.lattice.clone()];
        for _ in 0..lad.length() {
            let next = alg.lat_product(v.last().unwrap(), &mo)?;
            v.push(next);
        }
        powers.push(v);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; powers.len()];
    loop {
        let mut prod = ok.lattice.clone();
        for (j, &k) in idx.iter().enumerate() {
            prod = alg.lat_product(&prod, &powers[j][k])?;
        }
        out.push(Order::from_lattice_unchecked(lat_sum(&r.lattice, &prod)?));
        // next exponent tuple
        let mut j = 0;
        loop {
            if j == idx.len() {
                return sort_orders(&ok, out);
            }
            idx[j] += 1;
            if idx[j] < powers[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

pub fn enumerate_overorders_brute(alg: &EtaleAlgebra, r: &Order, limit: u64) -> Result<Vec<Order>> {
    let ok = maximal_order(alg, None)?;
    orders_between(alg, r, &ok, limit)
}

/// Number of l-ladders among the overorders of R: Π over the other singular
/// primes m of the number of m-overorders.
pub fn count_ladders(alg: &EtaleAlgebra, r: &Order, l: &MaximalIdeal) -> Result<usize> {
    let mut count = 1;
    for m in singular_primes(alg, r, None)? {
        if m.ideal == l.ideal {
            continue;
        }
        count *= l_overorders(alg, r, &m, DEFAULT_ENUMERATION_LIMIT)?.len();
    }
    Ok(count)
}

/// The maximal ideal of R equal to the lattice `ideal`, if any.
pub fn find_maximal_ideal(
    alg: &EtaleAlgebra,
    r: &Order,
    ideal: &ZLattice,
    ell: &BigInt,
) -> Result<Option<MaximalIdeal>> {
    Ok(maximal_ideals_above(alg, r, ell)?
        .into_iter()
        .find(|m| &m.ideal == ideal))
}

/// Searches maximal suborders R of O containing L² with (l : l) = O for
/// l = L ∩ R and R Bass at l; the first in canonical order is returned.
pub fn find_base_order(
    alg: &EtaleAlgebra,
    o: &Order,
    big: &MaximalIdeal,
) -> Result<Option<(Order, MaximalIdeal)>> {
    let n = alg.degree();
    let l2 = alg.lat_product(&big.ideal, &big.ideal)?;
    let mut gens = l2.basis();
    gens.push(alg.one());
    let s0 = ZLattice::from_elements(n, &gens)?;
    let s0 = Order::from_lattice_unchecked(s0);
    let all = orders_between(alg, &s0, o, DEFAULT_ENUMERATION_LIMIT)?;
    let proper: Vec<&Order> = all.iter().filter(|s| *s != o).collect();
    let mut maximal: Vec<&Order> = proper
        .iter()
        .filter(|s| !proper.iter().any(|t| *t != **s && t.contains(s)))
        .copied()
        .collect();
    maximal.sort();
    for r in maximal {
        let l = lat_intersect(&big.ideal, &r.lattice)?;
        let Some(lm) = find_maximal_ideal(alg, r, &l, &big.ell_big())? else {
            continue;
        };
        if alg.multiplicator(&lm.ideal)? != o.lattice {
            continue;
        }
        if is_bass_at(alg, r, &lm)? {
            return Ok(Some((r.clone(), lm)));
        }
    }
    Ok(None)
}

/// For T ⊇ R: the ladder (over the base O with O_l = R_l) that contains T,
/// and the level of T in it.
pub fn locate_in_ladder(
    alg: &EtaleAlgebra,
    r: &Order,
    l: &MaximalIdeal,
    t: &Order,
) -> Result<(MultiplicatorLadder, usize)> {
    if !t.contains(r) {
        return Err(Error::NotContained);
    }
    let sing = singular_primes(alg, r, None)?;
    let mut parts = Vec::new();
    for m in &sing {
        let rm = m_maximal_overorder(alg, r, m)?;
        parts.push((m, lat_intersect(&t.lattice, &rm.lattice)?));
    }
    let mut sum = r.lattice.clone();
    let mut base = r.lattice.clone();
    for (m, s) in &parts {
        sum = lat_sum(&sum, s)?;
        if m.ideal != l.ideal {
            base = lat_sum(&base, s)?;
        }
    }
    if sum != t.lattice {
        return Err(Error::InvalidInput(
            "overorder does not decompose over the singular primes".into(),
        ));
    }
    let o = Order::from_lattice_unchecked(base);
    let above = maximal_ideals_over(alg, &o, l)?;
    if above.len() != 1 {
        return Err(Error::InvalidInput(
            "base order has several maximal ideals above l".into(),
        ));
    }
    let ladder = build_ladder(alg, &o, &above[0])?;
    let level = ladder
        .rungs
        .iter()
        .position(|x| x == t)
        .ok_or_else(|| Error::InvalidInput("order is not a rung of its ladder".into()))?;
    Ok((ladder, level))
}
