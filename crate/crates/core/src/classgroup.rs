//! Class groups along a ladder: finite abelian groups, class-number ratios,
//! binary quadratic forms for imaginary quadratic orders, and external
//! class data in JSON.

use crate::algebra::{AlgebraElement, EtaleAlgebra};
use crate::error::{Error, Result};
use crate::ladder::{classify_splitting, is_bass_at, MultiplicatorLadder, SplittingType};
use crate::lattice::{index, ZLattice};
use crate::linalg::snf::smith;
use crate::order::{maximal_ideals_over, MaximalIdeal, Order};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use std::hash::Hash;
use std::path::Path;

/// ⊕ Z/dᵢ with d₁ | d₂ | …; trivial factors are not stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    pub invariant_factors: Vec<u64>,
}

pub type GroupElement = Vec<u64>;

impl FiniteAbelianGroup {
    pub fn new(mut factors: Vec<u64>) -> Result<Self> {
        if factors.contains(&0) {
            return Err(Error::SchemaError(
                "invariant factor 0 (infinite group)".into(),
            ));
        }
        factors.retain(|&d| d != 1);
        for w in factors.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(Error::SchemaError(format!(
                    "invariant factors {} and {} break the divisibility chain",
                    w[0], w[1]
                )));
            }
        }
        Ok(FiniteAbelianGroup {
            invariant_factors: factors,
        })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup {
            invariant_factors: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    pub fn zero(&self) -> GroupElement {
        vec![0; self.rank()]
    }

    pub fn is_element(&self, x: &[u64]) -> bool {
        x.len() == self.rank() && x.iter().zip(&self.invariant_factors).all(|(a, d)| a < d)
    }

    pub fn reduce(&self, x: &[i64]) -> GroupElement {
        x.iter()
            .zip(&self.invariant_factors)
            .map(|(a, &d)| a.rem_euclid(d as i64) as u64)
            .collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> GroupElement {
        a.iter()
            .zip(b)
            .zip(&self.invariant_factors)
            .map(|((x, y), d)| (x + y) % d)
            .collect()
    }

    pub fn neg(&self, a: &[u64]) -> GroupElement {
        a.iter()
            .zip(&self.invariant_factors)
            .map(|(x, d)| (d - x) % d)
            .collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> GroupElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &[u64], k: i64) -> GroupElement {
        a.iter()
            .zip(&self.invariant_factors)
            .map(|(x, &d)| ((*x as i128 * k as i128).rem_euclid(d as i128)) as u64)
            .collect()
    }

    pub fn element_order(&self, a: &[u64]) -> u64 {
        a.iter()
            .zip(&self.invariant_factors)
            .fold(1u64, |acc, (x, d)| acc.lcm(&(d / d.gcd(x))))
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> Vec<GroupElement> {
        let mut out = vec![Vec::new()];
        for &d in &self.invariant_factors {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..d).map(move |x| {
                        let mut w = v.clone();
                        w.push(x);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// The subgroup generated by `gens`, sorted.
    pub fn subgroup(&self, gens: &[GroupElement]) -> Vec<GroupElement> {
        let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
        seen.insert(self.zero());
        let mut frontier = vec![self.zero()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = self.add(&x, g);
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// A homomorphism ⊕Z/dⱼ → ⊕Z/eᵢ given by an integer matrix with one row
/// per target coordinate and one column per source coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    pub source: FiniteAbelianGroup,
    pub target: FiniteAbelianGroup,
    pub matrix: Vec<Vec<i64>>,
}

impl GroupHom {
    pub fn new(
        source: FiniteAbelianGroup,
        target: FiniteAbelianGroup,
        matrix: Vec<Vec<i64>>,
    ) -> Result<Self> {
        if matrix.len() != target.rank() || matrix.iter().any(|r| r.len() != source.rank()) {
            return Err(Error::SchemaError(
                "surjection matrix has the wrong shape".into(),
            ));
        }
        let h = GroupHom {
            source,
            target,
            matrix,
        };
        // d_j·e_j must map to zero
        for (j, &d) in h.source.invariant_factors.iter().enumerate() {
            let col: Vec<i64> = h.matrix.iter().map(|r| r[j] * d as i64).collect();
            if h.target.reduce(&col) != h.target.zero() {
                return Err(Error::SchemaError(
                    "surjection matrix is not well defined".into(),
                ));
            }
        }
        Ok(h)
    }

    pub fn apply(&self, x: &[u64]) -> GroupElement {
        let v: Vec<i64> = self
            .matrix
            .iter()
            .map(|r| {
                r.iter()
                    .zip(x)
                    .map(|(a, b)| (*a as i128 * *b as i128) as i64)
                    .fold(0i64, |s, t| s.wrapping_add(t))
            })
            .collect();
        self.target.reduce(&v)
    }

    pub fn images_of_generators(&self) -> Vec<GroupElement> {
        (0..self.source.rank())
            .map(|j| {
                let mut e = self.source.zero();
                e[j] = 1;
                self.apply(&e)
            })
            .collect()
    }

    pub fn is_surjective(&self) -> bool {
        self.target.subgroup(&self.images_of_generators()).len() as u64 == self.target.order()
    }

    pub fn kernel_size(&self) -> u64 {
        self.source
            .elements()
            .iter()
            .filter(|x| self.apply(x) == self.target.zero())
            .count() as u64
    }
}

/// Canonical structure of a finite abelian group given by an enumeration
/// of its elements and its operation. Returns the group and the map from
/// elements to canonical exponent vectors.
pub fn abelian_structure<T, F>(
    identity: T,
    elements: &[T],
    op: F,
) -> (FiniteAbelianGroup, HashMap<T, GroupElement>)
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &T) -> T,
{
    // coordinates w.r.t. the generators chosen so far
    let mut coords: HashMap<T, Vec<i64>> = HashMap::new();
    coords.insert(identity.clone(), Vec::new());
    let mut gens: Vec<T> = Vec::new();
    let mut relations: Vec<Vec<i64>> = Vec::new();
    for g in elements {
        if coords.contains_key(g) {
            continue;
        }
        let k = gens.len();
        let mut x = g.clone();
        let mut m = 1i64;
        while !coords.contains_key(&x) {
            x = op(&x, g);
            m += 1;
        }
        let mut rel: Vec<i64> = coords[&x].iter().map(|c| -c).collect();
        rel.resize(k, 0);
        rel.push(m);
        for r in relations.iter_mut() {
            r.push(0);
        }
        relations.push(rel);
        let old: Vec<(T, Vec<i64>)> = coords.drain().collect();
        for (h, v) in old {
            let mut y = h.clone();
            for j in 0..m {
                let mut w = v.clone();
                w.resize(k, 0);
                w.push(j);
                coords.insert(y.clone(), w);
                y = op(&y, g);
            }
        }
        gens.push(g.clone());
    }
    let k = gens.len();
    let rel_big: Vec<Vec<BigInt>> = relations
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let snf = smith(&rel_big, k);
    let diag: Vec<u64> = snf.diag.iter().map(|d| d.abs().to_u64().unwrap()).collect();
    let keep: Vec<usize> = (0..k).filter(|&i| diag[i] != 1).collect();
    let group = FiniteAbelianGroup {
        invariant_factors: keep.iter().map(|&i| diag[i]).collect(),
    };
    let mut out = HashMap::new();
    for (x, v) in coords {
        let mut w = vec![0i64; keep.len()];
        for (slot, &col) in keep.iter().enumerate() {
            let mut acc = BigInt::zero();
            for (row, &vi) in v.iter().enumerate() {
                acc += &snf.v[row][col] * BigInt::from(vi);
            }
            let d = BigInt::from(diag[col]);
            w[slot] = acc.mod_floor(&d).to_i64().unwrap();
        }
        out.insert(x, group.reduce(&w));
    }
    (group, out)
}

// ---------------------------------------------------------------------------
// class-number ratios

/// #Cl(R)/#Cl(T) for T = (l : l) the minimal l-overorder of R.
pub fn ratio_min_overorder(
    alg: &EtaleAlgebra,
    r: &Order,
    l: &MaximalIdeal,
    t: &Order,
    unit_index: Option<&BigInt>,
) -> Result<BigRational> {
    let split = classify_splitting(alg, r, l)?;
    let idx = index(&t.lattice, &r.lattice)?;
    let u = match unit_index {
        Some(u) => u.clone(),
        None => {
            let dr = quadratic_discriminant(alg, r).ok_or(Error::UnknownUnitIndex)?;
            let dt = quadratic_discriminant(alg, t).ok_or(Error::UnknownUnitIndex)?;
            BigInt::from(torsion_units(&dt) / torsion_units(&dr))
        }
    };
    let s = BigRational::from_integer(l.residue_size.clone());
    let one = BigRational::one();
    let factor = match split {
        SplittingType::Inert { degree } => {
            let sf = num_traits::pow(s.clone(), degree as usize);
            (&one - one.clone() / sf) / (&one - one.clone() / &s)
        }
        SplittingType::Split { .. } => &one - one.clone() / &s,
        SplittingType::Ramified { .. } | SplittingType::Singular { .. } => one.clone(),
    };
    Ok(idx / BigRational::from_integer(u) * factor)
}

/// Ratios #Cl(O_i)/#Cl(O_{i−1}) for i = 1..d from #(R/l), δ and the unit
/// indices [O_{i−1}^× : O_i^×].
pub fn ladder_ratios_from(
    residue_size: &BigInt,
    delta: i8,
    unit_indices: &[BigInt],
) -> Vec<BigRational> {
    unit_indices
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let num = if k == 0 {
                residue_size - BigInt::from(delta)
            } else {
                residue_size.clone()
            };
            BigRational::new(num, u.clone())
        })
        .collect()
}

pub fn ladder_ratios(
    alg: &EtaleAlgebra,
    ladder: &MultiplicatorLadder,
    unit_indices: &[BigInt],
) -> Result<Vec<BigRational>> {
    if unit_indices.len() != ladder.length() {
        return Err(Error::InvalidInput(format!(
            "{} unit indices for a ladder of length {}",
            unit_indices.len(),
            ladder.length()
        )));
    }
    if ladder.length() == 0 {
        return Ok(Vec::new());
    }
    if !is_bass_at(alg, ladder.base(), &ladder.base_prime)? {
        return Err(Error::NotBass);
    }
    let delta = ladder.delta().ok_or(Error::NotBass)?;
    Ok(ladder_ratios_from(
        ladder.residue_size(),
        delta,
        unit_indices,
    ))
}

// ---------------------------------------------------------------------------
// binary quadratic forms

/// a x² + b x y + c y² with negative discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Form { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        Form {
            a: 1,
            b,
            c: (b * b - d) / 4,
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let Form { a, b, c } = *self;
        b.abs() <= a && a <= c && !((b.abs() == a || a == c) && b < 0)
    }

    pub fn inverse(&self) -> Self {
        Form {
            a: self.a,
            b: -self.b,
            c: self.c,
        }
        .reduce()
    }

    /// The reduced form equivalent to this positive definite form.
    pub fn reduce(&self) -> Self {
        let d = self.discriminant() as i128;
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            if !(-a < b && b <= a) {
                let k = Integer::div_floor(&(a - b), &(2 * a));
                b += 2 * a * k;
                c = (b * b - d) / (4 * a);
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        Form {
            a: a as i64,
            b: b as i64,
            c: c as i64,
        }
    }

    /// Gaussian composition followed by reduction.
    pub fn compose(&self, other: &Form) -> Form {
        let d = self.discriminant();
        let (f1, f2) = if self.a > other.a {
            (other, self)
        } else {
            (self, other)
        };
        let (a1, b1) = (f1.a as i128, f1.b as i128);
        let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
        let s = (b1 + b2) / 2;
        let n = b2 - s;
        let (y1, dd) = if a2 % a1 == 0 {
            (0i128, a1)
        } else {
            let e = a2.extended_gcd(&a1);
            (e.x, e.gcd)
        };
        let (x2, y2, d1) = if s % dd == 0 {
            (0i128, -1i128, dd)
        } else {
            let e = s.extended_gcd(&dd);
            (e.x, -e.y, e.gcd)
        };
        let v1 = a1 / d1;
        let v2 = a2 / d1;
        let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
        let b3 = b2 + 2 * v2 * r;
        let a3 = v1 * v2;
        let c3 = (b3 * b3 - d as i128) / (4 * a3);
        Form {
            a: a3 as i64,
            b: b3 as i64,
            c: c3 as i64,
        }
        .reduce()
    }
}

/// All reduced primitive forms of discriminant d < 0, sorted.
pub fn reduced_forms(d: i64) -> Vec<Form> {
    assert!(d < 0 && d.rem_euclid(4) <= 1);
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in (-a + 1)..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let f = Form { a, b, c };
            if c >= a && f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
        a += 1;
    }
    out.sort();
    out
}

pub fn class_number(d: i64) -> usize {
    reduced_forms(d).len()
}

/// Form class group of discriminant d with canonical coordinates.
pub struct FormClassGroup {
    pub discriminant: i64,
    pub group: FiniteAbelianGroup,
    pub coords: HashMap<Form, GroupElement>,
    pub forms: HashMap<GroupElement, Form>,
}

impl FormClassGroup {
    pub fn new(d: i64) -> Self {
        let forms = reduced_forms(d);
        let (group, coords) = abelian_structure(Form::principal(d), &forms, |x, y| x.compose(y));
        let inv = coords.iter().map(|(f, v)| (v.clone(), *f)).collect();
        FormClassGroup {
            discriminant: d,
            group,
            coords,
            forms: inv,
        }
    }

    pub fn class_of(&self, f: &Form) -> GroupElement {
        self.coords[&f.reduce()].clone()
    }
}

/// Number of roots of unity in the imaginary quadratic order of
/// discriminant d.
pub fn torsion_units(d: &BigInt) -> u64 {
    if *d == BigInt::from(-3) {
        6
    } else if *d == BigInt::from(-4) {
        4
    } else {
        2
    }
}

fn trace_and_q(alg: &EtaleAlgebra) -> Option<(BigInt, BigInt)> {
    if alg.degree() != 2 {
        return None;
    }
    let h = alg.h();
    Some((-h[1].clone(), h[0].clone()))
}

/// disc(O) for an order O of an imaginary quadratic field.
pub fn quadratic_discriminant(alg: &EtaleAlgebra, o: &Order) -> Option<BigInt> {
    let (t, q) = trace_and_q(alg)?;
    let dpi = &t * &t - BigInt::from(4) * &q;
    if !dpi.is_negative() {
        return None;
    }
    let k = index(&o.lattice, &ZLattice::standard(2)).ok()?;
    let d = BigRational::from_integer(dpi) / (&k * &k);
    d.is_integer().then(|| d.to_integer())
}

/// Form ↔ ideal dictionary for one imaginary quadratic order.
pub struct QuadraticOrderClasses {
    pub order: Order,
    pub forms: FormClassGroup,
    // √disc(O) as an element of K
    sqrt_d: AlgebraElement,
}

impl QuadraticOrderClasses {
    pub fn new(alg: &EtaleAlgebra, o: &Order) -> Result<Self> {
        let d = quadratic_discriminant(alg, o).ok_or(Error::NotImaginaryQuadratic)?;
        let (t, _) = trace_and_q(alg).ok_or(Error::NotImaginaryQuadratic)?;
        let k = index(&o.lattice, &ZLattice::standard(2))?;
        // √d = (2π − t)/k
        let base = AlgebraElement::new(vec![-t, BigInt::from(2)], BigInt::one());
        let sqrt_d = base.scale(&k.recip());
        let di = d
            .to_i64()
            .ok_or_else(|| Error::InvalidInput("discriminant too large".into()))?;
        Ok(QuadraticOrderClasses {
            order: o.clone(),
            forms: FormClassGroup::new(di),
            sqrt_d,
        })
    }

    /// a·Z + ((−b + √d)/2)·Z.
    pub fn ideal_of_form(&self, alg: &EtaleAlgebra, f: &Form) -> Result<ZLattice> {
        let a = AlgebraElement::from_int(2, BigInt::from(f.a));
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let minus_b = AlgebraElement::from_int(2, BigInt::from(-f.b));
        let beta = alg.add(&minus_b, &self.sqrt_d).scale(&half);
        ZLattice::from_elements(2, &[a, beta])
    }

    /// Class of an invertible O-ideal; `None` if the associated form is not
    /// primitive (the ideal is not invertible in O).
    pub fn class_of_ideal(&self, alg: &EtaleAlgebra, i: &ZLattice) -> Result<Option<GroupElement>> {
        let basis = i.basis();
        let (mut alpha, mut beta) = (basis[0].clone(), basis[1].clone());
        // ᾱ = Tr(α) − α
        let tr = alg.trace(&alpha);
        let tr_el =
            AlgebraElement::new(vec![tr.numer().clone(), BigInt::zero()], tr.denom().clone());
        let conj_alpha = alg.sub(&tr_el, &alpha);
        let orient = alg.mul(&conj_alpha, &beta);
        if orient.num[1].is_negative() {
            std::mem::swap(&mut alpha, &mut beta);
        }
        let ni = index(&self.order.lattice, i)?;
        let na = alg.norm(&alpha) / &ni;
        let nb = alg.norm(&beta) / &ni;
        let nab = alg.norm(&alg.add(&alpha, &beta)) / &ni;
        let mid = &nab - &na - &nb;
        if !(na.is_integer() && nb.is_integer() && mid.is_integer()) {
            return Ok(None);
        }
        let f = Form::new(
            na.to_integer().to_i64().unwrap(),
            -mid.to_integer().to_i64().unwrap(),
            nb.to_integer().to_i64().unwrap(),
        );
        if f.discriminant() != self.forms.discriminant || !f.is_primitive() {
            return Ok(None);
        }
        Ok(Some(self.forms.class_of(&f)))
    }
}

// ---------------------------------------------------------------------------
// class data along a ladder

/// Cl(O_i) for i = 0..d with the extension maps and the classes the graph
/// construction needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassChainData {
    pub groups: Vec<FiniteAbelianGroup>,
    /// `surjections[i - 1]`: Cl(O_i) → Cl(O_{i−1}).
    pub surjections: Vec<GroupHom>,
    /// Classes in Cl(O_0) of the maximal O_0-ideals over l.
    pub primes_above_l: Vec<GroupElement>,
    /// Class of l·O_i in Cl(O_i), when l·O_i is invertible.
    pub l_extension_class: Vec<Option<GroupElement>>,
    /// [O_{i−1}^× : O_i^×] for i = 1..d.
    pub unit_indices: Option<Vec<u64>>,
    pub delta_l: i8,
    /// #(R/l), when known.
    pub residue_size: Option<u64>,
}

impl ClassChainData {
    pub fn depth(&self) -> usize {
        self.groups.len() - 1
    }

    /// Surjection Cl(O_i) → Cl(O_0).
    pub fn to_surface(&self, i: usize, x: &[u64]) -> GroupElement {
        let mut v = x.to_vec();
        for k in (1..=i).rev() {
            v = self.surjections[k - 1].apply(&v);
        }
        v
    }

    /// Checks every structural invariant; ratio consistency is checked when
    /// unit indices and #(R/l) are both known.
    pub fn validate(&self) -> Result<()> {
        let d = self.depth();
        if self.surjections.len() != d || self.l_extension_class.len() != d + 1 {
            return Err(Error::SchemaError(
                "levels and surjections disagree in length".into(),
            ));
        }
        if !matches!(self.delta_l, -1..=1) {
            return Err(Error::SchemaError("delta_l must be -1, 0 or 1".into()));
        }
        let expected_primes = if self.delta_l == 1 { 2 } else { 1 };
        if self.primes_above_l.len() != expected_primes {
            return Err(Error::SchemaError(format!(
                "delta_l = {} needs {} classes above l, found {}",
                self.delta_l,
                expected_primes,
                self.primes_above_l.len()
            )));
        }
        let g0 = &self.groups[0];
        for p in &self.primes_above_l {
            if !g0.is_element(p) {
                return Err(Error::SchemaError(
                    "prime class is not an element of Cl(O_0)".into(),
                ));
            }
        }
        for (i, c) in self.l_extension_class.iter().enumerate() {
            if let Some(c) = c {
                if !self.groups[i].is_element(c) {
                    return Err(Error::SchemaError(format!(
                        "class of l*O_{i} is not an element of Cl(O_{i})"
                    )));
                }
            }
        }
        if let Some(l0) = &self.l_extension_class[0] {
            let prod = match self.delta_l {
                1 => g0.add(&self.primes_above_l[0], &self.primes_above_l[1]),
                0 => g0.scale(&self.primes_above_l[0], 2),
                _ => self.primes_above_l[0].clone(),
            };
            if &prod != l0 {
                return Err(Error::SchemaError(
                    "classes above l do not multiply to the class of l*O_0".into(),
                ));
            }
        }
        for i in 1..=d {
            let s = &self.surjections[i - 1];
            if s.source != self.groups[i] || s.target != self.groups[i - 1] {
                return Err(Error::SchemaError(format!(
                    "surjection at level {i} has the wrong groups"
                )));
            }
            if !s.is_surjective() {
                return Err(Error::SchemaError(format!(
                    "map Cl(O_{i}) -> Cl(O_{}) is not surjective",
                    i - 1
                )));
            }
            if let (Some(a), Some(b)) = (&self.l_extension_class[i], &self.l_extension_class[i - 1])
            {
                if &s.apply(a) != b {
                    return Err(Error::SchemaError(format!(
                        "class of l*O_{i} does not map to the class of l*O_{}",
                        i - 1
                    )));
                }
            }
        }
        if let (Some(units), Some(s)) = (&self.unit_indices, self.residue_size) {
            if units.len() != d {
                return Err(Error::SchemaError(
                    "one unit index per level below the surface is required".into(),
                ));
            }
            let ratios = ladder_ratios_from(
                &BigInt::from(s),
                self.delta_l,
                &units.iter().map(|&u| BigInt::from(u)).collect::<Vec<_>>(),
            );
            for i in 1..=d {
                let kernel = self.surjections[i - 1].kernel_size();
                let r = &ratios[i - 1];
                if !r.is_integer() || r.to_integer() != BigInt::from(kernel) {
                    return Err(Error::InconsistentRatios {
                        level: i,
                        kernel: kernel.to_string(),
                        expected: r.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> ClassChainJson {
        ClassChainJson {
            schema: 1,
            levels: self
                .groups
                .iter()
                .zip(&self.l_extension_class)
                .map(|(g, c)| LevelJson {
                    invariant_factors: g.invariant_factors.clone(),
                    l_extension_class: c.clone(),
                })
                .collect(),
            surjections: self.surjections.iter().map(|s| s.matrix.clone()).collect(),
            primes_above_l: self.primes_above_l.clone(),
            unit_indices: self.unit_indices.clone(),
            delta_l: self.delta_l,
            residue_size: self.residue_size,
            depth: None,
            d_min: None,
            n_orbits: None,
        }
    }

    pub fn from_json(j: &ClassChainJson) -> Result<Self> {
        if j.schema != 1 {
            return Err(Error::SchemaError(format!(
                "unsupported schema version {}",
                j.schema
            )));
        }
        if j.levels.is_empty() {
            return Err(Error::SchemaError("no levels".into()));
        }
        let groups = j
            .levels
            .iter()
            .map(|l| FiniteAbelianGroup::new(l.invariant_factors.clone()))
            .collect::<Result<Vec<_>>>()?;
        if j.surjections.len() + 1 != groups.len() {
            return Err(Error::SchemaError(
                "need one surjection per level below the surface".into(),
            ));
        }
        let surjections = j
            .surjections
            .iter()
            .enumerate()
            .map(|(k, m)| GroupHom::new(groups[k + 1].clone(), groups[k].clone(), m.clone()))
            .collect::<Result<Vec<_>>>()?;
        let chain = ClassChainData {
            groups,
            surjections,
            primes_above_l: j.primes_above_l.clone(),
            l_extension_class: j
                .levels
                .iter()
                .map(|l| l.l_extension_class.clone())
                .collect(),
            unit_indices: j.unit_indices.clone(),
            delta_l: j.delta_l,
            residue_size: j.residue_size,
        };
        chain.validate()?;
        Ok(chain)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LevelJson {
    pub invariant_factors: Vec<u64>,
    #[serde(default)]
    pub l_extension_class: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassChainJson {
    pub schema: u32,
    pub levels: Vec<LevelJson>,
    pub surjections: Vec<Vec<Vec<i64>>>,
    pub primes_above_l: Vec<Vec<u64>>,
    #[serde(default)]
    pub unit_indices: Option<Vec<u64>>,
    pub delta_l: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residue_size: Option<u64>,
    /// Ladder length d, when the file describes a ladder not recomputed here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_orbits: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ExternalFile {
    Many {
        schema: u32,
        ladders: Vec<ClassChainJson>,
    },
    One(ClassChainJson),
}

/// One ladder's worth of external class data plus the ladder facts the file
/// may carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalLadder {
    pub chain: ClassChainData,
    pub depth: Option<usize>,
    pub d_min: Option<usize>,
    pub n_orbits: Option<u64>,
}

/// Parses a class-data document: a single chain or `{"schema":1,"ladders":[...]}`.
pub fn parse_external(text: &str) -> Result<Vec<ExternalLadder>> {
    let file: ExternalFile =
        serde_json::from_str(text).map_err(|e| Error::SchemaError(e.to_string()))?;
    let items = match file {
        ExternalFile::Many { schema, ladders } => {
            if schema != 1 {
                return Err(Error::SchemaError(format!(
                    "unsupported schema version {schema}"
                )));
            }
            if ladders.is_empty() {
                return Err(Error::SchemaError("no ladders".into()));
            }
            ladders
        }
        ExternalFile::One(j) => vec![j],
    };
    items
        .iter()
        .map(|j| {
            Ok(ExternalLadder {
                chain: ClassChainData::from_json(j)?,
                depth: j.depth,
                d_min: j.d_min,
                n_orbits: j.n_orbits,
            })
        })
        .collect()
}

/// Reads and validates a class-data file.
pub fn load_external(path: &Path) -> Result<Vec<ExternalLadder>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_external(&text)
}

/// Class data of an imaginary quadratic ladder, computed from forms.
pub fn imquad_class_data(
    alg: &EtaleAlgebra,
    ladder: &MultiplicatorLadder,
) -> Result<ClassChainData> {
    if trace_and_q(alg).is_none() {
        return Err(Error::NotImaginaryQuadratic);
    }
    let levels = ladder
        .rungs
        .iter()
        .map(|o| QuadraticOrderClasses::new(alg, o))
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<FiniteAbelianGroup> = levels.iter().map(|c| c.forms.group.clone()).collect();
    let mut surjections = Vec::new();
    for i in 1..levels.len() {
        let (src, tgt) = (&levels[i], &levels[i - 1]);
        let mut matrix = vec![vec![0i64; src.forms.group.rank()]; tgt.forms.group.rank()];
        for j in 0..src.forms.group.rank() {
            let mut e = src.forms.group.zero();
            e[j] = 1;
            let f = src.forms.forms[&e];
            let ext = alg.lat_product(&src.ideal_of_form(alg, &f)?, &tgt.order.lattice)?;
            let img = tgt
                .class_of_ideal(alg, &ext)?
                .ok_or_else(|| Error::InvalidInput("extended ideal is not invertible".into()))?;
            for (row, v) in img.iter().enumerate() {
                matrix[row][j] = *v as i64;
            }
        }
        surjections.push(GroupHom::new(
            groups[i].clone(),
            groups[i - 1].clone(),
            matrix,
        )?);
    }
    let l = &ladder.base_prime;
    let top = &levels[0];
    let primes_above_l = maximal_ideals_over(alg, ladder.top(), l)?
        .iter()
        .map(|m| {
            top.class_of_ideal(alg, &m.ideal)?
                .ok_or_else(|| Error::InvalidInput("prime above l is not invertible".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut l_extension_class = Vec::new();
    for c in &levels {
        let ext = alg.lat_product(&l.ideal, &c.order.lattice)?;
        let inv = alg.multiplicator(&ext)? == c.order.lattice;
        l_extension_class.push(if inv {
            c.class_of_ideal(alg, &ext)?
        } else {
            None
        });
    }
    let discs = ladder
        .rungs
        .iter()
        .map(|o| quadratic_discriminant(alg, o).ok_or(Error::NotImaginaryQuadratic))
        .collect::<Result<Vec<_>>>()?;
    let unit_indices = (1..discs.len())
        .map(|i| torsion_units(&discs[i - 1]) / torsion_units(&discs[i]))
        .collect();
    let delta_l = match ladder.delta() {
        Some(d) => d,
        None if ladder.length() == 0 => {
            // l regular: classify by the number of primes above it
            match primes_above_l.len() {
                2 => 1,
                _ => -1,
            }
        }
        None => return Err(Error::NotBass),
    };
    let chain = ClassChainData {
        groups,
        surjections,
        primes_above_l,
        l_extension_class,
        unit_indices: Some(unit_indices),
        delta_l,
        residue_size: l.residue_size.to_u64(),
    };
    chain.validate()?;
    Ok(chain)
}
