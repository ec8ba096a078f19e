//! Integer factorization: trial division, then Pollard–Brent rho with fixed
//! seeds. Enough for discriminants of desk-scale Weil polynomials.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

pub const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;
const RHO_ITERATION_CAP: u64 = 2_000_000;

/// Bound for trial division, overridable through `WEILGRAPH_FACTOR_BOUND`.
pub fn trial_bound() -> u64 {
    std::env::var("WEILGRAPH_FACTOR_BOUND")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_TRIAL_BOUND)
}

const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Miller–Rabin with the first 13 prime bases: deterministic below 3.3·10^24,
/// a fixed-round probabilistic test above.
pub fn is_probable_prime(n: &BigInt) -> bool {
    let n = n.abs();
    if n < BigInt::from(2) {
        return false;
    }
    for b in MR_BASES {
        let b = BigInt::from(b);
        if n == b {
            return true;
        }
        if (&n % &b).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let nm1 = &n - &one;
    let mut d = nm1.clone();
    let mut s = 0;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'bases: for b in MR_BASES {
        let mut x = BigInt::from(b).modpow(&d, &n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % &n;
            if x == nm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn rho(n: &BigInt, seed: u64) -> Option<BigInt> {
    if n.is_even() {
        return Some(BigInt::from(2));
    }
    let c = BigInt::from(seed);
    let f = |x: &BigInt| (x * x + &c) % n;
    let mut y = BigInt::from(seed + 1);
    let m = 128u64;
    let mut r = 1u64;
    let mut q = BigInt::one();
    let mut g = BigInt::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut iters = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
        }
        r *= 2;
        iters += r;
        if iters > RHO_ITERATION_CAP {
            return None;
        }
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

fn perfect_power(n: &BigInt) -> Option<(BigInt, u32)> {
    let bits = n.bits() as u32;
    for k in (2..=bits.max(2)).rev() {
        let r = n.nth_root(k);
        if r > BigInt::one() && r.pow(k) == *n {
            return Some((r, k));
        }
    }
    None
}

fn split_large(n: BigInt, out: &mut BTreeMap<BigInt, u32>, mult: u32) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += mult;
        return Ok(());
    }
    if let Some((r, k)) = perfect_power(&n) {
        return split_large(r, out, mult * k);
    }
    for seed in 1..=20u64 {
        if let Some(d) = rho(&n, seed) {
            let e = &n / &d;
            split_large(d, out, mult)?;
            return split_large(e, out, mult);
        }
    }
    Err(Error::FactorizationIncomplete {
        cofactor: n.to_string(),
    })
}

/// Full factorization of |n| (n ≠ 0) as prime → exponent.
pub fn factorize(n: &BigInt) -> Result<BTreeMap<BigInt, u32>> {
    let mut n = n.abs();
    assert!(!n.is_zero());
    let mut out = BTreeMap::new();
    let bound = trial_bound();
    let mut p = 2u64;
    while p <= bound {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        let mut e = 0;
        while (&n % &bp).is_zero() {
            n /= &bp;
            e += 1;
        }
        if e > 0 {
            out.insert(bp, e);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n.is_one() {
        return Ok(out);
    }
    let bp = BigInt::from(p);
    if &bp * &bp > n {
        *out.entry(n).or_insert(0) += 1;
        return Ok(out);
    }
    split_large(n, &mut out, 1)?;
    Ok(out)
}

/// Smallest prime factor of n > 1.
pub fn smallest_prime_factor(n: &BigInt) -> BigInt {
    match factorize(n) {
        Ok(f) => f.keys().next().cloned().unwrap_or_else(|| n.clone()),
        Err(_) => n.clone(),
    }
}

/// Prime factors of a small positive integer given as BigInt.
pub fn prime_factors(n: &BigInt) -> Result<Vec<BigInt>> {
    Ok(factorize(n)?.into_keys().collect())
}

/// Parses a hint of the form `p1^e1,p2^e2,...`.
pub fn parse_hint(s: &str) -> Result<BTreeMap<BigInt, u32>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (p, e) = match part.split_once('^') {
            Some((p, e)) => (p, e),
            None => (part, "1"),
        };
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad prime in hint: {part}")))?;
        let e: u32 = e
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad exponent in hint: {part}")))?;
        if !is_probable_prime(&p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        out.insert(p, e);
    }
    Ok(out)
}

/// Exact base-`p` logarithm of a power of `p`.
pub fn exact_log(n: &BigInt, p: &BigInt) -> Option<u32> {
    let mut n = n.clone();
    let mut k = 0;
    while n > BigInt::one() {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return None;
        }
        n = q;
        k += 1;
    }
    if n.is_one() {
        Some(k)
    } else {
        None
    }
}

pub fn to_u64(n: &BigInt) -> Option<u64> {
    n.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_with_large_prime_pair() {
        let p = BigInt::from(1_000_000_007u64);
        let q = BigInt::from(998_244_353u64);
        let n = &p * &q * BigInt::from(12);
        let f = factorize(&n).unwrap();
        assert_eq!(f.get(&BigInt::from(2)), Some(&2));
        assert_eq!(f.get(&p), Some(&1));
        assert_eq!(f.get(&q), Some(&1));
    }

    #[test]
    fn square_of_large_prime() {
        let p = BigInt::from(1_000_000_007u64);
        let f = factorize(&(&p * &p)).unwrap();
        assert_eq!(f.get(&p), Some(&2));
    }

    #[test]
    fn hint_parsing() {
        let h = parse_hint("2^4,3,7^1").unwrap();
        assert_eq!(h.len(), 3);
        assert!(parse_hint("4^2").is_err());
    }
}
