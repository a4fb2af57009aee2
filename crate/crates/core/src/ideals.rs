//! Prime ideals of O_K, splitting of rational primes, p-adic valuations via
//! Hensel-lifted local roots, and factorization of principal ideals.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, QuadInt};
use crate::primes::{
    factor_biguint, is_prime_u64, legendre, sqrt_mod_p, DEFAULT_FACTOR_BOUND,
};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Splitting behaviour of a rational prime in O_K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
    /// Degenerate kind used by the rational field.
    Rational,
}

/// A prime ideal of O_K above the rational prime `p`.
///
/// Split and ramified primes carry a root `r` of the minimal polynomial of w
/// modulo p; the ideal is then (p, w - r). The two conjugate split primes are
/// told apart by `conjugate_index` (0 for the smaller root).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeIdeal {
    ctx: FieldCtx,
    p: u64,
    kind: SplitKind,
    conjugate_index: u8,
    local_root: Option<u64>,
}

impl PrimeIdeal {
    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn conjugate_index(&self) -> u8 {
        self.conjugate_index
    }

    pub fn local_root(&self) -> Option<u64> {
        self.local_root
    }

    /// Residue field size N(p) = p, or p^2 for inert primes.
    pub fn residue_norm(&self) -> u128 {
        match self.kind {
            SplitKind::Inert => self.p as u128 * self.p as u128,
            _ => self.p as u128,
        }
    }

    pub fn residue_norm_big(&self) -> BigUint {
        BigUint::from(self.residue_norm())
    }

    /// Ramification index: 2 for ramified primes, otherwise 1.
    pub fn ramification(&self) -> u32 {
        if self.kind == SplitKind::Ramified {
            2
        } else {
            1
        }
    }

    /// Residue degree f with N(p) = p^f.
    pub fn residue_degree(&self) -> u32 {
        if self.kind == SplitKind::Inert {
            2
        } else {
            1
        }
    }

    /// The conjugate prime ideal (itself unless split).
    pub fn conjugate(&self) -> PrimeIdeal {
        if self.kind != SplitKind::Split {
            return self.clone();
        }
        let r = self.local_root.expect("split prime has a root");
        let (_, c1) = self.ctx.omega_min_poly();
        // Roots of x^2 + c1 x + c0 sum to -c1 mod p.
        let other = ((-c1).rem_euclid(self.p as i64) as u64 + self.p - r) % self.p;
        PrimeIdeal {
            ctx: self.ctx,
            p: self.p,
            kind: SplitKind::Split,
            conjugate_index: 1 - self.conjugate_index,
            local_root: Some(other),
        }
    }

    /// Compact label like "5s0", "3i", "2r", "7q".
    pub fn label(&self) -> String {
        match self.kind {
            SplitKind::Split => format!("{}s{}", self.p, self.conjugate_index),
            SplitKind::Inert => format!("{}i", self.p),
            SplitKind::Ramified => format!("{}r", self.p),
            SplitKind::Rational => format!("{}q", self.p),
        }
    }

    /// Lift of the local root r to a root of the minimal polynomial of w
    /// modulo p^precision (Newton iteration; requires an unramified prime).
    pub fn lifted_root(&self, precision: u32) -> BigInt {
        let r0 = self.local_root.expect("prime has no local root") as i64;
        let (c0, c1) = self.ctx.omega_min_poly();
        let p = BigInt::from(self.p);
        let mut r = BigInt::from(r0);
        let target = p.pow(precision);
        let f = |x: &BigInt| x * x + BigInt::from(c1) * x + BigInt::from(c0);
        let fp = |x: &BigInt| BigInt::from(2) * x + BigInt::from(c1);
        let mut prec = 1u32;
        while prec < precision {
            prec = (prec * 2).min(precision);
            let modulus = p.pow(prec);
            let deriv = fp(&r).mod_floor(&modulus);
            let inv = mod_inverse(&deriv, &modulus).expect("derivative invertible (unramified)");
            r = (&r - f(&r) * inv).mod_floor(&modulus);
        }
        debug_assert!(f(&r).mod_floor(&target).is_zero());
        r
    }

    /// The p-adic valuation v_p(x).
    ///
    /// Ramified: v_p(N(x)); inert: v_p(N(x))/2 (must be even); split: the
    /// largest k with a + b*r_k = 0 (mod p^k), cross-checked against the
    /// conjugate so the two valuations sum to v_p(N(x)).
    pub fn valuation(&self, x: &QuadInt) -> Result<u64> {
        assert_eq!(self.ctx, x.ctx(), "mixed-field operands");
        if x.is_zero() {
            return Err(Error::InfiniteValuation);
        }
        let norm = x.abs_norm();
        let vp = big_val_p(&norm, self.p);
        match self.kind {
            SplitKind::Rational => Ok(vp),
            SplitKind::Ramified => Ok(vp),
            SplitKind::Inert => {
                if vp % 2 != 0 {
                    return Err(Error::Integrity(format!(
                        "odd norm valuation {vp} at inert prime {}",
                        self.label()
                    )));
                }
                Ok(vp / 2)
            }
            SplitKind::Split => {
                if vp == 0 {
                    return Ok(0);
                }
                let v0 = self.split_valuation_capped(x, vp);
                let v1 = self.conjugate().split_valuation_capped(x, vp);
                if v0 + v1 != vp {
                    return Err(Error::Integrity(format!(
                        "split cross-check failed at {}: {v0} + {v1} != {vp}",
                        self.label()
                    )));
                }
                Ok(v0)
            }
        }
    }

    fn split_valuation_capped(&self, x: &QuadInt, cap: u64) -> u64 {
        let cap32 = u32::try_from(cap).expect("valuation cap fits u32");
        let r = self.lifted_root(cap32);
        let modulus = BigInt::from(self.p).pow(cap32);
        let t = (x.a() + x.b() * r).mod_floor(&modulus);
        if t.is_zero() {
            cap
        } else {
            big_val_p(t.magnitude(), self.p).min(cap)
        }
    }

    /// Bhargava weight w(n) = sum_i floor(n / N(p)^i).
    pub fn w(&self, n: u64) -> u64 {
        let norm = self.residue_norm();
        let mut power = norm;
        let mut total = 0u64;
        while power <= n as u128 {
            total += n / power as u64;
            match power.checked_mul(norm) {
                Some(next) => power = next,
                None => break,
            }
        }
        total
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(modulus);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(modulus))
    } else {
        None
    }
}

/// v_p of a positive big integer.
fn big_val_p(n: &BigUint, p: u64) -> u64 {
    if n.is_zero() {
        panic!("valuation of zero");
    }
    let p = BigUint::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if r.is_zero() {
            m = q;
            v += 1;
        } else {
            return v;
        }
    }
}

impl FieldCtx {
    /// Factor the rational prime p in O_K; returns each prime above p with
    /// its ramification index.
    pub fn factor_prime(&self, p: u64) -> Result<Vec<(PrimeIdeal, u32)>> {
        if !is_prime_u64(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        match *self {
            FieldCtx::Rational => Ok(vec![(
                PrimeIdeal {
                    ctx: *self,
                    p,
                    kind: SplitKind::Rational,
                    conjugate_index: 0,
                    local_root: None,
                },
                1,
            )]),
            FieldCtx::Quadratic { .. } => {
                let disc = self.discriminant();
                let kind = if p == 2 {
                    // Decided by the discriminant mod 8.
                    if disc % 2 == 0 {
                        SplitKind::Ramified
                    } else if disc.rem_euclid(8) == 1 {
                        SplitKind::Split
                    } else {
                        SplitKind::Inert
                    }
                } else if disc.rem_euclid(p as i64) == 0 {
                    SplitKind::Ramified
                } else if legendre(disc, p) == 1 {
                    SplitKind::Split
                } else {
                    SplitKind::Inert
                };
                let ideal = |kind, idx, root| PrimeIdeal {
                    ctx: *self,
                    p,
                    kind,
                    conjugate_index: idx,
                    local_root: root,
                };
                match kind {
                    SplitKind::Inert => Ok(vec![(ideal(kind, 0, None), 1)]),
                    SplitKind::Ramified => {
                        let root = self.omega_root_mod_p(p, true).ok_or_else(|| {
                            Error::Integrity(format!("no root for ramified {p} in {self}"))
                        })?;
                        Ok(vec![(ideal(kind, 0, Some(root)), 2)])
                    }
                    SplitKind::Split => {
                        let r = self.omega_root_mod_p(p, false).ok_or_else(|| {
                            Error::Integrity(format!("no root for split {p} in {self}"))
                        })?;
                        let (c0, c1) = self.omega_min_poly();
                        let other = ((-c1).rem_euclid(p as i64) as u64 + p - r) % p;
                        debug_assert_ne!(r, other, "split roots must differ");
                        debug_assert_eq!(
                            ((r as u128 * other as u128 % p as u128) as i64
                                - c0.rem_euclid(p as i64))
                                % p as i64,
                            0
                        );
                        let (r0, r1) = if r < other { (r, other) } else { (other, r) };
                        Ok(vec![
                            (ideal(kind, 0, Some(r0)), 1),
                            (ideal(kind, 1, Some(r1)), 1),
                        ])
                    }
                    SplitKind::Rational => unreachable!(),
                }
            }
        }
    }

    /// A root of the minimal polynomial of w modulo p.
    fn omega_root_mod_p(&self, p: u64, ramified: bool) -> Option<u64> {
        let (c0, c1) = self.omega_min_poly();
        if p == 2 {
            // Try both residues.
            for r in 0u64..2 {
                let val = (r * r) as i64 + c1 * r as i64 + c0;
                if val.rem_euclid(2) == 0 {
                    return Some(r);
                }
            }
            return None;
        }
        // x^2 + c1 x + c0 = 0  <=>  (2x + c1)^2 = c1^2 - 4 c0 = disc.
        let disc = c1 * c1 - 4 * c0;
        let s = sqrt_mod_p(disc, p)?;
        if ramified && s != 0 {
            return None;
        }
        let inv2 = crate::primes::mod_pow_u64(2, p - 2, p);
        let t = ((s as i64 - c1).rem_euclid(p as i64)) as u64;
        Some((t as u128 * inv2 as u128 % p as u128) as u64)
    }

    /// Primes of O_K with residue norm at most `limit`, in (norm, kind) order.
    pub fn primes_with_norm_up_to(&self, limit: u64) -> Result<Vec<PrimeIdeal>> {
        let mut out = Vec::new();
        for p in crate::primes::sieve_primes(limit) {
            for (ideal, _) in self.factor_prime(p)? {
                if ideal.residue_norm() <= limit as u128 {
                    out.push(ideal);
                }
            }
        }
        out.sort_by_key(|q| (q.residue_norm(), q.kind(), q.conjugate_index()));
        Ok(out)
    }
}

/// An integral ideal as a product of prime ideals with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FactoredIdeal {
    factors: BTreeMap<PrimeIdeal, u64>,
}

impl FactoredIdeal {
    pub fn unit() -> Self {
        FactoredIdeal::default()
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (PrimeIdeal, u64)>) -> Self {
        let mut map = BTreeMap::new();
        for (p, e) in factors {
            if e > 0 {
                *map.entry(p).or_insert(0) += e;
            }
        }
        FactoredIdeal { factors: map }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self, p: &PrimeIdeal) -> u64 {
        self.factors.get(p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PrimeIdeal, u64)> {
        self.factors.iter().map(|(p, &e)| (p, e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &PrimeIdeal> {
        self.factors.keys()
    }

    pub fn mul_assign(&mut self, other: &FactoredIdeal) {
        for (p, e) in other.iter() {
            *self.factors.entry(p.clone()).or_insert(0) += e;
        }
    }

    pub fn mul(&self, other: &FactoredIdeal) -> FactoredIdeal {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    pub fn pow(&self, k: u64) -> FactoredIdeal {
        let mut out = FactoredIdeal::unit();
        for (p, e) in self.iter() {
            out.factors.insert(p.clone(), e * k);
        }
        out
    }

    pub fn norm(&self) -> BigUint {
        let mut n = BigUint::one();
        for (p, e) in self.iter() {
            n *= p.residue_norm_big().pow(u32::try_from(e).expect("exponent fits u32"));
        }
        n
    }

    pub fn log_norm(&self) -> f64 {
        self.iter()
            .map(|(p, e)| e as f64 * (p.residue_norm() as f64).ln())
            .sum()
    }
}

/// Factorization of the principal ideal (x): factor |N(x)| over Z, then
/// distribute prime exponents by valuations.
pub fn factor_element(x: &QuadInt) -> Result<FactoredIdeal> {
    factor_element_bounded(x, DEFAULT_FACTOR_BOUND)
}

pub fn factor_element_bounded(x: &QuadInt, bound: u64) -> Result<FactoredIdeal> {
    if x.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let ctx = x.ctx();
    let norm = x.abs_norm();
    let mut factors = Vec::new();
    for (p, e) in factor_biguint(&norm, bound)? {
        let p = p
            .to_u64()
            .ok_or_else(|| Error::FactorBound {
                value: norm.clone(),
                bound,
            })?;
        let ideals = ctx.factor_prime(p)?;
        match ideals[0].0.kind() {
            SplitKind::Rational | SplitKind::Ramified => {
                factors.push((ideals[0].0.clone(), e));
            }
            SplitKind::Inert => {
                if e % 2 != 0 {
                    return Err(Error::Integrity(format!(
                        "odd exponent {e} at inert prime {p}"
                    )));
                }
                factors.push((ideals[0].0.clone(), e / 2));
            }
            SplitKind::Split => {
                let p0 = &ideals[0].0;
                let p1 = &ideals[1].0;
                let v0 = p0.valuation(x)?;
                let v1 = p1.valuation(x)?;
                if v0 + v1 != e {
                    return Err(Error::Integrity(format!(
                        "split exponents {v0}+{v1} != {e} at {p}"
                    )));
                }
                factors.push((p0.clone(), v0));
                factors.push((p1.clone(), v1));
            }
        }
    }
    let result = FactoredIdeal::from_factors(factors);
    debug_assert_eq!(result.norm(), norm, "norm bookkeeping");
    Ok(result)
}
