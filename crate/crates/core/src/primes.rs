//! Rational-prime utilities: sieve, deterministic Miller-Rabin, Tonelli-Shanks
//! square roots, and trial-division factorization with a hard bound.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

/// Default trial-division bound. Norms up to `bound^2` always factor
/// completely; beyond that a certified-prime cofactor is still accepted.
/// Trial loops stop at sqrt of the remaining cofactor, so small inputs
/// never pay for the large bound.
pub const DEFAULT_FACTOR_BOUND: u64 = 100_000;

static SMALL_PRIMES: OnceLock<Vec<u64>> = OnceLock::new();

/// Primes below `DEFAULT_FACTOR_BOUND`, computed once.
pub fn small_primes() -> &'static [u64] {
    SMALL_PRIMES.get_or_init(|| sieve_primes(DEFAULT_FACTOR_BOUND))
}

/// Sieve of Eratosthenes, primes `<= limit`.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub fn mod_pow_u64(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut result: u128 = 1;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

/// Witnesses proving primality for all n < 3.317e24; above that the test is
/// probabilistic with error < 4^-12.
const MR_WITNESSES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in MR_WITNESSES.iter() {
        let mut x = mod_pow_u64(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin on big integers with the fixed witness set.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in MR_WITNESSES.iter() {
        let a = BigUint::from(a);
        if &a >= n {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Factor `n` by trial division up to `bound`, returning the certified
/// prime factorization and, when the leftover cofactor resists
/// identification (it is composite with no factor below the bound and is
/// not a prime square or cube), that cofactor.
pub fn factor_biguint_partial(
    n: &BigUint,
    bound: u64,
) -> Result<(Vec<(BigUint, u64)>, Option<BigUint>)> {
    let mut factors: Vec<(BigUint, u64)> = Vec::new();
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor zero".into()));
    }
    let mut m = n.clone();
    let one = BigUint::one();
    if m == one {
        return Ok((factors, None));
    }
    // Fast path for word-sized inputs.
    if let Some(small) = m.to_u128() {
        let (fs, rest) = factor_u128_partial(small, bound);
        for (p, e) in fs {
            factors.push((BigUint::from(p), e));
        }
        m = match rest {
            None => return Ok((factors, None)),
            Some(r) => BigUint::from(r),
        };
    } else {
        for &p in small_primes() {
            if p > bound {
                break;
            }
            let pb = BigUint::from(p);
            if &pb * &pb > m {
                break;
            }
            let mut e = 0u64;
            loop {
                let (q, r) = m.div_rem(&pb);
                if r.is_zero() {
                    m = q;
                    e += 1;
                } else {
                    break;
                }
            }
            if e > 0 {
                factors.push((pb, e));
            }
            if m == one {
                return Ok((factors, None));
            }
        }
    }
    if m == one {
        return Ok((factors, None));
    }
    // Cofactor below bound^2 is prime by exclusion; otherwise certify.
    let bound_sq = BigUint::from(bound) * BigUint::from(bound);
    if m < bound_sq || is_probable_prime(&m) {
        factors.push((m, 1));
        return Ok((factors, None));
    }
    let root = m.sqrt();
    if &root * &root == m && is_probable_prime(&root) {
        factors.push((root, 2));
        return Ok((factors, None));
    }
    let croot = m.cbrt();
    if &croot * &croot * &croot == m && is_probable_prime(&croot) {
        factors.push((croot, 3));
        return Ok((factors, None));
    }
    Ok((factors, Some(m)))
}

/// Trial division over u128 values; returns factors found and the cofactor
/// left once the bound or sqrt cutoff is reached.
fn factor_u128_partial(n: u128, bound: u64) -> (Vec<(u128, u64)>, Option<u128>) {
    let mut out = Vec::new();
    let mut m = n;
    for &p in small_primes() {
        if p > bound {
            break;
        }
        let p = p as u128;
        if p * p > m {
            break;
        }
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if m == 1 {
        (out, None)
    } else {
        (out, Some(m))
    }
}

/// Factor `n` by trial division up to `bound`. A leftover cofactor is
/// accepted when it is a certified prime, the square of a prime, or the
/// cube of a prime; anything else fails loudly.
pub fn factor_biguint(n: &BigUint, bound: u64) -> Result<Vec<(BigUint, u64)>> {
    let (factors, rest) = factor_biguint_partial(n, bound)?;
    match rest {
        None => Ok(factors),
        Some(m) => Err(Error::FactorBound { value: m, bound }),
    }
}

pub fn factor_u64(n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Legendre symbol (a/p) for odd prime p, values -1, 0, 1.
pub fn legendre(a: i64, p: u64) -> i32 {
    debug_assert!(p > 2);
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let r = mod_pow_u64(a, (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli-Shanks: a square root of `a` modulo an odd prime `p`, if any.
pub fn sqrt_mod_p(a: i64, p: u64) -> Option<u64> {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a % 2);
    }
    if legendre(a as i64, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow_u64(a, (p + 1) / 4, p));
    }
    // Write p-1 = q * 2^s with q odd.
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while legendre(z as i64, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow_u64(z, q, p);
    let mut t = mod_pow_u64(a, q, p);
    let mut r = mod_pow_u64(a, (q + 1) / 2, p);
    while t != 1 {
        let mut t2 = t;
        let mut i = 0u32;
        while t2 != 1 {
            t2 = (t2 as u128 * t2 as u128 % p as u128) as u64;
            i += 1;
            if i == m {
                return None;
            }
        }
        let b = mod_pow_u64(c, 1u64 << (m - i - 1), p);
        m = i;
        c = (b as u128 * b as u128 % p as u128) as u64;
        t = (t as u128 * c as u128 % p as u128) as u64;
        r = (r as u128 * b as u128 % p as u128) as u64;
    }
    Some(r)
}
