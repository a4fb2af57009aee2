//! Quadratic fields Q(sqrt d) and the degenerate rational field, with exact
//! arithmetic on ring-of-integer elements in the basis {1, w}.
//!
//! The generator w is sqrt(d) when d = 2, 3 (mod 4) and (1 + sqrt(d))/2 when
//! d = 1 (mod 4), so every element of O_K is an integer pair (a, b) = a + b*w.

use crate::error::{Error, Result};
use crate::primes::factor_u64;
use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

/// The field a computation lives in: Q itself or Q(sqrt d) for squarefree d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldCtx {
    Rational,
    Quadratic { d: i64 },
}

impl FieldCtx {
    pub fn rational() -> Self {
        FieldCtx::Rational
    }

    /// Build the context for Q(sqrt d); rejects d in {0, 1} and non-squarefree d.
    pub fn quadratic(d: i64) -> Result<Self> {
        if d == 0 || d == 1 {
            return Err(Error::InvalidField(format!("d = {d} is excluded")));
        }
        if !is_squarefree(d.unsigned_abs()) {
            return Err(Error::InvalidField(format!("d = {d} is not squarefree")));
        }
        Ok(FieldCtx::Quadratic { d })
    }

    pub fn degree(&self) -> u32 {
        match self {
            FieldCtx::Rational => 1,
            FieldCtx::Quadratic { .. } => 2,
        }
    }

    pub fn d(&self) -> Option<i64> {
        match self {
            FieldCtx::Rational => None,
            FieldCtx::Quadratic { d } => Some(*d),
        }
    }

    /// True when w = (1 + sqrt d)/2, i.e. d = 1 (mod 4).
    pub fn half_integer_basis(&self) -> bool {
        matches!(self, FieldCtx::Quadratic { d } if d.rem_euclid(4) == 1)
    }

    /// Field discriminant: 1 for Q, d or 4d for quadratic fields.
    pub fn discriminant(&self) -> i64 {
        match self {
            FieldCtx::Rational => 1,
            FieldCtx::Quadratic { d } => {
                if d.rem_euclid(4) == 1 {
                    *d
                } else {
                    4 * d
                }
            }
        }
    }

    pub fn is_imaginary_quadratic(&self) -> bool {
        matches!(self, FieldCtx::Quadratic { d } if *d < 0)
    }

    /// Minimal polynomial x^2 + c1*x + c0 of w (quadratic fields only).
    pub fn omega_min_poly(&self) -> (i64, i64) {
        match self {
            FieldCtx::Rational => panic!("rational field has no omega"),
            FieldCtx::Quadratic { d } => {
                if d.rem_euclid(4) == 1 {
                    ((1 - d) / 4, -1)
                } else {
                    (-d, 0)
                }
            }
        }
    }

    pub fn zero(&self) -> QuadInt {
        QuadInt::from_i64(*self, 0, 0)
    }

    pub fn one(&self) -> QuadInt {
        QuadInt::from_i64(*self, 1, 0)
    }

    pub fn element(&self, a: impl Into<BigInt>, b: impl Into<BigInt>) -> QuadInt {
        QuadInt::new(*self, a.into(), b.into())
    }

    /// Torsion units of O_K: {1, -1} except for Z[i] (4 units) and the
    /// Eisenstein-like d = -3 case (6 units).
    pub fn units(&self) -> Vec<QuadInt> {
        match self {
            FieldCtx::Quadratic { d: -1 } => vec![
                self.element(1, 0),
                self.element(0, 1),
                self.element(-1, 0),
                self.element(0, -1),
            ],
            FieldCtx::Quadratic { d: -3 } => {
                // Powers of w = (1 + sqrt(-3))/2, a primitive 6th root of unity.
                let w = self.element(0, 1);
                let mut units = Vec::with_capacity(6);
                let mut u = self.one();
                for _ in 0..6 {
                    units.push(u.clone());
                    u = &u * &w;
                }
                units
            }
            _ => vec![self.one(), self.element(-1, 0)],
        }
    }

    /// Elements of O_K in canonical order: ascending (|a| + |b|, a, b).
    pub fn canonical_stream(&self) -> impl Iterator<Item = QuadInt> + '_ {
        let ctx = *self;
        (0i64..).flat_map(move |weight| {
            let mut layer: Vec<QuadInt> = Vec::new();
            match ctx {
                FieldCtx::Rational => {
                    if weight == 0 {
                        layer.push(ctx.zero());
                    } else {
                        layer.push(ctx.element(-weight, 0));
                        layer.push(ctx.element(weight, 0));
                    }
                }
                FieldCtx::Quadratic { .. } => {
                    for a in -weight..=weight {
                        let rem = weight - a.abs();
                        if rem == 0 {
                            layer.push(ctx.element(a, 0));
                        } else {
                            layer.push(ctx.element(a, -rem));
                            layer.push(ctx.element(a, rem));
                        }
                    }
                }
            }
            layer.into_iter()
        })
    }
}

fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    factor_u64(n).iter().all(|&(_, e)| e == 1)
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldCtx::Rational => write!(f, "Q"),
            FieldCtx::Quadratic { d } => write!(f, "Q(sqrt {d})"),
        }
    }
}

impl FromStr for FieldCtx {
    type Err = Error;

    /// Parses "Q" or "Q(sqrt d)" (with optional whitespace around d).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "Q" {
            return Ok(FieldCtx::Rational);
        }
        let inner = t
            .strip_prefix("Q(sqrt")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| {
                Error::InvalidField(format!("cannot parse field spec {s:?}, expected Q or Q(sqrt d)"))
            })?;
        let d: i64 = inner
            .trim()
            .parse()
            .map_err(|_| Error::InvalidField(format!("bad integer in field spec {s:?}")))?;
        FieldCtx::quadratic(d)
    }
}

/// An element a + b*w of O_K with exact integer coordinates (b = 0 for Q).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadInt {
    ctx: FieldCtx,
    a: BigInt,
    b: BigInt,
}

impl QuadInt {
    pub fn new(ctx: FieldCtx, a: BigInt, b: BigInt) -> Self {
        if ctx == FieldCtx::Rational {
            assert!(b.is_zero(), "rational elements have no omega coordinate");
        }
        QuadInt { ctx, a, b }
    }

    pub fn from_i64(ctx: FieldCtx, a: i64, b: i64) -> Self {
        Self::new(ctx, BigInt::from(a), BigInt::from(b))
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> QuadInt {
        match self.ctx {
            FieldCtx::Rational => self.clone(),
            FieldCtx::Quadratic { .. } => {
                if self.ctx.half_integer_basis() {
                    // conj(w) = 1 - w
                    QuadInt::new(self.ctx, &self.a + &self.b, -&self.b)
                } else {
                    QuadInt::new(self.ctx, self.a.clone(), -&self.b)
                }
            }
        }
    }

    /// Field norm N(x) = x * conj(x) as a rational integer (signed; negative
    /// values occur in real quadratic fields).
    pub fn norm(&self) -> BigInt {
        match self.ctx {
            FieldCtx::Rational => self.a.clone(),
            FieldCtx::Quadratic { d } => {
                if self.ctx.half_integer_basis() {
                    // N(a + bw) = a^2 + ab + b^2 (1-d)/4
                    let c = BigInt::from((1 - d) / 4);
                    &self.a * &self.a + &self.a * &self.b + c * &self.b * &self.b
                } else {
                    &self.a * &self.a - BigInt::from(d) * &self.b * &self.b
                }
            }
        }
    }

    pub fn abs_norm(&self) -> BigUint {
        self.norm().magnitude().clone()
    }

    pub fn trace(&self) -> BigInt {
        match self.ctx {
            FieldCtx::Rational => self.a.clone(),
            FieldCtx::Quadratic { .. } => {
                if self.ctx.half_integer_basis() {
                    BigInt::from(2) * &self.a + &self.b
                } else {
                    BigInt::from(2) * &self.a
                }
            }
        }
    }

    pub fn scale(&self, k: &BigInt) -> QuadInt {
        QuadInt::new(self.ctx, &self.a * k, &self.b * k)
    }

    /// Deterministic ordering key (|a| + |b|, a, b), used for greedy
    /// tie-breaks and candidate enumeration.
    pub fn canonical_key(&self) -> (BigUint, BigInt, BigInt) {
        (
            self.a.magnitude() + self.b.magnitude(),
            self.a.clone(),
            self.b.clone(),
        )
    }
}

impl fmt::Debug for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}w", self.b)
        } else if self.b.is_negative() {
            write!(f, "{}{}w", self.a, self.b)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

fn check_ctx(x: &QuadInt, y: &QuadInt) {
    assert_eq!(x.ctx, y.ctx, "mixed-field operands");
}

impl Add for &QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: &QuadInt) -> QuadInt {
        check_ctx(self, rhs);
        QuadInt::new(self.ctx, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for &QuadInt {
    type Output = QuadInt;
    fn sub(self, rhs: &QuadInt) -> QuadInt {
        check_ctx(self, rhs);
        QuadInt::new(self.ctx, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt::new(self.ctx, -&self.a, -&self.b)
    }
}

impl Mul for &QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        check_ctx(self, rhs);
        match self.ctx {
            FieldCtx::Rational => QuadInt::new(self.ctx, &self.a * &rhs.a, BigInt::zero()),
            FieldCtx::Quadratic { .. } => {
                let (c0, c1) = self.ctx.omega_min_poly();
                // w^2 = -c1*w - c0
                let cross = &self.a * &rhs.b + &self.b * &rhs.a;
                let bb = &self.b * &rhs.b;
                let a = &self.a * &rhs.a - BigInt::from(c0) * &bb;
                let b = cross - BigInt::from(c1) * bb;
                QuadInt::new(self.ctx, a, b)
            }
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for QuadInt {
            type Output = QuadInt;
            fn $method(self, rhs: QuadInt) -> QuadInt {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        -&self
    }
}

/// Wire format: coordinates as decimal strings so values above 2^64 survive
/// JSON round-trips exactly.
#[derive(Serialize, Deserialize)]
struct QuadIntWire {
    a: String,
    b: String,
}

impl Serialize for QuadInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        QuadIntWire {
            a: self.a.to_string(),
            b: self.b.to_string(),
        }
        .serialize(serializer)
    }
}

/// Deserializes coordinates only; the caller attaches the field context.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoordPair {
    pub a: String,
    pub b: String,
}

impl CoordPair {
    pub fn into_quadint(self, ctx: FieldCtx) -> Result<QuadInt> {
        let a = BigInt::from_str(self.a.trim())
            .map_err(|_| Error::InvalidInput(format!("bad integer {:?}", self.a)))?;
        let b = BigInt::from_str(self.b.trim())
            .map_err(|_| Error::InvalidInput(format!("bad integer {:?}", self.b)))?;
        if ctx == FieldCtx::Rational && !b.is_zero() {
            return Err(Error::InvalidInput(
                "rational field elements must have b = 0".into(),
            ));
        }
        Ok(QuadInt::new(ctx, a, b))
    }
}

impl<'de> Deserialize<'de> for QuadInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        // Standalone deserialization cannot know the field; reject so callers
        // go through CoordPair::into_quadint.
        let _ = QuadIntWire::deserialize(deserializer)?;
        Err(D::Error::custom(
            "QuadInt cannot be deserialized without a field context; use CoordPair",
        ))
    }
}
