//! Prime-power ideals as sublattices of O_K = Z^2 in Hermite normal form,
//! residue enumeration, and Chinese-remainder solving across coprime moduli.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, QuadInt};
use crate::ideals::{PrimeIdeal, SplitKind};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A finite-index sublattice of O_K in column Hermite normal form.
///
/// Columns are (a, 0) and (b, c) with a, c > 0 and 0 <= b < a, read in the
/// basis {1, w}; the determinant a*c equals the ideal norm. Degree-1 fields
/// use c = 1 and b = 0 with the second coordinate unused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealLattice {
    ctx: FieldCtx,
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

impl IdealLattice {
    /// The whole ring as a lattice.
    pub fn full(ctx: FieldCtx) -> Self {
        IdealLattice {
            ctx,
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::one(),
        }
    }

    pub fn ctx(&self) -> FieldCtx {
        self.ctx
    }

    pub fn det(&self) -> BigUint {
        (&self.a * &self.c).magnitude().clone()
    }

    /// Generating columns as elements of O_K.
    pub fn basis_elements(&self) -> Vec<QuadInt> {
        match self.ctx {
            FieldCtx::Rational => vec![QuadInt::new(self.ctx, self.a.clone(), BigInt::zero())],
            FieldCtx::Quadratic { .. } => vec![
                QuadInt::new(self.ctx, self.a.clone(), BigInt::zero()),
                QuadInt::new(self.ctx, self.b.clone(), self.c.clone()),
            ],
        }
    }

    /// Basis matrix rows [[a, b], [0, c]] (columns are the generators).
    pub fn matrix(&self) -> [[BigInt; 2]; 2] {
        [
            [self.a.clone(), self.b.clone()],
            [BigInt::zero(), self.c.clone()],
        ]
    }

    /// HNF from a list of generating columns (x, y) = x + y*w.
    fn from_columns(ctx: FieldCtx, cols: Vec<(BigInt, BigInt)>) -> Self {
        if ctx.degree() == 1 {
            let mut g = BigInt::zero();
            for (x, y) in &cols {
                debug_assert!(y.is_zero());
                g = g.gcd(x);
            }
            assert!(!g.is_zero(), "degenerate lattice");
            return IdealLattice {
                ctx,
                a: g,
                b: BigInt::zero(),
                c: BigInt::one(),
            };
        }
        // Reduce the second row to a single pivot c, then gcd the first row.
        let mut cols = cols;
        let mut pivot: Option<(BigInt, BigInt)> = None;
        for col in cols.iter_mut() {
            if col.1.is_zero() {
                continue;
            }
            pivot = Some(match pivot.take() {
                None => col.clone(),
                Some(p) => {
                    // Extended gcd on the y-coordinates.
                    let e = p.1.extended_gcd(&col.1);
                    let new = (
                        &e.x * &p.0 + &e.y * &col.0,
                        e.gcd.clone(),
                    );
                    // Zero out this column's y-coordinate.
                    let q_col = &col.1 / &e.gcd;
                    let q_p = &p.1 / &e.gcd;
                    *col = (
                        &col.0 * &q_p - &p.0 * &q_col,
                        BigInt::zero(),
                    );
                    new
                }
            });
        }
        let (mut b, mut c) = pivot.expect("full-rank lattice");
        if c.is_negative() {
            b = -b;
            c = -c;
        }
        let mut a = BigInt::zero();
        for (x, y) in &cols {
            if y.is_zero() {
                a = a.gcd(x);
            }
        }
        assert!(!a.is_zero(), "degenerate lattice");
        b = b.mod_floor(&a);
        IdealLattice { ctx, a, b, c }
    }

    /// Reduce a point into the centered fundamental domain; the result is
    /// congruent to x modulo the lattice and has small coordinates.
    pub fn reduce(&self, x: &QuadInt) -> QuadInt {
        assert_eq!(self.ctx, x.ctx(), "mixed-field operands");
        let (mut u, mut v) = (x.a().clone(), x.b().clone());
        if self.ctx.degree() == 2 {
            let q = v.div_floor(&self.c);
            v -= &q * &self.c;
            u -= &q * &self.b;
            if BigInt::from(2) * &v >= self.c {
                v -= &self.c;
                u -= &self.b;
            }
        }
        let r = u.mod_floor(&self.a);
        u = if BigInt::from(2) * &r >= self.a {
            r - &self.a
        } else {
            r
        };
        QuadInt::new(self.ctx, u, v)
    }

    /// True when x is in the lattice.
    pub fn contains(&self, x: &QuadInt) -> bool {
        let (u, v) = (x.a(), x.b());
        if self.ctx.degree() == 2 {
            if !v.mod_floor(&self.c).is_zero() {
                return false;
            }
            let q = v / &self.c;
            (u - q * &self.b).mod_floor(&self.a).is_zero()
        } else {
            u.mod_floor(&self.a).is_zero()
        }
    }

    /// Complete set of residue representatives, lattice coordinates
    /// (i, j) for 0 <= i < a, 0 <= j < c in lexicographic order.
    pub fn residues(&self, guard: u64) -> Result<Vec<QuadInt>> {
        let count = self.det();
        if count > BigUint::from(guard) {
            return Err(Error::GuardExceeded {
                what: "residue enumeration",
                needed: count,
                guard,
            });
        }
        let a = self.a.to_u64().expect("a fits u64 under guard");
        let c = self.c.to_u64().expect("c fits u64 under guard");
        let mut out = Vec::with_capacity((a * c) as usize);
        for i in 0..a {
            for j in 0..c {
                out.push(QuadInt::new(
                    self.ctx,
                    BigInt::from(i),
                    BigInt::from(j),
                ));
            }
        }
        Ok(out)
    }

    /// Product of two ideal lattices (valid when both are integral ideals).
    pub fn ideal_mul(&self, other: &IdealLattice) -> IdealLattice {
        assert_eq!(self.ctx, other.ctx, "mixed-field operands");
        if self.ctx.degree() == 1 {
            return IdealLattice {
                ctx: self.ctx,
                a: &self.a * &other.a,
                b: BigInt::zero(),
                c: BigInt::one(),
            };
        }
        let mut cols = Vec::with_capacity(4);
        for x in self.basis_elements() {
            for y in other.basis_elements() {
                let prod = &x * &y;
                cols.push((prod.a().clone(), prod.b().clone()));
            }
        }
        IdealLattice::from_columns(self.ctx, cols)
    }
}

/// HNF lattice of the ideal power P^k, built from the generators
/// (p, w - r) for split/ramified primes or (p) for inert primes.
pub fn ideal_power_lattice(prime: &PrimeIdeal, k: u32) -> IdealLattice {
    assert!(k >= 1, "k must be positive");
    let ctx = prime.ctx();
    let p = BigInt::from(prime.p());
    if ctx.degree() == 1 {
        return IdealLattice {
            ctx,
            a: p.pow(k),
            b: BigInt::zero(),
            c: BigInt::one(),
        };
    }
    let base = match prime.kind() {
        SplitKind::Inert => IdealLattice {
            ctx,
            a: p.clone(),
            b: BigInt::zero(),
            c: p.clone(),
        },
        SplitKind::Split | SplitKind::Ramified => {
            let r = BigInt::from(prime.local_root().expect("root present"));
            // Generators p and w - r; columns (p, 0), (p*w -> (0, p)), (-r, 1),
            // and (w - r) * w reduced by the minimal polynomial.
            let (c0, c1) = ctx.omega_min_poly();
            let cols = vec![
                (p.clone(), BigInt::zero()),
                (BigInt::zero(), p.clone()),
                (-&r, BigInt::one()),
                (BigInt::from(-c0), -BigInt::from(c1) - &r),
            ];
            IdealLattice::from_columns(ctx, cols)
        }
        SplitKind::Rational => unreachable!("handled by degree-1 branch"),
    };
    // Binary powering with HNF reduction after each multiplication.
    let mut result: Option<IdealLattice> = None;
    let mut square = base;
    let mut kk = k;
    while kk > 0 {
        if kk & 1 == 1 {
            result = Some(match result {
                None => square.clone(),
                Some(acc) => acc.ideal_mul(&square),
            });
        }
        kk >>= 1;
        if kk > 0 {
            square = square.ideal_mul(&square);
        }
    }
    result.expect("k >= 1")
}

/// One congruence x = target (mod P^k).
#[derive(Clone, Debug)]
pub struct Congruence {
    pub target: QuadInt,
    pub prime: PrimeIdeal,
    pub k: u32,
}

/// Solve a system of congruences over pairwise distinct prime ideals.
///
/// The output is reduced into the centered fundamental domain of the product
/// lattice; it satisfies valuation(x - target_i, P_i) >= k_i for every i.
pub fn crt_solve(congruences: &[Congruence]) -> Result<QuadInt> {
    if congruences.is_empty() {
        return Err(Error::InvalidInput("empty congruence system".into()));
    }
    let ctx = congruences[0].prime.ctx();
    for c in congruences {
        assert_eq!(c.prime.ctx(), ctx, "mixed-field operands");
        assert_eq!(c.target.ctx(), ctx, "mixed-field operands");
        if c.k == 0 {
            return Err(Error::InvalidInput("congruence with k = 0".into()));
        }
    }
    for i in 0..congruences.len() {
        for j in (i + 1)..congruences.len() {
            if congruences[i].prime == congruences[j].prime {
                return Err(Error::NonCoprimeModuli);
            }
        }
    }

    let mut solution = congruences[0].target.clone();
    let mut modulus = ideal_power_lattice(&congruences[0].prime, congruences[0].k);
    solution = modulus.reduce(&solution);
    for c in &congruences[1..] {
        let step = ideal_power_lattice(&c.prime, c.k);
        // Find solution + M*(alpha, beta) = target (mod step lattice).
        let rhs = &c.target - &solution;
        let m_cols = modulus.basis_elements();
        let l_cols = step.basis_elements();
        let mut cols: Vec<(BigInt, BigInt)> = Vec::new();
        for e in m_cols.iter().chain(l_cols.iter()) {
            cols.push((e.a().clone(), e.b().clone()));
        }
        let coeffs = solve_integer_system(ctx, &cols, (rhs.a().clone(), rhs.b().clone()))
            .ok_or_else(|| {
                Error::Integrity("inconsistent CRT system despite coprime moduli".into())
            })?;
        let mut shift = ctx.zero();
        for (coef, e) in coeffs.iter().zip(m_cols.iter()) {
            shift = &shift + &e.scale(coef);
        }
        solution = &solution + &shift;
        modulus = modulus.ideal_mul(&step);
        solution = modulus.reduce(&solution);
    }
    for c in congruences {
        let diff = &solution - &c.target;
        let ok = if diff.is_zero() {
            true
        } else {
            c.prime.valuation(&diff)? >= c.k as u64
        };
        if !ok {
            return Err(Error::Integrity(format!(
                "CRT output violates congruence at {}",
                c.prime.label()
            )));
        }
    }
    Ok(solution)
}

/// One integer solution z of `sum_i z_i * cols_i = rhs`, if any; only the
/// coefficients of the first columns are meaningful to callers, but the full
/// vector is returned.
fn solve_integer_system(
    ctx: FieldCtx,
    cols: &[(BigInt, BigInt)],
    rhs: (BigInt, BigInt),
) -> Option<Vec<BigInt>> {
    let n = cols.len();
    if ctx.degree() == 1 {
        // Single-row extended gcd across all columns.
        let mut g = BigInt::zero();
        let mut coeff: Vec<BigInt> = vec![BigInt::zero(); n];
        for (i, (x, _)) in cols.iter().enumerate() {
            if g.is_zero() {
                g = x.clone();
                coeff = vec![BigInt::zero(); n];
                coeff[i] = BigInt::one();
                continue;
            }
            let e = g.extended_gcd(x);
            for c in coeff.iter_mut() {
                *c *= &e.x;
            }
            coeff[i] += &e.y;
            g = e.gcd;
        }
        if g.is_zero() {
            return rhs.0.is_zero().then(|| vec![BigInt::zero(); n]);
        }
        let (q, r) = rhs.0.div_rem(&g);
        if !r.is_zero() {
            return None;
        }
        for c in coeff.iter_mut() {
            *c *= &q;
        }
        return Some(coeff);
    }

    // Column reduction tracking the transform: A * U = H.
    let mut h: Vec<(BigInt, BigInt)> = cols.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = vec![BigInt::zero(); n];
            row[i] = BigInt::one();
            row
        })
        .collect();

    // Clear the second coordinate down to a single pivot column.
    let mut pivot_y: Option<usize> = None;
    for i in 0..n {
        if h[i].1.is_zero() {
            continue;
        }
        match pivot_y {
            None => pivot_y = Some(i),
            Some(pi) => {
                let e = h[pi].1.extended_gcd(&h[i].1);
                let (a_pi, a_i) = (&h[pi].1 / &e.gcd, &h[i].1 / &e.gcd);
                let new_pi = (
                    &e.x * &h[pi].0 + &e.y * &h[i].0,
                    e.gcd.clone(),
                );
                let new_i = (&h[i].0 * &a_pi - &h[pi].0 * &a_i, BigInt::zero());
                h[pi] = new_pi;
                h[i] = new_i;
                for k in 0..n {
                    let (upi, ui) = (u[pi][k].clone(), u[i][k].clone());
                    u[pi][k] = &e.x * &upi + &e.y * &ui;
                    u[i][k] = &ui * &a_pi - &upi * &a_i;
                }
            }
        }
    }
    // Gcd the first coordinates of the remaining columns.
    let mut pivot_x: Option<usize> = None;
    for i in 0..n {
        if Some(i) == pivot_y || h[i].0.is_zero() {
            continue;
        }
        match pivot_x {
            None => pivot_x = Some(i),
            Some(pi) => {
                let e = h[pi].0.extended_gcd(&h[i].0);
                let (a_pi, a_i) = (&h[pi].0 / &e.gcd, &h[i].0 / &e.gcd);
                h[pi] = (e.gcd.clone(), BigInt::zero());
                h[i] = (BigInt::zero(), BigInt::zero());
                for k in 0..n {
                    let (upi, ui) = (u[pi][k].clone(), u[i][k].clone());
                    u[pi][k] = &e.x * &upi + &e.y * &ui;
                    u[i][k] = &ui * &a_pi - &upi * &a_i;
                }
            }
        }
    }

    // Back-substitute: rhs = wy * col(pivot_y) + wx * col(pivot_x).
    let mut z = vec![BigInt::zero(); n];
    let mut rest = rhs;
    if let Some(pi) = pivot_y {
        let (q, r) = rest.1.div_rem(&h[pi].1);
        if !r.is_zero() {
            return None;
        }
        rest.0 -= &q * &h[pi].0;
        rest.1 = BigInt::zero();
        for k in 0..n {
            z[k] += &q * &u[pi][k];
        }
    } else if !rest.1.is_zero() {
        return None;
    }
    if let Some(pi) = pivot_x {
        let (q, r) = rest.0.div_rem(&h[pi].0);
        if !r.is_zero() {
            return None;
        }
        rest.0 = BigInt::zero();
        for k in 0..n {
            z[k] += &q * &u[pi][k];
        }
    } else if !rest.0.is_zero() {
        return None;
    }
    Some(z)
}
