//! Incremental construction of an ascending chain E_0 ⊂ E_1 ⊂ ... of
//! n-universal sets with n+2 elements, driven by congruence conditions at
//! the primes where the chain's volume exceeds its minimum.

use crate::error::{Error, Result};
use crate::factorials::{p_ordering_of_set, TieBreak};
use crate::field::{FieldCtx, QuadInt};
use crate::ideals::PrimeIdeal;
use crate::lattice::{crt_solve, ideal_power_lattice, Congruence, IdealLattice};
use crate::primes::DEFAULT_FACTOR_BOUND;
use crate::universal::{is_aud, is_n_universal_bounded, volume_profile, PointSet};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use std::collections::HashSet;

/// Guards on candidate scans and residue enumerations.
const SCAN_GUARD: u64 = 25_000_000;
const RESIDUE_GUARD: u64 = 100_000;
/// How many residue-class combinations the CRT fallback may try.
const COMBO_CAP: usize = 2048;
/// Coset offsets tried per combination in the fallback.
const OFFSET_CAP: usize = 128;

/// One extension step of the chain.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Explicitly factored primes dividing Vol(E_n).
    pub volume_primes: Vec<PrimeIdeal>,
    /// The refined bad set: primes whose volume valuation exceeds the
    /// minimum, i.e. the prime powers dividing Vol(E_n) / prod m!_K^2.
    pub bad_primes: Vec<PrimeIdeal>,
    /// Unfactored composite volume divisors handled by gcd avoidance.
    pub opaque_moduli: Vec<BigUint>,
    /// Congruences the solution satisfies: (prime, precision, residue).
    pub congruences: Vec<(PrimeIdeal, u32, QuadInt)>,
    /// The element appended to the chain.
    pub solution: QuadInt,
    /// max(|a|, |b|) of the solution.
    pub coord_magnitude: BigUint,
    /// log N(Vol(E_n) / prod_{m <= n+1} m!_K^2), the excess over the optimal
    /// volume whose growth the trace exposes.
    pub excess_log: f64,
    /// True when the element came from the direct scan, false when the CRT
    /// fallback produced it.
    pub via_scan: bool,
}

/// The chain E_0 ⊂ E_1 ⊂ ... with per-step diagnostics.
#[derive(Clone, Debug)]
pub struct ConstructionTrace {
    pub chain: Vec<PointSet>,
    pub per_step: Vec<StepRecord>,
}

/// Small-integer mirror of an HNF lattice for the scan hot path.
#[derive(Clone, Copy, Debug)]
struct FastLattice {
    a: i64,
    b: i64,
    c: i64,
    quadratic: bool,
}

impl FastLattice {
    fn of(lattice: &IdealLattice) -> Option<FastLattice> {
        let m = lattice.matrix();
        let a = m[0][0].to_i64()?;
        let b = m[0][1].to_i64()?;
        let c = m[1][1].to_i64()?;
        if a.checked_mul(c)?.checked_add(b)? > (1 << 45) {
            return None;
        }
        Some(FastLattice {
            a,
            b,
            c,
            quadratic: lattice.ctx().degree() == 2,
        })
    }

    /// Centered reduction, matching IdealLattice::reduce exactly.
    fn reduce(&self, x: i64, y: i64) -> (i64, i64) {
        let (mut u, mut v) = (x, y);
        if self.quadratic {
            let q = v.div_euclid(self.c);
            v -= q * self.c;
            u -= q * self.b;
            if 2 * v >= self.c {
                v -= self.c;
                u -= self.b;
            }
        }
        let mut r = u.rem_euclid(self.a);
        if 2 * r >= self.a {
            r -= self.a;
        }
        (r, v)
    }
}

/// Congruence data for one bad prime or opaque modulus.
enum PrimeRule {
    /// Small-norm prime: the element must land in one of these residue
    /// classes modulo p^precision.
    Classes {
        prime: PrimeIdeal,
        precision: u32,
        lattice: IdealLattice,
        fast: FastLattice,
        good: HashSet<(i64, i64)>,
        good_reps: Vec<QuadInt>,
    },
    /// Explicit larger prime (N > n+2): distinctness modulo p from all
    /// current elements suffices, so these classes are blocked.
    AvoidResidues {
        lattice: IdealLattice,
        fast: Option<FastLattice>,
        blocked: HashSet<(i64, i64)>,
        blocked_big: HashSet<(String, String)>,
    },
    /// Unfactored cofactor: the new element's differences against the set
    /// must be coprime to it.
    AvoidGcd { modulus: BigUint },
}

impl PrimeRule {
    /// Cheap i64 check; None means the rule needs the slow path.
    fn admits_fast(&self, x: i64, y: i64) -> Option<bool> {
        match self {
            PrimeRule::Classes { fast, good, .. } => Some(good.contains(&fast.reduce(x, y))),
            PrimeRule::AvoidResidues { fast, blocked, .. } => {
                fast.map(|f| !blocked.contains(&f.reduce(x, y)))
            }
            PrimeRule::AvoidGcd { .. } => None,
        }
    }

    fn admits_slow(&self, cand: &QuadInt, set: &PointSet) -> bool {
        match self {
            PrimeRule::Classes { lattice, good, .. } => {
                let r = lattice.reduce(cand);
                match (r.a().to_i64(), r.b().to_i64()) {
                    (Some(x), Some(y)) => good.contains(&(x, y)),
                    _ => false,
                }
            }
            PrimeRule::AvoidResidues {
                lattice,
                blocked_big,
                ..
            } => {
                let r = lattice.reduce(cand);
                !blocked_big.contains(&(r.a().to_string(), r.b().to_string()))
            }
            PrimeRule::AvoidGcd { modulus } => {
                let one = BigUint::one();
                set.elements().iter().all(|e| {
                    let diff = cand - e;
                    diff.is_zero() || diff.abs_norm().gcd(modulus) == one
                })
            }
        }
    }
}

/// Extend an n-universal set E with n+2 elements by one element so the
/// result is (n+1)-universal; the result is certified before returning.
pub fn extend_universal(set: &PointSet, n: u64) -> Result<(QuadInt, StepRecord)> {
    extend_universal_bounded(set, n, DEFAULT_FACTOR_BOUND)
}

fn extend_universal_bounded(
    set: &PointSet,
    n: u64,
    factor_bound: u64,
) -> Result<(QuadInt, StepRecord)> {
    let expected = usize::try_from(n + 2).expect("n fits usize");
    if set.len() != expected {
        return Err(Error::InvalidInput(format!(
            "extension step expects {expected} elements, got {}",
            set.len()
        )));
    }
    if factor_bound <= n + 2 {
        return Err(Error::InvalidInput(
            "factor bound must exceed n + 2".into(),
        ));
    }
    let profile = volume_profile(set, factor_bound)?;
    let mut volume_primes: Vec<PrimeIdeal> = profile.factored.primes().cloned().collect();
    volume_primes.sort_by_key(|p| (p.residue_norm(), p.kind(), p.conjugate_index()));

    // A prime constrains the new element only when the volume valuation
    // exceeds the minimum possible for n+2 elements; at the minimum, E
    // itself is an a.u.d. witness of size n+2 at that prime.
    let mut bad_primes = Vec::new();
    let mut excess_log = 0.0;
    for prime in &volume_primes {
        let minimum: u64 = (1..=n + 1).map(|m| 2 * prime.w(m)).sum();
        let actual = profile.factored.exponent(prime);
        debug_assert!(actual >= minimum, "volume below optimal at {}", prime.label());
        if actual > minimum {
            bad_primes.push(prime.clone());
            excess_log += (actual - minimum) as f64 * (prime.residue_norm() as f64).ln();
        }
    }
    for op in &profile.opaque {
        // Hidden primes all exceed the factor bound, so their ring weights
        // vanish and every occurrence is excess (counted once per ordered
        // pair direction).
        excess_log += 2.0 * op.modulus.to_f64().map(f64::ln).unwrap_or(0.0);
    }

    let mut rules = Vec::new();
    for prime in &bad_primes {
        rules.push(prime_rule(set, prime, n)?);
    }
    for op in &profile.opaque {
        rules.push(PrimeRule::AvoidGcd {
            modulus: op.modulus.clone(),
        });
    }
    // Cheap, selective rules first.
    rules.sort_by_key(|r| match r {
        PrimeRule::Classes { .. } => 0,
        PrimeRule::AvoidResidues { .. } => 1,
        PrimeRule::AvoidGcd { .. } => 2,
    });

    let scanned = scan_candidates(set, &rules);
    let via_scan = scanned.is_some();
    let solution = match scanned {
        Some(x) => x,
        None => crt_fallback(set, &rules)?,
    };

    let extended = set.with_element(solution.clone())?;
    let report = is_n_universal_bounded(&extended, n + 1, factor_bound)?;
    if !report.verdict {
        return Err(Error::Integrity(format!(
            "extension of {:?} by {solution} is not {}-universal",
            set.elements(),
            n + 1
        )));
    }
    let congruences = rules
        .iter()
        .filter_map(|r| match r {
            PrimeRule::Classes {
                prime,
                precision,
                lattice,
                ..
            } => Some((prime.clone(), *precision, lattice.reduce(&solution))),
            _ => None,
        })
        .collect();
    let record = StepRecord {
        volume_primes,
        bad_primes,
        opaque_moduli: profile.opaque.iter().map(|o| o.modulus.clone()).collect(),
        congruences,
        coord_magnitude: solution.a().magnitude().max(solution.b().magnitude()).clone(),
        solution: solution.clone(),
        excess_log,
        via_scan,
    };
    Ok((solution, record))
}

/// Canonical-order scan over small lattice points for an element admitted by
/// every rule.
fn scan_candidates(set: &PointSet, rules: &[PrimeRule]) -> Option<QuadInt> {
    let ctx = set.ctx();
    let members: HashSet<(i64, i64)> = set
        .elements()
        .iter()
        .filter_map(|e| Some((e.a().to_i64()?, e.b().to_i64()?)))
        .collect();
    let quadratic = ctx.degree() == 2;
    let mut scanned = 0u64;
    let mut weight: i64 = 0;
    loop {
        let coords: Vec<(i64, i64)> = if quadratic {
            let mut layer = Vec::new();
            for a in -weight..=weight {
                let rem = weight - a.abs();
                if rem == 0 {
                    layer.push((a, 0));
                } else {
                    layer.push((a, -rem));
                    layer.push((a, rem));
                }
            }
            layer
        } else if weight == 0 {
            vec![(0, 0)]
        } else {
            vec![(-weight, 0), (weight, 0)]
        };
        'cand: for (x, y) in coords {
            scanned += 1;
            if scanned > SCAN_GUARD {
                return None;
            }
            for rule in rules {
                if let Some(ok) = rule.admits_fast(x, y) {
                    if !ok {
                        continue 'cand;
                    }
                }
            }
            if members.contains(&(x, y)) {
                continue;
            }
            let cand = ctx.element(x, y);
            let slow_ok = rules
                .iter()
                .filter(|r| r.admits_fast(x, y).is_none())
                .all(|r| r.admits_slow(&cand, set));
            if slow_ok && !set.contains(&cand) {
                return Some(cand);
            }
        }
        weight += 1;
    }
}

/// Build the congruence rule for one explicitly factored bad prime.
///
/// For a prime with residue norm at most n+2: take the greedy (n+1)-element
/// witness of `set`, choose the precision m = max(ν+1, smallest m with
/// N(p)^m >= n+2) where ν is the deepest difference valuation inside the
/// witness, and return every residue class modulo p^m that extends the
/// witness to an (n+2)-element set that is a.u.d. at all levels. Any element
/// of such a class keeps all difference valuations against the witness below
/// m, so the extended witness stays a.u.d. modulo every power of p.
///
/// For larger primes the witness residues are automatically distinct, so the
/// new element merely has to avoid the residues of the current set.
fn prime_rule(set: &PointSet, prime: &PrimeIdeal, n: u64) -> Result<PrimeRule> {
    let norm = prime.residue_norm();
    if norm > (n + 2) as u128 {
        let lattice = ideal_power_lattice(prime, 1);
        let fast = FastLattice::of(&lattice);
        let mut blocked = HashSet::new();
        let mut blocked_big = HashSet::new();
        for e in set.elements() {
            let r = lattice.reduce(e);
            blocked_big.insert((r.a().to_string(), r.b().to_string()));
            if let (Some(x), Some(y)) = (r.a().to_i64(), r.b().to_i64()) {
                blocked.insert((x, y));
            }
        }
        return Ok(PrimeRule::AvoidResidues {
            lattice,
            fast,
            blocked,
            blocked_big,
        });
    }

    let witness_len = usize::try_from(n + 1).expect("n fits usize");
    let ordering = p_ordering_of_set(set, prime, witness_len, TieBreak::Canonical)?;
    for (k, &w) in ordering.w_sequence.iter().enumerate() {
        if w != prime.w(k as u64) {
            return Err(Error::Integrity(format!(
                "input set is not {n}-universal at {}",
                prime.label()
            )));
        }
    }
    let witness = PointSet::new(set.ctx(), ordering.sequence)?;

    let mut nu = 0u64;
    let welems = witness.elements();
    for i in 0..welems.len() {
        for j in 0..i {
            nu = nu.max(prime.valuation(&(&welems[i] - &welems[j]))?);
        }
    }
    // Depth at which empty residue classes are guaranteed.
    let mut stable = 1u32;
    let mut power = norm;
    while power < (n + 2) as u128 {
        power *= norm;
        stable += 1;
    }
    let precision = stable.max(u32::try_from(nu + 1).expect("precision fits u32"));

    let lattice = ideal_power_lattice(prime, precision);
    let fast = FastLattice::of(&lattice)
        .ok_or_else(|| Error::Integrity("constraint lattice exceeds fast range".into()))?;
    let witness_classes: HashSet<(i64, i64)> = welems
        .iter()
        .map(|e| {
            let r = lattice.reduce(e);
            (
                r.a().to_i64().expect("small class"),
                r.b().to_i64().expect("small class"),
            )
        })
        .collect();
    let mut good = HashSet::new();
    let mut good_reps = Vec::new();
    'class: for rep in lattice.residues(RESIDUE_GUARD)? {
        let reduced = lattice.reduce(&rep);
        let key = (
            reduced.a().to_i64().expect("small class"),
            reduced.b().to_i64().expect("small class"),
        );
        if witness_classes.contains(&key) {
            continue;
        }
        let extended = witness.with_element(rep.clone())?;
        for level in 1..=precision {
            if !is_aud(&extended, prime, level) {
                continue 'class;
            }
        }
        good.insert(key);
        good_reps.push(reduced);
    }
    if good.is_empty() {
        return Err(Error::Integrity(format!(
            "no admissible residue class at {} (guaranteed to exist)",
            prime.label()
        )));
    }
    good_reps.sort_by_cached_key(|r| r.canonical_key());
    Ok(PrimeRule::Classes {
        prime: prime.clone(),
        precision,
        lattice,
        fast,
        good,
        good_reps,
    })
}

/// Literal Chinese-remainder fallback: enumerate combinations of good
/// residue classes (canonical order, capped), solve each into one element,
/// shift through a few coset offsets until the avoidance rules hold, and
/// return the canonically smallest admissible element found.
fn crt_fallback(set: &PointSet, rules: &[PrimeRule]) -> Result<QuadInt> {
    let ctx = set.ctx();
    let constraint: Vec<&PrimeRule> = rules
        .iter()
        .filter(|r| matches!(r, PrimeRule::Classes { .. }))
        .collect();
    let counts: Vec<usize> = constraint
        .iter()
        .map(|r| match r {
            PrimeRule::Classes { good_reps, .. } => good_reps.len(),
            _ => unreachable!(),
        })
        .collect();

    let offsets: Vec<QuadInt> = ctx.canonical_stream().take(OFFSET_CAP).collect();
    let mut best: Option<QuadInt> = None;
    let mut consider = |cand: QuadInt| {
        let ok = !set.contains(&cand)
            && rules.iter().all(|r| match r {
                PrimeRule::Classes { .. } => true, // guaranteed by construction
                _ => r.admits_slow(&cand, set),
            });
        if ok {
            match &best {
                Some(b) if b.canonical_key() <= cand.canonical_key() => {}
                _ => best = Some(cand),
            }
        }
    };

    if constraint.is_empty() {
        // No congruences at all: scan small elements directly.
        for cand in ctx.canonical_stream().take(OFFSET_CAP * 64) {
            consider(cand);
            if best.is_some() {
                break;
            }
        }
        return best.ok_or_else(|| {
            Error::Integrity("no admissible extension element found within guards".into())
        });
    }

    let mut index = vec![0usize; constraint.len()];
    let mut combos = 0usize;
    loop {
        combos += 1;
        if combos > COMBO_CAP {
            break;
        }
        let mut congruences = Vec::with_capacity(constraint.len());
        for (rule, &i) in constraint.iter().zip(index.iter()) {
            if let PrimeRule::Classes {
                prime,
                precision,
                good_reps,
                ..
            } = rule
            {
                congruences.push(Congruence {
                    target: good_reps[i].clone(),
                    prime: prime.clone(),
                    k: *precision,
                });
            }
        }
        let base = crt_solve(&congruences)?;
        let modulus = congruences
            .iter()
            .map(|c| ideal_power_lattice(&c.prime, c.k))
            .reduce(|a, b| a.ideal_mul(&b))
            .expect("nonempty");
        let columns = modulus.basis_elements();
        for t in &offsets {
            let mut cand = &base + &columns[0].scale(t.a());
            if columns.len() > 1 {
                cand = &cand + &columns[1].scale(t.b());
            }
            consider(cand);
        }
        // Advance the mixed-radix combination index.
        let mut pos = 0;
        loop {
            if pos == index.len() {
                combos = COMBO_CAP + 1;
                break;
            }
            index[pos] += 1;
            if index[pos] < counts[pos] {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
        if combos > COMBO_CAP {
            break;
        }
    }
    best.ok_or_else(|| Error::Integrity("no admissible extension element found within guards".into()))
}

/// Build the full chain E_0 = {0, 1} up to E_n, certifying every step.
pub fn build_universal(ctx: &FieldCtx, n: u64) -> Result<ConstructionTrace> {
    build_universal_bounded(ctx, n, DEFAULT_FACTOR_BOUND)
}

pub fn build_universal_bounded(
    ctx: &FieldCtx,
    n: u64,
    factor_bound: u64,
) -> Result<ConstructionTrace> {
    let e0 = PointSet::new(*ctx, vec![ctx.zero(), ctx.one()])?;
    if !is_n_universal_bounded(&e0, 0, factor_bound)?.verdict {
        return Err(Error::Integrity("E_0 = {0, 1} must be 0-universal".into()));
    }
    let mut chain = vec![e0];
    let mut per_step = Vec::new();
    for m in 0..n {
        let current = chain.last().unwrap();
        let (_, record) = extend_universal_bounded(current, m, factor_bound)?;
        let next = current.with_element(record.solution.clone())?;
        chain.push(next);
        per_step.push(record);
    }
    Ok(ConstructionTrace { chain, per_step })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universal::is_n_universal;

    #[test]
    fn rational_chain_stays_consecutive() {
        let q = FieldCtx::rational();
        let trace = build_universal(&q, 8).unwrap();
        assert_eq!(trace.chain.len(), 9);
        for (m, set) in trace.chain.iter().enumerate() {
            assert_eq!(set.len(), m + 2);
            assert!(is_n_universal(set, m as u64).unwrap().verdict);
        }
        let last = trace.chain.last().unwrap();
        let coords: Vec<i64> = last
            .elements()
            .iter()
            .map(|e| i64::try_from(e.a().clone()).unwrap())
            .collect();
        let (lo, hi) = (coords.iter().min().unwrap(), coords.iter().max().unwrap());
        assert_eq!((hi - lo + 1) as usize, last.len(), "consecutive run");
    }

    #[test]
    fn gaussian_extension_step() {
        let ctx = FieldCtx::quadratic(-1).unwrap();
        let e0 = PointSet::from_coords(ctx, &[(0, 0), (1, 0)]).unwrap();
        let (x, record) = extend_universal(&e0, 0).unwrap();
        assert!(!e0.contains(&x));
        let e1 = e0.with_element(x).unwrap();
        assert!(is_n_universal(&e1, 1).unwrap().verdict);
        assert_eq!(record.volume_primes.len(), 0); // Vol({0,1}) is a unit
    }

    #[test]
    fn chain_property_and_certification() {
        for d in [-1i64, -5] {
            let ctx = FieldCtx::quadratic(d).unwrap();
            let trace = build_universal(&ctx, 10).unwrap();
            assert_eq!(trace.chain.len(), 11);
            for (m, set) in trace.chain.iter().enumerate() {
                assert_eq!(set.len(), m + 2, "|E_{m}| in d={d}");
                assert!(
                    is_n_universal(set, m as u64).unwrap().verdict,
                    "E_{m} certification in d={d}"
                );
            }
            // Chain inclusion.
            for w in trace.chain.windows(2) {
                for e in w[0].elements() {
                    assert!(w[1].contains(e));
                }
            }
        }
    }

    #[test]
    fn recorded_congruences_hold() {
        let ctx = FieldCtx::quadratic(-1).unwrap();
        let trace = build_universal(&ctx, 8).unwrap();
        for record in &trace.per_step {
            for (prime, k, target) in &record.congruences {
                let diff = &record.solution - target;
                if !diff.is_zero() {
                    assert!(prime.valuation(&diff).unwrap() >= *k as u64);
                }
            }
        }
    }

    #[test]
    fn extension_rejects_wrong_cardinality() {
        let ctx = FieldCtx::quadratic(-1).unwrap();
        let e = PointSet::from_coords(ctx, &[(0, 0), (1, 0), (2, 0)]).unwrap();
        assert!(extend_universal(&e, 0).is_err());
    }
}
