//! Generalized factorials n!_K and greedy p-orderings of finite sets.
//!
//! The ring-level weight w(n) has the closed form sum_i floor(n / N(p)^i);
//! for finite sets the weights come from a greedy ordering that minimizes the
//! valuation of the product of differences at each step. The step values do
//! not depend on how greedy ties are broken, which the test suite exercises.

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::field::QuadInt;
use crate::ideals::{FactoredIdeal, PrimeIdeal};
use crate::universal::PointSet;

/// Ring-level Bhargava weight w(n) at a prime.
pub fn w_ring(prime: &PrimeIdeal, n: u64) -> u64 {
    prime.w(n)
}

/// The factorial ideal n!_K = prod p^w(n) over primes with N(p) <= n.
pub fn factorial_ideal(ctx: &FieldCtx, n: u64) -> Result<FactoredIdeal> {
    if n < 2 {
        return Ok(FactoredIdeal::unit());
    }
    let mut factors = Vec::new();
    for prime in ctx.primes_with_norm_up_to(n)? {
        let w = prime.w(n);
        if w > 0 {
            factors.push((prime, w));
        }
    }
    Ok(FactoredIdeal::from_factors(factors))
}

/// log N(n!_K), summed in floating point without building the ideal.
pub fn log_norm_factorial(ctx: &FieldCtx, n: u64) -> Result<f64> {
    let mut total = 0.0;
    for prime in ctx.primes_with_norm_up_to(n)? {
        total += prime.w(n) as f64 * (prime.residue_norm() as f64).ln();
    }
    Ok(total)
}

/// How greedy ties are resolved: by the canonical key (|a|+|b|, a, b) or its
/// reverse. Both orders give identical w-sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    Canonical,
    Reversed,
}

/// A greedy p-ordering prefix of a finite set with its step valuations.
#[derive(Clone, Debug)]
pub struct POrdering {
    pub prime: PrimeIdeal,
    pub sequence: Vec<QuadInt>,
    pub w_sequence: Vec<u64>,
}

/// Greedy p-ordering of `set` of the given length: each step picks the
/// element minimizing the valuation of the product of differences with the
/// already chosen prefix.
pub fn p_ordering_of_set(
    set: &PointSet,
    prime: &PrimeIdeal,
    length: usize,
    tie_break: TieBreak,
) -> Result<POrdering> {
    if length > set.len() {
        return Err(Error::InvalidInput(format!(
            "requested ordering of length {length} from a set of {}",
            set.len()
        )));
    }
    let elements = set.elements();
    let n = elements.len();
    // Running sum of valuations against the chosen prefix, per candidate.
    let mut val_sum: Vec<u64> = vec![0; n];
    let mut used: Vec<bool> = vec![false; n];
    let mut sequence = Vec::with_capacity(length);
    let mut w_sequence = Vec::with_capacity(length);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_cached_key(|&i| elements[i].canonical_key());
    if tie_break == TieBreak::Reversed {
        order.reverse();
    }
    for _ in 0..length {
        let mut best: Option<usize> = None;
        for &i in &order {
            if used[i] {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if val_sum[i] < val_sum[b] => best = Some(i),
                _ => {}
            }
        }
        let chosen = best.expect("length <= set size");
        used[chosen] = true;
        w_sequence.push(val_sum[chosen]);
        // Fold the new element's differences into the running sums.
        for i in 0..n {
            if !used[i] {
                let diff = &elements[i] - &elements[chosen];
                val_sum[i] += prime.valuation(&diff)?;
            }
        }
        sequence.push(elements[chosen].clone());
    }
    Ok(POrdering {
        prime: prime.clone(),
        sequence,
        w_sequence,
    })
}

/// Decides whether `set` contains an (n+1)-element subset almost uniformly
/// distributed modulo all powers of `prime`, by checking that the greedy
/// w-sequence matches the ring weights w(0..=n). Returns the first
/// mismatching index on failure.
pub fn set_invariants_match_ring(
    set: &PointSet,
    prime: &PrimeIdeal,
    n: u64,
) -> Result<std::result::Result<(), u64>> {
    let need = usize::try_from(n + 1).expect("n fits usize");
    if set.len() < need {
        return Err(Error::InvalidInput(format!(
            "set of {} elements cannot witness n = {n}",
            set.len()
        )));
    }
    let ordering = p_ordering_of_set(set, prime, need, TieBreak::Canonical)?;
    for (k, &w) in ordering.w_sequence.iter().enumerate() {
        let ring = prime.w(k as u64);
        if w != ring {
            debug_assert!(w > ring, "set minima dominate ring minima");
            return Ok(Err(k as u64));
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn gauss() -> FieldCtx {
        FieldCtx::quadratic(-1).unwrap()
    }

    fn pts(ctx: FieldCtx, coords: &[(i64, i64)]) -> PointSet {
        PointSet::new(ctx, coords.iter().map(|&(a, b)| ctx.element(a, b)).collect()).unwrap()
    }

    #[test]
    fn w_ring_examples() {
        let q = FieldCtx::rational();
        let p2 = q.factor_prime(2).unwrap()[0].0.clone();
        assert_eq!(w_ring(&p2, 4), 3); // floor(4/2) + floor(4/4)

        let ctx = gauss();
        let g2 = ctx.factor_prime(2).unwrap()[0].0.clone();
        assert_eq!(w_ring(&g2, 5), 3); // N = 2: floor(5/2) + floor(5/4)
        let g3 = ctx.factor_prime(3).unwrap()[0].0.clone();
        assert_eq!(w_ring(&g3, 5), 0); // N = 9 > 5
    }

    #[test]
    fn rational_factorials_match_classical() {
        let q = FieldCtx::rational();
        let f = factorial_ideal(&q, 6).unwrap();
        assert_eq!(f.norm(), BigUint::from(720u32));
        let exps: Vec<(u64, u64)> = f.iter().map(|(p, e)| (p.p(), e)).collect();
        assert_eq!(exps, vec![(2, 4), (3, 2), (5, 1)]);
        assert!(factorial_ideal(&q, 0).unwrap().is_unit());
        assert!(factorial_ideal(&q, 1).unwrap().is_unit());
    }

    #[test]
    fn gaussian_factorial_norms() {
        let ctx = gauss();
        // Verified against a greedy ordering of a residue box below.
        assert_eq!(factorial_ideal(&ctx, 4).unwrap().norm(), BigUint::from(8u32));
        assert_eq!(
            factorial_ideal(&ctx, 5).unwrap().norm(),
            BigUint::from(200u32)
        );
    }

    #[test]
    fn ring_w_matches_greedy_on_residue_box() {
        // A box containing a full residue system modulo p^k for all relevant
        // powers is a faithful stand-in for the whole ring.
        let ctx = gauss();
        let coords: Vec<(i64, i64)> = (0..8)
            .flat_map(|a| (0..8).map(move |b| (a, b)))
            .collect();
        let boxset = pts(ctx, &coords);
        for p in [2u64, 5] {
            for (prime, _) in ctx.factor_prime(p).unwrap() {
                let ord = p_ordering_of_set(&boxset, &prime, 6, TieBreak::Canonical).unwrap();
                let ring: Vec<u64> = (0..6).map(|k| prime.w(k)).collect();
                assert_eq!(ord.w_sequence, ring, "box vs ring at {}", prime.label());
            }
        }
    }

    #[test]
    fn p_ordering_examples() {
        let q = FieldCtx::rational();
        let p2 = q.factor_prime(2).unwrap()[0].0.clone();
        let s = pts(q, &[(0, 0), (1, 0), (2, 0), (3, 0)]);
        let ord = p_ordering_of_set(&s, &p2, 4, TieBreak::Canonical).unwrap();
        assert_eq!(ord.w_sequence, vec![0, 0, 1, 1]);

        // Brute force over all orderings confirms these are the minima.
        let brute = brute_force_w(&s, &p2);
        assert_eq!(ord.w_sequence, brute);

        let ctx = gauss();
        let g2 = ctx.factor_prime(2).unwrap()[0].0.clone();
        let s = pts(ctx, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        let ord = p_ordering_of_set(&s, &g2, 4, TieBreak::Canonical).unwrap();
        assert_eq!(ord.w_sequence, brute_force_w(&s, &g2));
        assert_eq!(ord.w_sequence, vec![0, 0, 1, 1]);

        let single = pts(ctx, &[(7, 3)]);
        let ord = p_ordering_of_set(&single, &g2, 1, TieBreak::Canonical).unwrap();
        assert_eq!(ord.w_sequence, vec![0]);
    }

    /// Exponential oracle: enumerate every ordering of the set, keep those
    /// that are greedy at each step, and insist they all produce one and the
    /// same w-sequence, which is returned.
    fn brute_force_w(set: &PointSet, prime: &PrimeIdeal) -> Vec<u64> {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for rest in permutations(n - 1) {
                for pos in 0..=rest.len() {
                    let mut p = rest.clone();
                    p.insert(pos, n - 1);
                    out.push(p);
                }
            }
            out
        }
        let elements = set.elements();
        let n = elements.len();
        let step_value = |prefix: &[usize], i: usize| -> u64 {
            prefix
                .iter()
                .map(|&j| prime.valuation(&(&elements[i] - &elements[j])).unwrap())
                .sum()
        };
        let mut sequences: Vec<Vec<u64>> = Vec::new();
        'perm: for perm in permutations(n) {
            let mut w = Vec::with_capacity(n);
            for k in 0..n {
                let v = step_value(&perm[..k], perm[k]);
                let min = (0..n)
                    .filter(|i| !perm[..k].contains(i))
                    .map(|i| step_value(&perm[..k], i))
                    .min()
                    .unwrap();
                if v != min {
                    continue 'perm; // not a greedy ordering
                }
                w.push(v);
            }
            sequences.push(w);
        }
        assert!(!sequences.is_empty());
        for s in &sequences {
            assert_eq!(s, &sequences[0], "greedy orderings disagree");
        }
        sequences.pop().unwrap()
    }

    #[test]
    fn tie_break_invariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for ctx in [gauss(), FieldCtx::quadratic(-2).unwrap()] {
            let primes: Vec<PrimeIdeal> = [2u64, 3, 5]
                .iter()
                .flat_map(|&p| ctx.factor_prime(p).unwrap())
                .map(|(q, _)| q)
                .collect();
            for _ in 0..40 {
                let mut coords: Vec<(i64, i64)> = Vec::new();
                while coords.len() < 6 {
                    let c = (rng.gen_range(-6i64..6), rng.gen_range(-6i64..6));
                    if !coords.contains(&c) {
                        coords.push(c);
                    }
                }
                let s = pts(ctx, &coords);
                for prime in &primes {
                    let a = p_ordering_of_set(&s, prime, 6, TieBreak::Canonical).unwrap();
                    let b = p_ordering_of_set(&s, prime, 6, TieBreak::Reversed).unwrap();
                    assert_eq!(a.w_sequence, b.w_sequence);
                }
            }
        }
    }

    #[test]
    fn monotone_under_enlargement() {
        // Adding elements can only lower (or keep) each step minimum.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let ctx = gauss();
        let g2 = ctx.factor_prime(2).unwrap()[0].0.clone();
        for _ in 0..30 {
            let mut coords: Vec<(i64, i64)> = Vec::new();
            while coords.len() < 8 {
                let c = (rng.gen_range(-5i64..5), rng.gen_range(-5i64..5));
                if !coords.contains(&c) {
                    coords.push(c);
                }
            }
            let small = pts(ctx, &coords[..5]);
            let large = pts(ctx, &coords);
            let ws = p_ordering_of_set(&small, &g2, 5, TieBreak::Canonical)
                .unwrap()
                .w_sequence;
            let wl = p_ordering_of_set(&large, &g2, 5, TieBreak::Canonical)
                .unwrap()
                .w_sequence;
            for (s, l) in ws.iter().zip(wl.iter()) {
                assert!(l <= s);
            }
        }
    }

    #[test]
    fn invariants_match_examples() {
        let q = FieldCtx::rational();
        let p2 = q.factor_prime(2).unwrap()[0].0.clone();
        let p3 = q.factor_prime(3).unwrap()[0].0.clone();
        let s = pts(q, &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]);
        assert!(set_invariants_match_ring(&s, &p2, 5).unwrap().is_ok());
        assert!(set_invariants_match_ring(&s, &p3, 5).unwrap().is_ok());

        let ctx = gauss();
        let g2 = ctx.factor_prime(2).unwrap()[0].0.clone();
        let s = pts(ctx, &[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]);
        assert!(set_invariants_match_ring(&s, &g2, 5).unwrap().is_ok());

        let s = pts(q, &[(0, 0), (2, 0), (4, 0)]);
        let r = set_invariants_match_ring(&s, &p2, 2).unwrap();
        assert_eq!(r, Err(1)); // diverges already at k = 1
        let ord = p_ordering_of_set(&s, &p2, 3, TieBreak::Canonical).unwrap();
        assert_eq!(ord.w_sequence, vec![0, 1, 3]);
    }

    #[test]
    fn length_precondition() {
        let ctx = gauss();
        let g2 = ctx.factor_prime(2).unwrap()[0].0.clone();
        let s = pts(ctx, &[(0, 0), (1, 0)]);
        assert!(p_ordering_of_set(&s, &g2, 3, TieBreak::Canonical).is_err());
        assert!(set_invariants_match_ring(&s, &g2, 2).is_err());
    }

    #[test]
    fn rational_factorials_up_to_one_thousand() {
        // Incremental oracle: factorization of n! assembled by factoring
        // each n, entirely independent of the floor-sum formula.
        use std::collections::BTreeMap;
        let q = FieldCtx::rational();
        let mut running: BTreeMap<u64, u64> = BTreeMap::new();
        for n in 2u64..=1000 {
            for (p, e) in crate::primes::factor_u64(n) {
                *running.entry(p).or_insert(0) += e;
            }
            if n % 97 == 0 || n == 1000 {
                let f = factorial_ideal(&q, n).unwrap();
                let got: BTreeMap<u64, u64> = f.iter().map(|(p, e)| (p.p(), e)).collect();
                assert_eq!(got, running, "n = {n}");
            }
        }
    }
}
