//! Seeded random generators for classes in the various cones.
//!
//! Used by the randomized property suites and the benchmarks; all
//! generators are deterministic given the seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{DivisorClass, SurfaceLattice};
use crate::rational::{q, qr, Q};
use num::Zero;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rational with numerator in `[-bound, bound]` and denominator
/// in `[1, max_den]`.
pub fn random_rational(rng: &mut ChaCha8Rng, bound: i64, max_den: i64) -> Q {
    qr(rng.gen_range(-bound..=bound), rng.gen_range(1..=max_den))
}

/// Random positive rational in `(0, bound]`.
pub fn random_positive_rational(rng: &mut ChaCha8Rng, bound: i64, max_den: i64) -> Q {
    qr(rng.gen_range(1..=bound), rng.gen_range(1..=max_den))
}

/// Random integer-coordinate class with entries in `[-bound, bound]`.
pub fn random_class(rng: &mut ChaCha8Rng, rank: usize, bound: i64) -> DivisorClass {
    DivisorClass((0..rank).map(|_| q(rng.gen_range(-bound..=bound))).collect())
}

/// Random class in P⁺: rejection sampling pushed into the cone along the
/// reference class. Requires a lattice with a positive-square reference.
pub fn random_p_plus(l: &SurfaceLattice, rng: &mut ChaCha8Rng, bound: i64) -> DivisorClass {
    assert!(
        l.lorentzian,
        "P+ sampling needs a Lorentzian lattice; use random_effective on sublattices"
    );
    loop {
        let mut tau = random_class(rng, l.rank, bound);
        for _ in 0..64 {
            if l.in_p_plus(&tau).unwrap() {
                return tau;
            }
            tau = tau.add(&l.ample);
        }
    }
}

/// Random Kähler class: a P⁺ sample pushed further until every curve
/// pairing is positive. Requires a strictly ample reference.
pub fn random_kahler(l: &SurfaceLattice, rng: &mut ChaCha8Rng, bound: i64) -> DivisorClass {
    loop {
        let mut tau = random_class(rng, l.rank, bound);
        for _ in 0..256 {
            if l.is_kahler(&tau).unwrap() {
                return tau;
            }
            tau = tau.add(&l.ample);
        }
    }
}

/// Random effective combination of the declared negative curves with
/// nonnegative rational coefficients (pseudoeffective by construction).
pub fn random_effective(l: &SurfaceLattice, rng: &mut ChaCha8Rng, bound: i64) -> DivisorClass {
    let mut acc = DivisorClass::zero(l.rank);
    for c in &l.negative_curves {
        let coeff = qr(rng.gen_range(0..=bound), rng.gen_range(1..=4));
        if !coeff.is_zero() {
            acc = acc.add(&c.class.scale(&coeff));
        }
    }
    acc
}

/// Random pseudoeffective class: a P⁺ sample, an effective combination,
/// or a sum of both, on Lorentzian lattices; effective otherwise.
pub fn random_psef(l: &SurfaceLattice, rng: &mut ChaCha8Rng, bound: i64) -> DivisorClass {
    if !l.lorentzian {
        return random_effective(l, rng, bound);
    }
    match rng.gen_range(0..3) {
        0 => random_p_plus(l, rng, bound),
        1 => random_effective(l, rng, bound),
        _ => random_p_plus(l, rng, bound).add(&random_effective(l, rng, bound)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_land_in_their_cones() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        let mut r = rng(7);
        for _ in 0..50 {
            assert!(l.in_p_plus(&random_p_plus(&l, &mut r, 8)).unwrap());
            assert!(l.is_kahler(&random_kahler(&l, &mut r, 8)).unwrap());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        let a = random_p_plus(&l, &mut rng(11), 9);
        let b = random_p_plus(&l, &mut rng(11), 9);
        assert_eq!(a, b);
    }
}
