//! Zariski decompositions on surface lattices.
//!
//! `decompose` runs a monotone Fujita-style iteration: start from the
//! curves pairing negatively with the class, solve the orthogonality
//! system on the current support, and grow the support by every declared
//! curve the candidate nef part still pairs negatively with. The support
//! grows inside a set whose Gram matrix must stay negative-definite, so
//! the loop terminates in at most ρ linear solves. `decompose_oracle`
//! independently enumerates all negative-definite subsets and must agree
//! exactly; it is the trustworthy ground truth for randomized testing.
//!
//! Infinitesimal perturbations `τ - ε·a` run through the same iteration
//! with [`EpsRational`] pairings; this computes the limit sets Neg(τ)
//! without choosing a concrete ε.

use serde::{Deserialize, Serialize};

use crate::eps::EpsRational;
use crate::error::{DecompositionFailure, Error, FailureReason};
use crate::lattice::{DivisorClass, PsefVerdict, SurfaceLattice};
use crate::linalg::{self, Scalar};
use crate::rational::{fmt_rational, qr, Q};
use crate::Result;
use num::{Signed, Zero};

/// Zariski decomposition `τ = Z + Σ aᵢ·Eᵢ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZariskiDecomposition {
    pub input: DivisorClass,
    pub zpart: DivisorClass,
    /// `(curve index, coefficient)` with strictly positive coefficients.
    pub npart: Vec<(usize, Q)>,
}

impl ZariskiDecomposition {
    pub fn support(&self) -> Vec<usize> {
        self.npart.iter().map(|(i, _)| *i).collect()
    }

    /// The negative part as a class.
    pub fn npart_class(&self, l: &SurfaceLattice) -> DivisorClass {
        let mut acc = DivisorClass::zero(l.rank);
        for (i, a) in &self.npart {
            acc = acc.add(&l.negative_curves[*i].class.scale(a));
        }
        acc
    }

    /// Check every structural invariant: exact sum, orthogonality,
    /// nefness of Z, positive coefficients, negative-definite support
    /// Gram, support size at most ρ.
    pub fn verify(&self, l: &SurfaceLattice) -> Result<Verification> {
        let sum_ok = self.zpart.add(&self.npart_class(l)) == self.input;
        let orthogonal = self
            .npart
            .iter()
            .all(|(i, _)| l.pair(&self.zpart, &l.negative_curves[*i].class).unwrap().is_zero());
        let nef = l.is_nef(&self.zpart)?;
        let coefficients_positive = self.npart.iter().all(|(_, a)| a.is_positive());
        let support: Vec<usize> = self.support();
        let negative_definite = linalg::negative_definite(&l.curve_gram(&support));
        let support_bounded = support.len() <= l.rank;
        Ok(Verification {
            sum_ok,
            orthogonal,
            nef,
            coefficients_positive,
            negative_definite,
            support_bounded,
        })
    }

    pub fn to_doc(&self, l: &SurfaceLattice) -> ZariskiDoc {
        let verification = self.verify(l).unwrap_or(Verification {
            sum_ok: false,
            orthogonal: false,
            nef: false,
            coefficients_positive: false,
            negative_definite: false,
            support_bounded: false,
        });
        ZariskiDoc {
            schema: "zariski/1".into(),
            surface: l.name.clone(),
            input: self.input.0.iter().map(fmt_rational).collect(),
            zpart: self.zpart.0.iter().map(fmt_rational).collect(),
            npart: self
                .npart
                .iter()
                .map(|(i, a)| NPartEntry {
                    curve: l.curve_label(*i).to_string(),
                    coefficient: fmt_rational(a),
                })
                .collect(),
            verified: verification,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub sum_ok: bool,
    pub orthogonal: bool,
    pub nef: bool,
    pub coefficients_positive: bool,
    pub negative_definite: bool,
    pub support_bounded: bool,
}

impl Verification {
    pub fn all(&self) -> bool {
        self.sum_ok
            && self.orthogonal
            && self.nef
            && self.coefficients_positive
            && self.negative_definite
            && self.support_bounded
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZariskiDoc {
    pub schema: String,
    pub surface: String,
    pub input: Vec<String>,
    pub zpart: Vec<String>,
    pub npart: Vec<NPartEntry>,
    pub verified: Verification,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NPartEntry {
    pub curve: String,
    pub coefficient: String,
}

/// Decomposition of an infinitesimally perturbed class `τ - ε·a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsDecomposition {
    pub support: Vec<usize>,
    pub coefficients: Vec<EpsRational>,
    /// Nef part at ε = 0.
    pub zpart_value: DivisorClass,
    /// First-order correction of the nef part.
    pub zpart_slope: DivisorClass,
}

/// How to evaluate "for every ε > 0 small enough" limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsMode {
    /// First-order infinitesimal arithmetic (exact, default).
    Infinitesimal,
    /// Halve a concrete rational ε until two consecutive supports agree.
    Rational,
}

/// Core iteration, generic over rational or infinitesimal pairings.
/// `pairings[i]` is the pairing of the input class with declared curve `i`.
/// Returns the support (sorted) and the orthogonality coefficients.
fn fujita_iteration<S: Scalar>(
    l: &SurfaceLattice,
    pairings: &[S],
) -> std::result::Result<(Vec<usize>, Vec<S>), DecompositionFailure> {
    let n = l.negative_curves.len();
    let mut support: Vec<usize> = (0..n).filter(|&i| pairings[i].is_neg()).collect();
    if support.is_empty() {
        return Ok((support, vec![]));
    }
    loop {
        let gram = l.curve_gram(&support);
        if !linalg::negative_definite(&gram) {
            return Err(DecompositionFailure {
                support,
                reason: FailureReason::GramNotNegativeDefinite,
                certified: true,
            });
        }
        let rhs: Vec<S> = support.iter().map(|&i| pairings[i].clone()).collect();
        let coeffs = match linalg::solve(&gram, &rhs) {
            Some(c) => c,
            None => {
                return Err(DecompositionFailure {
                    support,
                    reason: FailureReason::GramNotNegativeDefinite,
                    certified: true,
                })
            }
        };
        if coeffs.iter().any(|a| !a.is_pos()) {
            return Err(DecompositionFailure {
                support,
                reason: FailureReason::NonPositiveCoefficient,
                certified: true,
            });
        }
        // Pairings of the candidate nef part with every declared curve.
        let mut grew = false;
        let mut additions: Vec<usize> = Vec::new();
        for j in 0..n {
            if support.contains(&j) {
                continue;
            }
            let mut zc = pairings[j].clone();
            for (k, &i) in support.iter().enumerate() {
                let cij = l
                    .pair(&l.negative_curves[i].class, &l.negative_curves[j].class)
                    .expect("curve dimensions are validated");
                zc = zc.minus(&coeffs[k].times_q(&cij));
            }
            if zc.is_neg() {
                additions.push(j);
                grew = true;
            }
        }
        if !grew {
            return Ok((support, coeffs));
        }
        support.extend(additions);
        support.sort_unstable();
    }
}

fn nef_closure_failure(ok: bool, support: Vec<usize>) -> std::result::Result<(), DecompositionFailure> {
    if ok {
        Ok(())
    } else {
        Err(DecompositionFailure {
            support,
            reason: FailureReason::ZPartNotNef,
            certified: false,
        })
    }
}

/// Zariski decomposition by monotone iteration.
///
/// Intended domain: classes in P⁺, nef classes, or classes certified big
/// by the caller; anything else is handled best-effort, with failures
/// reported as [`Error::NotPseudoeffective`] carrying the failing subset
/// and whether the failure certifies non-pseudoeffectivity.
pub fn decompose(l: &SurfaceLattice, tau: &DivisorClass) -> Result<ZariskiDecomposition> {
    let pairings = l.curve_pairings(tau)?;
    let (support, coeffs) =
        fujita_iteration(l, &pairings).map_err(Error::NotPseudoeffective)?;
    let mut zpart = tau.clone();
    for (k, &i) in support.iter().enumerate() {
        zpart = zpart.sub(&l.negative_curves[i].class.scale(&coeffs[k]));
    }
    // Closure tests beyond the curve inequalities: the nef part must stay
    // in the closed positive cone. A violation means the declared-curve
    // domain assumption broke; the verdict is undecided, not a crash.
    let z_square = l.square(&zpart)?;
    let z_ample = l.pair(&zpart, &l.ample)?;
    nef_closure_failure(!z_square.is_negative() && !z_ample.is_negative(), support.clone())
        .map_err(Error::NotPseudoeffective)?;
    Ok(ZariskiDecomposition {
        input: tau.clone(),
        zpart,
        npart: support.into_iter().zip(coeffs).collect(),
    })
}

/// Hard cap on the subset-enumeration oracle.
pub const ORACLE_CURVE_GUARD: usize = 20;

/// Independent verifier: enumerate all subsets of the declared curves with
/// negative-definite Gram, solve the orthogonality system on each, and
/// return the unique subset with strictly positive coefficients whose
/// complement passes the nef test. Must equal [`decompose`] exactly.
pub fn decompose_oracle(l: &SurfaceLattice, tau: &DivisorClass) -> Result<ZariskiDecomposition> {
    let n = l.negative_curves.len();
    if n > ORACLE_CURVE_GUARD {
        return Err(Error::Guard(format!(
            "oracle enumeration over {n} curves exceeds the guard of {ORACLE_CURVE_GUARD}"
        )));
    }
    let pairings = l.curve_pairings(tau)?;
    let mut found: Option<ZariskiDecomposition> = None;
    for mask in 0u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if support.len() > l.rank {
            continue;
        }
        let gram = l.curve_gram(&support);
        if !support.is_empty() && !linalg::negative_definite(&gram) {
            continue;
        }
        let rhs: Vec<Q> = support.iter().map(|&i| pairings[i].clone()).collect();
        let coeffs = if support.is_empty() {
            vec![]
        } else {
            match linalg::solve(&gram, &rhs) {
                Some(c) => c,
                None => continue,
            }
        };
        if coeffs.iter().any(|a| !a.is_positive()) {
            continue;
        }
        let mut zpart = tau.clone();
        for (k, &i) in support.iter().enumerate() {
            zpart = zpart.sub(&l.negative_curves[i].class.scale(&coeffs[k]));
        }
        if !l.is_nef(&zpart)? {
            continue;
        }
        let candidate = ZariskiDecomposition {
            input: tau.clone(),
            zpart,
            npart: support.into_iter().zip(coeffs).collect(),
        };
        if let Some(prev) = &found {
            // Uniqueness is a theorem; two witnesses indicate an engine bug.
            assert_eq!(
                prev, &candidate,
                "two distinct valid Zariski decompositions found"
            );
        } else {
            found = Some(candidate);
        }
    }
    found.ok_or_else(|| {
        Error::NotPseudoeffective(DecompositionFailure {
            support: vec![],
            reason: FailureReason::NoValidSubset,
            certified: true,
        })
    })
}

/// Decomposition of `τ - ε·direction` for an infinitesimal ε > 0.
pub fn decompose_eps(
    l: &SurfaceLattice,
    tau: &DivisorClass,
    direction: &DivisorClass,
) -> Result<EpsDecomposition> {
    let tau_pairings = l.curve_pairings(tau)?;
    let dir_pairings = l.curve_pairings(direction)?;
    let pairings: Vec<EpsRational> = tau_pairings
        .into_iter()
        .zip(dir_pairings)
        .map(|(t, d)| EpsRational::new(t, -d))
        .collect();
    let (support, coeffs) =
        fujita_iteration(l, &pairings).map_err(Error::NotPseudoeffective)?;

    let mut zvalue = tau.clone();
    let mut zslope = direction.neg();
    for (k, &i) in support.iter().enumerate() {
        let c = &l.negative_curves[i].class;
        zvalue = zvalue.sub(&c.scale(&coeffs[k].value));
        zslope = zslope.sub(&c.scale(&coeffs[k].slope));
    }
    // First-order closure test on the reference pairing; the square is
    // second-order in ε on the boundary, so callers needing it go through
    // the rational fallback.
    let za = EpsRational::new(l.pair(&zvalue, &l.ample)?, l.pair(&zslope, &l.ample)?);
    nef_closure_failure(!za.is_negative(), support.clone()).map_err(Error::NotPseudoeffective)?;
    Ok(EpsDecomposition { support, coefficients: coeffs, zpart_value: zvalue, zpart_slope: zslope })
}

/// The stabilized support of `N(τ - ε·a)` for all small ε > 0.
///
/// Preconditions: τ in the closure of P⁺ and `a` a nonzero nef class of
/// nonnegative square (a Kähler class in the main use; pullbacks of
/// Kähler classes and boundary reference classes are accepted).
pub fn neg_limit(
    l: &SurfaceLattice,
    tau: &DivisorClass,
    a: &DivisorClass,
    mode: EpsMode,
) -> Result<Vec<usize>> {
    let square = l.square(tau)?;
    let ample_pairing = l.pair(tau, &l.ample)?;
    if square.is_negative() || ample_pairing.is_negative() {
        return Err(Error::Precondition(format!(
            "neg_limit needs τ in the closure of P+; got τ² = {}, τ·ref = {}",
            fmt_rational(&square),
            fmt_rational(&ample_pairing)
        )));
    }
    if a.is_zero() || l.square(a)?.is_negative() || !l.is_nef(a)? {
        return Err(Error::Precondition(
            "perturbation direction must be a nonzero nef class of nonnegative square".into(),
        ));
    }
    match mode {
        EpsMode::Infinitesimal => Ok(decompose_eps(l, tau, a)?.support),
        EpsMode::Rational => neg_limit_rational(l, tau, a),
    }
}

/// Fallback: evaluate at explicit small rational ε, halving until two
/// consecutive runs yield the same support with valid decompositions.
fn neg_limit_rational(
    l: &SurfaceLattice,
    tau: &DivisorClass,
    a: &DivisorClass,
) -> Result<Vec<usize>> {
    let mut eps = qr(1, 16);
    let mut previous: Option<Vec<usize>> = None;
    for _ in 0..64 {
        let perturbed = tau.sub(&a.scale(&eps));
        match decompose(l, &perturbed) {
            Ok(d) => {
                let support = d.support();
                if previous.as_ref() == Some(&support) {
                    return Ok(support);
                }
                previous = Some(support);
            }
            Err(Error::NotPseudoeffective(_)) => previous = None,
            Err(e) => return Err(e),
        }
        eps /= qr(2, 1);
    }
    Err(Error::Guard(
        "neg_limit: support did not stabilize after 64 halvings of ε".into(),
    ))
}

/// The set `D_τ` of declared curves with `τ·C ≤ 0`, for τ in P⁺.
/// These are the only possible destabilizers of τ over all curves.
pub fn destabilizer_set(l: &SurfaceLattice, tau: &DivisorClass) -> Result<Vec<usize>> {
    if !l.in_p_plus(tau)? {
        return Err(Error::Precondition(format!(
            "destabilizer_set needs τ in P+; got τ² = {}, τ·ref = {}",
            fmt_rational(&l.square(tau)?),
            fmt_rational(&l.pair(tau, &l.ample)?)
        )));
    }
    Ok((0..l.negative_curves.len())
        .filter(|&i| {
            !l.pair(tau, &l.negative_curves[i].class)
                .unwrap()
                .is_positive()
        })
        .collect())
}

/// Upper bound on the size of any destabilizer set: ρ in general, ρ-1
/// when the lattice is projective (contains a positive eigenvector).
pub fn cardinality_bound(l: &SurfaceLattice) -> usize {
    if l.projective && l.lorentzian && l.rank > 1 {
        l.rank - 1
    } else {
        l.rank
    }
}

/// A finite curve set that contains `D_τ` for every τ in the positive
/// span of the hull members. P⁺ members contribute their destabilizer
/// sets; boundary members contribute their Zariski limit sets together
/// with their zero-pairing curves; merely pseudoeffective members
/// contribute their nonpositive pairings and the support of their
/// negative part.
pub fn uniform_test_set(l: &SurfaceLattice, hull: &[DivisorClass]) -> Result<Vec<usize>> {
    let mut set: Vec<usize> = Vec::new();
    for tau in hull {
        let contribution: Vec<usize> = if l.in_p_plus(tau)? {
            destabilizer_set(l, tau)?
        } else {
            let report = l.classify(tau)?;
            if report.pseudoeffective_verdict != PsefVerdict::Yes {
                return Err(Error::Precondition(format!(
                    "hull member {tau} is neither in P+ nor certified pseudoeffective"
                )));
            }
            let mut c: Vec<usize> = if !report.square.is_negative() {
                neg_limit(l, tau, &l.ample.clone(), EpsMode::Infinitesimal)?
            } else {
                decompose(l, tau)?.support()
            };
            for i in 0..l.negative_curves.len() {
                if l.pair(tau, &l.negative_curves[i].class)?.is_zero() && !c.contains(&i) {
                    c.push(i);
                }
            }
            c
        };
        for i in contribution {
            if !set.contains(&i) {
                set.push(i);
            }
        }
    }
    set.sort_unstable();
    Ok(set)
}
