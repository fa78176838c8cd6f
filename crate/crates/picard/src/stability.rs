//! Slope test configurations from deformation to the normal cone.
//!
//! For a curve C and parameter κ the non-archimedean energy and the
//! minimum norm are cubic polynomials `A·κ² + B·κ³` with coefficients
//! that are exact rational functions of the intersection data. The sign
//! analysis over κ ∈ (0, κ̄) is therefore a finite computation: the
//! relevant form `A + B·κ` is linear.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::{DivisorClass, SurfaceLattice};
use crate::pde::{self, Problem};
use crate::rational::{fmt_rational, q, qr, Q};
use crate::zariski;
use crate::Result;
use num::{Signed, Zero};

/// A slope test configuration: a curve, a parameter κ and the Seshadri
/// bound κ̄ it must stay under.
#[derive(Debug, Clone)]
pub struct SlopeTestConfig {
    /// Index into the declared negative curves, or an arbitrary effective
    /// class.
    pub curve: SlopeCurve,
    pub kappa: Q,
    pub kappa_bar: Q,
}

#[derive(Debug, Clone)]
pub enum SlopeCurve {
    Declared(usize),
    Class(DivisorClass),
}

impl SlopeTestConfig {
    pub fn new(curve: SlopeCurve, kappa: Q, kappa_bar: Q) -> Result<Self> {
        if !kappa.is_positive() || kappa >= kappa_bar {
            return Err(Error::Precondition(format!(
                "slope configuration needs 0 < κ < κ̄; got κ = {}, κ̄ = {}",
                fmt_rational(&kappa),
                fmt_rational(&kappa_bar)
            )));
        }
        Ok(SlopeTestConfig { curve, kappa, kappa_bar })
    }

    fn class(&self, l: &SurfaceLattice) -> DivisorClass {
        match &self.curve {
            SlopeCurve::Declared(i) => l.negative_curves[*i].class.clone(),
            SlopeCurve::Class(c) => c.clone(),
        }
    }
}

/// Conservative default Seshadri bound: the positivity bound of the norm
/// polynomial when C² > 0 (κ̄ = 3(ω·C)/(2C²)), and 1 otherwise. The true
/// Seshadri constant lives on a threefold outside this engine's scope and
/// is user input when known.
pub fn default_kappa_bar(l: &SurfaceLattice, omega: &DivisorClass, curve: &DivisorClass) -> Q {
    let csq = l.square(curve).unwrap();
    if csq.is_positive() {
        q(3) * l.pair(omega, curve).unwrap() / (q(2) * csq)
    } else {
        q(1)
    }
}

/// Exact coefficients of `E^NA = A₁κ² + B₁κ³` and `‖Φ‖ = A₂κ² + B₂κ³`,
/// with the evaluations at the configuration's κ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeInvariants {
    #[serde(with = "crate::rational::qstr")]
    pub a1: Q,
    #[serde(with = "crate::rational::qstr")]
    pub b1: Q,
    #[serde(with = "crate::rational::qstr")]
    pub a2: Q,
    #[serde(with = "crate::rational::qstr")]
    pub b2: Q,
    #[serde(with = "crate::rational::qstr")]
    pub e_na: Q,
    #[serde(with = "crate::rational::qstr")]
    pub norm: Q,
    /// `e_na / norm`; `None` when the norm vanishes.
    #[serde(with = "crate::rational::qstr_opt")]
    pub ratio: Option<Q>,
}

/// The polynomial expansion along a slope configuration:
/// A₁ = c·(ω·C) - θ·C, B₁ = -(2(θ·ω)/(3ω²))·C², A₂ = ω·C, B₂ = -(2/3)C².
pub fn slope_invariants(
    l: &SurfaceLattice,
    theta: &DivisorClass,
    omega: &DivisorClass,
    cfg: &SlopeTestConfig,
) -> Result<SlopeInvariants> {
    if !l.is_kahler(omega)? {
        return Err(Error::Precondition("slope invariants need a Kähler class ω".into()));
    }
    let c = q(2) * l.pair(theta, omega)? / l.square(omega)?;
    let curve = cfg.class(l);
    let wc = l.pair(omega, &curve)?;
    let tc = l.pair(theta, &curve)?;
    let csq = l.square(&curve)?;
    let a1 = &c * &wc - tc;
    let b1 = -(q(2) * l.pair(theta, omega)? / (q(3) * l.square(omega)?)) * &csq;
    let a2 = wc;
    let b2 = qr(-2, 3) * &csq;
    let k2 = &cfg.kappa * &cfg.kappa;
    let k3 = &k2 * &cfg.kappa;
    let e_na = &a1 * &k2 + &b1 * &k3;
    let norm = &a2 * &k2 + &b2 * &k3;
    let ratio = if norm.is_zero() { None } else { Some(&e_na / &norm) };
    Ok(SlopeInvariants { a1, b1, a2, b2, e_na, norm, ratio })
}

/// Verdict of the slope-stability sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SlopeVerdict {
    Unstable { witness_curve: String, witness_kappa: String },
    Semistable,
    Stable,
}

/// Sign of `A_C + B_C·κ` over (0, κ̄_C) for every declared negative
/// curve, by exact endpoint analysis of the linear form: unstable when a
/// strictly negative value exists, stable when the form stays strictly
/// positive for every curve, semistable otherwise.
pub fn slope_semistability(
    l: &SurfaceLattice,
    theta: &DivisorClass,
    omega: &DivisorClass,
    kappa_bars: &BTreeMap<usize, Q>,
) -> Result<SlopeVerdict> {
    if !l.is_kahler(omega)? {
        return Err(Error::Precondition("slope stability needs a Kähler class ω".into()));
    }
    let c = q(2) * l.pair(theta, omega)? / l.square(omega)?;
    let mut all_strict = true;
    for (i, curve) in l.negative_curves.iter().enumerate() {
        let kbar = match kappa_bars.get(&i) {
            Some(k) => k.clone(),
            None => default_kappa_bar(l, omega, &curve.class),
        };
        if !kbar.is_positive() {
            return Err(Error::Precondition(format!(
                "κ̄ for curve {} must be positive",
                curve.label
            )));
        }
        let a = &c * l.pair(omega, &curve.class)? - l.pair(theta, &curve.class)?;
        let b = -(q(2) * l.pair(theta, omega)? / (q(3) * l.square(omega)?))
            * l.square(&curve.class)?;
        let at_bar = &a + &b * &kbar;
        // Infimum over the open interval is min(A, A + B·κ̄), approached
        // at the endpoints; a strictly negative interior value exists iff
        // that min is negative.
        if a.is_negative() || at_bar.is_negative() {
            // Witness: a κ strictly inside where the form is negative.
            let witness = if a.is_negative() {
                let candidate = &kbar / q(2);
                if (&a + &b * &candidate).is_negative() {
                    candidate
                } else {
                    // Form crosses zero at -a/b with b > 0; stay below it.
                    (-&a / &b) / q(2)
                }
            } else {
                // Negative near κ̄; b < 0, crossing at -a/b < κ̄.
                let crossing = -&a / &b;
                (&crossing + &kbar) / q(2)
            };
            return Ok(SlopeVerdict::Unstable {
                witness_curve: curve.label.clone(),
                witness_kappa: fmt_rational(&witness),
            });
        }
        // Strict positivity on the open interval fails only for the
        // identically-zero form.
        if a.is_zero() && b.is_zero() {
            all_strict = false;
        }
    }
    Ok(if all_strict { SlopeVerdict::Stable } else { SlopeVerdict::Semistable })
}

/// The algebraic threshold Δ^alg and whether the slope family realizes it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioThreshold {
    #[serde(with = "crate::rational::qstr_opt")]
    pub delta_alg: Option<Q>,
    /// Always false when Δ ≤ 0: slope configurations approach but never
    /// attain the threshold.
    pub realized_by_slope: bool,
    /// False when τ is Kähler, where the identification with Δ_NM is
    /// only formal.
    pub equality_hypothesis_met: bool,
}

/// Δ^alg(θ,ω) = Δ_NM(θ,ω) over the finite candidate set, with a strict
/// non-realization sweep: on a κ-grid of `grid` points per candidate
/// curve the ratio E^NA/‖Φ‖ must exceed Δ strictly.
pub fn ratio_threshold(
    l: &SurfaceLattice,
    theta: &DivisorClass,
    omega: &DivisorClass,
    grid: usize,
) -> Result<RatioThreshold> {
    let problem = pde::j_problem(l, theta, omega)?;
    let tau_kahler = l.is_kahler(&problem.tau)?;
    let opt = pde::optimal_destabilizers(l, &Problem::J(problem))?;
    let delta = match &opt.delta {
        None => {
            return Ok(RatioThreshold {
                delta_alg: None,
                realized_by_slope: false,
                equality_hypothesis_met: !tau_kahler,
            })
        }
        Some(d) => d.clone(),
    };
    let mut realized = false;
    if !delta.is_positive() {
        for i in 0..l.negative_curves.len() {
            let curve = &l.negative_curves[i].class;
            let kbar = default_kappa_bar(l, omega, curve);
            for step in 1..=grid {
                let kappa = &kbar * q(step as i64) / q(grid as i64 + 1);
                let cfg = SlopeTestConfig::new(SlopeCurve::Declared(i), kappa, kbar.clone())?;
                let inv = slope_invariants(l, theta, omega, &cfg)?;
                if let Some(r) = inv.ratio {
                    if r <= delta {
                        realized = true;
                    }
                }
            }
        }
    }
    Ok(RatioThreshold {
        delta_alg: Some(delta),
        realized_by_slope: realized,
        equality_hypothesis_met: !tau_kahler,
    })
}

/// Certificate of a J-stable-but-not-uniformly-stable pair.
#[derive(Debug, Clone)]
pub struct JStableCertificate {
    pub theta: DivisorClass,
    pub omega_half: DivisorClass,
    /// The nef, big, non-Kähler partner ω′ with θ² = ω′².
    pub omega_prime: DivisorClass,
    pub c: Q,
    /// τ = 2·ω_half - θ = ω′.
    pub tau: DivisorClass,
    pub delta_nm: Q,
    pub search_direction: DivisorClass,
}

/// Construct a rational Kähler θ and a midpoint class ω_half so that
/// c = 2 and τ = 2ω_half - θ is nef but not Kähler: the pair is
/// J-semistable yet not uniformly stable.
///
/// ω′ = A - (A·C/C²)·C is the nef non-Kähler partner through the chosen
/// curve (the first declared curve by default); θ is found by enumerating
/// rational points on the quadric {x² = ω′²} through ω′ along lines of
/// bounded integer height.
pub fn construct_jstable_not_uniform(
    l: &SurfaceLattice,
    curve_index: Option<usize>,
    height_bound: i64,
) -> Result<JStableCertificate> {
    if l.negative_curves.is_empty() {
        return Err(Error::Precondition(
            "the construction needs at least one negative curve".into(),
        ));
    }
    if !l.projective {
        return Err(Error::Precondition("the construction needs a projective lattice".into()));
    }
    let a = &l.ample;
    let curve_index = curve_index.unwrap_or(0);
    if curve_index >= l.negative_curves.len() {
        return Err(Error::Precondition(format!("no declared curve with index {curve_index}")));
    }
    let curve = &l.negative_curves[curve_index].class;
    let ac = l.pair(a, curve)?;
    let csq = l.square(curve)?;
    let omega_prime = a.sub(&curve.scale(&(&ac / &csq)));
    debug_assert!(l.is_nef(&omega_prime).unwrap() && !l.is_kahler(&omega_prime).unwrap());
    let target_square = l.square(&omega_prime)?;

    // Rational points on {x² = ω′²} through ω′: for a direction d with
    // d² ≠ 0 the second intersection of the line ω′ + t·d is at
    // t = -2(ω′·d)/d².
    let mut found: Option<(DivisorClass, DivisorClass)> = None;
    'search: for height in 1..=height_bound {
        for d in integer_directions(l.rank, height) {
            let dir = DivisorClass::from_ints(&d);
            let dsq = l.square(&dir)?;
            if dsq.is_zero() {
                continue;
            }
            let wd = l.pair(&omega_prime, &dir)?;
            if wd.is_zero() {
                continue;
            }
            let t = q(-2) * &wd / &dsq;
            let theta = omega_prime.add(&dir.scale(&t));
            debug_assert_eq!(l.square(&theta).unwrap(), target_square);
            if l.is_kahler(&theta)? {
                found = Some((theta, dir));
                break 'search;
            }
        }
    }
    let (theta, search_direction) = found.ok_or_else(|| {
        Error::SearchFailure(format!(
            "no rational Kähler partner of equal square within height {height_bound}"
        ))
    })?;

    let omega_half = theta.add(&omega_prime).scale(&qr(1, 2));
    let c = q(2) * l.pair(&theta, &omega_half)? / l.square(&omega_half)?;
    assert_eq!(c, q(2), "midpoint normalization must give c = 2");
    let tau = omega_half.scale(&q(2)).sub(&theta);
    assert_eq!(tau, omega_prime);
    let problem = pde::j_problem(l, &theta, &omega_half)?;
    let opt = pde::optimal_destabilizers(l, &Problem::J(problem))?;
    let delta_nm = opt.delta.clone().unwrap();
    assert!(!delta_nm.is_positive(), "τ is not Kähler, so Δ_NM ≤ 0");
    // Semistable but not uniformly: destabilizer set nonempty, all
    // pairings ≥ 0, some pairing exactly 0.
    let dest = zariski::destabilizer_set(l, &tau)?;
    assert!(!dest.is_empty());
    assert!(l.curve_pairings(&tau)?.iter().all(|p| !p.is_negative()));
    Ok(JStableCertificate {
        theta,
        omega_half,
        omega_prime: omega_prime.clone(),
        c,
        tau,
        delta_nm,
        search_direction,
    })
}

/// Primitive integer vectors of exactly the given sup-norm height, first
/// nonzero coordinate positive, in lexicographic order.
fn integer_directions(rank: usize, height: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![-height; rank];
    loop {
        if current.iter().any(|&c| c.abs() == height) {
            if let Some(first) = current.iter().find(|&&c| c != 0) {
                if *first > 0 {
                    let g = current.iter().fold(0i64, |acc, &c| gcd(acc, c.abs()));
                    if g == 1 {
                        out.push(current.clone());
                    }
                }
            }
        }
        let mut idx = rank;
        loop {
            if idx == 0 {
                return out;
            }
            idx -= 1;
            if current[idx] < height {
                current[idx] += 1;
                for c in current.iter_mut().skip(idx + 1) {
                    *c = -height;
                }
                break;
            }
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
