//! Reduced cohomological data for the J-equation, the deformed Hermitian
//! Yang-Mills equation and the rank-one Z-critical equation.
//!
//! Each equation reduces to the question of whether a single class τ is
//! Kähler; the constructors here compute τ exactly, check the algebraic
//! identities it satisfies, and `certify` answers solvability by the
//! finitely many curve inequalities of the lattice module. No
//! transcendental function is ever evaluated: phases enter only through
//! their cotangents, which are rational in the input data.

use serde::{Deserialize, Serialize};

use crate::eps::EpsRational;
use crate::error::Error;
use crate::lattice::{DivisorClass, SurfaceLattice};
use crate::rational::{fmt_rational, q, qr, ComplexQ, Q};
use crate::zariski::{self, EpsMode};
use crate::Result;
use num::{Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    J,
    Dhym,
    Z,
}

/// J-equation data: `Tr_ω θ = c` reduces to the class `τ = c·ω - θ`.
#[derive(Debug, Clone)]
pub struct JProblem {
    pub theta: DivisorClass,
    pub omega: DivisorClass,
    /// `c = 2(θ·ω)/ω²`.
    pub c: Q,
    pub tau: DivisorClass,
}

/// dHYM data: solvable iff `τ = α + cot(Θ̂)·β` is Kähler.
#[derive(Debug, Clone)]
pub struct DHYMProblem {
    pub beta: DivisorClass,
    pub alpha: DivisorClass,
    /// `cot(Θ̂) = (β² - α²)/(2 α·β)`.
    pub cot_phase: Q,
    pub tau: DivisorClass,
    /// `α² - β² > 0`, the supercritical regime.
    pub supercritical: bool,
}

/// A polynomial central charge `Ω = (β, ρ, U)` with exact coefficients.
#[derive(Debug, Clone)]
pub struct StabilityData {
    pub beta: DivisorClass,
    /// `(ρ₀, ρ₁, ρ₂)`, all nonzero.
    pub rho: [ComplexQ; 3],
    pub u1: DivisorClass,
    /// Integral of the (2,2) part of U against the fundamental class.
    pub u2: Q,
    /// Whether the stability-vector normalization (Im ρ₂ > 0 and the
    /// successive-ratio conditions) holds; reported, never enforced.
    pub normalized: bool,
}

impl StabilityData {
    pub fn new(
        l: &SurfaceLattice,
        beta: DivisorClass,
        rho: [ComplexQ; 3],
        u1: DivisorClass,
        u2: Q,
    ) -> Result<Self> {
        if !l.is_kahler(&beta)? {
            return Err(Error::Precondition("stability data needs a Kähler class β".into()));
        }
        if u1.dim() != l.rank {
            return Err(Error::dimension(l.rank, u1.dim()));
        }
        for (k, r) in rho.iter().enumerate() {
            if r.is_zero() {
                return Err(Error::Precondition(format!("stability vector has ρ{k} = 0")));
            }
        }
        // Im(ρ_d/ρ_{d+1}) > 0 has the sign of Im(ρ_d)Re(ρ_{d+1}) - Re(ρ_d)Im(ρ_{d+1}).
        let ratio_im_pos = |num: &ComplexQ, den: &ComplexQ| {
            (&num.im * &den.re - &num.re * &den.im).is_positive()
        };
        let normalized = rho[2].im.is_positive()
            && ratio_im_pos(&rho[1], &rho[2])
            && ratio_im_pos(&rho[0], &rho[1]);
        Ok(StabilityData { beta, rho, u1, u2, normalized })
    }

    /// The family of the worked wall-and-chamber slice:
    /// `ρ_s(t) = 1 - s·t + s²t²/2` with `U = 1`, on a fixed Kähler β.
    pub fn omega_s(l: &SurfaceLattice, beta: DivisorClass, s: &ComplexQ) -> Result<Self> {
        let s2 = s.mul(s);
        let rho = [
            ComplexQ::new(q(1), q(0)),
            ComplexQ::new(-&s.re, -&s.im),
            ComplexQ::new(&s2.re / q(2), &s2.im / q(2)),
        ];
        StabilityData::new(l, beta, rho, DivisorClass::zero(l.rank), Q::zero())
    }
}

/// Validity flags carried by a constructed Z-problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZFlags {
    /// Im Z_Ω(L) > 0.
    pub charge_upper_half_plane: bool,
    /// φ(L) ≠ arg(±ρ₀), i.e. c₀ ≠ 0; always true after construction.
    pub phase_ok: bool,
    /// V(Ω, L) > 0, the class-level volume form hypothesis.
    pub v_positive: bool,
    /// σ·β ≠ 0, so the sign s is well-defined.
    pub sign_defined: bool,
}

/// Reduced data of the rank-one Z-critical equation.
#[derive(Debug, Clone)]
pub struct ZProblem {
    pub data: StabilityData,
    pub c1l: DivisorClass,
    pub charge: ComplexQ,
    /// cot φ(L) = Re Z / Im Z.
    pub cot_phi: Q,
    /// `c_k = Im(ρ_k)·cot φ(L) - Re(ρ_k)`.
    pub ck: [Q; 3],
    pub eta: DivisorClass,
    pub gamma: Q,
    /// `V = ∫ ¼η² - γ`; equals ∫σ² exactly.
    pub v: Q,
    /// `σ = c₁(L) + ½η`.
    pub sigma: DivisorClass,
    /// Sign of σ·β; +1 when σ·β = 0 (then `sign_defined` is false).
    pub sign_s: i8,
    /// `τ = s·σ`, in P⁺ whenever V > 0.
    pub tau: DivisorClass,
    pub valid: ZFlags,
}

/// Solvability certificate: τ together with every tested curve pairing.
#[derive(Debug, Clone)]
pub struct SolvabilityCertificate {
    pub kind: ProblemKind,
    pub tau: DivisorClass,
    pub solvable: bool,
    /// `(curve index, pairing)` for every declared negative curve.
    pub tested_curves: Vec<(usize, Q)>,
    /// Sublist with pairing ≤ 0.
    pub failing: Vec<(usize, Q)>,
    /// Minimum pairing over tested curves; `None` when there are none.
    pub margin: Option<Q>,
    pub square: Q,
    pub ample_pairing: Q,
    /// τ is nef and in P⁺ but some pairing is exactly zero.
    pub boundary: bool,
    pub supercritical: Option<bool>,
}

impl SolvabilityCertificate {
    pub fn to_doc(&self, l: &SurfaceLattice) -> CertificateDoc {
        let named = |xs: &[(usize, Q)]| {
            xs.iter()
                .map(|(i, p)| CurvePairing {
                    curve: l.curve_label(*i).to_string(),
                    pairing: fmt_rational(p),
                })
                .collect()
        };
        CertificateDoc {
            schema: "certificate/1".into(),
            kind: self.kind,
            surface: l.name.clone(),
            tau: self.tau.0.iter().map(fmt_rational).collect(),
            solvable: self.solvable,
            tested_curves: named(&self.tested_curves),
            failing: named(&self.failing),
            margin: self.margin.as_ref().map(fmt_rational),
            square: fmt_rational(&self.square),
            ample_pairing: fmt_rational(&self.ample_pairing),
            boundary: self.boundary,
            supercritical: self.supercritical,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub schema: String,
    pub kind: ProblemKind,
    pub surface: String,
    pub tau: Vec<String>,
    pub solvable: bool,
    pub tested_curves: Vec<CurvePairing>,
    pub failing: Vec<CurvePairing>,
    pub margin: Option<String>,
    pub square: String,
    pub ample_pairing: String,
    pub boundary: bool,
    pub supercritical: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePairing {
    pub curve: String,
    pub pairing: String,
}

/// Any of the three reduced problems.
#[derive(Debug, Clone)]
pub enum Problem {
    J(JProblem),
    Dhym(DHYMProblem),
    Z(ZProblem),
}

impl Problem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::J(_) => ProblemKind::J,
            Problem::Dhym(_) => ProblemKind::Dhym,
            Problem::Z(_) => ProblemKind::Z,
        }
    }

    pub fn tau(&self) -> &DivisorClass {
        match self {
            Problem::J(p) => &p.tau,
            Problem::Dhym(p) => &p.tau,
            Problem::Z(p) => &p.tau,
        }
    }
}

/// Build the J-problem for Kähler ω and θ in P⁺ and verify its exact
/// identities `τ·ω = θ·ω` and `τ² = θ²`.
pub fn j_problem(l: &SurfaceLattice, theta: &DivisorClass, omega: &DivisorClass) -> Result<JProblem> {
    if !l.is_kahler(omega)? {
        return Err(Error::Precondition("J-problem needs a Kähler class ω".into()));
    }
    if !l.in_p_plus(theta)? {
        return Err(Error::Precondition("J-problem needs θ in P+".into()));
    }
    let tw = l.pair(theta, omega)?;
    let ww = l.square(omega)?;
    let c = q(2) * &tw / &ww;
    let tau = omega.scale(&c).sub(theta);
    assert_eq!(l.pair(&tau, omega)?, tw, "J identity τ·ω = θ·ω failed");
    assert_eq!(l.square(&tau)?, l.square(theta)?, "J identity τ² = θ² failed");
    Ok(JProblem { theta: theta.clone(), omega: omega.clone(), c, tau })
}

/// Build the dHYM problem for a pair of Kähler classes and verify the
/// completed-square identities.
pub fn dhym_problem(
    l: &SurfaceLattice,
    beta: &DivisorClass,
    alpha: &DivisorClass,
) -> Result<DHYMProblem> {
    if !l.is_kahler(beta)? || !l.is_kahler(alpha)? {
        return Err(Error::Precondition("dHYM problem needs Kähler classes β, α".into()));
    }
    let bb = l.square(beta)?;
    let aa = l.square(alpha)?;
    let ab = l.pair(alpha, beta)?;
    let cot_phase = (&bb - &aa) / (q(2) * &ab);
    let tau = alpha.add(&beta.scale(&cot_phase));
    let supercritical = (&aa - &bb).is_positive();
    assert_eq!(
        l.square(&tau)?,
        (q(1) + &cot_phase * &cot_phase) * &bb,
        "dHYM identity τ² = (1 + cot²)β² failed"
    );
    assert_eq!(
        l.pair(&tau, alpha)?,
        (&bb + &aa) / q(2),
        "dHYM identity τ·α = (β² + α²)/2 failed"
    );
    Ok(DHYMProblem {
        beta: beta.clone(),
        alpha: alpha.clone(),
        cot_phase,
        tau,
        supercritical,
    })
}

/// Build the reduced Z-critical problem. The charge is the degree-(2,2)
/// integral `Z_Ω(L) = ρ₀(c₁²/2 + c₁·U₁ + U₂) + ρ₁(β·c₁ + β·U₁) + ρ₂β²`;
/// everything downstream is rational in cot φ(L) = Re Z / Im Z.
pub fn z_problem(l: &SurfaceLattice, data: &StabilityData, c1l: &DivisorClass) -> Result<ZProblem> {
    if c1l.dim() != l.rank {
        return Err(Error::dimension(l.rank, c1l.dim()));
    }
    let beta = &data.beta;
    let q0 = l.square(c1l)? / q(2) + l.pair(c1l, &data.u1)? + &data.u2;
    let q1 = l.pair(beta, c1l)? + l.pair(beta, &data.u1)?;
    let q2 = l.square(beta)?;
    let charge = data.rho[0]
        .scale(&q0)
        .add(&data.rho[1].scale(&q1))
        .add(&data.rho[2].scale(&q2));
    if charge.im.is_zero() {
        return Err(Error::DegenerateCharge);
    }
    let cot_phi = &charge.re / &charge.im;
    let ck: [Q; 3] = std::array::from_fn(|k| &data.rho[k].im * &cot_phi - &data.rho[k].re);
    if ck[0].is_zero() {
        return Err(Error::PhaseCollision);
    }
    // η = (2/c₀)(c₀U₁ + c₁β), γ = (2/c₀)(c₀U₂ + c₁ β·U₁ + c₂ β²).
    let eta = data.u1.scale(&q(2)).add(&beta.scale(&(q(2) * &ck[1] / &ck[0])));
    let gamma = q(2) * &data.u2
        + q(2) * &ck[1] / &ck[0] * l.pair(beta, &data.u1)?
        + q(2) * &ck[2] / &ck[0] * &q2;
    let v = l.square(&eta)? / q(4) - &gamma;
    let sigma = c1l.add(&eta.scale(&qr(1, 2)));
    assert_eq!(l.square(&sigma)?, v, "Z identity ∫σ² = V failed");

    let sb = l.pair(&sigma, beta)?;
    let sign_defined = !sb.is_zero();
    let sign_s: i8 = if sb.is_negative() { -1 } else { 1 };
    let tau = if sign_s == 1 { sigma.clone() } else { sigma.neg() };
    let valid = ZFlags {
        charge_upper_half_plane: charge.im.is_positive(),
        phase_ok: true,
        v_positive: v.is_positive(),
        sign_defined,
    };
    Ok(ZProblem {
        data: data.clone(),
        c1l: c1l.clone(),
        charge,
        cot_phi,
        ck,
        eta,
        gamma,
        v,
        sigma,
        sign_s,
        tau,
        valid,
    })
}

/// Certify solvability: τ passes the Kähler test iff the equation is
/// solvable. All declared negative curves are tested and reported.
pub fn certify(l: &SurfaceLattice, problem: &Problem) -> Result<SolvabilityCertificate> {
    if let Problem::Z(z) = problem {
        if !z.valid.v_positive {
            return Err(Error::Precondition(
                "Z-certification needs the volume form hypothesis V > 0".into(),
            ));
        }
        if !z.valid.phase_ok || !z.valid.sign_defined {
            return Err(Error::Precondition("Z-certification needs a well-defined sign".into()));
        }
    }
    let tau = problem.tau().clone();
    let square = l.square(&tau)?;
    let ample_pairing = l.pair(&tau, &l.ample)?;
    let pairings = l.curve_pairings(&tau)?;
    let tested_curves: Vec<(usize, Q)> = pairings.into_iter().enumerate().collect();
    let failing: Vec<(usize, Q)> = tested_curves
        .iter()
        .filter(|(_, p)| !p.is_positive())
        .cloned()
        .collect();
    let margin = tested_curves.iter().map(|(_, p)| p.clone()).min();
    let in_p_plus = square.is_positive() && ample_pairing.is_positive();
    let solvable = in_p_plus && tested_curves.iter().all(|(_, p)| p.is_positive());
    let boundary = in_p_plus
        && !solvable
        && tested_curves.iter().all(|(_, p)| !p.is_negative())
        && margin.as_ref().map(|m| m.is_zero()).unwrap_or(false);
    let supercritical = match problem {
        Problem::Dhym(p) => Some(p.supercritical),
        _ => None,
    };
    Ok(SolvabilityCertificate {
        kind: problem.kind(),
        tau,
        solvable,
        tested_curves,
        failing,
        margin,
        square,
        ample_pairing,
        boundary,
        supercritical,
    })
}

/// What bound the nef threshold along the ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdBound {
    /// A declared curve pairing reached zero first.
    Curve,
    /// The ray left the positive cone (square reached zero) first.
    PositiveConeBoundary,
}

/// Nef threshold along `ω_u = θ + u(ω - θ)`.
#[derive(Debug, Clone)]
pub struct NefThresholdResult {
    pub exists: bool,
    /// First nef-but-not-Kähler class along the ray, when it exists.
    pub a: Option<DivisorClass>,
    pub u_star: Option<Q>,
    /// Parameter with `ω = (1-t)a + tθ`; in (0,1) when the threshold exists.
    pub t: Option<Q>,
    /// All declared curves with `a·C = 0`.
    pub zero_curves: Vec<usize>,
    pub bound: Option<ThresholdBound>,
}

fn exact_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// The first nef-but-not-Kähler class on the ray from θ through ω.
///
/// The binding event is either a curve pairing reaching zero (a rational
/// parameter) or the square reaching zero. A curve always binds at a
/// rational u; when the positive-cone boundary binds strictly first and
/// its root is irrational, the result cannot be represented exactly and
/// [`Error::IrrationalThreshold`] is returned.
pub fn nef_threshold(
    l: &SurfaceLattice,
    theta: &DivisorClass,
    omega: &DivisorClass,
) -> Result<NefThresholdResult> {
    if !l.is_kahler(theta)? || !l.is_kahler(omega)? {
        return Err(Error::Precondition("nef threshold needs Kähler classes θ, ω".into()));
    }
    if theta == omega {
        return Err(Error::Precondition("nef threshold needs θ ≠ ω".into()));
    }
    let dir = omega.sub(theta); // ω_u = θ + u·dir
    let curve_root: Option<Q> = l
        .negative_curves
        .iter()
        .filter_map(|c| {
            let dc = l.pair(&dir, &c.class).unwrap();
            if dc.is_negative() {
                Some(l.pair(theta, &c.class).unwrap() / -dc)
            } else {
                None
            }
        })
        .min();

    // ω_u² = d2·u² + 2·d1·u + d0.
    let d2 = l.square(&dir)?;
    let d1 = l.pair(theta, &dir)?;
    let d0 = l.square(theta)?;
    enum BoundaryRoot {
        None,
        Rational(Q),
        Irrational,
    }
    let boundary_root = if d2.is_zero() {
        if d1.is_negative() {
            BoundaryRoot::Rational(-&d0 / (q(2) * &d1))
        } else {
            BoundaryRoot::None
        }
    } else {
        let disc = &d1 * &d1 - &d2 * &d0;
        if d2.is_negative() {
            // One positive root.
            match exact_sqrt(&disc) {
                Some(r) => BoundaryRoot::Rational((-&d1 - r) / &d2),
                None => BoundaryRoot::Irrational,
            }
        } else if disc.is_positive() && d1.is_negative() {
            match exact_sqrt(&disc) {
                Some(r) => BoundaryRoot::Rational((-&d1 - r) / &d2),
                None => BoundaryRoot::Irrational,
            }
        } else {
            BoundaryRoot::None
        }
    };

    // Decide which event binds first without evaluating irrational roots:
    // a rational candidate u binds before the boundary iff the square is
    // still nonnegative there (and, for an upward parabola, u is on the
    // decreasing side of the vertex).
    let curve_binds = match (&curve_root, &boundary_root) {
        (None, _) => false,
        (Some(_), BoundaryRoot::None) => true,
        (Some(u), _) => {
            let qu = &d2 * u * u + q(2) * &d1 * u + &d0;
            if d2.is_positive() {
                !qu.is_negative() && !(&d1 + &d2 * u).is_positive()
            } else {
                !qu.is_negative()
            }
        }
    };

    let (u_star, bound) = if curve_binds {
        (curve_root.unwrap(), ThresholdBound::Curve)
    } else {
        match boundary_root {
            BoundaryRoot::Rational(u) => (u, ThresholdBound::PositiveConeBoundary),
            BoundaryRoot::Irrational => {
                return Err(Error::IrrationalThreshold(
                    "the positive-cone boundary binds at an irrational parameter".into(),
                ))
            }
            BoundaryRoot::None => {
                return Ok(NefThresholdResult {
                    exists: false,
                    a: None,
                    u_star: None,
                    t: None,
                    zero_curves: vec![],
                    bound: None,
                })
            }
        }
    };

    let a = theta.add(&dir.scale(&u_star));
    if a.is_zero() {
        // The ray exits the Kähler cone through the vertex (θ and ω are
        // negatively proportional along it); no threshold class exists.
        return Ok(NefThresholdResult {
            exists: false,
            a: None,
            u_star: None,
            t: None,
            zero_curves: vec![],
            bound: None,
        });
    }
    debug_assert!(u_star > q(1), "threshold lies beyond ω on the ray");
    debug_assert!(l.is_nef(&a).unwrap() && !l.is_kahler(&a).unwrap());
    let t = (&u_star - q(1)) / &u_star;
    let zero_curves = (0..l.negative_curves.len())
        .filter(|&i| l.pair(&a, &l.negative_curves[i].class).unwrap().is_zero())
        .collect();
    Ok(NefThresholdResult {
        exists: true,
        a: Some(a),
        u_star: Some(u_star),
        t: Some(t),
        zero_curves,
        bound: Some(bound),
    })
}

/// Threshold and argmin curves of the Nakai-Moishezon defect.
#[derive(Debug, Clone)]
pub struct OptimalDestabilizers {
    /// `min over candidate curves of (c - θ·C/ω·C)` (J), or
    /// `(1/c̃ - β·C/α·C)` (dHYM); `None` when there are no curves.
    pub delta: Option<Q>,
    /// Argmin set when Δ ≤ 0, empty otherwise.
    pub curves: Vec<usize>,
    /// Whether the argmin set matches the zero curves of the nef
    /// threshold class, when the characterization's hypotheses hold.
    pub threshold_match: Option<bool>,
}

/// Optimally destabilizing curves for a J or dHYM problem.
///
/// Δ is computed over the declared negative curves: under the
/// completeness contract these are the only candidates that can realize a
/// nonpositive value, and Δ > 0 is equivalent to solvability either way.
/// The dHYM variant requires the supercritical regime so that 1/c̃ is a
/// positive number.
pub fn optimal_destabilizers(l: &SurfaceLattice, problem: &Problem) -> Result<OptimalDestabilizers> {
    let (num_class, den_class, constant) = match problem {
        Problem::J(p) => (p.theta.clone(), p.omega.clone(), p.c.clone()),
        Problem::Dhym(p) => {
            if !p.supercritical {
                return Err(Error::Precondition(
                    "dHYM optimal destabilizers need the supercritical regime α² > β²".into(),
                ));
            }
            let c_tilde = -&p.cot_phase;
            (p.beta.clone(), p.alpha.clone(), q(1) / c_tilde)
        }
        Problem::Z(_) => {
            return Err(Error::Precondition(
                "optimal destabilizers are defined for J and dHYM problems".into(),
            ))
        }
    };
    let n = l.negative_curves.len();
    if n == 0 {
        return Ok(OptimalDestabilizers { delta: None, curves: vec![], threshold_match: None });
    }
    let values: Vec<Q> = (0..n)
        .map(|i| {
            let c = &l.negative_curves[i].class;
            let num = l.pair(&num_class, c).unwrap();
            let den = l.pair(&den_class, c).unwrap();
            &constant - num / den
        })
        .collect();
    let delta = values.iter().min().cloned().unwrap();
    let curves: Vec<usize> = if delta.is_positive() {
        vec![]
    } else {
        (0..n).filter(|&i| values[i] == delta).collect()
    };

    // Cross-check against the nef-threshold characterization when its
    // hypotheses hold: a ∈ P⁺ and Δ ≤ 0.
    let threshold_match = if !delta.is_positive() {
        match nef_threshold(l, &num_class, &den_class) {
            Ok(res) if res.exists => {
                let a = res.a.as_ref().unwrap();
                if l.in_p_plus(a)? {
                    Some(res.zero_curves == curves)
                } else {
                    None
                }
            }
            _ => None,
        }
    } else {
        None
    };
    Ok(OptimalDestabilizers { delta: Some(delta), curves, threshold_match })
}

/// Candidate destabilizer set S(θ, ω): the Zariski limit set of
/// `τ_{θ,ω} - ε·ω` together with the curves pairing nonpositively with
/// τ. Contains every destabilizer of the pair, is invariant under
/// rescaling ω, shrinks under θ ↦ θ + εω, and obeys the general-point
/// blowup law S(π*θ, π*ω) = π*S(θ, ω) ∪ {E}.
///
/// ω may lie on the nef boundary (pullbacks of Kähler classes) as long as
/// its square is positive.
pub fn candidate_destabilizers(
    l: &SurfaceLattice,
    theta: &DivisorClass,
    omega: &DivisorClass,
) -> Result<Vec<usize>> {
    if !l.is_nef(omega)? || !l.square(omega)?.is_positive() {
        return Err(Error::Precondition(
            "candidate set needs a nef ω with positive square".into(),
        ));
    }
    if !l.in_p_plus(theta)? {
        return Err(Error::Precondition("candidate set needs θ in P+".into()));
    }
    let c = q(2) * l.pair(theta, omega)? / l.square(omega)?;
    let tau = omega.scale(&c).sub(theta);
    let mut set = zariski::neg_limit(l, &tau, omega, EpsMode::Infinitesimal)?;
    for i in 0..l.negative_curves.len() {
        if !l.pair(&tau, &l.negative_curves[i].class)?.is_positive() && !set.contains(&i) {
            set.push(i);
        }
    }
    set.sort_unstable();
    Ok(set)
}

/// Flow singular locus: the negative part of `τ - ε·β` for infinitesimal
/// ε, where β is the theta-side Kähler class. Defined for unsolvable
/// problems; the support carries the curves along which the associated
/// flow develops singularities.
pub fn flow_singular_locus(
    l: &SurfaceLattice,
    problem: &Problem,
) -> Result<Vec<(usize, EpsRational)>> {
    let cert = certify(l, problem)?;
    if cert.solvable {
        return Err(Error::Precondition(
            "flow singular locus is defined for unsolvable problems".into(),
        ));
    }
    let beta = match problem {
        Problem::J(p) => p.theta.clone(),
        Problem::Dhym(p) => p.beta.clone(),
        Problem::Z(_) => {
            return Err(Error::Precondition(
                "flow singular locus is defined for J and dHYM problems".into(),
            ))
        }
    };
    let d = zariski::decompose_eps(l, problem.tau(), &beta)?;
    let locus: Vec<(usize, EpsRational)> =
        d.support.into_iter().zip(d.coefficients).collect();
    debug_assert!(locus.len() <= zariski::cardinality_bound(l));
    Ok(locus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;

    fn bl2p2() -> SurfaceLattice {
        SurfaceLattice::builtin("bl2p2").unwrap()
    }

    #[test]
    fn worked_j_instance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[11, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let p = j_problem(&l, &theta, &omega).unwrap();
        assert_eq!(p.c, qr(62, 7));
        assert_eq!(p.tau, DivisorClass(vec![qr(109, 7), qr(-55, 7), qr(-55, 7)]));
        let cert = certify(&l, &Problem::J(p)).unwrap();
        assert!(!cert.solvable);
        assert_eq!(cert.failing, vec![(2, qr(-1, 7))]);
        assert_eq!(cert.margin, Some(qr(-1, 7)));
    }

    #[test]
    fn j_with_theta_equal_omega() {
        let l = bl2p2();
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let p = j_problem(&l, &omega, &omega).unwrap();
        assert_eq!(p.c, q(2));
        assert_eq!(p.tau, omega);
        assert!(certify(&l, &Problem::J(p)).unwrap().solvable);
    }

    #[test]
    fn j_boundary_instance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[10, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let p = j_problem(&l, &theta, &omega).unwrap();
        assert_eq!(p.c, q(8));
        assert_eq!(p.tau, DivisorClass::from_ints(&[14, -7, -7]));
        let cert = certify(&l, &Problem::J(p)).unwrap();
        assert!(!cert.solvable);
        assert!(cert.boundary);
        assert_eq!(cert.margin, Some(q(0)));
    }

    #[test]
    fn dhym_same_ray() {
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let alpha = beta.scale(&q(2));
        let p = dhym_problem(&l, &beta, &alpha).unwrap();
        assert_eq!(p.cot_phase, qr(-3, 4));
        assert_eq!(p.tau, beta.scale(&qr(5, 4)));
        assert!(p.supercritical);
        assert!(certify(&l, &Problem::Dhym(p)).unwrap().solvable);
    }

    #[test]
    fn dhym_equal_classes() {
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let p = dhym_problem(&l, &beta, &beta).unwrap();
        assert_eq!(p.cot_phase, q(0));
        assert_eq!(p.tau, beta);
        assert!(!p.supercritical);
    }

    #[test]
    fn p1xp1_dhym_always_solvable() {
        let l = SurfaceLattice::builtin("p1xp1").unwrap();
        for (b, a) in [([1i64, 1], [2i64, 3]), ([2, 1], [1, 4]), ([3, 2], [2, 2])] {
            let p = dhym_problem(
                &l,
                &DivisorClass::from_ints(&b),
                &DivisorClass::from_ints(&a),
            )
            .unwrap();
            assert!(certify(&l, &Problem::Dhym(p)).unwrap().solvable);
        }
    }

    #[test]
    fn z_problem_omega_s_charge() {
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let s = ComplexQ::new(q(0), q(1)); // s = i
        let data = StabilityData::omega_s(&l, beta, &s).unwrap();
        let e1 = DivisorClass::from_ints(&[0, 1, 0]);
        let z = z_problem(&l, &data, &e1).unwrap();
        assert_eq!(z.charge, ComplexQ::new(q(-4), q(-1)));
        assert!(!z.valid.charge_upper_half_plane);
        assert_eq!(l.square(&z.sigma).unwrap(), z.v);
    }

    #[test]
    fn z_problem_zero_bundle() {
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let rho = [
            ComplexQ::new(q(1), q(1)),
            ComplexQ::new(q(2), q(1)),
            ComplexQ::new(q(1), q(3)),
        ];
        let data =
            StabilityData::new(&l, beta.clone(), rho, DivisorClass::zero(3), Q::zero()).unwrap();
        let zero = DivisorClass::zero(3);
        let z = z_problem(&l, &data, &zero).unwrap();
        // charge = ρ₂·β².
        assert_eq!(z.charge, ComplexQ::new(q(7), q(21)));
        // η = (2c₁/c₀)β and σ = η/2.
        let expected_eta = beta.scale(&(q(2) * &z.ck[1] / &z.ck[0]));
        assert_eq!(z.eta, expected_eta);
        assert_eq!(z.sigma, z.eta.scale(&qr(1, 2)));
    }

    #[test]
    fn z_problem_phase_collision() {
        // Real ρ₀ with cot φ = 0 forces c₀ = -Re ρ₀... build a collision:
        // ρ₀ purely imaginary and charge purely imaginary gives c₀ = 0.
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        // Choose ρ so that the charge is purely imaginary: c₁L = 0,
        // U = 1 trivial, charge = ρ₂β²; take ρ₂ = i and ρ₀ = 5i.
        let rho = [
            ComplexQ::new(q(0), q(5)),
            ComplexQ::new(q(1), q(1)),
            ComplexQ::new(q(0), q(1)),
        ];
        let data =
            StabilityData::new(&l, beta, rho, DivisorClass::zero(3), Q::zero()).unwrap();
        let zero = DivisorClass::zero(3);
        match z_problem(&l, &data, &zero) {
            Err(Error::PhaseCollision) => {}
            other => panic!("expected PhaseCollision, got {other:?}"),
        }
    }

    #[test]
    fn z_problem_degenerate_charge() {
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        // Real ρ and trivial U make the charge real.
        let rho = [
            ComplexQ::new(q(1), q(0)),
            ComplexQ::new(q(2), q(0)),
            ComplexQ::new(q(3), q(0)),
        ];
        let data =
            StabilityData::new(&l, beta, rho, DivisorClass::zero(3), Q::zero()).unwrap();
        let zero = DivisorClass::zero(3);
        match z_problem(&l, &data, &zero) {
            Err(Error::DegenerateCharge) => {}
            other => panic!("expected DegenerateCharge, got {other:?}"),
        }
    }

    #[test]
    fn z_problem_negative_sign_branch() {
        // Crafted so that σ = -β: c₁L = 0, U = 1, cot φ = 0 and
        // c₁ = -c₀ force η = -2β. Then σ·β < 0, the sign flips, and
        // τ = β is Kähler.
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let rho = [
            ComplexQ::new(q(1), q(0)),
            ComplexQ::new(q(-1), q(5)),
            ComplexQ::new(q(0), q(1)),
        ];
        let data =
            StabilityData::new(&l, beta.clone(), rho, DivisorClass::zero(3), Q::zero()).unwrap();
        let z = z_problem(&l, &data, &DivisorClass::zero(3)).unwrap();
        assert_eq!(z.sigma, beta.neg());
        assert_eq!(z.sign_s, -1);
        assert_eq!(z.tau, beta);
        assert_eq!(z.v, q(7));
        let cert = certify(&l, &Problem::Z(z)).unwrap();
        assert!(cert.solvable);
    }

    #[test]
    fn z_certificate_invariant_under_rho_negation() {
        // Ω ↦ (β, -ρ, U) negates the charge and every c_k, so η, σ, the
        // sign and τ are all unchanged; the certificate must agree.
        let l = bl2p2();
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let rho = [
            ComplexQ::new(q(2), q(1)),
            ComplexQ::new(q(-1), q(3)),
            ComplexQ::new(q(1), q(2)),
        ];
        let neg_rho: [ComplexQ; 3] =
            std::array::from_fn(|k| ComplexQ::new(-&rho[k].re, -&rho[k].im));
        let u1 = DivisorClass::from_ints(&[1, 0, -1]);
        let c1l = DivisorClass::from_ints(&[2, -1, 0]);
        let data = StabilityData::new(&l, beta.clone(), rho, u1.clone(), q(2)).unwrap();
        let flipped = StabilityData::new(&l, beta, neg_rho, u1, q(2)).unwrap();
        let z = z_problem(&l, &data, &c1l).unwrap();
        let zf = z_problem(&l, &flipped, &c1l).unwrap();
        assert_eq!(zf.eta, z.eta);
        assert_eq!(zf.sigma, z.sigma);
        assert_eq!(zf.sign_s, z.sign_s);
        assert_eq!(zf.tau, z.tau);
        assert_eq!(zf.v, z.v);
        if z.valid.v_positive {
            let a = certify(&l, &Problem::Z(z)).unwrap();
            let b = certify(&l, &Problem::Z(zf)).unwrap();
            assert_eq!(a.solvable, b.solvable);
        }
    }

    #[test]
    fn solvable_iff_delta_positive() {
        let l = bl2p2();
        let mut rng = crate::sample::rng(44);
        for _ in 0..100 {
            let theta = crate::sample::random_kahler(&l, &mut rng, 9);
            let omega = crate::sample::random_kahler(&l, &mut rng, 9);
            let p = j_problem(&l, &theta, &omega).unwrap();
            let cert = certify(&l, &Problem::J(p.clone())).unwrap();
            let opt = optimal_destabilizers(&l, &Problem::J(p)).unwrap();
            assert_eq!(cert.solvable, opt.delta.unwrap().is_positive());
        }
    }

    #[test]
    fn nef_threshold_worked_instance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[11, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let r = nef_threshold(&l, &theta, &omega).unwrap();
        assert!(r.exists);
        assert_eq!(r.u_star, Some(qr(9, 8)));
        assert_eq!(r.a, Some(DivisorClass::from_ints(&[2, -1, -1])));
        assert_eq!(r.t, Some(qr(1, 9)));
        assert_eq!(r.zero_curves, vec![2]); // T
        assert_eq!(r.bound, Some(ThresholdBound::Curve));
    }

    #[test]
    fn nef_threshold_second_instance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[4, -2, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let r = nef_threshold(&l, &theta, &omega).unwrap();
        assert_eq!(r.u_star, Some(q(2)));
        assert_eq!(r.a, Some(DivisorClass::from_ints(&[2, 0, -1])));
        assert_eq!(r.zero_curves, vec![0]); // E1
    }

    #[test]
    fn nef_threshold_of_proportional_classes_never_binds() {
        // The ray from θ through c·θ stays on the ray of θ; the square
        // form is tangent to the light cone at the vertex only, so no
        // positive threshold exists in either direction.
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[3, -1, -1]);
        for c in [q(2), qr(1, 2)] {
            let omega = theta.scale(&c);
            let r = nef_threshold(&l, &theta, &omega).unwrap();
            assert!(!r.exists, "proportional pair must not bind (c = {c})");
        }
    }

    #[test]
    fn nef_threshold_on_p1xp1_boundary() {
        let l = SurfaceLattice::builtin("p1xp1").unwrap();
        // Ray from (2,1) through (1,1): exits at (0,1), square root u = 2.
        let theta = DivisorClass::from_ints(&[2, 1]);
        let omega = DivisorClass::from_ints(&[1, 1]);
        let r = nef_threshold(&l, &theta, &omega).unwrap();
        assert!(r.exists);
        assert_eq!(r.u_star, Some(q(2)));
        assert_eq!(r.a, Some(DivisorClass::from_ints(&[0, 1])));
        assert_eq!(r.bound, Some(ThresholdBound::PositiveConeBoundary));
        // Ray that stays nef forever: direction of nonnegative square.
        let r2 = nef_threshold(
            &l,
            &DivisorClass::from_ints(&[1, 1]),
            &DivisorClass::from_ints(&[1, 2]),
        )
        .unwrap();
        assert!(!r2.exists);
    }

    #[test]
    fn optimal_destabilizers_worked_instance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[11, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let p = j_problem(&l, &theta, &omega).unwrap();
        let o = optimal_destabilizers(&l, &Problem::J(p)).unwrap();
        assert_eq!(o.delta, Some(qr(-1, 7)));
        assert_eq!(o.curves, vec![2]);
        assert_eq!(o.threshold_match, Some(true));
    }

    #[test]
    fn optimal_destabilizers_boundary_and_solvable() {
        let l = bl2p2();
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let boundary = j_problem(&l, &DivisorClass::from_ints(&[10, -1, -1]), &omega).unwrap();
        let o = optimal_destabilizers(&l, &Problem::J(boundary)).unwrap();
        assert_eq!(o.delta, Some(q(0)));
        assert_eq!(o.curves, vec![2]);

        let solvable = j_problem(&l, &omega, &omega).unwrap();
        let o2 = optimal_destabilizers(&l, &Problem::J(solvable)).unwrap();
        assert_eq!(o2.delta, Some(q(1)));
        assert!(o2.curves.is_empty());
    }

    #[test]
    fn flow_locus_worked_instance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[11, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let p = j_problem(&l, &theta, &omega).unwrap();
        let locus = flow_singular_locus(&l, &Problem::J(p)).unwrap();
        assert_eq!(locus.len(), 1);
        assert_eq!(locus[0].0, 2); // T
        assert_eq!(locus[0].1.value, qr(1, 7));

        let solvable = j_problem(&l, &omega, &omega).unwrap();
        assert!(matches!(
            flow_singular_locus(&l, &Problem::J(solvable)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn candidate_set_scaling_invariance() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[11, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let s = candidate_destabilizers(&l, &theta, &omega).unwrap();
        assert_eq!(s, vec![2]);
        for r in [q(2), qr(1, 3), qr(7, 5)] {
            let scaled = omega.scale(&r);
            assert_eq!(candidate_destabilizers(&l, &theta, &scaled).unwrap(), s);
        }
    }

    #[test]
    fn candidate_set_blowup_law() {
        let l = bl2p2();
        let theta = DivisorClass::from_ints(&[11, -1, -1]);
        let omega = DivisorClass::from_ints(&[3, -1, -1]);
        let s = candidate_destabilizers(&l, &theta, &omega).unwrap();
        let up = l.blowup_general_point();
        let s_up =
            candidate_destabilizers(&up, &theta.pullback(), &omega.pullback()).unwrap();
        let mut expected = s.clone();
        expected.push(up.curve_index("E3").unwrap());
        expected.sort_unstable();
        assert_eq!(s_up, expected);
    }
}
