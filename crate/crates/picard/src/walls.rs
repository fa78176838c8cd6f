//! Wall-and-chamber atlases over two-parameter families of stability data.
//!
//! A scan evaluates a finite set of line bundles against a family
//! `(a, b) ↦ Ω_{(a,b)}` of polynomial central charges on a rational grid.
//! Every cell status is decided by exact arithmetic through the pde
//! module, so sign changes along grid edges are certain; walls are
//! localized to half a cell by one bisection step with rational
//! midpoints. Floating point enters only in the SVG renderer.

use std::io::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::{DivisorClass, SurfaceLattice};
use crate::pde::{self, Problem, StabilityData};
use crate::rational::{fmt_rational, parse_rational, q, to_f64, ComplexQ, Q};
use crate::Result;
use num::{Signed, Zero};

/// How grid coordinates (a, b) map to stability data.
#[derive(Debug, Clone)]
pub enum Parametrization {
    /// The builtin Ω_s family on a fixed Kähler β: s = a + b·i,
    /// ρ_s = (1, -s, s²/2), U = 1. Solving the Z-critical equation for a
    /// bundle L is then a dHYM problem for c₁(L) - a·β with auxiliary
    /// class b·β; the slice is valid where β·(c₁(L) - a·β) > 0.
    OmegaS { beta: DivisorClass },
    /// Affine map into (ρ, U) with fixed Kähler β:
    /// ρ = ρ_base + a·ρ_a + b·ρ_b and likewise for U₁, U₂.
    CustomAffine {
        beta: DivisorClass,
        rho_base: [ComplexQ; 3],
        rho_a: [ComplexQ; 3],
        rho_b: [ComplexQ; 3],
        u1_base: DivisorClass,
        u1_a: DivisorClass,
        u1_b: DivisorClass,
        u2_base: Q,
        u2_a: Q,
        u2_b: Q,
    },
}

/// Rational rectangle `[a0, a1] × [b0, b1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub a0: Q,
    pub a1: Q,
    pub b0: Q,
    pub b1: Q,
}

impl Region {
    /// Parse `a0:a1,b0:b1` with exact rational or decimal bounds.
    pub fn parse(text: &str) -> Result<Region> {
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| Error::Spec(format!("region {text:?} needs two ranges")))?;
        let parse_range = |r: &str| -> Result<(Q, Q)> {
            let (lo, hi) = r
                .split_once(':')
                .ok_or_else(|| Error::Spec(format!("range {r:?} needs lo:hi")))?;
            Ok((parse_rational(lo)?, parse_rational(hi)?))
        };
        let (a0, a1) = parse_range(a)?;
        let (b0, b1) = parse_range(b)?;
        Ok(Region { a0, a1, b0, b1 })
    }
}

/// A two-parameter scan specification.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub surface: SurfaceLattice,
    /// `(label, c₁)` of each line bundle.
    pub bundles: Vec<(String, DivisorClass)>,
    pub parametrization: Parametrization,
    pub region: Region,
    /// Grid counts `(n_a, n_b)`; evaluation points are
    /// `a_i = a0 + i·(a1-a0)/n_a`, so doubling the resolution keeps
    /// every existing point.
    pub resolution: (usize, usize),
}

impl FamilySpec {
    /// The builtin Ω_s slice on bl2p2 against the bundles O(E1) and O(T).
    pub fn omega_s_bl2p2(region: Region, resolution: (usize, usize)) -> Result<FamilySpec> {
        let surface = SurfaceLattice::builtin("bl2p2")?;
        let beta = DivisorClass::from_ints(&[3, -1, -1]);
        let bundles = vec![
            ("E1".to_string(), DivisorClass::from_ints(&[0, 1, 0])),
            ("T".to_string(), DivisorClass::from_ints(&[1, -1, -1])),
        ];
        let spec = FamilySpec {
            surface,
            bundles,
            parametrization: Parametrization::OmegaS { beta },
            region,
            resolution,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bundles.is_empty() {
            return Err(Error::Spec("at least one bundle is required".into()));
        }
        if self.region.a0 >= self.region.a1 || self.region.b0 >= self.region.b1 {
            return Err(Error::Spec("region must be a nondegenerate rectangle".into()));
        }
        if self.resolution.0 < 2 || self.resolution.1 < 2 {
            return Err(Error::Spec("resolution must be at least 2x2".into()));
        }
        for (label, c1) in &self.bundles {
            if c1.dim() != self.surface.rank {
                return Err(Error::Spec(format!("bundle {label} has wrong dimension")));
            }
        }
        let beta = match &self.parametrization {
            Parametrization::OmegaS { beta } => beta,
            Parametrization::CustomAffine { beta, .. } => beta,
        };
        if !self.surface.is_kahler(beta)? {
            return Err(Error::Spec("family class β must be Kähler".into()));
        }
        Ok(())
    }

    /// Grid coordinate of column `i` (0-based).
    pub fn a_at(&self, i: usize) -> Q {
        &self.region.a0
            + (&self.region.a1 - &self.region.a0) * q(i as i64) / q(self.resolution.0 as i64)
    }

    /// Grid coordinate of row `j` (0-based).
    pub fn b_at(&self, j: usize) -> Q {
        &self.region.b0
            + (&self.region.b1 - &self.region.b0) * q(j as i64) / q(self.resolution.1 as i64)
    }

    fn stability_data_at(&self, a: &Q, b: &Q) -> Result<StabilityData> {
        match &self.parametrization {
            Parametrization::OmegaS { beta } => {
                let s = ComplexQ::new(a.clone(), b.clone());
                StabilityData::omega_s(&self.surface, beta.clone(), &s)
            }
            Parametrization::CustomAffine {
                beta,
                rho_base,
                rho_a,
                rho_b,
                u1_base,
                u1_a,
                u1_b,
                u2_base,
                u2_a,
                u2_b,
            } => {
                let rho: [ComplexQ; 3] = std::array::from_fn(|k| {
                    rho_base[k].add(&rho_a[k].scale(a)).add(&rho_b[k].scale(b))
                });
                let u1 = u1_base.add(&u1_a.scale(a)).add(&u1_b.scale(b));
                let u2 = u2_base + u2_a * a + u2_b * b;
                StabilityData::new(&self.surface, beta.clone(), rho, u1, u2)
            }
        }
    }

    /// Per-bundle status and exact curve pairings at a rational point.
    pub fn evaluate(&self, a: &Q, b: &Q, bundle: usize) -> BundleCell {
        let (_, c1l) = &self.bundles[bundle];
        if let Parametrization::OmegaS { beta } = &self.parametrization {
            // Slice validity: β·(c₁(L) - a·β) > 0.
            let v = self.surface.pair(beta, c1l).unwrap() - a * self.surface.square(beta).unwrap();
            if !v.is_positive() {
                return BundleCell::invalid("β·(c1L−aβ) ≤ 0");
            }
        }
        let data = match self.stability_data_at(a, b) {
            Ok(d) => d,
            Err(e) => return BundleCell::invalid(&short_reason(&e)),
        };
        let z = match pde::z_problem(&self.surface, &data, c1l) {
            Ok(z) => z,
            Err(e) => return BundleCell::invalid(&short_reason(&e)),
        };
        if !z.valid.v_positive || !z.valid.sign_defined {
            return BundleCell::invalid("V ≤ 0");
        }
        let cert = match pde::certify(&self.surface, &Problem::Z(z)) {
            Ok(c) => c,
            Err(e) => return BundleCell::invalid(&short_reason(&e)),
        };
        let pairings: Vec<Q> = cert.tested_curves.iter().map(|(_, p)| p.clone()).collect();
        let status = if cert.solvable {
            CellStatus::Solvable
        } else if cert.boundary {
            CellStatus::Boundary
        } else {
            CellStatus::Unsolvable
        };
        BundleCell { status, pairings: Some(pairings), min_pairing: cert.margin }
    }
}

fn short_reason(e: &Error) -> String {
    match e {
        Error::DegenerateCharge => "Im Z = 0".into(),
        Error::PhaseCollision => "c0 = 0".into(),
        Error::Precondition(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Per-bundle solvability status of one grid cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Solvable,
    Unsolvable,
    Boundary,
    Invalid(String),
}

impl CellStatus {
    pub fn as_string(&self) -> String {
        match self {
            CellStatus::Solvable => "solvable".into(),
            CellStatus::Unsolvable => "unsolvable".into(),
            CellStatus::Boundary => "boundary".into(),
            CellStatus::Invalid(r) => format!("invalid({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleCell {
    pub status: CellStatus,
    /// Exact pairing of τ with every declared curve; `None` when invalid.
    pub pairings: Option<Vec<Q>>,
    pub min_pairing: Option<Q>,
}

impl BundleCell {
    fn invalid(reason: &str) -> BundleCell {
        BundleCell {
            status: CellStatus::Invalid(reason.to_string()),
            pairings: None,
            min_pairing: None,
        }
    }
}

/// One grid cell: rational coordinates plus per-bundle data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub a: Q,
    pub b: Q,
    pub bundles: Vec<BundleCell>,
}

impl Cell {
    /// Status vector used for chamber identification.
    pub fn status_vector(&self) -> Vec<String> {
        self.bundles.iter().map(|b| b.status.as_string()).collect()
    }
}

/// Wall crossings of one (bundle, curve) pairing function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    pub bundle: usize,
    pub curve: usize,
    /// Rational points where the pairing changes sign along grid edges,
    /// localized by one bisection step.
    pub crossings: Vec<(Q, Q)>,
}

/// The scanned atlas.
#[derive(Debug, Clone)]
pub struct ChamberMap {
    pub surface: String,
    pub bundle_labels: Vec<String>,
    pub curve_labels: Vec<String>,
    pub region: Region,
    pub resolution: (usize, usize),
    /// Row-major: index = j·n_a + i.
    pub cells: Vec<Cell>,
    pub walls: Vec<Wall>,
    /// Chamber label per cell (4-connected components of constant status
    /// vectors).
    pub chamber_of_cell: Vec<usize>,
    pub chamber_count: usize,
    /// Distinct status vectors present, sorted.
    pub distinct_status_vectors: Vec<Vec<String>>,
    pub comparison_report: Option<ComparisonReport>,
}

/// Engine pairing values versus the classical closed-form wall expressions
/// quoted for this family. The engine's exact τ-pairings are the ground
/// truth; the quoted forms are recorded for comparison only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub description: String,
    pub samples: Vec<ComparisonSample>,
    pub w1_sign_agreements: usize,
    pub w2_sign_agreements: usize,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonSample {
    pub a: String,
    pub b: String,
    /// Engine minimum pairing per bundle.
    pub engine_min_pairing: Vec<Option<String>>,
    pub reference_w1: String,
    pub reference_w2: String,
    pub w1_sign_match: Option<bool>,
    pub w2_sign_match: Option<bool>,
}

/// Run the scan. `jobs = 0` uses the default thread pool; cells are
/// independent and collected by index, so the result is deterministic.
pub fn scan(spec: &FamilySpec, jobs: usize) -> Result<ChamberMap> {
    spec.validate()?;
    let (na, nb) = spec.resolution;
    let indices: Vec<(usize, usize)> =
        (0..nb).flat_map(|j| (0..na).map(move |i| (i, j))).collect();

    let eval_cell = |&(i, j): &(usize, usize)| -> Cell {
        let a = spec.a_at(i);
        let b = spec.b_at(j);
        let bundles = (0..spec.bundles.len()).map(|k| spec.evaluate(&a, &b, k)).collect();
        Cell { a, b, bundles }
    };

    let cells: Vec<Cell> = if jobs == 1 {
        indices.iter().map(eval_cell).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Spec(format!("thread pool: {e}")))?;
        pool.install(|| indices.par_iter().map(eval_cell).collect())
    };

    let walls = extract_walls(spec, &cells);
    let (chamber_of_cell, chamber_count) = label_chambers(&cells, na, nb);

    let mut distinct: Vec<Vec<String>> = Vec::new();
    for cell in &cells {
        let v = cell.status_vector();
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    distinct.sort();

    let comparison_report = comparison_report(spec, &cells);

    let map = ChamberMap {
        surface: spec.surface.name.clone(),
        bundle_labels: spec.bundles.iter().map(|(l, _)| l.clone()).collect(),
        curve_labels: spec
            .surface
            .negative_curves
            .iter()
            .map(|c| c.label.clone())
            .collect(),
        region: spec.region.clone(),
        resolution: spec.resolution,
        cells,
        walls,
        chamber_of_cell,
        chamber_count,
        distinct_status_vectors: distinct,
        comparison_report,
    };
    map.assert_chamber_constancy();
    Ok(map)
}

impl ChamberMap {
    /// Within one connected component every cell carries an identical
    /// per-bundle status vector.
    pub fn assert_chamber_constancy(&self) {
        let mut rep: Vec<Option<Vec<String>>> = vec![None; self.chamber_count];
        for (idx, cell) in self.cells.iter().enumerate() {
            let label = self.chamber_of_cell[idx];
            match &rep[label] {
                None => rep[label] = Some(cell.status_vector()),
                Some(v) => assert_eq!(
                    v,
                    &cell.status_vector(),
                    "chamber {label} is not status-constant"
                ),
            }
        }
    }
}

/// Exact pairing `τ(L, Ω_{(a,b)})·C`, the engine's own wall function.
pub fn wall_values(
    spec: &FamilySpec,
    bundle: usize,
    curve: usize,
    a: &Q,
    b: &Q,
) -> Result<Q> {
    if bundle >= spec.bundles.len() || curve >= spec.surface.negative_curves.len() {
        return Err(Error::Spec("bundle or curve index out of range".into()));
    }
    let cell = spec.evaluate(a, b, bundle);
    match cell.pairings {
        Some(p) => Ok(p[curve].clone()),
        None => Err(Error::Spec(format!(
            "point ({}, {}) is outside the valid region: {}",
            fmt_rational(a),
            fmt_rational(b),
            cell.status.as_string()
        ))),
    }
}

fn sign_of(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn extract_walls(spec: &FamilySpec, cells: &[Cell]) -> Vec<Wall> {
    let (na, nb) = spec.resolution;
    let pairing = |i: usize, j: usize, k: usize, c: usize| -> Option<Q> {
        cells[j * na + i].bundles[k].pairings.as_ref().map(|p| p[c].clone())
    };
    let mut walls = Vec::new();
    for k in 0..spec.bundles.len() {
        for c in 0..spec.surface.negative_curves.len() {
            let mut crossings: Vec<(Q, Q)> = Vec::new();
            let mut push = |pt: (Q, Q)| {
                if !crossings.contains(&pt) {
                    crossings.push(pt);
                }
            };
            for j in 0..nb {
                for i in 0..na {
                    let here = match pairing(i, j, k, c) {
                        Some(p) => p,
                        None => continue,
                    };
                    if sign_of(&here) == 0 {
                        push((spec.a_at(i), spec.b_at(j)));
                    }
                    // Horizontal and vertical edges out of (i, j).
                    let neighbors: [Option<((Q, Q), Q)>; 2] = [
                        (i + 1 < na)
                            .then(|| {
                                pairing(i + 1, j, k, c)
                                    .map(|p| ((spec.a_at(i + 1), spec.b_at(j)), p))
                            })
                            .flatten(),
                        (j + 1 < nb)
                            .then(|| {
                                pairing(i, j + 1, k, c)
                                    .map(|p| ((spec.a_at(i), spec.b_at(j + 1)), p))
                            })
                            .flatten(),
                    ];
                    for entry in neighbors.into_iter().flatten() {
                        let ((a2, b2), there) = entry;
                        if sign_of(&here) * sign_of(&there) == -1 {
                            let a1 = spec.a_at(i);
                            let b1 = spec.b_at(j);
                            let pt =
                                bisect_edge(spec, k, c, (&a1, &b1, &here), (&a2, &b2, &there));
                            push(pt);
                        }
                    }
                }
            }
            if !crossings.is_empty() {
                walls.push(Wall { bundle: k, curve: c, crossings });
            }
        }
    }
    walls
}

/// One bisection refinement step: evaluate the rational midpoint and
/// return the midpoint of the half-edge that still changes sign.
fn bisect_edge(
    spec: &FamilySpec,
    bundle: usize,
    curve: usize,
    p1: (&Q, &Q, &Q),
    p2: (&Q, &Q, &Q),
) -> (Q, Q) {
    let two = q(2);
    let ma = (p1.0 + p2.0) / &two;
    let mb = (p1.1 + p2.1) / &two;
    match wall_values(spec, bundle, curve, &ma, &mb) {
        Ok(vm) => {
            if vm.is_zero() {
                (ma, mb)
            } else if sign_of(&vm) == sign_of(p1.2) {
                ((&ma + p2.0) / &two, (&mb + p2.1) / &two)
            } else {
                ((p1.0 + &ma) / &two, (p1.1 + &mb) / &two)
            }
        }
        Err(_) => (ma, mb),
    }
}

/// 4-connected components of equal status vectors.
fn label_chambers(cells: &[Cell], na: usize, nb: usize) -> (Vec<usize>, usize) {
    let mut label = vec![usize::MAX; cells.len()];
    let mut next = 0usize;
    for start in 0..cells.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let vector = cells[start].status_vector();
        let mut queue = vec![start];
        label[start] = next;
        while let Some(idx) = queue.pop() {
            let (i, j) = (idx % na, idx / na);
            let mut neighbors = Vec::with_capacity(4);
            if i > 0 {
                neighbors.push(idx - 1);
            }
            if i + 1 < na {
                neighbors.push(idx + 1);
            }
            if j > 0 {
                neighbors.push(idx - na);
            }
            if j + 1 < nb {
                neighbors.push(idx + na);
            }
            for n in neighbors {
                if label[n] == usize::MAX && cells[n].status_vector() == vector {
                    label[n] = next;
                    queue.push(n);
                }
            }
        }
        next += 1;
    }
    (label, next)
}

/// Classical closed forms quoted for the bl2p2 Ω_s slice, recorded for
/// comparison; not derived by this engine.
fn reference_w1(a: &Q, b: &Q) -> Option<Q> {
    let den = q(1) - q(7) * a;
    if den.is_zero() {
        return None;
    }
    Some((q(7) * b * b + q(8) * a) / den)
}

fn reference_w2(a: &Q, b: &Q) -> Option<Q> {
    let den = q(5) - q(11) * a;
    if den.is_zero() {
        return None;
    }
    let ap1 = a + q(1);
    Some((q(7) * b * b + q(4) * &ap1 * &ap1 - q(8)) / den)
}

fn comparison_report(spec: &FamilySpec, cells: &[Cell]) -> Option<ComparisonReport> {
    if !matches!(spec.parametrization, Parametrization::OmegaS { .. })
        || spec.surface.name != "bl2p2"
    {
        return None;
    }
    let (na, nb) = spec.resolution;
    let step_i = (na / 8).max(1);
    let step_j = (nb / 8).max(1);
    let mut samples = Vec::new();
    let (mut w1_agree, mut w2_agree, mut count) = (0usize, 0usize, 0usize);
    for j in (0..nb).step_by(step_j) {
        for i in (0..na).step_by(step_i) {
            let cell = &cells[j * na + i];
            let engine: Vec<Option<String>> = cell
                .bundles
                .iter()
                .map(|bc| bc.min_pairing.as_ref().map(fmt_rational))
                .collect();
            let pw1 = reference_w1(&cell.a, &cell.b);
            let pw2 = reference_w2(&cell.a, &cell.b);
            let sign_match = |engine_min: &Option<Q>, quoted: &Option<Q>| -> Option<bool> {
                match (engine_min, quoted) {
                    (Some(e), Some(p)) => Some(sign_of(e) == sign_of(p)),
                    _ => None,
                }
            };
            let m1 = sign_match(&cell.bundles.first().and_then(|b| b.min_pairing.clone()), &pw1);
            let m2 =
                sign_match(&cell.bundles.get(1).and_then(|b| b.min_pairing.clone()), &pw2);
            if m1 == Some(true) {
                w1_agree += 1;
            }
            if m2 == Some(true) {
                w2_agree += 1;
            }
            count += 1;
            samples.push(ComparisonSample {
                a: fmt_rational(&cell.a),
                b: fmt_rational(&cell.b),
                engine_min_pairing: engine,
                reference_w1: pw1
                    .as_ref()
                    .map(fmt_rational)
                    .unwrap_or_else(|| "undefined".into()),
                reference_w2: pw2
                    .as_ref()
                    .map(fmt_rational)
                    .unwrap_or_else(|| "undefined".into()),
                w1_sign_match: m1,
                w2_sign_match: m2,
            });
        }
    }
    Some(ComparisonReport {
        description: "engine exact τ-pairings versus the quoted closed forms \
                      W1 = (7b²+8a)/(1−7a) and W2 = (7b²+4(a+1)²−8)/(5−11a); \
                      the engine values are authoritative"
            .into(),
        samples,
        w1_sign_agreements: w1_agree,
        w2_sign_agreements: w2_agree,
        sample_count: count,
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChamberMapDoc {
    pub schema: String,
    pub surface: String,
    pub bundle_labels: Vec<String>,
    pub curve_labels: Vec<String>,
    pub region: [String; 4],
    pub resolution: [usize; 2],
    pub cells: Vec<CellDoc>,
    pub walls: Vec<WallDoc>,
    pub chamber_of_cell: Vec<usize>,
    pub chamber_count: usize,
    pub distinct_status_vectors: Vec<Vec<String>>,
    pub comparison_report: Option<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDoc {
    pub a: String,
    pub b: String,
    pub status: Vec<String>,
    pub min_pairing: Vec<Option<String>>,
    pub pairings: Vec<Option<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallDoc {
    pub bundle: String,
    pub curve: String,
    pub crossings: Vec<[String; 2]>,
}

impl ChamberMap {
    pub fn to_doc(&self) -> ChamberMapDoc {
        ChamberMapDoc {
            schema: "chambermap/1".into(),
            surface: self.surface.clone(),
            bundle_labels: self.bundle_labels.clone(),
            curve_labels: self.curve_labels.clone(),
            region: [
                fmt_rational(&self.region.a0),
                fmt_rational(&self.region.a1),
                fmt_rational(&self.region.b0),
                fmt_rational(&self.region.b1),
            ],
            resolution: [self.resolution.0, self.resolution.1],
            cells: self
                .cells
                .iter()
                .map(|c| CellDoc {
                    a: fmt_rational(&c.a),
                    b: fmt_rational(&c.b),
                    status: c.status_vector(),
                    min_pairing: c
                        .bundles
                        .iter()
                        .map(|b| b.min_pairing.as_ref().map(fmt_rational))
                        .collect(),
                    pairings: c
                        .bundles
                        .iter()
                        .map(|b| {
                            b.pairings
                                .as_ref()
                                .map(|ps| ps.iter().map(fmt_rational).collect())
                        })
                        .collect(),
                })
                .collect(),
            walls: self
                .walls
                .iter()
                .map(|w| WallDoc {
                    bundle: self.bundle_labels[w.bundle].clone(),
                    curve: self.curve_labels[w.curve].clone(),
                    crossings: w
                        .crossings
                        .iter()
                        .map(|(a, b)| [fmt_rational(a), fmt_rational(b)])
                        .collect(),
                })
                .collect(),
            chamber_of_cell: self.chamber_of_cell.clone(),
            chamber_count: self.chamber_count,
            distinct_status_vectors: self.distinct_status_vectors.clone(),
            comparison_report: self.comparison_report.clone(),
        }
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let doc = self.to_doc();
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &doc)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    /// CSV: one row per (cell, bundle), columns a, b, bundle, status,
    /// min_pairing, all as exact rational strings.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::from("a,b,bundle,status,min_pairing\n");
        for cell in &self.cells {
            for (k, bc) in cell.bundles.iter().enumerate() {
                let min = bc.min_pairing.as_ref().map(fmt_rational).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_rational(&cell.a),
                    fmt_rational(&cell.b),
                    self.bundle_labels[k],
                    bc.status.as_string(),
                    min
                ));
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Wall polyline segments of one (bundle, curve) family by marching
    /// squares over the sign grid, with linear interpolation along grid
    /// edges. Display-quality floats; the exact crossings live in
    /// [`Wall::crossings`].
    fn wall_segments(&self, wall: &Wall) -> Vec<((f64, f64), (f64, f64))> {
        let (na, nb) = self.resolution;
        let value = |i: usize, j: usize| -> Option<f64> {
            self.cells[j * na + i].bundles[wall.bundle]
                .pairings
                .as_ref()
                .map(|p| to_f64(&p[wall.curve]))
        };
        let coord = |i: usize, j: usize| -> (f64, f64) {
            let c = &self.cells[j * na + i];
            (to_f64(&c.a), to_f64(&c.b))
        };
        let lerp = |p: (f64, f64), q: (f64, f64), z1: f64, z2: f64| -> (f64, f64) {
            let t = if (z1 - z2).abs() < f64::MIN_POSITIVE {
                0.5
            } else {
                z1 / (z1 - z2)
            };
            (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
        };
        let neg = |z: f64| z < 0.0;
        let mut segments = Vec::new();
        for j in 0..nb - 1 {
            for i in 0..na - 1 {
                let (Some(z00), Some(z10), Some(z01), Some(z11)) = (
                    value(i, j),
                    value(i + 1, j),
                    value(i, j + 1),
                    value(i + 1, j + 1),
                ) else {
                    continue;
                };
                let p00 = coord(i, j);
                let p10 = coord(i + 1, j);
                let p01 = coord(i, j + 1);
                let p11 = coord(i + 1, j + 1);
                let mut crossings = Vec::with_capacity(4);
                if neg(z00) != neg(z10) {
                    crossings.push(lerp(p00, p10, z00, z10));
                }
                if neg(z10) != neg(z11) {
                    crossings.push(lerp(p10, p11, z10, z11));
                }
                if neg(z01) != neg(z11) {
                    crossings.push(lerp(p01, p11, z01, z11));
                }
                if neg(z00) != neg(z01) {
                    crossings.push(lerp(p00, p01, z00, z01));
                }
                match crossings.len() {
                    2 => segments.push((crossings[0], crossings[1])),
                    4 => {
                        // Saddle square: resolve into two disjoint arcs.
                        segments.push((crossings[0], crossings[1]));
                        segments.push((crossings[2], crossings[3]));
                    }
                    _ => {}
                }
            }
        }
        segments
    }

    /// SVG raster: one rect per cell colored by status vector, wall
    /// polylines, a legend, and axes (labeled Re s / Im s for the Ω_s
    /// slice). The only floating point in the crate.
    pub fn write_svg(&self, path: &std::path::Path) -> Result<()> {
        const W: f64 = 840.0;
        const H: f64 = 680.0;
        const ML: f64 = 70.0;
        const MR: f64 = 210.0;
        const MT: f64 = 30.0;
        const MB: f64 = 60.0;
        let plot_w = W - ML - MR;
        let plot_h = H - MT - MB;
        let (a0, a1) = (to_f64(&self.region.a0), to_f64(&self.region.a1));
        let (b0, b1) = (to_f64(&self.region.b0), to_f64(&self.region.b1));
        let sx = |a: f64| ML + (a - a0) / (a1 - a0) * plot_w;
        let sy = |b: f64| MT + (b1 - b) / (b1 - b0) * plot_h;
        let (na, nb) = self.resolution;
        let cell_w = plot_w / na as f64;
        let cell_h = plot_h / nb as f64;

        let palette = [
            "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2", "#eeca3b",
            "#9d755d", "#bab0ac", "#1f77b4", "#aec7e8", "#98df8a",
        ];
        let color_of = |v: &Vec<String>| -> &str {
            let idx = self
                .distinct_status_vectors
                .iter()
                .position(|u| u == v)
                .unwrap_or(0);
            palette[idx % palette.len()]
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
             viewBox=\"0 0 {W} {H}\">\n"
        ));
        svg.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
        ));
        for (idx, cell) in self.cells.iter().enumerate() {
            let i = idx % na;
            let j = idx / na;
            let x = ML + i as f64 * cell_w;
            let y = MT + (nb - 1 - j) as f64 * cell_h;
            svg.push_str(&format!(
                "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{cell_w:.3}\" height=\"{cell_h:.3}\" \
                 fill=\"{}\"/>\n",
                color_of(&cell.status_vector())
            ));
        }
        // Wall polylines by marching squares over each (bundle, curve)
        // sign grid; interpolation is float-only display work.
        let wall_colors = ["#000000", "#5c2d91", "#8b0000", "#004b23", "#4a2c02"];
        for (widx, wall) in self.walls.iter().enumerate() {
            let color = wall_colors[widx % wall_colors.len()];
            for ((xa, ya), (xb, yb)) in self.wall_segments(wall) {
                svg.push_str(&format!(
                    "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" \
                     stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                    sx(xa),
                    sy(ya),
                    sx(xb),
                    sy(yb)
                ));
            }
        }
        // Axes.
        let (xlabel, ylabel) =
            if self.surface == "bl2p2" { ("Re(s)", "Im(s)") } else { ("a", "b") };
        svg.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            MT + plot_h,
            ML + plot_w,
            MT + plot_h
        ));
        svg.push_str(&format!(
            "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            MT + plot_h
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\">{xlabel}</text>\n",
            ML + plot_w / 2.0,
            H - 20.0
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{:.1}\" font-size=\"14\" transform=\"rotate(-90 16 {:.1})\">{ylabel}</text>\n",
            MT + plot_h / 2.0,
            MT + plot_h / 2.0
        ));
        for (afrac, text) in [(0.0, a0), (0.5, (a0 + a1) / 2.0), (1.0, a1)] {
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{text:.3}</text>\n",
                ML + afrac * plot_w,
                MT + plot_h + 18.0
            ));
        }
        for (bfrac, text) in [(0.0, b0), (0.5, (b0 + b1) / 2.0), (1.0, b1)] {
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{text:.3}</text>\n",
                ML - 6.0,
                MT + plot_h - bfrac * plot_h + 4.0
            ));
        }
        // Legend of status vectors.
        let legend_x = ML + plot_w + 16.0;
        let mut legend_y = MT + 10.0;
        svg.push_str(&format!(
            "<text x=\"{legend_x:.1}\" y=\"{legend_y:.1}\" font-size=\"12\" font-weight=\"bold\">({}) status</text>\n",
            self.bundle_labels.join(", ")
        ));
        for v in &self.distinct_status_vectors {
            legend_y += 18.0;
            svg.push_str(&format!(
                "<rect x=\"{legend_x:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
                legend_y - 10.0,
                color_of(v)
            ));
            let label: String = v
                .iter()
                .map(|s| s.split('(').next().unwrap_or(s).to_string())
                .collect::<Vec<_>>()
                .join(" / ");
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{legend_y:.1}\" font-size=\"11\">{label}</text>\n",
                legend_x + 18.0
            ));
        }
        svg.push_str("</svg>\n");
        std::fs::write(path, svg)?;
        Ok(())
    }
}

/// Export in the requested format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

pub fn export(map: &ChamberMap, format: ExportFormat, path: &std::path::Path) -> Result<()> {
    if map.cells.is_empty() {
        return Err(Error::Spec("cannot export an empty chamber map".into()));
    }
    match format {
        ExportFormat::Csv => map.write_csv(path),
        ExportFormat::Json => map.write_json(path),
        ExportFormat::Svg => map.write_svg(path),
    }
}
