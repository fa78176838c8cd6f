//! Intersection lattices of compact Kähler surfaces.
//!
//! A surface is represented by its Néron-Severi data: a symmetric pairing
//! with one positive eigenvalue, a declared list of negative curves, and a
//! reference ample class. The curve list is a trust boundary: it must
//! contain every irreducible curve of negative self-intersection, and all
//! Kähler-type tests are conditional on that contract.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg;
use crate::rational::{fmt_rational, parse_rational, q, Q};
use crate::Result;

/// Exact rational coordinate vector in the generator basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorClass(#[serde(with = "crate::rational::qstr_vec")] pub Vec<Q>);

impl DivisorClass {
    pub fn zero(rank: usize) -> Self {
        DivisorClass(vec![Q::zero(); rank])
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        DivisorClass(coords.iter().map(|&c| q(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &DivisorClass) -> DivisorClass {
        DivisorClass(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Q) -> DivisorClass {
        DivisorClass(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> DivisorClass {
        DivisorClass(self.0.iter().map(|a| -a).collect())
    }

    /// Pullback under a single general-point blowup: pad with one zero.
    pub fn pullback(&self) -> DivisorClass {
        let mut coords = self.0.clone();
        coords.push(Q::zero());
        DivisorClass(coords)
    }

    /// Parse a comma-separated list of rational literals.
    pub fn parse(input: &str) -> Result<Self> {
        let coords = input
            .split(',')
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::Parse("empty class literal".into()));
        }
        Ok(DivisorClass(coords))
    }
}

impl std::fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(fmt_rational).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A declared irreducible curve of negative self-intersection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub class: DivisorClass,
}

/// Whether the stored reference class is genuinely ample or merely a nef
/// reference (pullbacks after a blowup, exceptional sublattices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmpleStatus {
    /// Strictly positive against every declared curve, positive square.
    Ample,
    /// Nonnegative reference in the closure of the positive cone; the
    /// "ample pending" state after a blowup, or the nef class of an
    /// exceptional sublattice.
    Reference,
}

/// Three-valued pseudoeffectivity verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsefVerdict {
    Yes,
    No,
    Undecided,
}

/// Result of the finitely-many-inequalities positivity classification.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    #[serde(with = "crate::rational::qstr")]
    pub square: Q,
    #[serde(with = "crate::rational::qstr")]
    pub ample_pairing: Q,
    pub in_p_plus: bool,
    pub nef: bool,
    pub kahler: bool,
    pub big: bool,
    pub pseudoeffective_verdict: PsefVerdict,
    /// Curves with pairing ≤ 0 (the Kähler-failing set), with exact values.
    pub failing_curves: Vec<(String, String)>,
    /// All curve pairings, exact.
    pub curve_pairings: Vec<(String, String)>,
}

/// A rank-ρ Lorentzian intersection lattice with declared negative curves
/// and a reference class.
#[derive(Debug, Clone)]
pub struct SurfaceLattice {
    pub name: String,
    pub rank: usize,
    pub generators: Vec<String>,
    gram: Vec<Vec<Q>>,
    pub negative_curves: Vec<Curve>,
    pub ample: DivisorClass,
    pub ample_status: AmpleStatus,
    pub projective: bool,
    /// True when the pairing has signature (1, ρ−1). False only for
    /// negative-(semi)definite exceptional sublattices such as the
    /// Fermat-quartic four-line builtin.
    pub lorentzian: bool,
    signature: (usize, usize, usize),
}

/// On-disk surface description document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceDoc {
    pub name: String,
    pub rank: usize,
    pub generators: Vec<String>,
    /// Row-major rational strings, flat or nested by row.
    pub gram: GramDoc,
    pub negative_curves: Vec<Vec<String>>,
    #[serde(default)]
    pub curve_labels: Option<Vec<String>>,
    pub ample: Vec<String>,
    pub projective: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GramDoc {
    Rows(Vec<Vec<String>>),
    Flat(Vec<String>),
}

impl SurfaceLattice {
    /// Validate and construct a lattice. Checks the signature, every curve
    /// invariant and the reference class.
    pub fn new(
        name: impl Into<String>,
        generators: Vec<String>,
        gram: Vec<Vec<Q>>,
        negative_curves: Vec<Curve>,
        ample: DivisorClass,
        ample_status: AmpleStatus,
        projective: bool,
    ) -> Result<Self> {
        let rank = generators.len();
        if rank == 0 {
            return Err(Error::Parse("rank must be positive".into()));
        }
        if gram.len() != rank || gram.iter().any(|r| r.len() != rank) {
            return Err(Error::dimension(rank, gram.len()));
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Signature(format!(
                        "gram is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let signature = linalg::inertia(&gram);
        let lorentzian = match signature {
            (1, m, 0) if m + 1 == rank => true,
            (0, _, _) => false, // exceptional sublattice mode
            (p, m, z) => {
                return Err(Error::Signature(format!(
                    "gram has signature (+{p}, -{m}, 0^{z}); need exactly one positive eigenvalue"
                )))
            }
        };

        let lattice = SurfaceLattice {
            name: name.into(),
            rank,
            generators,
            gram,
            negative_curves,
            ample,
            ample_status: if lorentzian { ample_status } else { AmpleStatus::Reference },
            projective,
            lorentzian,
            signature,
        };

        if lattice.ample.dim() != rank {
            return Err(Error::dimension(rank, lattice.ample.dim()));
        }
        for (i, c) in lattice.negative_curves.iter().enumerate() {
            if c.class.dim() != rank {
                return Err(Error::dimension(rank, c.class.dim()));
            }
            let sq = lattice.pair_unchecked(&c.class, &c.class);
            if !sq.is_negative() {
                return Err(Error::Curve(format!(
                    "curve {} has self-intersection {} >= 0",
                    c.label,
                    fmt_rational(&sq)
                )));
            }
            for other in lattice.negative_curves.iter().skip(i + 1) {
                if other.class == c.class {
                    return Err(Error::Curve(format!(
                        "curves {} and {} share a class",
                        c.label, other.label
                    )));
                }
                let p = lattice.pair_unchecked(&c.class, &other.class);
                if p.is_negative() {
                    return Err(Error::Curve(format!(
                        "distinct irreducible curves {} and {} pair negatively ({})",
                        c.label,
                        other.label,
                        fmt_rational(&p)
                    )));
                }
            }
        }
        let asq = lattice.pair_unchecked(&lattice.ample, &lattice.ample);
        match lattice.ample_status {
            AmpleStatus::Ample => {
                if !asq.is_positive() {
                    return Err(Error::Curve(format!(
                        "ample class has square {} <= 0",
                        fmt_rational(&asq)
                    )));
                }
                for c in &lattice.negative_curves {
                    let p = lattice.pair_unchecked(&lattice.ample, &c.class);
                    if !p.is_positive() {
                        return Err(Error::Curve(format!(
                            "ample pairs {} <= 0 with curve {}",
                            fmt_rational(&p),
                            c.label
                        )));
                    }
                }
            }
            AmpleStatus::Reference => {
                if asq.is_negative() {
                    return Err(Error::Curve(format!(
                        "reference class has square {} < 0",
                        fmt_rational(&asq)
                    )));
                }
                for c in &lattice.negative_curves {
                    let p = lattice.pair_unchecked(&lattice.ample, &c.class);
                    if p.is_negative() {
                        return Err(Error::Curve(format!(
                            "reference class pairs {} < 0 with curve {}",
                            fmt_rational(&p),
                            c.label
                        )));
                    }
                }
            }
        }
        Ok(lattice)
    }

    /// Builtin catalog: `p2`, `p1xp1`, `bl2p2`, `fermat_quartic_4lines`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "p2" => SurfaceLattice::new(
                "p2",
                vec!["H".into()],
                vec![vec![q(1)]],
                vec![],
                DivisorClass::from_ints(&[1]),
                AmpleStatus::Ample,
                true,
            ),
            "p1xp1" => SurfaceLattice::new(
                "p1xp1",
                vec!["F1".into(), "F2".into()],
                vec![vec![q(0), q(1)], vec![q(1), q(0)]],
                vec![],
                DivisorClass::from_ints(&[1, 1]),
                AmpleStatus::Ample,
                true,
            ),
            "bl2p2" => {
                let gram = vec![
                    vec![q(1), q(0), q(0)],
                    vec![q(0), q(-1), q(0)],
                    vec![q(0), q(0), q(-1)],
                ];
                let curves = vec![
                    Curve { label: "E1".into(), class: DivisorClass::from_ints(&[0, 1, 0]) },
                    Curve { label: "E2".into(), class: DivisorClass::from_ints(&[0, 0, 1]) },
                    Curve { label: "T".into(), class: DivisorClass::from_ints(&[1, -1, -1]) },
                ];
                SurfaceLattice::new(
                    "bl2p2",
                    vec!["H".into(), "E1".into(), "E2".into()],
                    gram,
                    curves,
                    DivisorClass::from_ints(&[3, -1, -1]),
                    AmpleStatus::Ample,
                    true,
                )
            }
            "fermat_quartic_4lines" => {
                // Rank-4 sublattice spanned by the lines l(j,j), l(j,k),
                // l(k,k), l(k,j) on the Fermat quartic: diagonal -2,
                // cyclic neighbors 1, opposite pairs 0. Negative
                // semidefinite with kernel spanned by the nef class
                // P = sum of the four lines, which serves as the
                // reference class.
                let gram = vec![
                    vec![q(-2), q(1), q(0), q(1)],
                    vec![q(1), q(-2), q(1), q(0)],
                    vec![q(0), q(1), q(-2), q(1)],
                    vec![q(1), q(0), q(1), q(-2)],
                ];
                let labels = ["l_jj", "l_jk", "l_kk", "l_kj"];
                let curves = (0..4)
                    .map(|i| {
                        let mut coords = vec![Q::zero(); 4];
                        coords[i] = q(1);
                        Curve { label: labels[i].into(), class: DivisorClass(coords) }
                    })
                    .collect();
                SurfaceLattice::new(
                    "fermat_quartic_4lines",
                    labels.iter().map(|s| s.to_string()).collect(),
                    gram,
                    curves,
                    DivisorClass::from_ints(&[1, 1, 1, 1]),
                    AmpleStatus::Reference,
                    false,
                )
            }
            other => Err(Error::Parse(format!("unknown builtin surface {other:?}"))),
        }
    }

    /// Load from a JSON surface description document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SurfaceDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("surface doc: {e}")))?;
        Self::from_doc(&doc)
    }

    pub fn from_doc(doc: &SurfaceDoc) -> Result<Self> {
        let rank = doc.rank;
        if doc.generators.len() != rank {
            return Err(Error::dimension(rank, doc.generators.len()));
        }
        let rows: Vec<Vec<String>> = match &doc.gram {
            GramDoc::Rows(rows) => rows.clone(),
            GramDoc::Flat(flat) => {
                if flat.len() != rank * rank {
                    return Err(Error::dimension(rank * rank, flat.len()));
                }
                flat.chunks(rank).map(|c| c.to_vec()).collect()
            }
        };
        let gram = rows
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let curves = doc
            .negative_curves
            .iter()
            .enumerate()
            .map(|(i, coords)| {
                let class = coords
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>>>()?;
                let label = doc
                    .curve_labels
                    .as_ref()
                    .and_then(|ls| ls.get(i).cloned())
                    .unwrap_or_else(|| format!("C{}", i + 1));
                Ok(Curve { label, class: DivisorClass(class) })
            })
            .collect::<Result<Vec<_>>>()?;
        let ample = DivisorClass(
            doc.ample.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?,
        );
        SurfaceLattice::new(
            doc.name.clone(),
            doc.generators.clone(),
            gram,
            curves,
            ample,
            AmpleStatus::Ample,
            doc.projective,
        )
    }

    /// Resolve a builtin name or a path to a JSON document.
    pub fn load(spec: &str) -> Result<Self> {
        if let Ok(l) = Self::builtin(spec) {
            return Ok(l);
        }
        let text = std::fs::read_to_string(spec).map_err(|e| {
            Error::Parse(format!("{spec:?} is neither a builtin surface nor a readable file: {e}"))
        })?;
        Self::from_json(&text)
    }

    pub fn gram(&self) -> &[Vec<Q>] {
        &self.gram
    }

    /// Signature of the pairing as `(n_plus, n_minus, n_zero)`.
    pub fn signature(&self) -> (usize, usize, usize) {
        self.signature
    }

    fn pair_unchecked(&self, a: &DivisorClass, b: &DivisorClass) -> Q {
        let mut acc = Q::zero();
        for (i, ai) in a.0.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.0.iter().enumerate() {
                if bj.is_zero() || self.gram[i][j].is_zero() {
                    continue;
                }
                acc += ai * bj * &self.gram[i][j];
            }
        }
        acc
    }

    /// Exact intersection pairing `aᵀ·gram·b`.
    pub fn pair(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Q> {
        if a.dim() != self.rank {
            return Err(Error::dimension(self.rank, a.dim()));
        }
        if b.dim() != self.rank {
            return Err(Error::dimension(self.rank, b.dim()));
        }
        Ok(self.pair_unchecked(a, b))
    }

    /// Self-intersection.
    pub fn square(&self, a: &DivisorClass) -> Result<Q> {
        self.pair(a, a)
    }

    /// Pairing with every declared negative curve.
    pub fn curve_pairings(&self, a: &DivisorClass) -> Result<Vec<Q>> {
        self.negative_curves
            .iter()
            .map(|c| self.pair(a, &c.class))
            .collect()
    }

    /// Gram submatrix of a set of curve indices.
    pub fn curve_gram(&self, support: &[usize]) -> Vec<Vec<Q>> {
        support
            .iter()
            .map(|&i| {
                support
                    .iter()
                    .map(|&j| {
                        self.pair_unchecked(
                            &self.negative_curves[i].class,
                            &self.negative_curves[j].class,
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Positivity classification by the finitely many inequalities of the
    /// Lamari criterion, conditional on the completeness contract.
    pub fn classify(&self, tau: &DivisorClass) -> Result<PositivityReport> {
        let square = self.square(tau)?;
        let ample_pairing = self.pair(tau, &self.ample)?;
        let pairings = self.curve_pairings(tau)?;

        let in_p_plus = square.is_positive() && ample_pairing.is_positive();
        let nef = !square.is_negative()
            && !ample_pairing.is_negative()
            && pairings.iter().all(|p| !p.is_negative());
        let kahler = in_p_plus && pairings.iter().all(|p| p.is_positive());

        let pseudoeffective_verdict = if ample_pairing.is_negative() {
            PsefVerdict::No
        } else {
            match crate::zariski::decompose(self, tau) {
                Ok(_) => PsefVerdict::Yes,
                Err(Error::NotPseudoeffective(f)) if f.certified => PsefVerdict::No,
                Err(_) => PsefVerdict::Undecided,
            }
        };
        let big = in_p_plus
            || (pseudoeffective_verdict == PsefVerdict::Yes
                && crate::zariski::decompose(self, tau)
                    .map(|d| {
                        self.pair_unchecked(&d.zpart, &d.zpart).is_positive()
                    })
                    .unwrap_or(false));

        let failing_curves = self
            .negative_curves
            .iter()
            .zip(&pairings)
            .filter(|(_, p)| !p.is_positive())
            .map(|(c, p)| (c.label.clone(), fmt_rational(p)))
            .collect();
        let curve_pairings = self
            .negative_curves
            .iter()
            .zip(&pairings)
            .map(|(c, p)| (c.label.clone(), fmt_rational(p)))
            .collect();

        Ok(PositivityReport {
            square,
            ample_pairing,
            in_p_plus,
            nef,
            kahler,
            big,
            pseudoeffective_verdict,
            failing_curves,
            curve_pairings,
        })
    }

    /// Convenience wrappers over [`classify`](Self::classify)-level tests,
    /// avoiding the pseudoeffectivity machinery.
    pub fn is_kahler(&self, tau: &DivisorClass) -> Result<bool> {
        let square = self.square(tau)?;
        let ample_pairing = self.pair(tau, &self.ample)?;
        if !square.is_positive() || !ample_pairing.is_positive() {
            return Ok(false);
        }
        Ok(self.curve_pairings(tau)?.iter().all(|p| p.is_positive()))
    }

    pub fn is_nef(&self, tau: &DivisorClass) -> Result<bool> {
        let square = self.square(tau)?;
        let ample_pairing = self.pair(tau, &self.ample)?;
        if square.is_negative() || ample_pairing.is_negative() {
            return Ok(false);
        }
        Ok(self.curve_pairings(tau)?.iter().all(|p| !p.is_negative()))
    }

    pub fn in_p_plus(&self, tau: &DivisorClass) -> Result<bool> {
        Ok(self.square(tau)?.is_positive() && self.pair(tau, &self.ample)?.is_positive())
    }

    /// Blow up a general point: new exceptional generator `E` with
    /// `E·E = -1`, orthogonal to every pullback; the old curves pull back
    /// unchanged (a general point lies on none of them) and `E` joins the
    /// curve list. The reference class is the pullback of the old one and
    /// is only nef, so the result is flagged "ample pending"
    /// ([`AmpleStatus::Reference`]); supply a genuine Kähler class with
    /// [`with_ample`](Self::with_ample) when needed.
    pub fn blowup_general_point(&self) -> SurfaceLattice {
        let rank = self.rank + 1;
        let mut gram: Vec<Vec<Q>> = self
            .gram
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.push(Q::zero());
                r
            })
            .collect();
        let mut last = vec![Q::zero(); rank];
        last[rank - 1] = q(-1);
        gram.push(last);

        let taken: Vec<&str> = self
            .generators
            .iter()
            .map(|s| s.as_str())
            .chain(self.negative_curves.iter().map(|c| c.label.as_str()))
            .collect();
        let label = (1..)
            .map(|i| format!("E{i}"))
            .find(|cand| !taken.contains(&cand.as_str()))
            .unwrap();

        let mut curves: Vec<Curve> = self
            .negative_curves
            .iter()
            .map(|c| Curve { label: c.label.clone(), class: c.class.pullback() })
            .collect();
        let mut e = vec![Q::zero(); rank];
        e[rank - 1] = q(1);
        curves.push(Curve { label: label.clone(), class: DivisorClass(e) });

        let mut generators = self.generators.clone();
        generators.push(label);

        SurfaceLattice::new(
            format!("{}_bl", self.name),
            generators,
            gram,
            curves,
            self.ample.pullback(),
            AmpleStatus::Reference,
            self.projective,
        )
        .expect("blowup of a valid lattice is valid")
    }

    /// Replace the reference class by a supplied ample class and
    /// revalidate the strict ample invariants.
    pub fn with_ample(&self, ample: DivisorClass) -> Result<SurfaceLattice> {
        SurfaceLattice::new(
            self.name.clone(),
            self.generators.clone(),
            self.gram.clone(),
            self.negative_curves.clone(),
            ample,
            AmpleStatus::Ample,
            self.projective,
        )
    }

    /// Export as a surface description document.
    pub fn to_doc(&self) -> SurfaceDoc {
        SurfaceDoc {
            name: self.name.clone(),
            rank: self.rank,
            generators: self.generators.clone(),
            gram: GramDoc::Rows(
                self.gram
                    .iter()
                    .map(|row| row.iter().map(fmt_rational).collect())
                    .collect(),
            ),
            negative_curves: self
                .negative_curves
                .iter()
                .map(|c| c.class.0.iter().map(fmt_rational).collect())
                .collect(),
            curve_labels: Some(self.negative_curves.iter().map(|c| c.label.clone()).collect()),
            ample: self.ample.0.iter().map(fmt_rational).collect(),
            projective: self.projective,
        }
    }

    pub fn curve_label(&self, index: usize) -> &str {
        &self.negative_curves[index].label
    }

    pub fn curve_index(&self, label: &str) -> Option<usize> {
        self.negative_curves.iter().position(|c| c.label == label)
    }

    /// Resolve a class literal: a generator name, a curve label, or a
    /// comma-separated coordinate vector.
    pub fn resolve_class(&self, text: &str) -> Result<DivisorClass> {
        if let Some(i) = self.generators.iter().position(|g| g == text) {
            let mut coords = vec![Q::zero(); self.rank];
            coords[i] = q(1);
            return Ok(DivisorClass(coords));
        }
        if let Some(i) = self.curve_index(text) {
            return Ok(self.negative_curves[i].class.clone());
        }
        let class = DivisorClass::parse(text)?;
        if class.dim() != self.rank {
            return Err(Error::dimension(self.rank, class.dim()));
        }
        Ok(class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qr;
    use proptest::prelude::*;

    #[test]
    fn builtin_bl2p2_matches_catalog() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        assert_eq!(l.rank, 3);
        assert_eq!(l.generators, vec!["H", "E1", "E2"]);
        assert_eq!(l.negative_curves.len(), 3);
        assert!(l.lorentzian);
        let h = DivisorClass::from_ints(&[1, 0, 0]);
        assert_eq!(l.pair(&h, &h).unwrap(), q(1));
        let ample = DivisorClass::from_ints(&[3, -1, -1]);
        assert_eq!(l.pair(&ample, &ample).unwrap(), q(7));
        let t = DivisorClass::from_ints(&[1, -1, -1]);
        assert_eq!(l.pair(&ample, &t).unwrap(), q(1));
    }

    #[test]
    fn builtin_fermat_gram_is_the_cyclic_matrix() {
        let l = SurfaceLattice::builtin("fermat_quartic_4lines").unwrap();
        assert_eq!(l.rank, 4);
        assert!(!l.lorentzian);
        assert_eq!(l.signature(), (0, 3, 1));
        // The tridiagonal matrix of any three consecutive lines is the leading minor.
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i as i64 - j as i64).abs() {
                    0 => q(-2),
                    1 => q(1),
                    _ => q(0),
                };
                assert_eq!(l.gram()[i][j], expected);
            }
        }
        // P = sum of the four lines pairs to zero with every line.
        let p = DivisorClass::from_ints(&[1, 1, 1, 1]);
        for c in &l.negative_curves {
            assert_eq!(l.pair(&p, &c.class).unwrap(), q(0));
        }
        assert_eq!(l.square(&p).unwrap(), q(0));
    }

    #[test]
    fn positive_definite_gram_is_rejected() {
        let err = SurfaceLattice::new(
            "bad",
            vec!["A".into(), "B".into()],
            vec![vec![q(1), q(0)], vec![q(0), q(1)]],
            vec![],
            DivisorClass::from_ints(&[1, 0]),
            AmpleStatus::Ample,
            true,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Signature(_)));
    }

    #[test]
    fn nonnegative_curve_is_rejected() {
        let err = SurfaceLattice::new(
            "bad",
            vec!["H".into(), "E".into()],
            vec![vec![q(1), q(0)], vec![q(0), q(-1)]],
            vec![Curve { label: "C".into(), class: DivisorClass::from_ints(&[1, 0]) }],
            DivisorClass::from_ints(&[1, 0]),
            AmpleStatus::Ample,
            true,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Curve(_)));
    }

    #[test]
    fn classify_ample_is_kahler() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        let r = l.classify(&DivisorClass::from_ints(&[3, -1, -1])).unwrap();
        assert!(r.kahler && r.nef && r.in_p_plus && r.big);
        assert_eq!(r.square, q(7));
        assert!(r.failing_curves.is_empty());
        assert_eq!(r.pseudoeffective_verdict, PsefVerdict::Yes);
    }

    #[test]
    fn classify_boundary_nef_class() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        let tau = DivisorClass::from_ints(&[2, 0, -1]); // 2H - E2
        let r = l.classify(&tau).unwrap();
        assert!(r.nef && !r.kahler);
        assert_eq!(r.square, q(3));
        assert_eq!(r.failing_curves, vec![("E1".to_string(), "0".to_string())]);
    }

    #[test]
    fn classify_negative_ample_pairing_is_not_psef() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        let r = l.classify(&DivisorClass::from_ints(&[-3, 1, 1])).unwrap();
        assert_eq!(r.pseudoeffective_verdict, PsefVerdict::No);
        assert!(!r.nef && !r.kahler && !r.big);
    }

    #[test]
    fn builtin_p2_is_the_rank_one_lattice() {
        let l = SurfaceLattice::builtin("p2").unwrap();
        assert_eq!(l.rank, 1);
        assert!(l.negative_curves.is_empty());
        assert!(l.classify(&DivisorClass::from_ints(&[2])).unwrap().kahler);
        assert!(!l.classify(&DivisorClass::from_ints(&[-1])).unwrap().nef);
        assert!(SurfaceLattice::builtin("p3").is_err());
    }

    #[test]
    fn p1xp1_kahler_iff_positive_square_and_pairing() {
        let l = SurfaceLattice::builtin("p1xp1").unwrap();
        for (a, b) in [(1i64, 1i64), (2, 3), (1, 5)] {
            let tau = DivisorClass::from_ints(&[a, b]);
            assert!(l.classify(&tau).unwrap().kahler);
        }
        assert!(!l.classify(&DivisorClass::from_ints(&[1, 0])).unwrap().kahler);
        assert!(!l.classify(&DivisorClass::from_ints(&[-1, -2])).unwrap().kahler);
    }

    #[test]
    fn blowup_of_p1xp1() {
        let l = SurfaceLattice::builtin("p1xp1").unwrap().blowup_general_point();
        assert_eq!(l.rank, 3);
        assert_eq!(l.gram()[0], vec![q(0), q(1), q(0)]);
        assert_eq!(l.gram()[2], vec![q(0), q(0), q(-1)]);
        assert_eq!(l.negative_curves.len(), 1);
        assert_eq!(l.ample_status, AmpleStatus::Reference);
        // Twice: two orthogonal (-1)-classes.
        let l2 = l.blowup_general_point();
        assert_eq!(l2.rank, 4);
        assert_eq!(l2.negative_curves.len(), 2);
        let e1 = &l2.negative_curves[0].class;
        let e2 = &l2.negative_curves[1].class;
        assert_eq!(l2.pair(e1, e2).unwrap(), q(0));
        assert_eq!(l2.square(e1).unwrap(), q(-1));
        assert_eq!(l2.square(e2).unwrap(), q(-1));
    }

    #[test]
    fn blowup_of_bl2p2_keeps_curves() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap().blowup_general_point();
        assert_eq!(l.rank, 4);
        let labels: Vec<&str> = l.negative_curves.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["E1", "E2", "T", "E3"]);
    }

    #[test]
    fn blowup_preserves_pullback_pairings() {
        let base = SurfaceLattice::builtin("bl2p2").unwrap();
        let up = base.blowup_general_point();
        let a = DivisorClass::from_ints(&[5, -2, 1]);
        let b = DivisorClass::from_ints(&[-1, 3, 2]);
        assert_eq!(
            base.pair(&a, &b).unwrap(),
            up.pair(&a.pullback(), &b.pullback()).unwrap()
        );
    }

    #[test]
    fn surface_doc_round_trip() {
        let doc = r#"{
            "name": "custom",
            "rank": 2,
            "generators": ["H", "E"],
            "gram": [["1", "0"], ["0", "−1"]],
            "negative_curves": [["0", "1"]],
            "ample": ["2", "-1"],
            "projective": true
        }"#;
        let l = SurfaceLattice::from_json(doc).unwrap();
        assert_eq!(l.rank, 2);
        assert_eq!(l.negative_curves[0].label, "C1");
        assert_eq!(l.square(&l.ample.clone()).unwrap(), q(3));
    }

    #[test]
    fn resolve_class_accepts_labels_and_vectors() {
        let l = SurfaceLattice::builtin("bl2p2").unwrap();
        assert_eq!(l.resolve_class("T").unwrap(), DivisorClass::from_ints(&[1, -1, -1]));
        assert_eq!(l.resolve_class("H").unwrap(), DivisorClass::from_ints(&[1, 0, 0]));
        assert_eq!(
            l.resolve_class("11,-1,-1").unwrap(),
            DivisorClass::from_ints(&[11, -1, -1])
        );
        assert_eq!(l.resolve_class("1/2,0,0").unwrap().0[0], qr(1, 2));
    }

    proptest! {
        #[test]
        fn pairing_is_bilinear_and_symmetric(
            a in proptest::collection::vec(-9i64..9, 3),
            b in proptest::collection::vec(-9i64..9, 3),
            c in proptest::collection::vec(-9i64..9, 3),
            s in -5i64..5,
        ) {
            let l = SurfaceLattice::builtin("bl2p2").unwrap();
            let va = DivisorClass::from_ints(&a);
            let vb = DivisorClass::from_ints(&b);
            let vc = DivisorClass::from_ints(&c);
            prop_assert_eq!(l.pair(&va, &vb).unwrap(), l.pair(&vb, &va).unwrap());
            let lhs = l.pair(&va.add(&vc.scale(&q(s))), &vb).unwrap();
            let rhs = l.pair(&va, &vb).unwrap() + l.pair(&vc, &vb).unwrap() * q(s);
            prop_assert_eq!(lhs, rhs);
        }
    }
}
