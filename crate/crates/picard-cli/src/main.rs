//! Command-line front end for the picard engine.
//!
//! Exit codes: 0 = affirmative result (solvable / Kähler / decomposition
//! found / stable), 1 = certified negative with a machine-checkable
//! certificate, 2 = invalid input, 3 = internal guard (oracle size,
//! search failure, undecided verdicts).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use picard::error::Error;
use picard::lattice::{DivisorClass, SurfaceLattice};
use picard::pde::{self, Problem};
use picard::rational::{fmt_rational, parse_rational, ComplexQ, Q};
use picard::stability;
use picard::walls::{self, ExportFormat, FamilySpec, Region};
use picard::zariski::{self, EpsMode};

#[derive(Parser)]
#[command(
    name = "picard",
    version,
    about = "Exact positivity and stability tests on surface lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveKind {
    J,
    Dhym,
    Z,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EpsilonMode {
    Infinitesimal,
    Rational,
}

impl From<EpsilonMode> for EpsMode {
    fn from(m: EpsilonMode) -> EpsMode {
        match m {
            EpsilonMode::Infinitesimal => EpsMode::Infinitesimal,
            EpsilonMode::Rational => EpsMode::Rational,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct SurfaceArg {
    /// Builtin name (p2, p1xp1, bl2p2, fermat_quartic_4lines) or a path
    /// to a JSON surface description.
    #[arg(long)]
    surface: String,
    /// Apply this many general-point blowups first.
    #[arg(long, default_value_t = 0)]
    blowups: usize,
    /// Replacement ample class (required for Kähler tests after blowups).
    #[arg(long, allow_hyphen_values = true)]
    ample: Option<String>,
}

impl SurfaceArg {
    fn load(&self) -> Result<SurfaceLattice, Error> {
        let mut l = SurfaceLattice::load(&self.surface)?;
        for _ in 0..self.blowups {
            l = l.blowup_general_point();
        }
        if let Some(a) = &self.ample {
            l = l.with_ample(l.resolve_class(a)?)?;
        }
        Ok(l)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a surface description and print its report.
    Surface {
        #[command(flatten)]
        surface: SurfaceArg,
    },
    /// Positivity classification of a class.
    Classify {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
    },
    /// Zariski decomposition of a class.
    Zariski {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// Also run the subset-enumeration oracle and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Solvability certificate for the J, dHYM or Z-critical equation.
    Solve {
        kind: SolveKind,
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Stability vector as re,im;re,im;re,im.
        #[arg(long, allow_hyphen_values = true)]
        rho: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        u2: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        c1: Option<String>,
    },
    /// Destabilizer set of a class in P+, and optionally its Zariski
    /// limit set along a direction.
    Destabilizers {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// Also compute the limit set of N(class - ε·direction).
        #[arg(long, allow_hyphen_values = true)]
        limit_direction: Option<String>,
        #[arg(long, value_enum, default_value_t = EpsilonMode::Infinitesimal)]
        epsilon_mode: EpsilonMode,
    },
    /// Optimal destabilizers and the nef threshold for a J or dHYM pair.
    Optimal {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, value_enum, default_value_t = SolveKind::J)]
        kind: SolveKind,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
    },
    /// Slope test-configuration analysis.
    Testconfig {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        /// Seshadri bound applied to every curve (default: conservative
        /// per-curve bound).
        #[arg(long, allow_hyphen_values = true)]
        kappa_bar: Option<String>,
        /// κ-grid size for the non-realization sweep.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Also construct a J-stable-but-not-uniformly-stable pair.
        #[arg(long)]
        construct: bool,
    },
    /// Chamber scan over a two-parameter family of stability data.
    Walls {
        #[command(flatten)]
        surface: SurfaceArg,
        /// Family slice: the builtin `section5` family
        /// ρ_s = (1, -s, s²/2), U = 1 (alias: dhym).
        #[arg(long, default_value = "section5")]
        slice: String,
        /// β of the slice; defaults to 3H-E1-E2 on bl2p2.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        /// Bundle list: labels or coordinate vectors separated by `;`
        /// (or `,` between plain labels).
        #[arg(long, allow_hyphen_values = true)]
        bundles: String,
        /// Region a0:a1,b0:b1.
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        /// Grid as NAxNB.
        #[arg(long, default_value = "128x128")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Parallel jobs for the cell map (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Flow singular locus of an unsolvable J or dHYM problem.
    FlowLocus {
        #[command(flatten)]
        surface: SurfaceArg,
        #[arg(long, value_enum, default_value_t = SolveKind::J)]
        kind: SolveKind,
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, value_enum, default_value_t = EpsilonMode::Infinitesimal)]
        epsilon_mode: EpsilonMode,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Guard(_) | Error::SearchFailure(_) | Error::IrrationalThreshold(_) => 3,
        Error::NotPseudoeffective(f) if !f.certified => 3,
        _ => 2,
    }
}

fn class_str(c: &DivisorClass) -> Vec<String> {
    c.0.iter().map(fmt_rational).collect()
}

fn parse_complex(text: &str) -> Result<ComplexQ, Error> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("complex literal {text:?} needs re,im")))?;
    Ok(ComplexQ::new(parse_rational(re)?, parse_rational(im)?))
}

fn need<'a>(opt: &'a Option<String>, flag: &str) -> Result<&'a str, Error> {
    opt.as_deref()
        .ok_or_else(|| Error::Parse(format!("missing required flag --{flag}")))
}

fn print_doc(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Surface { surface } => {
            let l = surface.load()?;
            let (p, m, z) = l.signature();
            let doc = json!({
                "schema": "surface-report/1",
                "name": l.name,
                "rank": l.rank,
                "generators": l.generators,
                "signature": { "plus": p, "minus": m, "zero": z },
                "lorentzian": l.lorentzian,
                "projective": l.projective,
                "ample": class_str(&l.ample),
                "ample_status": format!("{:?}", l.ample_status).to_lowercase(),
                "negative_curves": l.negative_curves.iter().map(|c| json!({
                    "label": c.label,
                    "class": class_str(&c.class),
                    "square": fmt_rational(&l.square(&c.class).unwrap()),
                })).collect::<Vec<_>>(),
            });
            print_doc(&doc);
            Ok(0)
        }
        Command::Classify { surface, class } => {
            let l = surface.load()?;
            let tau = l.resolve_class(&class)?;
            let report = l.classify(&tau)?;
            let kahler = report.kahler;
            let doc = json!({
                "schema": "positivity/1",
                "surface": l.name,
                "class": class_str(&tau),
                "report": report,
            });
            print_doc(&doc);
            Ok(if kahler { 0 } else { 1 })
        }
        Command::Zariski { surface, class, oracle } => {
            let l = surface.load()?;
            let tau = l.resolve_class(&class)?;
            match zariski::decompose(&l, &tau) {
                Ok(d) => {
                    let mut doc = serde_json::to_value(d.to_doc(&l))?;
                    if oracle {
                        let o = zariski::decompose_oracle(&l, &tau)?;
                        let agree = o == d;
                        doc["oracle_agrees"] = json!(agree);
                        if !agree {
                            print_doc(&doc);
                            return Ok(3);
                        }
                    }
                    print_doc(&doc);
                    Ok(0)
                }
                Err(Error::NotPseudoeffective(f)) if f.certified => {
                    let doc = json!({
                        "schema": "zariski/1",
                        "surface": l.name,
                        "input": class_str(&tau),
                        "not_pseudoeffective": {
                            "reason": f.reason.to_string(),
                            "failing_support": f.support.iter()
                                .map(|&i| l.curve_label(i)).collect::<Vec<_>>(),
                        },
                    });
                    print_doc(&doc);
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
        Command::Solve { kind, surface, theta, omega, beta, alpha, rho, u1, u2, c1 } => {
            let l = surface.load()?;
            let problem =
                build_problem(&l, kind, &theta, &omega, &beta, &alpha, &rho, &u1, &u2, &c1)?;
            let cert = pde::certify(&l, &problem)?;
            let mut doc = serde_json::to_value(cert.to_doc(&l))?;
            if let Problem::Z(zp) = &problem {
                doc["z_data"] = json!({
                    "charge": zp.charge.to_string(),
                    "cot_phi": fmt_rational(&zp.cot_phi),
                    "ck": zp.ck.iter().map(fmt_rational).collect::<Vec<_>>(),
                    "eta": class_str(&zp.eta),
                    "gamma": fmt_rational(&zp.gamma),
                    "v": fmt_rational(&zp.v),
                    "sigma": class_str(&zp.sigma),
                    "sign_s": zp.sign_s,
                    "flags": zp.valid,
                });
            }
            print_doc(&doc);
            Ok(if cert.solvable { 0 } else { 1 })
        }
        Command::Destabilizers { surface, class, limit_direction, epsilon_mode } => {
            let l = surface.load()?;
            let tau = l.resolve_class(&class)?;
            let set = zariski::destabilizer_set(&l, &tau)?;
            let bound = zariski::cardinality_bound(&l);
            let mut doc = json!({
                "schema": "destabilizers/1",
                "surface": l.name,
                "class": class_str(&tau),
                "destabilizers": set.iter().map(|&i| json!({
                    "curve": l.curve_label(i),
                    "pairing": fmt_rational(&l.pair(&tau, &l.negative_curves[i].class).unwrap()),
                })).collect::<Vec<_>>(),
                "cardinality_bound": bound,
                "cardinality_ok": set.len() <= bound,
            });
            if let Some(dir) = limit_direction {
                let a = l.resolve_class(&dir)?;
                let limit = zariski::neg_limit(&l, &tau, &a, epsilon_mode.into())?;
                doc["neg_limit"] = json!(limit
                    .iter()
                    .map(|&i| l.curve_label(i).to_string())
                    .collect::<Vec<_>>());
            }
            print_doc(&doc);
            Ok(if set.is_empty() { 0 } else { 1 })
        }
        Command::Optimal { surface, kind, theta, omega } => {
            let l = surface.load()?;
            let t = l.resolve_class(&theta)?;
            let w = l.resolve_class(&omega)?;
            let problem = match kind {
                SolveKind::J => Problem::J(pde::j_problem(&l, &t, &w)?),
                SolveKind::Dhym => Problem::Dhym(pde::dhym_problem(&l, &t, &w)?),
                SolveKind::Z => {
                    return Err(Error::Precondition(
                        "optimal destabilizers are defined for j and dhym".into(),
                    ))
                }
            };
            let opt = pde::optimal_destabilizers(&l, &problem)?;
            let threshold_doc = match pde::nef_threshold(&l, &t, &w) {
                Ok(r) if r.exists => json!({
                    "exists": true,
                    "a": class_str(r.a.as_ref().unwrap()),
                    "u_star": fmt_rational(r.u_star.as_ref().unwrap()),
                    "t": fmt_rational(r.t.as_ref().unwrap()),
                    "zero_curves": r.zero_curves.iter()
                        .map(|&i| l.curve_label(i)).collect::<Vec<_>>(),
                    "bound": format!("{:?}", r.bound.unwrap()),
                }),
                Ok(_) => json!({ "exists": false }),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let delta_positive = opt
                .delta
                .as_ref()
                .map(|d| d > &Q::from_integer(0.into()))
                .unwrap_or(true);
            let doc = json!({
                "schema": "optimal/1",
                "surface": l.name,
                "kind": match kind { SolveKind::J => "j", _ => "dhym" },
                "delta": opt.delta.as_ref().map(fmt_rational),
                "curves": opt.curves.iter().map(|&i| l.curve_label(i)).collect::<Vec<_>>(),
                "threshold_match": opt.threshold_match,
                "nef_threshold": threshold_doc,
            });
            print_doc(&doc);
            Ok(if delta_positive { 0 } else { 1 })
        }
        Command::Testconfig { surface, theta, omega, kappa_bar, grid, construct } => {
            let l = surface.load()?;
            let t = l.resolve_class(&theta)?;
            let w = l.resolve_class(&omega)?;
            let mut kappa_bars = BTreeMap::new();
            if let Some(kb) = &kappa_bar {
                let kb = parse_rational(kb)?;
                for i in 0..l.negative_curves.len() {
                    kappa_bars.insert(i, kb.clone());
                }
            }
            let verdict = stability::slope_semistability(&l, &t, &w, &kappa_bars)?;
            let unstable = matches!(verdict, stability::SlopeVerdict::Unstable { .. });
            let threshold = stability::ratio_threshold(&l, &t, &w, grid)?;
            let mut doc = json!({
                "schema": "testconfig/1",
                "surface": l.name,
                "theta": class_str(&t),
                "omega": class_str(&w),
                "slope_verdict": verdict,
                "ratio_threshold": threshold,
            });
            if construct {
                let cert = stability::construct_jstable_not_uniform(&l, None, 64)?;
                doc["jstable_not_uniform"] = json!({
                    "theta": class_str(&cert.theta),
                    "omega_half": class_str(&cert.omega_half),
                    "omega_prime": class_str(&cert.omega_prime),
                    "c": fmt_rational(&cert.c),
                    "tau": class_str(&cert.tau),
                    "delta_nm": fmt_rational(&cert.delta_nm),
                });
            }
            print_doc(&doc);
            Ok(if unstable { 1 } else { 0 })
        }
        Command::Walls { surface, slice, beta, bundles, region, grid, out, format, jobs } => {
            let l = surface.load()?;
            if slice != "section5" && slice != "dhym" {
                return Err(Error::Spec(format!("unknown slice {slice:?}")));
            }
            let beta_class = match (&beta, l.name.as_str()) {
                (Some(b), _) => l.resolve_class(b)?,
                (None, "bl2p2") => DivisorClass::from_ints(&[3, -1, -1]),
                (None, _) => {
                    return Err(Error::Spec("--beta is required off the builtin surface".into()))
                }
            };
            let bundle_list = parse_bundles(&l, &bundles)?;
            let region = Region::parse(&region)?;
            let resolution = parse_grid(&grid)?;
            let spec = FamilySpec {
                surface: l,
                bundles: bundle_list,
                parametrization: walls::Parametrization::OmegaS { beta: beta_class },
                region,
                resolution,
            };
            let map = walls::scan(&spec, jobs)?;
            let requested = format.map(|f| match f {
                OutputFormat::Csv => ExportFormat::Csv,
                OutputFormat::Json => ExportFormat::Json,
                OutputFormat::Svg => ExportFormat::Svg,
            });
            let inferred = match out.extension().and_then(|e| e.to_str()) {
                Some("csv") => ExportFormat::Csv,
                Some("json") => ExportFormat::Json,
                _ => ExportFormat::Svg,
            };
            let fmt = requested.unwrap_or(inferred);
            walls::export(&map, fmt, &out)?;
            // A JSON sidecar always accompanies non-JSON exports.
            let json_path = out.with_extension("json");
            if fmt != ExportFormat::Json {
                map.write_json(&json_path)?;
            }
            let doc = json!({
                "schema": "walls-run/1",
                "surface": map.surface,
                "bundles": map.bundle_labels,
                "resolution": [map.resolution.0, map.resolution.1],
                "chamber_count": map.chamber_count,
                "distinct_status_vectors": map.distinct_status_vectors,
                "wall_families": map.walls.len(),
                "files": [out.display().to_string(), json_path.display().to_string()],
                "comparison_report": map.comparison_report.as_ref().map(|r| json!({
                    "description": r.description,
                    "samples": r.sample_count,
                    "w1_sign_agreements": r.w1_sign_agreements,
                    "w2_sign_agreements": r.w2_sign_agreements,
                })),
            });
            print_doc(&doc);
            Ok(0)
        }
        Command::FlowLocus { surface, kind, theta, omega, beta, alpha, epsilon_mode } => {
            let l = surface.load()?;
            let problem = match kind {
                SolveKind::J => {
                    let t = l.resolve_class(need(&theta, "theta")?)?;
                    let w = l.resolve_class(need(&omega, "omega")?)?;
                    Problem::J(pde::j_problem(&l, &t, &w)?)
                }
                SolveKind::Dhym => {
                    let b = l.resolve_class(need(&beta, "beta")?)?;
                    let a = l.resolve_class(need(&alpha, "alpha")?)?;
                    Problem::Dhym(pde::dhym_problem(&l, &b, &a)?)
                }
                SolveKind::Z => {
                    return Err(Error::Precondition(
                        "the flow locus is defined for j and dhym".into(),
                    ))
                }
            };
            let locus = pde::flow_singular_locus(&l, &problem)?;
            let mut doc = json!({
                "schema": "flow-locus/1",
                "surface": l.name,
                "kind": match kind { SolveKind::J => "j", _ => "dhym" },
                "locus": locus.iter().map(|(i, c)| json!({
                    "curve": l.curve_label(*i),
                    "coefficient_at_0": fmt_rational(&c.value),
                    "coefficient_slope": fmt_rational(&c.slope),
                })).collect::<Vec<_>>(),
            });
            if matches!(epsilon_mode, EpsilonMode::Rational) {
                let direction = match &problem {
                    Problem::J(p) => p.theta.clone(),
                    Problem::Dhym(p) => p.beta.clone(),
                    Problem::Z(_) => unreachable!(),
                };
                let support =
                    zariski::neg_limit(&l, problem.tau(), &direction, EpsMode::Rational)?;
                let agrees = support == locus.iter().map(|(i, _)| *i).collect::<Vec<_>>();
                doc["rational_mode_agrees"] = json!(agrees);
                if !agrees {
                    print_doc(&doc);
                    return Ok(3);
                }
            }
            print_doc(&doc);
            Ok(0)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_problem(
    l: &SurfaceLattice,
    kind: SolveKind,
    theta: &Option<String>,
    omega: &Option<String>,
    beta: &Option<String>,
    alpha: &Option<String>,
    rho: &Option<String>,
    u1: &Option<String>,
    u2: &Option<String>,
    c1: &Option<String>,
) -> Result<Problem, Error> {
    match kind {
        SolveKind::J => {
            let t = l.resolve_class(need(theta, "theta")?)?;
            let w = l.resolve_class(need(omega, "omega")?)?;
            Ok(Problem::J(pde::j_problem(l, &t, &w)?))
        }
        SolveKind::Dhym => {
            let b = l.resolve_class(need(beta, "beta")?)?;
            let a = l.resolve_class(need(alpha, "alpha")?)?;
            Ok(Problem::Dhym(pde::dhym_problem(l, &b, &a)?))
        }
        SolveKind::Z => {
            let b = l.resolve_class(need(beta, "beta")?)?;
            let rho_text = need(rho, "rho")?;
            let parts: Vec<&str> = rho_text.split(';').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(
                    "--rho needs three components re,im;re,im;re,im".into(),
                ));
            }
            let rho = [
                parse_complex(parts[0])?,
                parse_complex(parts[1])?,
                parse_complex(parts[2])?,
            ];
            let u1 = match u1 {
                Some(v) => l.resolve_class(v)?,
                None => DivisorClass::zero(l.rank),
            };
            let u2 = match u2 {
                Some(v) => parse_rational(v)?,
                None => Q::from_integer(0.into()),
            };
            let c1l = l.resolve_class(need(c1, "c1")?)?;
            let data = pde::StabilityData::new(l, b, rho, u1, u2)?;
            Ok(Problem::Z(pde::z_problem(l, &data, &c1l)?))
        }
    }
}

fn parse_bundles(l: &SurfaceLattice, text: &str) -> Result<Vec<(String, DivisorClass)>, Error> {
    let literals: Vec<String> = if text.contains(';') {
        text.split(';').map(|s| s.trim().to_string()).collect()
    } else {
        // Plain comma-separated labels, or a single coordinate vector.
        let tokens: Vec<&str> = text.split(',').map(|s| s.trim()).collect();
        let all_labels = tokens
            .iter()
            .all(|t| l.generators.iter().any(|g| g == t) || l.curve_index(t).is_some());
        if all_labels {
            tokens.into_iter().map(|s| s.to_string()).collect()
        } else {
            vec![text.trim().to_string()]
        }
    };
    literals
        .into_iter()
        .map(|lit| {
            let class = l.resolve_class(&lit)?;
            Ok((lit, class))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<(usize, usize), Error> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| Error::Spec(format!("grid {text:?} needs NAxNB")))?;
    let na: usize = a.parse().map_err(|_| Error::Spec(format!("bad grid count {a:?}")))?;
    let nb: usize = b.parse().map_err(|_| Error::Spec(format!("bad grid count {b:?}")))?;
    Ok((na, nb))
}
