//! Command-line front end. Every report embeds the [`RunConfig`] that
//! produced it and names the scales behind its claims.
//!
//! Exit codes: 0 success, 1 definite negative verdict, 2 malformed input,
//! 3 resource cap, 4 pattern not from the scheme, 5 not found or inconclusive.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cps::{CpsError, CutProjectScheme, LocateMode, SchemeParameter};
use crate::defaults;
use crate::dynamics::{self, ConsistencyConfig, DynamicsError, SrpCaps, SrpOutcome, Thresholds, Verdict};
use crate::exact::QuadRational;
use crate::internal::{Coord, InternalPoint, Membership, WindowCell};
use crate::patterns::{self, MultiPattern, Patch, PatternError, PatternFile};
use crate::{plot, presets};

type Q = QuadRational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_NOT_FROM_SCHEME: i32 = 4;
pub const EXIT_NOT_FOUND: i32 = 5;

fn defaults_help() -> String {
    let mut s = String::from("Defaults:\n");
    for (k, v) in defaults::table() {
        s.push_str(&format!("  {k:<22} {v}\n"));
    }
    s
}

#[derive(Debug, Parser)]
#[command(name = "modelset", version, about = "Exact cut & project model sets and finite-scale checks")]
#[command(after_help = defaults_help())]
pub struct Cli {
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = defaults::SEED)]
    pub seed: u64,
    /// Search caps, e.g. `occurrences=12,connector=200,checks=2000000,meyer=64`.
    #[arg(long, global = true)]
    pub caps: Option<String>,
    /// Pass threshold for eigenvalue defects.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct SchemeArgs {
    /// Built-in scheme name.
    #[arg(long, conflicts_with = "scheme")]
    pub preset: Option<String>,
    /// Scheme JSON file.
    #[arg(long)]
    pub scheme: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a model multiple set on a ball.
    Generate {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = defaults::GENERATE_RADIUS.to_string())]
        radius: String,
        /// Internal parameter: comma-separated coordinates, or a JSON array.
        #[arg(long)]
        w: Option<String>,
        /// Physical translation, comma-separated.
        #[arg(long)]
        t: Option<String>,
        /// closure | interior | declared | limit:<signs>
        #[arg(long, default_value = "declared")]
        mode: String,
        /// Also write an SVG plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Meyer, Delone and local-complexity report for a pattern file.
    Verify {
        #[arg(long)]
        pattern: PathBuf,
        /// Difference-set depths, comma-separated.
        #[arg(long)]
        depths: Option<String>,
        #[arg(long, default_value_t = defaults::VERIFY_PATCH_RADIUS.to_string())]
        patch_radius: String,
    },
    /// Patch language and consecutive-point complexity.
    Language {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, default_value_t = defaults::LANGUAGE_RADIUS.to_string())]
        radius: String,
        #[arg(long, default_value_t = defaults::LANGUAGE_CONSECUTIVE)]
        consecutive: usize,
    },
    /// Feasible region of internal parameters for a pattern.
    Locate {
        #[arg(long)]
        pattern: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// exact | containment
        #[arg(long, default_value = "exact")]
        mode: String,
    },
    /// Model pattern containing the input pattern.
    Embed {
        #[arg(long)]
        pattern: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Strong regional proximality search between two patches of a master.
    Srp {
        #[arg(long)]
        master: PathBuf,
        /// Patch file (pattern format, centered at one of its points).
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        radius: String,
    },
    /// Eigenvalue defect curves, eigenvalue listing, or the consistency report.
    Eigen {
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Candidate eigenvalue; components separated by `;`. Repeatable.
        #[arg(long)]
        beta: Vec<String>,
        /// Patch radii, comma-separated.
        #[arg(long)]
        rhos: Option<String>,
        #[arg(long, default_value_t = defaults::EIGEN_COUNT)]
        count: usize,
        /// Run the predicted / sampled / quotient consistency check.
        #[arg(long)]
        consistency: bool,
    },
    /// Redundancy group and quotient scheme.
    Redundancy {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// SVG for a pattern file, an eigen report, or a locate report.
    Plot {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Everything that determines a run; embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub thresholds: Thresholds,
    pub caps: BTreeMap<String, String>,
    pub seed: u64,
    pub out: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn parse(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: msg.into(),
        }
    }
}

impl From<CpsError> for CliError {
    fn from(e: CpsError) -> Self {
        let code = match &e {
            CpsError::ResourceCap(_) => EXIT_CAP,
            CpsError::NotFromScheme(_) | CpsError::NotInStructureGroup(_) => EXIT_NOT_FROM_SCHEME,
            CpsError::Pattern(PatternError::ResourceCap(_)) => EXIT_CAP,
            _ => EXIT_PARSE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<PatternError> for CliError {
    fn from(e: PatternError) -> Self {
        let code = if matches!(e, PatternError::ResourceCap(_)) { EXIT_CAP } else { EXIT_PARSE };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Cps(c) => c.into(),
            DynamicsError::Pattern(p) => p.into(),
            other => CliError::parse(other.to_string()),
        }
    }
}

struct Caps {
    srp: SrpCaps,
    meyer: usize,
}

fn parse_caps(text: Option<&str>) -> Result<Caps, CliError> {
    let mut caps = Caps {
        srp: defaults::srp_caps(),
        meyer: defaults::MEYER_F_CAP,
    };
    let Some(text) = text else {
        return Ok(caps);
    };
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| CliError::parse(format!("cap {item:?} is not key=value")))?;
        let bad = || CliError::parse(format!("bad value for cap {k}: {v:?}"));
        match k.trim() {
            "occurrences" => caps.srp.max_occurrences = v.trim().parse().map_err(|_| bad())?,
            "connector" => caps.srp.max_connector = parse_q(v)?,
            "checks" => caps.srp.max_checks = v.trim().parse().map_err(|_| bad())?,
            "meyer" => caps.meyer = v.trim().parse().map_err(|_| bad())?,
            other => return Err(CliError::parse(format!("unknown cap {other:?}"))),
        }
    }
    Ok(caps)
}

fn caps_map(c: &Caps) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("occurrences".to_string(), c.srp.max_occurrences.to_string()),
        ("connector".to_string(), c.srp.max_connector.to_string()),
        ("checks".to_string(), c.srp.max_checks.to_string()),
        ("meyer".to_string(), c.meyer.to_string()),
    ])
}

fn parse_q(s: &str) -> Result<Q, CliError> {
    s.trim().parse().map_err(|e| CliError::parse(format!("bad scalar {s:?}: {e}")))
}

fn parse_positive(s: &str, what: &str) -> Result<Q, CliError> {
    let q = parse_q(s)?;
    if q.sign() <= 0 {
        return Err(CliError::parse(format!("{what} must be positive, got {s}")));
    }
    Ok(q)
}

fn parse_list(s: &str) -> Result<Vec<Q>, CliError> {
    s.split(',').map(parse_q).collect()
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))
}

fn load_pattern(path: &Path) -> Result<MultiPattern, CliError> {
    MultiPattern::from_json(&read(path)?).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn load_scheme(args: &SchemeArgs) -> Result<(CutProjectScheme, String), CliError> {
    match (&args.preset, &args.scheme) {
        (Some(name), _) => presets::build(name)
            .map(|s| (s, format!("preset:{name}")))
            .ok_or_else(|| CliError::parse(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))),
        (None, Some(path)) => {
            let s = CutProjectScheme::from_json(&read(path)?).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
            Ok((s, path.display().to_string()))
        }
        (None, None) => Err(CliError::parse("need --preset or --scheme")),
    }
}

fn parse_w(text: Option<&str>, scheme: &CutProjectScheme) -> Result<InternalPoint, CliError> {
    let group = scheme.internal();
    let Some(text) = text else {
        return Ok(group.zero());
    };
    let coords: Vec<Coord> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| CliError::parse(format!("bad --w: {e}")))?
    } else {
        text.split(',')
            .zip(group.components())
            .map(|(tok, comp)| {
                if comp.modulus().is_some() {
                    tok.trim().parse().map(Coord::Residue).map_err(|_| CliError::parse(format!("bad residue {tok:?}")))
                } else {
                    parse_q(tok).map(Coord::Real)
                }
            })
            .collect::<Result<_, _>>()?
    };
    InternalPoint::from_coords(&coords, group).map_err(|e| CliError::parse(format!("bad --w: {e}")))
}

fn parse_mode(text: &str) -> Result<Membership, CliError> {
    Ok(match text {
        "closure" => Membership::Closure,
        "interior" => Membership::Interior,
        "declared" => Membership::Declared,
        _ => {
            let signs = text.strip_prefix("limit:").ok_or_else(|| CliError::parse(format!("unknown mode {text:?}")))?;
            Membership::Limit(
                signs
                    .split(',')
                    .map(|s| match s.trim() {
                        "+" => Ok(1),
                        "-" => Ok(-1),
                        _ => Err(CliError::parse(format!("bad limit sign {s:?}"))),
                    })
                    .collect::<Result<_, _>>()?,
            )
        }
    })
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Report envelope: configuration, scope of the claims, and the result.
fn report(config: &RunConfig, scales: Value, result: Value) -> String {
    pretty(&json!({
        "config": config,
        "claims": "verified-at-scale",
        "scales": scales,
        "result": result,
    }))
}

fn err_value(e: impl std::fmt::Display) -> Value {
    json!({ "error": e.to_string() })
}

struct Output {
    code: i32,
    text: String,
    extra: Vec<(PathBuf, String)>,
}

fn done(text: String) -> Result<Output, CliError> {
    Ok(Output {
        code: EXIT_OK,
        text,
        extra: vec![],
    })
}

/// Parses arguments and runs one subcommand; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            } else {
                let _ = write!(stderr, "{text}");
                EXIT_PARSE
            };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            let write_result = match &cli.out {
                Some(path) => std::fs::write(path, &out.text),
                None => stdout.write_all(out.text.as_bytes()),
            };
            if let Err(e) = write_result {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                return EXIT_PARSE;
            }
            for (path, text) in &out.extra {
                if let Err(e) = std::fs::write(path, text) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return EXIT_PARSE;
                }
            }
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    let caps = parse_caps(cli.caps.as_deref())?;
    let mut thresholds = defaults::thresholds();
    if let Some(t) = cli.tolerance {
        if !(t > 0.0) {
            return Err(CliError::parse("--tolerance must be positive"));
        }
        thresholds.pass = t;
    }
    let mut config = RunConfig {
        subcommand: String::new(),
        inputs: vec![],
        parameters: BTreeMap::new(),
        thresholds,
        caps: caps_map(&caps),
        seed: cli.seed,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
    };
    let param = |config: &mut RunConfig, k: &str, v: &str| {
        config.parameters.insert(k.to_string(), v.to_string());
    };
    match &cli.command {
        Command::Generate {
            scheme,
            radius,
            w,
            t,
            mode,
            svg,
        } => {
            let (s, _) = load_scheme(scheme)?;
            let radius = parse_positive(radius, "radius")?;
            let w = parse_w(w.as_deref(), &s)?;
            let t = match t {
                Some(t) => parse_list(t)?,
                None => vec![Q::zero(); s.physical_dim()],
            };
            let p = s.generate(&SchemeParameter { w, t }, &radius, &parse_mode(mode)?)?;
            let mut out = done(p.to_json())?;
            if let Some(path) = svg {
                out.extra.push((path.clone(), plot::pattern_svg(&p)));
            }
            Ok(out)
        }
        Command::Verify {
            pattern,
            depths,
            patch_radius,
        } => {
            config.subcommand = "verify".into();
            config.inputs.push(pattern.display().to_string());
            let p = load_pattern(pattern)?;
            let r = parse_positive(patch_radius, "patch radius")?;
            let depths: Vec<usize> = match depths {
                Some(d) => d
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| CliError::parse(format!("bad depth {x:?}"))))
                    .collect::<Result<_, _>>()?,
                None => defaults::VERIFY_DEPTHS.to_vec(),
            };
            param(&mut config, "patch_radius", &r.to_string());
            param(&mut config, "depths", &depths.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","));
            let min_gap = patterns::min_gap(&p).map_or_else(err_value, |l| json!(l));
            let density = patterns::relative_density_radius(&p, false).map_or_else(err_value, |l| json!(l));
            let density_per_symbol = patterns::relative_density_radius(&p, true).map_or_else(err_value, |l| json!(l));
            let meyer = patterns::meyer_witness(&p, caps.meyer);
            let meyer_found = matches!(meyer, Ok(patterns::MeyerOutcome::Found { .. }));
            let meyer = meyer.map_or_else(err_value, |m| json!(m));
            let mut diffs = Vec::new();
            for &k in &depths {
                let entry = match patterns::difference_set(&p, k) {
                    Ok(d) => json!({
                        "depth": k,
                        "points": d.points.len(),
                        "radius": d.radius,
                        "min_gap": patterns::difference_min_gap(&d),
                    }),
                    Err(e) => json!({ "depth": k, "error": e.to_string() }),
                };
                diffs.push(entry);
            }
            let lang = patterns::language(&p, &r);
            let rep = patterns::repetitivity_bound(&p, &r);
            let result = json!({
                "min_gap": min_gap,
                "relative_density_radius": density,
                "relative_density_radius_per_symbol": density_per_symbol,
                "meyer": meyer,
                "difference_sets": diffs,
                "language": {
                    "radius": lang.radius,
                    "patches": lang.len(),
                    "centers": lang.centers,
                    "pass_counts": lang.pass_counts,
                    "flc_suspect": lang.flc_suspect,
                },
                "repetitivity": {
                    "radius": rep.radius,
                    "bound_exact": rep.bound_exact,
                    "bound": rep.bound,
                    "inconclusive_patches": rep.inconclusive.len(),
                },
            });
            let scales = json!({ "region_radius": p.region_radius(), "patch_radius": r });
            Ok(Output {
                code: if meyer_found { EXIT_OK } else { EXIT_NOT_FOUND },
                text: report(&config, scales, result),
                extra: vec![],
            })
        }
        Command::Language {
            pattern,
            radius,
            consecutive,
        } => {
            config.subcommand = "language".into();
            config.inputs.push(pattern.display().to_string());
            let p = load_pattern(pattern)?;
            let r = parse_positive(radius, "radius")?;
            param(&mut config, "radius", &r.to_string());
            param(&mut config, "consecutive", &consecutive.to_string());
            let lang = patterns::language(&p, &r);
            let counts: Vec<Value> = if p.dim() == 1 {
                let index = patterns::PatchIndex::new(&p);
                (1..=*consecutive).map(|n| json!({ "n": n, "count": index.consecutive_classes(n).len() })).collect()
            } else {
                vec![]
            };
            let result = json!({
                "radius": lang.radius,
                "patches": lang.len(),
                "centers": lang.centers,
                "pass_counts": lang.pass_counts,
                "flc_suspect": lang.flc_suspect,
                "consecutive": counts,
            });
            done(report(&config, json!({ "region_radius": p.region_radius() }), result))
        }
        Command::Locate { pattern, scheme, mode } => {
            config.subcommand = "locate".into();
            let (s, name) = load_scheme(scheme)?;
            config.inputs.extend([pattern.display().to_string(), name]);
            param(&mut config, "mode", mode);
            let p = load_pattern(pattern)?;
            let mode = match mode.as_str() {
                "exact" => LocateMode::Exact,
                "containment" => LocateMode::Containment,
                other => return Err(CliError::parse(format!("unknown locate mode {other:?}"))),
            };
            let region = s.locate_window(&p, mode)?;
            let result = json!({
                "mode": mode,
                "cells": region.to_cells(),
                "diameter": region.diameter(),
                "diameter_exact": region.diameter_exact(),
                "representative": region.representative().map(|w| w.to_coords(s.internal())),
            });
            done(report(&config, json!({ "region_radius": p.region_radius() }), result))
        }
        Command::Embed { pattern, scheme } => {
            config.subcommand = "embed".into();
            let (s, name) = load_scheme(scheme)?;
            config.inputs.extend([pattern.display().to_string(), name]);
            let p = load_pattern(pattern)?;
            let e = s.embed(&p)?;
            let result = json!({
                "w": e.w.to_coords(s.internal()),
                "locate_mode": e.mode,
                "contained": e.contained,
                "input_points": p.len(),
                "delta_points": e.delta.len(),
                "delta": e.delta.to_file(),
            });
            Ok(Output {
                code: if e.contained { EXIT_OK } else { EXIT_NEGATIVE },
                text: report(&config, json!({ "region_radius": p.region_radius() }), result),
                extra: vec![],
            })
        }
        Command::Srp { master, a, b, radius } => {
            config.subcommand = "srp".into();
            config.inputs.extend([master, a, b].map(|p| p.display().to_string()));
            let r = parse_positive(radius, "radius")?;
            param(&mut config, "radius", &r.to_string());
            let m = load_pattern(master)?;
            let pa = Patch::from_pattern(&load_pattern(a)?);
            let pb = Patch::from_pattern(&load_pattern(b)?);
            let outcome = dynamics::srp_check(&m, &pa, &pb, &r, &caps.srp)?;
            let code = match outcome {
                SrpOutcome::Found(_) => EXIT_OK,
                SrpOutcome::NotFound { .. } => EXIT_NOT_FOUND,
            };
            let scales = json!({ "region_radius": m.region_radius(), "scale": r });
            Ok(Output {
                code,
                text: report(&config, scales, json!(outcome)),
                extra: vec![],
            })
        }
        Command::Eigen {
            pattern,
            scheme,
            beta,
            rhos,
            count,
            consistency,
        } => {
            config.subcommand = "eigen".into();
            let rhos = match rhos {
                Some(r) => parse_list(r)?,
                None => defaults::eigen_rhos(),
            };
            param(&mut config, "rhos", &rhos.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","));
            let has_scheme = scheme.preset.is_some() || scheme.scheme.is_some();
            if *consistency {
                let (s, name) = load_scheme(scheme)?;
                config.inputs.push(name);
                param(&mut config, "count", &count.to_string());
                let cfg = ConsistencyConfig {
                    count: *count,
                    samples: defaults::EIGEN_SAMPLES,
                    master_radius: Q::int(defaults::EIGEN_MASTER_RADIUS),
                    rhos: rhos.clone(),
                    thresholds,
                    seed: cli.seed,
                    nonsingular_bound: Q::int(defaults::NONSINGULAR_BOUND),
                };
                let rep = dynamics::eigen_consistency(&s, &cfg)?;
                let ok = rep.all_predicted_pass && rep.all_sampled_fail && rep.index_relation_holds;
                let scales = json!({ "master_radius": cfg.master_radius, "rhos": rhos });
                return Ok(Output {
                    code: if ok { EXIT_OK } else { EXIT_NOT_FOUND },
                    text: report(&config, scales, json!(rep)),
                    extra: vec![],
                });
            }
            let Some(pattern) = pattern else {
                // no master: list the predicted eigenvalues
                let (s, name) = load_scheme(scheme)?;
                config.inputs.push(name);
                param(&mut config, "count", &count.to_string());
                let ev = s.model_eigenvalues(*count)?;
                let list: Vec<Value> = ev
                    .iter()
                    .map(|e| json!({ "beta": e.beta, "kappa": e.kappa, "eta": e.eta, "norm": e.norm }))
                    .collect();
                return done(report(&config, json!({ "count": count }), json!({ "eigenvalues": list })));
            };
            config.inputs.push(pattern.display().to_string());
            let master = load_pattern(pattern)?;
            let mut betas: Vec<Vec<Q>> = beta
                .iter()
                .map(|b| b.split(';').map(parse_q).collect::<Result<Vec<_>, _>>())
                .collect::<Result<_, _>>()?;
            if has_scheme {
                let (s, name) = load_scheme(scheme)?;
                config.inputs.push(name);
                param(&mut config, "count", &count.to_string());
                betas.extend(s.model_eigenvalues(*count)?.into_iter().map(|e| e.beta));
            }
            if betas.is_empty() {
                return Err(CliError::parse("need --beta or a scheme to predict eigenvalues"));
            }
            let mut reports = Vec::new();
            let mut flc = Vec::new();
            for rho in &rhos {
                let lang = patterns::language(&master, rho);
                flc.push(json!({ "rho": rho, "patches": lang.len(), "flc_suspect": lang.flc_suspect }));
            }
            for b in &betas {
                reports.push(dynamics::eigenvalue_defect(&master, b, &rhos, &thresholds)?);
            }
            let code = if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
                EXIT_NOT_FOUND
            } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            };
            let scales = json!({ "region_radius": master.region_radius(), "rhos": rhos });
            Ok(Output {
                code,
                text: report(&config, scales, json!({ "flc": flc, "reports": reports })),
                extra: vec![],
            })
        }
        Command::Redundancy { scheme } => {
            config.subcommand = "redundancy".into();
            let (s, name) = load_scheme(scheme)?;
            config.inputs.push(name);
            let check = s.eigenvalue_quotient_check()?;
            let (quot, _) = s.quotient()?;
            let result = json!({ "check": check, "quotient_scheme": quot.to_file() });
            let scales = json!({ "eigenvalue_radius": check.compared_radius });
            done(report(&config, scales, result))
        }
        Command::Plot { input } => {
            let text = read(input)?;
            let value: Value = serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", input.display())))?;
            if let Ok(f) = serde_json::from_value::<PatternFile>(value.clone()) {
                let p = MultiPattern::from_file(f)?;
                return done(plot::pattern_svg(&p));
            }
            let result = value.get("result").ok_or_else(|| CliError::parse("not a pattern file or report"))?;
            if let Some(reports) = result.get("reports") {
                let reports: Vec<dynamics::EigenReport> =
                    serde_json::from_value(reports.clone()).map_err(|e| CliError::parse(format!("bad eigen report: {e}")))?;
                let curves: Vec<(String, Vec<dynamics::DefectPoint>)> = reports
                    .into_iter()
                    .map(|r| (r.beta.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(";"), r.curve))
                    .collect();
                return done(plot::defect_svg(&curves));
            }
            if let Some(cells) = result.get("cells") {
                let cells: Vec<WindowCell> =
                    serde_json::from_value(cells.clone()).map_err(|e| CliError::parse(format!("bad locate report: {e}")))?;
                return done(plot::region_svg(&cells));
            }
            Err(CliError::parse("report kind has no plot"))
        }
    }
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use serde_json::Value;

    use super::*;
    use crate::exact::QuadRational as Q;
    use crate::patterns::MultiPattern;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    fn cli(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv: Vec<&str> = std::iter::once("modelset").chain(args.iter().copied()).collect();
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn generate(dir: &Path, name: &str, args: &[&str]) -> String {
        let path = dir.join(name).to_str().unwrap().to_string();
        let mut all = vec!["generate"];
        all.extend_from_slice(args);
        all.extend_from_slice(&["--out", &path]);
        let (code, _, err) = cli(&all);
        assert_eq!(code, EXIT_OK, "{err}");
        path
    }

    fn result(stdout: &str) -> Value {
        let v: Value = serde_json::from_str(stdout).unwrap();
        assert_eq!(v["claims"], "verified-at-scale");
        v["result"].clone()
    }

    #[test]
    fn tiny_radius_keeps_only_the_origin() {
        let (code, out, _) = cli(&["generate", "--preset", "fibonacci", "--radius", "0.1"]);
        assert_eq!(code, EXIT_OK);
        let p = MultiPattern::from_json(&out).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.points()[0].0, vec![q("0")]);
    }

    #[test]
    fn malformed_scheme_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, "{\"dim\": 1").unwrap();
        let (code, _, err) = cli(&["generate", "--scheme", bad.to_str().unwrap()]);
        assert_eq!(code, EXIT_PARSE);
        assert!(err.contains("malformed scheme"), "{err}");
    }

    #[test]
    fn unknown_preset_and_subcommand_are_parse_errors() {
        assert_eq!(cli(&["generate", "--preset", "penrose"]).0, EXIT_PARSE);
        assert_eq!(cli(&["frobnicate"]).0, EXIT_PARSE);
        assert_eq!(cli(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn integer_lattice_meyer_witness_is_zero() {
        let dir = tempfile::tempdir().unwrap();
        let z = generate(dir.path(), "z.json", &["--preset", "integer-lattice", "--radius", "6"]);
        let (code, out, _) = cli(&["verify", "--pattern", &z]);
        assert_eq!(code, EXIT_OK);
        let meyer = &result(&out)["meyer"];
        assert_eq!(meyer["status"], "found");
        assert_eq!(meyer["f"], serde_json::json!([["0"]]));
    }

    #[test]
    fn eigen_exit_codes_follow_verdicts() {
        let dir = tempfile::tempdir().unwrap();
        let f = generate(dir.path(), "f.json", &["--preset", "fibonacci", "--radius", "40", "--w", "1/3"]);
        let (code, out, _) = cli(&["eigen", "--pattern", &f, "--beta", "0", "--rhos", "2,4,6"]);
        assert_eq!(code, EXIT_OK);
        let report = &result(&out)["reports"][0];
        assert_eq!(report["verdict"], "pass");
        assert!(report["curve"].as_array().unwrap().iter().all(|p| p["defect"] == 0.0));
        let (code, _, _) = cli(&["eigen", "--pattern", &f, "--beta", "1/3", "--rhos", "2,4,6"]);
        assert_eq!(code, EXIT_NEGATIVE);
    }

    #[test]
    fn locate_contains_the_generating_parameter() {
        let dir = tempfile::tempdir().unwrap();
        let f = generate(dir.path(), "f.json", &["--preset", "fibonacci", "--radius", "40", "--w", "1/3"]);
        let (code, out, _) = cli(&["locate", "--preset", "fibonacci", "--pattern", &f]);
        assert_eq!(code, EXIT_OK);
        let r = result(&out);
        let iv = &r["cells"][0]["intervals"][0];
        let (lo, hi) = (q(iv["lo"].as_str().unwrap()), q(iv["hi"].as_str().unwrap()));
        assert!(lo <= q("1/3") && q("1/3") <= hi);
        assert!(r["diameter"].as_f64().unwrap() < 0.1);
    }

    #[test]
    fn foreign_points_are_not_from_scheme() {
        let dir = tempfile::tempdir().unwrap();
        let off = dir.path().join("off.json");
        let p = MultiPattern::new(1, vec!["a".into(), "b".into()], q("2"), vec![(vec![q("0")], 0), (vec![q("1/3")], 0)]).unwrap();
        std::fs::write(&off, p.to_json()).unwrap();
        let (code, _, err) = cli(&["embed", "--preset", "fibonacci", "--pattern", off.to_str().unwrap()]);
        assert_eq!(code, EXIT_NOT_FROM_SCHEME, "{err}");
    }

    #[test]
    fn plot_of_empty_pattern_is_valid_svg() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("e.json");
        std::fs::write(&empty, MultiPattern::empty(1, vec!["a".into()], q("3")).to_json()).unwrap();
        let (code, out, _) = cli(&["plot", "--input", empty.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("<svg") && out.ends_with("</svg>\n"));
    }

    #[test]
    fn generate_writes_svg_alongside() {
        let dir = tempfile::tempdir().unwrap();
        let svg = dir.path().join("p.svg");
        let f = generate(dir.path(), "p.json", &["--preset", "silver-mean", "--radius", "10", "--svg", svg.to_str().unwrap()]);
        let p = MultiPattern::from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
        let text = std::fs::read_to_string(svg).unwrap();
        assert_eq!(text.matches("<line").count(), 2 + p.len());
    }

    #[test]
    fn redundancy_report_for_z2() {
        let (code, out, _) = cli(&["redundancy", "--preset", "z2-redundant"]);
        assert_eq!(code, EXIT_OK);
        let check = &result(&out)["check"];
        assert_eq!(check["redundancy_size"], 2);
        assert_eq!(check["index"], 2);
    }
}
