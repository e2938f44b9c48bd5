use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use aperiodic::cpt::{self, CptScheme, SchemeConfig};
use aperiodic::document::{read_document, report_json, to_canonical_json, write_document};
use aperiodic::penrose::{p2_patch, Seed, MAX_ROBINSON_STEPS};
use aperiodic::pentagrid::{generate_pentagrid_capped, PentagridParams};
use aperiodic::potential::{height_atlas, injectivity_check, reconstruction_check, AtlasOutcome};
use aperiodic::spectral::{builtin_systems, coherence_hierarchy, format_hierarchy, SystemSpec};
use aperiodic::svg::{render_svg, SvgOptions};
use aperiodic::tiling::Tiling;
use aperiodic::validator::{inject_violation_with, validate_parallel, InjectMode, Which};
use aperiodic::Error;
use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

const DEFAULT_MAX_CELLS: u128 = 1_000_000;

#[derive(Parser)]
#[command(name = "aperiodic", version, about = "Generate and check aperiodic tilings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    P2,
    Pentagrid,
    Cpt,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedTile {
    Kite,
    Dart,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Flip,
    Zero,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    A,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tiling document.
    Generate {
        kind: Kind,
        /// Deflations for p2.
        #[arg(long, default_value_t = 3)]
        steps: usize,
        /// Seed tile for p2.
        #[arg(long, value_enum, default_value = "kite")]
        tile: SeedTile,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        /// Pentagrid offsets: one value for all five families or five comma-separated values.
        #[arg(long, default_value = "1/5")]
        offsets: String,
        /// Builtin CPT scheme name, or a path to a JSON scheme config.
        #[arg(long, default_value = "penrose5")]
        scheme: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Check matching rules; exits 1 when violations are found.
    Validate {
        input: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Include wall-clock timing in the JSON report.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        bars: bool,
    },
    /// Inject one matching-rule violation on an interior edge.
    Mutate {
        input: PathBuf,
        /// Edge id; chosen at random among interior edges when absent.
        #[arg(long)]
        edge: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "flip")]
        mode: Mode,
        /// Which incident tile is altered.
        #[arg(long, value_enum, default_value = "b")]
        which: Side,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Height functions of every family, or the cycles that obstruct them.
    Heights {
        input: PathBuf,
        /// Family used for SVG colouring.
        #[arg(long, default_value_t = 0)]
        family: usize,
        #[arg(long)]
        root: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Reconstruction residual and tuple collisions of the height atlas.
    Reconstruct {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Conservation report for a CPT scheme.
    CptReport {
        #[arg(long, default_value = "penrose5")]
        scheme: String,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long)]
        json: bool,
    },
    /// Perron-Frobenius eigenvalue, entropy and J-cost of substitution systems.
    Hierarchy {
        /// Include the four built-in systems (the default when no --lambda is given).
        #[arg(long)]
        builtin: bool,
        /// Extra system as NAME=LAMBDA; repeatable.
        #[arg(long = "lambda", value_name = "NAME=LAMBDA")]
        lambdas: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<Error>() {
            Some(e) => exit_code(e),
            None => 2,
        };
        Failure { code, error }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SingularPentagrid { .. } | Error::OnGridLine { .. } | Error::NonGenericWindow { .. } => 3,
        Error::MalformedTiling(_)
        | Error::UnknownVertex(_)
        | Error::InvalidGraph(_)
        | Error::InvalidScheme(_)
        | Error::MalformedWalk { .. }
        | Error::TooLarge { .. } => 2,
        Error::Domain(_) | Error::Disconnected { .. } | Error::Overflow | Error::Inconsistent(_) => 1,
    }
}

fn usage(msg: String) -> Failure {
    Failure { code: 2, error: anyhow::anyhow!(msg) }
}

fn max_cells() -> Result<u128, Failure> {
    match std::env::var("APERIODIC_MAX_CELLS") {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| *x >= 1.0)
            .map(|x| x as u128)
            .ok_or_else(|| usage(format!("APERIODIC_MAX_CELLS must be a positive number, got {v:?}"))),
        Err(_) => Ok(DEFAULT_MAX_CELLS),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(text)
}

fn load(path: &Path) -> Result<Tiling, Failure> {
    Ok(read_document(&read_input(path)?)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => match io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn load_scheme(name: &str) -> Result<CptScheme, Failure> {
    if cpt::builtin_names().contains(&name) {
        return Ok(cpt::builtin_scheme(name)?);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(usage(format!(
            "unknown scheme {name:?}; builtins are {:?} or pass a JSON config path",
            cpt::builtin_names()
        )));
    }
    let config: SchemeConfig = serde_json::from_str(&read_input(path)?)
        .map_err(|e| usage(format!("scheme config {}: {e}", path.display())))?;
    Ok(CptScheme::from_config(&config)?)
}

fn check_radius(radius: f64) -> Result<(), Failure> {
    if radius.is_finite() && radius >= 0.0 {
        Ok(())
    } else {
        Err(usage(format!("radius must be a non-negative number, got {radius}")))
    }
}

fn generate(kind: Kind, steps: usize, tile: SeedTile, radius: f64, offsets: &str, scheme: &str) -> Result<Tiling, Failure> {
    let cap = max_cells()?;
    match kind {
        Kind::P2 => {
            if 2 * steps > MAX_ROBINSON_STEPS {
                return Err(usage(format!("--steps {steps} exceeds {}", MAX_ROBINSON_STEPS / 2)));
            }
            let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
            let estimate = phi.powi(2 * steps as i32).ceil() as u128 * 2;
            if estimate > cap {
                return Err(Error::TooLarge { requested: estimate, limit: cap }.into());
            }
            let seed = match tile {
                SeedTile::Kite => Seed::Kite,
                SeedTile::Dart => Seed::Dart,
            };
            Ok(p2_patch(seed, steps)?)
        }
        Kind::Pentagrid => {
            check_radius(radius)?;
            let params = PentagridParams::new(PentagridParams::parse_offsets(offsets)?, radius)?;
            Ok(generate_pentagrid_capped(&params, Some(cap))?)
        }
        Kind::Cpt => {
            check_radius(radius)?;
            let s = load_scheme(scheme)?;
            Ok(cpt::generate_cpt_capped(&s, radius, Some(cap))?.to_tiling()?)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Generate { kind, steps, tile, radius, offsets, scheme, out, svg } => {
            let t = generate(kind, steps, tile, radius, &offsets, &scheme)?;
            log::info!("{} vertices, {} edges, {} tiles", t.vertices.len(), t.edges.len(), t.tiles.len());
            emit(out.as_deref(), &write_document(&t)?)?;
            if let Some(p) = svg {
                fs::write(&p, render_svg(&t, &SvgOptions::default()))?;
            }
            Ok(0)
        }
        Command::Validate { input, json, timing, out, svg, bars } => {
            let t = load(&input)?;
            let report = validate_parallel(&t)?;
            let text = if json {
                report_json(&report, timing)?
            } else {
                let mut s = format!(
                    "valid: {}\nedges checked: {}\nviolations: {}\n",
                    report.valid,
                    report.edges_checked,
                    report.violation_count()
                );
                for v in report.all_violations() {
                    s.push_str(&format!(
                        "  edge ({}, {}) family {}: tile {} says {}, tile {} says {}\n",
                        v.edge.0, v.edge.1, v.family, v.a_tile, v.a_val, v.b_tile, v.b_val
                    ));
                }
                s
            };
            emit(out.as_deref(), &text)?;
            if let Some(p) = svg {
                fs::write(&p, render_svg(&t, &SvgOptions { bars, violations: Some(&report), heights: None }))?;
            }
            Ok(if report.valid { 0 } else { 1 })
        }
        Command::Mutate { input, edge, seed, mode, which, out } => {
            let t = load(&input)?;
            let interior: Vec<usize> = (0..t.edges.len()).filter(|&i| !t.edges[i].boundary).collect();
            let edge = match edge {
                Some(e) if e >= t.edges.len() => return Err(usage(format!("edge {e} out of range 0..{}", t.edges.len()))),
                Some(e) if t.edges[e].boundary => {
                    return Err(usage(format!("edge {e} ({}, {}) is a boundary edge", t.edges[e].u, t.edges[e].v)))
                }
                Some(e) => e,
                None if interior.is_empty() => return Err(usage("document has no interior edge".into())),
                None => interior[StdRng::seed_from_u64(seed).gen_range(0..interior.len())],
            };
            let mode = match mode {
                Mode::Flip => InjectMode::Flip,
                Mode::Zero => InjectMode::Zero,
            };
            let which = match which {
                Side::A => Which::A,
                Side::B => Which::B,
            };
            let bad = inject_violation_with(&t, edge, which, mode).map_err(|e| Failure { code: 2, error: e.into() })?;
            log::info!("mutated edge {edge} ({}, {})", t.edges[edge].u, t.edges[edge].v);
            emit(out.as_deref(), &write_document(&bad)?)?;
            Ok(0)
        }
        Command::Heights { input, family, root, out, svg } => {
            let t = load(&input)?;
            if family >= t.families.max(1) {
                return Err(usage(format!("family {family} out of range 0..{}", t.families)));
            }
            match height_atlas(&t, root)? {
                AtlasOutcome::Atlas(atlas) => {
                    let heights: serde_json::Map<String, serde_json::Value> =
                        atlas.tuples.iter().enumerate().map(|(v, h)| (v.to_string(), json!(h))).collect();
                    emit(out.as_deref(), &to_canonical_json(&json!({ "root": atlas.root, "heights": heights }))?)?;
                    if let Some(p) = svg {
                        let h: Vec<i64> = atlas.tuples.iter().map(|x| x[family]).collect();
                        fs::write(&p, render_svg(&t, &SvgOptions { heights: Some(&h), ..Default::default() }))?;
                    }
                    Ok(0)
                }
                AtlasOutcome::Witnesses(w) => {
                    emit(out.as_deref(), &to_canonical_json(&json!({ "witnesses": w }))?)?;
                    Ok(1)
                }
            }
        }
        Command::Reconstruct { input, json } => {
            let t = load(&input)?;
            match height_atlas(&t, None)? {
                AtlasOutcome::Atlas(atlas) => {
                    let residual = reconstruction_check(&atlas, &t);
                    let collision = injectivity_check(&atlas);
                    let text = if json {
                        to_canonical_json(&json!({ "max_residual": residual, "collision": collision }))?
                    } else {
                        let c = collision.map_or("none".to_string(), |(a, b)| format!("vertices {a} and {b}"));
                        format!("max residual: {residual:.3e}\ntuple collision: {c}\n")
                    };
                    emit(None, &text)?;
                    Ok(if collision.is_some() { 1 } else { 0 })
                }
                AtlasOutcome::Witnesses(w) => {
                    emit(None, &to_canonical_json(&json!({ "witnesses": w }))?)?;
                    Ok(1)
                }
            }
        }
        Command::CptReport { scheme, radius, json } => {
            check_radius(radius)?;
            let s = load_scheme(&scheme)?;
            let patch = cpt::generate_cpt_capped(&s, radius, Some(max_cells()?))?;
            let report = cpt::conservation_report(&s, &patch)?;
            let text = if json {
                to_canonical_json(&report)?
            } else {
                let mut out = format!(
                    "scheme {} (N = {}, d = {}), {} points\n",
                    report.scheme,
                    report.n,
                    report.d,
                    patch.points.len()
                );
                for c in &report.conditions {
                    out.push_str(&format!("{:<4} {:<10} {}\n", c.condition, c.status.to_string(), c.evidence));
                }
                out.push_str(&format!("rank: {}\nrecognition gap rank: {}\n", report.rank, report.recognition_gap_rank));
                out
            };
            emit(None, &text)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Hierarchy { builtin, lambdas, json } => {
            let mut systems = if builtin || lambdas.is_empty() { builtin_systems() } else { Vec::new() };
            for l in &lambdas {
                let (name, value) = l
                    .split_once('=')
                    .and_then(|(n, v)| Some((n.to_string(), v.trim().parse::<f64>().ok()?)))
                    .ok_or_else(|| usage(format!("--lambda expects NAME=VALUE, got {l:?}")))?;
                systems.push((name, SystemSpec::Lambda(value)));
            }
            let rows = coherence_hierarchy(&systems)?;
            let text = if json { to_canonical_json(&rows)? } else { format_hierarchy(&rows) };
            emit(None, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
