//! `graftlab` command line: verification suites, holonomy export and
//! grafting.

pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use graftlab_core::holonomy::{build_rep, ComplexFNPoint, RepDocument};
use graftlab_core::schlafli::TetrahedronAngles;
use graftlab_core::surface::canonical_chain;
use graftlab_core::symplectic::{graft, MultiCurveWeights, MAX_BENDING};

use report::{to_json, VerificationReport};
use suites::{run_suite, Suite, SuiteError, SuiteParams};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "graftlab", version, about = "Numerical checks for grafting, Goldman's form and the Schläfli formula")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Central-difference step.
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
        /// Pass threshold; defaults to the suite's own.
        #[arg(long)]
        tol: Option<f64>,
        /// Tetrahedron for the schlafli suite, as a JSON array of six
        /// interior dihedral angles in radians.
        #[arg(long)]
        angles: Option<String>,
    },
    /// Holonomy representations.
    Rep {
        #[command(subcommand)]
        command: RepCommand,
    },
    /// Bend a Fuchsian point along the pants curves.
    Graft {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
        /// Bending weights, one per pants curve (default all 0).
        #[arg(long)]
        weights: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum RepCommand {
    /// Build the holonomy of a real Fenchel–Nielsen point.
    Build {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: PointArgs,
    },
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 2)]
    genus: usize,
    /// Write JSON output to this file.
    #[arg(long)]
    json: Option<PathBuf>,
    /// No human-readable summary.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Lengths, `1,1,1` or `[1,1,1]` (default all 1).
    #[arg(long, allow_hyphen_values = true)]
    lengths: Option<String>,
    /// Twists (default all 0).
    #[arg(long, allow_hyphen_values = true)]
    twists: Option<String>,
}

struct Usage(String);

fn parse_list(text: &str, n: usize, what: &str) -> Result<Vec<f64>, Usage> {
    let t = text.trim();
    let values: Vec<f64> = if t.starts_with('[') {
        serde_json::from_str(t).map_err(|e| Usage(format!("{what}: {e}")))?
    } else {
        t.split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Usage(format!("{what}: {e}")))?
    };
    if values.len() != n {
        return Err(Usage(format!("{what}: expected {n} values, got {}", values.len())));
    }
    Ok(values)
}

fn check_genus(genus: usize) -> Result<(), Usage> {
    if genus < 2 {
        Err(Usage(format!("genus must be at least 2, got {genus}")))
    } else {
        Ok(())
    }
}

fn read_point(genus: usize, p: &PointArgs) -> Result<ComplexFNPoint, Usage> {
    let n = 3 * genus - 3;
    let lengths = match &p.lengths {
        Some(s) => parse_list(s, n, "--lengths")?,
        None => vec![1.0; n],
    };
    let twists = match &p.twists {
        Some(s) => parse_list(s, n, "--twists")?,
        None => vec![0.0; n],
    };
    Ok(ComplexFNPoint::real(&lengths, &twists))
}

fn emit<T: Serialize>(value: &T, common: &Common) -> Result<(), Usage> {
    let text = to_json(value);
    match &common.json {
        Some(path) => std::fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(r: &VerificationReport) {
    let verdict = if r.summary.pass { "PASS" } else { "FAIL" };
    let failed = r.samples.iter().filter(|s| !s.ok).count();
    println!(
        "{} (genus {}, seed {}, h {:e}): {verdict}, max defect {:.3e} (tol {:e}), {} records, {failed} failing",
        r.suite,
        r.genus,
        r.seed,
        r.h,
        r.summary.max_defect,
        r.tol,
        r.samples.len()
    );
    let est = &r.summary.constant_estimates;
    if let Some(k) = est.kappa {
        println!("  kappa = {:.12} {:+.3e}i", k.re, k.im);
        if let Some(q) = est.pullback_ratio {
            let z = num_complex::Complex64::new(q.re, q.im) / num_complex::Complex64::new(k.re, k.im);
            println!("  G/(A+iB) = {:.12} {:+.3e}i, ratio/kappa = {:.12} {:+.3e}i", q.re, q.im, z.re, z.im);
        }
    }
    for s in r.samples.iter().filter(|s| !s.ok).take(5) {
        println!("  failing: #{} {} defect {:.3e} > {:e}", s.index, s.label, s.defect, s.tolerance);
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("GRAFTLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Usage> {
    match cli.command {
        Command::Verify {
            suite,
            common,
            samples,
            seed,
            fd_step,
            tol,
            angles,
        } => {
            check_genus(common.genus)?;
            let angles = match angles {
                Some(text) => {
                    let theta = parse_list(&text, 6, "--angles")?;
                    let theta: [f64; 6] = theta.try_into().expect("length checked");
                    Some(TetrahedronAngles::new(theta).map_err(|e| Usage(e.to_string()))?)
                }
                None => None,
            };
            let params = SuiteParams {
                genus: common.genus,
                samples,
                seed,
                h: fd_step,
                tol: tol.unwrap_or(suite.default_tol()),
                angles,
            };
            let report = match run_suite(suite, &params) {
                Ok(r) => r,
                Err(SuiteError::Usage(m)) => return Err(Usage(m)),
                Err(SuiteError::Failed(m)) => {
                    eprintln!("{}: {m}", suite.name());
                    return Ok(EXIT_FAIL);
                }
            };
            if common.json.is_some() {
                emit(&report, &common)?;
            }
            if !common.quiet {
                summarize(&report);
            }
            Ok(if report.summary.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Rep {
            command: RepCommand::Build { common, point },
        } => {
            check_genus(common.genus)?;
            let m = read_point(common.genus, &point)?;
            let (d, _) = canonical_chain(common.genus).map_err(|e| Usage(e.to_string()))?;
            let rep = build_rep(&d, &m).map_err(|e| Usage(e.to_string()))?;
            let doc = rep.document();
            emit(&doc, &common)?;
            if !common.quiet && common.json.is_some() {
                println!(
                    "genus {}: {} generators, relator residual {:.3e}",
                    doc.genus,
                    doc.generators.len(),
                    doc.relator_residual
                );
            }
            Ok(if doc.relator_residual <= 1e-9 { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Graft { common, point, weights } => {
            check_genus(common.genus)?;
            let m = read_point(common.genus, &point)?;
            let n = m.dim();
            let t = match weights {
                Some(s) => parse_list(&s, n, "--weights")?,
                None => vec![0.0; n],
            };
            let (d, _) = canonical_chain(common.genus).map_err(|e| Usage(e.to_string()))?;
            let (bent, rep) = graft(&d, &m, &MultiCurveWeights::new(t.clone())).map_err(|e| Usage(e.to_string()))?;
            #[derive(Serialize)]
            struct GraftOutput {
                weights: Vec<f64>,
                bending_cap: f64,
                point: ComplexFNPoint,
                representation: RepDocument,
            }
            let out = GraftOutput {
                weights: t,
                bending_cap: MAX_BENDING,
                point: bent,
                representation: rep.document(),
            };
            emit(&out, &common)?;
            if !common.quiet && common.json.is_some() {
                println!("grafted genus {} point, relator residual {:.3e}", common.genus, out.representation.relator_residual);
            }
            Ok(if out.representation.relator_residual <= 1e-9 { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code: 0 pass, 1 fail, 2 usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    configure_threads();
    match dispatch(cli) {
        Ok(code) => code,
        Err(Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
    }
}
