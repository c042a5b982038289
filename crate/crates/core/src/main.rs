use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use morse_simplify::cli_io::{
    emit_diagram, parse_complex, random_dmf, run_experiment, scaling_probe, simplex_skeleton,
    ComplexDocument, DiagramDocument, ExperimentOptions, Format, ReductionDocument,
};
use morse_simplify::complex_core::LefschetzComplex;
use morse_simplify::simplification::{
    cancel_pair, simplify_all, MorseState, Policy, SimplifyOptions, TraceOptions,
};
use morse_simplify::{Error, Result};

#[derive(Parser)]
#[command(
    name = "morse-simplify",
    version,
    about = "Simplify discrete Morse functions on Lefschetz complexes"
)]
struct Cli {
    /// Compare the engine with a from-scratch reduction after each stage.
    #[arg(long, global = true)]
    verify: bool,
    /// Seed for generated functions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Svg,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
            OutFormat::Svg => Format::Svg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    ShallowFirstThenRegions,
    RegionsOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Check the complex and the function.
    Validate { input: PathBuf },
    /// Print the reduced boundary matrices and their duals.
    Reduce { input: PathBuf },
    /// Print the birth-death pairs.
    Pairs { input: PathBuf },
    /// Print the relations between pairs.
    Relations { input: PathBuf },
    /// Print the forbidden regions of the pair containing a cell.
    Regions { input: PathBuf, pair: String },
    /// Decide whether the pair containing a cell can be cancelled.
    Eligible { input: PathBuf, pair: String },
    /// Cancel the pair containing a cell and print the new complex document.
    Cancel { input: PathBuf, pair: String },
    /// Cancel every pair that can be cancelled.
    Simplify {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::ShallowFirstThenRegions)]
        policy: PolicyArg,
    },
    /// Print a complex document with a random function, for a file or a full simplex.
    RandomDmf {
        input: Option<PathBuf>,
        #[arg(long, conflicts_with = "input")]
        simplex: Option<usize>,
    },
    /// Simplify a random function on the full d-simplex and classify its pairs.
    Experiment {
        #[arg(long, default_value_t = 10)]
        d: usize,
        /// Number of consecutive seeds, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Seconds per seed before the report is flagged incomplete.
        #[arg(long)]
        budget: Option<u64>,
        /// Also time cancellations on simplices of dimension 7 to 10.
        #[arg(long)]
        scaling: bool,
        /// Off-diagonal pairs per simplex in the scaling probe.
        #[arg(long, default_value_t = 64)]
        scaling_pairs: usize,
    },
}

enum Failure {
    Validation(String),
    /// A report to print before exiting with a validation failure.
    Rejected(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

fn load_complex(
    path: &PathBuf,
) -> Result<(
    LefschetzComplex,
    Option<morse_simplify::complex_core::DiscreteMorseFunction>,
)> {
    parse_complex(&read_input(path)?)
}

/// A missing function is generated from the seed.
fn load_state(path: &PathBuf, seed: u64) -> Result<MorseState> {
    let (x, h) = load_complex(path)?;
    let h = h.unwrap_or_else(|| random_dmf(&x, seed));
    MorseState::new(Arc::new(x), h)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn check(ms: &MorseState, verify: bool) -> std::result::Result<(), Failure> {
    if verify {
        let d = ms.verify()?;
        if !d.is_empty() {
            return Err(Failure::Internal(format!("oracle mismatch: {d}")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Validation {
    valid: bool,
    cells: usize,
    problems: Vec<String>,
}

fn run(cli: Cli) -> std::result::Result<String, Failure> {
    let format = Format::from(cli.format);
    let out = match &cli.command {
        Command::Validate { input } => {
            let text = read_input(input)?;
            let (valid, cells, problems) = match parse_complex(&text) {
                Ok((x, _)) => (true, x.len(), Vec::new()),
                Err(Error::InvalidComplex(msg) | Error::InvalidDmf(msg)) => {
                    (false, 0, msg.split("; ").map(String::from).collect())
                }
                Err(e) => return Err(e.into()),
            };
            let out = json(&Validation {
                valid,
                cells,
                problems,
            });
            if !valid {
                return Err(Failure::Rejected(out));
            }
            out
        }
        Command::Reduce { input } => {
            let ms = load_state(input, cli.seed)?;
            check(&ms, cli.verify)?;
            ReductionDocument::of(ms.reduced()).to_json()
        }
        Command::Pairs { input } => {
            let ms = load_state(input, cli.seed)?;
            check(&ms, cli.verify)?;
            emit_diagram(&ms, format, false)?
        }
        Command::Relations { input } => {
            let ms = load_state(input, cli.seed)?;
            check(&ms, cli.verify)?;
            json(&DiagramDocument::of(&ms, false)?.relations)
        }
        Command::Regions { input, pair } => {
            let ms = load_state(input, cli.seed)?;
            check(&ms, cli.verify)?;
            let alpha = ms.pair_by_name(pair)?;
            match format {
                Format::Json => json(&ms.regions(&alpha)?),
                _ => emit_diagram(&ms, format, true)?,
            }
        }
        Command::Eligible { input, pair } => {
            let ms = load_state(input, cli.seed)?;
            let alpha = ms.pair_by_name(pair)?;
            let e = ms.eligibility(&alpha)?;
            #[derive(Serialize)]
            struct Out<'a> {
                summary: String,
                #[serde(flatten)]
                eligibility: &'a morse_simplify::forbidden_regions::Eligibility,
            }
            json(&Out {
                summary: e.describe(|c| ms.complex().name(c).to_string()),
                eligibility: &e,
            })
        }
        Command::Cancel { input, pair } => {
            let mut ms = load_state(input, cli.seed)?;
            let alpha = ms.pair_by_name(pair)?;
            let opts = TraceOptions {
                verify: cli.verify,
                ..Default::default()
            };
            let trace = cancel_pair(&mut ms, &alpha, &opts)?;
            eprintln!(
                "cancelled after {} moves; values changed by at most {}",
                trace.moves(),
                trace.max_change
            );
            match format {
                Format::Json => ComplexDocument::of(ms.complex(), Some(ms.function())).to_json(),
                _ => emit_diagram(&ms, format, false)?,
            }
        }
        Command::Simplify { input, policy } => {
            let mut ms = load_state(input, cli.seed)?;
            let policy = match policy {
                PolicyArg::ShallowFirstThenRegions => Policy::ShallowFirstThenRegions,
                PolicyArg::RegionsOnly => Policy::RegionsOnly,
            };
            let report = simplify_all(
                &mut ms,
                SimplifyOptions {
                    policy,
                    verify: cli.verify,
                    budget: None,
                },
            )?;
            match format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        report: morse_simplify::simplification::SimplifyReport,
                        result: ComplexDocument,
                    }
                    json(&Out {
                        report,
                        result: ComplexDocument::of(ms.complex(), Some(ms.function())),
                    })
                }
                _ => emit_diagram(&ms, format, false)?,
            }
        }
        Command::RandomDmf { input, simplex } => {
            let x = match (input, simplex) {
                (Some(p), _) => load_complex(p)?.0,
                (None, Some(d)) => simplex_skeleton(*d)?,
                (None, None) => {
                    return Err(Failure::Validation(
                        "give an input file or --simplex".into(),
                    ))
                }
            };
            let h = random_dmf(&x, cli.seed);
            ComplexDocument::of(&x, Some(&h)).to_json()
        }
        Command::Experiment {
            d,
            seeds,
            budget,
            scaling,
            scaling_pairs,
        } => {
            let mut reports = Vec::new();
            for seed in cli.seed..cli.seed + seeds {
                let opts = ExperimentOptions {
                    d: *d,
                    seed,
                    verify: cli.verify,
                    budget: budget.map(Duration::from_secs),
                    ..Default::default()
                };
                let r = run_experiment(&opts)?;
                eprintln!(
                    "seed {seed}: {} pairs, standard {}, region {}, not cancellable {}, {:.1}s{}",
                    r.simplify.c,
                    r.standard,
                    r.region,
                    r.not_cancellable,
                    r.seconds,
                    if r.incomplete { " (incomplete)" } else { "" }
                );
                reports.push(r);
            }
            if reports.iter().all(|r| r.region == 0) {
                eprintln!("no region-cancelled pair for any seed; flagged for inspection");
            }
            let scaling = if *scaling {
                Some(scaling_probe(&[7, 8, 9, 10], *scaling_pairs, &[cli.seed])?)
            } else {
                None
            };
            match format {
                Format::Csv => {
                    let mut s = String::from("seed,dim,class,count\n");
                    for r in &reports {
                        for (dim, m) in &r.classes {
                            for (class, k) in m {
                                let class = serde_json::to_value(class).unwrap();
                                s.push_str(&format!(
                                    "{},{dim},{},{k}\n",
                                    r.seed,
                                    class.as_str().unwrap()
                                ));
                            }
                        }
                    }
                    s
                }
                _ => {
                    #[derive(Serialize)]
                    struct Out<'a> {
                        experiments: &'a [morse_simplify::cli_io::ExperimentReport],
                        scaling: Option<morse_simplify::cli_io::ScalingReport>,
                    }
                    json(&Out {
                        experiments: &reports,
                        scaling,
                    })
                }
            }
        }
    };
    Ok(out)
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(out: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    if !out.ends_with('\n') {
        let _ = stdout.write_all(b"\n");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(Failure::Rejected(out)) => {
            emit(&out);
            ExitCode::from(1)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
