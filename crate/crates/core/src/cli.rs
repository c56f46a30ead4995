//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 computation failure.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::json;

use crate::analysis::{density, emit_report, smallest_runs, ReportFormat};
use crate::dynamics::{
    classify_with, descent_bound, enumerate_attractors, AttractorId, ClassifyOptions, Exponent,
    DEFAULT_ITERATION_CAP,
};
use crate::error::Error;
use crate::factoradic::{FactoradicRep, Natural};
use crate::towers::{builtin_offset, build_sequence, nice_check, DEFAULT_NICE_CAP};

pub const THREADS_ENV: &str = "FACTHAPPY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "facthappy", version, about = "Factoradic happy number toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Json => ReportFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert between decimal and factoradic text (e.g. 2020 <-> 2.4.4.0.2.0!)
    Convert {
        #[arg(required_unless_present = "digits", conflicts_with = "digits")]
        n: Option<Natural>,
        #[arg(long)]
        digits: Option<String>,
    },
    /// Follow the orbit of n to its fixed point or cycle
    Orbit {
        n: Natural,
        #[arg(long)]
        e: u32,
        /// One line per step: step, value, factoradic digits
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_ITERATION_CAP)]
        cap: u64,
    },
    /// List every fixed point and cycle
    Attractors {
        #[arg(long)]
        e: u32,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Show the certified descent bound M_e
    Bound {
        #[arg(long)]
        e: u32,
    },
    /// Check that U_e + l iterates to the fixed point p
    Nice {
        #[arg(long)]
        e: u32,
        #[arg(long)]
        p: Natural,
        #[arg(long)]
        l: Natural,
        #[arg(long, default_value_t = DEFAULT_NICE_CAP)]
        cap: u64,
    },
    /// Certify m consecutive integers that iterate to p
    Build {
        #[arg(long)]
        e: u32,
        #[arg(long)]
        p: Natural,
        #[arg(long)]
        m: u64,
        /// Offset; defaults to the built-in witness for (e, p)
        #[arg(long)]
        l: Option<Natural>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Smallest runs of m consecutive p-happy numbers
    Runs {
        #[arg(long)]
        e: u32,
        #[arg(long, default_value = "1")]
        p: Natural,
        #[arg(long = "max-m")]
        max_m: u64,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=2))]
        floor: u64,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Count how many n in [1, upper] reach each attractor
    Density {
        #[arg(long)]
        e: u32,
        #[arg(long)]
        upper: u64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

enum Failure {
    Usage(String),
    Compute(Error),
    Partial(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        if err.is_usage() {
            Failure::Usage(format!("{}: {}", err.kind(), err))
        } else {
            Failure::Compute(err)
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Partial(format!("io: {err}"))
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "error: usage: {first}");
            return 1;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: usage: {msg}");
            1
        }
        Err(Failure::Compute(e)) => {
            let _ = writeln!(err, "error: {}: {}", e.kind(), e);
            2
        }
        Err(Failure::Partial(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn exponent(e: u32) -> Result<Exponent, Failure> {
    Ok(Exponent::new(e)?)
}

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(text) => match text.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!(
                "invalid-argument: {THREADS_ENV} must be a positive integer, got {text:?}"
            ))),
        },
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Convert { n, digits } => {
            if let Some(text) = digits {
                let rep: FactoradicRep = text.parse()?;
                writeln!(out, "{}", rep.to_natural())?;
            } else if let Some(n) = n {
                writeln!(out, "{}", FactoradicRep::from_natural(&n))?;
            }
        }
        Command::Orbit { n, e, trace, cap } => {
            let e = exponent(e)?;
            let opts = ClassifyOptions {
                atlas: None,
                cap,
                trace,
            };
            let report = classify_with(&n, e, opts)?;
            if let Some(trajectory) = &report.trajectory {
                for (step, value) in trajectory.iter().enumerate() {
                    writeln!(out, "{step}\t{value}\t{}", FactoradicRep::from_natural(value))?;
                }
            } else {
                writeln!(out, "start: {}", report.start)?;
                writeln!(out, "e: {}", report.e)?;
                writeln!(out, "kind: {}", report.attractor.kind())?;
                writeln!(out, "attractor: {}", report.attractor)?;
                writeln!(out, "steps: {}", report.steps_to_attractor)?;
            }
        }
        Command::Attractors { e, format } => {
            let e = exponent(e)?;
            let atlas = enumerate_attractors(e)?;
            match format {
                Some(Format::Csv) => write!(out, "{}", atlas.to_csv())?,
                Some(Format::Json) => {
                    let cycles: Vec<Vec<Option<u64>>> = atlas
                        .cycles()
                        .iter()
                        .map(|c| c.members().iter().map(|m| m.to_u64()).collect())
                        .collect();
                    let value = json!({
                        "e": e.get(),
                        "bound": atlas.bound(),
                        "fixed_points": atlas.fixed_points().iter().map(|p| p.to_u64()).collect::<Vec<_>>(),
                        "cycles": cycles,
                    });
                    writeln!(out, "{}", serde_json::to_string_pretty(&value).unwrap_or_default())?;
                }
                None => {
                    let fixed: Vec<String> =
                        atlas.fixed_points().iter().map(|p| p.to_string()).collect();
                    writeln!(out, "e: {e}")?;
                    writeln!(out, "M_e: {}", atlas.bound())?;
                    writeln!(out, "fixed points: {}", fixed.join(", "))?;
                    if atlas.cycles().is_empty() {
                        writeln!(out, "cycles: none")?;
                    }
                    for cycle in atlas.cycles() {
                        let members = cycle.members();
                        let mut path: Vec<String> = members.iter().map(|m| m.to_string()).collect();
                        path.push(members[0].to_string());
                        writeln!(out, "cycle: {}", path.join(" -> "))?;
                    }
                }
            }
        }
        Command::Bound { e } => {
            let e = exponent(e)?;
            let bound = descent_bound(e);
            writeln!(out, "e: {e}")?;
            writeln!(out, "j_e: {}", bound.j)?;
            writeln!(out, "M_e: {}", bound.bound)?;
            writeln!(out, "tail_offset: {}", bound.tail_offset)?;
            writeln!(out, "base_case: {}", bound.checks.base_case)?;
            writeln!(out, "induction_step: {}", bound.checks.induction_step)?;
            writeln!(out, "dominance: {}", bound.checks.dominance)?;
            writeln!(out, "certificate_ok: {}", bound.certificate_ok())?;
            bound.ensure_certified()?;
        }
        Command::Nice { e, p, l, cap } => {
            let e = exponent(e)?;
            let atlas = enumerate_attractors(e)?;
            let witness = nice_check(e, &p, &l, &atlas, cap)?;
            writeln!(out, "e: {e}\np: {p}\nl: {l}")?;
            for (u, q) in &witness.steps {
                writeln!(out, "u={u}\tl+u={}\tq={q}", &l + u)?;
            }
        }
        Command::Build { e, p, m, l, format } => {
            let e = exponent(e)?;
            let atlas = enumerate_attractors(e)?;
            let l = match l {
                Some(l) => l,
                None => builtin_offset(e, &p).ok_or_else(|| {
                    Failure::Usage(format!(
                        "invalid-argument: no built-in offset for e={e}, p={p}; pass --l"
                    ))
                })?,
            };
            let witness = nice_check(e, &p, &l, &atlas, DEFAULT_NICE_CAP)?;
            let certificate = build_sequence(e, &p, m, &witness, &atlas)?;
            match format {
                Some(Format::Json) => writeln!(out, "{}", certificate.to_json())?,
                Some(Format::Csv) => {
                    writeln!(out, "i,steps")?;
                    for step in &certificate.per_i {
                        writeln!(out, "{},{}", step.i, step.steps)?;
                    }
                }
                None => {
                    writeln!(out, "e: {e}\np: {p}\nm: {m}\nl: {l}")?;
                    writeln!(out, "t: {}\nr: {}", certificate.t, certificate.r)?;
                    writeln!(out, "size: {}", certificate.size_note)?;
                    for step in &certificate.per_i {
                        writeln!(out, "i={}\tsteps={}", step.i, step.steps)?;
                    }
                    writeln!(out, "replay: ok")?;
                }
            }
        }
        Command::Runs {
            e,
            p,
            max_m,
            floor,
            cap,
            format,
        } => {
            let e = exponent(e)?;
            let atlas = enumerate_attractors(e)?;
            let search = smallest_runs(e, &p, max_m, floor, cap, &atlas)?;
            match format {
                Some(format) => write!(out, "{}", emit_report(search.records.as_slice(), format.into()))?,
                None => {
                    for record in &search.records {
                        writeln!(out, "m={}\tstart={}", record.m, record.start)?;
                    }
                }
            }
            if !search.complete {
                return Err(Failure::Partial(format!(
                    "search-cap: resolved m <= {} of {} below {}",
                    search.records.len(),
                    search.m_max,
                    search.search_cap
                )));
            }
        }
        Command::Density { e, upper, format } => {
            let e = exponent(e)?;
            let threads = thread_count()?;
            let atlas = enumerate_attractors(e)?;
            let report = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|err| Failure::Partial(format!("threads: {err}")))?
                    .install(|| density(e, upper, &atlas))?,
                None => density(e, upper, &atlas)?,
            };
            match format {
                Some(format) => write!(out, "{}", emit_report(&report, format.into()))?,
                None => {
                    writeln!(out, "e: {e}\ninterval: [1, {upper}]")?;
                    for row in &report.rows {
                        let label = match &row.attractor {
                            AttractorId::FixedPoint(p) => format!("fixed {p}"),
                            cycle => format!("cycle {cycle}"),
                        };
                        let share = row.count as f64 / upper as f64;
                        writeln!(out, "{label}\t{}/{upper}\t{share:.4}", row.count)?;
                    }
                }
            }
        }
    }
    Ok(())
}
