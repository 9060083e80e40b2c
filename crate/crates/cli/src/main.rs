use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cdq::cores::compute_core;
use cdq::decision::{
    attach_counterexample, countd_equivalent_with, cq_equivalent_certified, DecisionOptions, Semantics as Search,
};
use cdq::eval::{eval_bag, eval_countd, eval_ga, eval_semiring, eval_set, render_map, render_set, Boolean, Natural};
use cdq::flipset::flip;
use cdq::fuzz::{run_fuzz, FuzzConfig};
use cdq::ir::{parse_database, parse_database_with, parse_query};
use cdq::order::normalize_equalities;
use cdq::{Error, Query, Rational};

/// Exit codes.
mod code {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const UNSATISFIABLE: u8 = 2;
    pub const NOT_EQUIVALENT: u8 = 3;
    pub const ARITY: u8 = 4;
    pub const MISMATCH: u8 = 5;
    pub const DISCREPANCY: u8 = 6;
    pub const BOUND: u8 = 7;
}

#[derive(Parser)]
#[command(name = "cdq", version, about = "Equivalence of count-distinct queries with order comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cq,
    Countd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Semantics {
    Set,
    Bag,
    Countd,
    Ga,
    Nat,
    Bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print a query (or database) in canonical form.
    Parse {
        file: PathBuf,
        /// Read the file as a database instead of a query.
        #[arg(long)]
        database: bool,
    },
    /// Print the core of a query.
    Core { file: PathBuf },
    /// Print the flip of a count-distinct query.
    Flip { file: PathBuf },
    /// Decide whether two queries are equivalent.
    Equiv {
        q1: PathBuf,
        q2: PathBuf,
        #[arg(long, value_enum, default_value = "countd")]
        mode: Mode,
        /// Domain bound for the separating-database search on a negative verdict.
        #[arg(long, default_value_t = 3)]
        max_adom: usize,
        /// Per-relation fact bound for the separating-database search.
        #[arg(long, default_value_t = 3)]
        max_facts: usize,
        #[arg(long, hide = true)]
        no_flip: bool,
    },
    /// Evaluate a query over a database.
    Eval {
        query: PathBuf,
        database: PathBuf,
        #[arg(long, value_enum)]
        semantics: Semantics,
    },
    /// Cross-check the decision procedure against evaluation on random pairs.
    Fuzz {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_adom: usize,
        #[arg(long, default_value_t = 3)]
        max_facts: usize,
        #[arg(long, default_value_t = 50)]
        num_pairs: usize,
        /// Check every database within the bounds instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        /// Databases sampled per pair without --exhaustive.
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, hide = true)]
        no_flip: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Failure { code, message: message.to_string() }
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Syntax { .. }
        | Error::Unsafe(_)
        | Error::ArityConflict { .. }
        | Error::DuplicateHeadVar(_)
        | Error::AggregateInGroupBy(_)
        | Error::AnnotationMismatch { .. } => code::INPUT,
        Error::Unsatisfiable | Error::ConstantClash(..) => code::UNSATISFIABLE,
        Error::ArityMismatch { .. } => code::ARITY,
        Error::WrongQueryKind { .. } | Error::EqualityPresent(_) | Error::Precondition(_) => code::MISMATCH,
        Error::BoundExceeded { .. } => code::BOUND,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(code::INPUT, format!("{}: {e}", path.display())))
}

fn with_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::new(error_code(&e), format!("{}: {e}", path.display()))
}

fn fail(e: Error) -> Failure {
    Failure::new(error_code(&e), e)
}

fn load_query(path: &Path) -> Result<Query, Failure> {
    parse_query(&read(path)?).map_err(with_path(path))
}

fn normalized(path: &Path) -> Result<Query, Failure> {
    let q = load_query(path)?;
    let n = normalize_equalities(&q).map_err(with_path(path))?;
    for (a, b) in &n.collapsed {
        eprintln!("note: {a} and {b} are forced equal");
    }
    Ok(n.query)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Parse { file, database } => {
            let text = read(&file)?;
            if database {
                let db: cdq::Database = parse_database(&text).map_err(with_path(&file))?;
                print!("{db}");
            } else {
                println!("{}", parse_query::<Rational>(&text).map_err(with_path(&file))?);
            }
            Ok(code::OK)
        }
        Command::Core { file } => {
            let q = normalized(&file)?;
            println!("{}", compute_core(&q).map_err(with_path(&file))?);
            Ok(code::OK)
        }
        Command::Flip { file } => {
            let q = normalized(&file)?;
            println!("{}", flip(&q).map_err(with_path(&file))?);
            Ok(code::OK)
        }
        Command::Equiv { q1, q2, mode, max_adom, max_facts, no_flip } => {
            let (a, b) = (load_query(&q1)?, load_query(&q2)?);
            let (mut cert, search) = match mode {
                Mode::Cq => (cq_equivalent_certified(&a, &b).map_err(fail)?, Search::Set),
                Mode::Countd => {
                    let opts = DecisionOptions { use_flip: !no_flip };
                    (countd_equivalent_with(&a, &b, &opts).map_err(fail)?, Search::CountDistinct)
                }
            };
            if !cert.is_equivalent() {
                if let Err(e) = attach_counterexample(&mut cert, &a, &b, search, max_adom, max_facts) {
                    eprintln!("note: no separating database search: {e}");
                }
            }
            print!("{cert}");
            Ok(if cert.is_equivalent() { code::OK } else { code::NOT_EQUIVALENT })
        }
        Command::Eval { query, database, semantics } => {
            let q = load_query(&query)?;
            let text = read(&database)?;
            let out = match semantics {
                Semantics::Nat => {
                    let db = parse_database_with(&text, &Natural).map_err(with_path(&database))?;
                    render_map(&eval_semiring(&q, &db, &Natural).map_err(fail)?)
                }
                Semantics::Bool => {
                    let db = parse_database_with(&text, &Boolean).map_err(with_path(&database))?;
                    render_map(&eval_semiring(&q, &db, &Boolean).map_err(fail)?)
                }
                _ => {
                    let db: cdq::Database = parse_database(&text).map_err(with_path(&database))?;
                    match semantics {
                        Semantics::Set => render_set(&eval_set(&q, &db).map_err(fail)?),
                        Semantics::Bag => render_map(&eval_bag(&q, &db).map_err(fail)?),
                        Semantics::Countd => render_map(&eval_countd(&q, &db).map_err(fail)?),
                        _ => eval_ga(&q, &db).map_err(fail)?.to_string(),
                    }
                }
            };
            print!("{out}");
            Ok(code::OK)
        }
        Command::Fuzz { seed, max_adom, max_facts, num_pairs, exhaustive, samples, no_flip } => {
            let cfg = FuzzConfig {
                seed,
                max_adom,
                max_facts,
                num_pairs,
                exhaustive,
                samples,
                decision: DecisionOptions { use_flip: !no_flip },
                ..FuzzConfig::default()
            };
            let report = run_fuzz::<Rational>(&cfg).map_err(fail)?;
            print!("{report}");
            Ok(if report.is_clean() { code::OK } else { code::DISCREPANCY })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) => ExitCode::from(c),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
