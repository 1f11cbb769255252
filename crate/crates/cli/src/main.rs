use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use realquad::arith::SetTag;
use realquad::classnum::{AnalyticParams, DEFAULT_GUARD};
use realquad::experiment::{self, rows, BuildOptions, DEFAULT_CHUNK_SPAN};
use realquad::heuristic::constants::p0_zeta_form;
use realquad::heuristic::{
    format_rational, identity_check, lambda, p0_constant, HeuristicConstants, LambdaValue, DEFAULT_PRIME_LIMIT,
    DEFAULT_ZETA_TERMS,
};
use realquad::store::read_table;
use realquad::Error;

/// Directory used for table paths that are not given explicitly.
const TABLE_DIR_VAR: &str = "REALQUAD_TABLE_DIR";

const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "realquad", version, about = "Class numbers of real quadratic fields against the lambda_q model")]
struct Cli {
    /// Output style: aligned text or comma-separated rows.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Rows,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Set {
    /// prime radicands
    #[value(name = "P", alias = "p")]
    P,
    /// squarefree radicands
    #[value(name = "A", alias = "a")]
    A,
}

impl From<Set> for SetTag {
    fn from(s: Set) -> SetTag {
        match s {
            Set::P => SetTag::PrimeSet,
            Set::A => SetTag::SquarefreeSet,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or extend a class-number table.
    Compute {
        #[arg(long, value_enum)]
        set: Set,
        /// Largest radicand.
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        max: u64,
        /// Defaults to p.tbl or a.tbl in $REALQUAD_TABLE_DIR (or the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to the available parallelism.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,
        /// Continue from the committed chunks already in the output file.
        #[arg(long)]
        resume: bool,
        #[arg(long, default_value_t = DEFAULT_CHUNK_SPAN, value_parser = clap::value_parser!(u64).range(1..))]
        chunk_span: u64,
        /// Largest accepted distance of an h estimate from an integer.
        #[arg(long, default_value_t = DEFAULT_GUARD)]
        guard: f64,
        /// Keep only this many terms of the L-sum (fault injection).
        #[arg(long, hide = true)]
        truncate_terms: Option<usize>,
    },
    /// Print lambda_q for odd q up to a bound.
    Lambda {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        max_q: u64,
        /// Show the prime-power factors of each value.
        #[arg(long)]
        trace: bool,
    },
    /// Print P_0 and the per-prime factors P(p does not divide h).
    Constants {
        #[arg(long, default_value_t = DEFAULT_ZETA_TERMS)]
        zeta_terms: u32,
        /// Primes up to this bound enter the direct cross-check product.
        #[arg(long, default_value_t = DEFAULT_PRIME_LIMIT)]
        prime_limit: u64,
        /// List per-prime factors for primes up to this bound.
        #[arg(long, default_value_t = 31)]
        list_limit: u64,
    },
    /// Compare both sides of the nested-fraction product identity.
    Identity {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 40)]
        depth: u32,
        /// Factors kept in the product side.
        #[arg(long, default_value_t = 64)]
        kmax: u32,
    },
    /// Class-number distribution of a table; for squarefree tables also the
    /// even-class-number structure.
    Stats {
        #[command(flatten)]
        input: TableInput,
        /// Even class numbers always listed in the even-structure report.
        #[arg(long, value_delimiter = ',', default_values_t = [6u64, 10, 12, 14, 18, 20])]
        focus: Vec<u64>,
    },
    /// Observed P(h=q)/P(h=1) against lambda_q.
    Compare {
        #[command(flatten)]
        input: TableInput,
        /// Spacing of the convergence series.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        step: u64,
    },
    /// (x, P(h=1), P_0) triples for plotting.
    Convergence {
        #[command(flatten)]
        input: TableInput,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        step: u64,
    },
    /// Validate a table file.
    Verify {
        #[command(flatten)]
        input: TableInput,
    },
}

#[derive(clap::Args, Debug)]
struct TableInput {
    /// Defaults to p.tbl or a.tbl (per --set) in $REALQUAD_TABLE_DIR.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Set::P)]
    set: Set,
    /// Number of fields counted, in table order. Defaults to the whole table.
    #[arg(long)]
    cutoff: Option<u64>,
}

impl TableInput {
    fn path(&self) -> PathBuf {
        table_path(self.table.clone(), self.set)
    }
}

fn table_path(given: Option<PathBuf>, set: Set) -> PathBuf {
    given.unwrap_or_else(|| {
        let dir = std::env::var_os(TABLE_DIR_VAR).map(PathBuf::from).unwrap_or_default();
        dir.join(match set {
            Set::P => "p.tbl",
            Set::A => "a.tbl",
        })
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { EXIT_INTERNAL } else { EXIT_INPUT })
        }
    }
}

fn run(cli: Cli, out: &mut impl Write) -> realquad::Result<()> {
    let format = cli.format;
    let text = match cli.command {
        Command::Compute { set, max, out: path, workers, resume, chunk_span, guard, truncate_terms } => {
            if !(guard > 0.0 && guard < 0.5) {
                return Err(Error::InvalidInput(format!("guard must lie in (0, 0.5), got {guard}")));
            }
            let path = table_path(path, set);
            let mut opts = BuildOptions { chunk_span, params: AnalyticParams { guard, truncate_terms }, ..Default::default() };
            if let Some(w) = workers {
                opts.workers = w as usize;
            }
            let (table, stats) = experiment::build_table(&path, set.into(), max, resume, &opts, &mut |p| {
                eprintln!("d <= {} of {}: {} records", p.frontier, p.limit, p.records);
            })?;
            match format {
                Format::Text => format!(
                    "{}: {} records, d <= {}\nfields computed this run: {}, max rounding distance {:.3e} (D = {})\n",
                    path.display(),
                    table.records.len(),
                    table.frontier(),
                    stats.fields,
                    stats.max_distance,
                    stats.worst_disc
                ),
                Format::Rows => format!(
                    "meta,path,{}\nmeta,records,{}\nmeta,frontier,{}\nmeta,fields_computed,{}\nmeta,max_distance,{}\nmeta,worst_disc,{}\n",
                    path.display(),
                    table.records.len(),
                    table.frontier(),
                    stats.fields,
                    stats.max_distance,
                    stats.worst_disc
                ),
            }
        }
        Command::Lambda { max_q, trace } => {
            let values = (1..=max_q).step_by(2).map(lambda).collect::<realquad::Result<Vec<LambdaValue>>>()?;
            match format {
                Format::Rows => rows::lambda_to_rows(&values),
                Format::Text => {
                    let mut s = String::new();
                    for v in &values {
                        s.push_str(&format!("{} {}", v.q, v));
                        if trace && !v.factor_trace.is_empty() {
                            let parts: Vec<String> = v
                                .factor_trace
                                .iter()
                                .map(|f| format!("lambda({}^{}) = {}", f.prime, f.exponent, format_rational(&f.value)))
                                .collect();
                            s.push_str(&format!("    [{}]", parts.join(" * ")));
                        }
                        s.push('\n');
                    }
                    s
                }
            }
        }
        Command::Constants { zeta_terms, prime_limit, list_limit } => {
            let eval = p0_constant(prime_limit, zeta_terms)?;
            let per_prime = HeuristicConstants::new(zeta_terms, list_limit).per_prime_nondiv;
            match format {
                Format::Text => {
                    let mut s = format!(
                        "P_0 = {} (zeta form, {} factors, tail bound {:.1e})\n    ~ {}\n",
                        eval.zeta_form.to_decimal(40),
                        zeta_terms,
                        eval.zeta_tail,
                        eval.zeta_form.to_decimal(5)
                    );
                    s.push_str(&format!(
                        "direct product over odd primes <= {}: {} (tail bound {:.1e})\n|difference| = {:.3e}\n",
                        prime_limit,
                        eval.direct.to_decimal(20),
                        eval.direct_tail,
                        eval.difference()
                    ));
                    s.push_str("P(p does not divide h):\n");
                    for (p, v) in &per_prime {
                        s.push_str(&format!("{p:>7} {}\n", v.to_decimal(20)));
                    }
                    s
                }
                Format::Rows => {
                    let mut s = format!(
                        "meta,p0,{}\nmeta,p0_tail,{}\nmeta,p0_direct,{}\nmeta,p0_direct_tail,{}\nmeta,prime_limit,{}\nmeta,zeta_terms,{}\n",
                        eval.zeta_form.to_decimal(40),
                        eval.zeta_tail,
                        eval.direct.to_decimal(40),
                        eval.direct_tail,
                        prime_limit,
                        zeta_terms
                    );
                    for (p, v) in &per_prime {
                        s.push_str(&format!("nondiv,{p},{}\n", v.to_decimal(40)));
                    }
                    s
                }
            }
        }
        Command::Identity { p, depth, kmax } => {
            let c = identity_check(p, depth, kmax)?;
            match format {
                Format::Text => format!(
                    "p = {p}\nnested, depth {depth}:  {}\nproduct, k <= {kmax}:  {}\n|difference| = {:.3e}\n",
                    c.nested.to_decimal(40),
                    c.product.to_decimal(40),
                    c.difference()
                ),
                Format::Rows => format!(
                    "meta,p,{p}\nmeta,depth,{depth}\nmeta,kmax,{kmax}\nmeta,nested,{}\nmeta,product,{}\nmeta,difference,{}\n",
                    c.nested.to_decimal(40),
                    c.product.to_decimal(40),
                    c.difference()
                ),
            }
        }
        Command::Stats { input, focus } => {
            let table = read_table(&input.path())?;
            let cutoff = input.cutoff.unwrap_or(table.records.len() as u64);
            let dist = experiment::empirical_distribution(&table, cutoff)?;
            let even = if dist.set_tag == SetTag::SquarefreeSet {
                let p0 = p0_zeta_form(DEFAULT_ZETA_TERMS).to_f64();
                Some(experiment::even_structure_report(&dist, p0, &focus)?)
            } else {
                None
            };
            match format {
                Format::Rows => {
                    let mut s = rows::distribution_to_rows(&dist);
                    if let Some(e) = &even {
                        s.push_str(&rows::even_to_rows(e));
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!("set {}  x = {}\n{:>7} {:>9} {:>10}\n", dist.set_tag, dist.cutoff_x, "h", "count", "P(h)");
                    for (h, c) in &dist.counts {
                        s.push_str(&format!("{h:>7} {c:>9} {:>10.6}\n", dist.p_hat(*h)));
                    }
                    if let Some(e) = &even {
                        s.push('\n');
                        s.push_str(&e.to_string());
                    }
                    s
                }
            }
        }
        Command::Compare { input, step } => {
            let table = read_table(&input.path())?;
            let cutoff = input.cutoff.unwrap_or(table.records.len() as u64);
            let report = experiment::compare_table(&table, cutoff, step)?;
            match format {
                Format::Rows => rows::comparison_to_rows(&report),
                Format::Text => report.to_string(),
            }
        }
        Command::Convergence { input, step } => {
            let table = read_table(&input.path())?;
            let cutoff = input.cutoff.unwrap_or(table.records.len() as u64);
            let series = experiment::compare_table(&table, cutoff, step)?.convergence_series;
            let p0 = p0_zeta_form(DEFAULT_ZETA_TERMS).to_f64();
            match format {
                Format::Rows => rows::convergence_to_rows(&series, p0),
                Format::Text => {
                    let mut s = format!("{:>10} {:>10} {:>10}\n", "x", "P(h=1)", "P_0");
                    for (x, p) in &series {
                        s.push_str(&format!("{x:>10} {p:>10.6} {p0:>10.6}\n"));
                    }
                    s
                }
            }
        }
        Command::Verify { input } => {
            let path = input.path();
            let table = read_table(&path)?;
            match format {
                Format::Text => format!(
                    "{}: ok, set {}, {} records in {} chunks, d <= {} (limit {})\n",
                    path.display(),
                    table.header.set_tag,
                    table.records.len(),
                    table.chunks.len(),
                    table.frontier(),
                    table.header.limit
                ),
                Format::Rows => format!(
                    "meta,set,{}\nmeta,records,{}\nmeta,chunks,{}\nmeta,frontier,{}\nmeta,limit,{}\n",
                    table.header.set_tag,
                    table.records.len(),
                    table.chunks.len(),
                    table.frontier(),
                    table.header.limit
                ),
            }
        }
    };
    out.write_all(text.as_bytes()).map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
}
