//! Command-line surface. Every command is deterministic given its flags
//! and seed; heavy evaluation parallelizes through rayon, capped by the
//! `PUQCA_THREADS` environment variable when set.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dct::{self, Backend, ClassifierSpec};
use crate::fermion::{self, Boundary, OccupationSet};
use crate::ga::{self, Aggregation, GAConfig, ObjectiveSpec, RuleMode};
use crate::model::{
    parse_rule, serialize_rule, Configuration, FermionRule, RuleSpec,
};
use crate::statevector::{evolve, marginal_profile};
use crate::verify::{self, TableFamily};
use crate::{Error, Result};

/// Environment variable capping rayon worker threads.
pub const THREADS_ENV: &str = "PUQCA_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MODE: i32 = 3;

/// CSV cell with 17 significant digits (round-trip safe for f64).
fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Parser)]
#[command(
    name = "puqca",
    version,
    about = "Partitioned unitary QCA: density classification, fermionic fast path, rule search",
    after_help = "Set PUQCA_THREADS to cap worker threads (default: available parallelism)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact (or sampled) classification fitness of a rule file.
    Eval(EvalArgs),
    /// Per-site excitation probabilities after t steps from one input.
    Profile(ProfileArgs),
    /// Evolutionary search for classifier rules.
    Search(SearchArgs),
    /// Recompute the embedded reference tables and report matches.
    VerifyTables(VerifyTablesArgs),
    /// Closed-form classical bound F_C(n).
    Bound(BoundArgs),
    /// Random cross-checks of the fermionic path against the statevector.
    Crosscheck(CrosscheckArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Rule file (JSON, schema 1).
    rule: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    /// Readout site.
    #[arg(long)]
    p: usize,
    /// Guessing margin δ.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Weight-sector fast path for full rules (the default).
    #[arg(long, conflicts_with = "dense")]
    sector_fast: bool,
    /// Full 2^n statevector per input (audit path).
    #[arg(long)]
    dense: bool,
    /// Momentum grid for fermionic rules.
    #[arg(long, value_enum, default_value_t = BoundaryArg::WeightParity)]
    boundary: BoundaryArg,
    /// Estimate from this many sampled inputs instead of enumerating.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write misclassified configurations to this CSV file.
    #[arg(long)]
    misclassified_out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Rule file (JSON, schema 1).
    rule: PathBuf,
    /// Input configuration as a bit string, site 0 first.
    input: String,
    #[arg(long)]
    t: usize,
    /// Evaluate through the momentum-space fermionic path.
    #[arg(long)]
    fermion: bool,
    #[arg(long, value_enum, default_value_t = BoundaryArg::WeightParity)]
    boundary: BoundaryArg,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, required_unless_present = "sizes")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "sizes")]
    t: Option<usize>,
    /// Comma-separated n:t pairs for a multi-size objective, e.g. 4:2,6:3,8:4.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    #[arg(long, default_value_t = 100)]
    gens: usize,
    /// Per-gene mutation rate.
    #[arg(long, default_value_t = 0.36)]
    pm: f64,
    /// Mutation standard deviation.
    #[arg(long, default_value_t = 0.45)]
    sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Search the six-angle simulable regime instead of the full one.
    #[arg(long)]
    fermion: bool,
    #[arg(long, value_enum, default_value_t = BoundaryArg::WeightParity)]
    boundary: BoundaryArg,
    /// Copy the best individual unchanged into each generation.
    #[arg(long)]
    elitism: bool,
    #[arg(long, value_enum, default_value_t = AggregationArg::Mean)]
    aggregation: AggregationArg,
    /// Where to write the best rule.
    #[arg(long, default_value = "best-rule.json")]
    out: PathBuf,
    /// Write per-generation best/mean fitness CSV here.
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyTablesArgs {
    /// Comma-separated table ids (default: all). Known ids: bound,
    /// per-size-full, multi-size-full, simulable-multi-a,
    /// simulable-multi-b, per-size-fermionic.
    #[arg(long)]
    tables: Option<String>,
    /// "search" retries the bounded convention-variant set on mismatch.
    #[arg(long, value_enum, default_value_t = ConventionsArg::Default)]
    conventions: ConventionsArg,
    /// Force the dense statevector backend (audit path).
    #[arg(long)]
    dense: bool,
    /// Also write the report as CSV to this path ("-" for stdout).
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args)]
struct BoundArgs {
    n: usize,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Check this rule instead of random simulable rules.
    #[arg(long)]
    rule: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    WeightParity,
    Periodic,
    Antiperiodic,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::WeightParity => Boundary::WeightParity,
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Antiperiodic => Boundary::Antiperiodic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionsArg {
    Default,
    Search,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggregationArg {
    Mean,
    Min,
}

fn read_rule(path: &Path) -> Result<RuleSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::RuleFile(format!("{}: {e}", path.display())))?;
    parse_rule(&text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::RuleFile(format!("{}: {e}", path.display())))
}

fn cmd_eval(args: &EvalArgs) -> Result<i32> {
    let rule = read_rule(&args.rule)?;
    let spec = ClassifierSpec::new(args.n, args.t, args.p, args.delta)?;
    let started = Instant::now();

    if let Some(sample) = args.sample {
        let full = match rule {
            RuleSpec::Full(r) => r,
            RuleSpec::Fermionic(fr) => fr.to_full_rule(),
        };
        let est = dct::sampled_fitness(&full, &spec, sample, args.seed)?;
        println!("estimate   {:.6}", est.estimate);
        println!("halfwidth  {:.6}", est.half_width);
        println!("samples    {}", est.sample_size);
        println!("seed       {}", args.seed);
        println!("elapsed    {:.3}s", started.elapsed().as_secs_f64());
        return Ok(EXIT_OK);
    }

    let valid = dct::enumerate_valid(args.n)?;
    let (report, backend_name) = match &rule {
        RuleSpec::Full(r) => {
            let backend = if args.dense { Backend::Dense } else { Backend::Sector };
            (
                dct::fitness(r, &spec, &valid, backend)?,
                if args.dense { "dense" } else { "sector" },
            )
        }
        RuleSpec::Fermionic(fr) => {
            if args.dense {
                (
                    dct::fitness(&fr.to_full_rule(), &spec, &valid, Backend::Dense)?,
                    "dense",
                )
            } else {
                (
                    fermion::fermion_fitness_over(fr, &spec, &valid, args.boundary.into())?,
                    "fermion",
                )
            }
        }
    };

    println!("fitness    {:.6}", report.fitness);
    println!("wrong      {}", report.wrong_count);
    println!("half       {}", report.half_error_count);
    println!("total      {}", report.total);
    println!("backend    {backend_name}");
    println!("elapsed    {:.3}s", started.elapsed().as_secs_f64());

    if let Some(path) = &args.misclassified_out {
        let mut csv = String::from("configuration\n");
        for b in &report.misclassified {
            let _ = writeln!(csv, "{}", b);
        }
        write_text(path, &csv)?;
        println!(
            "misclassified ({} of {}) written to {}",
            report.misclassified.len(),
            report.wrong_count + report.half_error_count,
            path.display()
        );
    }
    Ok(EXIT_OK)
}

fn profile_values(args: &ProfileArgs, rule: &RuleSpec, b: &Configuration) -> Result<Vec<f64>> {
    if args.fermion {
        let fr = match rule {
            RuleSpec::Fermionic(fr) => *fr,
            RuleSpec::Full(r) => fermion::fermion_rule_from(r)?,
        };
        let set = OccupationSet::from_configuration(b);
        (0..b.n())
            .map(|p| {
                fermion::occupation_probability_with(
                    &fr,
                    b.n(),
                    args.t,
                    &set,
                    fermion::site_label(p),
                    args.boundary.into(),
                )
            })
            .collect()
    } else {
        let full = match rule {
            RuleSpec::Full(r) => *r,
            RuleSpec::Fermionic(fr) => fr.to_full_rule(),
        };
        Ok(marginal_profile(&evolve(b, &full, args.t)))
    }
}

fn cmd_profile(args: &ProfileArgs) -> Result<i32> {
    let rule = read_rule(&args.rule)?;
    let b = Configuration::parse_bits(&args.input)?;
    let values = profile_values(args, &rule, &b)?;
    let mut csv = String::from("site,probability\n");
    for (site, v) in values.iter().enumerate() {
        let _ = writeln!(csv, "{site},{}", csv_float(*v));
    }
    match &args.out {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (n, t) = part.split_once(':').ok_or_else(|| {
            Error::InvalidArgument(format!("size entry {part:?} is not n:t"))
        })?;
        let n = n.trim().parse::<usize>().map_err(|e| {
            Error::InvalidArgument(format!("bad n in {part:?}: {e}"))
        })?;
        let t = t.trim().parse::<usize>().map_err(|e| {
            Error::InvalidArgument(format!("bad t in {part:?}: {e}"))
        })?;
        out.push((n, t));
    }
    Ok(out)
}

fn cmd_search(args: &SearchArgs) -> Result<i32> {
    let sizes = match &args.sizes {
        Some(text) => parse_sizes(text)?,
        None => vec![(args.n.unwrap(), args.t.unwrap())],
    };
    let mode = if args.fermion {
        RuleMode::Fermionic
    } else {
        RuleMode::Full
    };
    let objective = ObjectiveSpec {
        mode,
        sizes,
        p: args.p,
        delta: args.delta,
        aggregation: match args.aggregation {
            AggregationArg::Mean => Aggregation::Mean,
            AggregationArg::Min => Aggregation::Min,
        },
        boundary: args.boundary.into(),
    };
    let cfg = GAConfig {
        population_size: args.pop,
        max_generations: args.gens,
        p_m: args.pm,
        sigma: args.sigma,
        seed: args.seed,
        elitism: args.elitism,
        objective,
    };
    let started = Instant::now();
    let outcome = ga::evolve_search(&cfg)?;

    let best_fitness = outcome.best.fitness.unwrap_or(0.0);
    let rule = outcome.best.to_rule(mode)?;
    let label = format!("search seed {} fitness {:.6}", args.seed, best_fitness);
    write_text(&args.out, &serialize_rule(&rule, Some(&label)))?;

    if let Some(path) = &args.history_out {
        let mut csv = String::from("generation,best_fitness,mean_fitness\n");
        for stat in &outcome.history {
            let _ = writeln!(
                csv,
                "{},{},{}",
                stat.generation,
                csv_float(stat.best_fitness),
                csv_float(stat.mean_fitness)
            );
        }
        write_text(path, &csv)?;
    }

    println!("best       {best_fitness:.6}");
    println!("solved     {}", outcome.solved);
    println!("gens       {}", outcome.generations_run);
    println!("rule       {}", args.out.display());
    println!("elapsed    {:.3}s", started.elapsed().as_secs_f64());
    Ok(EXIT_OK)
}

fn cmd_verify_tables(args: &VerifyTablesArgs) -> Result<i32> {
    let families = match &args.tables {
        None => TableFamily::ALL.to_vec(),
        Some(list) => list
            .split(',')
            .map(|s| TableFamily::parse(s.trim()))
            .collect::<Result<Vec<_>>>()?,
    };
    let backend = if args.dense { Backend::Dense } else { Backend::Sector };
    let search = args.conventions == ConventionsArg::Search;
    let report = verify::verify_tables_with(&families, search, backend)?;

    println!(
        "{:<20} {:>3} {:>3} {:>3} {:>9} {:>9} {:>6}  variant",
        "table", "n", "t", "p", "expected", "computed", "match"
    );
    for row in &report.rows {
        println!(
            "{:<20} {:>3} {:>3} {:>3} {:>9.4} {:>9.6} {:>6}  {}",
            row.table, row.n, row.t, row.p, row.expected, row.computed, row.matched, row.variant
        );
    }
    let mismatches = report.mismatch_count();
    if mismatches == 0 {
        println!("all {} rows match", report.rows.len());
    } else {
        println!("{mismatches} of {} rows mismatch", report.rows.len());
    }

    if let Some(target) = &args.csv {
        let mut csv = String::from("table,n,t,p,expected,computed,match,variant\n");
        for row in &report.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                row.table,
                row.n,
                row.t,
                row.p,
                csv_float(row.expected),
                csv_float(row.computed),
                row.matched,
                row.variant
            );
        }
        if target == "-" {
            print!("{csv}");
        } else {
            write_text(Path::new(target), &csv)?;
        }
    }

    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}

fn cmd_bound(args: &BoundArgs) -> Result<i32> {
    println!("{:.6}", dct::classical_bound(args.n)?);
    Ok(EXIT_OK)
}

fn cmd_crosscheck(args: &CrosscheckArgs) -> Result<i32> {
    use rand::{Rng, SeedableRng};
    if args.n > 12 {
        return Err(Error::InvalidArgument(format!(
            "crosscheck needs n <= 12 for the dense side, got {}",
            args.n
        )));
    }
    if args.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let fixed = match &args.rule {
        Some(path) => Some(match read_rule(path)? {
            RuleSpec::Fermionic(fr) => fr,
            RuleSpec::Full(r) => fermion::fermion_rule_from(&r)?,
        }),
        None => None,
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let started = Instant::now();
    let mut max_dev = 0.0f64;
    for _ in 0..args.trials {
        let fr = fixed.unwrap_or_else(|| {
            let mut a = || rng.random_range(0.0..std::f64::consts::TAU);
            FermionRule::new(a(), a(), a(), a(), a(), a())
        });
        let word = rng.random_range(0..(1u64 << args.n));
        let b = Configuration::from_word(word, args.n)?;
        let psi = evolve(&b, &fr.to_full_rule(), args.t);
        let dense = marginal_profile(&psi);
        let set = OccupationSet::from_configuration(&b);
        for (p, dense_p) in dense.iter().enumerate() {
            let fermi = fermion::occupation_probability(
                &fr,
                args.n,
                args.t,
                &set,
                fermion::site_label(p),
            )?;
            max_dev = max_dev.max((dense_p - fermi).abs());
        }
    }
    println!("trials     {}", args.trials);
    println!("max_dev    {max_dev:.3e}");
    println!("elapsed    {:.3}s", started.elapsed().as_secs_f64());
    if max_dev <= 1e-9 {
        println!("pass");
        Ok(EXIT_OK)
    } else {
        println!("FAIL (tolerance 1e-9)");
        Ok(EXIT_VERIFICATION)
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        match value.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring {THREADS_ENV}={value:?} (want a positive integer)"),
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match &cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Search(args) => cmd_search(args),
        Command::VerifyTables(args) => cmd_verify_tables(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Crosscheck(args) => cmd_crosscheck(args),
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NotSimulable(_) => EXIT_MODE,
        _ => EXIT_USAGE,
    }
}

/// Parses std::env args, runs one command, returns the process exit code.
pub fn run() -> i32 {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_USAGE };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("4:2,6:3,8:4").unwrap(), vec![(4, 2), (6, 3), (8, 4)]);
        assert_eq!(parse_sizes(" 10 : 5 ").unwrap(), vec![(10, 5)]);
        assert!(parse_sizes("4-2").is_err());
        assert!(parse_sizes("4:x").is_err());
    }

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.0, 1.0, 0.7627, 1.0 / 3.0, 0.992125038913218] {
            assert_eq!(csv_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
