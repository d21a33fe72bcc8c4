use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nonregular::catalog::{read_catalog, reproduce, write_catalog, CatalogEntry, Provenance, TABLE_IDS};
use nonregular::models::{estimate_variances, fmt_rounded, information_matrix};
use nonregular::optimal::{
    best_b, q2_generator_count, search_q2, verify_beta3_vanishes, verify_mirror_symmetry,
    verify_unique_zero_beta3, Family, SearchReport, DEFAULT_SEARCH_CAP,
};
use nonregular::recursion::{classify, count_recursive};
use nonregular::{
    beta_pattern, expand, linear_permute, strength, williams, Design, Error, GeneratorSet,
    PermutationVector, PrimeLevel,
};

/// Searches above this many candidates need `--force`.
const UNFORCED_CAP: u64 = 100_000;

/// Generator sets checked one by one per n when `verify` picks its own range.
const VERIFY_DIRECT_CAP: u128 = 200_000;

mod exit {
    pub const USAGE: u8 = 1;
    pub const INVALID: u8 = 2;
    pub const INTERNAL: u8 = 3;
    pub const MISMATCH: u8 = 4;
}

#[derive(Parser)]
#[command(name = "nonregular", version, about = "Level-permuted regular designs and their β-wordlength patterns")]
struct Cli {
    /// Worker threads for searches and counts.
    #[arg(long, global = true, env = "NONREGULAR_JOBS")]
    jobs: Option<usize>,

    /// Machine-readable JSON output.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// CSV output where a table is printed.
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build D_b or E_b and write it as a design file.
    Construct {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// β-wordlength pattern of a design file or a construction.
    Beta {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Exhaustive search over all shifts b.
    Search {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        generators: String,
        #[arg(long, value_parser = ["linear", "williams"])]
        family: String,
        #[arg(long)]
        kmax: Option<usize>,
        /// Allow scans above 100,000 candidates.
        #[arg(long)]
        force: bool,
        /// Append the winner to a JSON-lines catalog.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Recursive type of a regular design.
    Classify {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        generators: String,
    },
    /// Recursive-type tallies over the q^2-run generator space.
    Count {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        n: usize,
    },
    /// Standard, best D_b~ and best E_b* among q^2-run designs.
    #[command(name = "search-q2", alias = "searchq2")]
    SearchQ2 {
        #[arg(long)]
        q: i64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Information matrix and variances of the second-order model.
    Model {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Recompute a published table and compare with its golden values.
    Reproduce {
        /// One of the table ids, or `all`.
        #[arg(long)]
        table: String,
    },
    /// Check a property of E_b* over the q^2-run generator space:
    /// 1 = β3 vanishes, 2 = b* is the only zero-β3 shift for type-II sets,
    /// 4 = mirror symmetry.
    Verify {
        #[arg(long, value_parser = ["1", "2", "4"])]
        theorem: String,
        #[arg(long)]
        q: i64,
        /// Largest n checked one generator set at a time.
        #[arg(long)]
        nmax: Option<usize>,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    q: i64,
    /// Generator rows `c11,c12;c21,c22`.
    #[arg(long)]
    generators: String,
    /// Shifts `b1,b2,...`; zeros when absent.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    williams: bool,
}

#[derive(Args)]
#[group(required = true, multiple = true)]
struct SourceArgs {
    #[arg(long, conflicts_with_all = ["q", "generators", "b", "williams"])]
    design: Option<PathBuf>,
    #[arg(long, requires = "generators")]
    q: Option<i64>,
    #[arg(long, requires = "q")]
    generators: Option<String>,
    #[arg(long, requires = "generators", allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, requires = "generators")]
    williams: bool,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_invalid_input() {
            exit::INVALID
        } else {
            match e {
                Error::OutOfRange { .. }
                | Error::RunCap { .. }
                | Error::SearchCap { .. }
                | Error::UnknownTable(_)
                | Error::Unsupported(_)
                | Error::Io { .. } => exit::USAGE,
                _ => exit::INTERNAL,
            }
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::USAGE,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(exit::USAGE);
        }
        if rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            eprintln!("error: could not start {j} worker threads");
            return ExitCode::from(exit::INTERNAL);
        }
    }
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(f)) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
        Err(_) => ExitCode::from(exit::INTERNAL),
    }
}

fn level(q: i64) -> Result<PrimeLevel, Failure> {
    Ok(PrimeLevel::new(q)?)
}

fn build(q: i64, generators: &str, b: Option<&str>, williams_map: bool) -> Result<Design, Failure> {
    let q = level(q)?;
    let gen = GeneratorSet::parse(q, generators)?;
    let d = match b {
        Some(b) => linear_permute(&gen, &PermutationVector::parse(q, b)?)?,
        None => expand(&gen)?,
    };
    Ok(if williams_map { williams(&d) } else { d })
}

fn load(source: &SourceArgs) -> Result<Design, Failure> {
    match (&source.design, source.q, &source.generators) {
        (Some(path), _, _) => Ok(Design::read(path)?),
        (None, Some(q), Some(g)) => build(q, g, source.b.as_deref(), source.williams),
        _ => Err(usage("either --design or --q with --generators is required")),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure {
        code: exit::INTERNAL,
        message: e.to_string(),
    })?;
    println!("{s}");
    Ok(())
}

fn fmt4(v: &[f64]) -> String {
    v.iter().map(|x| fmt_rounded(*x, 4)).collect::<Vec<_>>().join(" ")
}

fn fmt_gens(g: &[Vec<u32>]) -> String {
    g.iter()
        .map(|r| format!("({})", r.iter().map(u32::to_string).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn append_catalog(path: &PathBuf, new: Vec<CatalogEntry>) -> Result<(), Failure> {
    let mut entries = if path.exists() { read_catalog(path)? } else { Vec::new() };
    for e in new {
        entries.retain(|old| (old.q, old.n, old.family) != (e.q, e.n, e.family));
        entries.push(e);
    }
    write_catalog(&entries, path)?;
    Ok(())
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Construct { build: a, out } => {
            let d = build(a.q, &a.generators, a.b.as_deref(), a.williams)?;
            d.write(out)?;
            let p = beta_pattern(&d, Some(4.min(d.factors() * (d.q().as_usize() - 1))))?;
            let beta = |k: usize| p.beta(k).unwrap_or(0.0);
            let t = strength(&d, 3);
            if cli.json {
                print_json(&json!({
                    "runs": d.runs(), "n": d.factors(), "strength": t,
                    "beta3": beta(3), "beta4": beta(4), "out": out,
                }))?;
            } else {
                println!(
                    "N={} n={} strength={t} beta3={} beta4={}",
                    d.runs(),
                    d.factors(),
                    fmt_rounded(beta(3), 4),
                    fmt_rounded(beta(4), 4)
                );
            }
            Ok(0)
        }
        Command::Beta { source, kmax } => {
            let d = load(source)?;
            let p = beta_pattern(&d, *kmax)?;
            if cli.json {
                print_json(&json!({"q": d.q(), "n": d.factors(), "runs": d.runs(), "beta": p.values()}))?;
            } else if cli.csv {
                println!("k,beta");
                for (k, v) in p.values().iter().enumerate() {
                    println!("{},{v:?}", k + 1);
                }
            } else {
                println!("{}", fmt4(p.values()));
            }
            Ok(0)
        }
        Command::Search {
            q,
            generators,
            family,
            kmax,
            force,
            catalog,
        } => {
            let q = level(*q)?;
            let gen = GeneratorSet::parse(q, generators)?;
            let family: Family = family.parse()?;
            let cap = if *force { u64::MAX } else { UNFORCED_CAP };
            let r = best_b(&gen, family, *kmax, cap).map_err(|e| match e {
                Error::SearchCap { size, .. } => usage(format!(
                    "{size} candidates exceed {UNFORCED_CAP}; pass --force to run the full scan"
                )),
                e => e.into(),
            })?;
            if let Some(path) = catalog {
                append_catalog(path, vec![CatalogEntry::from_report(&r, Provenance::now(command_line()))?])?;
            }
            print_report(cli, &r)?;
            Ok(0)
        }
        Command::Classify { q, generators } => {
            let gen = GeneratorSet::parse(level(*q)?, generators)?;
            let t = classify(&gen);
            if cli.json {
                print_json(&json!({"type": format!("{t:?}")}))?;
            } else {
                println!("{t:?}");
            }
            Ok(0)
        }
        Command::Count { q, n } => {
            let c = count_recursive(level(*q)?, *n, DEFAULT_SEARCH_CAP)?;
            if cli.json {
                print_json(&c)?;
            } else if cli.csv {
                println!("type_i,type_ii,type_iii,total\n{},{},{},{}", c.type_i, c.type_ii, c.type_iii, c.total);
            } else {
                println!(
                    "type-I={} type-II={} type-III={} total={}",
                    c.type_i, c.type_ii, c.type_iii, c.total
                );
            }
            Ok(0)
        }
        Command::SearchQ2 {
            q,
            n,
            kmax,
            force,
            catalog,
        } => {
            let q = level(*q)?;
            let cap = if *force { u64::MAX } else { DEFAULT_SEARCH_CAP };
            let r = search_q2(q, *n, *kmax, cap).map_err(|e| match e {
                Error::SearchCap { size, .. } => usage(format!(
                    "{size} generator sets exceed {DEFAULT_SEARCH_CAP}; pass --force to search them all"
                )),
                e => e.into(),
            })?;
            if let Some(path) = catalog {
                let prov = Provenance::now(command_line());
                append_catalog(
                    path,
                    vec![
                        CatalogEntry::from_report(&r.linear, prov.clone())?,
                        CatalogEntry::from_report(&r.williams, prov)?,
                    ],
                )?;
            }
            if cli.json {
                print_json(&r)?;
            } else if cli.csv {
                println!("design,generators,b,beta3,beta4,ties,deciding_k");
                println!(
                    "D,{},,{:?},{:?},,",
                    fmt_gens(&r.standard.generators),
                    r.standard.beta[2],
                    r.standard.beta[3]
                );
                for (name, rep) in [("D_b~", &r.linear), ("E_b*", &r.williams)] {
                    println!(
                        "{name},{},{},{:?},{:?},{},{}",
                        fmt_gens(rep.generators.as_deref().unwrap_or(&[])),
                        rep.b.iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                        rep.beta[2],
                        rep.beta[3],
                        rep.ties.len(),
                        rep.deciding_k.map_or(String::new(), |k| k.to_string())
                    );
                }
            } else {
                println!("q={} n={} ({} generator sets)", r.q, r.n, r.linear.evaluations);
                println!(
                    "D     {}  beta3={} beta4={}",
                    fmt_gens(&r.standard.generators),
                    fmt_rounded(r.standard.beta[2], 4),
                    fmt_rounded(r.standard.beta[3], 4)
                );
                for (name, rep) in [("D_b~", &r.linear), ("E_b*", &r.williams)] {
                    println!(
                        "{name:<5} {}  b={:?} beta3={} beta4={}  ties={} decided at k={}",
                        fmt_gens(rep.generators.as_deref().unwrap_or(&[])),
                        rep.b,
                        fmt_rounded(rep.beta[2], 4),
                        fmt_rounded(rep.beta[3], 4),
                        rep.ties.len(),
                        rep.deciding_k.map_or("-".into(), |k| k.to_string())
                    );
                }
            }
            Ok(0)
        }
        Command::Model { source } => {
            let d = load(source)?;
            let info = information_matrix(&d);
            if cli.csv {
                print!("{}", info.to_csv(None));
                return Ok(0);
            }
            if cli.json {
                let vars = estimate_variances(&d)?;
                let m = info.matrix();
                let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
                let labels: Vec<String> = info.terms().iter().map(|t| t.label()).collect();
                let v: Vec<_> = vars.iter().map(|(t, v)| json!({"term": t.label(), "variance": v})).collect();
                print_json(&json!({"terms": labels, "information": rows, "variances": v}))?;
                return Ok(0);
            }
            println!("information matrix M^T M/N");
            print!("{}", info.to_csv(Some(3)).replace(',', "\t"));
            let vars = estimate_variances(&d)?;
            println!("variances (multiples of sigma^2)");
            for (t, v) in &vars {
                println!("{}\t{}", t.label(), fmt_rounded(*v, 3));
            }
            Ok(0)
        }
        Command::Reproduce { table } => {
            let ids: Vec<&str> = if table == "all" {
                TABLE_IDS.to_vec()
            } else {
                vec![table.as_str()]
            };
            let mut ok = true;
            let mut all = Vec::new();
            for id in ids {
                let r = reproduce(id)?;
                ok &= r.passed();
                if cli.csv {
                    print!("{}", r.render_csv());
                } else if !cli.json {
                    print!("{}", r.render_text());
                }
                all.push(r);
            }
            if cli.json {
                let v: Vec<_> = all
                    .iter()
                    .map(|r| json!({"table": r.table, "title": r.title, "passed": r.passed(), "cells": r.cells, "notes": r.notes}))
                    .collect();
                print_json(&v)?;
            }
            Ok(if ok { 0 } else { exit::MISMATCH })
        }
        Command::Verify { theorem, q, nmax } => {
            let q = level(*q)?;
            let n_direct = match nmax {
                Some(n) => *n,
                None => (3..=q.as_usize() + 1)
                    .take_while(|&n| q2_generator_count(q, n).is_ok_and(|c| c <= VERIFY_DIRECT_CAP))
                    .last()
                    .unwrap_or(2),
            };
            let (holds, detail) = match theorem.as_str() {
                "1" => {
                    let c = verify_beta3_vanishes(q, n_direct, u64::MAX)?;
                    (c.holds, serde_json::to_value(&c).unwrap_or_default())
                }
                "2" => {
                    let c = verify_unique_zero_beta3(q, 2, u64::MAX)?;
                    (c.holds, serde_json::to_value(&c).unwrap_or_default())
                }
                _ => {
                    let c = verify_mirror_symmetry(q, n_direct, u64::MAX)?;
                    (c.holds, serde_json::to_value(&c).unwrap_or_default())
                }
            };
            if cli.json {
                print_json(&json!({"theorem": theorem, "q": q, "holds": holds, "detail": detail}))?;
            } else {
                println!("{}: check {theorem} for q={q}", if holds { "PASS" } else { "FAIL" });
                println!("{detail}");
            }
            Ok(if holds { 0 } else { exit::MISMATCH })
        }
    }
}

fn print_report(cli: &Cli, r: &SearchReport) -> Result<(), Failure> {
    if cli.json {
        return print_json(r);
    }
    if cli.csv {
        println!("b,{}", r.b.iter().map(u32::to_string).collect::<Vec<_>>().join(" "));
        for (k, v) in r.beta.iter().enumerate() {
            println!("beta{},{v:?}", k + 1);
        }
        return Ok(());
    }
    println!("family={} evaluations={}", r.family, r.evaluations);
    println!("winner b={:?}", r.b);
    println!("beta {}", fmt4(&r.beta));
    let ties: Vec<String> = r.ties.iter().map(|t| format!("{:?}", t.b)).collect();
    println!("ties ({}): {}", ties.len(), ties.join(" "));
    if let Some(k) = r.deciding_k {
        println!("decided at k={k}");
    }
    Ok(())
}
