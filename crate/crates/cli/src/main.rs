//! `hicomm`: congruences, higher commutators and Δ relations of finite
//! algebras from the command line.

mod file;
mod render;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hicomm::clone::{check_largest_clone, polymorphisms, relation_fingerprint};
use hicomm::commutator::{CommutatorEngine, Method};
use hicomm::hypercube::forks;
use hicomm::malcev::{find_malcev_term, strong_cube_term};
use hicomm::{con_lattice, hc, zoo, Congruence, FiniteAlgebra, Limits, Partition};
use serde_json::{json, Value};

use file::{resolve, AlgebraFile, Loaded};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(hicomm::Error),
}

impl From<hicomm::Error> for CliError {
    fn from(e: hicomm::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_resource_limit() => 3,
            CliError::Core(hicomm::Error::NoMalcevTerm | hicomm::Error::VerificationFailed(_)) => 1,
            CliError::Core(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "property-failure",
            3 => "resource-limit",
            _ => "usage",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "hicomm", version, about = "Higher commutators of finite algebras")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Largest subpower any closure may build.
    #[arg(long, global = true)]
    max_tuples: Option<usize>,
    /// Largest operation arity accepted in algebra files.
    #[arg(long, global = true, default_value_t = 4)]
    max_op_arity: usize,
    /// Seed for sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Add every element as a constant operation c0, c1, ...
    #[arg(long, global = true)]
    with_constants: bool,
    /// Append wall-clock timings to the report.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Forks,
    Termcond,
    Both,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CongArgs {
    /// Congruences by canonical lattice index, e.g. `1,2,2`.
    #[arg(long, value_delimiter = ',')]
    congs: Option<Vec<usize>>,
    /// Congruences in block notation separated by `;`, e.g. `0,1|2,3;0|1|2,3`.
    #[arg(long)]
    congs_blocks: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List the congruence lattice in canonical order.
    Con { algebra: String },
    /// Build Δ of a congruence tuple.
    Delta {
        algebra: String,
        #[command(flatten)]
        congs: CongArgs,
        /// Include the tuples of Δ in the report.
        #[arg(long)]
        tuples: bool,
    },
    /// The higher commutator of a congruence tuple.
    Commutator {
        algebra: String,
        #[command(flatten)]
        congs: CongArgs,
        /// Defaults to forks when a Mal'cev term exists, else termcond.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Whether the leading congruences centralize the last one modulo gamma.
    Centralizes {
        algebra: String,
        #[command(flatten)]
        congs: CongArgs,
        /// Lattice index of gamma.
        #[arg(long)]
        gamma: usize,
    },
    /// Smallest k with [1,...,1] (k+1 arguments) equal to 0.
    Supernilpotence {
        algebra: String,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
    },
    /// Search for a Mal'cev term.
    Malcev { algebra: String },
    /// Build and verify the strong n-cube term.
    CubeTerm {
        algebra: String,
        #[arg(long)]
        n: usize,
    },
    /// Run the HC law suite over all congruence tuples of length <= n.
    HcVerify {
        algebra: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Polymorphisms of Δ up to an arity bound.
    PolDelta {
        algebra: String,
        #[command(flatten)]
        congs: CongArgs,
        #[arg(long, default_value_t = 2)]
        arity_bound: usize,
    },
    /// Check that Pol(Δ) is the largest clone with the same Δ and commutators.
    LargestClone {
        algebra: String,
        #[command(flatten)]
        congs: CongArgs,
        #[arg(long, default_value_t = 2)]
        arity_bound: usize,
        /// Random non-polymorphisms to probe maximality with.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// List the built-in algebras, or print one as an algebra file.
    Zoo { name: Option<String> },
}

struct Outcome {
    result: Value,
    stats: Value,
    passed: bool,
}

impl Outcome {
    fn ok(result: Value) -> Outcome {
        Outcome {
            result,
            stats: json!({}),
            passed: true,
        }
    }
}

struct Ctx<'a> {
    alg: &'a FiniteAlgebra,
    engine: CommutatorEngine<'a>,
    limits: Limits,
}

impl<'a> Ctx<'a> {
    fn new(loaded: &'a Loaded, limits: &Limits) -> Result<Ctx<'a>, CliError> {
        let engine = match &loaded.malcev {
            Some(q) => CommutatorEngine::with_malcev(&loaded.algebra, q, limits.clone())?,
            None => CommutatorEngine::new(&loaded.algebra, limits.clone()),
        };
        Ok(Ctx {
            alg: &loaded.algebra,
            engine,
            limits: limits.clone(),
        })
    }

    fn congruence(&self, index: usize) -> Result<Congruence, CliError> {
        let lattice = self.engine.lattice()?;
        lattice
            .get(index)
            .cloned()
            .map_err(|_| CliError::Usage(format!("congruence index {index} out of range 0..{}", lattice.len())))
    }

    fn congruences(&self, args: &CongArgs) -> Result<Vec<Congruence>, CliError> {
        if let Some(indices) = &args.congs {
            return indices.iter().map(|&i| self.congruence(i)).collect();
        }
        let text = args.congs_blocks.as_deref().unwrap_or_default();
        text.split(';')
            .map(|blocks| {
                let p: Partition = blocks
                    .parse()
                    .map_err(|e| CliError::Usage(format!("`{blocks}`: {e}")))?;
                if p.size() != self.alg.size() {
                    return Err(CliError::Usage(format!(
                        "`{blocks}` partitions {} elements, the algebra has {}",
                        p.size(),
                        self.alg.size()
                    )));
                }
                Congruence::new(self.alg, p).map_err(|e| CliError::Usage(format!("`{blocks}`: {e}")))
            })
            .collect()
    }

    fn describe(&self, c: &Partition) -> Result<Value, CliError> {
        let index = self.engine.lattice()?.index_of(c);
        Ok(json!({ "index": index, "blocks": c.to_string() }))
    }

    fn describe_all(&self, congs: &[Congruence]) -> Result<Value, CliError> {
        congs.iter().map(|c| self.describe(c)).collect::<Result<Vec<_>, _>>().map(Value::from)
    }

    fn method(&self, arg: Option<MethodArg>) -> Result<MethodArg, CliError> {
        Ok(match arg {
            Some(m) => m,
            None if self.engine.malcev_term()?.is_some() => MethodArg::Forks,
            None => MethodArg::Termcond,
        })
    }

    fn stats(&self) -> Value {
        serde_json::to_value(self.engine.stats()).unwrap_or(Value::Null)
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Forks => "forks",
        Method::TermCondition => "termcond",
    }
}

fn con(ctx: &Ctx) -> Result<Outcome, CliError> {
    let lattice = con_lattice(ctx.alg, &ctx.limits)?;
    let congruences: Vec<Value> = lattice
        .congruences()
        .iter()
        .enumerate()
        .map(|(i, c)| json!({ "index": i, "blocks": c.to_string(), "block_count": c.block_count() }))
        .collect();
    let mut result = json!({
        "count": lattice.len(),
        "bottom": lattice.bottom(),
        "top": lattice.top(),
        "congruences": congruences,
    });
    if lattice.len() <= 32 {
        let table = |f: &dyn Fn(usize, usize) -> usize| -> Value {
            (0..lattice.len())
                .map(|i| (0..lattice.len()).map(|j| f(i, j)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into()
        };
        result["meet"] = table(&|i, j| lattice.meet(i, j));
        result["join"] = table(&|i, j| lattice.join(i, j));
    }
    Ok(Outcome::ok(result))
}

fn delta(ctx: &Ctx, args: &CongArgs, list: bool) -> Result<Outcome, CliError> {
    let congs = ctx.congruences(args)?;
    let d = ctx.engine.delta(&congs)?;
    let last = forks(&d, d.arity() - 1)?;
    let mut forks_agree = true;
    for i in 0..d.arity() - 1 {
        forks_agree &= forks(&d, i)? == last;
    }
    let mut result = json!({
        "congs": ctx.describe_all(&congs)?,
        "arity": d.arity(),
        "size": d.len(),
        "fingerprint": relation_fingerprint(&d),
        "forks_agree": forks_agree,
    });
    if list {
        result["tuples"] = d.sorted_tuples().into();
    }
    Ok(Outcome {
        result,
        stats: ctx.stats(),
        passed: true,
    })
}

fn commutator(ctx: &Ctx, args: &CongArgs, method: Option<MethodArg>) -> Result<Outcome, CliError> {
    let congs = ctx.congruences(args)?;
    let method = ctx.method(method)?;
    let mut result = json!({ "congs": ctx.describe_all(&congs)? });
    let mut passed = true;
    match method {
        MethodArg::Both => {
            let f = ctx.engine.commutator(&congs, Method::Forks)?;
            let t = ctx.engine.commutator(&congs, Method::TermCondition)?;
            passed = f == t;
            result["method"] = "both".into();
            result["forks"] = ctx.describe(&f)?;
            result["termcond"] = ctx.describe(&t)?;
            result["agree"] = passed.into();
        }
        single => {
            let m = if single == MethodArg::Forks {
                Method::Forks
            } else {
                Method::TermCondition
            };
            let value = ctx.engine.commutator(&congs, m)?;
            result["method"] = method_name(m).into();
            result["value"] = ctx.describe(&value)?;
        }
    }
    Ok(Outcome {
        result,
        stats: ctx.stats(),
        passed,
    })
}

fn centralizes(ctx: &Ctx, args: &CongArgs, gamma: usize) -> Result<Outcome, CliError> {
    let congs = ctx.congruences(args)?;
    let gamma = ctx.congruence(gamma)?;
    let (target, centralizers) = congs.split_last().ok_or_else(|| CliError::Usage("no congruences given".into()))?;
    let holds = ctx.engine.centralizes(centralizers, target, &gamma)?;
    Ok(Outcome {
        result: json!({
            "centralizers": ctx.describe_all(centralizers)?,
            "target": ctx.describe(target)?,
            "gamma": ctx.describe(&gamma)?,
            "holds": holds,
        }),
        stats: ctx.stats(),
        passed: true,
    })
}

fn supernilpotence(ctx: &Ctx, kmax: usize) -> Result<Outcome, CliError> {
    let s = ctx.engine.supernilpotence_degree(kmax)?;
    Ok(Outcome {
        result: serde_json::to_value(&s).unwrap_or(Value::Null),
        stats: ctx.stats(),
        passed: true,
    })
}

fn malcev(ctx: &Ctx) -> Result<Outcome, CliError> {
    let search = find_malcev_term(ctx.alg, &ctx.limits)?;
    Ok(Outcome {
        result: json!({
            "found": search.term.is_some(),
            "term": search.term.as_ref().map(|q| q.term().to_string()),
        }),
        stats: json!({ "explored": search.explored, "columns": search.columns }),
        passed: true,
    })
}

fn cube_term(ctx: &Ctx, n: usize) -> Result<Outcome, CliError> {
    let q = ctx.engine.require_malcev()?;
    let (witness, check) = strong_cube_term(ctx.alg, n, q, &ctx.limits)?;
    Ok(Outcome {
        result: json!({
            "n": witness.n,
            "malcev_term": q.term().to_string(),
            "term": witness.term.to_string(),
            "verified": witness.verified,
            "check": check,
        }),
        stats: json!({}),
        passed: check.passed,
    })
}

fn hc_verify(ctx: &Ctx, n: usize, method: Option<MethodArg>) -> Result<Outcome, CliError> {
    let run = |m: Method| hc::hc_suite_with(&ctx.engine, n, m);
    let (result, passed) = match ctx.method(method)? {
        MethodArg::Forks => {
            let r = run(Method::Forks)?;
            (serde_json::to_value(&r).unwrap_or(Value::Null), r.passed())
        }
        MethodArg::Termcond => {
            let r = run(Method::TermCondition)?;
            (serde_json::to_value(&r).unwrap_or(Value::Null), r.passed())
        }
        MethodArg::Both => {
            let f = run(Method::Forks)?;
            let t = run(Method::TermCondition)?;
            let mismatches: Vec<Value> = f
                .commutators
                .iter()
                .zip(&t.commutators)
                .filter(|(a, b)| a.value != b.value)
                .take(8)
                .map(|(a, b)| json!({ "congs": a.congs, "forks": a.value, "termcond": b.value }))
                .collect();
            let passed = f.passed() && t.passed() && mismatches.is_empty();
            (
                json!({ "forks": f, "termcond": t, "agree": mismatches.is_empty(), "mismatches": mismatches }),
                passed,
            )
        }
    };
    Ok(Outcome {
        result,
        stats: ctx.stats(),
        passed,
    })
}

fn pol_delta(ctx: &Ctx, args: &CongArgs, b: usize) -> Result<Outcome, CliError> {
    let congs = ctx.congruences(args)?;
    let d = ctx.engine.delta(&congs)?;
    let pol = polymorphisms(&d, b, &ctx.limits)?;
    let per_arity: Vec<usize> = (1..=b).map(|k| pol.of_arity(k).count()).collect();
    let missing: Vec<&str> = ctx
        .alg
        .operations()
        .iter()
        .filter(|op| (1..=b).contains(&op.arity()) && !pol.contains(op))
        .map(|op| op.symbol())
        .collect();
    let tables: Vec<Value> = pol
        .tables
        .iter()
        .map(|t| json!({ "symbol": t.symbol(), "arity": t.arity(), "table": t.table() }))
        .collect();
    Ok(Outcome {
        result: json!({
            "congs": ctx.describe_all(&congs)?,
            "delta_size": d.len(),
            "arity_bound": b,
            "count": pol.len(),
            "per_arity": per_arity,
            "basic_missing": missing,
            "tables": tables,
        }),
        stats: ctx.stats(),
        passed: missing.is_empty(),
    })
}

fn largest_clone(ctx: &Ctx, args: &CongArgs, b: usize, samples: usize) -> Result<Outcome, CliError> {
    let congs = ctx.congruences(args)?;
    let r = check_largest_clone(ctx.alg, &congs, b, samples, &ctx.limits)?;
    let commutators: Vec<Value> = r
        .commutators
        .iter()
        .map(|c| json!({ "subset": c.subset, "original": c.original.to_string(), "expanded": c.expanded.to_string() }))
        .collect();
    let probes: Vec<Value> = r
        .samples
        .iter()
        .map(|s| {
            json!({
                "arity": s.table.arity(),
                "table": s.table.table(),
                "expanded_delta_size": s.expanded_delta_size,
                "delta_grew": s.delta_grew,
                "changed": s.changed,
            })
        })
        .collect();
    Ok(Outcome {
        result: json!({
            "congs": ctx.describe_all(&congs)?,
            "arity_bound": r.arity_bound,
            "delta_size": r.delta_size,
            "polymorphisms": r.polymorphisms.len(),
            "basic_missing": r.basic_missing,
            "expanded_delta_size": r.expanded_delta_size,
            "delta_preserved": r.delta_preserved,
            "commutators": commutators,
            "commutators_preserved": r.commutators_preserved,
            "samples_requested": r.samples_requested,
            "samples": probes,
            "maximality_holds": r.maximality_holds(),
        }),
        stats: json!({ "sample_attempts": r.sample_attempts }),
        passed: r.passed(),
    })
}

fn zoo_listing() -> Value {
    json!({ "algebras": zoo::all_names(), "malcev": zoo::malcev_names() })
}

fn emit(format: Format, value: &Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("reports serialize")),
        Format::Text => print!("{}", render::text(value)),
    }
}

fn run(cli: &Cli, argv: &[String]) -> Result<bool, CliError> {
    let g = &cli.global;
    let started = Instant::now();
    let mut limits = Limits::default();
    if let Some(t) = g.max_tuples {
        limits.max_tuples = t;
    }
    if let Some(s) = g.seed {
        limits.seed = s;
    }

    let algebra = match &cli.command {
        Command::Zoo { name: None } => {
            emit(g.format, &zoo_listing());
            return Ok(true);
        }
        Command::Zoo { name: Some(name) } => {
            let mut alg = zoo::zoo(name).map_err(|e| CliError::Usage(e.to_string()))?;
            if g.with_constants {
                alg = alg.with_constants()?;
            }
            let file = AlgebraFile::from_algebra(&alg);
            match g.format {
                Format::Json => println!("{}", file.to_json()),
                Format::Text => emit(g.format, &serde_json::to_value(&file).expect("files serialize")),
            }
            return Ok(true);
        }
        Command::Con { algebra }
        | Command::Delta { algebra, .. }
        | Command::Commutator { algebra, .. }
        | Command::Centralizes { algebra, .. }
        | Command::Supernilpotence { algebra, .. }
        | Command::Malcev { algebra }
        | Command::CubeTerm { algebra, .. }
        | Command::HcVerify { algebra, .. }
        | Command::PolDelta { algebra, .. }
        | Command::LargestClone { algebra, .. } => algebra,
    };
    let loaded = resolve(algebra, g.with_constants, g.max_op_arity)?;
    let ctx = Ctx::new(&loaded, &limits)?;

    let outcome = match &cli.command {
        Command::Con { .. } => con(&ctx)?,
        Command::Delta { congs, tuples, .. } => delta(&ctx, congs, *tuples)?,
        Command::Commutator { congs, method, .. } => commutator(&ctx, congs, *method)?,
        Command::Centralizes { congs, gamma, .. } => centralizes(&ctx, congs, *gamma)?,
        Command::Supernilpotence { kmax, .. } => supernilpotence(&ctx, *kmax)?,
        Command::Malcev { .. } => malcev(&ctx)?,
        Command::CubeTerm { n, .. } => cube_term(&ctx, *n)?,
        Command::HcVerify { n, method, .. } => hc_verify(&ctx, *n, *method)?,
        Command::PolDelta { congs, arity_bound, .. } => pol_delta(&ctx, congs, *arity_bound)?,
        Command::LargestClone {
            congs,
            arity_bound,
            samples,
            ..
        } => largest_clone(&ctx, congs, *arity_bound, *samples)?,
        Command::Zoo { .. } => unreachable!(),
    };

    let mut report = json!({
        "command": argv,
        "algebra": {
            "name": loaded.algebra.name(),
            "size": loaded.algebra.size(),
            "fingerprint": loaded.algebra.fingerprint(),
        },
        "passed": outcome.passed,
        "result": outcome.result,
        "stats": outcome.stats,
    });
    if g.timings {
        report["timings"] = json!({ "total_ms": started.elapsed().as_secs_f64() * 1e3 });
    }
    emit(g.format, &report);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(&cli, &argv[1..]) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            if let Format::Json = cli.global.format {
                let v = json!({ "command": &argv[1..], "error": { "kind": e.kind(), "message": e.message() } });
                emit(Format::Json, &v);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
