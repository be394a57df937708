use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use coho32::bar::{class_is_zero, classes_equal, Cochain};
use coho32::catalog::{self, entry, symbols};
use coho32::f2::{set_memory_cap, MIN_MEMORY_CAP};
use coho32::pc::BUILTIN_NAMES;
use coho32::resolution::{load_or_compute, CACHE_DIR_ENV};
use coho32::ring::RingPresentation;
use coho32::verify::{self, Config, Status};
use serde_json::json;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

/// Mod-2 group cohomology workbench for small 2-groups.
#[derive(Parser)]
#[command(name = "coho32", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Memory cap for dense matrices, in MiB (at least 64).
    #[arg(long, global = true, value_name = "MIB", default_value_t = 2048)]
    memory_cap: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Directory for cached resolutions.
    #[arg(long, global = true, env = CACHE_DIR_ENV, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Built-in groups.
    Groups {
        #[command(subcommand)]
        action: GroupsCommand,
    },
    /// Betti numbers of a minimal resolution.
    Betti {
        group: String,
        #[arg(long)]
        max_degree: usize,
        /// Cache directory for this run (overrides --cache-dir).
        #[arg(long, value_name = "DIR")]
        cache: Option<PathBuf>,
    },
    /// Catalog cocycles.
    Cocycle {
        #[command(subcommand)]
        action: CocycleCommand,
    },
    /// Restrict a catalog class to a subgroup and identify the result.
    Restrict {
        group: String,
        symbol: String,
        #[arg(long)]
        subgroup: String,
    },
    /// Hilbert function of a graded ring presentation.
    Hilbert {
        #[arg(long, value_name = "FILE")]
        presentation: PathBuf,
        #[arg(long)]
        max_degree: usize,
    },
    /// Run every check and print the report.
    VerifyPaper {
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
        /// Write the JSON report here.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GroupsCommand {
    List,
    Show { name: String },
}

#[derive(Subcommand)]
enum CocycleCommand {
    /// Coboundary check and nonvanishing of the class.
    Check { group: String, symbol: String },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<coho32::Error>() {
        Some(coho32::Error::Sizing(_) | coho32::Error::MonomialCap { .. }) => EXIT_RESOURCE,
        Some(
            coho32::Error::UnknownGroup(_)
            | coho32::Error::UnknownSymbol { .. }
            | coho32::Error::InvalidArgument(_)
            | coho32::Error::Parse(_),
        ) => EXIT_USAGE,
        _ if err.is::<UsageError>() => EXIT_USAGE,
        _ => EXIT_CHECK_FAILED,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn groups(cmd: GroupsCommand, json_out: bool) -> anyhow::Result<bool> {
    match cmd {
        GroupsCommand::List => {
            let mut rows = Vec::new();
            for name in BUILTIN_NAMES.iter().chain(&catalog::SUBGROUPS) {
                let g = catalog::group(name)?;
                rows.push(json!({"name": name, "order": g.order()}));
                if !json_out {
                    println!("{name} {}", g.order());
                }
            }
            if json_out {
                print_json(&json!(rows));
            }
        }
        GroupsCommand::Show { name } => {
            let g = catalog::group(&name)?;
            if json_out {
                print_json(&json!({
                    "name": name,
                    "order": g.order(),
                    "presentation": g.to_json(),
                    "abelian_invariants": g.abelian_invariants(),
                    "catalog": symbols(&name),
                }));
            } else {
                println!("{}", g.describe());
                println!("order {}", g.order());
                for i in 0..g.k() {
                    println!("f{}^2 = {}", i + 1, g.format_element(g.power_relation(i)));
                    for j in 0..i {
                        let c = g.conjugate_relation(j, i);
                        if c != g.generator(i) {
                            println!("f{}^f{} = {}", i + 1, j + 1, g.format_element(c));
                        }
                    }
                }
                if let Some(inv) = g.abelian_invariants() {
                    let inv: Vec<String> = inv.iter().map(u64::to_string).collect();
                    println!("abelian {}", inv.join(" x "));
                }
                if !symbols(&name).is_empty() {
                    println!("catalog {}", symbols(&name).join(" "));
                }
            }
        }
    }
    Ok(true)
}

fn betti(group: &str, max_degree: usize, cache: Option<PathBuf>, json_out: bool) -> anyhow::Result<bool> {
    let g = catalog::group(group)?;
    let r = load_or_compute(g, max_degree, cache.as_deref(), |n, b| {
        eprintln!("degree {n}: rank {b}");
    })?;
    if json_out {
        print_json(&json!({"group": group, "max_degree": max_degree, "betti": r.betti()}));
    } else {
        let line: Vec<String> = r.betti().iter().map(usize::to_string).collect();
        println!("{}", line.join(" "));
    }
    Ok(true)
}

fn cocycle_check(group: &str, symbol: &str, json_out: bool) -> anyhow::Result<bool> {
    let c = entry(group, symbol)?;
    let cocycle = c.is_cocycle()?;
    let nonzero = cocycle && !class_is_zero(&c)?;
    let ok = cocycle && nonzero;
    if json_out {
        print_json(&json!({
            "group": group,
            "symbol": symbol,
            "degree": c.degree(),
            "cocycle": cocycle,
            "class_nonzero": nonzero,
            "status": if ok { "pass" } else { "fail" },
        }));
    } else {
        println!("{}", if ok { "pass" } else { "fail" });
        if !cocycle {
            eprintln!("{symbol} is not a cocycle over {group}");
        } else if !nonzero {
            eprintln!("{symbol} is a coboundary over {group}");
        }
    }
    Ok(ok)
}

/// Products of catalog classes of the given degree, as (name, cochain).
fn monomials(group: &str, degree: usize) -> anyhow::Result<Vec<(String, Cochain)>> {
    let gens: Vec<(&str, Cochain)> = symbols(group)
        .iter()
        .map(|s| Ok((*s, entry(group, s)?)))
        .collect::<anyhow::Result<_>>()?;
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, vec![], 0)];
    while let Some((start, word, deg)) = stack.pop() {
        if deg == degree {
            if word.is_empty() {
                continue;
            }
            let mut c = gens[word[0]].1.clone();
            for &i in &word[1..] {
                c = c.cup(&gens[i].1)?;
            }
            let mut name = String::new();
            let mut k = 0;
            while k < word.len() {
                let run = word[k..].iter().take_while(|&&i| i == word[k]).count();
                if k > 0 {
                    name.push('*');
                }
                name.push_str(gens[word[k]].0);
                if run > 1 {
                    name.push_str(&format!("^{run}"));
                }
                k += run;
            }
            out.push((name, c));
            continue;
        }
        for (i, (_, c)) in gens.iter().enumerate().skip(start).rev() {
            if deg + c.degree() <= degree {
                let mut w = word.clone();
                w.push(i);
                stack.push((i, w, deg + c.degree()));
            }
        }
    }
    Ok(out)
}

fn restrict(group: &str, symbol: &str, sub: &str, json_out: bool) -> anyhow::Result<bool> {
    let s = catalog::subgroup(sub)?;
    if s.embedding.codomain().name() != group {
        return Err(usage(format!("{sub} is not a catalog subgroup of {group}")));
    }
    let c = entry(group, symbol)?.restrict(&s.embedding)?;
    let basis = monomials(sub, c.degree())?;
    if basis.len() > 16 {
        return Err(anyhow!("too many monomials in degree {}", c.degree()));
    }
    let mut found = None;
    for mask in 0u32..1 << basis.len() {
        let mut sum = Cochain::zero(c.group().clone(), c.degree())?;
        for (i, (_, m)) in basis.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum = sum.add(m)?;
            }
        }
        if classes_equal(&sum, &c)? {
            let terms: Vec<&str> = basis
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, (n, _))| n.as_str())
                .collect();
            found = Some(if terms.is_empty() { "0".to_string() } else { terms.join(" + ") });
            break;
        }
    }
    if json_out {
        print_json(&json!({"group": group, "symbol": symbol, "subgroup": sub, "restriction": found}));
    } else {
        match &found {
            Some(t) => println!("res_{sub}({symbol}) = {t}"),
            None => println!("res_{sub}({symbol}) not in the span of catalog monomials"),
        }
    }
    Ok(found.is_some())
}

fn hilbert(path: &PathBuf, max_degree: usize, json_out: bool) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let p = RingPresentation::parse(&text)?;
    let h = p.hilbert(max_degree)?;
    if json_out {
        print_json(&json!({"max_degree": max_degree, "hilbert": h}));
    } else {
        let line: Vec<String> = h.iter().map(usize::to_string).collect();
        println!("{}", line.join(" "));
    }
    Ok(true)
}

fn verify_paper(max_degree: usize, report: Option<PathBuf>, cache_dir: Option<PathBuf>, json_out: bool) -> anyhow::Result<bool> {
    if max_degree == 0 {
        return Err(usage("--max-degree must be at least 1"));
    }
    let cfg = Config {
        maxdeg: max_degree,
        cache_dir,
    };
    let rep = verify::run_all(&cfg, &|c| eprintln!("{} {:?}", c.id, c.status))?;
    let doc = serde_json::to_string_pretty(&rep)?;
    if let Some(path) = report {
        std::fs::write(&path, &doc).with_context(|| format!("writing {}", path.display()))?;
    }
    if json_out {
        println!("{doc}");
    } else {
        for c in &rep.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skipped",
            };
            println!("{} {status} {}", c.id, c.description);
        }
        println!("verdict: {}", rep.verdict);
        println!("digest: {}", rep.digest());
    }
    Ok(rep.all_passed())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let g = &cli.global;
    if g.memory_cap.saturating_mul(1 << 20) < MIN_MEMORY_CAP {
        return Err(usage("--memory-cap must be at least 64 MiB"));
    }
    set_memory_cap(g.memory_cap << 20);
    rayon::ThreadPoolBuilder::new().num_threads(g.threads).build_global()?;
    match cli.command {
        Command::Groups { action } => groups(action, g.json),
        Command::Betti {
            group,
            max_degree,
            cache,
        } => betti(&group, max_degree, cache.or(g.cache_dir.clone()), g.json),
        Command::Cocycle {
            action: CocycleCommand::Check { group, symbol },
        } => cocycle_check(&group, &symbol, g.json),
        Command::Restrict {
            group,
            symbol,
            subgroup,
        } => restrict(&group, &symbol, &subgroup, g.json),
        Command::Hilbert {
            presentation,
            max_degree,
        } => hilbert(&presentation, max_degree, g.json),
        Command::VerifyPaper { max_degree, report } => {
            verify_paper(max_degree, report, g.cache_dir.clone(), g.json)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
