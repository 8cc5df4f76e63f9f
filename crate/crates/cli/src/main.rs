mod io;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coarsedim::borst::{ord_with_chain, SetSystem};
use coarsedim::covers::check_cover;
use coarsedim::metrics::{metric_audit, DistanceTable, MetricHandle};
use coarsedim::search::{
    afragment_ord_bounds, build_afragment, check_fragment_closure, decide_cover, AFragment,
    Outcome, SearchOptions,
};
use coarsedim::spaces::{gen_window, IndexRange, Window, WindowSpec};
use coarsedim::witness::{check_coasdim_step, grid_cover, theorem1_witness, WitnessDecomposition};
use coarsedim::{Cover, Ordinal};
use serde_json::{json, Value};

use crate::io::{document, emit, emit_window, load_json, load_window, CliError, CliResult};
use crate::manifest::{Recorder, SCHEMAS};

#[derive(Parser, Debug)]
#[command(
    name = "coarsedim",
    about = "Exact finite computations on coarse-dimension windows",
    disable_version_flag = true
)]
struct Cli {
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the crate and schema versions.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate windows.
    #[command(subcommand)]
    Window(WindowCmd),
    /// Audit metric axioms.
    #[command(subcommand)]
    Metric(MetricCmd),
    /// Decide or check covers.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Build the bounded non-cover fragment of a window.
    Afrag(AfragArgs),
    /// Borst rank of a set system or rank bounds of a fragment.
    Ord(OrdArgs),
    /// Build and check constructive witnesses.
    #[command(subcommand)]
    Witness(WitnessCmd),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    R,
    Xki,
    Xomegak,
    Yomegak,
    X2omega,
}

#[derive(Subcommand, Debug)]
enum WindowCmd {
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    i: Option<u32>,
    #[arg(long)]
    block: Option<u32>,
    #[arg(long)]
    blocks: Option<IndexRange>,
    #[arg(long)]
    levels: Option<IndexRange>,
    /// Box radius R: coordinates range over 0..=R.
    #[arg(long = "r")]
    radius: i64,
    /// Output path; a `.jsonl` extension writes one point per line.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum MetricCmd {
    Audit(AuditArgs),
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long)]
    window: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// sup, level:K or tower (defaults to the window's own metric).
    #[arg(long)]
    metric: Option<MetricHandle>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CoverCmd {
    Decide(DecideArgs),
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct DecideArgs {
    #[arg(long)]
    window: String,
    /// Comma-separated disjointness parameters, e.g. 2,5.
    #[arg(long, value_delimiter = ',', required = true)]
    sigma: Vec<u64>,
    #[arg(long)]
    bound: u64,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    /// Return the first witness in depth-first order (always the case).
    #[arg(long)]
    canonical: bool,
    #[arg(long)]
    metric: Option<MetricHandle>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    window: String,
    /// Cover JSON, or a decision whose witness is checked.
    #[arg(long)]
    cover: String,
    #[arg(long)]
    bound: u64,
    #[arg(long)]
    metric: Option<MetricHandle>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct AfragArgs {
    #[arg(long)]
    window: String,
    #[arg(long)]
    bound: u64,
    #[arg(long)]
    max_elem: u32,
    #[arg(long)]
    max_size: u32,
    /// Node budget for each searched sigma.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long)]
    metric: Option<MetricHandle>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct OrdArgs {
    /// Set system JSON: {"members": [[1,2],[1,3]]}.
    #[arg(long)]
    system: Option<String>,
    /// Fragment JSON written by `afrag`.
    #[arg(long)]
    afrag: Option<String>,
}

#[derive(Subcommand, Debug)]
enum WitnessCmd {
    /// Level-cut witness on an X_{2ω} window.
    X2omega(X2omegaArgs),
    /// Verify a level-cut witness.
    Check(WitnessCheckArgs),
    /// Product brick cover of an ℝ^b box.
    Grid(GridArgs),
}

#[derive(Args, Debug)]
struct X2omegaArgs {
    #[arg(long = "r")]
    scale: u64,
    #[arg(long)]
    levels: IndexRange,
    #[arg(long)]
    blocks: IndexRange,
    #[arg(long = "box")]
    radius: i64,
    #[arg(long)]
    out: Option<String>,
    /// Also write the generated window here.
    #[arg(long)]
    window_out: Option<String>,
}

#[derive(Args, Debug)]
struct WitnessCheckArgs {
    #[arg(long)]
    window: String,
    #[arg(long)]
    dec: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    block: u32,
    #[arg(long)]
    d: u64,
    #[arg(long = "box")]
    radius: i64,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    window_out: Option<String>,
}

/// Whether the computed result is definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Definite,
    Unknown,
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for kind {kind}")))
}

fn window_spec(a: &GenArgs) -> CliResult<WindowSpec> {
    let name = format!("{:?}", a.kind).to_lowercase();
    let radius = a.radius;
    Ok(match a.kind {
        Kind::R => WindowSpec::R {
            block: need(a.block, "block", &name)?,
            radius,
        },
        Kind::Xki => WindowSpec::Xki {
            k: need(a.k, "k", &name)?,
            i: need(a.i.or(a.block), "i", &name)?,
            radius,
        },
        Kind::Xomegak => WindowSpec::XOmegaK {
            k: need(a.k, "k", &name)?,
            blocks: need(a.blocks, "blocks", &name)?,
            radius,
        },
        Kind::Yomegak => WindowSpec::YOmegaK {
            k: need(a.k, "k", &name)?,
            blocks: need(a.blocks, "blocks", &name)?,
            radius,
        },
        Kind::X2omega => WindowSpec::X2Omega {
            levels: need(a.levels, "levels", &name)?,
            blocks: need(a.blocks, "blocks", &name)?,
            radius,
        },
    })
}

fn table(window: &Window, metric: Option<MetricHandle>) -> CliResult<DistanceTable> {
    let handle = metric.unwrap_or_else(|| window.default_metric());
    Ok(DistanceTable::for_window(window, handle)?)
}

fn parallel() -> bool {
    rayon::current_num_threads() > 1
}

fn run(cli: Cli, rec: &mut Recorder) -> CliResult<Status> {
    let Some(command) = cli.command else {
        return Err(CliError::Usage("a subcommand is required (see --help)".into()));
    };
    match command {
        Command::Window(WindowCmd::Gen(a)) => {
            let w = gen_window(window_spec(&a)?)?;
            emit_window(&w, &rec.finish(), a.out.as_deref())?;
            Ok(Status::Definite)
        }
        Command::Metric(MetricCmd::Audit(a)) => {
            let w = load_window(&a.window, rec)?;
            let handle = a.metric.unwrap_or_else(|| w.default_metric());
            let report = metric_audit(&w, handle, a.samples, cli.seed)?;
            let mut body = serde_json::to_value(&report).expect("report serializes");
            body["window"] = w.digest().into();
            emit(&document(&body, &rec.finish()), a.out.as_deref())?;
            Ok(Status::Definite)
        }
        Command::Cover(CoverCmd::Decide(a)) => {
            let w = load_window(&a.window, rec)?;
            let t = table(&w, a.metric)?;
            let mut sigma = a.sigma.clone();
            sigma.sort_unstable();
            let opts = SearchOptions {
                budget: a.budget,
                parallel: parallel(),
            };
            let d = decide_cover(&t, &sigma, a.bound, opts)?;
            rec.add_nodes(d.nodes_explored);
            let mut body = serde_json::to_value(&d).expect("decision serializes");
            body["window"] = w.digest().into();
            body["canonical"] = true.into();
            emit(&document(&body, &rec.finish()), a.out.as_deref())?;
            Ok(if d.outcome == Outcome::Unknown {
                Status::Unknown
            } else {
                Status::Definite
            })
        }
        Command::Cover(CoverCmd::Check(a)) => {
            let w = load_window(&a.window, rec)?;
            let t = table(&w, a.metric)?;
            let raw: Value = load_json(&a.cover, rec)?;
            let raw = match raw.get("witness") {
                Some(Value::Null) => {
                    return Err(CliError::Json(format!("{}: decision has no witness", a.cover)))
                }
                Some(witness) => witness.clone(),
                None => raw,
            };
            let cover: Cover =
                serde_json::from_value(raw).map_err(|e| CliError::Json(format!("{}: {e}", a.cover)))?;
            let v = check_cover(&cover, &t, a.bound)?;
            let mut body = serde_json::to_value(&v).expect("verdict serializes");
            body["passed"] = v.passed().into();
            body["sigma"] = json!(cover.sigma);
            body["distinct_sigma"] = cover.has_distinct_sigma().into();
            body["window"] = w.digest().into();
            emit(&document(&body, &rec.finish()), a.out.as_deref())?;
            Ok(Status::Definite)
        }
        Command::Afrag(a) => {
            let w = load_window(&a.window, rec)?;
            let t = table(&w, a.metric)?;
            let f = build_afragment(
                &t,
                &w.digest(),
                a.bound,
                a.max_elem,
                a.max_size,
                a.budget,
                parallel(),
            )?;
            rec.add_nodes(f.nodes_explored);
            emit(&document(&f, &rec.finish()), a.out.as_deref())?;
            Ok(if f.unknown.is_empty() {
                Status::Definite
            } else {
                Status::Unknown
            })
        }
        Command::Ord(a) => {
            if let Some(path) = a.system {
                let system: SetSystem = load_json(&path, rec)?;
                let w = ord_with_chain(&system);
                let body = json!({
                    "ord": w.ord,
                    "ordinal": Ordinal::finite(w.ord as u64).to_string(),
                    "chain": w.chain,
                });
                emit(&document(&body, &rec.finish()), None)?;
                return Ok(Status::Definite);
            }
            let path = a.afrag.expect("clap enforces one source");
            let f: AFragment = load_json(&path, rec)?;
            check_fragment_closure(&f)?;
            let (lo, hi) = afragment_ord_bounds(&f)?;
            let body = json!({
                "lo": lo,
                "hi": hi,
                "lo_ordinal": Ordinal::finite(lo as u64).to_string(),
                "hi_ordinal": Ordinal::finite(hi as u64).to_string(),
                "exact": lo == hi,
                "unknown": f.unknown.len(),
                "window": f.window,
                "bound": f.bound,
            });
            emit(&document(&body, &rec.finish()), None)?;
            Ok(if f.unknown.is_empty() {
                Status::Definite
            } else {
                Status::Unknown
            })
        }
        Command::Witness(WitnessCmd::X2omega(a)) => {
            let w = gen_window(WindowSpec::X2Omega {
                levels: a.levels,
                blocks: a.blocks,
                radius: a.radius,
            })?;
            let dec = theorem1_witness(&w, a.scale)?;
            let manifest = rec.finish();
            if let Some(path) = a.window_out.as_deref() {
                emit_window(&w, &manifest, Some(path))?;
            }
            emit(&document(&dec, &manifest), a.out.as_deref())?;
            Ok(Status::Definite)
        }
        Command::Witness(WitnessCmd::Check(a)) => {
            let w = load_window(&a.window, rec)?;
            let dec: WitnessDecomposition = load_json(&a.dec, rec)?;
            let v = check_coasdim_step(&w, &dec, MetricHandle::Tower)?;
            let mut body = serde_json::to_value(&v).expect("verdict serializes");
            body["r"] = dec.r.into();
            body["k"] = dec.k.into();
            body["c"] = dec.c.into();
            body["window"] = w.digest().into();
            emit(&document(&body, &rec.finish()), a.out.as_deref())?;
            Ok(Status::Definite)
        }
        Command::Witness(WitnessCmd::Grid(a)) => {
            let w = gen_window(WindowSpec::R {
                block: a.block,
                radius: a.radius,
            })?;
            let cover = grid_cover(&w, a.d)?;
            let t = table(&w, None)?;
            let v = check_cover(&cover, &t, a.d - 1)?;
            let manifest = rec.finish();
            if let Some(path) = a.window_out.as_deref() {
                emit_window(&w, &manifest, Some(path))?;
            }
            let mut body = serde_json::to_value(&cover).expect("cover serializes");
            body["window"] = w.digest().into();
            body["bound"] = (a.d - 1).into();
            body["passed"] = v.passed().into();
            body["verdict"] = serde_json::to_value(&v).expect("verdict serializes");
            emit(&document(&body, &manifest), a.out.as_deref())?;
            Ok(Status::Definite)
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {}: {e}", e.code());
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let text = msg
                .split("\n\n")
                .find(|part| !part.trim().is_empty())
                .unwrap_or("invalid arguments");
            let text = text.strip_prefix("error: ").unwrap_or(text);
            let line = text.split_whitespace().collect::<Vec<_>>().join(" ");
            return fail(&CliError::Usage(line));
        }
    };
    if cli.version {
        println!("coarsedim {}", env!("CARGO_PKG_VERSION"));
        for (name, version) in SCHEMAS {
            println!("{name} schema {version}");
        }
        return ExitCode::SUCCESS;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(&CliError::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&CliError::Usage(format!("cannot size the thread pool: {e}")));
        }
    }
    let mut rec = Recorder::new(argv[1..].to_vec(), cli.seed);
    match run(cli, &mut rec) {
        Ok(Status::Definite) => ExitCode::SUCCESS,
        Ok(Status::Unknown) => ExitCode::from(2),
        Err(e) => fail(&e),
    }
}
