use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use quarkflow::catalog::{self, Example};
use quarkflow::decompose::{decompose, emit_stage_kernels, render_dot};
use quarkflow::graph::write_graph_json;
use quarkflow::pipeline::solve_and_decompose;
use quarkflow::report::{median, oracle_suite, wk_sweep, Summary};
use quarkflow::verify::verify;
use quarkflow::DecompositionRecord;

/// Exit status for a failed check (verification or bench budget).
const CHECK_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "quarkflow", version, about = "Split stencil update formulas into atomic stages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the optimal decomposition and write it out.
    Decompose(DecomposeArgs),
    /// Check a decomposition record against its graph.
    Verify(VerifyArgs),
    /// Draw a decomposition as Graphviz DOT.
    Render(RenderArgs),
    /// Write a bundled example graph as JSON.
    Example(ExampleArgs),
    /// Time the bundled stencils and cross-check the solver on random graphs.
    Bench(BenchArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// DSL file (`.stencil`) or graph JSON (`.json`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Bundled example name.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
    Kernels,
    Summary,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    source: Source,
    /// Weight of the stage count in the objective.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    wk: u64,
    /// Report K and sharing for each listed W_K instead of writing a decomposition.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    wk_sweep: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; a directory for `--format kernels`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Decomposition record written by `decompose --format json`.
    #[arg(long)]
    decomposition: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    source: Source,
    /// Record to draw; without it the optimal decomposition is computed.
    #[arg(long)]
    decomposition: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    wk: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExampleArgs {
    name: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Examples to time; all three stencils by default.
    #[arg(long)]
    example: Vec<String>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    repeat: u32,
    /// First seed of the random oracle suite.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random graphs; 0 skips the suite.
    #[arg(long, default_value_t = 200)]
    graphs: u64,
}

fn main() -> ExitCode {
    // usage errors exit 1; 2 is reserved for failed checks
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
        Command::Example(a) => cmd_example(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => {
            eprintln!("{} {e:#}", paint("error:", Color::Red, std::io::stderr().is_terminal()));
            ExitCode::FAILURE
        }
    }
}

#[derive(Clone, Copy)]
enum Color {
    Red,
    Green,
}

fn paint(text: &str, color: Color, tty: bool) -> String {
    let enabled = tty && std::env::var("QUARKFLOW_COLOR").map_or(true, |v| v != "0");
    if !enabled {
        return text.to_string();
    }
    let code = match color {
        Color::Red => 31,
        Color::Green => 32,
    };
    format!("\x1b[{code}m{text}\x1b[0m")
}

fn load(source: &Source) -> Result<Example> {
    match (&source.input, &source.example) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            catalog::from_source(name, &text).with_context(|| format!("loading {}", path.display()))
        }
        (None, Some(name)) => Ok(catalog::example(name)?),
        _ => bail!("give exactly one of --input or --example"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_record(path: &Path) -> Result<DecompositionRecord> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    DecompositionRecord::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_decompose(a: DecomposeArgs) -> Result<bool> {
    let ex = load(&a.source)?;
    if let Some(wks) = &a.wk_sweep {
        let sweep = wk_sweep(&ex.graph, wks)?;
        emit(a.out.as_deref(), &sweep.to_string())?;
        return Ok(true);
    }
    let start = Instant::now();
    let (solved, dec) = solve_and_decompose(&ex.graph, a.wk)?;
    let elapsed = start.elapsed();
    match a.format {
        Format::Json => emit(a.out.as_deref(), &dec.to_record().to_json())?,
        Format::Dot => emit(a.out.as_deref(), &render_dot(&dec))?,
        Format::Summary => {
            let mut summary = Summary::new(&ex.graph, a.wk, &solved, &dec)?;
            summary.elapsed = Some(elapsed);
            emit(a.out.as_deref(), &summary.to_string())?;
        }
        Format::Kernels => {
            let kernels = emit_stage_kernels(&dec, ex.traced.as_ref())?;
            match &a.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    for k in &kernels {
                        let path = dir.join(k.file_name());
                        std::fs::write(&path, &k.text).with_context(|| format!("writing {}", path.display()))?;
                    }
                }
                None => kernels.iter().for_each(|k| print!("{}", k.text)),
            }
        }
    }
    Ok(true)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let ex = load(&a.source)?;
    let record = read_record(&a.decomposition)?;
    let report = verify(&ex.graph, &record);
    print!("{}", report.to_json());
    let tty = std::io::stderr().is_terminal();
    if report.overall {
        eprintln!("{}", paint("verification passed", Color::Green, tty));
    } else {
        eprintln!("{}", paint("verification failed", Color::Red, tty));
    }
    Ok(report.overall)
}

fn cmd_render(a: RenderArgs) -> Result<bool> {
    let ex = load(&a.source)?;
    let dec = match &a.decomposition {
        Some(path) => {
            let record = read_record(path)?;
            let labels =
                record.labels().ok_or_else(|| anyhow!("{}: vertex ids must be 0..n in order", path.display()))?;
            decompose(&ex.graph, &labels)?
        }
        None => solve_and_decompose(&ex.graph, a.wk)?.1,
    };
    emit(a.out.as_deref(), &render_dot(&dec))?;
    Ok(true)
}

fn cmd_example(a: ExampleArgs) -> Result<bool> {
    let ex = catalog::example(&a.name)?;
    emit(a.out.as_deref(), &write_graph_json(&ex.graph))?;
    Ok(true)
}

/// Median budgets for the bundled stencils.
fn budget(name: &str) -> Option<Duration> {
    match name {
        "heat3d" => Some(Duration::from_millis(100)),
        "euler3d" => Some(Duration::from_secs(10)),
        _ => None,
    }
}

fn cmd_bench(a: BenchArgs) -> Result<bool> {
    let names = if a.example.is_empty() {
        vec!["heat1d".to_string(), "heat3d".to_string(), "euler3d".to_string()]
    } else {
        a.example.clone()
    };
    let tty = std::io::stdout().is_terminal();
    let mut ok = true;
    println!(
        "{:<8} {:>8} {:>6} {:>6} {:>6} {:>3} {:>12} {:>10}  status",
        "example", "vertices", "edges", "swept", "depth", "K", "median ms", "budget ms"
    );
    for name in &names {
        let ex = catalog::example(name)?;
        let g = &ex.graph;
        let mut times = Vec::with_capacity(a.repeat as usize);
        let mut k = 0;
        for _ in 0..a.repeat {
            let start = Instant::now();
            let (_, dec) = solve_and_decompose(g, 1)?;
            times.push(start.elapsed());
            k = dec.stage_count();
        }
        let med = median(times).expect("at least one repetition");
        let limit = budget(name);
        let status = match limit {
            Some(b) if med >= b => {
                ok = false;
                paint("REGRESSION", Color::Red, tty)
            }
            Some(_) => paint("ok", Color::Green, tty),
            None => "-".to_string(),
        };
        println!(
            "{:<8} {:>8} {:>6} {:>6} {:>6} {:>3} {:>12.3} {:>10}  {status}",
            name,
            g.vertex_count(),
            g.edge_count(),
            g.swept_edge_count(),
            g.swept_depth()?,
            k,
            med.as_secs_f64() * 1e3,
            limit.map_or("-".to_string(), |b| b.as_millis().to_string()),
        );
    }
    if a.graphs > 0 {
        let suite = oracle_suite(a.seed, a.graphs, 1)?;
        let line = format!(
            "oracle match: {}/{} ({:.1}%), seeds {}..{}",
            suite.matched(),
            suite.total,
            suite.rate() * 100.0,
            a.seed,
            a.seed + a.graphs
        );
        if suite.mismatches.is_empty() {
            println!("{}", paint(&line, Color::Green, tty));
        } else {
            ok = false;
            println!("{} mismatched seeds: {:?}", paint(&line, Color::Red, tty), suite.mismatches);
        }
    }
    Ok(ok)
}
