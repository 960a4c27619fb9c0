use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use objgraph::api::{ApiError, QueryContext};
use objgraph::cypher::Arg;
use objgraph::engine;
use objgraph::heap::run_to_point;
use objgraph::io::{export_csv, graph_to_snapshot, load_snapshot, save_snapshot};
use objgraph::subgraph::{extract, ExtractionConfig, HeapSnapshot};

/// Query object heaps with an openCypher subset.
#[derive(Parser)]
#[command(name = "objgraph", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program to its POINT marker and print the heap as snapshot JSON.
    Run { file: PathBuf },
    /// Run one query against a snapshot and print the result table.
    Query {
        snapshot: PathBuf,
        /// Query text; `$k`, `@k` and `[]k` take the k-th ARG.
        #[arg(short, long)]
        query: String,
        #[command(flatten)]
        extraction: Extraction,
        /// Print per-stage milliseconds to stderr.
        #[arg(long)]
        time: bool,
        /// Pass the subgraph through CSV export and import before executing.
        #[arg(long)]
        via_csv: bool,
        /// Positional arguments: an integer is a uid, `[1,2]` or `1,2` a uid
        /// collection, anything else a class name. Put negative uids after `--`.
        args: Vec<String>,
    },
    /// Write the extracted subgraph as nodes.csv and relationships.csv.
    Export {
        snapshot: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        extraction: Extraction,
    },
    /// Read queries line by line; `:quit` leaves.
    Repl {
        snapshot: PathBuf,
        #[command(flatten)]
        extraction: Extraction,
    },
}

#[derive(Args)]
struct Extraction {
    /// Keep only objects reachable from this uid; repeatable.
    #[arg(long = "root")]
    roots: Vec<i64>,
    /// Classes whose instances are always kept.
    #[arg(long, value_delimiter = ',')]
    whitelist: Vec<String>,
    /// Classes whose instances are dropped.
    #[arg(long, value_delimiter = ',')]
    blacklist: Vec<String>,
    /// Drop objects unreachable from the snapshot roots first.
    #[arg(long)]
    gc: bool,
}

impl Extraction {
    fn config(&self) -> ExtractionConfig {
        ExtractionConfig {
            whitelist: self.whitelist.iter().cloned().collect(),
            blacklist: self.blacklist.iter().cloned().collect(),
            roots: self.roots.clone(),
            force_collect: self.gc,
        }
    }
}

enum Failure {
    Input(String),
    Query(String),
}

fn parse_arg(text: &str) -> Arg {
    let t = text.trim();
    if let Ok(v) = t.parse::<i64>() {
        return Arg::Uid(v);
    }
    let inner = t.strip_prefix('[').and_then(|s| s.strip_suffix(']'));
    let list = inner.unwrap_or(t);
    if inner.is_some() || t.contains(',') {
        let items: Result<Vec<i64>, _> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect();
        if let Ok(items) = items {
            return Arg::Uids(items);
        }
    }
    Arg::ClassName(t.to_string())
}

fn read_snapshot(path: &Path) -> Result<HeapSnapshot, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    load_snapshot(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn query_error(e: ApiError) -> Failure {
    Failure::Query(e.to_string())
}

/// Writes through a temporary sibling and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

fn cmd_run(file: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(file).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let graph = run_to_point(&text).map_err(|e| Failure::Input(format!("{}: {e}", file.display())))?;
    let snapshot = graph_to_snapshot(&graph).map_err(|e| Failure::Input(e.to_string()))?;
    print!("{}", save_snapshot(&snapshot));
    Ok(())
}

fn cmd_query(
    path: &Path,
    query: &str,
    extraction: &Extraction,
    time: bool,
    via_csv: bool,
    args: &[String],
) -> Result<(), Failure> {
    let snapshot = read_snapshot(path)?;
    let mut ctx = QueryContext::new(snapshot).map_err(|e| Failure::Input(e.to_string()))?;
    ctx.defaults = extraction.config();
    ctx.via_csv = via_csv;
    let args: Vec<Arg> = args.iter().map(|a| parse_arg(a)).collect();
    let rs = if extraction.roots.is_empty() {
        ctx.query_unbounded(query, &args)
    } else {
        ctx.query_bounded(&extraction.roots, query, &args)
    }
    .map_err(query_error)?;
    for lint in rs.lints() {
        eprintln!("warning: {}", lint.message);
    }
    if time {
        let t = rs.timings();
        for (stage, d) in t.stages() {
            eprintln!("time {stage}: {:.3} ms", d.as_secs_f64() * 1e3);
        }
        eprintln!("time total: {:.3} ms", t.total().as_secs_f64() * 1e3);
    }
    print!("{}", rs.to_tsv());
    Ok(())
}

fn cmd_export(path: &Path, out: &Path, extraction: &Extraction) -> Result<(), Failure> {
    let snapshot = read_snapshot(path)?;
    let graph = extract(&snapshot, &extraction.config()).map_err(|e| Failure::Query(format!("extract: {e}")))?;
    let bundle = export_csv(&graph);
    let io_err = |e: io::Error| Failure::Input(format!("{}: {e}", out.display()));
    fs::create_dir_all(out).map_err(io_err)?;
    write_atomic(&out.join("nodes.csv"), &bundle.nodes).map_err(io_err)?;
    write_atomic(&out.join("relationships.csv"), &bundle.relationships).map_err(io_err)?;
    Ok(())
}

fn cmd_repl(path: &Path, extraction: &Extraction) -> Result<(), Failure> {
    let snapshot = read_snapshot(path)?;
    let mut graph = extract(&snapshot, &extraction.config()).map_err(|e| Failure::Query(format!("extract: {e}")))?;
    let interactive = io::stdin().is_terminal();
    let stdout = io::stdout();
    let mut lines = io::stdin().lock().lines();
    loop {
        if interactive {
            print!("objgraph> ");
            let _ = stdout.lock().flush();
        }
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| Failure::Input(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":quit" {
            break;
        }
        match engine::run(line, &mut graph) {
            Ok(table) => print!("{}", table.to_tsv(&graph)),
            Err(e) => println!("error: {}", ApiError::from(e)),
        }
        let _ = stdout.lock().flush();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { file } => cmd_run(file),
        Cmd::Query {
            snapshot,
            query,
            extraction,
            time,
            via_csv,
            args,
        } => cmd_query(snapshot, query, extraction, *time, *via_csv, args),
        Cmd::Export { snapshot, out, extraction } => cmd_export(snapshot, out, extraction),
        Cmd::Repl { snapshot, extraction } => cmd_repl(snapshot, extraction),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Query(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
