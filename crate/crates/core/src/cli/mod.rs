//! The `cpdsearch` command line: file formats, orchestration and subcommands.
//!
//! Exit codes: 0 when a CPD is found (or a verification holds), 1 when none
//! exists (or verification fails), 2 on any input or usage error.

pub mod format;
pub mod orchestrate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::gf::Field;
use crate::instances::{lysikov, mmt, random_tensor, scramble};
use crate::search_general::{SearchConfig, Shard};
use crate::tensor::{cpd_verify, Tensor};
use format::{
    read_cpd, read_tensor, to_json, CpdFile, Report, StatsReport, TensorFile, TransformsFile,
};
pub use orchestrate::{decompose, find_rank, Algorithm, DecomposeOptions, Decomposition, Route};

pub const EXIT_FOUND: i32 = 0;
pub const EXIT_NONE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cpdsearch", version, about = "Exact CPD rank search over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Mmt,
    Lysikov,
    Random,
}

#[derive(Debug, clap::Args)]
struct SearchArgs {
    /// Search algorithm.
    #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
    algorithm: Algorithm,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Only search positions `i mod n` of the stream, written `i/n`.
    #[arg(long, value_parser = parse_shard)]
    shard: Option<Shard>,
    /// Visit every state instead of stopping at the first CPD.
    #[arg(long)]
    count_states: bool,
    /// Expected field of the input; an error if the file disagrees.
    #[arg(long)]
    field: Option<u64>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Write the CPD found to this file.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a benchmark or random tensor.
    Gen {
        #[arg(value_enum)]
        kind: Kind,
        /// `m k n` for mmt.
        params: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        field: u64,
        /// Comma-separated dims for random tensors.
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Decide whether the tensor has a CPD with at most R columns.
    Decompose {
        tensor: PathBuf,
        rank: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Find the rank by trying R upward from the lower bound.
    Rank {
        tensor: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check that a CPD evaluates to a tensor.
    Verify {
        tensor: PathBuf,
        cpd: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Apply seeded random invertible matrices on every axis.
    Scramble {
        tensor: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        /// Where to write the transforms; defaults to `<output>.transforms.json`.
        #[arg(long)]
        transforms: Option<PathBuf>,
    },
}

fn parse_shard(s: &str) -> std::result::Result<Shard, String> {
    let (i, n) = s
        .split_once('/')
        .ok_or_else(|| format!("expected i/n, got {s:?}"))?;
    let i = i.trim().parse().map_err(|e| format!("shard index: {e}"))?;
    let n = n.trim().parse().map_err(|e| format!("shard count: {e}"))?;
    Shard::new(i, n).map_err(|e| e.to_string())
}

/// Default sidecar path: `out.json` becomes `out.transforms.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map_or_else(|| "tensor".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}.transforms.json"))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load(path: &Path, field: Option<u64>) -> Result<Tensor> {
    let t = read_tensor(path)?;
    if let Some(p) = field {
        if u64::from(t.field().p()) != p {
            return Err(Error::FieldMismatch(t.field().p(), p as u32));
        }
    }
    Ok(t)
}

fn options(args: &SearchArgs) -> DecomposeOptions {
    DecomposeOptions {
        algorithm: args.algorithm,
        search: SearchConfig {
            count_states: args.count_states,
            shard: args.shard.unwrap_or_default(),
            threads: args.threads.max(1),
            progress: true,
            ..SearchConfig::default()
        },
        ..DecomposeOptions::default()
    }
}

fn report(d: &Decomposition) -> Report {
    Report {
        status: if d.found() { "found" } else { "none" }.into(),
        threshold: d.threshold,
        rank: d.cpd.as_ref().map(|c| c.rank()),
        algorithm: d.route.name().into(),
        cpd: d.cpd.as_ref().map(CpdFile::from_cpd),
        stats: StatsReport {
            states: d.stats.states_tested,
            good_pairs: d.stats.good_pairs,
            elapsed_ms: orchestrate::elapsed_ms(d.stats.elapsed),
            shortcut: d.via_shortcut,
        },
    }
}

fn finish(d: &Decomposition, args: &SearchArgs) -> Result<i32> {
    let rep = report(d);
    if let (Some(path), Some(c)) = (&args.output, &rep.cpd) {
        std::fs::write(path, format!("{}\n", to_json(c)))?;
    }
    if args.json {
        println!("{}", to_json(&rep));
    } else {
        let secs = d.stats.elapsed.as_secs_f64();
        match rep.rank {
            Some(r) => println!(
                "found: CPD with {r} columns (threshold {}, {}, {} states, {secs:.3}s)",
                rep.threshold, rep.algorithm, rep.stats.states
            ),
            None => println!(
                "none: no CPD with at most {} columns ({}, {} states, {secs:.3}s)",
                rep.threshold, rep.algorithm, rep.stats.states
            ),
        }
    }
    Ok(if d.found() { EXIT_FOUND } else { EXIT_NONE })
}

fn generate(
    kind: Kind,
    params: &[usize],
    field: u64,
    dims: &[usize],
    seed: u64,
) -> Result<Tensor> {
    let f = Field::new(field)?;
    match kind {
        Kind::Mmt => match *params {
            [m, k, n] if m > 0 && k > 0 && n > 0 => Ok(mmt(m, k, n, &f)),
            _ => Err(Error::Input("mmt needs three positive sizes: m k n".into())),
        },
        Kind::Lysikov if params.is_empty() => Ok(lysikov(&f)),
        Kind::Lysikov => Err(Error::Input("lysikov takes no sizes".into())),
        Kind::Random if !dims.is_empty() && params.is_empty() => Ok(random_tensor(&f, dims, seed)),
        Kind::Random => Err(Error::Input("random needs --dims and no sizes".into())),
    }
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Gen {
            kind,
            params,
            field,
            dims,
            seed,
            output,
        } => {
            let t = generate(kind, &params, field, &dims, seed)?;
            emit(&to_json(&TensorFile::from_tensor(&t)), output.as_deref())?;
            Ok(EXIT_FOUND)
        }
        Command::Decompose {
            tensor,
            rank,
            search,
        } => {
            let t = load(&tensor, search.field)?;
            let d = decompose(&t, rank, &options(&search))?;
            finish(&d, &search)
        }
        Command::Rank { tensor, search } => {
            let t = load(&tensor, search.field)?;
            let d = find_rank(&t, &options(&search))?;
            finish(&d, &search)
        }
        Command::Verify { tensor, cpd, json } => {
            let t = read_tensor(&tensor)?;
            let c = read_cpd(&cpd)?;
            let ok = cpd_verify(&t, &c)?;
            if json {
                println!("{}", serde_json::json!({ "valid": ok }));
            } else {
                println!("{ok}");
            }
            Ok(if ok { EXIT_FOUND } else { EXIT_NONE })
        }
        Command::Scramble {
            tensor,
            seed,
            output,
            transforms,
        } => {
            let t = read_tensor(&tensor)?;
            let (s, qs) = scramble(&t, seed);
            emit(&to_json(&TensorFile::from_tensor(&s)), output.as_deref())?;
            if let Some(path) = transforms.or_else(|| output.as_deref().map(sidecar_path)) {
                let side = TransformsFile::from_mats(t.field(), &qs);
                std::fs::write(path, format!("{}\n", to_json(&side)))?;
            }
            Ok(EXIT_FOUND)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
