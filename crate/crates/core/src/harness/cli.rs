//! `diqkd` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 protocol abort.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{parse_grid, ExperimentConfig};
use super::heatmap::cascade_heatmap;
use super::io::{write_heatmap, write_rounds, write_sweep};
use super::pipeline::{baseline_run, simulate_run, RunMode};
use super::sweep::noise_sweep;
use crate::bits::BitString;
use crate::cascade::{block_schedule, leakage_efficiency, plan_passes, run_cascade};
use crate::error::{Error, Result};
use crate::postprocessing::{asymptotic_rate, key_rate};
use crate::rng::{substream, Purpose};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "diqkd", version, about = "Device-independent QKD pipeline simulator")]
struct Cli {
    /// Experiment configuration file (flat TOML key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Without it (and without DIQKD_OUT_DIR or
    /// output_dir in the config) results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// End-to-end protocol runs; emits the summary JSON.
    Simulate(SimulateArgs),
    /// CHSH value and QBER before/after Cascade across a bit-flip noise grid.
    Sweep(SweepArgs),
    /// Remaining-error ratio after each Cascade pass, per noise level.
    Heatmap(HeatmapArgs),
    /// Standalone reconciliation of two bit files or a generated error channel.
    Cascade(CascadeArgs),
    /// Asymptotic key rate for given S and QBER, or a table along S = 2√2(1−2Q).
    Rate(RateArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
    /// Also write the first repetition's rounds as CSV to this file.
    #[arg(long)]
    dump_rounds: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// start:stop:step or a comma-separated list of bit-flip probabilities.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
}

#[derive(Debug, Args)]
struct HeatmapArgs {
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
    /// Key length per trial.
    #[arg(long)]
    len: Option<usize>,
}

#[derive(Debug, Args)]
struct CascadeArgs {
    /// File with Alice's bits ('0'/'1', whitespace ignored).
    #[arg(long, requires = "bob", conflicts_with_all = ["len", "qber"])]
    alice: Option<PathBuf>,
    #[arg(long, requires = "alice")]
    bob: Option<PathBuf>,
    /// Length of a generated key pair.
    #[arg(long, requires = "qber")]
    len: Option<usize>,
    /// Error rate of the generated channel.
    #[arg(long, requires = "len")]
    qber: Option<f64>,
    #[arg(long)]
    passes: Option<usize>,
    /// Write the corrected Bob string to this file.
    #[arg(long)]
    corrected: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long, requires = "q")]
    s: Option<f64>,
    #[arg(long, requires = "s")]
    q: Option<f64>,
    /// Reconciliation leakage for the final-length computation.
    #[arg(long, default_value_t = 0)]
    leaked: usize,
    /// Sifted key length for the final-length computation.
    #[arg(long, default_value_t = 0)]
    sifted: usize,
}

#[derive(Debug, Serialize)]
struct CascadeSummary {
    seed: u64,
    len: usize,
    passes: usize,
    block_sizes: Vec<usize>,
    initial_errors: usize,
    residual_errors: usize,
    corrections: usize,
    leaked_bits: usize,
    efficiency: Option<f64>,
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn emit(&self, file: &str, bytes: &[u8]) -> Result<()> {
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(file);
                fs::write(&path, bytes)?;
                eprintln!("wrote {}", path.display());
            }
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn read_bits(path: &Path) -> Result<BitString> {
    fs::read_to_string(path)?.parse()
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.root_seed = seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = load_config(&cli)?;
    let out = Output { dir: cfg.resolve_output_dir(cli.out.clone()) };
    match cli.command {
        Command::Simulate(args) => {
            set(&mut cfg.n_rounds, args.rounds);
            set(&mut cfg.passes, args.passes);
            cfg.repetitions = args.reps.unwrap_or(1);
            let report = baseline_run(&cfg)?;
            if let Some(path) = args.dump_rounds {
                let proto = cfg.protocol_config(cfg.noise_base.bitflip_prob)?;
                let (_, art) = simulate_run(&cfg, &proto, 0, 0, RunMode::Protocol)?;
                write_rounds(fs::File::create(path)?, &art.records)?;
            }
            out.emit("summary.json", report.to_json().as_bytes())?;
            Ok(if report.any_aborted() { EXIT_ABORT } else { EXIT_OK })
        }
        Command::Sweep(args) => {
            if let Some(g) = args.grid {
                cfg.noise_grid = parse_grid(&g)?;
            }
            set(&mut cfg.repetitions, args.reps);
            set(&mut cfg.n_rounds, args.rounds);
            set(&mut cfg.passes, args.passes);
            let rows = noise_sweep(&cfg)?;
            let mut buf = Vec::new();
            write_sweep(&mut buf, &rows)?;
            out.emit("sweep.csv", &buf)?;
            Ok(EXIT_OK)
        }
        Command::Heatmap(args) => {
            if let Some(g) = args.grid {
                cfg.heatmap_grid = parse_grid(&g)?;
            }
            set(&mut cfg.repetitions, args.reps);
            set(&mut cfg.n_rounds, args.rounds);
            set(&mut cfg.heatmap_passes, args.passes);
            set(&mut cfg.heatmap_len, args.len);
            let map = cascade_heatmap(&cfg)?;
            let mut buf = Vec::new();
            write_heatmap(&mut buf, &map)?;
            out.emit("heatmap.csv", &buf)?;
            Ok(EXIT_OK)
        }
        Command::Cascade(args) => {
            let passes = args.passes.unwrap_or(cfg.passes);
            let seed = cfg.root_seed;
            let (alice, bob) = match (args.alice, args.bob, args.len, args.qber) {
                (Some(a), Some(b), _, _) => (read_bits(&a)?, read_bits(&b)?),
                (_, _, Some(len), Some(q)) => {
                    if !(0.0..=1.0).contains(&q) {
                        return Err(Error::config(format!("--qber {q} outside [0, 1]")));
                    }
                    let alice = BitString::random(len, &mut substream(seed, Purpose::BitSource, &[]));
                    let mut channel = substream(seed, Purpose::ErrorChannel, &[]);
                    let bob = alice.iter().map(|b| b ^ (rand::Rng::gen::<f64>(&mut channel) < q) as u8).collect();
                    (alice, bob)
                }
                _ => return Err(Error::config("cascade needs --alice/--bob or --len/--qber")),
            };
            if alice.len() != bob.len() {
                return Err(Error::param(format!("key lengths differ: {} vs {}", alice.len(), bob.len())));
            }
            if alice.is_empty() {
                return Err(Error::param("keys are empty"));
            }
            let n = alice.len();
            let initial = alice.hamming_distance(&bob);
            let q = initial as f64 / n as f64;
            let block_sizes = block_schedule(q.min(0.5), n, passes)?;
            let plans = plan_passes(&block_sizes, n, &mut substream(seed, Purpose::Shuffle, &[]))?;
            let (corrected, transcript) = run_cascade(&alice, &bob, &plans)?;
            let summary = CascadeSummary {
                seed,
                len: n,
                passes,
                block_sizes,
                initial_errors: initial,
                residual_errors: alice.hamming_distance(&corrected),
                corrections: transcript.corrections().count(),
                leaked_bits: transcript.leaked_bits(),
                efficiency: leakage_efficiency(&transcript, n, q).ok(),
            };
            if let Some(path) = args.corrected {
                fs::write(path, format!("{corrected}\n"))?;
            }
            if out.dir.is_some() {
                out.emit("transcript.txt", transcript.to_lines().as_bytes())?;
            }
            out.emit("cascade.json", &json(&summary))?;
            Ok(EXIT_OK)
        }
        Command::Rate(args) => match (args.s, args.q) {
            (Some(s), Some(q)) => match key_rate(s, q, args.leaked, args.sifted, &cfg.privacy) {
                Ok(report) => {
                    out.emit("rate.json", &json(&report))?;
                    Ok(EXIT_OK)
                }
                Err(e @ Error::Abort { .. }) => {
                    eprintln!("{e}");
                    Ok(EXIT_ABORT)
                }
                Err(e) => Err(e),
            },
            _ => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["q", "s", "rate"]).map_err(|e| Error::Parse(e.to_string()))?;
                for i in 0..=100 {
                    let q = i as f64 * 0.001;
                    let s = 2.0 * std::f64::consts::SQRT_2 * (1.0 - 2.0 * q);
                    let r = asymptotic_rate(s, q)?;
                    w.write_record([format!("{q:.3}"), format!("{s:.6}"), format!("{r:.6}")])
                        .map_err(|e| Error::Parse(e.to_string()))?;
                }
                let buf = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
                out.emit("rate.csv", &buf)?;
                Ok(EXIT_OK)
            }
        },
    }
}

/// Parses `argv` (including the program name), runs the command, and returns
/// the process exit code. Diagnostics go to stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
