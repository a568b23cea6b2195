//! The `dppmle` command-line driver.
//!
//! Exit codes: `0` success, `1` invalid input or I/O failure, `2` incomplete
//! solution set, `3` a verification assertion failed.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::analysis::{enumerate_regions, ml_degree, verify_counts, VerifyReport};
use crate::dpp::{projection_from_rows, random_counts, random_subspace, sample_counts};
use crate::io::{self, IoError};
use crate::model::DataCounts;
use crate::pipeline::{estimate, Estimate, PipelineOptions};
use crate::solver::{expected_solution_count, TrackerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Verify,
    Sample,
    Regions,
    Bench,
}

#[derive(Debug, Parser)]
#[command(name = "dppmle", version, about = "MLE for rank-2 projection DPPs on the squared Grassmannian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Compute every critical point for the given counts and report the MLE.
    /// Without --u, counts are drawn uniformly from 1..=1000 using --seed.
    Solve,
    /// Solve for random counts and check the exact counts, reality and maximality.
    Verify,
    /// Draw counts from a rank-2 projection DPP.
    Sample {
        /// Rows of a 2 x n matrix, e.g. "1,0,1;0,1,1". A random subspace when absent.
        #[arg(long)]
        matrix: Option<String>,
        /// Number of sampled subsets.
        #[arg(long, default_value_t = 1000)]
        samples: u64,
    },
    /// Enumerate the sign vectors of the real regions.
    Regions,
    /// Time full solves for n = 4 up to --n.
    Bench,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Ground set size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Counts file, or inline counts ("1,2,3" or JSON).
    #[arg(long, global = true)]
    pub u: Option<String>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; defaults to the machine parallelism.
    #[arg(long, global = true, env = "DPPMLE_WORKERS")]
    pub workers: Option<usize>,
    /// Single worker and zeroed timings, for byte-identical output.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override the expected number of critical points.
    #[arg(long, global = true)]
    pub target_count: Option<usize>,
    #[arg(long, global = true, default_value_t = 30)]
    pub stall_limit: usize,
    #[arg(long, global = true)]
    pub dedup_tol: Option<f64>,
    #[arg(long, global = true)]
    pub reality_tol: Option<f64>,
}

/// Validated settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<usize>,
    pub u_source: Option<String>,
    pub seed: u64,
    pub workers: usize,
    pub deterministic: bool,
    pub out_path: Option<PathBuf>,
    pub target_count: Option<usize>,
    pub stall_limit: usize,
    pub tracker: TrackerConfig,
    pub matrix: Option<String>,
    pub samples: u64,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let c = cli.common;
        let (command, matrix, samples) = match cli.command {
            CliCommand::Solve => (Command::Solve, None, 0),
            CliCommand::Verify => (Command::Verify, None, 0),
            CliCommand::Sample { matrix, samples } => (Command::Sample, matrix, samples),
            CliCommand::Regions => (Command::Regions, None, 0),
            CliCommand::Bench => (Command::Bench, None, 0),
        };
        let mut tracker = TrackerConfig::default();
        if let Some(t) = c.dedup_tol {
            tracker.dedup_tol = t;
        }
        if let Some(t) = c.reality_tol {
            tracker.reality_tol = t;
        }
        let workers = if c.deterministic {
            1
        } else {
            c.workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
            })
        };
        let cfg = Self {
            command,
            n: c.n,
            u_source: c.u,
            seed: c.seed,
            workers,
            deterministic: c.deterministic,
            out_path: c.out,
            target_count: c.target_count,
            stall_limit: c.stall_limit,
            tracker,
            matrix,
            samples,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if let Some(n) = self.n {
            if n < 3 {
                return Err(format!("--n must be at least 3, got {n}"));
            }
        }
        if self.workers == 0 {
            return Err("--workers must be at least 1".into());
        }
        if self.deterministic && self.workers != 1 {
            return Err("--deterministic requires a single worker".into());
        }
        self.tracker.validate()
    }

    fn pipeline(&self) -> PipelineOptions {
        PipelineOptions {
            seed: self.seed,
            target_count: self.target_count,
            stall_limit: self.stall_limit,
            tracker: self.tracker.clone(),
        }
    }

    fn require_n(&self) -> Result<usize, String> {
        self.n.ok_or_else(|| "--n is required for this command".to_string())
    }
}

/// Run a validated configuration inside a worker pool of the requested size.
pub fn run(cfg: &RunConfig) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_INPUT;
        }
    };
    pool.install(|| match cfg.command {
        Command::Solve => cmd_solve(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sample => cmd_sample(cfg),
        Command::Regions => cmd_regions(cfg),
        Command::Bench => cmd_bench(cfg),
    })
}

/// Parse arguments, run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), IoError> {
    match &cfg.out_path {
        Some(path) => io::write_text(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn load_data(cfg: &RunConfig) -> Result<DataCounts, String> {
    let Some(src) = cfg.u_source.as_deref() else {
        let n = cfg.n.ok_or("--u or --n is required")?;
        return Ok(random_counts(n, 1000, cfg.seed));
    };
    let u = io::load_counts(src).map_err(|e| e.to_string())?;
    if let Some(n) = cfg.n {
        if n != u.n() {
            return Err(format!("--n {n} disagrees with counts for n = {}", u.n()));
        }
    }
    if !u.is_generic() {
        eprintln!(
            "warning: zero counts at pairs {:?}; data are not generic and counts may fall short",
            u.zero_pairs()
        );
    }
    Ok(u)
}

fn summary_line(est: &Estimate) -> String {
    let n = est.u.n();
    let degree_ok = if est.implicit_count == ml_degree(n) { "ok" } else { "MISMATCH" };
    let mle = match &est.mle {
        Some(m) => {
            let q: Vec<String> = m.implicit.q.iter().map(|v| format!("{v:.6}")).collect();
            let tie = if m.is_tied() { format!(" ({} tied candidates)", m.candidates.len()) } else { String::new() };
            format!("MLE q = [{}], loglik {:.6}{tie}", q.join(", "), m.loglik)
        }
        None => "no real critical point".into(),
    };
    format!(
        "{} critical points, {} real, {} implicit (ML degree {}: {degree_ok}); {mle}",
        est.solutions.len(),
        est.count_real(),
        est.implicit_count,
        ml_degree(n)
    )
}

pub fn cmd_solve(cfg: &RunConfig) -> i32 {
    let u = match load_data(cfg) {
        Ok(u) => u,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let est = estimate(&u, &cfg.pipeline());
    if let Err(e) = emit(cfg, &io::result_to_json(&est, cfg.deterministic)) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    eprintln!("{}", summary_line(&est));
    if est.is_complete() {
        EXIT_OK
    } else {
        eprintln!(
            "warning: incomplete solution set ({} of {}, {} lost paths)",
            est.solutions.len(),
            est.target_count,
            est.lost_paths
        );
        EXIT_INCOMPLETE
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    passed: bool,
    seed: u64,
    u: io::PairMap<'a>,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

pub fn cmd_verify(cfg: &RunConfig) -> i32 {
    let u = match load_data(cfg) {
        Ok(u) => u,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let n = u.n();
    if !(3..=7).contains(&n) {
        eprintln!("error: verify supports 3 <= n <= 7, got {n}");
        return EXIT_INPUT;
    }
    let est = estimate(&u, &cfg.pipeline());
    let report = match verify_counts(n, &u, &est.solutions, cfg.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VERIFY_FAILED;
        }
    };
    let out = VerifyOutput { passed: report.passed(), seed: cfg.seed, u: io::PairMap(&u), report: &report };
    let text = serde_json::to_string_pretty(&out).expect("serializable") + "\n";
    if let Err(e) = emit(cfg, &text) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    eprintln!(
        "n = {n}: counts ({}, {}, {}, {}) -> {}",
        report.count,
        report.count_real,
        report.implicit_count,
        report.regions_matched,
        if report.passed() { "pass" } else { "FAIL" }
    );
    for f in &report.failures {
        eprintln!("  {f}");
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

fn parse_matrix(text: &str) -> Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| format!("matrix entry {v:?}: {e}")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if rows.len() != 2 || rows.iter().any(|r| r.len() != cols) || cols < 3 {
        return Err("--matrix must have two rows of equal length >= 3".into());
    }
    Ok(DMatrix::from_row_iterator(2, cols, rows.into_iter().flatten()))
}

pub fn cmd_sample(cfg: &RunConfig) -> i32 {
    let result = (|| -> Result<String, String> {
        let m = match &cfg.matrix {
            Some(text) => parse_matrix(text)?,
            None => random_subspace(2, cfg.require_n()?, cfg.seed),
        };
        if let Some(n) = cfg.n {
            if n != m.ncols() {
                return Err(format!("--n {n} disagrees with a matrix of {} columns", m.ncols()));
            }
        }
        let kernel = projection_from_rows(&m).map_err(|e| e.to_string())?;
        let s = sample_counts(&kernel, cfg.samples, cfg.seed).map_err(|e| e.to_string())?;
        if !s.is_generic() {
            eprintln!("warning: non-generic sample, zero counts at pairs {:?}", s.zero_pairs);
        }
        Ok(io::counts_to_json(&s.counts))
    })();
    match result.and_then(|text| emit(cfg, &text).map_err(|e| e.to_string())) {
        Ok(()) => EXIT_OK,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
    }
}

pub fn cmd_regions(cfg: &RunConfig) -> i32 {
    let n = match cfg.require_n() {
        Ok(n) => n,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let set = match enumerate_regions(n, cfg.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    println!("{}", set.len());
    if let Some(path) = &cfg.out_path {
        let mut signs: Vec<Vec<i8>> = set.iter().map(|s| s.signs()).collect();
        signs.sort();
        let doc = serde_json::json!({ "n": n, "count": signs.len(), "sign_vectors": signs });
        if let Err(e) = io::write_text(path, &(serde_json::to_string(&doc).expect("json") + "\n")) {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    }
    EXIT_OK
}

pub fn cmd_bench(cfg: &RunConfig) -> i32 {
    let max_n = match cfg.require_n() {
        Ok(n) if n >= 4 => n,
        Ok(n) => {
            eprintln!("error: bench needs --n >= 4, got {n}");
            return EXIT_INPUT;
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
    };
    let mut rows = Vec::new();
    let mut all_ok = true;
    for n in 4..=max_n {
        let u = random_counts(n, 1000, cfg.seed);
        let opts = PipelineOptions { target_count: None, ..cfg.pipeline() };
        let t0 = Instant::now();
        let est = estimate(&u, &opts);
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        all_ok &= est.is_complete() && est.solutions.len() == expected_solution_count(n);
        rows.push((n, ms, est.solutions.len()));
    }
    let mut table = String::new();
    let head: Vec<String> = rows.iter().map(|(n, _, _)| format!("n = {n}")).collect();
    let time: Vec<String> = rows.iter().map(|(_, ms, _)| format!("{ms:.0} ms")).collect();
    let count: Vec<String> = rows.iter().map(|(_, _, c)| c.to_string()).collect();
    table += &format!("| {:<19} | {} |\n", "", head.join(" | "));
    table += &format!("| {:<19} | {} |\n", "Runtime", time.join(" | "));
    table += &format!("| {:<19} | {} |\n", "Number of Solutions", count.join(" | "));
    if let Err(e) = emit(cfg, &table) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_INCOMPLETE
    }
}
