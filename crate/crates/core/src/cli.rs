//! Batch driver: configuration, check selection, report emission.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::alcove::reduced_chain;
use crate::qbg::qbg_dump;
use crate::rootsys::Weight;
use crate::verify::{
    available_checks, select_checks, tally, CheckResult, CheckSpec, SuiteConfig, Verifier,
    VerifyError,
};

pub const DEFAULT_RANK: usize = 2;
pub const DEFAULT_QDEG: u32 = 3;
pub const MAX_RANK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Md,
}

#[derive(Debug, Parser, Default)]
#[command(
    name = "qkflag",
    about = "Exact checks in the torus-equivariant quantum K-ring of the type C flag manifold"
)]
pub struct Args {
    /// Rank n (1..=4).
    #[arg(long)]
    pub n: Option<usize>,
    /// Truncation degree D in the Novikov variables.
    #[arg(long)]
    pub qdeg: Option<u32>,
    /// Comma-separated glob selectors over check names.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub seed2: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Config file of key=value lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent checks.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub list_checks: bool,
    /// Print the quantum Bruhat graph at rank n as JSON.
    #[arg(long)]
    pub dump_qbg: bool,
    /// Print the reduced chain of a weight given as comma-separated ε-coordinates.
    #[arg(long, value_name = "WEIGHT", allow_hyphen_values = true)]
    pub dump_chain: Option<String>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Selector(#[from] VerifyError),
    #[error("config: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Chain(#[from] crate::alcove::AlcoveError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    #[serde(rename = "D")]
    pub trunc: u32,
    pub checks: Vec<String>,
    pub seeds: [u64; 2],
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: DEFAULT_RANK,
            trunc: DEFAULT_QDEG,
            checks: vec!["*".into()],
            seeds: [0, 1],
            output: None,
            format: Format::Json,
            jobs: std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("bad value `{v}` for `{key}`")))
}

impl RunConfig {
    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", i + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "n" => self.n = parse_value(k, v)?,
                "qdeg" | "D" => self.trunc = parse_value(k, v)?,
                "checks" => {
                    self.checks = v
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                }
                "seed" => self.seeds[0] = parse_value(k, v)?,
                "seed2" => self.seeds[1] = parse_value(k, v)?,
                "out" => self.output = Some(PathBuf::from(v)),
                "jobs" => self.jobs = parse_value(k, v)?,
                "format" => {
                    self.format = Format::from_str(v, true)
                        .map_err(|_| CliError::Config(format!("bad format `{v}`")))?
                }
                _ => return Err(CliError::Config(format!("unknown key `{k}`"))),
            }
        }
        Ok(())
    }

    pub fn from_args(args: &Args) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_file_text(&text)?;
        }
        if let Some(n) = args.n {
            cfg.n = n;
        }
        if let Some(d) = args.qdeg {
            cfg.trunc = d;
        }
        if let Some(c) = &args.checks {
            cfg.checks = c.clone();
        }
        if let Some(s) = args.seed {
            cfg.seeds[0] = s;
        }
        if let Some(s) = args.seed2 {
            cfg.seeds[1] = s;
        }
        if let Some(f) = args.format {
            cfg.format = f;
        }
        if let Some(o) = &args.out {
            cfg.output = Some(o.clone());
        }
        if let Some(j) = args.jobs {
            cfg.jobs = j;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=MAX_RANK).contains(&self.n) {
            return Err(CliError::Config(format!(
                "n must lie in 1..={MAX_RANK}, got {}",
                self.n
            )));
        }
        if self.trunc < 1 {
            return Err(CliError::Config("qdeg must be at least 1".into()));
        }
        if self.seeds[0] == self.seeds[1] {
            return Err(CliError::Config("seed and seed2 must differ".into()));
        }
        Ok(())
    }

    fn suite(&self) -> SuiteConfig {
        let mut s = SuiteConfig::new(self.n, self.trunc);
        s.seed = self.seeds[0];
        s.seed2 = self.seeds[1];
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub total: usize,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub results: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable") + "\n"
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        writeln!(s, "# qkflag report\n").unwrap();
        writeln!(
            s,
            "n = {}, D = {}, seeds = {:?}, checks = {}\n",
            c.n,
            c.trunc,
            c.seeds,
            c.checks.join(",")
        )
        .unwrap();
        writeln!(s, "| check | status | ms |\n|---|---|---|").unwrap();
        for r in &self.results {
            let status = if r.passed() { "pass" } else { "FAIL" };
            writeln!(s, "| {} | {} | {:.1} |", r.name, status, r.wall_time_ms).unwrap();
        }
        let m = &self.summary;
        writeln!(
            s,
            "\n{} passed, {} failed, {} total ({:.1} ms)",
            m.passed, m.failed, m.total, m.wall_time_ms
        )
        .unwrap();
        for r in self.results.iter().filter(|r| !r.passed()) {
            writeln!(s, "\n## {}\n\n```\n{}```", r.name, r.residual).unwrap();
        }
        s
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => self.to_json(),
            Format::Md => self.to_markdown(),
        }
    }
}

/// Runs the selected checks in name order.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let specs: Vec<CheckSpec> = select_checks(cfg.n, &cfg.checks)?;
    let start = Instant::now();
    let verifier = Verifier::new(cfg.suite());
    let results = verifier.run_all(&specs, cfg.jobs);
    let (passed, failed) = tally(&results);
    let summary = Summary {
        passed,
        failed,
        total: results.len(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Report {
        config: cfg.clone(),
        results,
        summary,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Output {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::Output {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
    }
}

fn parse_weight(text: &str) -> Result<Weight, CliError> {
    let coords: Result<Vec<i64>, _> = text.split(',').map(|s| s.trim().parse::<i64>()).collect();
    let coords = coords.map_err(|_| CliError::Config(format!("bad weight `{text}`")))?;
    if coords.is_empty() || coords.len() > MAX_RANK {
        return Err(CliError::Config(format!(
            "weight `{text}` must have 1..={MAX_RANK} coordinates"
        )));
    }
    Ok(Weight::from_slice(&coords))
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    match dispatch(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(args: &Args) -> Result<i32, CliError> {
    let cfg = RunConfig::from_args(args)?;
    if cfg.n > 3 {
        eprintln!("warning: n = {} is expensive; expect long runtimes", cfg.n);
    }
    if args.list_checks {
        let names: String = available_checks(cfg.n)
            .iter()
            .map(|c| c.name() + "\n")
            .collect();
        write_out(cfg.output.as_deref(), &names)?;
        return Ok(0);
    }
    if args.dump_qbg {
        let text = serde_json::to_string_pretty(&qbg_dump(cfg.n)).expect("serializable") + "\n";
        write_out(cfg.output.as_deref(), &text)?;
        return Ok(0);
    }
    if let Some(w) = &args.dump_chain {
        let chain = reduced_chain(&parse_weight(w)?, cfg.seeds[0])?;
        let mut body = BTreeMap::new();
        body.insert("chain", json!(chain));
        body.insert("text", json!(chain.to_string()));
        let text = serde_json::to_string_pretty(&body).expect("serializable") + "\n";
        write_out(cfg.output.as_deref(), &text)?;
        return Ok(0);
    }
    let report = run(&cfg)?;
    write_out(cfg.output.as_deref(), &report.render())?;
    Ok(if report.all_passed() { 0 } else { 1 })
}
