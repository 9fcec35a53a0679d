//! Command-line front end: argument and config-file resolution, experiment
//! dispatch and report output.
//!
//! Settings come from three layers, highest precedence first: command-line
//! flags, then the TOML file named by `--config`, then built-in defaults.
//! Config keys are the long flag names with `-` or `_` (`victim_probability`,
//! `no-timestamp`, ...). Numbers may be written in decimal, `0x` hex or `0b`
//! binary, either as flags or as quoted strings in the config file.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a violation, 2 for any
//! invalid configuration, unreadable input or malformed trace.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::attack::{self, AttackKind, AttackScenario, Noise, ScenarioError};
use crate::cache::{Cache, CacheConfig, CacheKind, Replacement};
use crate::circuit::{self, emit_netlist};
use crate::field::{format_poly, FieldSpec};
use crate::skew::{self, SkewParams};
use crate::trace::Trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("could not write report: {0}")]
    Output(String),
}

impl CliError {
    fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

/// Parses `123`, `0x7b` or `0b1111011`.
pub fn parse_num(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    let (digits, radix) = if let Some(h) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        (h, 16)
    } else if let Some(b) = s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        (b, 2)
    } else {
        (s.as_str(), 10)
    };
    u64::from_str_radix(digits, radix).map_err(|e| format!("`{s}` is not a number: {e}"))
}

fn parse_u32(s: &str) -> Result<u32, String> {
    let v = parse_num(s)?;
    u32::try_from(v).map_err(|_| format!("{v} does not fit in 32 bits"))
}

fn parse_u64(s: &str) -> Result<u64, String> {
    parse_num(s)
}

#[derive(Debug, Parser)]
#[command(name = "galoiscache", version, about = "Skewed multi-domain cache simulator and attack lab")]
pub struct Cli {
    /// TOML file of default settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustively check diagonalization and per-way bijection.
    Verify {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Replay a trace file and report per-domain statistics.
    Simulate {
        /// Trace file: `<domain> <R|W> <hex address>` per line.
        trace: PathBuf,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        cache: CacheArgs,
        #[arg(long, value_parser = parse_u64)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a Monte Carlo attack experiment.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Report the XOR-gate cost of the permutation circuit.
    Cost {
        #[command(flatten)]
        field: FieldArgs,
        /// Write one netlist per way constant into this directory.
        #[arg(long)]
        emit_netlists: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum AttackCommand {
    /// Prime+Probe against a conventional cache.
    BaselinePp(AttackArgs),
    /// Prime+Probe against a Galois cache.
    GaloisPp(AttackArgs),
    /// Two colluding domains against a Galois cache.
    Collusion(AttackArgs),
    /// Detection rate across GF(2^n) sizes.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct FieldArgs {
    /// Field characteristic.
    #[arg(long, value_parser = parse_u32)]
    pub p: Option<u32>,
    /// Extension degree; the cache is p^n x p^n.
    #[arg(long, value_parser = parse_u32)]
    pub n: Option<u32>,
    /// Reducing polynomial for GF(2^n), e.g. 0b1011.
    #[arg(long, value_parser = parse_u32)]
    pub modulus: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    pub a: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    pub b: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    pub c: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CacheArgs {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Sets of a conventional cache.
    #[arg(long, value_parser = parse_u32)]
    pub sets: Option<u32>,
    /// Ways of a conventional cache.
    #[arg(long, value_parser = parse_u32)]
    pub ways: Option<u32>,
    #[arg(long, value_enum)]
    pub replacement: Option<ReplacementArg>,
    /// log2 of the number of stacked instances.
    #[arg(long, value_parser = parse_u32)]
    pub stack_bits: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    pub line_offset_bits: Option<u32>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Leave the generation time out of JSON reports.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub cache: CacheArgs,
    #[arg(long, value_parser = parse_u64)]
    pub trials: Option<u64>,
    #[arg(long, value_parser = parse_u64)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_u32)]
    pub victim_domain: Option<u32>,
    /// Adversary domain ids; give two for collusion (prober first).
    #[arg(long = "adversary", value_parser = parse_u32)]
    pub adversaries: Vec<u32>,
    /// Victim set, or `random` for a fresh draw each trial.
    #[arg(long)]
    pub victim_set: Option<String>,
    #[arg(long, value_parser = parse_u32)]
    pub adversary_set: Option<u32>,
    /// Squeezer set left unfilled (collusion).
    #[arg(long, value_parser = parse_u32)]
    pub unfilled_set: Option<u32>,
    #[arg(long)]
    pub victim_probability: Option<f64>,
    #[arg(long, value_parser = parse_u32)]
    pub noise_domain: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    pub noise_accesses: Option<u32>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Attack to sweep.
    #[arg(long = "attack", value_enum)]
    pub attack: Option<SweepKind>,
    #[arg(long, value_parser = parse_u32)]
    pub n_min: Option<u32>,
    #[arg(long, value_parser = parse_u32)]
    pub n_max: Option<u32>,
    #[arg(long, value_parser = parse_u64)]
    pub trials: Option<u64>,
    #[arg(long, value_parser = parse_u64)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub victim_probability: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Galois,
    Conventional,
    StackedGalois,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReplacementArg {
    Random,
    Lru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    GaloisPp,
    Collusion,
}

/// Flag-over-file lookup.
struct Layers {
    file: toml::Table,
}

impl Layers {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Layers { file: toml::Table::new() });
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let file = table.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect();
        Ok(Layers { file })
    }

    fn raw(&self, key: &str) -> Option<&toml::Value> {
        self.file.get(key)
    }

    fn num(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) => u64::try_from(*i)
                .map(Some)
                .map_err(|_| CliError::config(format!("config `{key}` must be non-negative"))),
            Some(toml::Value::String(s)) => parse_num(s).map(Some).map_err(|e| CliError::config(format!("config `{key}`: {e}"))),
            Some(other) => Err(CliError::config(format!("config `{key}` must be a number, got {other}"))),
        }
    }

    fn u32(&self, flag: Option<u32>, key: &str) -> Result<Option<u32>, CliError> {
        match self.num(flag.map(u64::from), key)? {
            None => Ok(None),
            Some(v) => u32::try_from(v).map(Some).map_err(|_| CliError::config(format!("`{key}` = {v} is too large"))),
        }
    }

    fn float(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(CliError::config(format!("config `{key}` must be a number, got {other}"))),
        }
    }

    fn text(&self, flag: Option<String>, key: &str) -> Result<Option<String>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(toml::Value::Integer(i)) => Ok(Some(i.to_string())),
            Some(other) => Err(CliError::config(format!("config `{key}` must be a string, got {other}"))),
        }
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some(toml::Value::Boolean(b)) => Ok(*b),
            Some(other) => Err(CliError::config(format!("config `{key}` must be true or false, got {other}"))),
        }
    }

    fn choice<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.text(None, key)? {
            None => Ok(None),
            Some(s) => T::from_str(&s, true).map(Some).map_err(|e| CliError::config(format!("config `{key}`: {e}"))),
        }
    }
}

/// Resolved settings, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub field: FieldConfig,
    pub skew: SkewConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<CacheSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldConfig {
    pub p: u32,
    pub n: u32,
    pub order: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SkewConfig {
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct CacheSection {
    pub kind: CacheKind,
    pub sets: u32,
    pub ways: u32,
    pub replacement: Replacement,
    pub line_offset_bits: u32,
    pub stack_bits: u32,
}

impl CacheSection {
    fn of(cfg: &CacheConfig) -> Self {
        CacheSection {
            kind: cfg.kind,
            sets: cfg.num_sets,
            ways: cfg.num_ways,
            replacement: cfg.replacement,
            line_offset_bits: cfg.line_offset_bits,
            stack_bits: cfg.stack_bits,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSection {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Not echoed, so stamped and unstamped reports differ only in the stamp.
    #[serde(skip)]
    pub timestamp: bool,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
    config: &'a RunConfig,
    report: &'a R,
}

struct Output {
    section: OutputSection,
}

impl Output {
    fn resolve(args: &OutputArgs, layers: &Layers) -> Result<Self, CliError> {
        let format = layers.choice(args.format, "format")?.unwrap_or(Format::Json);
        let path = layers.text(args.output.as_ref().map(|p| p.display().to_string()), "output")?;
        let timestamp = !layers.flag(args.no_timestamp, "no_timestamp")?;
        Ok(Output { section: OutputSection { format, path, timestamp } })
    }

    fn json<R: Serialize>(&self, config: &RunConfig, report: &R) -> Result<Vec<u8>, CliError> {
        let generated_at_unix = self.section.timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        let env = Envelope {
            tool: "galoiscache",
            version: env!("CARGO_PKG_VERSION"),
            generated_at_unix,
            config,
            report,
        };
        let mut bytes = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Output(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    fn csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }

    fn emit(&self, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
        match &self.section.path {
            Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.into(), source }),
            None => stdout.write_all(bytes).map_err(|e| CliError::Output(e.to_string())),
        }
    }
}

struct ResolvedField {
    field: FieldSpec,
    skew: SkewParams,
    config: FieldConfig,
    skew_config: SkewConfig,
}

fn resolve_field(args: &FieldArgs, layers: &Layers) -> Result<ResolvedField, CliError> {
    let p = layers.u32(args.p, "p")?.unwrap_or(2);
    let n = layers.u32(args.n, "n")?.unwrap_or(if p == 2 { 2 } else { 1 });
    let modulus = layers.u32(args.modulus, "modulus")?;
    let field = FieldSpec::new(p, n, modulus).map_err(CliError::config)?;
    let a = layers.u32(args.a, "a")?.unwrap_or(1);
    let b = layers.u32(args.b, "b")?.unwrap_or(1);
    let c = layers.u32(args.c, "c")?.unwrap_or(0);
    let skew = SkewParams::new(field, a, b, c).map_err(CliError::config)?;
    Ok(ResolvedField {
        config: FieldConfig {
            p,
            n: field.degree(),
            order: field.order(),
            modulus: (field.degree() > 1).then(|| format!("{:#b} ({})", field.modulus(), format_poly(field.modulus()))),
        },
        skew_config: SkewConfig { a, b, c },
        field,
        skew,
    })
}

fn resolve_cache(args: &CacheArgs, layers: &Layers, skew: &SkewParams, default: KindArg) -> Result<CacheConfig, CliError> {
    let kind = layers.choice(args.kind, "kind")?.unwrap_or(default);
    let mut cfg = match kind {
        KindArg::Galois => CacheConfig::galois(skew.clone()),
        KindArg::StackedGalois => CacheConfig::stacked(skew.clone(), layers.u32(args.stack_bits, "stack_bits")?.unwrap_or(1)),
        KindArg::Conventional => {
            let replacement = match layers.choice(args.replacement, "replacement")?.unwrap_or(ReplacementArg::Lru) {
                ReplacementArg::Lru => Replacement::Lru,
                ReplacementArg::Random => Replacement::Random,
            };
            CacheConfig::conventional(
                layers.u32(args.sets, "sets")?.unwrap_or(4),
                layers.u32(args.ways, "ways")?.unwrap_or(4),
                replacement,
            )
        }
    };
    if kind != KindArg::Conventional {
        if let Some(ReplacementArg::Lru) = layers.choice(args.replacement, "replacement")? {
            return Err(CliError::config("galois caches use random replacement"));
        }
        if kind == KindArg::Galois && layers.u32(args.stack_bits, "stack_bits")?.is_some_and(|k| k > 0) {
            return Err(CliError::config("--stack-bits needs --kind stacked-galois"));
        }
    }
    if let Some(bits) = layers.u32(args.line_offset_bits, "line_offset_bits")? {
        cfg = cfg.with_line_offset_bits(bits);
    }
    cfg.validate().map_err(CliError::config)?;
    Ok(cfg)
}

#[derive(Serialize)]
struct VerifyReport {
    holds: bool,
    diagonalization: skew::VerificationReport<skew::DiagonalViolation>,
    way_bijection: skew::VerificationReport<skew::BijectionViolation>,
}

#[derive(Serialize)]
struct VerifyRow {
    check: &'static str,
    checked: u64,
    violations: usize,
}

#[derive(Serialize)]
struct StatsRow {
    domain: u32,
    hits: u64,
    misses: u64,
    evictions_caused: u64,
    self_evictions: u64,
}

#[derive(Serialize)]
struct SimulateReport {
    accesses: usize,
    domains: std::collections::BTreeMap<u32, crate::cache::DomainStats>,
}

#[derive(Serialize)]
struct SweepCsvRow {
    n: u32,
    field: String,
    theoretical: f64,
    empirical: f64,
    ci_low: f64,
    ci_high: f64,
    within_3sd: bool,
}

#[derive(Serialize)]
struct CostCsvRow {
    path: &'static str,
    constant: u32,
    xor_count: usize,
    depth: u32,
    max_row_weight: u32,
}

fn verify(field: &FieldArgs, out: &OutputArgs, layers: &Layers, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let f = resolve_field(field, layers)?;
    let output = Output::resolve(out, layers)?;
    let report = VerifyReport {
        diagonalization: skew::verify_diagonalization(&f.skew),
        way_bijection: skew::verify_way_bijection(&f.skew),
        holds: false,
    };
    let report = VerifyReport { holds: report.diagonalization.holds() && report.way_bijection.holds(), ..report };
    let config = RunConfig {
        command: "verify".into(),
        field: f.config,
        skew: f.skew_config,
        cache: None,
        experiment: None,
        seed: None,
        trials: None,
        output: output.section.clone(),
    };
    let bytes = match output.section.format {
        Format::Json => output.json(&config, &report)?,
        Format::Csv => Output::csv([
            VerifyRow {
                check: "diagonalization",
                checked: report.diagonalization.checked,
                violations: report.diagonalization.violations.len(),
            },
            VerifyRow {
                check: "way_bijection",
                checked: report.way_bijection.checked,
                violations: report.way_bijection.violations.len(),
            },
        ])?,
    };
    output.emit(&bytes, stdout)?;
    Ok(if report.holds { EXIT_OK } else { EXIT_VIOLATION })
}

fn simulate(
    trace_path: &Path,
    field: &FieldArgs,
    cache: &CacheArgs,
    seed: Option<u64>,
    out: &OutputArgs,
    layers: &Layers,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let f = resolve_field(field, layers)?;
    let seed = layers.num(seed, "seed")?.unwrap_or(0);
    let cfg = resolve_cache(cache, layers, &f.skew, KindArg::Galois)?.with_seed(seed);
    let output = Output::resolve(out, layers)?;
    let text = std::fs::read_to_string(trace_path).map_err(|source| CliError::Io { path: trace_path.into(), source })?;
    let trace: Trace = text.parse().map_err(|e| CliError::config(format!("{}: {e}", trace_path.display())))?;
    let mut sim = Cache::new(cfg.clone()).map_err(CliError::config)?;
    let domains = trace
        .replay(&mut sim)
        .map_err(|e| CliError::config(format!("{}: {e}", trace_path.display())))?;
    let config = RunConfig {
        command: "simulate".into(),
        field: f.config,
        skew: f.skew_config,
        cache: Some(CacheSection::of(&cfg)),
        experiment: Some(serde_json::json!({ "trace": trace_path.display().to_string() })),
        seed: Some(seed),
        trials: None,
        output: output.section.clone(),
    };
    let bytes = match output.section.format {
        Format::Json => output.json(&config, &SimulateReport { accesses: trace.records.len(), domains })?,
        Format::Csv => Output::csv(domains.iter().map(|(&domain, s)| StatsRow {
            domain,
            hits: s.hits,
            misses: s.misses,
            evictions_caused: s.evictions_caused,
            self_evictions: s.self_evictions,
        }))?,
    };
    output.emit(&bytes, stdout)?;
    Ok(EXIT_OK)
}

fn build_scenario(kind: AttackKind, args: &AttackArgs, layers: &Layers) -> Result<(AttackScenario, ResolvedField), CliError> {
    let f = resolve_field(&args.field, layers)?;
    let trials = layers.num(args.trials, "trials")?.unwrap_or(10_000);
    let seed = layers.num(args.seed, "seed")?.unwrap_or(0);
    let mut sc = match kind {
        AttackKind::BaselinePrimeProbe => {
            let cache = resolve_cache(&args.cache, layers, &f.skew, KindArg::Conventional)?;
            AttackScenario::baseline(cache, 0, trials, seed)
        }
        AttackKind::GaloisPrimeProbe | AttackKind::Collusion => {
            let cache = resolve_cache(&args.cache, layers, &f.skew, KindArg::Galois)?;
            let base = if kind == AttackKind::Collusion {
                AttackScenario::collusion(f.skew.clone(), trials, seed)
            } else {
                AttackScenario::galois_prime_probe(f.skew.clone(), trials, seed)
            };
            AttackScenario { cache, ..base }
        }
    };
    if let Some(v) = layers.u32(args.victim_domain, "victim_domain")? {
        sc.victim_domain = v;
    }
    if !args.adversaries.is_empty() {
        sc.adversary_domains = args.adversaries.clone();
    } else if let Some(toml::Value::Array(list)) = layers.raw("adversary") {
        sc.adversary_domains = list
            .iter()
            .map(|v| v.as_integer().and_then(|i| u32::try_from(i).ok()))
            .collect::<Option<Vec<u32>>>()
            .ok_or_else(|| CliError::config("config `adversary` must be a list of domain ids"))?;
    }
    match layers.text(args.victim_set.clone(), "victim_set")? {
        Some(s) if s.eq_ignore_ascii_case("random") => sc.victim_target_set = None,
        Some(s) => {
            let set = parse_u32(&s).map_err(|e| CliError::config(format!("--victim-set: {e}")))?;
            sc.victim_target_set = Some(set);
            if kind == AttackKind::BaselinePrimeProbe && args.adversary_set.is_none() && layers.raw("adversary_set").is_none() {
                sc.adversary_set = set;
            }
        }
        None => {}
    }
    if let Some(s) = layers.u32(args.adversary_set, "adversary_set")? {
        sc.adversary_set = s;
    }
    sc.unfilled_set = layers.u32(args.unfilled_set, "unfilled_set")?;
    if let Some(p) = layers.float(args.victim_probability, "victim_probability")? {
        sc.victim_access_probability = p;
    }
    let noise_domain = layers.u32(args.noise_domain, "noise_domain")?;
    let noise_accesses = layers.u32(args.noise_accesses, "noise_accesses")?;
    sc.noise = match (noise_domain, noise_accesses) {
        (Some(domain), accesses) => Some(Noise { domain, accesses_per_step: accesses.unwrap_or(1) }),
        (None, Some(n)) if n > 0 => return Err(CliError::config("--noise-accesses needs --noise-domain")),
        _ => None,
    };
    sc.validate()?;
    Ok((sc, f))
}

fn scenario_summary(sc: &AttackScenario) -> serde_json::Value {
    serde_json::json!({
        "attack": sc.kind,
        "victim_domain": sc.victim_domain,
        "adversary_domains": sc.adversary_domains,
        "victim_target_set": sc.victim_target_set.map_or(serde_json::json!("random"), |s| serde_json::json!(s)),
        "adversary_set": (sc.kind != AttackKind::Collusion).then_some(sc.adversary_set),
        "unfilled_set": (sc.kind == AttackKind::Collusion).then(|| sc.unfilled_set.unwrap_or(sc.cache.num_sets - 1)),
        "victim_access_probability": sc.victim_access_probability,
        "noise": sc.noise,
    })
}

fn attack_cmd(kind: AttackKind, args: &AttackArgs, layers: &Layers, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (sc, f) = build_scenario(kind, args, layers)?;
    let output = Output::resolve(&args.output, layers)?;
    let records = attack::run_trials(&sc)?;
    let config = RunConfig {
        command: format!("attack {kind}"),
        field: f.config,
        skew: f.skew_config,
        cache: Some(CacheSection::of(&sc.cache)),
        experiment: Some(scenario_summary(&sc)),
        seed: Some(sc.seed),
        trials: Some(sc.trials),
        output: output.section.clone(),
    };
    let bytes = match output.section.format {
        Format::Json => output.json(&config, &attack::DetectionReport::from_trials(&sc, &records))?,
        Format::Csv => Output::csv(records)?,
    };
    output.emit(&bytes, stdout)?;
    Ok(EXIT_OK)
}

fn sweep_cmd(args: &SweepArgs, layers: &Layers, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let kind = match layers.choice(args.attack, "attack")?.unwrap_or(SweepKind::GaloisPp) {
        SweepKind::GaloisPp => AttackKind::GaloisPrimeProbe,
        SweepKind::Collusion => AttackKind::Collusion,
    };
    let n_min = layers.u32(args.n_min, "n_min")?.unwrap_or(2);
    let n_max = layers.u32(args.n_max, "n_max")?.unwrap_or(4);
    if n_min < 2 || n_max > 8 || n_min > n_max {
        return Err(CliError::config(format!("sweep range {n_min}..={n_max} must lie within 2..=8")));
    }
    let trials = layers.num(args.trials, "trials")?.unwrap_or(10_000);
    let seed = layers.num(args.seed, "seed")?.unwrap_or(0);
    let p = layers.float(args.victim_probability, "victim_probability")?.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&p) {
        return Err(ScenarioError::Probability(p).into());
    }
    let output = Output::resolve(&args.output, layers)?;
    let rows = attack::sweep_detection_vs_field(kind, n_min..=n_max, trials, seed, p)?;
    let config = RunConfig {
        command: "attack sweep".into(),
        field: FieldConfig { p: 2, n: n_min, order: 1 << n_min, modulus: None },
        skew: SkewConfig { a: 1, b: 1, c: 0 },
        cache: None,
        experiment: Some(serde_json::json!({
            "attack": kind,
            "n_min": n_min,
            "n_max": n_max,
            "victim_access_probability": p,
        })),
        seed: Some(seed),
        trials: Some(trials),
        output: output.section.clone(),
    };
    let bytes = match output.section.format {
        Format::Json => output.json(&config, &serde_json::json!({ "rows": rows }))?,
        Format::Csv => Output::csv(rows.iter().map(|r| SweepCsvRow {
            n: r.n,
            field: r.field.clone(),
            theoretical: r.theoretical,
            empirical: r.empirical,
            ci_low: r.ci.low,
            ci_high: r.ci.high,
            within_3sd: r.within_3sd,
        }))?,
    };
    output.emit(&bytes, stdout)?;
    Ok(EXIT_OK)
}

fn cost_cmd(
    field: &FieldArgs,
    netlist_dir: Option<&Path>,
    out: &OutputArgs,
    layers: &Layers,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let f = resolve_field(field, layers)?;
    if !f.field.is_binary() || f.field.degree() < 2 {
        return Err(CliError::config("the XOR cost model needs GF(2^n) with n >= 2"));
    }
    let output = Output::resolve(out, layers)?;
    let (report, networks) = circuit::permutation_cost(&f.skew).map_err(CliError::config)?;
    let netlist_dir = match netlist_dir {
        Some(dir) => Some(dir.to_path_buf()),
        None => layers.text(None, "emit_netlists")?.map(PathBuf::from),
    };
    if let Some(dir) = &netlist_dir {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        for (w, net) in networks.iter().enumerate() {
            let path = dir.join(format!("way_{w}.net"));
            let text = emit_netlist(net, &format!("mul_w{w}"));
            std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        }
    }
    let config = RunConfig {
        command: "cost".into(),
        field: f.config,
        skew: f.skew_config,
        cache: None,
        experiment: netlist_dir.map(|d| serde_json::json!({ "netlists": d.display().to_string() })),
        seed: None,
        trials: None,
        output: output.section.clone(),
    };
    let bytes = match output.section.format {
        Format::Json => output.json(&config, &report)?,
        Format::Csv => {
            let set = std::iter::once(("set", report.set_path));
            let ways = report.per_way.iter().map(|c| ("way", *c));
            Output::csv(set.chain(ways).map(|(path, c)| CostCsvRow {
                path,
                constant: c.constant,
                xor_count: c.xor_count,
                depth: c.depth,
                max_row_weight: c.max_row_weight,
            }))?
        }
    };
    output.emit(&bytes, stdout)?;
    Ok(EXIT_OK)
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let layers = Layers::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Verify { field, output } => verify(field, output, &layers, stdout),
        Command::Simulate { trace, field, cache, seed, output } => {
            simulate(trace, field, cache, *seed, output, &layers, stdout)
        }
        Command::Attack(AttackCommand::BaselinePp(a)) => attack_cmd(AttackKind::BaselinePrimeProbe, a, &layers, stdout),
        Command::Attack(AttackCommand::GaloisPp(a)) => attack_cmd(AttackKind::GaloisPrimeProbe, a, &layers, stdout),
        Command::Attack(AttackCommand::Collusion(a)) => attack_cmd(AttackKind::Collusion, a, &layers, stdout),
        Command::Attack(AttackCommand::Sweep(a)) => sweep_cmd(a, &layers, stdout),
        Command::Cost { field, emit_netlists, output } => cost_cmd(field, emit_netlists.as_deref(), output, &layers, stdout),
    }
}
