// Copyright 2026 The Interconnect Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Each subcommand reads a TOML run manifest, applies
//! flag overrides and hands off to the library.
//!
//! ```toml
//! inputs = ["flows.ipfix"]
//! inventory = "inventory.toml"
//! capacity_snapshots = ["snapshots.csv"]
//! sampling = { mode = "random", factor = 1000 }
//! window = { start = "2016-02-01T00:00:00Z", end = "2016-02-02T00:00:00Z" }
//! scenario = "scenario.toml"
//! out = "out"
//! seed = 7
//!
//! [policy]
//! min_isps_per_region = 3
//!
//! [report]
//! direction = "ingress"
//! month = "2016-02"
//! ```
//!
//! Relative paths in a manifest are resolved against the manifest's
//! directory. The anonymization key is only ever read from the environment.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{build_private_rows, read_private_csv, write_private_csv, PrivateRow};
use crate::export::{
    build_public_rows, summarize_public, write_public_csv, write_suppression_csv, AnonymizationKey, DisclosurePolicy,
    KEY_ENV, MIN_ISPS_PER_REGION,
};
use crate::inventory::{read_capacity_snapshots, Inventory};
use crate::ipfix::{decode_stream, Direction, FlowRecord, TemplateCache};
use crate::metrics::{MetricsError, UtilizationDataset};
use crate::pipeline::{FlowPipeline, SamplingConfig, SamplingPlan, Window};
use crate::report::{build_report, ReportConfig};
use crate::sim::Scenario;
use crate::time::{format_iso, parse_timestamp, Month};

pub const FLOWS_CSV: &str = "flows.csv";
pub const PRIVATE_CSV: &str = "private.csv";
pub const PUBLIC_CSV: &str = "public.csv";
pub const SUPPRESSION_CSV: &str = "suppression.csv";
pub const PUBLIC_SUMMARY_JSON: &str = "public_summary.json";
/// Manifest written next to a simulation, ready for `aggregate`.
pub const RUN_MANIFEST: &str = "run.toml";

pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const POLICY: i32 = 5;
    pub const NO_DATA: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Policy(String),
    #[error("{0}")]
    NoData(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Parse(_) => exit::PARSE,
            CliError::Config(_) => exit::CONFIG,
            CliError::Policy(_) => exit::POLICY,
            CliError::NoData(_) => exit::NO_DATA,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "interconnect",
    version,
    about = "Interconnect utilization from sampled flow exports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the flow records of IPFIX files as CSV.
    Decode(CommonArgs),
    /// Run a scenario: IPFIX, SNMP counters and ground truth.
    Simulate(CommonArgs),
    /// Aggregate IPFIX files into the private per-interval dataset.
    Aggregate(CommonArgs),
    /// Report tables and plots from private dataset CSVs.
    Report(CommonArgs),
    /// Anonymized public dataset and suppression log.
    ExportPublic(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Decode(_) => "decode",
            Command::Simulate(_) => "simulate",
            Command::Aggregate(_) => "aggregate",
            Command::Report(_) => "report",
            Command::ExportPublic(_) => "export-public",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Decode(a)
            | Command::Simulate(a)
            | Command::Aggregate(a)
            | Command::Report(a)
            | Command::ExportPublic(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run manifest (TOML).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Overrides the manifest seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `START,END` as unix seconds or RFC 3339, aligned to 300 s.
    #[arg(long, value_parser = parse_window)]
    pub window: Option<Window>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Input files; replace the manifest's list.
    pub inputs: Vec<PathBuf>,
}

fn parse_window(text: &str) -> std::result::Result<Window, String> {
    let (a, b) = text.split_once(',').ok_or("expected START,END")?;
    let start = parse_timestamp(a).ok_or_else(|| format!("bad timestamp {a:?}"))?;
    let end = parse_timestamp(b).ok_or_else(|| format!("bad timestamp {b:?}"))?;
    Window::new(start, end).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SamplingSpec {
    Uniform(SamplingConfig),
    Plan(SamplingPlan),
}

impl SamplingSpec {
    pub fn plan(&self) -> SamplingPlan {
        match self {
            SamplingSpec::Uniform(cfg) => SamplingPlan::uniform(*cfg),
            SamplingSpec::Plan(plan) => plan.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default = "default_min_isps")]
    pub min_isps_per_region: usize,
}

fn default_min_isps() -> usize {
    MIN_ISPS_PER_REGION
}

impl Default for PolicySpec {
    fn default() -> Self {
        Self {
            min_isps_per_region: MIN_ISPS_PER_REGION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSpec {
    #[serde(default = "default_direction")]
    pub direction: Direction,
    pub month: Option<Month>,
}

fn default_direction() -> Direction {
    Direction::Ingress
}

impl Default for ReportSpec {
    fn default() -> Self {
        Self {
            direction: Direction::Ingress,
            month: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// When set, must name the subcommand being run.
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    pub inventory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub capacity_snapshots: Vec<PathBuf>,
    pub sampling: Option<SamplingSpec>,
    pub window: Option<WindowSpec>,
    pub scenario: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub policy: PolicySpec,
    #[serde(default)]
    pub report: ReportSpec,
}

impl RunManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("manifest: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Loads a manifest and makes its relative paths absolute against the
    /// manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut m = Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        m.inputs.iter_mut().for_each(fix);
        m.capacity_snapshots.iter_mut().for_each(fix);
        m.inventory.as_mut().map(fix);
        m.scenario.as_mut().map(fix);
        m.out.as_mut().map(fix);
        Ok(m)
    }

    pub fn window(&self) -> Result<Option<Window>> {
        let Some(w) = &self.window else { return Ok(None) };
        let ts = |s: &str| parse_timestamp(s).ok_or_else(|| CliError::Config(format!("window: bad timestamp {s:?}")));
        Window::new(ts(&w.start)?, ts(&w.end)?)
            .map(Some)
            .map_err(|e| CliError::Config(format!("window: {e}")))
    }
}

/// Manifest plus flag overrides, as one command sees them.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub manifest: RunManifest,
    pub window: Option<Window>,
}

pub fn resolve(command: &Command) -> Result<Resolved> {
    let args = command.args();
    let mut manifest = match &args.manifest {
        Some(path) => RunManifest::load(path)?,
        None => RunManifest::default(),
    };
    if let Some(c) = &manifest.command {
        if c != command.name() {
            return Err(CliError::Config(format!(
                "manifest is for {c:?}, not {:?}",
                command.name()
            )));
        }
    }
    if !args.inputs.is_empty() {
        manifest.inputs = args.inputs.clone();
    }
    if args.seed.is_some() {
        manifest.seed = args.seed;
    }
    if args.out.is_some() {
        manifest.out = args.out.clone();
    }
    let window = match args.window {
        Some(w) => Some(w),
        None => manifest.window()?,
    };
    Ok(Resolved { manifest, window })
}

/// Parses `args` (including the program name) and runs the command.
/// `key` is the anonymization key from the environment; `stdout` receives
/// output that has no file destination.
pub fn run(args: impl IntoIterator<Item = OsString>, key: Option<OsString>, stdout: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(&cli.command, key, stdout) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, key: Option<OsString>, stdout: &mut dyn Write) -> Result<()> {
    let r = resolve(command)?;
    match command {
        Command::Decode(_) => cmd_decode(&r, stdout),
        Command::Simulate(_) => cmd_simulate(&r),
        Command::Aggregate(_) => cmd_aggregate(&r),
        Command::Report(_) => cmd_report(&r),
        Command::ExportPublic(_) => cmd_export_public(&r, key),
    }
}

fn out_dir(m: &RunManifest) -> Result<&Path> {
    let dir = m
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("no output directory (--out)".into()))?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_err(path))
}

/// Decodes one file as a single exporter session.
pub fn decode_file(path: &Path) -> Result<Vec<FlowRecord>> {
    let buf = fs::read(path).map_err(io_err(path))?;
    let decoded = decode_stream(&buf, &mut TemplateCache::new(), 0)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if !decoded.events.is_empty() {
        warn!("{}: {} extraction events", path.display(), decoded.events.len());
    }
    info!(
        "{}: {} messages, {} records",
        path.display(),
        decoded.messages,
        decoded.records.len()
    );
    Ok(decoded.records)
}

pub fn write_flow_csv(records: &[(usize, FlowRecord)], writer: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "file",
        "exporter",
        "direction",
        "input_interface",
        "output_interface",
        "flow_start",
        "flow_start_ms",
        "flow_end_ms",
        "packet_delta",
        "octet_delta",
    ])?;
    for (file, r) in records {
        w.write_record([
            file.to_string(),
            r.exporter.to_string(),
            match r.direction {
                Direction::Ingress => "ingress".to_string(),
                Direction::Egress => "egress".to_string(),
            },
            r.input_interface.to_string(),
            r.output_interface.to_string(),
            format_iso((r.flow_start_ms / 1000) as i64),
            r.flow_start_ms.to_string(),
            r.flow_end_ms.to_string(),
            r.packet_delta.to_string(),
            r.octet_delta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_decode(r: &Resolved, stdout: &mut dyn Write) -> Result<()> {
    let m = &r.manifest;
    if m.inputs.is_empty() {
        return Err(CliError::Config("decode needs at least one input file".into()));
    }
    let mut records = Vec::new();
    for (i, path) in m.inputs.iter().enumerate() {
        records.extend(decode_file(path)?.into_iter().map(|rec| (i, rec)));
    }
    let mut buf = Vec::new();
    write_flow_csv(&records, &mut buf).map_err(|e| CliError::Parse(e.to_string()))?;
    match &m.out {
        Some(_) => {
            let path = out_dir(m)?.join(FLOWS_CSV);
            write_file(&path, &buf)?;
            info!("wrote {} records to {}", records.len(), path.display());
        }
        None => stdout.write_all(&buf).map_err(io_err(Path::new("<stdout>")))?,
    }
    Ok(())
}

fn cmd_simulate(r: &Resolved) -> Result<()> {
    let m = &r.manifest;
    let path = m
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Config("simulate needs a scenario".into()))?;
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut scenario = Scenario::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = m.seed {
        scenario.seed = seed;
    }
    if let Some(w) = r.window {
        scenario.start = w.start.to_string();
        scenario.duration_secs = w.end - w.start;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let run = scenario.run(base).map_err(|e| CliError::Config(e.to_string()))?;
    let dir = out_dir(m)?;
    let summary = run.write(dir).map_err(io_err(dir))?;
    let window = run.stream.window();
    let next = RunManifest {
        command: Some("aggregate".into()),
        inputs: vec!["flows.ipfix".into()],
        inventory: Some("inventory.toml".into()),
        sampling: Some(SamplingSpec::Uniform(scenario.sampling)),
        window: Some(WindowSpec {
            start: format_iso(window.start),
            end: format_iso(window.end),
        }),
        out: Some("aggregate".into()),
        seed: Some(scenario.seed),
        ..RunManifest::default()
    };
    write_file(&dir.join(RUN_MANIFEST), next.to_toml().as_bytes())?;
    info!(
        "simulated {} flows, {} packets, {} records into {}",
        summary.flows,
        summary.packets,
        summary.records,
        dir.display()
    );
    Ok(())
}

pub fn load_inventory(m: &RunManifest) -> Result<Inventory> {
    let path = m
        .inventory
        .as_deref()
        .ok_or_else(|| CliError::Config("no inventory".into()))?;
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut inv = Inventory::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for snap_path in &m.capacity_snapshots {
        let file = fs::File::open(snap_path).map_err(io_err(snap_path))?;
        let snaps =
            read_capacity_snapshots(file).map_err(|e| CliError::Parse(format!("{}: {e}", snap_path.display())))?;
        inv = inv
            .apply_capacity_snapshots(&snaps)
            .map_err(|e| CliError::Config(format!("{}: {e}", snap_path.display())))?;
    }
    Ok(inv)
}

fn cmd_aggregate(r: &Resolved) -> Result<()> {
    let m = &r.manifest;
    let inventory = load_inventory(m)?;
    let plan = m
        .sampling
        .as_ref()
        .ok_or_else(|| CliError::Config("aggregate needs the sampling configuration".into()))?
        .plan();
    if m.inputs.is_empty() {
        return Err(CliError::Config("aggregate needs at least one input file".into()));
    }
    let mut pipeline = FlowPipeline::new(&inventory, plan, r.window);
    for path in &m.inputs {
        pipeline.ingest_all(&decode_file(path)?);
    }
    let (agg, stats) = pipeline.finish();
    info!(
        "ingested {} records ({} unmonitored), {} estimated bytes, {} outside the window",
        stats.records, stats.unmonitored_records, stats.estimated_bytes, stats.clipped_bytes
    );
    let rows = build_private_rows(&agg, &inventory, r.window);
    let mut buf = Vec::new();
    write_private_csv(&rows, &mut buf).map_err(|e| CliError::Parse(e.to_string()))?;
    let path = out_dir(m)?.join(PRIVATE_CSV);
    write_file(&path, &buf)?;
    info!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

/// Reads and concatenates private dataset CSVs.
pub fn load_private_rows(paths: &[PathBuf]) -> Result<Vec<PrivateRow>> {
    if paths.is_empty() {
        return Err(CliError::Config("no dataset files given".into()));
    }
    let mut rows = Vec::new();
    for path in paths {
        let file = fs::File::open(path).map_err(io_err(path))?;
        rows.extend(read_private_csv(file).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?);
    }
    Ok(rows)
}

fn metrics_err(e: MetricsError) -> CliError {
    match e {
        MetricsError::EmptyInput => CliError::NoData("dataset has no rows".into()),
        e => CliError::Parse(e.to_string()),
    }
}

fn cmd_report(r: &Resolved) -> Result<()> {
    let m = &r.manifest;
    let rows = load_private_rows(&m.inputs)?;
    let ds = UtilizationDataset::from_rows(&rows);
    let cfg = ReportConfig {
        direction: m.report.direction,
        month: m.report.month,
        window: r.window,
    };
    let report = build_report(&ds, &cfg).map_err(metrics_err)?;
    let dir = out_dir(m)?;
    let written = report.write(dir).map_err(io_err(dir))?;
    info!("wrote {} report files to {}", written.len(), dir.display());
    Ok(())
}

fn cmd_export_public(r: &Resolved, key: Option<OsString>) -> Result<()> {
    let m = &r.manifest;
    let key = key
        .and_then(|k| k.into_string().ok())
        .ok_or_else(|| CliError::Policy(format!("{KEY_ENV} is not set or not valid UTF-8")))?;
    let key = AnonymizationKey::new(key.into_bytes()).map_err(|e| CliError::Policy(e.to_string()))?;
    let policy =
        DisclosurePolicy::new(m.policy.min_isps_per_region, key).map_err(|e| CliError::Policy(e.to_string()))?;
    let mut rows = load_private_rows(&m.inputs)?;
    if let Some(w) = r.window {
        rows.retain(|row| w.contains(row.timestamp));
    }
    let export = build_public_rows(&rows, &policy);
    let dir = out_dir(m)?;

    let mut buf = Vec::new();
    write_public_csv(&export.rows, &mut buf).map_err(|e| CliError::Parse(e.to_string()))?;
    write_file(&dir.join(PUBLIC_CSV), &buf)?;
    let mut buf = Vec::new();
    write_suppression_csv(&export.suppressed, &mut buf).map_err(|e| CliError::Parse(e.to_string()))?;
    write_file(&dir.join(SUPPRESSION_CSV), &buf)?;

    let ds = UtilizationDataset::from_rows(&rows);
    if let Some(month) = m.report.month.or_else(|| ds.months().last().copied()) {
        let summary = summarize_public(&ds, &policy, month, m.report.direction).map_err(metrics_err)?;
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        write_file(&dir.join(PUBLIC_SUMMARY_JSON), json.as_bytes())?;
    }
    info!(
        "released {} of {} rows into {}",
        export.rows.len(),
        rows.len(),
        dir.display()
    );
    Ok(())
}
