//! `awq`: runs scenario files through the library and writes CSV tables plus
//! a JSON report per run.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod axis;
mod commands;
mod output;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use awq_core::{par, AwqError};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use axis::Axis;
use output::{write_json, Artifact, Cell, Table};

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Validation(_) => "validation",
            Failure::Numeric(_) => "numeric",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numeric(m) | Failure::Io(m) => m,
        }
    }
}

impl From<AwqError> for Failure {
    fn from(e: AwqError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "awq", version, about = "Dimers on a subwavelength atomic array: band structure, couplings and dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "AWQ_WORKERS")]
    workers: Option<usize>,
    /// Scan axis as `field=start:stop:step` or `field=a,b,c`; repeatable.
    #[arg(long = "axis", value_name = "SPEC")]
    axes: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Chain eigenmodes.
    Band(Common),
    /// Dimer coupling to every chain mode.
    Coupling(Common),
    /// Population dynamics from a single initial state.
    Evolve(Common),
    /// Decay rates and Purcell factors over a k d/π grid.
    PurcellScan(Common),
    /// Symmetric-state decay of several dimers over a k d/π grid.
    Superradiance(Common),
    /// Excitation exchange between two dimers through the band gap.
    BandgapRabi(Common),
    /// Band-gap coupling, error budget and measured exchange error.
    Bandgap(Common),
    /// Evaluate another subcommand over a grid of config values.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Subcommand run at each point; defaults to `run.command` in the config.
        #[arg(long = "command")]
        inner: Option<String>,
    },
}

impl Command {
    fn split(self) -> (Option<&'static str>, Common, Option<String>) {
        match self {
            Command::Band(c) => (Some("band"), c, None),
            Command::Coupling(c) => (Some("coupling"), c, None),
            Command::Evolve(c) => (Some("evolve"), c, None),
            Command::PurcellScan(c) => (Some("purcell-scan"), c, None),
            Command::Superradiance(c) => (Some("superradiance"), c, None),
            Command::BandgapRabi(c) => (Some("bandgap-rabi"), c, None),
            Command::Bandgap(c) => (Some("bandgap"), c, None),
            Command::Scan { common, inner } => (None, common, inner),
        }
    }
}

fn header(command: &str, name: &str, source: &Value, workers: Option<usize>) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("tool".into(), json!("awq"));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("name".into(), json!(name));
    m.insert("workers".into(), json!(workers));
    m.insert("config".into(), source.clone());
    m
}

fn write_artifact(out: &Path, name: &str, a: &Artifact) -> Result<(), Failure> {
    a.table.write(&out.join(format!("{name}.csv")))?;
    for (suffix, t) in &a.extra {
        t.write(&out.join(format!("{name}{suffix}.csv")))?;
    }
    Ok(())
}

/// A single command on a single scenario.
fn single(command: &str, common: &Common, source: Value, fallback: &str) -> Result<(), Failure> {
    let t0 = Instant::now();
    let sc = scenario::parse(source.clone(), fallback)?;
    let mut manifest = header(command, &sc.name, &source, common.workers);
    let report_path = common.out.join(format!("{}.report.json", sc.name));
    let result = par::with_workers(common.workers, || commands::run(command, &sc));
    manifest.insert("wall_time_s".into(), json!(t0.elapsed().as_secs_f64()));
    match result {
        Ok(a) => {
            write_artifact(&common.out, &sc.name, &a)?;
            let failed = a.report.get("failed_points").and_then(Value::as_u64).unwrap_or(0);
            manifest.insert("status".into(), json!(if failed == 0 { "ok" } else { "partial" }));
            manifest.insert("report".into(), a.report);
            write_json(&report_path, &Value::Object(manifest))?;
            if failed > 0 {
                return Err(Failure::Numeric(format!("{failed} grid points failed; see {}", report_path.display())));
            }
            Ok(())
        }
        Err(f) => {
            manifest.insert("status".into(), json!("error"));
            manifest.insert("error".into(), json!({ "kind": f.kind(), "message": f.message() }));
            write_json(&report_path, &Value::Object(manifest))?;
            Err(f)
        }
    }
}

struct PointResult {
    cells: Vec<Cell>,
    status: String,
    failure: Option<Failure>,
    report: Value,
    wall_time: f64,
}

fn scan(command: &str, common: &Common, source: Value, fallback: &str, axes: &[Axis]) -> Result<(), Failure> {
    let t0 = Instant::now();
    let columns = commands::summary_header(command)?;
    let base = scenario::parse(source.clone(), fallback)?;
    let points = axis::product(axes);
    let mut docs = Vec::with_capacity(points.len());
    for p in &points {
        let mut doc = source.clone();
        for (a, &x) in axes.iter().zip(p) {
            axis::assign(&mut doc, &a.field, x).map_err(Failure::Validation)?;
        }
        docs.push(doc);
    }
    let run_point = |doc: &Value| -> PointResult {
        let t = Instant::now();
        let out = scenario::parse(doc.clone(), fallback).and_then(|sc| commands::summary(command, &sc));
        let wall_time = t.elapsed().as_secs_f64();
        match out {
            Ok((cells, report)) => PointResult { cells, status: "ok".into(), failure: None, report, wall_time },
            Err(f) => PointResult {
                cells: vec![Cell::Empty; columns.len()],
                status: format!("{}: {}", f.kind(), f.message()),
                failure: Some(f),
                report: Value::Null,
                wall_time,
            },
        }
    };
    let results = par::with_workers(common.workers, || par::map(&docs, run_point));

    let mut head: Vec<&str> = axes.iter().map(|a| a.field.as_str()).collect();
    head.extend(columns.iter().copied());
    head.push("status");
    let mut table = Table::new(&head);
    let mut records = vec![];
    let mut worst: Option<Failure> = None;
    for (p, r) in points.iter().zip(results) {
        let mut row: Vec<Cell> = p.iter().map(|&x| Cell::axis_value(x)).collect();
        row.extend(r.cells);
        row.push(Cell::Text(r.status.clone()));
        table.push(row);
        let values: serde_json::Map<String, Value> =
            axes.iter().zip(p).map(|(a, &x)| (a.field.clone(), axis::to_json(x))).collect();
        records.push(json!({ "values": values, "status": r.status, "wall_time_s": r.wall_time, "report": r.report }));
        if let Some(f) = r.failure {
            match &worst {
                Some(w) if w.code() >= f.code() => {}
                _ => worst = Some(f),
            }
        }
    }
    let failed = records.iter().filter(|r| r["status"] != "ok").count();
    let mut manifest = header("scan", &base.name, &source, common.workers);
    manifest.insert("scan_command".into(), json!(command));
    manifest.insert(
        "axes".into(),
        json!(axes.iter().map(|a| json!({ "field": a.field, "values": a.values })).collect::<Vec<_>>()),
    );
    manifest.insert("wall_time_s".into(), json!(t0.elapsed().as_secs_f64()));
    manifest.insert("status".into(), json!(if failed == 0 { "ok" } else { "partial" }));
    manifest.insert("failed_points".into(), json!(failed));
    manifest.insert("points".into(), Value::Array(records));
    write_artifact(&common.out, &base.name, &Artifact { table, report: Value::Null, extra: vec![] })?;
    write_json(&common.out.join(format!("{}.report.json", base.name)), &Value::Object(manifest))?;
    match worst {
        None => Ok(()),
        Some(f) => {
            let msg = format!("{failed} of {} scan points failed, e.g. {}", points.len(), f.message());
            Err(if f.code() == 2 { Failure::Validation(msg) } else { Failure::Numeric(msg) })
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let (command, common, inner) = cli.command.split();
    if common.workers == Some(0) {
        return Err(Failure::Validation("--workers must be at least 1".into()));
    }
    let axes = common
        .axes
        .iter()
        .map(|s| axis::parse(s))
        .collect::<Result<Vec<Axis>, String>>()
        .map_err(Failure::Validation)?;
    let source = scenario::read(&common.config)?;
    let fallback = scenario::default_name(&common.config);
    std::fs::create_dir_all(&common.out)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", common.out.display())))?;
    let explicit_scan = command.is_none();
    let command = match command {
        Some(c) => c.to_string(),
        None => inner
            .or_else(|| source.get("run").and_then(|r| r.get("command")).and_then(Value::as_str).map(String::from))
            .ok_or_else(|| Failure::Validation("scan needs --command or run.command".into()))?,
    };
    if !commands::COMMANDS.contains(&command.as_str()) {
        return Err(Failure::Validation(format!("unknown command `{command}`")));
    }
    if explicit_scan || !axes.is_empty() {
        scan(&command, &common, source, &fallback, &axes)
    } else {
        single(&command, &common, source, &fallback)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("awq: {} error: {}", f.kind(), f.message());
            ExitCode::from(f.code())
        }
    }
}
