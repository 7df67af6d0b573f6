//! Report files. JSON carries whole reports; the CSV tables flatten them
//! for plotting. Column order is fixed by the `*_COLUMNS` constants.

use std::fs;
use std::path::{Path, PathBuf};

use frontrun_core::harness::{Report, REPORT_SCHEMA_VERSION};
use serde::{Deserialize, Serialize};

use crate::sweep::Aggregate;
use crate::Error;

pub const REPORTS_FILE: &str = "reports.json";
pub const AGGREGATE_FILE: &str = "aggregate.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Top-level shape of `reports.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub schema_version: u32,
    pub reports: Vec<Report>,
}

pub const RUNS_COLUMNS: [&str; 12] = [
    "scenario",
    "seed",
    "config_digest",
    "ordering",
    "mitigation",
    "outcome",
    "victim_succeeded",
    "attacker_net_profit",
    "attacker_gross_profit",
    "fee_total",
    "burned",
    "blocks",
];

pub const AGENTS_COLUMNS: [&str; 13] = [
    "scenario",
    "seed",
    "agent",
    "role",
    "sent",
    "mined_success",
    "mined_failed",
    "gas_used",
    "fees_paid",
    "wei_delta",
    "holdings_delta",
    "net_profit",
    "goal_met",
];

pub const MINERS_COLUMNS: [&str; 8] =
    ["scenario", "seed", "miner", "power_ppm", "blocks", "target_success", "target_failed", "fee_revenue"];

pub const BLOCKS_COLUMNS: [&str; 9] =
    ["scenario", "seed", "number", "miner", "txs", "gas_used", "gas_limit", "target_success", "target_failed"];

fn opt(b: Option<bool>) -> String {
    b.map_or_else(String::new, |b| b.to_string())
}

pub fn runs_rows(r: &Report) -> Vec<Vec<String>> {
    vec![vec![
        r.scenario.clone(),
        r.seed.to_string(),
        r.config_digest.clone(),
        r.ordering.clone(),
        r.mitigation.clone(),
        r.outcome.name().to_string(),
        opt(r.victim_succeeded),
        r.attacker_net_profit.to_string(),
        r.attacker_gross_profit.to_string(),
        r.fee_total.to_string(),
        r.burned.to_string(),
        r.blocks.len().to_string(),
    ]]
}

pub fn agents_rows(r: &Report) -> Vec<Vec<String>> {
    r.agents
        .iter()
        .map(|a| {
            let role = serde_json::to_value(a.role).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            vec![
                r.scenario.clone(),
                r.seed.to_string(),
                a.name.clone(),
                role,
                a.sent.to_string(),
                a.mined.success.to_string(),
                a.mined.failed.to_string(),
                a.gas_used.to_string(),
                a.fees_paid.to_string(),
                a.wei_delta.to_string(),
                a.holdings_delta.to_string(),
                a.net_profit.to_string(),
                opt(a.goal_met),
            ]
        })
        .collect()
}

pub fn miners_rows(r: &Report) -> Vec<Vec<String>> {
    r.miners
        .iter()
        .map(|m| {
            vec![
                r.scenario.clone(),
                r.seed.to_string(),
                m.name.clone(),
                m.power_ppm.to_string(),
                m.blocks.to_string(),
                m.target_success.to_string(),
                m.target_failed.to_string(),
                m.fee_revenue.to_string(),
            ]
        })
        .collect()
}

pub fn blocks_rows(r: &Report) -> Vec<Vec<String>> {
    r.blocks
        .iter()
        .map(|b| {
            vec![
                r.scenario.clone(),
                r.seed.to_string(),
                b.number.to_string(),
                b.miner.clone(),
                b.txs.to_string(),
                b.gas_used.to_string(),
                b.gas_limit.to_string(),
                b.target_success.to_string(),
                b.target_failed.to_string(),
            ]
        })
        .collect()
}

/// One CSV table into any writer; header only when `reports` is empty.
pub fn write_csv<W: std::io::Write>(
    out: W,
    columns: &[&str],
    rows: fn(&Report) -> Vec<Vec<String>>,
    reports: &[Report],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for r in reports {
        for row in rows(r) {
            debug_assert_eq!(row.len(), columns.len());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

type Table = (&'static str, &'static [&'static str], fn(&Report) -> Vec<Vec<String>>);

pub const TABLES: [Table; 4] = [
    ("runs.csv", &RUNS_COLUMNS, runs_rows),
    ("agents.csv", &AGENTS_COLUMNS, agents_rows),
    ("miners.csv", &MINERS_COLUMNS, miners_rows),
    ("blocks.csv", &BLOCKS_COLUMNS, blocks_rows),
];

fn create_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Write `reports` into `dir` in `format`; returns the files written.
pub fn emit(reports: &[Report], dir: &Path, format: Format) -> Result<Vec<PathBuf>, Error> {
    create_dir(dir)?;
    match format {
        Format::Json => {
            let path = dir.join(REPORTS_FILE);
            let file = ReportFile { schema_version: REPORT_SCHEMA_VERSION, reports: reports.to_vec() };
            write(&path, serde_json::to_string_pretty(&file).expect("report serializes"))?;
            Ok(vec![path])
        }
        Format::Csv => TABLES
            .iter()
            .map(|(name, columns, rows)| {
                let path = dir.join(name);
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                write_csv(file, columns, *rows, reports)
                    .map_err(|e| Error::Format { path: path.clone(), message: e.to_string() })?;
                Ok(path)
            })
            .collect(),
    }
}

pub fn emit_aggregate(agg: &Aggregate, dir: &Path) -> Result<PathBuf, Error> {
    create_dir(dir)?;
    let path = dir.join(AGGREGATE_FILE);
    write(&path, serde_json::to_string_pretty(agg).expect("aggregate serializes"))?;
    Ok(path)
}

fn write(path: &Path, text: String) -> Result<(), Error> {
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn parse_reports(text: &str) -> Result<ReportFile, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ReportFile = serde_path_to_error::deserialize(de).map_err(|e| format!("{}: {}", e.path(), e.inner()))?;
    if file.schema_version != REPORT_SCHEMA_VERSION {
        return Err(format!("schema_version: expected {REPORT_SCHEMA_VERSION}, found {}", file.schema_version));
    }
    Ok(file)
}

/// Read `reports.json` back from a run or sweep directory.
pub fn read_reports(dir: &Path) -> Result<Vec<Report>, Error> {
    let path = dir.join(REPORTS_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_reports(&text).map(|f| f.reports).map_err(|message| Error::Format { path, message })
}
