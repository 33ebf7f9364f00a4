//! Offline reports over saved flight logs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sg_core::analytics::{
    chi_square_independence_with, classify_stance_keywords, fingerprint_table, latency_stats,
    AnalyticsError, ChiSquareResult, ContingencyTable, LatencyStats, StanceRule, StanceSummary,
};
use sg_core::{CategoryScheme, FlightRecord, Observation};

use crate::error::{CliError, ErrorClass};
use crate::log::{obs_path, read_observations, read_records};

pub struct LoadedLog {
    pub path: PathBuf,
    pub records: Vec<FlightRecord>,
    /// From the `.obs.jsonl` sidecar, when present and complete.
    pub observations: Option<Vec<Observation>>,
}

impl AsRef<[FlightRecord]> for LoadedLog {
    fn as_ref(&self) -> &[FlightRecord] {
        &self.records
    }
}

pub fn load_log(path: &Path) -> Result<LoadedLog, CliError> {
    let records = read_records(path)?;
    let side = obs_path(path);
    let observations = if side.exists() {
        let obs = read_observations(&side)?;
        if obs.len() != records.len() {
            return Err(CliError::new(
                ErrorClass::SchemaViolation,
                format!(
                    "{}: {} observations for {} records",
                    side.display(),
                    obs.len(),
                    records.len()
                ),
            ));
        }
        Some(obs)
    } else {
        None
    };
    Ok(LoadedLog {
        path: path.to_path_buf(),
        records,
        observations,
    })
}

fn analytics_error(e: AnalyticsError) -> CliError {
    CliError::new(ErrorClass::Analysis, e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct FingerprintReport {
    pub scheme: String,
    pub table: ContingencyTable,
    pub result: ChiSquareResult,
}

pub fn fingerprint(
    logs: &[LoadedLog],
    scheme: &CategoryScheme,
    yates: bool,
) -> Result<FingerprintReport, CliError> {
    let table = fingerprint_table(logs, scheme).map_err(analytics_error)?;
    if table.rows() < 2 {
        return Err(CliError::new(
            ErrorClass::InsufficientPersonas,
            format!(
                "fingerprint needs at least 2 personas, logs hold {}",
                table.rows()
            ),
        ));
    }
    let result = chi_square_independence_with(&table, yates).map_err(analytics_error)?;
    Ok(FingerprintReport {
        scheme: scheme.name().to_string(),
        table,
        result,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StanceMethod {
    Geometric,
    /// Reason-text heuristic; not suitable for validation claims.
    Keywords,
}

#[derive(Debug, Clone, Serialize)]
pub struct StanceReport {
    pub method: StanceMethod,
    pub summary: StanceSummary,
    pub table: ContingencyTable,
    pub result: ChiSquareResult,
}

pub fn stance(
    logs: &[LoadedLog],
    method: StanceMethod,
    rule: &StanceRule,
    yates: bool,
) -> Result<StanceReport, CliError> {
    let mut summary = StanceSummary::default();
    for log in logs {
        match method {
            StanceMethod::Geometric => {
                let obs = log.observations.as_ref().ok_or_else(|| {
                    CliError::new(
                        ErrorClass::Analysis,
                        format!(
                            "{} has no observation sidecar; --keywords enables the reason-text heuristic",
                            log.path.display()
                        ),
                    )
                })?;
                for (r, o) in log.records.iter().zip(obs) {
                    summary.add(&r.persona_id, rule.classify(r.action, o));
                }
            }
            StanceMethod::Keywords => {
                for r in &log.records {
                    summary.add(&r.persona_id, classify_stance_keywords(r));
                }
            }
        }
    }
    let applicable: Vec<_> = summary
        .personas
        .iter()
        .filter(|p| p.applicable() > 0)
        .collect();
    if applicable.len() < 2 {
        return Err(CliError::new(
            ErrorClass::InsufficientPersonas,
            format!(
                "stance test needs 2 personas with human encounters, found {}",
                applicable.len()
            ),
        ));
    }
    let table = ContingencyTable::new(
        applicable.iter().map(|p| p.persona_id.clone()).collect(),
        vec!["approach".into(), "avoid".into()],
        applicable
            .iter()
            .map(|p| vec![p.approach_count, p.avoid_count])
            .collect(),
    )
    .map_err(analytics_error)?;
    let result = chi_square_independence_with(&table, yates).map_err(analytics_error)?;
    Ok(StanceReport {
        method,
        summary,
        table,
        result,
    })
}

pub fn latency(logs: &[LoadedLog]) -> Result<LatencyStats, CliError> {
    latency_stats(logs.iter().flat_map(|l| l.records.iter())).map_err(analytics_error)
}

fn fmt_p(p: f64) -> String {
    if p < 1e-3 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

pub fn format_result(r: &ChiSquareResult) -> String {
    let mut s = format!(
        "chi2({}, N={}) = {:.2}, p = {}{}",
        r.df,
        r.n,
        r.statistic,
        fmt_p(r.p_value),
        if r.p_value < 1e-3 { " (p < .001)" } else { "" }
    );
    if r.yates {
        s.push_str(", Yates-corrected");
    }
    let _ = write!(s, ", Cramer's V = {:.3}", r.cramers_v);
    if r.low_expected_cells > 0 {
        let _ = write!(
            s,
            "\nwarning: {} cell(s) have expected count < 5",
            r.low_expected_cells
        );
    }
    s
}

pub fn format_table(t: &ContingencyTable) -> String {
    let w = t
        .row_labels()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(7);
    let mut s = format!("{:w$}", "persona");
    for c in t.col_labels() {
        let _ = write!(s, " {c:>10}");
    }
    s.push_str(&format!(" {:>10}\n", "total"));
    for (i, label) in t.row_labels().iter().enumerate() {
        let _ = write!(s, "{label:w$}");
        for c in &t.counts()[i] {
            let _ = write!(s, " {c:>10}");
        }
        let _ = writeln!(s, " {:>10}", t.row_totals()[i]);
    }
    s
}

pub fn format_stance(r: &StanceReport) -> String {
    let mut s = String::new();
    if r.method == StanceMethod::Keywords {
        s.push_str("note: keyword heuristic; reason text only\n");
    }
    for p in &r.summary.personas {
        let rate = p
            .approach_rate()
            .map(|x| format!("{:.1}%", x * 100.0))
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            s,
            "{}: approach {} avoid {} (approach rate {}), {} records without a human",
            p.persona_id, p.approach_count, p.avoid_count, rate, p.not_applicable
        );
    }
    s.push_str(&format_result(&r.result));
    s
}

pub fn write_csv(path: &Path, t: &ContingencyTable) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::new(ErrorClass::Io, format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["persona".to_string()];
    header.extend(t.col_labels().iter().cloned());
    w.write_record(&header).map_err(io)?;
    for (label, row) in t.row_labels().iter().zip(t.counts()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
