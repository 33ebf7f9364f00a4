use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::chi2::chi_square_sf;
use super::AnalyticsError;
use crate::action::CategoryScheme;
use crate::record::FlightRecord;

/// Counts with labelled rows (personas) and columns (categories).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, AnalyticsError> {
        let cols = col_labels.len();
        if counts.len() != row_labels.len() || counts.iter().any(|r| r.len() != cols) {
            return Err(AnalyticsError::Shape {
                rows: row_labels.len(),
                cols,
            });
        }
        Ok(Self {
            row_labels,
            col_labels,
            counts,
        })
    }

    /// Unlabelled table; rows and columns are named by index.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self, AnalyticsError> {
        let rows = counts.len();
        let cols = counts.first().map_or(0, Vec::len);
        let label = |i: usize| alloc::format!("{i}");
        Self::new(
            (0..rows).map(label).collect(),
            (0..cols).map(label).collect(),
            counts,
        )
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.counts[row][col]
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.cols())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Row of `label`, if present.
    pub fn row(&self, label: &str) -> Option<&[u64]> {
        self.row_labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.counts[i].as_slice())
    }

    /// Same table with rows reordered so that new row `i` is old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        Self {
            row_labels: order.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: self.col_labels.clone(),
            counts: order.iter().map(|&i| self.counts[i].clone()).collect(),
        }
    }

    pub fn permute_cols(&self, order: &[usize]) -> Self {
        Self {
            row_labels: self.row_labels.clone(),
            col_labels: order.iter().map(|&j| self.col_labels[j].clone()).collect(),
            counts: self
                .counts
                .iter()
                .map(|r| order.iter().map(|&j| r[j]).collect())
                .collect(),
        }
    }

    /// Drops all-zero columns, e.g. categories no persona ever used.
    pub fn without_empty_cols(&self) -> Self {
        let keep: Vec<usize> = self
            .col_totals()
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > 0)
            .map(|(j, _)| j)
            .collect();
        self.permute_cols(&keep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub n: u64,
    /// Cells whose expected count is under 5; the usual validity caveat.
    pub low_expected_cells: usize,
    pub cramers_v: f64,
    pub yates: bool,
}

impl ChiSquareResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Pearson chi-square test of independence without continuity correction.
pub fn chi_square_independence(
    table: &ContingencyTable,
) -> Result<ChiSquareResult, AnalyticsError> {
    chi_square_independence_with(table, false)
}

/// As [`chi_square_independence`]; `yates` applies the continuity
/// correction, which only has an effect on 2 x 2 tables.
pub fn chi_square_independence_with(
    table: &ContingencyTable,
    yates: bool,
) -> Result<ChiSquareResult, AnalyticsError> {
    let (r, c) = (table.rows(), table.cols());
    if r < 2 || c < 2 {
        return Err(AnalyticsError::TooSmall { rows: r, cols: c });
    }
    let rows = table.row_totals();
    let cols = table.col_totals();
    if let Some(i) = rows.iter().position(|&t| t == 0) {
        return Err(AnalyticsError::DegenerateTable(alloc::format!(
            "row {:?}",
            table.row_labels[i]
        )));
    }
    if let Some(j) = cols.iter().position(|&t| t == 0) {
        return Err(AnalyticsError::DegenerateTable(alloc::format!(
            "column {:?}",
            table.col_labels[j]
        )));
    }
    let n = table.total();
    let nf = n as f64;
    let correct = yates && r == 2 && c == 2;
    let mut statistic = 0.0;
    let mut low = 0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] as f64 * cols[j] as f64 / nf;
            if e < 5.0 {
                low += 1;
            }
            let mut diff = (o as f64 - e).abs();
            if correct {
                diff = (diff - 0.5).max(0.0);
            }
            statistic += diff * diff / e;
        }
    }
    let df = ((r - 1) * (c - 1)) as u32;
    let k = (r.min(c) - 1) as f64;
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
        n,
        low_expected_cells: low,
        cramers_v: libm::sqrt(statistic / (nf * k)),
        yates: correct,
    })
}

/// Persona-by-category action counts. Rows follow the order in which
/// persona ids first appear across `logs`; logs sharing an id are pooled.
pub fn fingerprint_table<L: AsRef<[FlightRecord]>>(
    logs: &[L],
    scheme: &CategoryScheme,
) -> Result<ContingencyTable, AnalyticsError> {
    if logs.is_empty() {
        return Err(AnalyticsError::EmptyLog(None));
    }
    let mut rows: Vec<String> = Vec::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for (k, log) in logs.iter().enumerate() {
        let log = log.as_ref();
        if log.is_empty() {
            return Err(AnalyticsError::EmptyLog(Some(k)));
        }
        for rec in log {
            let i = match rows.iter().position(|p| *p == rec.persona_id) {
                Some(i) => i,
                None => {
                    rows.push(rec.persona_id.clone());
                    counts.push(alloc::vec![0; scheme.len()]);
                    rows.len() - 1
                }
            };
            counts[i][scheme.categorize(rec.action)] += 1;
        }
    }
    ContingencyTable::new(rows, scheme.labels().map(String::from).collect(), counts)
}
