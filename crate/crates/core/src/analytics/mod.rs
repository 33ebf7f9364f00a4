//! Validation statistics over flight logs.

mod chi2;
mod stance;
mod table;

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::record::FlightRecord;

pub use chi2::{chi_square_sf, chi_square_sf_even, regularized_gamma_q};
pub use stance::{
    classify_stance, classify_stance_keywords, mentions_people, stance_summary,
    stance_summary_keywords, PersonaStance, Stance, StanceRule, StanceSummary,
};
pub use table::{
    chi_square_independence, chi_square_independence_with, fingerprint_table, ChiSquareResult,
    ContingencyTable,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    /// No logs at all, or the log at this index has no records.
    #[error("empty flight log{}", .0.map(|i| alloc::format!(" (log #{i})")).unwrap_or_default())]
    EmptyLog(Option<usize>),
    #[error("table has a zero marginal: {0}")]
    DegenerateTable(String),
    #[error("table needs at least 2 rows and 2 columns, got {rows} x {cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("counts do not match a {rows} x {cols} table")]
    Shape { rows: usize, cols: usize },
    #[error("need at least 2 latency samples, got {0}")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_s: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd_s: f64,
    pub n: usize,
}

impl LatencyStats {
    pub fn from_seconds(samples: impl IntoIterator<Item = f64>) -> Result<Self, AnalyticsError> {
        // Welford
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for x in samples {
            n += 1;
            let d = x - mean;
            mean += d / n as f64;
            m2 += d * (x - mean);
        }
        if n < 2 {
            return Err(AnalyticsError::InsufficientData(n));
        }
        Ok(Self {
            mean_s: mean,
            sd_s: libm::sqrt(m2 / (n - 1) as f64),
            n,
        })
    }
}

/// Mean and sd of `latency_ms / 1000` over the records.
pub fn latency_stats<'a>(
    records: impl IntoIterator<Item = &'a FlightRecord>,
) -> Result<LatencyStats, AnalyticsError> {
    LatencyStats::from_seconds(records.into_iter().map(|r| r.latency_ms as f64 / 1000.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latency_examples() {
        let s = LatencyStats::from_seconds([2.8, 2.8, 2.8]).unwrap();
        assert!((s.mean_s - 2.8).abs() < 1e-12 && s.sd_s.abs() < 1e-12);
        let s = LatencyStats::from_seconds([2.5, 3.1]).unwrap();
        assert!((s.mean_s - 2.8).abs() < 1e-12);
        assert!((s.sd_s - 0.424_264_068_711_928_5).abs() < 1e-12);
        assert_eq!(
            LatencyStats::from_seconds([1.0]),
            Err(AnalyticsError::InsufficientData(1))
        );
    }
}
