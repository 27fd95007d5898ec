use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ReportedStats;
use crate::pipeline::Scorer;
use crate::scoring::flag;

pub const DEFAULT_LEVELS: [f64; 5] = [0.90, 0.92, 0.94, 0.96, 0.98];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRow {
    pub confidence_level: f64,
    pub flagged_count: usize,
    pub flagged_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagTable {
    pub rows: Vec<FlagRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredReport {
    pub source_id: String,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnscorableReport {
    pub source_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub table: FlagTable,
    pub scored: Vec<ScoredReport>,
    pub unscorable: Vec<UnscorableReport>,
}

pub fn validate_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one confidence level is required".into(),
        ));
    }
    if levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
        return Err(Error::InvalidConfig(format!(
            "confidence levels must lie in (0, 1), got {levels:?}"
        )));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "confidence levels must be strictly increasing, got {levels:?}"
        )));
    }
    Ok(())
}

/// Counts the scores at or above each confidence level.
pub fn flag_table(scores: &[ScoredReport], levels: &[f64]) -> Result<FlagTable> {
    validate_levels(levels)?;
    let rows = levels
        .iter()
        .map(|&level| {
            let mut flagged_ids: Vec<String> = scores
                .iter()
                .filter(|s| flag(s.overall, level))
                .map(|s| s.source_id.clone())
                .collect();
            flagged_ids.sort();
            FlagRow {
                confidence_level: level,
                flagged_count: flagged_ids.len(),
                flagged_ids,
            }
        })
        .collect();
    Ok(FlagTable { rows })
}

/// Scores every report and tabulates flags per confidence level. Reports
/// without a usable operator group are listed as unscorable.
pub fn scan_corpus(
    reports: &[ReportedStats],
    levels: &[f64],
    scorer: &Scorer,
) -> Result<ScanReport> {
    if reports.is_empty() {
        return Err(Error::Precondition(
            "corpus scan needs at least one report".into(),
        ));
    }
    validate_levels(levels)?;

    let groups: Vec<_> = reports
        .iter()
        .flat_map(|r| {
            let n = scorer.report_entries_per_vector(r);
            r.groups.iter().map(move |(op, v)| (*op, v.as_slice(), n))
        })
        .collect();
    scorer.warm(groups)?;

    let outcomes: Vec<(String, Result<f64>)> = reports
        .par_iter()
        .map(|r| {
            (
                r.source_id.clone(),
                scorer.score_report(r).map(|a| a.overall),
            )
        })
        .collect();

    let mut scored = Vec::new();
    let mut unscorable = Vec::new();
    for (source_id, outcome) in outcomes {
        match outcome {
            Ok(overall) => scored.push(ScoredReport { source_id, overall }),
            Err(Error::NoUsableOutcomes(reason)) => {
                warn!("report {source_id} is unscorable: {reason}");
                unscorable.push(UnscorableReport { source_id, reason });
            }
            Err(e) => return Err(e),
        }
    }
    scored.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    unscorable.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    Ok(ScanReport {
        table: flag_table(&scored, levels)?,
        scored,
        unscorable,
    })
}
