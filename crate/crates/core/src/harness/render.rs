//! Plain-text tables for terminal output.

use std::fmt::Write;

use super::corpus::ScanReport;
use super::validation::ValidationResult;
use crate::scoring::AggregateOutcome;

/// Confusion matrix with truth as rows and prediction as columns.
pub fn validation_table(r: &ValidationResult) -> String {
    let m = &r.matrix;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20}{:>20}{:>14}",
        "truth \\ predicted", "manipulation-free", "manipulated"
    );
    let _ = writeln!(s, "{:<20}{:>20}{:>14}", "manipulation-free", m.tp, m.fn_);
    let _ = writeln!(s, "{:<20}{:>20}{:>14}", "manipulated", m.fp, m.tn);
    let _ = writeln!(s);
    let _ = writeln!(s, "accuracy               {:.3}", r.accuracy);
    let _ = writeln!(
        s,
        "F1 manipulation-free   {:.3}",
        r.f1_per_class.manipulation_free
    );
    let _ = writeln!(
        s,
        "F1 manipulated         {:.3}",
        r.f1_per_class.manipulated
    );
    let _ = writeln!(s, "threshold              {}", r.threshold);
    if !r.excluded.is_empty() {
        let _ = writeln!(s, "excluded datasets      {}", r.excluded.len());
    }
    s
}

/// Confidence levels across, flagged counts below.
pub fn flag_table(r: &ScanReport) -> String {
    let mut head = format!("{:<22}", "Confidence level");
    let mut counts = format!("{:<22}", "Flagged manuscripts");
    for row in &r.table.rows {
        let _ = write!(
            head,
            "{:>7}",
            format!("{:.0}%", row.confidence_level * 100.0)
        );
        let _ = write!(counts, "{:>7}", row.flagged_count);
    }
    let mut s = format!("{head}\n{counts}\n");
    let _ = writeln!(
        s,
        "\nscored {}, unscorable {}",
        r.scored.len(),
        r.unscorable.len()
    );
    for u in &r.unscorable {
        let _ = writeln!(s, "  {}: {}", u.source_id, u.reason);
    }
    s
}

pub fn outcome_table(a: &AggregateOutcome) -> String {
    let mut s = format!(
        "{:<11}{:>7}{:>10}{:>12}{:>10}{:>10}{:>12}\n",
        "operator", "digits", "KS D", "p-value", "raw", "floor", "normalized"
    );
    for t in &a.per_operator {
        let _ = writeln!(
            s,
            "{:<11}{:>7}{:>10.4}{:>12.6}{:>10.4}{:>10.4}{:>12.4}",
            t.operator.name(),
            t.sample_count,
            t.ks.statistic,
            t.ks.p_value,
            t.raw_score,
            t.calibration_floor,
            t.normalized_score
        );
    }
    for e in &a.excluded {
        let _ = writeln!(
            s,
            "{:<11}{:>7}  insufficient data ({} required)",
            e.operator.name(),
            e.sample_count,
            e.required
        );
    }
    let _ = writeln!(s, "\noverall {:.4}", a.overall);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus::{flag_table as table, ScoredReport};
    use crate::harness::metrics::ConfusionMatrix;

    #[test]
    fn confusion_layout() {
        let matrix = ConfusionMatrix::new(43, 7, 14, 36);
        let r = ValidationResult {
            matrix,
            accuracy: matrix.accuracy(),
            f1_per_class: matrix.f1_per_class(),
            threshold: 0.5,
            per_dataset: vec![],
            excluded: vec![],
        };
        let text = validation_table(&r);
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].ends_with("43             7"));
        assert!(lines[2].ends_with("14            36"));
        assert!(text.contains("accuracy               0.790"));
        assert!(text.contains("F1 manipulated         0.774"));
    }

    #[test]
    fn flag_layout() {
        let scored = vec![ScoredReport {
            source_id: "a".into(),
            overall: 0.95,
        }];
        let report = ScanReport {
            table: table(&scored, &[0.9, 0.96]).unwrap(),
            scored,
            unscorable: vec![],
        };
        let text = flag_table(&report);
        assert!(text.starts_with(
            "Confidence level          90%    96%\nFlagged manuscripts         1      0\n"
        ));
    }
}
