//! Text tables and machine-readable records for the command outputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::assign::{CurvePoint, OraclePoint, SegmentClass};
use crate::exemplar::{Stage, StageYield};
use crate::metrics::MetricsReport;
use crate::types::CharacterId;

const YIELD_ROWS: [(Stage, &str); 4] = [
    (Stage::Vad, "VAD detection"),
    (Stage::AvGate, "Audio-visual speaker detection"),
    (Stage::Visual, "Visual character classification"),
    (Stage::AudioFilter, "Audio filtering"),
];

/// Exemplar funnel as a four-row table, percentages relative to the VAD row.
pub fn yield_table(y: &StageYield) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<32} {:>14} {:>11}", "Step", "# of exemplars", "% of total");
    for (stage, label) in YIELD_ROWS {
        let _ = writeln!(s, "{:<32} {:>14} {:>11.1}", label, y.count(stage), y.percent(stage));
    }
    let _ = writeln!(s, "({} segments before laughter removal)", y.detected);
    s
}

pub fn yield_record(y: &StageYield) -> Value {
    let stages: Vec<Value> = Stage::ALL
        .iter()
        .map(|&st| json!({"stage": st.name(), "count": y.count(st), "percent": y.percent(st)}))
        .collect();
    json!({ "stages": stages })
}

/// Per-character exemplar correctness: `(exemplars, correct)` by character.
pub fn exemplar_table(rows: &BTreeMap<CharacterId, (usize, usize)>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:>11} {:>9} {:>8}", "Character", "# exemplars", "# correct", "Acc (%)");
    let (mut n, mut ok) = (0, 0);
    for (c, &(count, correct)) in rows {
        n += count;
        ok += correct;
        let _ = writeln!(s, "{:<16} {:>11} {:>9} {:>8.1}", c.as_str(), count, correct, pct(correct, count));
    }
    let _ = writeln!(s, "{:<16} {:>11} {:>9} {:>8.1}", "Total", n, ok, pct(ok, n));
    s
}

fn pct(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

fn opt1(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"))
}

/// One row per series: DER, DER(O), Acc, Ppc, Rpc and WER. The DER(O)
/// column is dropped when overlap scoring is turned off.
pub fn metrics_table(rows: &[(String, MetricsReport)], include_overlap: bool) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<12} {:>7}", "Series", "DER");
    if include_overlap {
        let _ = write!(s, " {:>7}", "DER(O)");
    }
    let _ = writeln!(s, " {:>7} {:>7} {:>7} {:>7}", "Acc", "Ppc", "Rpc", "WER");
    for (name, r) in rows {
        let _ = write!(s, "{:<12} {:>7.1}", name, r.der);
        if include_overlap {
            let _ = write!(s, " {:>7.1}", r.der_with_overlap);
        }
        let _ = writeln!(s, " {:>7.1} {:>7} {:>7} {:>7}", r.accuracy, opt3(r.ppc), opt3(r.rpc), opt1(r.wer));
    }
    s
}

pub fn character_table(r: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:>9} {:>7} {:>8}", "Character", "Precision", "Recall", "Support");
    for c in &r.characters {
        let _ = writeln!(s, "{:<16} {:>9} {:>7.3} {:>8}", c.character.as_str(), opt3(c.precision), c.recall, c.support);
    }
    s
}

pub fn metrics_record(series: &str, r: &MetricsReport) -> Value {
    let characters: Vec<Value> = r
        .characters
        .iter()
        .map(|c| {
            json!({
                "character": c.character.as_str(),
                "precision": c.precision,
                "recall": c.recall,
                "support": c.support,
            })
        })
        .collect();
    json!({
        "series": series,
        "der": r.der,
        "der_with_overlap": r.der_with_overlap,
        "accuracy": r.accuracy,
        "ppc": r.ppc,
        "rpc": r.rpc,
        "wer": r.wer,
        "characters": characters,
    })
}

/// Tab-separated `d pocs precision class` with a header line.
pub fn curve_tsv(points: &[CurvePoint]) -> String {
    let mut s = String::from("d\tpocs\tprecision\tclass\n");
    for p in points {
        let _ = writeln!(s, "{:.6}\t{:.6}\t{:.6}\t{}", p.d, p.pocs, p.precision, p.class);
    }
    s
}

pub fn oracle_tsv(points: &[(SegmentClass, OraclePoint)]) -> String {
    let mut s = String::from("class\tpocs\tprecision\tprecision_undefined\n");
    for (class, p) in points {
        let _ = writeln!(s, "{class}\t{:.6}\t{:.6}\t{}", p.pocs, p.precision, p.precision_undefined);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yield_table_has_four_rows_and_percentages() {
        let y = StageYield { detected: 2200, vad: 2107, av_gate: 1271, visual: 806, audio_filter: 407 };
        let t = yield_table(&y);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("VAD detection") && lines[1].ends_with("100.0"));
        assert!(lines[2].ends_with("60.3"));
        assert!(lines[3].ends_with("38.3"));
        assert!(lines[4].contains("407") && lines[4].ends_with("19.3"));
    }

    #[test]
    fn metrics_table_columns() {
        let r = MetricsReport {
            der: 29.6,
            der_with_overlap: 29.7,
            accuracy: 81.2,
            ppc: Some(0.922),
            rpc: Some(0.841),
            wer: None,
            characters: Vec::new(),
        };
        let t = metrics_table(&[("Seinfeld".into(), r.clone())], true);
        assert_eq!(
            t.lines().nth(1).unwrap().split_whitespace().collect::<Vec<_>>(),
            ["Seinfeld", "29.6", "29.7", "81.2", "0.922", "0.841", "-"]
        );
        let t = metrics_table(&[("Seinfeld".into(), r)], false);
        assert!(!t.contains("DER(O)"));
    }
}
