//! CSV and aligned-text renderings of evaluation results. Numbers use fixed
//! precision so reruns with identical inputs give identical bytes.

use std::fs;
use std::path::Path;

use super::run::{EvaluationResults, SweepRow, TrainedFold};
use crate::error::{Error, Result};
use crate::metrics::Verdict;

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 fields")
}

/// Columns padded to their widest cell; the first column is left-aligned,
/// the rest right-aligned.
fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let pad = w - cell.chars().count();
            if i == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn opt_pct(v: Option<f64>) -> String {
    v.map(pct).unwrap_or_else(|| "NA".into())
}

fn fold_header(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

pub fn training_csv(folds: &[TrainedFold]) -> String {
    let rows: Vec<Vec<String>> = folds
        .iter()
        .map(|f| {
            vec![
                f.fold.to_string(),
                f.iterations.to_string(),
                format!("{:.9}", f.objective),
                f.converged.to_string(),
                format!("{:.3}", f.seconds),
            ]
        })
        .collect();
    csv_string(
        &["fold", "iterations", "objective", "converged", "seconds"],
        &rows,
    )
}

pub fn effectiveness_csv(r: &EvaluationResults) -> String {
    let folds = fold_header("fold", r.k);
    let mut header = vec!["method"];
    header.extend(folds.iter().map(String::as_str));
    header.extend(["mean", "half_width"]);
    let rows: Vec<Vec<String>> = r
        .effectiveness
        .iter()
        .map(|s| {
            let mut row = vec![s.method.clone()];
            row.extend(s.folds.iter().map(|v| format!("{v:.6}")));
            row.push(format!("{:.6}", s.mean));
            row.push(format!("{:.6}", s.half_width));
            row
        })
        .collect();
    csv_string(&header, &rows)
}

/// Index of the method with the highest mean (first on ties).
fn best_method(r: &EvaluationResults) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in r.effectiveness.iter().enumerate() {
        if best.is_none_or(|b| s.mean > r.effectiveness[b].mean) {
            best = Some(i);
        }
    }
    best
}

fn verdict_between(r: &EvaluationResults, a: &str, b: &str) -> Option<Verdict> {
    r.ttests.iter().find_map(|t| {
        if t.method_a == a && t.method_b == b {
            Some(t.verdict)
        } else if t.method_a == b && t.method_b == a {
            Some(t.verdict.mirrored())
        } else {
            None
        }
    })
}

pub fn effectiveness_text(r: &EvaluationResults) -> String {
    let best = best_method(r);
    let rows: Vec<Vec<String>> = r
        .effectiveness
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let note = match best {
                Some(b) if b == i => "best".to_string(),
                Some(b) => match verdict_between(r, &s.method, &r.effectiveness[b].method) {
                    Some(Verdict::Tie) => "tie with best".to_string(),
                    _ => String::new(),
                },
                None => String::new(),
            };
            vec![
                s.method.clone(),
                format!("{} ± {}", pct(s.mean), pct(s.half_width)),
                note,
            ]
        })
        .collect();
    format!(
        "Macro-F1 (%) over {} folds, mean ± 95% CI half-width; ties by paired t-test at alpha={}\n{}",
        r.k,
        r.alpha,
        text_table(&["method", "macro_f1", ""], &rows)
    )
}

pub fn ttest_csv(r: &EvaluationResults) -> String {
    let rows: Vec<Vec<String>> = r
        .ttests
        .iter()
        .map(|t| {
            vec![
                t.method_a.clone(),
                t.method_b.clone(),
                t.t.clone(),
                format!("{:.3}", t.critical),
                verdict_name(t.verdict).to_string(),
            ]
        })
        .collect();
    csv_string(&["method_a", "method_b", "t", "critical", "verdict"], &rows)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::ABetter => "A_BETTER",
        Verdict::Tie => "TIE",
        Verdict::BBetter => "B_BETTER",
    }
}

/// Matrix with the row method's result against each column method.
pub fn ttest_text(r: &EvaluationResults) -> String {
    let methods: Vec<&str> = r.effectiveness.iter().map(|s| s.method.as_str()).collect();
    let rows: Vec<Vec<String>> = methods
        .iter()
        .map(|a| {
            let mut row = vec![a.to_string()];
            for b in &methods {
                row.push(match verdict_between(r, a, b) {
                    _ if a == b => "-".into(),
                    Some(Verdict::ABetter) => "better".into(),
                    Some(Verdict::Tie) => "tie".into(),
                    Some(Verdict::BBetter) => "worse".into(),
                    None => "?".into(),
                });
            }
            row
        })
        .collect();
    let mut header = vec![""];
    header.extend(methods.iter().copied());
    format!(
        "Paired t-tests (row vs column)\n{}",
        text_table(&header, &rows)
    )
}

pub fn costs_csv(r: &EvaluationResults) -> String {
    let folds = fold_header("fold", r.k);
    let mut header = vec!["dataset", "method"];
    header.extend(folds.iter().map(|f| f.as_str()));
    header.extend(["total_seconds", "dollars", "kg_co2", "estimate"]);
    let rows: Vec<Vec<String>> = r
        .costs
        .iter()
        .map(|c| {
            let mut row = vec![c.dataset.clone(), c.method.clone()];
            row.extend(c.per_fold_seconds.iter().map(|s| format!("{s:.3}")));
            row.push(format!("{:.3}", c.total_seconds));
            row.push(format!("{:.2}", c.dollars));
            row.push(format!("{:.6}", c.co2_kg));
            row.push("true".into());
            row
        })
        .collect();
    csv_string(&header, &rows)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

pub fn costs_text(r: &EvaluationResults) -> String {
    let rows: Vec<Vec<String>> = r
        .costs
        .iter()
        .map(|c| {
            let (mean, sd) = mean_sd(&c.per_fold_seconds);
            vec![
                c.method.clone(),
                format!("{mean:.1} ± {sd:.1}"),
                format!("{:.1}", c.total_seconds),
                format!("{:.2}", c.dollars),
                format!("{:.6}", c.co2_kg),
            ]
        })
        .collect();
    let m = &r.cost_model;
    format!(
        "Cost for {} ({:?} clock)\n{}CO2 is an estimate: {} kW × PUE {} × {} kg/kWh; dollars at ${}/h.\n",
        r.dataset,
        r.clock,
        text_table(&["method", "seconds/fold", "total_s", "dollars", "kg_co2"], &rows),
        m.gpu_power_kw,
        m.pue,
        m.carbon_intensity,
        m.dollars_per_hour,
    )
}

fn audit_rows(r: &EvaluationResults) -> Vec<Vec<String>> {
    let Some(a) = &r.audit else {
        return Vec::new();
    };
    let thresholds = r.thresholds.as_ref();
    let row = |name: String, rep: &crate::router::RoutedSubsetReport, t: Option<f64>| {
        vec![
            name,
            rep.total.to_string(),
            rep.routed.to_string(),
            format!("{:.1}", rep.routed_pct),
            opt_pct(rep.routed_macro_f1),
            opt_pct(rep.local_macro_f1),
            pct(rep.overall_macro_f1),
            t.map(|t| format!("{:.2}", t)).unwrap_or_default(),
        ]
    };
    let mut rows: Vec<Vec<String>> = a
        .per_fold
        .iter()
        .enumerate()
        .map(|(i, rep)| row(i.to_string(), rep, thresholds.map(|t| t.per_fold[i])))
        .collect();
    rows.push(row("all".into(), &a.pooled, thresholds.map(|t| t.mode)));
    rows
}

const AUDIT_HEADER: [&str; 8] = [
    "fold",
    "total",
    "sent",
    "pct_sent",
    "routed_macro_f1",
    "local_macro_f1",
    "overall_macro_f1",
    "threshold",
];

pub fn audit_csv(r: &EvaluationResults) -> String {
    csv_string(&AUDIT_HEADER, &audit_rows(r))
}

pub fn audit_text(r: &EvaluationResults) -> String {
    format!(
        "Instances sent to the LLM (Macro-F1 in %, NA for empty subsets; threshold of 'all' is the mode)\n{}",
        text_table(&AUDIT_HEADER, &audit_rows(r))
    )
}

pub fn thresholds_csv(r: &EvaluationResults) -> String {
    let mut rows = Vec::new();
    if let Some(t) = &r.thresholds {
        for (fold, table) in t.tables.iter().enumerate() {
            for s in table {
                rows.push(vec![
                    fold.to_string(),
                    format!("{:.2}", s.threshold),
                    format!("{:.6}", s.macro_f1),
                    s.instances_sent.to_string(),
                    (s.threshold == t.per_fold[fold]).to_string(),
                ]);
            }
        }
    }
    csv_string(
        &[
            "fold",
            "threshold",
            "macro_f1",
            "instances_sent",
            "selected",
        ],
        &rows,
    )
}

pub fn render_text(r: &EvaluationResults) -> String {
    let mut out = format!(
        "Dataset {} ({} classes, k={}, seed={})\n\n",
        r.dataset,
        r.classes.len(),
        r.k,
        r.seed
    );
    out.push_str(&effectiveness_text(r));
    out.push('\n');
    out.push_str(&ttest_text(r));
    out.push('\n');
    if r.audit.is_some() {
        out.push_str(&audit_text(r));
        out.push('\n');
    }
    out.push_str(&costs_text(r));
    out
}

pub fn write_tables(r: &EvaluationResults, dir: &Path) -> Result<()> {
    let mut files = vec![
        ("effectiveness.csv", effectiveness_csv(r)),
        ("effectiveness.txt", effectiveness_text(r)),
        ("ttest.csv", ttest_csv(r)),
        ("costs.csv", costs_csv(r)),
        ("costs.txt", costs_text(r)),
        ("report.txt", render_text(r)),
    ];
    if r.audit.is_some() {
        files.push(("audit.csv", audit_csv(r)));
        files.push(("thresholds.csv", thresholds_csv(r)));
    }
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{:.2}", r.threshold),
                format!("{:.6}", r.macro_f1),
                format!("{:.2}", r.instances_sent),
                format!("{:.2}", r.pct),
                format!("{:.3}", r.total_time_s),
            ]
        })
        .collect();
    csv_string(
        &[
            "threshold",
            "macro_f1",
            "instances_sent",
            "pct",
            "total_time_s",
        ],
        &rows,
    )
}

pub fn sweep_text(rows: &[SweepRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("{:.2}", r.threshold),
                pct(r.macro_f1),
                format!("{:.1}", r.instances_sent),
                format!("{:.1}", r.pct),
                format!("{:.1}", r.total_time_s),
            ]
        })
        .collect();
    format!(
        "Threshold sweep, averaged over folds (Macro-F1 in %)\n{}",
        text_table(&["threshold", "macro_f1", "sent", "pct", "time_s"], &rows)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let t = text_table(&["a", "bb"], &[vec!["xyz".into(), "1".into()]]);
        assert_eq!(t, "a    bb\n-------\nxyz   1\n");
    }
}
