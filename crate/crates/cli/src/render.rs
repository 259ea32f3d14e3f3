//! Plain-text tables. Numbers use the shortest representation that parses
//! back to the same float, so table and raw output carry identical values.

use std::fmt::Write;

use qdt_core::mindspace::combined_amplitudes;
use qdt_core::sampler::SampleSummary;
use qdt_core::scenario::{ResultDocument, Scenario};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RangeRow {
    pub row: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub theta_min: f64,
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec(), &mut out);
    for row in rows {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

/// Shortest round-trip form; exponent notation for very small or large values.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), num)
}

pub fn evaluation(doc: &ResultDocument, optimal: &[String]) -> String {
    let rows: Vec<Vec<String>> = doc
        .reports
        .iter()
        .map(|r| vec![r.label.clone(), num(r.probability), num(r.utility_factor), num(r.attraction)])
        .collect();
    let mut out = table(&["prospect", "probability", "utility", "attraction"], &rows);
    let sum_p: f64 = doc.reports.iter().map(|r| r.probability).sum();
    let sum_q: f64 = doc.reports.iter().map(|r| r.attraction).sum();
    let _ = writeln!(out, "optimal: {}", optimal.join(", "));
    let _ = writeln!(out, "sum p = {}, sum q = {}", num(sum_p), num(sum_q));
    out
}

pub fn checks(doc: &ResultDocument) -> String {
    let rows: Vec<Vec<String>> = doc
        .paradoxes
        .iter()
        .map(|c| match &c.report {
            Some(r) => {
                let details: Vec<String> = r.details.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect();
                let mut outcome = r.outcome.clone();
                if let Some(w) = &r.witness {
                    let w: Vec<String> = w.iter().map(|i| (i + 1).to_string()).collect();
                    let _ = write!(outcome, " [witness {}]", w.join(","));
                }
                vec![
                    r.proposition.id().to_string(),
                    r.proposition.name().to_string(),
                    r.verdict.to_string(),
                    num(r.margin),
                    outcome,
                    details.join(" "),
                ]
            }
            None => vec![
                c.requested.id().to_string(),
                c.requested.name().to_string(),
                "n/a".to_string(),
                "-".to_string(),
                c.not_applicable.clone().unwrap_or_default(),
                String::new(),
            ],
        })
        .collect();
    table(&["prop", "name", "verdict", "margin", "outcome", "details"], &rows)
}

pub fn calibration(scenario: &Scenario) -> String {
    let frame = scenario.frame();
    let mut rows = Vec::new();
    for p in scenario.lattice().prospects() {
        let z = combined_amplitudes(p, scenario.state()).unwrap_or_default();
        for k in p.support() {
            rows.push(vec![
                p.label().to_string(),
                frame.describe(&frame.index_at(k)),
                num(z[k].re),
                num(z[k].im),
                num(z[k].arg()),
            ]);
        }
    }
    table(&["prospect", "state", "z_re", "z_im", "phase"], &rows)
}

pub fn ranges(ranges: &[RangeRow]) -> String {
    let rows: Vec<Vec<String>> = ranges
        .iter()
        .map(|r| vec![r.row.to_string(), num(r.q_min), num(r.q_max), num(r.theta_min)])
        .collect();
    table(&["row", "q_min", "q_max", "theta_min"], &rows)
}

pub fn summary(s: &SampleSummary) -> String {
    let c = &s.config;
    let shape: Vec<String> = c.shape.iter().map(usize::to_string).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "samples {} (rejected {}), seed {}, shape {}, q scale {}",
        s.samples,
        s.rejected,
        c.seed,
        shape.join("x"),
        num(c.q_scale)
    );
    let rows: Vec<Vec<String>> = s
        .propositions
        .iter()
        .map(|(p, r)| {
            vec![
                p.id().to_string(),
                p.name().to_string(),
                r.evaluated.to_string(),
                r.boundary.to_string(),
                r.not_applicable.to_string(),
                opt(r.agreement_rate),
                opt(r.effect_frequency),
            ]
        })
        .collect();
    out.push_str(&table(&["prop", "name", "evaluated", "boundary", "n/a", "agreement", "effect"], &rows));
    let _ = writeln!(out, "max alternation residual: {}", num(s.max_alternation_residual));
    let _ = writeln!(out, "max contrapositive residual: {}", num(s.max_contrapositive_residual));
    let _ = writeln!(out, "max decomposition residual: {}", num(s.max_decomposition_residual));
    out
}
