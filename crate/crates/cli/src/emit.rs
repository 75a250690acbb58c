//! JSON and plain-text renderings of reports.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::report::{AnalysisReport, Matrix, Value};
use crate::validate::{SpreadRow, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Text,
    Json,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports contain only finite numbers");
    s.push('\n');
    s
}

pub fn emit(report: &AnalysisReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Text => text(report),
    }
}

pub fn emit_validation(report: &ValidationReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Text => {
            let mut out = String::new();
            validation_text(&mut out, report);
            out
        }
    }
}

fn entry(re: f64, im: f64) -> String {
    // print -0.0000 as 0.0000
    let clean = |x: f64| if x.abs() < 5e-5 { 0.0 } else { x };
    let (re, im) = (clean(re), clean(im));
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{re:>7.4}{sign}{:.4}i", im.abs())
}

fn matrix_lines(out: &mut String, m: &Matrix) {
    for row in &m.data {
        let cells: Vec<String> = row.iter().map(|z| entry(z.re, z.im)).collect();
        let _ = writeln!(out, "  {}", cells.join("  "));
    }
}

fn list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn value_line(out: &mut String, name: &str, v: &Value) {
    match v.error {
        Some(e) => writeln!(out, "  {name:<26}{:.4} +/- {e:.4}", v.value),
        None => writeln!(out, "  {name:<26}{:.4}", v.value),
    }
    .unwrap();
}

fn text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let p = &r.provenance;
    let _ = writeln!(out, "{} {}  ({})", p.tool, p.version, r.schema);
    let _ = writeln!(out, "input sha256 {}", p.input_sha256);
    let _ = writeln!(
        out,
        "N = {}  delta_theta = {} deg  design condition {:.2}",
        r.input.normalization, r.input.delta_theta_deg, r.input.design_condition
    );

    let _ = writeln!(out, "\nlinear estimate");
    matrix_lines(&mut out, &r.linear.rho);
    let ph = &r.linear.physicality;
    let _ = writeln!(out, "  eigenvalues {}", list(&ph.eigenvalues));
    let _ = writeln!(
        out,
        "  Tr rho^2 = {:.4}  physical: {}",
        ph.trace_rho_squared,
        if ph.physical { "yes" } else { "no" }
    );

    if let Some(m) = &r.mle {
        let _ = writeln!(out, "\nmaximum-likelihood estimate");
        matrix_lines(&mut out, &m.rho);
        let _ = writeln!(out, "  eigenvalues {}", list(&m.physicality.eigenvalues));
        let _ = writeln!(
            out,
            "  Tr rho^2 = {:.4}  L = {:.4}  converged: {} after {} evaluations",
            m.physicality.trace_rho_squared,
            m.likelihood,
            if m.converged { "yes" } else { "no" },
            m.evaluations
        );
    }

    if let Some(m) = &r.measures {
        let which = match m.estimate {
            crate::report::EstimateKind::Mle => "maximum-likelihood",
            crate::report::EstimateKind::Linear => "linear",
        };
        let _ = writeln!(out, "\nmeasures on the {which} estimate");
        value_line(&mut out, "entropy (bits)", &m.entropy);
        value_line(&mut out, "linear entropy", &m.linear_entropy);
        value_line(&mut out, "concurrence", &m.concurrence);
        value_line(&mut out, "tangle", &m.tangle);
        value_line(&mut out, "entanglement of formation", &m.eof);
    }

    if let Some(e) = &r.errors {
        let _ = writeln!(
            out,
            "\nerror model: s from {:?}, {:?} covariance; concurrence gradient {}",
            e.s_path, e.covariance, e.concurrence_gradient
        );
        let _ = writeln!(
            out,
            "  {:>3}  {:<6}{:>10}{:>13}",
            "nu", "label", "s", "Lambda"
        );
        for l in &e.lambda {
            let _ = writeln!(
                out,
                "  {:>3}  {:<6}{:>10.4}{:>13.3e}",
                l.nu, l.label, l.s, l.lambda
            );
        }
        let _ = writeln!(out, "  element standard deviations");
        for row in &e.rho_sigma {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.4}")).collect();
            let _ = writeln!(out, "    {}", cells.join("  "));
        }
        let _ = writeln!(out, "  note: {}", e.caveat);
    }

    if let Some(v) = &r.validation {
        out.push('\n');
        validation_text(&mut out, v);
    }

    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn spread_lines(out: &mut String, title: &str, rows: &[SpreadRow]) {
    let _ = writeln!(out, "  {title}");
    for r in rows {
        let ratio = r.ratio.map_or("-".to_string(), |x| format!("{x:.3}"));
        let _ = writeln!(
            out,
            "    {:<16}{:>12.4e}{:>12.4e}{:>8}  {}",
            r.name,
            r.empirical,
            r.predicted,
            ratio,
            if r.within_tolerance { "ok" } else { "OUT" }
        );
    }
}

fn validation_text(out: &mut String, v: &ValidationReport) {
    let _ = writeln!(
        out,
        "Monte Carlo check: {} trials, seed {}, N = {}, delta_theta = {} deg, {} normalization",
        v.trials, v.seed, v.flux, v.delta_theta_deg, v.normalization
    );
    let _ = writeln!(
        out,
        "  columns: empirical, predicted, ratio; tolerance {}",
        v.tolerance
    );
    spread_lines(out, "Var(s_nu) vs Lambda_nu", &v.s_variance);
    spread_lines(out, "element standard deviations", &v.element_sigma);
    if !v.measure_sigma.is_empty() {
        spread_lines(
            out,
            &format!("measure spreads over {} fits (not gated)", v.fitted_trials),
            &v.measure_sigma,
        );
    }
    let _ = writeln!(out, "  result: {}", if v.passed { "PASS" } else { "FAIL" });
}
