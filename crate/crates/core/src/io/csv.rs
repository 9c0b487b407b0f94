use super::fmt_float;
use crate::diagnostics::{DiagnosticsRow, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::verify::ConvergenceStudy;

pub fn diagnostics_csv(rows: &[DiagnosticsRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 5 { r.fp_iters.to_string() } else { fmt_float(*v) })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Reads a diagnostics table. The columns `t, mass, charge, min_c, max_c, fp_iters` are
/// required; the remaining known columns default to zero when absent.
pub fn parse_diagnostics_csv(text: &str) -> Result<Vec<DiagnosticsRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedDiagnostics("empty diagnostics file".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let index: Vec<Option<usize>> = CSV_COLUMNS.iter().map(|c| names.iter().position(|n| n == c)).collect();
    if let Some(missing) = CSV_COLUMNS[..6].iter().zip(&index).find(|(_, i)| i.is_none()) {
        return Err(Error::MalformedDiagnostics(format!("missing column `{}`", missing.0)));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(Error::MalformedDiagnostics(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                names.len(),
                fields.len()
            )));
        }
        let mut v = [0.0; 11];
        for (k, col) in index.iter().enumerate() {
            if let Some(c) = col {
                v[k] = fields[*c].parse().map_err(|_| {
                    Error::MalformedDiagnostics(format!("line {}: bad value `{}` in `{}`", lineno + 1, fields[*c], CSV_COLUMNS[k]))
                })?;
            }
        }
        rows.push(DiagnosticsRow {
            t: v[0],
            mass: v[1],
            charge: v[2],
            min_c: v[3],
            max_c: v[4],
            fp_iters: v[5] as usize,
            energy: v[6],
            phi_mean: v[7],
            p_mean: v[8],
            div_v: v[9],
            source_residual: v[10],
        });
    }
    Ok(rows)
}

pub const STUDY_COLUMNS: [&str; 12] = [
    "eps",
    "h",
    "e_c_plus",
    "e_c_minus",
    "e_phi",
    "e_v",
    "order_c_plus",
    "order_c_minus",
    "order_phi",
    "order_v",
    "e_phi_plain",
    "e_phi_corrected",
];

/// The study table; orders are empty on the first row, corrector columns empty when the
/// corrector does not apply.
pub fn study_csv(study: &ConvergenceStudy) -> String {
    let mut out = STUDY_COLUMNS.join(",");
    out.push('\n');
    for (row, orders) in study.rows.iter().zip(study.observed_orders()) {
        let mut cells = vec![fmt_float(row.eps), fmt_float(row.h)];
        cells.extend(row.errors().iter().map(|e| fmt_float(*e)));
        match orders {
            Some(o) => cells.extend(o.iter().map(|v| fmt_float(*v))),
            None => cells.extend(std::iter::repeat(String::new()).take(4)),
        }
        match row.corrector {
            Some(c) => cells.extend([fmt_float(c.plain), fmt_float(c.enhanced)]),
            None => cells.extend([String::new(), String::new()]),
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
