//! Cell-wise comparison of two result tables.

use crate::table::parse_csv;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct DiffReport {
    pub cells_compared: usize,
    pub max_rel_diff: f64,
    pub first_violation: Option<(usize, usize, String, String)>,
    pub within_tolerance: bool,
}

impl DiffReport {
    pub fn summary(&self) -> String {
        match &self.first_violation {
            None => format!(
                "{} cells compared, max relative difference {:.3e}",
                self.cells_compared, self.max_rel_diff
            ),
            Some((r, c, a, b)) => format!(
                "{} cells compared, max relative difference {:.3e}; first violation at row {}, column {}: {} vs {}",
                self.cells_compared, self.max_rel_diff, r, c, a, b
            ),
        }
    }
}

/// Compares two CSV tables cell by cell. Numeric cells must agree within the
/// relative tolerance, everything else must match exactly. Comment lines are
/// ignored; the column schema must be identical.
pub fn diff_tables(a_text: &str, b_text: &str, rtol: f64) -> Result<DiffReport, CliError> {
    let a = parse_csv(a_text)?;
    let b = parse_csv(b_text)?;
    if a.columns != b.columns {
        return Err(CliError::Validation(format!(
            "schema mismatch: {:?} vs {:?}",
            a.columns, b.columns
        )));
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::Validation(format!(
            "row count mismatch: {} vs {}",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let mut max_rel = 0.0f64;
    let mut cells = 0usize;
    let mut violation = None;
    for (ri, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        for (ci, (ca, cb)) in ra.iter().zip(rb).enumerate() {
            cells += 1;
            let rel = match (ca.parse::<f64>(), cb.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    if x == y || (x.is_nan() && y.is_nan()) {
                        0.0
                    } else if x.is_finite() && y.is_finite() {
                        (x - y).abs() / x.abs().max(y.abs())
                    } else {
                        f64::INFINITY
                    }
                }
                _ => {
                    if ca == cb {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
            };
            if rel > max_rel {
                max_rel = rel;
            }
            if rel > rtol && violation.is_none() {
                violation = Some((ri, ci, ca.clone(), cb.clone()));
            }
        }
    }
    Ok(DiffReport {
        cells_compared: cells,
        max_rel_diff: max_rel,
        within_tolerance: violation.is_none(),
        first_violation: violation,
    })
}
