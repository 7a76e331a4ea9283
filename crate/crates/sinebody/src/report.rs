//! CSV output of verification reports.

use std::io::Write;

use sinebody_core::harness::VerificationReport;

use crate::error::Result;

/// Column names of the report CSV.
pub const REPORT_COLUMNS: [&str; 14] = [
    "name",
    "n",
    "p",
    "body_K",
    "body_L",
    "rule",
    "seed",
    "lhs",
    "rhs",
    "ratio",
    "tol",
    "pass",
    "equality_flag",
    "wall_ms",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Writes a header and one row per report. Floats use the shortest
/// representation that round-trips, so identical runs give identical bytes.
pub fn write_reports<W: Write>(out: W, reports: &[VerificationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.n.to_string(),
            opt(&r.p),
            r.body_k.clone(),
            opt(&r.body_l),
            r.rule.clone(),
            opt(&r.seed),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.ratio.to_string(),
            r.tol.to_string(),
            r.pass.to_string(),
            r.equality.to_string(),
            r.wall_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
