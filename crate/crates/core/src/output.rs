//! CSV serialization of experiment tables and embeddings.
//!
//! Every float is written with 17 significant digits so that reading it back
//! returns the same double.

use std::io::Write;

use crate::error::{Error, Result};
use crate::experiments::ExperimentRecord;
use crate::hyperbolic::HyperboloidPoint;

/// `x` in scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::Csv(e.to_string()))
}

/// Header `experiment,n,<value names>`; every record must carry the same
/// value names in the same order.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<&str> = match records.first() {
        Some(r) => r.values.iter().map(|(k, _)| k.as_str()).collect(),
        None => Vec::new(),
    };
    let mut header = vec!["experiment", "n"];
    header.extend(&names);
    w.write_record(&header)?;
    for r in records {
        if r.values.len() != names.len() || r.values.iter().zip(&names).any(|((k, _), n)| k != n) {
            return Err(Error::Csv(format!("record n={} does not match the header columns", r.n)));
        }
        let mut row = vec![r.experiment.clone(), r.n.to_string()];
        row.extend(r.values.iter().map(|(_, v)| format_f64(*v)));
        w.write_record(&row)?;
    }
    flush(w)
}

/// Rows `label,t,x1..x_r`, with `r` the largest spatial dimension and
/// shorter points zero-padded.
pub fn write_embedding_csv<W: Write>(labels: &[String], points: &[HyperboloidPoint], out: W) -> Result<()> {
    if labels.len() != points.len() {
        return Err(Error::DimensionMismatch("one label per point".into()));
    }
    let r = points.iter().map(|p| p.x.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string(), "t".to_string()];
    header.extend((1..=r).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (label, p) in labels.iter().zip(points) {
        let mut row = vec![label.clone(), format_f64(p.t)];
        row.extend(p.x.padded(r).0.iter().map(|v| format_f64(*v)));
        w.write_record(&row)?;
    }
    flush(w)
}
