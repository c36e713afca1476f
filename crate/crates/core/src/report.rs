//! Method comparison tables against a case's reference row.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{BenchmarkCase, ReferenceRow};
use crate::error::{Error, Result};
use crate::estimator::{relative_errors, ErrorReport};
use crate::propagate::{propagate_case, Method, Propagation};

/// One method evaluated on one case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub case: String,
    pub dim: usize,
    pub key: String,
    pub run: Propagation,
    /// The published row for the same method, when one exists.
    pub published: Option<[f64; 4]>,
    pub errors: ErrorReport,
}

/// The reference used for error reports: the analytic row when present,
/// otherwise the Monte Carlo row.
pub fn reference_row(case: &BenchmarkCase) -> Result<&ReferenceRow> {
    case.reference("oracle")
        .or_else(|| case.reference("mc"))
        .ok_or_else(|| Error::InvalidSpec(format!("case `{}` has no reference row", case.name)))
}

/// Runs every method key on `case` and compares with its reference row.
pub fn compare(case: &BenchmarkCase, keys: &[&str]) -> Result<Vec<ComparisonRow>> {
    let reference = reference_row(case)?;
    let target = reference.summary();
    keys.iter()
        .map(|&key| {
            let method = Method::for_table_key(key, case.dim())
                .ok_or_else(|| Error::param(format!("unknown method key `{key}`")))?;
            let run = propagate_case(case, &method)?;
            let errors = relative_errors(&run.summary, &target, reference.provenance());
            Ok(ComparisonRow {
                case: case.name.clone(),
                dim: case.dim(),
                key: key.to_string(),
                published: case.reference(key).map(|r| r.values),
                run,
                errors,
            })
        })
        .collect()
}

/// Shortest decimal that reads back to the same value.
fn fmt_f64(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Wide table: one row per method with estimates, published values and
/// relative errors.
pub fn write_table<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record([
        "case", "n", "method", "points", "mean", "std", "skew", "kurt", "published_mean",
        "published_std", "published_skew", "published_kurt", "err_mean", "err_std", "err_skew",
        "err_kurt", "stability_factor",
    ])
    .map_err(|e| Error::Format(e.to_string()))?;
    for r in rows {
        let s = &r.run.summary;
        let mut rec = vec![
            r.case.clone(),
            r.dim.to_string(),
            r.key.clone(),
            r.run.point_count.to_string(),
            fmt_f64(s.mean),
            fmt_f64(s.std),
            opt(s.skew),
            opt(s.kurt),
        ];
        for k in 0..4 {
            rec.push(opt(r.published.map(|p| p[k])));
        }
        rec.extend(r.errors.as_array().into_iter().map(opt));
        rec.push(fmt_f64(r.run.stability_factor));
        w.write_record(&rec).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Long table: one row per method and moment, for plotting error curves.
pub fn write_long<W: Write>(out: W, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["case", "n", "method", "points", "moment", "value", "rel_error", "reference"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for r in rows {
        let s = &r.run.summary;
        let values = [Some(s.mean), Some(s.std), s.skew, s.kurt];
        for (k, name) in ["mean", "std", "skew", "kurt"].iter().enumerate() {
            w.write_record([
                r.case.clone(),
                r.dim.to_string(),
                r.key.clone(),
                r.run.point_count.to_string(),
                name.to_string(),
                opt(values[k]),
                opt(r.errors.as_array()[k]),
                r.errors.reference.clone(),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{self, TABLE_KEYS};

    #[test]
    fn roof_truss_table_has_eight_rows() {
        let case = benchmarks::case("rooftruss").unwrap();
        let rows = compare(&case, &TABLE_KEYS).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.published.is_some()));
        assert!(rows.iter().all(|r| r.errors.reference == "published MC"));
        let mut buf = Vec::new();
        write_table(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
        let mut buf = Vec::new();
        write_long(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 32);
    }

    #[test]
    fn polynomial_rows_use_the_oracle() {
        let case = benchmarks::case("polynomial").unwrap();
        let rows = compare(&case, &["qpem-3", "sgh3"]).unwrap();
        for r in &rows {
            assert_eq!(r.errors.reference, "analytic");
            assert!(r.errors.mean.unwrap() < 1e-12);
            assert!(r.published.is_none());
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let case = benchmarks::case("sixstory").unwrap();
        assert!(compare(&case, &["qpem-7"]).is_err());
    }
}
