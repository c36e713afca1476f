//! File formats: point sets as CSV and input distributions as JSON.
//!
//! Points CSV has the header `kind,w1,w2,w3,w4,z1,...,zn` and one row per
//! point. Numbers are written with 17 significant digits so a file read back
//! reproduces the set bit for bit.
//!
//! A distribution file is a JSON object with `mean` and either `cov` or
//! `std` plus `corr`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::corr_to_cov;
use crate::types::{GaussianSpec, PointKind, Points, SigmaPointSet, WeightTable};

/// Formats `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_points<W: Write>(out: W, set: &SigmaPointSet, weights: &WeightTable) -> Result<()> {
    if weights.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            found: weights.len(),
        });
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header: Vec<String> = ["kind", "w1", "w2", "w3", "w4"].iter().map(|s| s.to_string()).collect();
    header.extend((1..=set.dim()).map(|j| format!("z{j}")));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..set.len() {
        let mut rec = vec![set.kinds[i].as_str().to_string()];
        for k in 1..=4 {
            rec.push(fmt_f64(weights.order(k)[i]));
        }
        rec.extend(set.point(i).iter().map(|&z| fmt_f64(z)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_points<R: Read>(input: R) -> Result<(SigmaPointSet, WeightTable)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let fixed = ["kind", "w1", "w2", "w3", "w4"];
    if header.len() < fixed.len() + 1 || header.iter().take(5).ne(fixed.iter().copied()) {
        return Err(Error::Format(
            "points header must start with kind,w1,w2,w3,w4 followed by z1..zn".into(),
        ));
    }
    let dim = header.len() - fixed.len();
    for (j, name) in header.iter().skip(5).enumerate() {
        if name != format!("z{}", j + 1) {
            return Err(Error::Format(format!("expected column z{}, found `{name}`", j + 1)));
        }
    }
    let mut kinds = Vec::new();
    let mut w = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut data = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = line + 2;
        kinds.push(rec[0].parse::<PointKind>()?);
        for (k, wk) in w.iter_mut().enumerate() {
            wk.push(parse_cell(&rec[k + 1], row)?);
        }
        for cell in rec.iter().skip(5) {
            data.push(parse_cell(cell, row)?);
        }
    }
    let [w1, w2, w3, w4] = w;
    let set = SigmaPointSet::new(Points::from_rows(dim, data)?, kinds)?;
    Ok((set, WeightTable { w1, w2, w3, w4 }))
}

fn parse_cell(s: &str, row: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {row}: `{s}` is not a number")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// On-disk form of a Gaussian input distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corr: Option<Vec<Vec<f64>>>,
}

impl DistributionFile {
    pub fn from_spec(spec: &GaussianSpec) -> Self {
        let n = spec.dim();
        Self {
            mean: spec.mean.iter().copied().collect(),
            cov: Some((0..n).map(|i| spec.cov.row(i).iter().copied().collect()).collect()),
            std: None,
            corr: None,
        }
    }

    pub fn to_spec(&self) -> Result<GaussianSpec> {
        let n = self.mean.len();
        let cov = match (&self.cov, &self.std, &self.corr) {
            (Some(cov), None, None) => square(cov, n, "cov")?,
            (None, Some(std), Some(corr)) => {
                if std.len() != n {
                    return Err(Error::Format(format!("std has {} entries, mean has {n}", std.len())));
                }
                corr_to_cov(std, &square(corr, n, "corr")?)?
            }
            _ => {
                return Err(Error::Format(
                    "distribution needs `mean` and either `cov` or both `std` and `corr`".into(),
                ))
            }
        };
        GaussianSpec::checked(DVector::from_vec(self.mean.clone()), cov)
    }
}

fn square(rows: &[Vec<f64>], n: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Format(format!("`{name}` must be a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn read_distribution<R: Read>(input: R) -> Result<GaussianSpec> {
    let file: DistributionFile =
        serde_json::from_reader(input).map_err(|e| Error::Format(e.to_string()))?;
    file.to_spec()
}

pub fn write_distribution<W: Write>(out: W, spec: &GaussianSpec) -> Result<()> {
    serde_json::to_writer_pretty(out, &DistributionFile::from_spec(spec))
        .map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpem::{build_qpem, QpemParams};

    #[test]
    fn points_round_trip_bit_exactly() {
        let (set, w) = build_qpem(&QpemParams::new(3).with_r(3f64.sqrt())).unwrap();
        let mut buf = Vec::new();
        write_points(&mut buf, &set, &w).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("kind,w1,w2,w3,w4,z1,z2,z3\ncentral,"));
        assert_eq!(text.lines().count(), 1 + 19);
        let (set2, w2) = read_points(buf.as_slice()).unwrap();
        assert_eq!(set2.kinds, set.kinds);
        for (a, b) in set.points.as_slice().iter().zip(set2.points.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(w2, w);
    }

    #[test]
    fn rejects_bad_header_and_cells() {
        assert!(read_points("kind,w1,w2,w3,z1\n".as_bytes()).is_err());
        let bad = "kind,w1,w2,w3,w4,z1\ncentral,1,1,1,1,abc\n";
        let err = read_points(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(read_points("kind,w1,w2,w3,w4,z1\nnope,1,1,1,1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn distribution_from_std_and_corr() {
        let json = r#"{"mean": [1, 2], "std": [2, 3], "corr": [[1, 0.5], [0.5, 1]]}"#;
        let spec = read_distribution(json.as_bytes()).unwrap();
        assert_eq!(spec.cov[(0, 1)], 3.0);
        assert_eq!(spec.cov[(1, 1)], 9.0);
        let mut buf = Vec::new();
        write_distribution(&mut buf, &spec).unwrap();
        assert_eq!(read_distribution(buf.as_slice()).unwrap(), spec);
    }

    #[test]
    fn distribution_requires_one_covariance_form() {
        assert!(read_distribution(r#"{"mean": [0]}"#.as_bytes()).is_err());
        assert!(read_distribution(r#"{"mean": [0], "cov": [[1]], "std": [1]}"#.as_bytes()).is_err());
        assert!(read_distribution(r#"{"mean": [0, 0], "cov": [[1]]}"#.as_bytes()).is_err());
        assert!(read_distribution(r#"{"mean": [0], "cov": [[-1]]}"#.as_bytes()).is_err());
    }
}
