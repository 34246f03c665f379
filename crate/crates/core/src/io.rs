//! Reading designs from dense CSV or svmlight files, and writing
//! coefficient tables.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::coef::Coefficients;
use crate::design::{RawMatrix, Transform};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DataFormat {
    #[default]
    Csv,
    Svmlight,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "svmlight" | "libsvm" => Ok(DataFormat::Svmlight),
            other => Err(Error::InvalidConfig(format!(
                "unknown format '{other}'; valid: csv, svmlight"
            ))),
        }
    }
}

/// A design with its response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: RawMatrix,
    pub y: Vec<f64>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("'{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("'{field}' is not finite")));
    }
    Ok(v)
}

/// Reads every row of a numeric CSV file. Blank lines are skipped.
pub fn read_csv_rows(path: &Path, header: bool) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .map(|f| parse_f64(path, line, f))
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected {w} fields, found {}", row.len()),
                ))
            }
            _ => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "no data rows"));
    }
    Ok(rows)
}

/// Dense CSV with the response in the first column.
pub fn read_csv_dataset(path: &Path, header: bool) -> Result<Dataset> {
    let rows = read_csv_rows(path, header)?;
    if rows[0].len() < 2 {
        return Err(parse_err(path, 1, "need a response column and at least one predictor"));
    }
    let y = rows.iter().map(|r| r[0]).collect();
    let xs: Vec<Vec<f64>> = rows.into_iter().map(|r| r[1..].to_vec()).collect();
    Ok(Dataset {
        x: RawMatrix::from_rows(&xs)?,
        y,
    })
}

/// svmlight: `label index:value ...` with 1-based indices. Text after `#` is
/// ignored. The column count is the largest index seen.
pub fn read_svmlight(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
    let mut y = Vec::new();
    let mut triplets = Vec::new();
    let mut n_cols = 0usize;
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| parse_err(path, lineno, e.to_string()))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let label = parse_f64(path, lineno, fields.next().expect("non-empty line"))?;
        let row = y.len();
        y.push(label);
        let mut last = 0usize;
        for field in fields {
            let (idx, val) = field
                .split_once(':')
                .ok_or_else(|| parse_err(path, lineno, format!("expected index:value, found '{field}'")))?;
            if idx == "qid" {
                continue;
            }
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad feature index '{idx}'")))?;
            if idx == 0 {
                return Err(parse_err(path, lineno, "feature indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_err(path, lineno, "feature indices must be increasing"));
            }
            last = idx;
            n_cols = n_cols.max(idx);
            triplets.push((row, idx - 1, parse_f64(path, lineno, val)?));
        }
    }
    if y.is_empty() {
        return Err(parse_err(path, 0, "no data rows"));
    }
    if n_cols == 0 {
        return Err(parse_err(path, 0, "no features"));
    }
    Ok(Dataset {
        x: RawMatrix::sparse_from_triplets(y.len(), n_cols, triplets)?,
        y,
    })
}

pub fn read_dataset(path: &Path, format: DataFormat, header: bool) -> Result<Dataset> {
    match format {
        DataFormat::Csv => read_csv_dataset(path, header),
        DataFormat::Svmlight => read_svmlight(path),
    }
}

/// One row of a coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefRecord {
    pub lambda: f64,
    /// 1-based predictor index, `0` for the intercept, or `i:j` for a
    /// precision-matrix entry.
    pub predictor: String,
    pub value: f64,
}

/// Nonzero coefficients of one fit, with the intercept first. When `transform`
/// is given, coefficients are mapped back to the original data scale.
pub fn coef_records(lambda: f64, coefs: &Coefficients, transform: Option<&Transform>) -> Vec<CoefRecord> {
    let mapped;
    let coefs = match transform {
        Some(t) => {
            mapped = t.to_original(coefs);
            &mapped
        }
        None => coefs,
    };
    let mut out = vec![CoefRecord {
        lambda,
        predictor: "0".into(),
        value: coefs.intercept,
    }];
    out.extend(coefs.iter().map(|(j, v)| CoefRecord {
        lambda,
        predictor: (j + 1).to_string(),
        value: v,
    }));
    out
}

/// Nonzero entries of the upper triangle of a precision matrix, 1-based.
pub fn precision_records(lambda: f64, theta: &nalgebra::DMatrix<f64>) -> Vec<CoefRecord> {
    let p = theta.nrows();
    let mut out = Vec::new();
    for i in 0..p {
        for j in i..p {
            let v = theta[(i, j)];
            if v != 0.0 {
                out.push(CoefRecord {
                    lambda,
                    predictor: format!("{}:{}", i + 1, j + 1),
                    value: v,
                });
            }
        }
    }
    out
}

pub fn write_coef_records<W: Write>(out: W, records: &[CoefRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "predictor", "value"])?;
    for r in records {
        w.write_record([r.lambda.to_string(), r.predictor.clone(), r.value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_coef_records(path: &Path) -> Result<Vec<CoefRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(parse_err(path, line, "expected lambda,predictor,value"));
        }
        out.push(CoefRecord {
            lambda: parse_f64(path, line, &record[0])?,
            predictor: record[1].to_string(),
            value: parse_f64(path, line, &record[2])?,
        });
    }
    Ok(out)
}

/// Opens `path` for writing, or standard output when `None` or `-`.
pub fn output_writer(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(Box::new(std::io::BufWriter::new(File::create(p)?))),
        _ => Ok(Box::new(std::io::stdout().lock())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_with_header() {
        let f = temp_file("y,a,b\n1,2,3\n4,5,6\n");
        let d = read_csv_dataset(f.path(), true).unwrap();
        assert_eq!(d.y, vec![1.0, 4.0]);
        assert_eq!(d.x, RawMatrix::from_rows(&[vec![2.0, 3.0], vec![5.0, 6.0]]).unwrap());
    }

    #[test]
    fn csv_error_reports_line() {
        let f = temp_file("1,2,3\n4,x,6\n");
        let err = read_csv_dataset(f.path(), false).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let f = temp_file("1,2,3\n4,5\n");
        let err = read_csv_dataset(f.path(), false).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn svmlight_parses_one_based_indices() {
        let f = temp_file("1 1:0.5 3:2\n# comment\n0 2:1.5\n");
        let d = read_svmlight(f.path()).unwrap();
        assert_eq!(d.y, vec![1.0, 0.0]);
        assert_eq!(
            d.x.to_dense(),
            RawMatrix::from_rows(&[vec![0.5, 0.0, 2.0], vec![0.0, 1.5, 0.0]]).unwrap()
        );
    }

    #[test]
    fn svmlight_rejects_zero_index() {
        let f = temp_file("1 1:1\n1 0:2\n");
        assert!(matches!(read_svmlight(f.path()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn coefficient_table_round_trips() {
        let mut c = Coefficients::zeros(4);
        c.set(2, -1.5);
        c.intercept = 0.25;
        let recs = coef_records(0.5, &c, None);
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[1].predictor, "3");
        let f = tempfile::NamedTempFile::new().unwrap();
        write_coef_records(File::create(f.path()).unwrap(), &recs).unwrap();
        assert_eq!(read_coef_records(f.path()).unwrap(), recs);
    }
}
