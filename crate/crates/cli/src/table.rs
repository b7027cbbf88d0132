//! Result tables: CSV with `#` comment lines on top.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Formats a float with enough digits to round-trip the values we care about
/// while keeping files diffable.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.6}")
    }
}

fn cmp_cells(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(Ordering::Equal),
        _ => a.cmp(b),
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { comments: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Orders rows cell by cell, numerically where both cells parse.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| cmp_cells(x, y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal));
    }

    pub fn col(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("column '{name}' missing (have {})", self.header.join(","))))
    }

    pub fn f64_at(&self, row: &[String], col: usize) -> f64 {
        row[col].parse().unwrap_or(f64::NAN)
    }

    /// Rows whose named columns equal the given values.
    pub fn select<'a>(&'a self, filter: &[(&str, &str)]) -> Result<Vec<&'a Vec<String>>, CliError> {
        let cols: Vec<(usize, &str)> = filter.iter().map(|(c, v)| Ok((self.col(c)?, *v))).collect::<Result<_, CliError>>()?;
        Ok(self.rows.iter().filter(|r| cols.iter().all(|(c, v)| r[*c] == *v)).collect())
    }

    pub fn to_csv_string(&self) -> Result<String, CliError> {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Data(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Data(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).expect("csv writer emits utf-8"));
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, self.to_csv_string()?).map_err(|e| CliError::io(path, e))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let comments =
            text.lines().take_while(|l| l.starts_with('#')).map(|l| l.trim_start_matches('#').trim().to_string()).collect();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| CliError::Data(e.to_string()))?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec.map_err(|e| CliError::Data(e.to_string()))?.iter().map(String::from).collect());
        }
        Ok(Self { comments, header, rows })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups `raw` by `keys` and reports `runs`, then mean and std of each of
/// `values`. Rows whose `status` column (if any) is not `ok` are left out of
/// the statistics but a group with no usable rows still appears.
pub fn aggregate(raw: &Table, keys: &[&str], values: &[&str]) -> Result<Table, CliError> {
    let key_cols: Vec<usize> = keys.iter().map(|k| raw.col(k)).collect::<Result<_, _>>()?;
    let val_cols: Vec<usize> = values.iter().map(|v| raw.col(v)).collect::<Result<_, _>>()?;
    let status = raw.col("status").ok();

    let mut header: Vec<String> = keys.iter().map(|s| s.to_string()).collect();
    header.push("runs".into());
    for v in values {
        header.push(format!("mean_{v}"));
        header.push(format!("std_{v}"));
    }
    let mut out = Table { comments: raw.comments.clone(), header, rows: Vec::new() };
    out.comment("aggregate: mean and sample std over runs with status ok");

    let mut groups: Vec<(Vec<String>, Vec<&Vec<String>>)> = Vec::new();
    for row in &raw.rows {
        let key: Vec<String> = key_cols.iter().map(|&c| row[c].clone()).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    for (key, rows) in groups {
        let ok: Vec<&Vec<String>> = rows.into_iter().filter(|r| status.map_or(true, |c| r[c] == "ok")).collect();
        let mut line = key;
        line.push(ok.len().to_string());
        for &c in &val_cols {
            let vals: Vec<f64> = ok.iter().map(|r| raw.f64_at(r, c)).collect();
            let (m, s) = mean_std(&vals);
            line.push(fmt_f64(m));
            line.push(fmt_f64(s));
        }
        out.rows.push(line);
    }
    out.sort();
    Ok(out)
}
