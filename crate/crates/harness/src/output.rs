use std::fs;
use std::path::{Path, PathBuf};

use gapcs::io::fmt_g17;

use crate::Result;

/// `%.17g`.
pub fn num(v: f64) -> String {
    fmt_g17(v)
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a header row and data rows, creating the directory if needed.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Median of a non-empty slice; NaNs sort last.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn alpha_tag(alpha: f64) -> String {
    format!("a{alpha}")
}
