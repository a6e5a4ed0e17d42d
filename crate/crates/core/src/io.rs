//! Matrix, vector and trace serialization.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solvers::IterateTrace;

/// Formats like C's `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    fmt_g(v, 17)
}

/// Formats like C's `%.{precision}g`.
pub fn fmt_g(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_float(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("`{}`: {e}", field.trim()),
    })
}

/// Row-major CSV, one matrix row per line, no header.
pub fn write_matrix_csv<T: Real, W: Write>(a: &DMatrix<T>, mut out: W) -> Result<()> {
    for row in a.row_iter() {
        let line: Vec<String> = row.iter().map(|v| fmt_g17(v.as_f64())).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_matrix_csv<T: Real, R: Read>(input: R) -> Result<DMatrix<T>> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| parse_float(f, i + 1))
            .collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {c} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row.into_iter().map(T::lit));
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse {
        line: 0,
        message: "empty matrix file".into(),
    })?;
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Header `(M: u32 LE, N: u32 LE)` followed by `M·N` little-endian `f64` in row-major order.
pub fn write_matrix_binary<T: Real, W: Write>(a: &DMatrix<T>, mut out: W) -> Result<()> {
    let (m, n) = a.shape();
    let dim = |d: usize| {
        u32::try_from(d).map_err(|_| Error::Dimension(format!("dimension {d} exceeds u32")))
    };
    out.write_all(&dim(m)?.to_le_bytes())?;
    out.write_all(&dim(n)?.to_le_bytes())?;
    for i in 0..m {
        for j in 0..n {
            out.write_all(&a[(i, j)].as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary<T: Real, R: Read>(mut input: R) -> Result<DMatrix<T>> {
    let mut header = [0u8; 8];
    input.read_exact(&mut header).map_err(|_| Error::Parse {
        line: 0,
        message: "truncated header".into(),
    })?;
    let m = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != m * n * 8 {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {} payload bytes for {m}x{n}, found {}", m * n * 8, body.len()),
        });
    }
    let values: Vec<T> = body
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    Ok(DMatrix::from_row_slice(m, n, &values))
}

/// Dispatches on extension: `.csv` is text, anything else binary.
pub fn load_matrix<T: Real>(path: &Path) -> Result<DMatrix<T>> {
    let file = fs::File::open(path)?;
    if is_csv(path) {
        read_matrix_csv(file)
    } else {
        read_matrix_binary(file)
    }
}

pub fn save_matrix<T: Real>(a: &DMatrix<T>, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    if is_csv(path) {
        write_matrix_csv(a, &mut file)?;
    } else {
        write_matrix_binary(a, &mut file)?;
    }
    file.flush()?;
    Ok(())
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Header `index,value`.
pub fn write_vector_csv<T: Real, W: Write>(v: &DVector<T>, mut out: W) -> Result<()> {
    writeln!(out, "index,value")?;
    for (i, x) in v.iter().enumerate() {
        writeln!(out, "{i},{}", fmt_g17(x.as_f64()))?;
    }
    Ok(())
}

/// Columns `iter,err_w,err_theta,lambda,support_size`; missing errors are left blank.
pub fn write_trace_csv<T: Real, W: Write>(trace: &IterateTrace<T>, mut out: W) -> Result<()> {
    writeln!(out, "iter,err_w,err_theta,lambda,support_size")?;
    let opt = |v: Option<T>| v.map(|x| fmt_g17(x.as_f64())).unwrap_or_default();
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iter,
            opt(r.err_w),
            opt(r.err_theta),
            fmt_g17(r.lambda.as_f64()),
            r.support.len()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    #[test]
    fn g17_matches_c_printf() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1e-8), "1e-08");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(1e17), "1e+17");
        assert_eq!(fmt_g17(-2.5e-5), "-2.5000000000000001e-05");
        assert_eq!(fmt_g17(1e16), "10000000000000000");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        assert_eq!(fmt_g17(f64::INFINITY), "inf");
        assert_eq!(fmt_g(0.5, 3), "0.5");
        assert_eq!(fmt_g(99.96, 3), "100");
    }

    proptest! {
        #[test]
        fn g17_roundtrips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let a = dmatrix![0.1, -2.0, 1e-300; 3.5, 1.0 / 3.0, 7.0];
        let mut buf = Vec::new();
        write_matrix_csv(&a, &mut buf).unwrap();
        let b: DMatrix<f64> = read_matrix_csv(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            read_matrix_csv::<f64, _>("1,2\n3\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_matrix_csv::<f64, _>("1,x\n".as_bytes()).is_err());
        assert!(read_matrix_csv::<f64, _>("".as_bytes()).is_err());
    }

    #[test]
    fn binary_layout_and_roundtrip() {
        let a = dmatrix![1.0, 2.0, 3.0; 4.0, 5.0, 6.0];
        let mut buf = Vec::new();
        write_matrix_binary(&a, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 6 * 8);
        assert_eq!(&buf[0..4], &2u32.to_le_bytes());
        assert_eq!(&buf[4..8], &3u32.to_le_bytes());
        assert_eq!(&buf[8..16], &1.0f64.to_le_bytes());
        assert_eq!(&buf[16..24], &2.0f64.to_le_bytes());
        let b: DMatrix<f64> = read_matrix_binary(buf.as_slice()).unwrap();
        assert_eq!(a, b);
        assert!(read_matrix_binary::<f64, _>(&buf[..20]).is_err());
    }
}
