//! Binary PGM (P5), 8-bit.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        message: message.into(),
    }
}

/// Reads a P5 image with `maxval <= 255`, returning pixel values in `[0, maxval]`.
pub fn read_pgm<T: Real, R: Read>(mut input: R) -> Result<DMatrix<T>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err("truncated PGM header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if tokens[0] != "P5" {
        return Err(parse_err(format!("expected P5 magic, found `{}`", tokens[0])));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(format!("invalid {what} `{s}`")))
    };
    let width = num(&tokens[1], "width")?;
    let height = num(&tokens[2], "height")?;
    let maxval = num(&tokens[3], "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(parse_err(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let raster = bytes.get(pos..pos + width * height).ok_or_else(|| {
        parse_err(format!("expected {} pixels", width * height))
    })?;
    Ok(DMatrix::from_fn(height, width, |i, j| {
        T::lit(raster[i * width + j] as f64)
    }))
}

/// Writes a P5 image, rounding and clamping values to `[0, 255]`.
pub fn write_pgm<T: Real, W: Write>(image: &DMatrix<T>, mut out: W) -> Result<()> {
    let (h, w) = image.shape();
    write!(out, "P5\n{w} {h}\n255\n")?;
    let mut raster = Vec::with_capacity(h * w);
    for i in 0..h {
        for j in 0..w {
            let v = image[(i, j)].as_f64();
            let v = if v.is_nan() { 0.0 } else { v.round().clamp(0.0, 255.0) };
            raster.push(v as u8);
        }
    }
    out.write_all(&raster)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let img = DMatrix::from_fn(3, 5, |i, j| (i * 40 + j * 7) as f64);
        let mut buf = Vec::new();
        write_pgm(&img, &mut buf).unwrap();
        assert!(buf.starts_with(b"P5\n5 3\n255\n"));
        let back: DMatrix<f64> = read_pgm(buf.as_slice()).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn comments_and_clamping() {
        let mut data = b"P5 # comment\n2 1\n# another\n255\n".to_vec();
        data.extend([0u8, 255]);
        let img: DMatrix<f64> = read_pgm(data.as_slice()).unwrap();
        assert_eq!(img, DMatrix::from_row_slice(1, 2, &[0.0, 255.0]));
        let mut buf = Vec::new();
        write_pgm(&DMatrix::from_row_slice(1, 2, &[-3.0, 300.4]), &mut buf).unwrap();
        assert_eq!(&buf[buf.len() - 2..], &[0u8, 255]);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(read_pgm::<f64, _>(b"P2\n1 1\n255\n0".as_slice()).is_err());
        assert!(read_pgm::<f64, _>(b"P5\n2 2\n255\n\x00".as_slice()).is_err());
        assert!(read_pgm::<f64, _>(b"P5\n2".as_slice()).is_err());
    }
}
