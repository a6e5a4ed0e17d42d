use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A patch and the position of its top-left pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch<T: Real> {
    pub row: usize,
    pub col: usize,
    pub data: DMatrix<T>,
}

/// Start offsets `0, s, 2s, …` along an axis, plus a final patch flush with the border.
pub fn patch_positions(len: usize, patch: usize, stride: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=len - patch).step_by(stride).collect();
    if *out.last().unwrap() != len - patch {
        out.push(len - patch);
    }
    out
}

pub(crate) fn check_geometry(h: usize, w: usize, patch: usize, stride: usize) -> Result<()> {
    if patch == 0 || stride == 0 {
        return Err(Error::Domain("patch size and stride must be positive".into()));
    }
    if patch > h.min(w) {
        return Err(Error::Domain(format!(
            "patch size {patch} exceeds image dimension {}",
            h.min(w)
        )));
    }
    if stride > patch {
        return Err(Error::Domain(format!(
            "stride {stride} exceeds patch size {patch}; patches would leave gaps"
        )));
    }
    Ok(())
}

/// Overlapping square patches covering every pixel, in row-major order of positions.
pub fn extract_patches<T: Real>(
    image: &DMatrix<T>,
    patch: usize,
    stride: usize,
) -> Result<Vec<Patch<T>>> {
    let (h, w) = image.shape();
    check_geometry(h, w, patch, stride)?;
    let cols = patch_positions(w, patch, stride);
    let mut out = Vec::new();
    for &row in &patch_positions(h, patch, stride) {
        for &col in &cols {
            out.push(Patch {
                row,
                col,
                data: image.view((row, col), (patch, patch)).into_owned(),
            });
        }
    }
    Ok(out)
}

/// Averages overlapping contributions per pixel.
///
/// Exact inverse of [`extract_patches`] whenever sums of pixel values are
/// exact, e.g. for integer-valued images.
pub fn aggregate_patches<T: Real>(
    patches: &[Patch<T>],
    height: usize,
    width: usize,
) -> Result<DMatrix<T>> {
    let mut sum = DMatrix::<T>::zeros(height, width);
    let mut count = DMatrix::<u32>::zeros(height, width);
    for p in patches {
        let (ph, pw) = p.data.shape();
        if p.row + ph > height || p.col + pw > width {
            return Err(Error::Dimension(format!(
                "patch at ({}, {}) of size {ph}x{pw} exceeds {height}x{width}",
                p.row, p.col
            )));
        }
        for i in 0..ph {
            for j in 0..pw {
                sum[(p.row + i, p.col + j)] += p.data[(i, j)];
                count[(p.row + i, p.col + j)] += 1;
            }
        }
    }
    if count.iter().any(|&c| c == 0) {
        return Err(Error::Domain("patches do not cover the image".into()));
    }
    Ok(DMatrix::from_fn(height, width, |i, j| {
        let c = count[(i, j)];
        if c == 1 {
            sum[(i, j)]
        } else {
            sum[(i, j)] / T::lit(c as f64)
        }
    }))
}
