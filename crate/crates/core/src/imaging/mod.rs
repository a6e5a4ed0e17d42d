//! Patch-based image compressive sensing.
//!
//! The image is measured as one vector; sparsity is imposed on the 2D DCT
//! coefficients of overlapping patches inside the shrinkage step.

mod cs;
mod dct;
mod patches;
mod pgm;

pub use cs::{
    build_image_problem, psnr, run_image_cs, synthetic_image, ImageCsResult, ImageCsSpec,
    ImageProblem, PatchShrinkage, PatchTransform,
};
pub use dct::{dct2, dct_basis, idct2};
pub use patches::{aggregate_patches, extract_patches, patch_positions, Patch};
pub use pgm::{read_pgm, write_pgm};

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

/// Row-major vectorization.
pub fn vectorize<T: Real>(image: &DMatrix<T>) -> DVector<T> {
    let (h, w) = image.shape();
    DVector::from_fn(h * w, |k, _| image[(k / w, k % w)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize<T: Real>(v: &DVector<T>, height: usize, width: usize) -> DMatrix<T> {
    assert_eq!(v.len(), height * width, "vector length must equal height * width");
    DMatrix::from_fn(height, width, |i, j| v[i * width + j])
}
