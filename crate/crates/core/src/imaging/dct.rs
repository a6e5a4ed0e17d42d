use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Orthonormal DCT-II matrix `C` with `C[k][n] = s_k cos(π(2n+1)k / 2P)`.
pub fn dct_basis<T: Real>(p: usize) -> DMatrix<T> {
    let pf = p as f64;
    DMatrix::from_fn(p, p, |k, n| {
        let s = if k == 0 { (1.0 / pf).sqrt() } else { (2.0 / pf).sqrt() };
        let angle = std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2.0 * pf);
        T::lit(s * angle.cos())
    })
}

fn square<T: Real>(patch: &DMatrix<T>) -> Result<usize> {
    let (r, c) = patch.shape();
    if r != c || r == 0 {
        return Err(Error::Dimension(format!("patch must be square, got {r}x{c}")));
    }
    Ok(r)
}

/// `C X Cᵀ`.
pub fn dct2<T: Real>(patch: &DMatrix<T>) -> Result<DMatrix<T>> {
    let c = dct_basis(square(patch)?);
    Ok(&c * patch * c.transpose())
}

/// `Cᵀ Y C`.
pub fn idct2<T: Real>(coeffs: &DMatrix<T>) -> Result<DMatrix<T>> {
    let c = dct_basis(square(coeffs)?);
    Ok(c.tr_mul(coeffs) * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_patch_has_only_dc() {
        let x = DMatrix::from_element(8, 8, 3.0f64);
        let y = dct2(&x).unwrap();
        assert!((y[(0, 0)] - 24.0).abs() < 1e-12);
        let ac: f64 = y.iter().skip(1).map(|v| v.abs()).sum();
        assert!(ac < 1e-12);
        assert_eq!(dct2(&DMatrix::<f64>::zeros(8, 8)).unwrap(), DMatrix::zeros(8, 8));
    }

    #[test]
    fn roundtrip_and_parseval() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(8, 8, |_, _| rng.random_range(-1.0..1.0f64));
        let y = dct2(&x).unwrap();
        assert!(((y.norm_squared() - x.norm_squared()) / x.norm_squared()).abs() < 1e-10);
        assert!((idct2(&y).unwrap() - &x).abs().max() < 1e-10);
    }

    #[test]
    fn basis_is_orthonormal() {
        let c = dct_basis::<f64>(5);
        assert!((&c * c.transpose() - DMatrix::identity(5, 5)).abs().max() < 1e-14);
    }

    #[test]
    fn non_square_rejected() {
        assert!(dct2(&DMatrix::<f64>::zeros(2, 3)).is_err());
    }
}
