//! Restricted isometry constants by exhaustive subset enumeration.
//!
//! `δ_s` is the largest deviation from 1 of any eigenvalue of `A_SᵀA_S` over
//! all `s`-column subsets `S`. Computing it is combinatorial, so this is only
//! meant for desk-scale matrices; [`rip_lower_bound_sampled`] gives a labeled
//! lower bound for anything larger.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::SensingOperator;
use crate::scalar::Real;

/// Maximum number of column subsets [`rip_constant_exact`] will enumerate.
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

/// Tolerance on `UUᵀ = I` and on `δ(UA) = δ(A)` for [`rip_invariance_check`].
pub const INVARIANCE_TOLERANCE: f64 = 1e-10;

/// Relative tolerance for [`shared_spectrum_check`].
pub const SPECTRUM_TOLERANCE: f64 = 1e-8;

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exact `δ_s` of the operator's matrix, with the default enumeration cap.
pub fn rip_constant_exact<T: Real>(op: &SensingOperator<T>, s: usize) -> Result<T> {
    rip_constant_of_matrix(op.entries(), s, DEFAULT_SUBSET_CAP)
}

/// Exact `δ_s` of an arbitrary matrix.
///
/// The value may be `>= 1`; that means the RIP hypothesis fails and is not an
/// error here.
pub fn rip_constant_of_matrix<T: Real>(a: &DMatrix<T>, s: usize, cap: u128) -> Result<T> {
    let n = a.ncols();
    if s == 0 || s > n {
        return Err(Error::Domain(format!(
            "subset size must be in 1..={n}, got {s}"
        )));
    }
    let subsets = binomial(n, s);
    if subsets > cap {
        return Err(Error::TooManySubsets { subsets, cap });
    }
    let full = a.tr_mul(a);
    let mut idx: Vec<usize> = (0..s).collect();
    let mut worst = T::zero();
    loop {
        worst = worst.max(subset_deviation(&full, &idx));
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    Ok(worst)
}

/// Lower bound on `δ_s` from `samples` uniformly drawn subsets.
pub fn rip_lower_bound_sampled<T: Real, R: Rng + ?Sized>(
    a: &DMatrix<T>,
    s: usize,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    let n = a.ncols();
    if s == 0 || s > n {
        return Err(Error::Domain(format!(
            "subset size must be in 1..={n}, got {s}"
        )));
    }
    let mut worst = T::zero();
    for _ in 0..samples {
        let mut idx = rand::seq::index::sample(rng, n, s).into_vec();
        idx.sort_unstable();
        let cols = a.select_columns(idx.iter());
        let sub = cols.tr_mul(&cols);
        worst = worst.max(deviation_of(sub));
    }
    Ok(worst)
}

fn subset_deviation<T: Real>(full: &DMatrix<T>, idx: &[usize]) -> T {
    let s = idx.len();
    if s == 1 {
        return (full[(idx[0], idx[0])] - T::one()).abs();
    }
    let sub = DMatrix::from_fn(s, s, |i, j| full[(idx[i], idx[j])]);
    deviation_of(sub)
}

fn deviation_of<T: Real>(sub: DMatrix<T>) -> T {
    let eig = SymmetricEigen::new(sub).eigenvalues;
    let mut lo = eig[0];
    let mut hi = eig[0];
    for &e in eig.iter() {
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (T::one() - lo).max(hi - T::one())
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Checks that left-multiplying by an orthonormal `U` leaves `δ_s` unchanged.
pub fn rip_invariance_check<T: Real>(
    op: &SensingOperator<T>,
    orthonormal_u: &DMatrix<T>,
    s: usize,
) -> Result<bool> {
    let m = op.rows();
    if orthonormal_u.shape() != (m, m) {
        return Err(Error::Dimension(format!(
            "U must be {m}x{m}, got {}x{}",
            orthonormal_u.nrows(),
            orthonormal_u.ncols()
        )));
    }
    let uut = orthonormal_u * orthonormal_u.transpose();
    let deviation = (uut - DMatrix::identity(m, m)).abs().max();
    if deviation > T::lit(INVARIANCE_TOLERANCE) {
        return Err(Error::NotOrthonormal {
            deviation: deviation.as_f64(),
        });
    }
    let rotated = orthonormal_u * op.entries();
    let before = rip_constant_of_matrix(op.entries(), s, DEFAULT_SUBSET_CAP)?;
    let after = rip_constant_of_matrix(&rotated, s, DEFAULT_SUBSET_CAP)?;
    Ok((before - after).abs() <= T::lit(INVARIANCE_TOLERANCE))
}

/// Checks that `AAᵀ` and `AᵀA` have the same nonzero eigenvalues.
pub fn shared_spectrum_check<T: Real>(op: &SensingOperator<T>) -> bool {
    let a = op.entries();
    let mut left: Vec<T> = op.gram_eigenvalues().iter().copied().collect();
    let mut right: Vec<T> = SymmetricEigen::new(a.tr_mul(a))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    let scale = left
        .iter()
        .chain(right.iter())
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    let floor = scale * T::lit(1e-10);
    left.retain(|v| v.abs() > floor);
    right.retain(|v| v.abs() > floor);
    if left.len() != right.len() {
        return false;
    }
    let by_value = |a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    left.sort_by(by_value);
    right.sort_by(by_value);
    left.iter().zip(&right).all(|(&l, &r)| {
        (l - r).abs() <= T::lit(SPECTRUM_TOLERANCE) * l.abs().max(r.abs())
    })
}
