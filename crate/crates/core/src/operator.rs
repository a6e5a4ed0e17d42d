//! The sensing operator `A` and the problem bundle `(A, x*, ε, y)`.
//!
//! Both GAP iterations and the theory checks need `AAᵀ` in two forms: a
//! factorization to apply `(AAᵀ)⁻¹` once per iteration, and its extreme
//! eigenvalues. Both are computed once at construction.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{dim_check, Error, Result};
use crate::scalar::Real;

/// Relative singularity tolerance used by [`SensingOperator::new`], scaled by `e_max`.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Measurement matrix with a precomputed Cholesky factor of `AAᵀ`.
#[derive(Clone, Debug)]
pub struct SensingOperator<T: Real> {
    entries: DMatrix<T>,
    gram: DMatrix<T>,
    gram_factor: Cholesky<T, Dyn>,
    gram_eigenvalues: DVector<T>,
    e_max: T,
    e_min: T,
}

impl<T: Real> SensingOperator<T> {
    /// Builds the operator with the default relative tolerance `1e-12 · e_max`.
    pub fn new(entries: DMatrix<T>) -> Result<Self> {
        Self::build(entries, None)
    }

    /// Builds the operator, rejecting Grams whose smallest eigenvalue is below `tolerance`.
    pub fn with_tolerance(entries: DMatrix<T>, tolerance: T) -> Result<Self> {
        if !(tolerance > T::zero()) {
            return Err(Error::Domain(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        Self::build(entries, Some(tolerance))
    }

    fn build(entries: DMatrix<T>, tolerance: Option<T>) -> Result<Self> {
        let (m, n) = entries.shape();
        if m == 0 || n == 0 {
            return Err(Error::Dimension(format!("empty sensing matrix {m}x{n}")));
        }
        if m > n {
            return Err(Error::Dimension(format!(
                "sensing matrix must have M <= N, got {m}x{n}"
            )));
        }
        let gram = &entries * entries.transpose();
        let mut eigenvalues = SymmetricEigen::new(gram.clone()).eigenvalues;
        eigenvalues
            .as_mut_slice()
            .sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let e_min = eigenvalues[0];
        let e_max = eigenvalues[m - 1];
        let tolerance =
            tolerance.unwrap_or_else(|| T::lit(DEFAULT_RELATIVE_TOLERANCE) * e_max.abs());
        // NaN entries fall through here too.
        if !(e_min >= tolerance) || !(e_max > T::zero()) {
            return Err(Error::SingularGram {
                min_eigenvalue: e_min.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        let gram_factor = Cholesky::new(gram.clone()).ok_or(Error::SingularGram {
            min_eigenvalue: e_min.as_f64(),
            tolerance: tolerance.as_f64(),
        })?;
        Ok(Self {
            entries,
            gram,
            gram_factor,
            gram_eigenvalues: eigenvalues,
            e_max,
            e_min,
        })
    }

    /// Number of measurements `M`.
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// Signal length `N`.
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<T> {
        &self.entries
    }

    /// `AAᵀ`, `M × M`.
    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// Eigenvalues of `AAᵀ` in ascending order.
    pub fn gram_eigenvalues(&self) -> &DVector<T> {
        &self.gram_eigenvalues
    }

    pub fn e_max(&self) -> T {
        self.e_max
    }

    pub fn e_min(&self) -> T {
        self.e_min
    }

    /// `A x`.
    pub fn apply(&self, x: &DVector<T>) -> Result<DVector<T>> {
        dim_check("A·x", self.cols(), x.len())?;
        Ok(&self.entries * x)
    }

    /// `Aᵀ v`.
    pub fn apply_adjoint(&self, v: &DVector<T>) -> Result<DVector<T>> {
        dim_check("Aᵀ·v", self.rows(), v.len())?;
        Ok(self.entries.tr_mul(v))
    }

    /// Solves `(AAᵀ) u = v` with the stored factorization.
    pub fn apply_gram_inverse(&self, v: &DVector<T>) -> Result<DVector<T>> {
        dim_check("(AAᵀ)⁻¹·v", self.rows(), v.len())?;
        Ok(self.gram_factor.solve(v))
    }

    /// `Aᵀ (AAᵀ)⁻¹ v`, the minimum-norm preimage of `v`.
    pub fn apply_pseudo_inverse(&self, v: &DVector<T>) -> Result<DVector<T>> {
        let u = self.apply_gram_inverse(v)?;
        Ok(self.entries.tr_mul(&u))
    }

    /// True when `AAᵀ = I` within `tol` entrywise.
    pub fn has_identity_gram(&self, tol: T) -> bool {
        let m = self.rows();
        (0..m).all(|i| {
            (0..m).all(|j| {
                let target = if i == j { T::one() } else { T::zero() };
                (self.gram[(i, j)] - target).abs() <= tol
            })
        })
    }
}

/// Measurements `y = A x* + ε` of a `K`-sparse ground truth.
#[derive(Clone, Debug)]
pub struct ProblemInstance<T: Real> {
    pub operator: Arc<SensingOperator<T>>,
    pub x_true: DVector<T>,
    pub noise: DVector<T>,
    pub y: DVector<T>,
    pub sparsity_k: usize,
}

impl<T: Real> ProblemInstance<T> {
    pub fn new(
        operator: Arc<SensingOperator<T>>,
        x_true: DVector<T>,
        noise: DVector<T>,
    ) -> Result<Self> {
        let clean = operator.apply(&x_true)?;
        dim_check("noise", operator.rows(), noise.len())?;
        let y = clean + &noise;
        let sparsity_k = x_true.iter().filter(|v| **v != T::zero()).count();
        Ok(Self {
            operator,
            x_true,
            noise,
            y,
            sparsity_k,
        })
    }

    pub fn noiseless(operator: Arc<SensingOperator<T>>, x_true: DVector<T>) -> Result<Self> {
        let m = operator.rows();
        Self::new(operator, x_true, DVector::zeros(m))
    }

    /// `‖ε‖²`.
    pub fn noise_norm_sq(&self) -> T {
        crate::scalar::norm_sq(&self.noise)
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise.iter().all(|v| *v == T::zero())
    }
}
