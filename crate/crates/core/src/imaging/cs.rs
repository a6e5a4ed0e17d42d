use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::dct::dct_basis;
use super::patches::{check_geometry, patch_positions};
use super::{unvectorize, vectorize};
use crate::error::{Error, Result};
use crate::operator::SensingOperator;
use crate::scalar::{dist_sq, Real};
use crate::solvers::{
    run_with, select_lambda, threshold_soft, Algorithm, IterateTrace, Shrinkage, Shrunk,
    SolverConfig,
};
use crate::synth::{add_noise, gen_sensing_matrix, MatrixKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatchTransform {
    /// Orthonormal 2D DCT-II per patch.
    Dct,
    /// Pixels are their own coefficients.
    Identity,
}

/// Soft thresholding with a global top-`m*` over the coefficients of all patches.
///
/// `w` is the row-major vectorized image. The result is transformed back and
/// re-aggregated, so `θ` lives in the pixel domain while the reported support
/// indexes the concatenated coefficient vector.
#[derive(Clone, Debug)]
pub struct PatchShrinkage<T: Real> {
    height: usize,
    width: usize,
    patch: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    basis: Option<DMatrix<T>>,
    inverse_count: DMatrix<T>,
    m_star: usize,
}

impl<T: Real> PatchShrinkage<T> {
    pub fn new(
        height: usize,
        width: usize,
        patch: usize,
        stride: usize,
        transform: PatchTransform,
        m_star: usize,
    ) -> Result<Self> {
        check_geometry(height, width, patch, stride)?;
        let rows = patch_positions(height, patch, stride);
        let cols = patch_positions(width, patch, stride);
        let mut count = DMatrix::<u32>::zeros(height, width);
        for &r in &rows {
            for &c in &cols {
                count.view_mut((r, c), (patch, patch)).add_scalar_mut(1);
            }
        }
        Ok(Self {
            height,
            width,
            patch,
            basis: (transform == PatchTransform::Dct).then(|| dct_basis(patch)),
            inverse_count: count.map(|c| T::one() / T::lit(c as f64)),
            rows,
            cols,
            m_star,
        })
    }

    pub fn patch_count(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    pub fn coefficient_count(&self) -> usize {
        self.patch_count() * self.patch * self.patch
    }

    /// Concatenated per-patch coefficients of a vectorized image.
    pub fn analyze(&self, w: &DVector<T>) -> DVector<T> {
        let img = unvectorize(w, self.height, self.width);
        let p = self.patch;
        let mut out = Vec::with_capacity(self.coefficient_count());
        for &r in &self.rows {
            for &c in &self.cols {
                let block = img.view((r, c), (p, p));
                let coeffs = match &self.basis {
                    Some(b) => b * block * b.transpose(),
                    None => block.into_owned(),
                };
                for i in 0..p {
                    for j in 0..p {
                        out.push(coeffs[(i, j)]);
                    }
                }
            }
        }
        DVector::from_vec(out)
    }

    /// Inverse transform of each patch followed by overlap averaging.
    pub fn synthesize(&self, coeffs: &DVector<T>) -> DVector<T> {
        let p = self.patch;
        let mut sum = DMatrix::<T>::zeros(self.height, self.width);
        let mut offset = 0;
        for &r in &self.rows {
            for &c in &self.cols {
                let block = DMatrix::from_row_slice(p, p, &coeffs.as_slice()[offset..offset + p * p]);
                offset += p * p;
                let pixels = match &self.basis {
                    Some(b) => b.tr_mul(&block) * b,
                    None => block,
                };
                let mut target = sum.view_mut((r, c), (p, p));
                target += pixels;
            }
        }
        let avg = DMatrix::from_fn(self.height, self.width, |i, j| {
            let inv = self.inverse_count[(i, j)];
            if inv == T::one() {
                sum[(i, j)]
            } else {
                sum[(i, j)] * inv
            }
        });
        vectorize(&avg)
    }
}

impl<T: Real> Shrinkage<T> for PatchShrinkage<T> {
    fn shrink(&self, w: &DVector<T>) -> Shrunk<T> {
        let coeffs = self.analyze(w);
        let lambda = select_lambda(&coeffs, self.m_star);
        let kept = coeffs.map(|v| threshold_soft(v, lambda));
        let support = kept
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, _)| i)
            .collect();
        Shrunk {
            theta: self.synthesize(&kept),
            lambda,
            support,
        }
    }

    fn budget(&self) -> usize {
        self.m_star
    }
}

#[derive(Clone, Debug)]
pub struct ImageCsSpec<T: Real> {
    /// Grayscale pixels in `[0, 255]`.
    pub image: DMatrix<T>,
    /// Fraction of pixels measured, in `(0, 1]`.
    pub measurement_rate: f64,
    pub patch_size: usize,
    pub stride: usize,
    pub transform: PatchTransform,
    pub algorithm: Algorithm,
    pub alpha: T,
    /// Fraction of all patch coefficients kept per iteration.
    pub m_star_fraction: f64,
    pub snr_db: Option<f64>,
    pub seed: u64,
    /// Run AIT with `α / e_max` instead of `α`.
    pub normalize_ait_step: bool,
    pub max_iters: usize,
}

impl<T: Real> ImageCsSpec<T> {
    pub fn new(image: DMatrix<T>, algorithm: Algorithm, seed: u64) -> Self {
        Self {
            image,
            measurement_rate: 0.10,
            patch_size: 8,
            stride: 4,
            transform: PatchTransform::Dct,
            algorithm,
            alpha: T::one(),
            m_star_fraction: 0.10,
            snr_db: None,
            seed,
            normalize_ait_step: true,
            max_iters: 200,
        }
    }

    pub fn measurements(&self) -> usize {
        let (h, w) = self.image.shape();
        ((self.measurement_rate * (h * w) as f64).round() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        let (h, w) = self.image.shape();
        if !(self.measurement_rate > 0.0 && self.measurement_rate <= 1.0) {
            return Err(Error::Domain(format!(
                "measurement rate must lie in (0, 1], got {}",
                self.measurement_rate
            )));
        }
        if !(self.m_star_fraction > 0.0 && self.m_star_fraction <= 1.0) {
            return Err(Error::Domain(format!(
                "m* fraction must lie in (0, 1], got {}",
                self.m_star_fraction
            )));
        }
        check_geometry(h, w, self.patch_size, self.stride)
    }
}

/// Sensing operator, clean image vector and measurements for a spec.
#[derive(Clone, Debug)]
pub struct ImageProblem<T: Real> {
    pub operator: Arc<SensingOperator<T>>,
    pub x_true: DVector<T>,
    pub noise: DVector<T>,
    pub y: DVector<T>,
}

pub fn build_image_problem<T: Real>(spec: &ImageCsSpec<T>) -> Result<ImageProblem<T>> {
    spec.validate()?;
    let (h, w) = spec.image.shape();
    let a = gen_sensing_matrix(spec.measurements(), h * w, MatrixKind::Gaussian, spec.seed)?;
    let operator = Arc::new(SensingOperator::new(a)?);
    let x_true = vectorize(&spec.image);
    let clean = operator.apply(&x_true)?;
    let (y, noise) = match spec.snr_db {
        Some(snr) => add_noise(&clean, snr, spec.seed)?,
        None => {
            let m = clean.len();
            (clean, DVector::zeros(m))
        }
    };
    Ok(ImageProblem {
        operator,
        x_true,
        noise,
        y,
    })
}

#[derive(Clone, Debug)]
pub struct ImageCsResult<T: Real> {
    /// Final `w`, reshaped to the image.
    pub reconstruction: DMatrix<T>,
    /// PSNR of `w_t` per iteration, starting with the zero initialization.
    pub psnr_trace: Vec<f64>,
    /// `‖w_t − x‖²` per iteration.
    pub err_trace: Vec<T>,
    pub m_star: usize,
    pub alpha_used: T,
    pub trace: IterateTrace<T>,
}

impl<T: Real> ImageCsResult<T> {
    pub fn final_psnr(&self) -> f64 {
        *self.psnr_trace.last().expect("trace has the initial record")
    }
}

pub fn run_image_cs<T: Real>(spec: &ImageCsSpec<T>) -> Result<ImageCsResult<T>> {
    let problem = build_image_problem(spec)?;
    let (h, w) = spec.image.shape();
    let mut shrinkage = PatchShrinkage::new(h, w, spec.patch_size, spec.stride, spec.transform, 0)?;
    let m_star =
        ((spec.m_star_fraction * shrinkage.coefficient_count() as f64).round() as usize).max(1);
    shrinkage.m_star = m_star;

    let alpha = if spec.algorithm == Algorithm::Ait && spec.normalize_ait_step {
        spec.alpha / problem.operator.e_max()
    } else {
        spec.alpha
    };
    let config = SolverConfig::new(spec.algorithm, alpha, m_star)
        .with_max_iters(spec.max_iters)
        .tracking_truth()
        .without_iterates();
    let trace = run_with(
        &problem.operator,
        &problem.y,
        Some(&problem.x_true),
        &config,
        &shrinkage,
    )?;
    let pixels = (h * w) as f64;
    let err_trace: Vec<T> = trace.records.iter().filter_map(|r| r.err_w).collect();
    let psnr_trace = err_trace
        .iter()
        .map(|e| psnr_from_mse(e.as_f64() / pixels, 255.0))
        .collect();
    Ok(ImageCsResult {
        reconstruction: unvectorize(&trace.final_w, h, w),
        psnr_trace,
        err_trace,
        m_star,
        alpha_used: alpha,
        trace,
    })
}

fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// `10·log₁₀(peak²/MSE)`; `+∞` for identical images.
pub fn psnr<T: Real>(reference: &DMatrix<T>, candidate: &DMatrix<T>, peak: f64) -> Result<f64> {
    if reference.shape() != candidate.shape() {
        return Err(Error::Dimension(format!(
            "image shapes differ: {:?} vs {:?}",
            reference.shape(),
            candidate.shape()
        )));
    }
    let n = reference.len() as f64;
    let se = dist_sq(
        &DVector::from_column_slice(reference.as_slice()),
        &DVector::from_column_slice(candidate.as_slice()),
    );
    Ok(psnr_from_mse(se.as_f64() / n, peak))
}

/// Deterministic integer-valued test scene: a shaded background with a disk,
/// a bar and a textured square.
pub fn synthetic_image<T: Real>(height: usize, width: usize) -> DMatrix<T> {
    let (hf, wf) = (height as f64, width as f64);
    DMatrix::from_fn(height, width, |i, j| {
        let (y, x) = (i as f64 / hf, j as f64 / wf);
        let mut v = 60.0 + 80.0 * x + 40.0 * y;
        if (x - 0.35).powi(2) + (y - 0.4).powi(2) < 0.04 {
            v = 220.0 - 60.0 * y;
        }
        if (0.65..0.8).contains(&x) && (0.15..0.85).contains(&y) {
            v = 30.0;
        }
        if (0.55..0.9).contains(&y) && (0.1..0.45).contains(&x) {
            v = 140.0 + 40.0 * (12.0 * x).sin() * (9.0 * y).cos();
        }
        T::lit(v.round().clamp(0.0, 255.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::SoftThreshold;

    #[test]
    fn psnr_examples() {
        let a = DMatrix::from_element(4, 4, 10.0f64);
        assert_eq!(psnr(&a, &a, 255.0).unwrap(), f64::INFINITY);
        let b = a.add_scalar(1.0);
        assert!((psnr(&a, &b, 255.0).unwrap() - 20.0 * 255f64.log10()).abs() < 1e-12);
        assert!((20.0 * 255f64.log10() - 48.1308).abs() < 1e-4);
        let c = a.add_scalar(255.0);
        assert!(psnr(&a, &c, 255.0).unwrap().abs() < 1e-12);
        assert!(psnr(&a, &DMatrix::zeros(3, 4), 255.0).is_err());
    }

    #[test]
    fn analysis_synthesis_roundtrip() {
        let img = synthetic_image::<f64>(24, 20);
        let s = PatchShrinkage::new(24, 20, 8, 4, PatchTransform::Dct, 10).unwrap();
        let v = vectorize(&img);
        let back = s.synthesize(&s.analyze(&v));
        assert!((back - v).abs().max() < 1e-10);
        assert_eq!(s.coefficient_count(), 5 * 4 * 64);
    }

    #[test]
    fn budget_holds_in_coefficient_domain() {
        let img = synthetic_image::<f64>(16, 16);
        let s = PatchShrinkage::new(16, 16, 8, 4, PatchTransform::Dct, 30).unwrap();
        let out = s.shrink(&vectorize(&img));
        assert!(out.support.len() <= 30);
        assert!(out.lambda > 0.0);
    }

    #[test]
    fn full_sampling_is_recovered_immediately() {
        let mut spec = ImageCsSpec::new(synthetic_image::<f64>(16, 16), Algorithm::Gap, 3);
        spec.measurement_rate = 1.0;
        spec.max_iters = 5;
        let r = run_image_cs(&spec).unwrap();
        assert!(r.psnr_trace[1..].iter().any(|&p| p > 100.0), "{:?}", r.psnr_trace);
    }

    #[test]
    fn whole_image_identity_patch_matches_vector_solver() {
        let mut spec = ImageCsSpec::new(synthetic_image::<f64>(12, 12), Algorithm::Gap, 5);
        spec.patch_size = 12;
        spec.stride = 12;
        spec.transform = PatchTransform::Identity;
        spec.max_iters = 30;
        spec.measurement_rate = 0.5;
        for algorithm in [Algorithm::Gap, Algorithm::Ait] {
            spec.algorithm = algorithm;
            let r = run_image_cs(&spec).unwrap();
            let p = build_image_problem(&spec).unwrap();
            let cfg = SolverConfig::new(algorithm, r.alpha_used, r.m_star)
                .with_max_iters(30)
                .tracking_truth()
                .without_iterates();
            let plain = run_with(
                &p.operator,
                &p.y,
                Some(&p.x_true),
                &cfg,
                &SoftThreshold { m_star: r.m_star },
            )
            .unwrap();
            assert_eq!(plain.records.len(), r.trace.records.len());
            for (a, b) in plain.records.iter().zip(&r.trace.records) {
                assert_eq!(a.err_w.unwrap().to_bits(), b.err_w.unwrap().to_bits());
                assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
            }
            assert_eq!(plain.final_w, r.trace.final_w);
        }
    }

    #[test]
    fn invalid_specs() {
        let mut spec = ImageCsSpec::new(synthetic_image::<f64>(16, 16), Algorithm::Gap, 0);
        spec.measurement_rate = 0.0;
        assert!(run_image_cs(&spec).is_err());
        spec.measurement_rate = 0.1;
        spec.stride = 9;
        assert!(run_image_cs(&spec).is_err());
    }
}
