//! Seeded generators for synthetic compressive-sensing problems.
//!
//! Every draw comes from a ChaCha8 stream keyed by `(seed, stream)`, so the
//! matrix, signal and noise of one experiment are independent yet fully
//! reproducible from the seed alone.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{norm_sq, Real};

pub const STREAM_MATRIX: u64 = 1;
pub const STREAM_SIGNAL: u64 = 2;
pub const STREAM_NOISE: u64 = 3;

/// Independent generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    /// i.i.d. `N(0, 1/M)`.
    Gaussian,
    /// i.i.d. `±1/√M` with equal probability.
    Binary,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Gaussian => "gaussian",
            MatrixKind::Binary => "binary",
        }
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(MatrixKind::Gaussian),
            "binary" => Ok(MatrixKind::Binary),
            other => Err(Error::Domain(format!("unknown matrix kind `{other}`"))),
        }
    }
}

/// `k`-sparse vector of length `n` with standard normal nonzeros at uniform positions.
pub fn gen_sparse_signal<T: Real>(n: usize, k: usize, seed: u64) -> Result<DVector<T>> {
    if k > n {
        return Err(Error::Domain(format!("sparsity {k} exceeds length {n}")));
    }
    let mut rng = stream_rng(seed, STREAM_SIGNAL);
    let mut x = DVector::zeros(n);
    let positions = rand::seq::index::sample(&mut rng, n, k);
    for i in positions {
        // A standard normal draw is exactly zero with probability zero, but keep K exact.
        let mut z: f64 = 0.0;
        while z == 0.0 {
            z = StandardNormal.sample(&mut rng);
        }
        x[i] = T::lit(z);
    }
    Ok(x)
}

pub fn gen_sensing_matrix<T: Real>(
    m: usize,
    n: usize,
    kind: MatrixKind,
    seed: u64,
) -> Result<DMatrix<T>> {
    if m == 0 || m > n {
        return Err(Error::Domain(format!(
            "need 0 < M <= N, got M={m}, N={n}"
        )));
    }
    let mut rng = stream_rng(seed, STREAM_MATRIX);
    let scale = 1.0 / (m as f64).sqrt();
    // Row-major draw order so the matrix does not depend on storage layout.
    let mut values = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        let v = match kind {
            MatrixKind::Gaussian => {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            }
            MatrixKind::Binary => {
                if rng.random::<bool>() {
                    scale
                } else {
                    -scale
                }
            }
        };
        values.push(T::lit(v));
    }
    Ok(DMatrix::from_row_slice(m, n, &values))
}

fn gaussian_vector<T: Real>(len: usize, seed: u64) -> DVector<T> {
    let mut rng = stream_rng(seed, STREAM_NOISE);
    DVector::from_fn(len, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::lit(z)
    })
}

/// Adds Gaussian noise rescaled so that `10·log₁₀(‖clean‖²/‖noise‖²) = snr_db`.
///
/// `snr_db = +∞` yields zero noise.
pub fn add_noise<T: Real>(
    clean: &DVector<T>,
    snr_db: f64,
    seed: u64,
) -> Result<(DVector<T>, DVector<T>)> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("invalid SNR {snr_db}")));
    }
    if snr_db == f64::INFINITY {
        return Ok((clean.clone(), DVector::zeros(clean.len())));
    }
    let signal_power = norm_sq(clean);
    if signal_power == T::zero() {
        return Err(Error::Domain(
            "cannot set a finite SNR on an all-zero signal".into(),
        ));
    }
    let raw = gaussian_vector::<T>(clean.len(), seed);
    let target = signal_power * T::lit(10f64.powf(-snr_db / 10.0));
    let noise = &raw * (target / norm_sq(&raw)).sqrt();
    Ok((clean + &noise, noise))
}

/// Adds i.i.d. `N(0, std²)` noise without rescaling.
pub fn add_noise_std<T: Real>(
    clean: &DVector<T>,
    std: f64,
    seed: u64,
) -> Result<(DVector<T>, DVector<T>)> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(Error::Domain(format!("noise std must be nonnegative, got {std}")));
    }
    let noise = gaussian_vector::<T>(clean.len(), seed) * T::lit(std);
    Ok((clean + &noise, noise))
}

/// Sample standard deviation with the `n − 1` denominator.
pub fn sample_std<T: Real>(v: &DVector<T>) -> T {
    let n = v.len();
    if n < 2 {
        return T::zero();
    }
    let mean = v.sum() / T::from_usize_lossy(n);
    let ss = v.iter().fold(T::zero(), |acc, &x| acc + (x - mean) * (x - mean));
    (ss / T::from_usize_lossy(n - 1)).sqrt()
}
