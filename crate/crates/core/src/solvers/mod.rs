//! GAP and AIT iterations.
//!
//! Both algorithms alternate a linear step
//!
//! ```text
//! GAP: w = θ + α Aᵀ(AAᵀ)⁻¹(y − Aθ)
//! AIT: w = θ + α Aᵀ(y − Aθ)
//! ```
//!
//! with a shrinkage `θ = sign(w)·max(|w| − λ, 0)` whose threshold `λ` is the
//! `(m*+1)`-th largest magnitude of `w`, so `θ` keeps at most `m*` entries.

mod run;
mod step;
mod threshold;

pub use run::{run_solver, run_with, IterateTrace, IterationRecord, StopReason};
pub use step::{ait_step, estimate_noise, gap_step};
pub use threshold::{select_lambda, shrink, Shrinkage, Shrunk, SoftThreshold};
pub(crate) use threshold::soft as threshold_soft;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Error magnitude above which a run is declared diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Algorithm {
    Gap,
    Ait,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gap => "GAP",
            Algorithm::Ait => "AIT",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of a single solver run.
#[derive(Clone, Debug)]
pub struct SolverConfig<T> {
    pub algorithm: Algorithm,
    /// Step size α.
    pub alpha: T,
    /// Support budget m*.
    pub m_star: usize,
    pub max_iters: usize,
    /// Stop once `‖w_{t+1} − w_t‖² < stop_epsilon`.
    pub stop_epsilon: T,
    /// Record `‖w_t − x*‖²` and `‖θ_t − x*‖²` when the truth is available.
    pub track_truth: bool,
    /// Stop once `‖w_t − x*‖²` drops below this value (requires truth).
    pub truth_stop: Option<T>,
    /// Keep full `w_t`, `θ_t` vectors in every record.
    pub keep_iterates: bool,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(algorithm: Algorithm, alpha: T, m_star: usize) -> Self {
        Self {
            algorithm,
            alpha,
            m_star,
            max_iters: 500,
            stop_epsilon: T::lit(1e-14),
            track_truth: false,
            truth_stop: None,
            keep_iterates: true,
        }
    }

    pub fn gap(alpha: T, m_star: usize) -> Self {
        Self::new(Algorithm::Gap, alpha, m_star)
    }

    pub fn ait(alpha: T, m_star: usize) -> Self {
        Self::new(Algorithm::Ait, alpha, m_star)
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_stop_epsilon(mut self, eps: T) -> Self {
        self.stop_epsilon = eps;
        self
    }

    pub fn tracking_truth(mut self) -> Self {
        self.track_truth = true;
        self
    }

    pub fn with_truth_stop(mut self, threshold: T) -> Self {
        self.track_truth = true;
        self.truth_stop = Some(threshold);
        self
    }

    pub fn without_iterates(mut self) -> Self {
        self.keep_iterates = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero()) || !self.alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.m_star == 0 {
            return Err(Error::Domain("m_star must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("max_iters must be at least 1".into()));
        }
        if self.stop_epsilon < T::zero() {
            return Err(Error::Domain("stop_epsilon must be nonnegative".into()));
        }
        Ok(())
    }
}
