//! Sufficient conditions for linear convergence of GAP and AIT, and the
//! rate constants they certify.
//!
//! Every rate has the form `c · q(α)` where `q` is a convex quadratic in the
//! step size and `c` is `2m*+4` in the noiseless case or `4m*+8` with noise.
//! The admissible step-size interval is exactly `{α : c·q(α) < 1}`.
//!
//! | theorem          | rate `γ(α)`                               | α*                 |
//! |------------------|-------------------------------------------|--------------------|
//! | GAP              | `c[1 + (α²−2α)(1−δ)/e_max]`                | `1`                |
//! | AIT, branch a    | `c[1 + α²e_max² − 2α(1−δ)]`                | `(1−δ)/e_max²`     |
//! | AIT, branch b    | `c[1 + α²e_max(1+δ) − 2α(1−δ)]`            | `(1−δ)/(e_max(1+δ))` |

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::ProblemInstance;
use crate::scalar::Real;
use crate::solvers::{Algorithm, SolverConfig};

/// Ratio `e_min / e_max` below which the GAP noise floor is flagged unreliable.
pub const UNRELIABLE_FLOOR_RATIO: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TheoryInputs<T> {
    /// `δ_{m*+K}`.
    pub delta: T,
    pub m_star: usize,
    pub k: usize,
    pub e_max: T,
    pub e_min: T,
    pub alpha: T,
    /// `‖ε‖²`.
    pub noise_norm_sq: T,
}

impl<T: Real> TheoryInputs<T> {
    pub fn new(delta: T, m_star: usize, k: usize, e_max: T, e_min: T, alpha: T) -> Result<Self> {
        if m_star < k {
            return Err(Error::Domain(format!("m* = {m_star} must be at least K = {k}")));
        }
        if m_star == 0 {
            return Err(Error::Domain("m* must be positive".into()));
        }
        Ok(Self {
            delta,
            m_star,
            k,
            e_max,
            e_min,
            alpha,
            noise_norm_sq: T::zero(),
        })
    }

    pub fn with_noise(mut self, noise_norm_sq: T) -> Self {
        self.noise_norm_sq = noise_norm_sq;
        self
    }

    pub fn with_alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    /// `2m*+4` noiseless, `4m*+8` noisy.
    fn scale(&self, noisy: bool) -> T {
        let base = T::from_usize_lossy(2 * self.m_star + 4);
        if noisy {
            base * T::lit(2.0)
        } else {
            base
        }
    }

    fn delta_in_unit_interval(&self) -> bool {
        self.delta > T::zero() && self.delta < T::one()
    }

    fn require_delta(&self) -> Result<()> {
        if self.delta_in_unit_interval() {
            Ok(())
        } else {
            Err(Error::Domain(format!("δ must lie in (0, 1), got {}", self.delta)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    A,
    B,
}

/// Open interval of admissible step sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum StepInterval<T> {
    Open { low: T, high: T },
    Infeasible,
}

impl<T: Real> StepInterval<T> {
    /// Strict membership; there is no tolerance slack.
    pub fn contains(&self, alpha: T) -> bool {
        match *self {
            StepInterval::Open { low, high } => low < alpha && alpha < high,
            StepInterval::Infeasible => false,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, StepInterval::Open { .. })
    }

    fn centered(center: T, radicand: T) -> Self {
        if radicand > T::zero() && center > T::zero() {
            let r = radicand.sqrt();
            StepInterval::Open {
                low: center * (T::one() - r),
                high: center * (T::one() + r),
            }
        } else {
            StepInterval::Infeasible
        }
    }
}

fn require_gap_alpha<T: Real>(inputs: &TheoryInputs<T>) -> Result<()> {
    inputs.require_delta()?;
    if inputs.alpha > T::zero() && inputs.alpha < T::lit(2.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!("α must lie in (0, 2), got {}", inputs.alpha)))
    }
}

fn gap_rate<T: Real>(inputs: &TheoryInputs<T>, noisy: bool) -> T {
    let a = inputs.alpha;
    let q = T::one() + (a * a - T::lit(2.0) * a) * (T::one() - inputs.delta) / inputs.e_max;
    inputs.scale(noisy) * q
}

fn gap_interval<T: Real>(inputs: &TheoryInputs<T>, noisy: bool) -> StepInterval<T> {
    if !inputs.delta_in_unit_interval() || !(inputs.e_max > T::zero()) {
        return StepInterval::Infeasible;
    }
    let c = inputs.scale(noisy);
    let radicand =
        T::one() - inputs.e_max * (c - T::one()) / ((T::one() - inputs.delta) * c);
    StepInterval::centered(T::one(), radicand)
}

/// `γ₁ = (2m*+4)[1 + (α²−2α)(1−δ)/e_max]`. Not clamped; may be `>= 1`.
pub fn gamma_gap_noiseless<T: Real>(inputs: &TheoryInputs<T>) -> Result<T> {
    require_gap_alpha(inputs)?;
    Ok(gap_rate(inputs, false))
}

pub fn alpha_interval_gap_noiseless<T: Real>(inputs: &TheoryInputs<T>) -> StepInterval<T> {
    gap_interval(inputs, false)
}

/// `γ₂ = (4m*+8)[1 + (α²−2α)(1−δ)/e_max]` and the noise floor `2α²‖ε‖²/e_min`.
pub fn gamma_gap_noisy<T: Real>(inputs: &TheoryInputs<T>) -> Result<(T, T)> {
    require_gap_alpha(inputs)?;
    Ok((gap_rate(inputs, true), gap_error_bound(inputs)))
}

pub fn alpha_interval_gap_noisy<T: Real>(inputs: &TheoryInputs<T>) -> StepInterval<T> {
    gap_interval(inputs, true)
}

/// `2α²‖ε‖²/e_min`.
pub fn gap_error_bound<T: Real>(inputs: &TheoryInputs<T>) -> T {
    let a = inputs.alpha;
    if inputs.noise_norm_sq == T::zero() {
        return T::zero();
    }
    T::lit(2.0) * a * a * inputs.noise_norm_sq / inputs.e_min
}

/// `2α²·e_max·‖ε‖²`.
pub fn ait_error_bound<T: Real>(inputs: &TheoryInputs<T>) -> T {
    let a = inputs.alpha;
    T::lit(2.0) * a * a * inputs.e_max * inputs.noise_norm_sq
}

/// Quadratic coefficient of the AIT rate: `e_max²` (branch a) or `e_max(1+δ)` (branch b).
fn ait_curvature<T: Real>(inputs: &TheoryInputs<T>, branch: Branch) -> T {
    match branch {
        Branch::A => inputs.e_max * inputs.e_max,
        Branch::B => inputs.e_max * (T::one() + inputs.delta),
    }
}

/// `γ₃…γ₆`: `c[1 + α²·curv − 2α(1−δ)]`.
pub fn gamma_ait<T: Real>(inputs: &TheoryInputs<T>, branch: Branch, noisy: bool) -> Result<T> {
    inputs.require_delta()?;
    let a = inputs.alpha;
    let q = T::one() + a * a * ait_curvature(inputs, branch)
        - T::lit(2.0) * a * (T::one() - inputs.delta);
    Ok(inputs.scale(noisy) * q)
}

pub fn alpha_interval_ait<T: Real>(
    inputs: &TheoryInputs<T>,
    branch: Branch,
    noisy: bool,
) -> StepInterval<T> {
    if !inputs.delta_in_unit_interval() || !(inputs.e_max > T::zero()) {
        return StepInterval::Infeasible;
    }
    let c = inputs.scale(noisy);
    let one_minus = T::one() - inputs.delta;
    let curv = ait_curvature(inputs, branch);
    let center = one_minus / curv;
    let radicand = T::one() - (c - T::one()) * curv / (c * one_minus * one_minus);
    StepInterval::centered(center, radicand)
}

/// Optimal rate constants and the step sizes that attain them.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OptimalRates<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub gamma3: T,
    pub gamma4: T,
    pub gamma5: T,
    pub gamma6: T,
    pub alpha_gap: T,
    pub alpha_ait_a: T,
    pub alpha_ait_b: T,
}

impl<T: Real> OptimalRates<T> {
    /// `γ₁* < γ₃*, γ₁* < γ₄*, γ₂* < γ₅*, γ₂* < γ₆*`.
    pub fn gap_faster(&self) -> bool {
        self.gamma1 < self.gamma3
            && self.gamma1 < self.gamma4
            && self.gamma2 < self.gamma5
            && self.gamma2 < self.gamma6
    }
}

pub fn optimal_rates<T: Real>(inputs: &TheoryInputs<T>) -> Result<OptimalRates<T>> {
    inputs.require_delta()?;
    if !(inputs.e_max > T::zero()) {
        return Err(Error::Domain(format!("e_max must be positive, got {}", inputs.e_max)));
    }
    let at = |alpha: T| inputs.with_alpha(alpha);
    let alpha_gap = T::one();
    let alpha_ait_a = (T::one() - inputs.delta) / ait_curvature(inputs, Branch::A);
    let alpha_ait_b = (T::one() - inputs.delta) / ait_curvature(inputs, Branch::B);
    Ok(OptimalRates {
        gamma1: gap_rate(&at(alpha_gap), false),
        gamma2: gap_rate(&at(alpha_gap), true),
        gamma3: gamma_ait(&at(alpha_ait_a), Branch::A, false)?,
        gamma4: gamma_ait(&at(alpha_ait_b), Branch::B, false)?,
        gamma5: gamma_ait(&at(alpha_ait_a), Branch::A, true)?,
        gamma6: gamma_ait(&at(alpha_ait_b), Branch::B, true)?,
        alpha_gap,
        alpha_ait_a,
        alpha_ait_b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    GapNoiseless,
    GapNoisy,
    AitNoiselessA,
    AitNoiselessB,
    AitNoisyA,
    AitNoisyB,
}

impl TheoremId {
    pub fn name(self) -> &'static str {
        match self {
            TheoremId::GapNoiseless => "GAP_noiseless",
            TheoremId::GapNoisy => "GAP_noisy",
            TheoremId::AitNoiselessA => "AIT_noiseless_a",
            TheoremId::AitNoiselessB => "AIT_noiseless_b",
            TheoremId::AitNoisyA => "AIT_noisy_a",
            TheoremId::AitNoisyB => "AIT_noisy_b",
        }
    }

    fn noisy(self) -> bool {
        matches!(
            self,
            TheoremId::GapNoisy | TheoremId::AitNoisyA | TheoremId::AitNoisyB
        )
    }
}

/// Where the δ value fed to [`certify`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DeltaSource {
    Exact,
    Supplied,
    /// Maximum over sampled subsets; the true constant may be larger.
    SampledLowerBound,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeltaEstimate<T> {
    pub value: T,
    pub source: DeltaSource,
}

/// A single hypothesis `value < limit`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Condition<T> {
    pub value: T,
    pub limit: T,
    pub holds: bool,
}

impl<T: Real> Condition<T> {
    fn below(value: T, limit: T) -> Self {
        Self {
            value,
            limit,
            holds: value < limit,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoryReport<T> {
    pub theorem: TheoremId,
    pub hypotheses_hold: bool,
    /// `e_max` below its theorem-specific ceiling.
    pub e_max_bound: Condition<T>,
    /// `0 < δ` and `δ` below its theorem-specific ceiling.
    pub delta_bound: Condition<T>,
    pub delta_positive: bool,
    pub alpha_in_interval: bool,
    pub alpha: T,
    pub alpha_interval: StepInterval<T>,
    pub gamma: T,
    pub gamma_star: T,
    pub alpha_star: T,
    pub error_bound: Option<T>,
    pub delta_source: DeltaSource,
    pub notes: Vec<String>,
}

/// Evaluates one theorem's hypotheses and constants.
pub fn evaluate<T: Real>(
    theorem: TheoremId,
    inputs: &TheoryInputs<T>,
    delta_source: DeltaSource,
) -> TheoryReport<T> {
    let noisy = theorem.noisy();
    let c = inputs.scale(noisy);
    let ratio = (c - T::one()) / c;
    let delta = inputs.delta;
    let e = inputs.e_max;
    let mut notes = Vec::new();

    let (e_ceiling, delta_ceiling, interval, gamma, alpha_star, error_bound) = match theorem {
        TheoremId::GapNoiseless | TheoremId::GapNoisy => {
            let gamma = gap_rate(inputs, noisy);
            let bound = noisy.then(|| gap_error_bound(inputs));
            if noisy && inputs.e_min < T::lit(UNRELIABLE_FLOOR_RATIO) * e {
                notes.push("floor unreliable: e_min < 1e-6·e_max".to_string());
            }
            (
                T::one() / ratio,
                T::one() - ratio * e,
                gap_interval(inputs, noisy),
                gamma,
                T::one(),
                bound,
            )
        }
        TheoremId::AitNoiselessA | TheoremId::AitNoisyA => {
            let gamma = ait_raw(inputs, Branch::A, noisy);
            (
                (T::one() / ratio).sqrt(),
                T::one() - e * ratio.sqrt(),
                alpha_interval_ait(inputs, Branch::A, noisy),
                gamma,
                (T::one() - delta) / ait_curvature(inputs, Branch::A),
                noisy.then(|| ait_error_bound(inputs)),
            )
        }
        TheoremId::AitNoiselessB | TheoremId::AitNoisyB => {
            let gamma = ait_raw(inputs, Branch::B, noisy);
            (
                T::one() / ratio,
                T::one() / (c - T::one()),
                alpha_interval_ait(inputs, Branch::B, noisy),
                gamma,
                (T::one() - delta) / ait_curvature(inputs, Branch::B),
                noisy.then(|| ait_error_bound(inputs)),
            )
        }
    };
    let gamma_star = match theorem {
        TheoremId::GapNoiseless | TheoremId::GapNoisy => gap_rate(&inputs.with_alpha(T::one()), noisy),
        TheoremId::AitNoiselessA | TheoremId::AitNoisyA => {
            ait_raw(&inputs.with_alpha(alpha_star), Branch::A, noisy)
        }
        TheoremId::AitNoiselessB | TheoremId::AitNoisyB => {
            ait_raw(&inputs.with_alpha(alpha_star), Branch::B, noisy)
        }
    };

    let e_max_bound = Condition::below(e, e_ceiling);
    let delta_bound = Condition::below(delta, delta_ceiling);
    let delta_positive = delta > T::zero();
    let alpha_in_interval = interval.contains(inputs.alpha);
    if !delta_positive {
        notes.push("δ is not strictly positive".to_string());
    }
    if delta >= T::one() {
        notes.push("δ >= 1: RIP hypothesis void".to_string());
    }
    // Some column subset has its largest eigenvalue at or above 1 − δ, and
    // that eigenvalue is at most e_max; inputs violating this describe no matrix.
    let consistent = e > T::one() - delta;
    if !consistent {
        notes.push("inconsistent inputs: e_max <= 1 − δ".to_string());
    }
    if delta_source == DeltaSource::SampledLowerBound {
        notes.push("δ is a sampled lower bound".to_string());
    }
    let hypotheses_hold = consistent
        && e_max_bound.holds
        && delta_bound.holds
        && delta_positive
        && alpha_in_interval;

    TheoryReport {
        theorem,
        hypotheses_hold,
        e_max_bound,
        delta_bound,
        delta_positive,
        alpha_in_interval,
        alpha: inputs.alpha,
        alpha_interval: interval,
        gamma,
        gamma_star,
        alpha_star,
        error_bound,
        delta_source,
        notes,
    }
}

fn ait_raw<T: Real>(inputs: &TheoryInputs<T>, branch: Branch, noisy: bool) -> T {
    let a = inputs.alpha;
    let q = T::one() + a * a * ait_curvature(inputs, branch)
        - T::lit(2.0) * a * (T::one() - inputs.delta);
    inputs.scale(noisy) * q
}

/// Reports for every theorem that applies to the problem and algorithm.
///
/// Noisy theorems are added when the problem carries nonzero noise.
pub fn certify<T: Real>(
    problem: &ProblemInstance<T>,
    config: &SolverConfig<T>,
    rip_delta: DeltaEstimate<T>,
) -> Vec<TheoryReport<T>> {
    let inputs = TheoryInputs {
        delta: rip_delta.value,
        m_star: config.m_star,
        k: problem.sparsity_k,
        e_max: problem.operator.e_max(),
        e_min: problem.operator.e_min(),
        alpha: config.alpha,
        noise_norm_sq: problem.noise_norm_sq(),
    };
    let noisy = !problem.is_noiseless();
    let theorems: &[TheoremId] = match (config.algorithm, noisy) {
        (Algorithm::Gap, false) => &[TheoremId::GapNoiseless],
        (Algorithm::Gap, true) => &[TheoremId::GapNoiseless, TheoremId::GapNoisy],
        (Algorithm::Ait, false) => &[TheoremId::AitNoiselessA, TheoremId::AitNoiselessB],
        (Algorithm::Ait, true) => &[
            TheoremId::AitNoiselessA,
            TheoremId::AitNoiselessB,
            TheoremId::AitNoisyA,
            TheoremId::AitNoisyB,
        ],
    };
    let mut reports: Vec<_> = theorems
        .iter()
        .map(|&t| evaluate(t, &inputs, rip_delta.source))
        .collect();
    if config.m_star < problem.sparsity_k {
        for r in &mut reports {
            r.hypotheses_hold = false;
            r.notes.push(format!(
                "m* = {} is below K = {}",
                config.m_star, problem.sparsity_k
            ));
        }
    }
    reports
}

fn fmt_interval<T: Real>(i: &StepInterval<T>) -> String {
    match i {
        StepInterval::Open { low, high } => format!("({low:.6}, {high:.6})"),
        StepInterval::Infeasible => "infeasible".to_string(),
    }
}

fn verdict(holds: bool) -> &'static str {
    if holds {
        "ok"
    } else {
        "FAILS"
    }
}

/// Human-readable rendering, one block per theorem.
pub fn render_text<T: Real>(reports: &[TheoryReport<T>]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "[{}]", r.theorem.name());
        let _ = writeln!(
            out,
            "  hypotheses hold : {}",
            if r.hypotheses_hold { "yes" } else { "no" }
        );
        let _ = writeln!(
            out,
            "  e_max bound     : {:.6} < {:.6} ... {}",
            r.e_max_bound.value,
            r.e_max_bound.limit,
            verdict(r.e_max_bound.holds)
        );
        let _ = writeln!(
            out,
            "  delta bound     : 0 < {:.6} < {:.6} ... {} ({:?})",
            r.delta_bound.value,
            r.delta_bound.limit,
            verdict(r.delta_bound.holds && r.delta_positive),
            r.delta_source
        );
        let _ = writeln!(
            out,
            "  alpha           : {:.6} in {} ... {}",
            r.alpha,
            fmt_interval(&r.alpha_interval),
            verdict(r.alpha_in_interval)
        );
        let _ = writeln!(out, "  gamma           : {:.6}", r.gamma);
        let _ = writeln!(out, "  gamma*          : {:.6} at alpha* = {:.6}", r.gamma_star, r.alpha_star);
        if let Some(b) = r.error_bound {
            let _ = writeln!(out, "  error bound     : {b:.6e}");
        }
        for n in &r.notes {
            let _ = writeln!(out, "  note            : {n}");
        }
    }
    out
}

/// One JSON object per line, one line per theorem.
pub fn render_json_lines<T: Real + Serialize>(reports: &[TheoryReport<T>]) -> String {
    reports
        .iter()
        .map(|r| serde_json::to_string(r).expect("report serializes"))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}
