use nalgebra::DVector;

use crate::scalar::Real;

/// The `(m_star+1)`-th largest magnitude of `w`.
///
/// Returns zero when `w` has at most `m_star` nonzero entries (which covers
/// `m_star >= N`).
pub fn select_lambda<T: Real>(w: &DVector<T>, m_star: usize) -> T {
    if m_star >= w.len() {
        return T::zero();
    }
    let mut mags: Vec<T> = w.iter().map(|v| v.abs()).collect();
    let (_, nth, _) = mags.select_nth_unstable_by(m_star, |a, b| {
        b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal)
    });
    *nth
}

/// Soft thresholding `sign(w)·max(|w| − λ, 0)`.
///
/// Entries at or below the threshold become `+0`.
pub fn shrink<T: Real>(w: &DVector<T>, lambda: T) -> DVector<T> {
    w.map(|v| soft(v, lambda))
}

#[inline]
pub(crate) fn soft<T: Real>(v: T, lambda: T) -> T {
    let mag = v.abs();
    if mag <= lambda {
        T::zero()
    } else if v > T::zero() {
        mag - lambda
    } else {
        -(mag - lambda)
    }
}

/// Output of a shrinkage step.
#[derive(Clone, Debug)]
pub struct Shrunk<T: Real> {
    pub theta: DVector<T>,
    pub lambda: T,
    /// Nonzero indices in the domain where thresholding happened.
    pub support: Vec<usize>,
}

/// The sparsifying half of an iteration.
pub trait Shrinkage<T: Real> {
    fn shrink(&self, w: &DVector<T>) -> Shrunk<T>;

    /// Support budget, used for reporting.
    fn budget(&self) -> usize;
}

/// Adaptive soft thresholding directly on the signal entries.
#[derive(Clone, Copy, Debug)]
pub struct SoftThreshold {
    pub m_star: usize,
}

impl<T: Real> Shrinkage<T> for SoftThreshold {
    fn shrink(&self, w: &DVector<T>) -> Shrunk<T> {
        let lambda = select_lambda(w, self.m_star);
        let theta = shrink(w, lambda);
        let support = theta
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != T::zero())
            .map(|(i, _)| i)
            .collect();
        Shrunk {
            theta,
            lambda,
            support,
        }
    }

    fn budget(&self) -> usize {
        self.m_star
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(select_lambda(&v(&[3.0, -2.0, 1.0, 0.0]), 2), 1.0);
        assert_eq!(select_lambda(&v(&[5.0, 0.0, 0.0, 0.0]), 2), 0.0);
        assert_eq!(select_lambda(&v(&[-4.0, 4.0, 2.0, 2.0, 1.0]), 3), 2.0);
        assert_eq!(select_lambda(&v(&[1.0, 2.0]), 2), 0.0);
        assert_eq!(select_lambda(&v(&[1.0, 2.0]), 7), 0.0);
    }

    #[test]
    fn shrink_examples() {
        assert_eq!(shrink(&v(&[3.0, -2.0, 1.0]), 1.0), v(&[2.0, -1.0, 0.0]));
        let w = v(&[0.3, -7.0, 0.0, 2.5]);
        assert_eq!(shrink(&w, 0.0), w);
        assert_eq!(shrink(&v(&[0.0, 0.0]), 5.0), v(&[0.0, 0.0]));
    }

    #[test]
    fn shrink_never_yields_negative_zero() {
        let out = shrink(&v(&[-1.0, -0.5]), 1.0);
        assert!(out.iter().all(|x| x.to_bits() == 0));
    }

    #[test]
    fn ties_at_the_cut_stay_within_budget() {
        let w = v(&[-4.0, 4.0, 2.0, 2.0, 1.0]);
        let s = Shrinkage::<f64>::shrink(&SoftThreshold { m_star: 3 }, &w);
        assert_eq!(s.support, vec![0, 1]);
        assert_eq!(s.theta, v(&[-2.0, 2.0, 0.0, 0.0, 0.0]));
    }

    proptest! {
        #[test]
        fn support_within_budget_and_threshold_dominated(
            xs in prop::collection::vec(-10.0f64..10.0, 1..60),
            m in 1usize..70,
        ) {
            let w = DVector::from_vec(xs);
            let s = Shrinkage::<f64>::shrink(&SoftThreshold { m_star: m }, &w);
            prop_assert!(s.support.len() <= m);
            for &i in &s.support {
                prop_assert!(s.lambda <= w[i].abs());
            }
            let nonzero = w.iter().filter(|x| **x != 0.0).count();
            if nonzero <= m {
                prop_assert_eq!(s.lambda, 0.0);
            }
        }

        #[test]
        fn shrink_is_soft_threshold(x in -50.0f64..50.0, lam in 0.0f64..20.0) {
            let got = shrink(&v(&[x]), lam)[0];
            let expect = if x == 0.0 { 0.0 } else { x * (1.0 - lam / x.abs()).max(0.0) };
            prop_assert!((got - expect).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }
}
