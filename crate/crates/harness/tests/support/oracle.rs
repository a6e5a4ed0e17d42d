//! Independent reference computations for the acceptance suite.

use nalgebra::DMatrix;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

fn visit(a: &DMatrix<f64>, s: usize, start: usize, chosen: &mut Vec<usize>, worst: &mut f64) {
    if chosen.len() == s {
        let sub = a.select_columns(chosen.iter());
        for e in jacobi_eigenvalues(&(sub.transpose() * &sub)) {
            *worst = worst.max((e - 1.0).abs());
        }
        return;
    }
    for j in start..a.ncols() {
        chosen.push(j);
        visit(a, s, j + 1, chosen, worst);
        chosen.pop();
    }
}

/// `max |λ(A_Sᵀ A_S) − 1|` over all column subsets of size `s`.
pub fn rip_brute_force(a: &DMatrix<f64>, s: usize) -> f64 {
    let mut worst = 0.0;
    visit(a, s, 0, &mut Vec::new(), &mut worst);
    worst
}

/// Optimal GAP rate at `α = 1` for scale `c`.
pub fn gap_rate_at_one(c: f64, delta: f64, e_max: f64) -> f64 {
    c * (1.0 - (1.0 - delta) / e_max)
}

/// Optimal AIT rate for curvature `q` (minimum of the quadratic in `α`).
pub fn ait_rate_optimal(c: f64, delta: f64, q: f64) -> f64 {
    c * (1.0 - (1.0 - delta) * (1.0 - delta) / q)
}
