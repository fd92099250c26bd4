//! The core-density recursion `p_{l+1} = λ₀ P(Bin(d-1, p_l) >= 3)^{k-1}`.

use crate::error::{Error, Result};
use crate::group::lambda0;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointTrace {
    pub p: Vec<f64>,
    pub p_inf: f64,
    /// `P(Bin(d, p_∞) >= 3)`.
    pub mu_core: f64,
    /// `1 - (1 - p_∞)^d`.
    pub mu_core_attached: f64,
    pub converged: bool,
}

/// `ln C(n, j)` as a running product; exact enough for small `j`.
fn ln_binomial(n: u64, j: u64) -> f64 {
    (0..j).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `P(Bin(n, p) >= 3)`, summed in log space on the smaller side.
pub fn binomial_tail_ge3(n: u64, p: f64) -> f64 {
    if n < 3 || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_q = (-p).ln_1p();
    let ln_p = p.ln();
    let ln_term = |j: u64| ln_binomial(n, j) + j as f64 * ln_p + (n - j) as f64 * ln_q;
    if (n as f64) * p < 3.0 {
        // terms decrease from j = 3 onward once past the mode
        let ratio = p / (1.0 - p);
        let mut term = ln_term(3).exp();
        let mut sum = 0.0;
        for j in 3..=n {
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
            term *= (n - j) as f64 / (j + 1) as f64 * ratio;
        }
        sum.min(1.0)
    } else {
        let head: f64 = (0..3).map(|j| ln_term(j).exp()).sum();
        (1.0 - head).max(0.0)
    }
}

/// Iterates from `p_0 = λ₀` until successive values differ by less than
/// `tol` or `l_max` steps have been taken.
pub fn core_fixed_point(d: u64, k: usize, tol: f64, l_max: usize) -> Result<FixedPointTrace> {
    if d < 1 {
        return Err(Error::invalid("d must be at least 1"));
    }
    if !(2..=62).contains(&k) {
        return Err(Error::invalid(format!("k must lie in [2, 62], got {k}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let l0 = lambda0(k);
    let mut p = vec![l0];
    let mut converged = false;
    for _ in 0..l_max {
        let cur = *p.last().unwrap();
        let next = l0 * binomial_tail_ge3(d - 1, cur).powi(k as i32 - 1);
        if next > cur {
            return Err(Error::Solver(format!("fixed-point iteration increased: {cur} -> {next}")));
        }
        p.push(next);
        if cur - next < tol {
            converged = true;
            break;
        }
    }
    let p_inf = *p.last().unwrap();
    Ok(FixedPointTrace {
        mu_core: binomial_tail_ge3(d, p_inf),
        mu_core_attached: -(d as f64 * (-p_inf).ln_1p()).exp_m1(),
        p,
        p_inf,
        converged,
    })
}
