//! First-moment growth rates and the equitable optimum.

use super::hp::Hp;
use crate::error::{Error, Result};
use crate::numeric::{binomial_u64, compensated_sum, eta};
use astro_float::BigFloat;

/// `f(d,k) = log 2 + (d/k) log(1 - 2^{1-k})` at working precision.
pub fn f_dk_hp(hp: &mut Hp, d: u64, k: usize) -> BigFloat {
    let one = hp.int(1);
    let inner = hp.sub(&one, &hp.pow2(1 - k as i64));
    let log_inner = hp.ln(&inner);
    let ratio = hp.div(&hp.int(d as i64), &hp.int(k as i64));
    let ln2 = hp.ln(&hp.int(2));
    hp.add(&ln2, &hp.mul(&ratio, &log_inner))
}

pub fn f_dk(d: u64, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let mut hp = Hp::default();
    let v = f_dk_hp(&mut hp, d, k);
    Ok(hp.to_f64(&v))
}

/// Natural-log Shannon entropy of a vector of non-negative weights.
pub fn shannon_h(p: &[f64]) -> Result<f64> {
    if p.iter().any(|&x| x < 0.0 || x.is_nan()) {
        return Err(Error::invalid("entropy of a negative or NaN entry"));
    }
    Ok(compensated_sum(p.iter().map(|&x| eta(x))))
}

/// `H(x, 1-x)`.
pub fn h2(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("H2 needs x in [0,1], got {x}")));
    }
    Ok(eta(x) + eta(1.0 - x))
}

/// `H_0(δ, 1-δ) = -δ log δ₀ - (1-δ) log(1-δ₀)`.
pub fn h0(delta: f64, delta0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) || !(0.0..=1.0).contains(&delta0) {
        return Err(Error::invalid("H0 needs arguments in [0,1]"));
    }
    let a = if delta == 0.0 { 0.0 } else { -delta * delta0.ln() };
    let b = if delta == 1.0 { 0.0 } else { -(1.0 - delta) * (-delta0).ln_1p() };
    Ok(a + b)
}

/// Growth rate of the expected number of pairs `(π, χ)` of type `T̄`:
/// `H(T̄) + (1-d)H(p) - (d/k) log k + Σ_ij T_ij log C(k,j)`.
/// `t` has one row of length `k+1` per generator.
pub fn f_type(t: &[Vec<f64>], d: usize, k: usize) -> Result<f64> {
    if t.len() != d {
        return Err(Error::invalid(format!("expected {d} rows, got {}", t.len())));
    }
    let tol = 1e-9;
    let mut p_common = None;
    for (i, row) in t.iter().enumerate() {
        if row.len() != k + 1 {
            return Err(Error::invalid(format!("row {} has length {}, expected {}", i + 1, row.len(), k + 1)));
        }
        if row.iter().any(|&x| x < -tol) {
            return Err(Error::domain(format!("row {} has a negative entry", i + 1)));
        }
        let s = compensated_sum(row.iter().copied());
        if (s - 1.0 / k as f64).abs() > tol {
            return Err(Error::domain(format!("row {} sums to {s}, expected 1/k", i + 1)));
        }
        let p = compensated_sum(row.iter().enumerate().map(|(j, &x)| j as f64 * x));
        match p_common {
            None => p_common = Some(p),
            Some(p0) if (p - p0).abs() > tol => {
                return Err(Error::domain(format!("row {} has p = {p}, row 1 has {p0}", i + 1)));
            }
            _ => {}
        }
    }
    let p = p_common.unwrap_or(0.5).clamp(0.0, 1.0);
    let entropy = compensated_sum(t.iter().flatten().map(|&x| eta(x.max(0.0))));
    let linear = compensated_sum(
        t.iter().flat_map(|row| row.iter().enumerate().map(|(j, &x)| x * (binomial_u64(k as u64, j as u64) as f64).ln())),
    );
    Ok(entropy + (1.0 - d as f64) * h2(p)? - (d as f64 / k as f64) * (k as f64).ln() + linear)
}

/// The equitable optimum `t*_j = C(k,j) / (k(2^k - 2))` for `0 < j < k`.
pub fn t_star(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    let den = k as f64 * (2f64.powi(k as i32) - 2.0);
    Ok((0..=k)
        .map(|j| if j == 0 || j == k { 0.0 } else { binomial_u64(k as u64, j as u64) as f64 / den })
        .collect())
}

fn check_g_args(x: f64, d: usize) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("g needs x in (0,1), got {x}")));
    }
    if d < 2 {
        return Err(Error::invalid("g needs d >= 2"));
    }
    Ok(())
}

/// `g(x) = Σ_{j=1}^{k-1} (kx - j) C(k,j) ((1-x)/x)^{j(1-d)/d}`.
pub fn g_poly(x: f64, d: usize, k: usize) -> Result<f64> {
    check_g_args(x, d)?;
    let y = ((1.0 - x) / x).powf((1.0 - d as f64) / d as f64);
    Ok(compensated_sum((1..k).map(|j| {
        (k as f64 * x - j as f64) * binomial_u64(k as u64, j as u64) as f64 * y.powi(j as i32)
    })))
}

/// The same polynomial as `k[(x(1+y) - y)(1+y)^{k-1} - x + (1-x) y^k]`.
pub fn g_poly_factored(x: f64, d: usize, k: usize) -> Result<f64> {
    check_g_args(x, d)?;
    let y = ((1.0 - x) / x).powf((1.0 - d as f64) / d as f64);
    let k_f = k as f64;
    Ok(k_f * ((x * (1.0 + y) - y) * (1.0 + y).powi(k as i32 - 1) - x + (1.0 - x) * y.powi(k as i32)))
}

/// Numerically maximizes the single-row first-moment exponent
/// `d H(t) + (1-d) H(p(t)) + d Σ t_j log C(k,j)` over bichromatic rows with
/// `Σ t_j = 1/k`, by damped exponentiated-gradient ascent from a skewed start.
pub fn maximize_type(d: usize, k: usize, max_iter: usize, tol: f64) -> Result<Vec<f64>> {
    if k < 2 || d < 1 {
        return Err(Error::invalid("need k >= 2 and d >= 1"));
    }
    let kf = k as f64;
    let df = d as f64;
    let log_binom: Vec<f64> = (0..=k).map(|j| (binomial_u64(k as u64, j as u64) as f64).ln()).collect();
    // skewed start: weight toward small j
    let mut t: Vec<f64> = (0..=k).map(|j| if j == 0 || j == k { 0.0 } else { 1.0 / (j * j) as f64 }).collect();
    normalize(&mut t, kf);
    let step = 0.5 / df;
    for _ in 0..max_iter {
        let p: f64 = t.iter().enumerate().map(|(j, &x)| j as f64 * x).sum();
        let lp = ((1.0 - p) / p).ln();
        let mut next = t.clone();
        for j in 1..k {
            let grad = df * (-t[j].ln() - 1.0 + log_binom[j]) + (1.0 - df) * j as f64 * lp;
            next[j] = t[j] * (step * grad).exp();
        }
        normalize(&mut next, kf);
        let change = next.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        t = next;
        if change < tol {
            return Ok(t);
        }
    }
    Err(Error::Solver(format!("type maximization did not converge in {max_iter} iterations")))
}

fn normalize(t: &mut [f64], k: f64) {
    let s: f64 = t.iter().sum();
    for x in t.iter_mut() {
        *x /= s * k;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        assert!(f_dk(2, 2).unwrap().abs() < 1e-15);
        assert!((f_dk(0, 5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn entropies() {
        assert!((h2(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(shannon_h(&[1.0]).unwrap(), 0.0);
        assert!(shannon_h(&[-0.1, 1.1]).is_err());
        for d in [0.1, 0.3, 0.77] {
            assert!((h0(d, d).unwrap() - h2(d).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn f_type_examples() {
        let v = f_type(&[vec![0.0, 0.5, 0.0]], 1, 2).unwrap();
        assert!((v - 0.5 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!(f_type(&[vec![0.2, 0.5, 0.0]], 1, 2).is_err());
    }

    #[test]
    fn t_star_k3() {
        let t = t_star(3).unwrap();
        for (a, b) in t.iter().zip([0.0, 1.0 / 6.0, 1.0 / 6.0, 0.0]) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn g_examples() {
        assert!(g_poly(0.5, 10, 5).unwrap().abs() < 1e-12);
        assert!(g_poly(0.3, 10, 5).unwrap() < 0.0);
        for x in [0.1, 0.27, 0.4, 0.61, 0.9] {
            let a = g_poly(x, 7, 6).unwrap();
            let b = g_poly_factored(x, 7, 6).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
        assert!(g_poly(0.0, 10, 5).is_err());
    }

    #[test]
    fn maximizer_finds_t_star() {
        let t = maximize_type(8, 4, 100_000, 1e-15).unwrap();
        let s = t_star(4).unwrap();
        for (a, b) in t.iter().zip(&s) {
            assert!((a - b).abs() < 1e-6, "{t:?} vs {s:?}");
        }
    }
}
