//! Second-moment exponents: the `δ ↔ δ₀` map, `ψ`, `ψ₀`, the optimal pair
//! type `t_δ`, and the scan of `ψ₀` over distances.

use super::first::f_dk_hp;
use super::hp::Hp;
use crate::error::{Error, Result};
use crate::hypergraph::{admissible_pair_types, PairTypeMatrix};
use crate::numeric::{binomial_u64, compensated_sum};
use astro_float::BigFloat;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

fn check_unit(x: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("{what} must lie in [0,1], got {x}")));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    Ok(())
}

/// Numerator and denominator of the forward map, and their derivatives.
fn forward_parts(hp: &Hp, x: &BigFloat, k: usize) -> [BigFloat; 4] {
    let one = hp.int(1);
    let a = hp.sub(&one, &hp.pow2(2 - k as i64));
    let half = hp.num(0.5);
    let xh = hp.mul(x, &half);
    let yh = hp.mul(&hp.sub(&one, x), &half);
    let xh_km1 = hp.powi(&xh, k - 1);
    let yh_km1 = hp.powi(&yh, k - 1);
    let xh_k = hp.mul(&xh_km1, &xh);
    let yh_k = hp.mul(&yh_km1, &yh);
    let two = hp.int(2);
    let kk = hp.int(k as i64);
    let num = hp.mul(x, &hp.add(&a, &xh_km1));
    let den = hp.add(&hp.add(&a, &hp.mul(&two, &xh_k)), &hp.mul(&two, &yh_k));
    let dnum = hp.add(&a, &hp.mul(&kk, &xh_km1));
    let dden = hp.mul(&kk, &hp.sub(&xh_km1, &yh_km1));
    [num, den, dnum, dden]
}

/// `δ(δ₀)` at working precision.
pub fn delta_of_delta0_hp(hp: &Hp, delta0: &BigFloat, k: usize) -> BigFloat {
    let [num, den, _, _] = forward_parts(hp, delta0, k);
    hp.div(&num, &den)
}

pub fn delta_of_delta0(delta0: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_unit(delta0, "δ₀")?;
    let hp = Hp::default();
    Ok(hp.to_f64(&delta_of_delta0_hp(&hp, &hp.num(delta0), k)))
}

fn monotone_cache() -> &'static Mutex<HashMap<usize, bool>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, bool>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Checks on a 10⁴-point grid that the forward map is strictly increasing,
/// which is what makes `δ₀` well defined. Cached per `k`.
pub fn forward_map_is_monotone(k: usize) -> bool {
    if let Some(&m) = monotone_cache().lock().unwrap().get(&k) {
        return m;
    }
    let a = 1.0 - 2f64.powi(2 - k as i32);
    let f = |x: f64| {
        let num = x * (a + (x / 2.0).powi(k as i32 - 1));
        let den = a + 2.0 * (x / 2.0).powi(k as i32) + 2.0 * ((1.0 - x) / 2.0).powi(k as i32);
        num / den
    };
    const POINTS: usize = 10_000;
    let mut prev = f(0.0);
    let mut ok = true;
    for i in 1..=POINTS {
        let cur = f(i as f64 / POINTS as f64);
        if cur <= prev {
            ok = false;
            break;
        }
        prev = cur;
    }
    monotone_cache().lock().unwrap().insert(k, ok);
    ok
}

/// Maximum Newton/bisection iterations for the inverse map.
pub const MAX_SOLVER_ITERATIONS: usize = 200;

/// Solves `δ(δ₀) = δ` for `δ₀ ∈ [0,1]`: Newton from `δ₀ = δ`, falling back
/// to bisection whenever a step leaves the current bracket.
pub fn delta0_of_delta_hp(hp: &Hp, delta: &BigFloat, k: usize) -> Result<BigFloat> {
    if !forward_map_is_monotone(k) {
        return Err(Error::Solver(format!("δ₀ map is not monotone on [0,1] for k = {k}")));
    }
    let zero = hp.int(0);
    let one = hp.int(1);
    if delta.cmp(&zero).is_none_or(|c| c <= 0) {
        return Ok(zero);
    }
    if delta.cmp(&one).is_none_or(|c| c >= 0) {
        return Ok(one);
    }
    let mut lo = zero;
    let mut hi = one;
    let mut x = delta.clone();
    let tiny = hp.pow2(8 - hp.precision() as i64);
    for _ in 0..MAX_SOLVER_ITERATIONS {
        let [num, den, dnum, dden] = forward_parts(hp, &x, k);
        let fx = hp.sub(&hp.div(&num, &den), delta);
        if fx.is_zero() {
            return Ok(x);
        }
        if fx.is_positive() {
            hi = x.clone();
        } else {
            lo = x.clone();
        }
        let deriv = hp.div(
            &hp.sub(&hp.mul(&dnum, &den), &hp.mul(&num, &dden)),
            &hp.mul(&den, &den),
        );
        let mut next = hp.sub(&x, &hp.div(&fx, &deriv));
        let inside = next.cmp(&lo).is_some_and(|c| c > 0) && next.cmp(&hi).is_some_and(|c| c < 0);
        if !inside || deriv.is_zero() {
            next = hp.mul(&hp.add(&lo, &hi), &hp.num(0.5));
        }
        let step = hp.sub(&next, &x).abs();
        x = next;
        if step.cmp(&tiny).is_some_and(|c| c <= 0) {
            return Ok(x);
        }
    }
    Err(Error::Solver(format!(
        "δ₀ solve did not converge in {MAX_SOLVER_ITERATIONS} iterations"
    )))
}

pub fn delta0_of_delta(delta: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_unit(delta, "δ")?;
    let hp = Hp::default();
    let x = delta0_of_delta_hp(&hp, &hp.num(delta), k)?;
    Ok(hp.to_f64(&x))
}

/// `log(1 - (1 - x^k - (1-x)^k) / (2^{k-1} - 1))`.
fn log_pair_term(hp: &mut Hp, x: &BigFloat, k: usize) -> BigFloat {
    let one = hp.int(1);
    let y = hp.sub(&one, x);
    let inner = hp.sub(&hp.sub(&one, &hp.powi(x, k)), &hp.powi(&y, k));
    let den = hp.sub(&hp.pow2(k as i64 - 1), &one);
    let arg = hp.sub(&one, &hp.div(&inner, &den));
    hp.ln(&arg)
}

/// `ψ(x) = H(x) + (d/k) log(1 - (1 - x^k - (1-x)^k)/(2^{k-1} - 1))`.
pub fn psi_hp(hp: &mut Hp, x: &BigFloat, d: u64, k: usize) -> BigFloat {
    let h = hp.h2(x);
    let l = log_pair_term(hp, x, k);
    let r = hp.div(&hp.int(d as i64), &hp.int(k as i64));
    hp.add(&h, &hp.mul(&r, &l))
}

pub fn psi(x: f64, d: u64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_unit(x, "x")?;
    let mut hp = Hp::default();
    let x = hp.num(x);
    let v = psi_hp(&mut hp, &x, d, k);
    Ok(hp.to_f64(&v))
}

/// `H_0(δ) = -δ log δ₀ - (1-δ) log(1-δ₀)` with `0 log 0 = 0`.
fn h0_hp(hp: &mut Hp, delta: &BigFloat, delta0: &BigFloat) -> BigFloat {
    let one = hp.int(1);
    let a = if delta.is_zero() {
        hp.int(0)
    } else {
        let l = hp.ln(delta0);
        hp.mul(delta, &l)
    };
    let rest = hp.sub(&one, delta);
    let b = if rest.is_zero() {
        hp.int(0)
    } else {
        let y = hp.sub(&one, delta0);
        let l = hp.ln(&y);
        hp.mul(&rest, &l)
    };
    hp.add(&a, &b).neg()
}

/// `ψ₀` evaluated both ways, with the ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Psi0Value {
    pub delta: f64,
    pub delta0: f64,
    /// Closed form `(1-d)H(δ) + d H_0(δ) + (d/k) log(...)`.
    pub psi0: f64,
    /// `ψ(δ₀) - (H(δ₀) - H_0(δ)) + (d-1)(H_0(δ) - H(δ))`.
    pub psi0_alternate: f64,
    /// Difference of the two routes, taken at working precision.
    pub route_gap: f64,
    /// `ψ(δ)`.
    pub psi: f64,
}

pub(crate) struct Psi0Hp {
    pub delta0: BigFloat,
    pub closed: BigFloat,
    pub alternate: BigFloat,
}

pub(crate) fn psi0_parts(hp: &mut Hp, delta: &BigFloat, d: u64, k: usize) -> Result<Psi0Hp> {
    let delta0 = delta0_of_delta_hp(hp, delta, k)?;
    let one = hp.int(1);
    let dd = hp.int(d as i64);
    let h = hp.h2(delta);
    let h0 = h0_hp(hp, delta, &delta0);
    let l = log_pair_term(hp, &delta0, k);
    let r = hp.div(&dd, &hp.int(k as i64));
    let closed = hp.add(
        &hp.add(&hp.mul(&hp.sub(&one, &dd), &h), &hp.mul(&dd, &h0)),
        &hp.mul(&r, &l),
    );
    let psi_d0 = psi_hp(hp, &delta0, d, k);
    let h_d0 = hp.h2(&delta0);
    let alternate = hp.add(
        &hp.sub(&psi_d0, &hp.sub(&h_d0, &h0)),
        &hp.mul(&hp.sub(&dd, &one), &hp.sub(&h0, &h)),
    );
    Ok(Psi0Hp { delta0, closed, alternate })
}

pub fn psi0_value(delta: f64, d: u64, k: usize) -> Result<Psi0Value> {
    check_k(k)?;
    check_unit(delta, "δ")?;
    let mut hp = Hp::default();
    psi0_value_with(&mut hp, delta, d, k)
}

fn psi0_value_with(hp: &mut Hp, delta: f64, d: u64, k: usize) -> Result<Psi0Value> {
    let x = hp.num(delta);
    let parts = psi0_parts(hp, &x, d, k)?;
    let gap = hp.sub(&parts.closed, &parts.alternate);
    let psi = psi_hp(hp, &x, d, k);
    Ok(Psi0Value {
        delta,
        delta0: hp.to_f64(&parts.delta0),
        psi0: hp.to_f64(&parts.closed),
        psi0_alternate: hp.to_f64(&parts.alternate),
        route_gap: hp.to_f64(&gap),
        psi: hp.to_f64(&psi),
    })
}

/// `ψ₀(δ)` by the closed form.
pub fn psi0(delta: f64, d: u64, k: usize) -> Result<f64> {
    Ok(psi0_value(delta, d, k)?.psi0)
}

/// The maximizer of the pair-type exponent on `𝒯(δ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTypeOptimum {
    pub delta: f64,
    pub delta0: f64,
    pub c: f64,
    pub t_delta: Vec<(PairTypeMatrix, f64)>,
}

/// Constraint residuals of a pair-type map: `Σt - 1/k`, the two color
/// marginals minus 1/2, and `p_01 - δ/2`.
pub fn pair_type_residuals(t: &[(PairTypeMatrix, f64)], k: usize, delta: f64) -> [f64; 4] {
    let sum = compensated_sum(t.iter().map(|(_, v)| *v));
    let m1 = compensated_sum(t.iter().map(|(e, v)| (e.e10 + e.e11) as f64 * v));
    let m2 = compensated_sum(t.iter().map(|(e, v)| (e.e01 + e.e11) as f64 * v));
    let p01 = compensated_sum(t.iter().map(|(e, v)| e.e01 as f64 * v));
    [sum - 1.0 / k as f64, m1 - 0.5, m2 - 0.5, p01 - delta / 2.0]
}

fn multinomial(k: usize, e: &PairTypeMatrix) -> f64 {
    let a = binomial_u64(k as u64, e.e00 as u64);
    let b = binomial_u64((k - e.e00) as u64, e.e01 as u64);
    let c = binomial_u64((k - e.e00 - e.e01) as u64, e.e10 as u64);
    (a as f64) * (b as f64) * (c as f64)
}

/// `t_δ(ε) = C ((1-δ₀)/2)^{e00+e11} (δ₀/2)^{e01+e10} C(k; ε)`.
pub fn t_delta(delta: f64, k: usize) -> Result<PairTypeOptimum> {
    check_k(k)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("t_δ needs δ in (0,1), got {delta}")));
    }
    let hp = Hp::default();
    let x = delta0_of_delta_hp(&hp, &hp.num(delta), k)?;
    let [_, den, _, _] = forward_parts(&hp, &x, k);
    let c = hp.div(&hp.int(1), &hp.mul(&hp.int(k as i64), &den));
    let one = hp.int(1);
    let half = hp.num(0.5);
    let same = hp.mul(&hp.sub(&one, &x), &half);
    let diff = hp.mul(&x, &half);
    let t_delta: Vec<(PairTypeMatrix, f64)> = admissible_pair_types(k)
        .into_iter()
        .map(|e| {
            let w = hp.mul(
                &hp.mul(&c, &hp.powi(&same, e.e00 + e.e11)),
                &hp.powi(&diff, e.e01 + e.e10),
            );
            (e, hp.to_f64(&w) * multinomial(k, &e))
        })
        .collect();
    let res = pair_type_residuals(&t_delta, k, delta);
    if res.iter().any(|r| r.abs() > 1e-10) {
        return Err(Error::Solver(format!("t_δ violates its constraints: residuals {res:?}")));
    }
    Ok(PairTypeOptimum { delta, delta0: hp.to_f64(&x), c: hp.to_f64(&c), t_delta })
}

/// `F(t) = H(t) + Σ t(ε) log C(k; ε)`, the part of the pair exponent that
/// varies on `𝒯(δ)`.
pub fn pair_objective(t: &[(PairTypeMatrix, f64)], k: usize) -> f64 {
    compensated_sum(t.iter().map(|(e, v)| crate::numeric::eta(*v) + v * multinomial(k, e).ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlReport {
    pub delta: f64,
    pub delta0: f64,
    /// `1 - δ/δ₀`.
    pub eps_hat: f64,
    /// `H(δ₀) - H_0(δ)`.
    pub gap_h0: f64,
    /// `δ₀ ε̂ log((1-δ₀)/δ₀)`.
    pub gap_h0_identity: f64,
    /// `H_0(δ) - H(δ)`, a Kullback-Leibler divergence.
    pub kl: f64,
}

pub fn kl_report(delta: f64, k: usize) -> Result<KlReport> {
    check_k(k)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::domain(format!("kl_report needs δ in (0, 1/2], got {delta}")));
    }
    let mut hp = Hp::default();
    let x = hp.num(delta);
    let x0 = delta0_of_delta_hp(&hp, &x, k)?;
    let one = hp.int(1);
    let eps = hp.sub(&one, &hp.div(&x, &x0));
    let h_d0 = hp.h2(&x0);
    let h0 = h0_hp(&mut hp, &x, &x0);
    let h = hp.h2(&x);
    let gap = hp.sub(&h_d0, &h0);
    let log_ratio = hp.ln(&hp.div(&hp.sub(&one, &x0), &x0));
    let identity = hp.mul(&hp.mul(&x0, &eps), &log_ratio);
    let kl = hp.sub(&h0, &h);
    let report = KlReport {
        delta,
        delta0: hp.to_f64(&x0),
        eps_hat: hp.to_f64(&eps),
        gap_h0: hp.to_f64(&gap),
        gap_h0_identity: hp.to_f64(&identity),
        kl: hp.to_f64(&kl),
    };
    let mismatch = hp.to_f64(&hp.sub(&gap, &identity)).abs();
    if mismatch > 1e-10 {
        return Err(Error::Solver(format!("H(δ₀) - H₀(δ) identity off by {mismatch}")));
    }
    if report.kl < -1e-30 {
        return Err(Error::Solver(format!("negative divergence {}", report.kl)));
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub delta: f64,
    pub delta0: f64,
    pub psi0: f64,
    /// `ψ(δ)`.
    pub psi: f64,
    pub f_dk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Psi0Scan {
    pub d: u64,
    pub k: usize,
    pub rows: Vec<ScanRow>,
    pub argmax: usize,
    pub argmax_delta: f64,
    /// `ψ₀(argmax) - max over the other grid points`; positive means strict.
    pub margin: f64,
    /// `max |ψ₀(δ) - ψ₀(1-δ)|` over mirrored grid pairs.
    pub asymmetry: f64,
    /// Largest closed-form vs alternate-route gap seen.
    pub max_route_gap: f64,
}

/// Grid of `points` distances on `[2^{-k/2}, 1 - 2^{-k/2}]`, mirrored so
/// that `δ_i + δ_{N-1-i} = 1` exactly and an odd grid contains `1/2`.
pub fn scan_grid(k: usize, points: usize) -> Vec<f64> {
    let a = 2f64.powf(-(k as f64) / 2.0);
    let mut grid = vec![0.0; points];
    if points == 1 {
        grid[0] = 0.5;
        return grid;
    }
    for i in 0..points {
        let j = i.min(points - 1 - i);
        let v = a + (1.0 - 2.0 * a) * j as f64 / (points - 1) as f64;
        grid[i] = if i == j { v } else { 1.0 - v };
    }
    if points % 2 == 1 {
        grid[points / 2] = 0.5;
    }
    grid
}

/// Evaluates `ψ₀` on [`scan_grid`] and locates its maximum.
pub fn psi0_scan(d: u64, k: usize, points: usize) -> Result<Psi0Scan> {
    check_k(k)?;
    if points == 0 {
        return Err(Error::invalid("scan needs at least one grid point"));
    }
    let grid = scan_grid(k, points);
    let values: Vec<Psi0Value> = grid
        .par_iter()
        .map_init(Hp::default, |hp, &delta| psi0_value_with(hp, delta, d, k))
        .collect::<Result<_>>()?;
    let mut hp = Hp::default();
    let f = f_dk_hp(&mut hp, d, k);
    let f = hp.to_f64(&f);
    let rows: Vec<ScanRow> = values
        .iter()
        .map(|v| ScanRow { delta: v.delta, delta0: v.delta0, psi0: v.psi0, psi: v.psi, f_dk: f })
        .collect();
    let mut argmax = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.psi0 > rows[argmax].psi0 {
            argmax = i;
        }
    }
    let second = rows
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != argmax)
        .map(|(_, r)| r.psi0)
        .fold(f64::NEG_INFINITY, f64::max);
    let asymmetry = (0..points / 2)
        .map(|i| (rows[i].psi0 - rows[points - 1 - i].psi0).abs())
        .fold(0.0, f64::max);
    let max_route_gap = values.iter().map(|v| v.route_gap.abs()).fold(0.0, f64::max);
    Ok(Psi0Scan {
        d,
        k,
        argmax_delta: rows[argmax].delta,
        margin: rows[argmax].psi0 - second,
        rows,
        argmax,
        asymmetry,
        max_route_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_and_zero_are_fixed() {
        for k in [3, 5, 12, 25] {
            assert_eq!(delta_of_delta0(0.5, k).unwrap(), 0.5);
            assert_eq!(delta_of_delta0(0.0, k).unwrap(), 0.0);
            assert!((delta0_of_delta(0.5, k).unwrap() - 0.5).abs() < 1e-15);
            assert_eq!(delta0_of_delta(0.0, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn inverse_round_trip() {
        for k in [2, 3, 4, 7, 10, 25] {
            for i in 1..50 {
                let delta = i as f64 / 50.0;
                let x = delta0_of_delta(delta, k).unwrap();
                assert!((delta_of_delta0(x, k).unwrap() - delta).abs() < 1e-12, "k={k} δ={delta}");
            }
        }
    }

    #[test]
    fn monotone_for_small_and_large_k() {
        for k in 2..=40 {
            assert!(forward_map_is_monotone(k), "k={k}");
        }
    }

    #[test]
    fn t_delta_constraints_and_symmetry() {
        for k in [3, 4, 6] {
            for delta in [0.05, 0.2, 0.5, 0.8] {
                let opt = t_delta(delta, k).unwrap();
                let res = pair_type_residuals(&opt.t_delta, k, delta);
                assert!(res.iter().all(|r| r.abs() < 1e-10));
            }
            let opt = t_delta(0.5, k).unwrap();
            let lookup: HashMap<PairTypeMatrix, f64> = opt.t_delta.iter().copied().collect();
            for (e, v) in &opt.t_delta {
                let swapped = PairTypeMatrix { e00: e.e11, e01: e.e10, e10: e.e01, e11: e.e00 };
                let cross = PairTypeMatrix { e00: e.e00, e01: e.e10, e10: e.e01, e11: e.e11 };
                assert!((lookup[&swapped] - v).abs() < 1e-15);
                assert!((lookup[&cross] - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kl_examples() {
        let r = kl_report(0.5, 10).unwrap();
        assert!(r.eps_hat.abs() < 1e-30 && r.gap_h0.abs() < 1e-30 && r.kl.abs() < 1e-30);
        let r = kl_report(0.1, 10).unwrap();
        assert!((r.gap_h0 - r.gap_h0_identity).abs() < 1e-10);
        assert!(r.kl >= 0.0);
    }

    #[test]
    fn psi_at_half_is_f() {
        for (d, k) in [(10u64, 5usize), (40, 8), (3, 3)] {
            let f = super::super::first::f_dk(d, k).unwrap();
            assert!((psi(0.5, d, k).unwrap() - f).abs() < 1e-14);
            assert!((psi0(0.5, d, k).unwrap() - f).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_is_mirrored() {
        let g = scan_grid(25, 2001);
        assert_eq!(g[1000], 0.5);
        for i in 0..1000 {
            assert_eq!(g[i] + g[2000 - i], 1.0);
            assert!(g[i] < g[i + 1]);
        }
    }
}
