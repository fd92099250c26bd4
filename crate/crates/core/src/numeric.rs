//! Small exact and floating helpers shared across modules.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

/// Exact small rational, used for thresholds such as ε and distances.
pub type Fraction = Ratio<i64>;

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.125"` exactly.
pub fn parse_fraction(s: &str) -> Result<Fraction> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a fraction"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Fraction::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if frac_part.len() > 15 {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let den = 10i64.pow(frac_part.len() as u32);
    let value = Fraction::new(num, den);
    Ok(if neg { -value } else { value })
}

/// `floor(frac * n)` for non-negative fractions.
pub fn floor_times(frac: &Fraction, n: usize) -> Result<usize> {
    if *frac.numer() < 0 {
        return Err(Error::invalid("negative fraction"));
    }
    let v = (*frac.numer() as i128 * n as i128) / *frac.denom() as i128;
    Ok(v as usize)
}

pub fn fraction_to_f64(f: &Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// Table of factorials `0!, 1!, ..., max!`.
#[derive(Debug, Clone)]
pub struct Factorials {
    table: Vec<BigUint>,
}

impl Factorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(BigUint::one());
        for i in 1..=max {
            let next = &table[i - 1] * BigUint::from(i);
            table.push(next);
        }
        Factorials { table }
    }

    pub fn get(&self, i: usize) -> &BigUint {
        &self.table[i]
    }

    pub fn binomial(&self, n: usize, r: usize) -> BigUint {
        if r > n {
            return BigUint::zero();
        }
        &self.table[n] / (&self.table[r] * &self.table[n - r])
    }
}

pub fn binomial_u64(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `-x ln x` with the convention `0 ln 0 = 0`.
pub fn eta(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_fraction("1/4").unwrap(), Fraction::new(1, 4));
        assert_eq!(parse_fraction("0.125").unwrap(), Fraction::new(1, 8));
        assert_eq!(parse_fraction("3").unwrap(), Fraction::new(3, 1));
        assert_eq!(parse_fraction(".5").unwrap(), Fraction::new(1, 2));
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("abc").is_err());
    }

    #[test]
    fn floor_of_product() {
        assert_eq!(floor_times(&Fraction::new(1, 10), 32).unwrap(), 3);
        assert_eq!(floor_times(&Fraction::new(1, 4), 4).unwrap(), 1);
    }

    #[test]
    fn factorial_binomials() {
        let f = Factorials::new(20);
        assert_eq!(f.binomial(10, 3), BigUint::from(120u32));
        assert_eq!(binomial_u64(60, 30), 118264581564861424);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s = compensated_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
