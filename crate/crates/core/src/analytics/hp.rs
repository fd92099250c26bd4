//! Thin context around `astro_float::BigFloat` carrying precision, rounding
//! mode and the constants cache.

use astro_float::{BigFloat, Consts, RoundingMode};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 128;

/// Environment variable overriding [`DEFAULT_PRECISION`].
pub const PRECISION_ENV: &str = "SOFIC_LAB_PRECISION";

/// Working precision: `SOFIC_LAB_PRECISION` if set to an integer >= 64,
/// otherwise the default.
pub fn precision_from_env() -> usize {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&p| p >= 64)
        .unwrap_or(DEFAULT_PRECISION)
}

pub struct Hp {
    p: usize,
    rm: RoundingMode,
    cc: Consts,
}

impl Default for Hp {
    fn default() -> Self {
        Hp::with_precision(precision_from_env())
    }
}

impl Hp {
    pub fn with_precision(bits: usize) -> Self {
        Hp { p: bits, rm: RoundingMode::ToEven, cc: Consts::new().expect("constants cache") }
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn int(&self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, self.p)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, self.rm)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, self.rm)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, self.rm)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, self.rm)
    }

    pub fn powi(&self, a: &BigFloat, n: usize) -> BigFloat {
        if n == 0 {
            return self.int(1);
        }
        a.powi(n, self.p, self.rm)
    }

    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, self.rm, &mut self.cc)
    }

    pub fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(self.p, self.rm, &mut self.cc)
    }

    /// `2^e` for integer `e`, exact.
    pub fn pow2(&self, e: i64) -> BigFloat {
        let two = self.int(2);
        if e >= 0 {
            self.powi(&two, e as usize)
        } else {
            self.div(&self.int(1), &self.powi(&two, (-e) as usize))
        }
    }

    /// `-x ln x` with `0 ln 0 = 0`.
    pub fn eta(&mut self, x: &BigFloat) -> BigFloat {
        if x.is_zero() {
            return self.int(0);
        }
        let l = self.ln(x);
        self.mul(x, &l).neg()
    }

    /// Natural-log binary entropy `H(x, 1-x)`.
    pub fn h2(&mut self, x: &BigFloat) -> BigFloat {
        let one = self.int(1);
        let y = self.sub(&one, x);
        let a = self.eta(x);
        let b = self.eta(&y);
        self.add(&a, &b)
    }

    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        if x.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let mut y = x.clone();
        // round to 64 bits first so the decimal rendering stays short
        let _ = y.set_precision(64, self.rm);
        y.to_string().parse().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_f64() {
        let hp = Hp::with_precision(128);
        for x in [1.0, -2.5, 3.0e-8, 1.0e12, std::f64::consts::PI, -1.0e-300] {
            assert_eq!(hp.to_f64(&hp.num(x)), x);
        }
    }

    #[test]
    fn logs_and_entropy() {
        let mut hp = Hp::with_precision(128);
        let half = hp.num(0.5);
        let h = hp.h2(&half);
        assert!((hp.to_f64(&h) - std::f64::consts::LN_2).abs() < 1e-16);
        assert_eq!(hp.to_f64(&hp.pow2(-3)), 0.125);
        let e = hp.exp(&hp.int(1));
        assert!((hp.to_f64(&e) - std::f64::consts::E).abs() < 1e-15);
    }
}
