//! Exact counting of proper colorings and the closed-form partition and
//! moment formulas. All arithmetic here is integer or rational.

pub mod moments;
pub mod partitions;
pub mod search;

pub use moments::{
    bichromatic_partition_count, doubly_bichromatic_partition_count, equitable_first_moment,
    exact_first_moment, exact_planted_distance_moment, first_moment,
};
pub use partitions::{
    count_pair_partitions, count_partitions_of_type, enumerate_partitions, partition_count,
};

use crate::error::{Error, Result};
use crate::hypergraph::{is_proper, Coloring, LabeledHypergraph};
use crate::numeric::{floor_times, Fraction};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use search::{histogram, Reference, SearchSpec};
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Enumeration,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountReport {
    #[serde(serialize_with = "as_decimal")]
    pub value: BigUint,
    pub method: CountMethod,
    pub elapsed: f64,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Vertex-count limits for exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountLimits {
    /// Used when monochromatic edges are tolerated.
    pub with_budget: usize,
    /// Used for proper colorings, where propagation applies.
    pub proper: usize,
}

impl Default for CountLimits {
    fn default() -> Self {
        CountLimits { with_budget: 32, proper: 40 }
    }
}

impl CountLimits {
    pub(crate) fn check(&self, n: usize, budget: usize) -> Result<()> {
        let limit = if budget > 0 { self.with_budget } else { self.proper };
        if n > limit {
            return Err(Error::scale("exhaustive coloring search vertex count", n, limit));
        }
        Ok(())
    }
}

fn report(value: u128, start: Instant) -> CountReport {
    CountReport { value: BigUint::from(value), method: CountMethod::Enumeration, elapsed: start.elapsed().as_secs_f64() }
}

/// `Z(ε; σ)`: colorings with at most `εn` monochromatic edges.
pub fn count_proper(g: &LabeledHypergraph, eps: &Fraction) -> Result<CountReport> {
    count_proper_with(g, eps, CountLimits::default())
}

pub fn count_proper_with(g: &LabeledHypergraph, eps: &Fraction, limits: CountLimits) -> Result<CountReport> {
    let start = Instant::now();
    let budget = floor_times(eps, g.n())?;
    let edges = g.edges().len();
    if budget >= edges {
        return Ok(CountReport {
            value: BigUint::from(2u32).pow(g.n() as u32),
            method: CountMethod::ClosedForm,
            elapsed: start.elapsed().as_secs_f64(),
        });
    }
    limits.check(g.n(), budget)?;
    let spec = SearchSpec { budget, ones: None, reference: None };
    Ok(report(histogram(g, &spec).total(), start))
}

/// `Z_e(σ)`: proper equitable colorings.
pub fn count_equitable(g: &LabeledHypergraph) -> Result<CountReport> {
    let start = Instant::now();
    require_even(g)?;
    CountLimits::default().check(g.n(), 0)?;
    Ok(report(histogram(g, &SearchSpec::equitable(g.n())).total(), start))
}

fn require_even(g: &LabeledHypergraph) -> Result<()> {
    if !g.n().is_multiple_of(2) {
        return Err(Error::invalid("equitable colorings need even n"));
    }
    Ok(())
}

fn require_proper_equitable(g: &LabeledHypergraph, chi: &Coloring) -> Result<()> {
    if chi.len() != g.n() {
        return Err(Error::invalid("coloring length does not match the hypergraph"));
    }
    if !chi.equitable() {
        return Err(Error::domain("reference coloring is not equitable"));
    }
    if !is_proper(g, chi)? {
        return Err(Error::domain("reference coloring is not proper"));
    }
    Ok(())
}

/// Largest disagreement count `m` with `m/n ≤ 2^{-k/2}`.
pub fn cluster_radius(n: usize, k: usize) -> usize {
    // m^2 2^k <= n^2, exactly
    let n2 = (n as u128) * (n as u128);
    let scale = 1u128.checked_shl(k as u32).unwrap_or(u128::MAX);
    let mut m = 0usize;
    while ((m + 1) as u128).pow(2).saturating_mul(scale) <= n2 {
        m += 1;
    }
    m
}

fn within_distance(g: &LabeledHypergraph, chi: &Coloring, lo: usize, hi: usize) -> SearchSpec {
    SearchSpec {
        budget: 0,
        ones: Some((g.n() / 2, g.n() / 2)),
        reference: Some(Reference { coloring: chi.clone(), mask: None, disagreements: (lo, hi) }),
    }
}

/// `Z_χ(δ)`: proper equitable colorings at distance exactly `δ` from `chi`.
pub fn count_at_distance(g: &LabeledHypergraph, chi: &Coloring, delta: &Fraction) -> Result<CountReport> {
    let start = Instant::now();
    require_proper_equitable(g, chi)?;
    let m = moments::distance_count(g.n(), delta)?;
    CountLimits::default().check(g.n(), 0)?;
    Ok(report(histogram(g, &within_distance(g, chi, m, m)).total(), start))
}

/// `|C_σ(χ)|`: proper equitable colorings within distance `2^{-k/2}` of `chi`.
pub fn cluster_size(g: &LabeledHypergraph, chi: &Coloring) -> Result<CountReport> {
    let start = Instant::now();
    require_proper_equitable(g, chi)?;
    CountLimits::default().check(g.n(), 0)?;
    let r = cluster_radius(g.n(), g.k());
    Ok(report(histogram(g, &within_distance(g, chi, 0, r)).total(), start))
}

/// Proper equitable colorings by disagreement count with `chi` (index `m`
/// is distance `m/n`).
pub fn distance_histogram(g: &LabeledHypergraph, chi: &Coloring) -> Result<Vec<BigUint>> {
    require_proper_equitable(g, chi)?;
    CountLimits::default().check(g.n(), 0)?;
    let h = histogram(g, &within_distance(g, chi, 0, g.n()));
    Ok(h.by_disagreement().into_iter().map(BigUint::from).collect())
}

/// All proper equitable colorings, in search order.
pub fn proper_equitable_colorings(g: &LabeledHypergraph) -> Result<Vec<Coloring>> {
    require_even(g)?;
    CountLimits::default().check(g.n(), 0)?;
    let mut out = Vec::new();
    search::for_each(g, &SearchSpec::equitable(g.n()), |c| {
        out.push(c.clone());
        true
    });
    Ok(out)
}

fn le_threshold(count: &BigUint, threshold: &BigRational) -> bool {
    BigRational::from_integer(BigInt::from(count.clone())) <= *threshold
}

/// Good: equitable, proper, and with cluster size at most `threshold`.
pub fn is_good_coloring(g: &LabeledHypergraph, chi: &Coloring, threshold: &BigRational) -> Result<bool> {
    if chi.len() != g.n() {
        return Err(Error::invalid("coloring length does not match the hypergraph"));
    }
    if !chi.equitable() || !is_proper(g, chi)? {
        return Ok(false);
    }
    Ok(le_threshold(&cluster_size(g, chi)?.value, threshold))
}

/// `Z_g(σ)`: the number of good colorings.
pub fn count_good(g: &LabeledHypergraph, threshold: &BigRational) -> Result<CountReport> {
    let start = Instant::now();
    let all = proper_equitable_colorings(g)?;
    let r = cluster_radius(g.n(), g.k());
    let good = all
        .iter()
        .filter(|c| {
            let size = all
                .iter()
                .filter(|o| c.bits().iter().zip(o.bits()).filter(|(a, b)| a != b).count() <= r)
                .count();
            le_threshold(&BigUint::from(size), threshold)
        })
        .count();
    Ok(report(good as u128, start))
}
