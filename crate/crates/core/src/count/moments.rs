//! Exact model moments as big rationals.

use super::partitions::{pair_partition_count, partition_count};
use crate::error::{Error, Result};
use crate::group::ModelParams;
use crate::hypergraph::{admissible_pair_types, PairTypeMatrix};
use crate::numeric::{Factorials, Fraction};
use crate::samplers::{bichromatic_types, partitions_of_type_count};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Largest `n` the moment sums accept.
pub const MOMENT_MAX_N: usize = 64;

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn check_scale(n: usize) -> Result<()> {
    if n > MOMENT_MAX_N {
        return Err(Error::scale("exact moment vertex count", n, MOMENT_MAX_N));
    }
    Ok(())
}

/// Number of partitions of `[n]` into `k`-sets with every part bichromatic
/// under a coloring with `ones` ones.
pub fn bichromatic_partition_count(n: usize, k: usize, ones: usize) -> BigUint {
    let fact = Factorials::new(n.max(k));
    bichromatic_types(n, k, ones)
        .iter()
        .map(|t| partitions_of_type_count(&fact, t, ones))
        .sum()
}

/// `E^u_n[Z]` for raw `(d, k, n)`; `d = 0` means no constraints.
pub fn first_moment(d: usize, k: usize, n: usize) -> Result<BigRational> {
    if k < 2 || !n.is_multiple_of(k) {
        return Err(Error::invalid("need k >= 2 dividing n"));
    }
    check_scale(n)?;
    let fact = Factorials::new(n);
    let total = partition_count(n, k);
    let mut sum = BigRational::zero();
    for a in 0..=n {
        let p = ratio(bichromatic_partition_count(n, k, a), total.clone());
        sum += ratio(fact.binomial(n, a), BigUint::one()) * pow(&p, d);
    }
    Ok(sum)
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// `E^u_n[Z]`, the expected number of proper 2-colorings.
pub fn exact_first_moment(params: &ModelParams) -> Result<BigRational> {
    first_moment(params.d, params.k, params.n)
}

/// `E^u_n[Z_e]`, the expected number of proper equitable colorings.
pub fn equitable_first_moment(params: &ModelParams) -> Result<BigRational> {
    params.require_uniform()?;
    params.require_even()?;
    check_scale(params.n)?;
    let fact = Factorials::new(params.n);
    let p = ratio(
        bichromatic_partition_count(params.n, params.k, params.n / 2),
        partition_count(params.n, params.k),
    );
    Ok(ratio(fact.binomial(params.n, params.n / 2), BigUint::one()) * pow(&p, params.d))
}

/// Number of partitions bichromatic under two colorings whose overlap
/// classes (00, 01, 10, 11) have the given sizes: `Σ_{t ∈ 𝒯} g(χ̃, t)`.
pub fn doubly_bichromatic_partition_count(k: usize, classes: [usize; 4]) -> BigUint {
    let n: usize = classes.iter().sum();
    let fact = Factorials::new(n.max(k));
    let types = admissible_pair_types(k);
    let mut total = BigUint::zero();
    let mut counts = BTreeMap::new();
    enumerate_pair_types(&types, 0, n / k, classes, &mut counts, &mut |c| {
        total += pair_partition_count(&fact, &classes, c);
    });
    total
}

fn enumerate_pair_types(
    types: &[PairTypeMatrix],
    idx: usize,
    parts_left: usize,
    left: [usize; 4],
    cur: &mut BTreeMap<PairTypeMatrix, usize>,
    f: &mut dyn FnMut(&BTreeMap<PairTypeMatrix, usize>),
) {
    if parts_left == 0 {
        if left == [0; 4] {
            f(cur);
        }
        return;
    }
    if idx == types.len() {
        return;
    }
    let m = types[idx];
    let arr = m.as_array();
    let max_c = (0..4)
        .filter(|&i| arr[i] > 0)
        .map(|i| left[i] / arr[i])
        .min()
        .unwrap_or(parts_left)
        .min(parts_left);
    for c in (0..=max_c).rev() {
        let mut next = left;
        for i in 0..4 {
            next[i] -= c * arr[i];
        }
        if c > 0 {
            cur.insert(m, c);
        }
        enumerate_pair_types(types, idx + 1, parts_left - c, next, cur, f);
        cur.remove(&m);
    }
}

/// `E^p_n[Z_χ(δ)]`: the planted-model expectation of the number of proper
/// equitable colorings at distance exactly `δ` from the planted one.
pub fn exact_planted_distance_moment(params: &ModelParams, delta: &Fraction) -> Result<BigRational> {
    params.require_uniform()?;
    params.require_even()?;
    check_scale(params.n)?;
    let n = params.n;
    let m = distance_count(n, delta)?;
    let h = n / 2;
    let fact = Factorials::new(n);
    let classes = [h - m / 2, m / 2, m / 2, h - m / 2];
    let both = doubly_bichromatic_partition_count(params.k, classes);
    let single = bichromatic_partition_count(n, params.k, h);
    let choices = fact.binomial(h, m / 2).pow(2);
    Ok(ratio(choices, BigUint::one()) * pow(&ratio(both, single), params.d))
}

/// `δ n`, requiring an even integer in `[0, n]`.
pub(crate) fn distance_count(n: usize, delta: &Fraction) -> Result<usize> {
    let scaled = *delta * Fraction::from_integer(n as i64);
    if !scaled.is_integer() || *scaled.numer() < 0 || *scaled.numer() as usize > n || scaled.numer() % 2 != 0 {
        return Err(Error::invalid(format!("δ·n = {scaled} must be an even integer in [0, n]")));
    }
    Ok(*scaled.numer() as usize)
}
