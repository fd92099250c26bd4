//! Closed-form counts of `k`-partitions with prescribed color statistics,
//! and a brute-force partition enumerator used to check them.

use crate::error::{Error, Result};
use crate::hypergraph::{Coloring, PairTypeMatrix, TypeVector};
use crate::numeric::{Factorials, Fraction};
use num_bigint::BigUint;
use num_traits::One;
use std::collections::BTreeMap;

/// `n! / (k!^{n/k} (n/k)!)`, the number of partitions of `[n]` into `k`-sets.
pub fn partition_count(n: usize, k: usize) -> BigUint {
    let fact = Factorials::new(n);
    let m = n / k;
    fact.get(n) / (fact.get(k).pow(m as u32) * fact.get(m))
}

/// Number of `k`-partitions whose type with respect to `chi` is `t`.
pub fn count_partitions_of_type(chi: &Coloring, t: &TypeVector) -> Result<BigUint> {
    let n = chi.len();
    if t.n != n || t.counts.len() != t.k + 1 || t.counts.iter().sum::<usize>() * t.k != n {
        return Err(Error::domain("type vector does not describe a k-partition of [n]"));
    }
    if t.ones() != chi.ones() {
        return Err(Error::domain(format!(
            "type covers {} ones but the coloring has {}",
            t.ones(),
            chi.ones()
        )));
    }
    let fact = Factorials::new(n.max(t.k));
    Ok(crate::samplers::partitions_of_type_count(&fact, t, chi.ones()))
}

/// Class sizes `|χ⁻¹(i) ∩ χ̃⁻¹(j)|` in the order 00, 01, 10, 11.
pub fn overlap_classes(chi: &Coloring, chi_t: &Coloring) -> Result<[usize; 4]> {
    if chi.len() != chi_t.len() {
        return Err(Error::invalid("colorings have different lengths"));
    }
    let mut a = [0usize; 4];
    for v in 0..chi.len() {
        a[2 * chi.get(v) as usize + chi_t.get(v) as usize] += 1;
    }
    Ok(a)
}

/// Converts `t: 𝓔 → Q` into part counts `n t(ε)`, requiring integrality.
pub fn pair_counts_from_map(n: usize, t: &BTreeMap<PairTypeMatrix, Fraction>) -> Result<BTreeMap<PairTypeMatrix, usize>> {
    let mut out = BTreeMap::new();
    for (m, f) in t {
        let scaled = *f * Fraction::from_integer(n as i64);
        if !scaled.is_integer() || *scaled.numer() < 0 {
            return Err(Error::domain(format!("n·t({m:?}) = {scaled} is not a non-negative integer")));
        }
        if *scaled.numer() > 0 {
            out.insert(*m, *scaled.numer() as usize);
        }
    }
    Ok(out)
}

/// `Π_ij a_ij! / (Π_ε c_ε! · Π_ε Π_ij e_ij!^{c_ε})` for class sizes `a`.
pub(crate) fn pair_partition_count(fact: &Factorials, classes: &[usize; 4], counts: &BTreeMap<PairTypeMatrix, usize>) -> BigUint {
    let mut num = BigUint::one();
    for &a in classes {
        num *= fact.get(a);
    }
    let mut den = BigUint::one();
    for (m, &c) in counts {
        den *= fact.get(c);
        for e in m.as_array() {
            den *= fact.get(e).pow(c as u32);
        }
    }
    num / den
}

/// Number of `k`-partitions of type `(χ, χ̃, t)`.
pub fn count_pair_partitions(
    chi: &Coloring,
    chi_t: &Coloring,
    k: usize,
    t: &BTreeMap<PairTypeMatrix, Fraction>,
) -> Result<BigUint> {
    let n = chi.len();
    let counts = pair_counts_from_map(n, t)?;
    let classes = overlap_classes(chi, chi_t)?;
    check_pair_marginals(n, k, &classes, &counts)?;
    Ok(pair_partition_count(&Factorials::new(n.max(k)), &classes, &counts))
}

fn check_pair_marginals(
    n: usize,
    k: usize,
    classes: &[usize; 4],
    counts: &BTreeMap<PairTypeMatrix, usize>,
) -> Result<()> {
    if let Some(m) = counts.keys().find(|m| m.total() != k) {
        return Err(Error::domain(format!("pair type {m:?} does not have k = {k} vertices")));
    }
    let parts: usize = counts.values().sum();
    if parts * k != n {
        return Err(Error::domain(format!("Σ t = {parts}/{n}, expected 1/k")));
    }
    const NAMES: [&str; 4] = ["00", "01", "10", "11"];
    for (idx, name) in NAMES.iter().enumerate() {
        let covered: usize = counts.iter().map(|(m, &c)| c * m.as_array()[idx]).sum();
        if covered != classes[idx] {
            return Err(Error::domain(format!(
                "marginal for class {name} is {covered}, the colorings give {}",
                classes[idx]
            )));
        }
    }
    Ok(())
}

/// Every partition of `[n]` into `k`-sets (parts sorted, each starting
/// with its minimum). Refuses above `limit` partitions.
pub fn enumerate_partitions(n: usize, k: usize, limit: u64) -> Result<Vec<Vec<Vec<usize>>>> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::invalid("n must be a positive multiple of k"));
    }
    let total = partition_count(n, k);
    if total > BigUint::from(limit) {
        return Err(Error::scale("partition enumeration", total, limit));
    }
    fn rec(rest: Vec<usize>, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let head = rest[0];
        let others = &rest[1..];
        combinations(others, k - 1, &mut |chosen: &[usize]| {
            let mut part = vec![head];
            part.extend_from_slice(chosen);
            let remaining: Vec<usize> = others.iter().copied().filter(|v| !chosen.contains(v)).collect();
            cur.push(part);
            rec(remaining, k, cur, out);
            cur.pop();
        });
    }
    let mut out = Vec::new();
    rec((0..n).collect(), k, &mut Vec::new(), &mut out);
    Ok(out)
}

fn combinations(items: &[usize], r: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == r {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < r - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, r, i + 1, cur, f);
            cur.pop();
        }
    }
    go(items, r, 0, &mut Vec::with_capacity(r), f);
}
