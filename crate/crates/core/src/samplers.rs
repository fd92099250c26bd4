//! Exact samplers for the uniform model and the planted model.
//!
//! Each generator is sampled independently. For the planted model a
//! generator's partition is drawn in two stages: first its type, with
//! probability proportional to the exact number of partitions of that type,
//! then a uniform partition of that type.

use crate::error::{Error, Result};
use crate::group::{ModelParams, UniformHom};
use crate::hypergraph::{Coloring, TypeVector};
use crate::numeric::Factorials;
use num_bigint::{BigUint, RandBigInt};
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Turns a list of parts into a permutation carrying a uniform `k`-cycle on
/// each part.
fn cycles_on_parts<R: Rng + ?Sized>(n: usize, parts: &mut [Vec<usize>], rng: &mut R) -> Vec<usize> {
    let mut perm = vec![0usize; n];
    for part in parts.iter_mut() {
        part.shuffle(rng);
        for w in 0..part.len() {
            perm[part[w]] = part[(w + 1) % part.len()];
        }
    }
    perm
}

/// A uniform product of disjoint `k`-cycles on `[n]`.
pub fn sample_cycle_product<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    // consecutive blocks of a uniform shuffle, read cyclically, give a
    // uniform partition with a uniform cycle on every block
    let mut perm = vec![0usize; n];
    for block in order.chunks(k) {
        for w in 0..block.len() {
            perm[block[w]] = block[(w + 1) % block.len()];
        }
    }
    perm
}

/// Uniform sample from `Hom_unif(Γ, Sym(n))`.
pub fn sample_uniform_hom<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<UniformHom> {
    params.require_uniform()?;
    let images = (0..params.d).map(|_| sample_cycle_product(params.n, params.k, rng)).collect();
    Ok(UniformHom::from_parts_unchecked(*params, images))
}

/// Bichromatic types with `p = 1/2` at scale `n`, with their exact partition
/// counts.
#[derive(Debug, Clone)]
pub struct TypeTable {
    pub n: usize,
    pub k: usize,
    pub types: Vec<TypeVector>,
    pub weights: Vec<BigUint>,
    pub total: BigUint,
}

impl TypeTable {
    pub fn build(n: usize, k: usize) -> Result<Self> {
        if !n.is_multiple_of(k) || !n.is_multiple_of(2) {
            return Err(Error::invalid(format!("need n divisible by k and 2 (n={n}, k={k})")));
        }
        let fact = Factorials::new(n.max(k));
        let types = bichromatic_types(n, k, n / 2);
        let weights: Vec<BigUint> = types.iter().map(|t| partitions_of_type_count(&fact, t, n / 2)).collect();
        let total = weights.iter().sum();
        Ok(TypeTable { n, k, types, weights, total })
    }

    pub fn probability(&self, idx: usize) -> f64 {
        ratio_to_f64(&self.weights[idx], &self.total)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &TypeVector {
        let mut u = rng.gen_biguint_below(&self.total);
        for (t, w) in self.types.iter().zip(&self.weights) {
            if u < *w {
                return t;
            }
            u -= w;
        }
        unreachable!("draw below total weight")
    }
}

pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if den.is_zero() {
        return f64::NAN;
    }
    // scale so that both fit comfortably in f64 range
    let shift = den.bits().saturating_sub(60);
    let a = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

/// All count vectors `c_1..c_{k-1}` (with `c_0 = c_k = 0`) using `n/k`
/// parts and covering `ones` ones.
pub(crate) fn bichromatic_types(n: usize, k: usize, ones: usize) -> Vec<TypeVector> {
    fn rec(
        j: usize,
        k: usize,
        parts_left: usize,
        ones_left: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j == k {
            if parts_left == 0 && ones_left == 0 {
                let mut full = vec![0];
                full.extend_from_slice(cur);
                full.push(0);
                out.push(full);
            }
            return;
        }
        // remaining parts each take between j and k-1 ones
        if ones_left < j * parts_left || ones_left > (k - 1) * parts_left {
            return;
        }
        let max_c = if j == 0 { 0 } else { parts_left.min(ones_left / j) };
        for c in 0..=max_c {
            cur.push(c);
            rec(j + 1, k, parts_left - c, ones_left - j * c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(1, k, n / k, ones, &mut cur, &mut out);
    out.into_iter().map(|counts| TypeVector { n, k, counts }).collect()
}

/// `(pn)!((1-p)n)! / Π_j (j!(k-j)!)^{c_j} c_j!`.
pub(crate) fn partitions_of_type_count(fact: &Factorials, t: &TypeVector, ones: usize) -> BigUint {
    let mut den = BigUint::from(1u32);
    for (j, &c) in t.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let block = fact.get(j) * fact.get(t.k - j);
        den *= block.pow(c as u32) * fact.get(c);
    }
    fact.get(ones) * fact.get(t.n - ones) / den
}

fn table_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<TypeTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<TypeTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached [`TypeTable`] for `(n, k)`.
pub fn type_table(n: usize, k: usize) -> Result<Arc<TypeTable>> {
    if let Some(t) = table_cache().lock().unwrap().get(&(n, k)) {
        return Ok(t.clone());
    }
    let table = Arc::new(TypeTable::build(n, k)?);
    table_cache().lock().unwrap().insert((n, k), table.clone());
    Ok(table)
}

fn require_equitable(chi: &Coloring, n: usize) -> Result<()> {
    if chi.len() != n {
        return Err(Error::invalid(format!("coloring has length {}, expected {n}", chi.len())));
    }
    if !chi.equitable() {
        return Err(Error::invalid("coloring is not equitable"));
    }
    Ok(())
}

/// Draws a bichromatic type with probability proportional to its number of
/// partitions.
pub fn sample_type_vector<R: Rng + ?Sized>(k: usize, chi: &Coloring, rng: &mut R) -> Result<TypeVector> {
    require_equitable(chi, chi.len())?;
    let table = type_table(chi.len(), k)?;
    Ok(table.draw(rng).clone())
}

/// A uniform partition of `[n]` into `k`-sets whose type with respect to
/// `chi` is `t`.
pub fn sample_bichromatic_partition<R: Rng + ?Sized>(
    chi: &Coloring,
    t: &TypeVector,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let n = chi.len();
    if t.n != n || t.counts.len() != t.k + 1 || t.counts.iter().sum::<usize>() * t.k != n {
        return Err(Error::domain("type vector does not describe a k-partition of [n]"));
    }
    let mut ones = chi.class(1);
    let mut zeros = chi.class(0);
    if t.ones() != ones.len() {
        return Err(Error::domain(format!(
            "type covers {} ones but the coloring has {}",
            t.ones(),
            ones.len()
        )));
    }
    ones.shuffle(rng);
    zeros.shuffle(rng);
    // Cutting both shuffled classes into blocks in the same type order and
    // pairing them positionally is a uniform matching of the block families.
    let mut parts = Vec::with_capacity(n / t.k);
    let (mut oi, mut zi) = (0, 0);
    for (j, &c) in t.counts.iter().enumerate() {
        for _ in 0..c {
            let mut part = Vec::with_capacity(t.k);
            part.extend_from_slice(&ones[oi..oi + j]);
            part.extend_from_slice(&zeros[zi..zi + t.k - j]);
            oi += j;
            zi += t.k - j;
            parts.push(part);
        }
    }
    Ok(parts)
}

/// Uniform sample from `Hom_χ`, the uniform homomorphisms for which `chi` is proper.
pub fn sample_planted_hom<R: Rng + ?Sized>(
    params: &ModelParams,
    chi: &Coloring,
    rng: &mut R,
) -> Result<UniformHom> {
    params.require_uniform()?;
    params.require_even()?;
    require_equitable(chi, params.n)?;
    let table = type_table(params.n, params.k)?;
    let mut images = Vec::with_capacity(params.d);
    for _ in 0..params.d {
        let t = table.draw(rng);
        let mut parts = sample_bichromatic_partition(chi, t, rng)?;
        images.push(cycles_on_parts(params.n, &mut parts, rng));
    }
    Ok(UniformHom::from_parts_unchecked(*params, images))
}

/// Largest `n` accepted by [`sample_planted_hom_rejection`].
pub const REJECTION_MAX_N: usize = 40;

/// Cross-check sampler: per generator, redraw a uniform cycle product until
/// every cycle is bichromatic under `chi`.
pub fn sample_planted_hom_rejection<R: Rng + ?Sized>(
    params: &ModelParams,
    chi: &Coloring,
    rng: &mut R,
) -> Result<UniformHom> {
    params.require_uniform()?;
    params.require_even()?;
    require_equitable(chi, params.n)?;
    if params.n > REJECTION_MAX_N {
        return Err(Error::scale("rejection sampler vertex count", params.n, REJECTION_MAX_N));
    }
    let mut images = Vec::with_capacity(params.d);
    for _ in 0..params.d {
        loop {
            let perm = sample_cycle_product(params.n, params.k, rng);
            if cycles_bichromatic(&perm, chi) {
                images.push(perm);
                break;
            }
        }
    }
    Ok(UniformHom::from_parts_unchecked(*params, images))
}

fn cycles_bichromatic(perm: &[usize], chi: &Coloring) -> bool {
    let mut seen = vec![false; perm.len()];
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let (mut has0, mut has1) = (false, false);
        let mut v = s;
        while !seen[v] {
            seen[v] = true;
            if chi.get(v) == 0 {
                has0 = true;
            } else {
                has1 = true;
            }
            v = perm[v];
        }
        if !(has0 && has1) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{build_hypergraph, generator_type, monochromatic_edge_count};
    use crate::rng::RngState;

    #[test]
    fn full_cycle_when_k_equals_n() {
        let params = ModelParams::uniform(2, 5, 5).unwrap();
        let mut rng = RngState::new(1, 0).rng();
        let h = sample_uniform_hom(&params, &mut rng).unwrap();
        for i in 0..2 {
            let mut v = 0;
            for step in 1..=5 {
                v = h.image(i)[v];
                assert_eq!(v == 0, step == 5);
            }
        }
    }

    #[test]
    fn deterministic_given_state() {
        let params = ModelParams::uniform(3, 3, 12).unwrap();
        let a = sample_uniform_hom(&params, &mut RngState::new(9, 4).rng()).unwrap();
        let b = sample_uniform_hom(&params, &mut RngState::new(9, 4).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn k2_has_single_type() {
        let table = TypeTable::build(8, 2).unwrap();
        assert_eq!(table.types.len(), 1);
        assert_eq!(table.types[0].counts, vec![0, 4, 0]);
    }

    #[test]
    fn k4_n8_type_weights() {
        let table = TypeTable::build(8, 4).unwrap();
        let mut by_counts: Vec<(Vec<usize>, u64)> = table
            .types
            .iter()
            .zip(&table.weights)
            .map(|(t, w)| (t.counts.clone(), w.to_u64().unwrap()))
            .collect();
        by_counts.sort();
        // two 2+2 parts: 4!4!/((2!2!)^2 2!) = 18; one 1+3 and one 3+1: 4!4!/(3!)^2 = 16
        assert_eq!(by_counts, vec![(vec![0, 0, 2, 0, 0], 18), (vec![0, 1, 0, 1, 0], 16)]);
    }

    #[test]
    fn partition_has_requested_type() {
        let chi: Coloring = "000000111111".parse().unwrap();
        let t = TypeVector::new(12, 3, vec![0, 2, 2, 0]).unwrap();
        let mut rng = RngState::new(3, 0).rng();
        for _ in 0..50 {
            let parts = sample_bichromatic_partition(&chi, &t, &mut rng).unwrap();
            let mut counts = vec![0; 4];
            for p in &parts {
                counts[p.iter().filter(|&&v| chi.get(v) == 1).count()] += 1;
            }
            assert_eq!(counts, t.counts);
        }
        let bad = TypeVector::new(12, 3, vec![0, 4, 0, 0]).unwrap();
        assert!(sample_bichromatic_partition(&chi, &bad, &mut rng).is_err());
    }

    #[test]
    fn planted_is_proper() {
        let params = ModelParams::planted(5, 4, 40).unwrap();
        let chi = Coloring::canonical_equitable(40).unwrap();
        let mut rng = RngState::new(11, 0).rng();
        for _ in 0..20 {
            let h = sample_planted_hom(&params, &chi, &mut rng).unwrap();
            let g = build_hypergraph(&h);
            assert_eq!(monochromatic_edge_count(&g, &chi).unwrap(), 0);
            let t = generator_type(&g, &chi).unwrap();
            assert!(t.counts.iter().all(|row| row[0] == 0 && row[4] == 0));
        }
    }

    #[test]
    fn rejection_sampler_is_proper_and_bounded() {
        let params = ModelParams::planted(2, 3, 12).unwrap();
        let chi = Coloring::canonical_equitable(12).unwrap();
        let h = sample_planted_hom_rejection(&params, &chi, &mut RngState::new(2, 0).rng()).unwrap();
        assert_eq!(monochromatic_edge_count(&build_hypergraph(&h), &chi).unwrap(), 0);
        let big = ModelParams::planted(1, 3, 42).unwrap();
        let chi = Coloring::canonical_equitable(42).unwrap();
        assert!(sample_planted_hom_rejection(&big, &chi, &mut RngState::new(2, 0).rng()).is_err());
    }
}
