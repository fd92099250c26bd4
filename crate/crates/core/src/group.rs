//! The free product of `d` copies of `Z/kZ`, its reduced words, and uniform
//! homomorphisms into the symmetric group on `[n]`.
//!
//! Generators are 1-based wherever words are *ingested* (CLI, JSON word
//! lists, [`reduce_word`]); everything stored is 0-based.

use crate::error::{Error, Result};
use crate::numeric::Fraction;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default refusal bound for [`enumerate_uniform_homs`].
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub k: usize,
    pub n: usize,
}

impl ModelParams {
    pub fn new(d: usize, k: usize, n: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        if k < 2 {
            return Err(Error::invalid("k must be at least 2"));
        }
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        Ok(ModelParams { d, k, n })
    }

    /// Parameters for which uniform homomorphisms exist (`k | n`).
    pub fn uniform(d: usize, k: usize, n: usize) -> Result<Self> {
        let p = Self::new(d, k, n)?;
        p.require_uniform()?;
        Ok(p)
    }

    /// Parameters admitting both uniform homomorphisms and equitable colorings.
    pub fn planted(d: usize, k: usize, n: usize) -> Result<Self> {
        let p = Self::uniform(d, k, n)?;
        p.require_even()?;
        Ok(p)
    }

    pub fn require_uniform(&self) -> Result<()> {
        if !self.n.is_multiple_of(self.k) {
            return Err(Error::invalid(format!(
                "n = {} is not a multiple of k = {}",
                self.n, self.k
            )));
        }
        Ok(())
    }

    pub fn require_even(&self) -> Result<()> {
        if !self.n.is_multiple_of(2) {
            return Err(Error::invalid(format!("n = {} is odd; no equitable coloring", self.n)));
        }
        Ok(())
    }

    pub fn group(&self) -> CyclicFreeProduct {
        CyclicFreeProduct { d: self.d, k: self.k }
    }

    /// Edge density `r = d/k`.
    pub fn r(&self) -> f64 {
        self.d as f64 / self.k as f64
    }

    /// Probability that a fixed vertex supports a fixed edge under a uniform
    /// proper coloring of that edge: `1/(2^(k-1) - 1)`.
    pub fn lambda0(&self) -> f64 {
        lambda0(self.k)
    }

    pub fn lambda(&self) -> f64 {
        self.d as f64 * self.lambda0()
    }

    pub fn parts(&self) -> usize {
        self.n / self.k
    }
}

pub fn lambda0(k: usize) -> f64 {
    1.0 / (2f64.powi(k as i32 - 1) - 1.0)
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} d={} n={}", self.k, self.d, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Syllable {
    /// 0-based generator index.
    pub generator: usize,
    /// Exponent in `1..k`.
    pub power: usize,
}

/// A group element in normal form: adjacent syllables use distinct
/// generators and every exponent lies in `1..k`. The empty word is the
/// identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReducedWord {
    syllables: Vec<Syllable>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord::default()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Word length `r_1 + ... + r_l`.
    pub fn length(&self) -> usize {
        self.syllables.iter().map(|s| s.power).sum()
    }

    pub fn last(&self) -> Option<Syllable> {
        self.syllables.last().copied()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            if s.power == 1 {
                write!(f, "s{}", s.generator + 1)?;
            } else {
                write!(f, "s{}^{}", s.generator + 1, s.power)?;
            }
        }
        Ok(())
    }
}

/// `Γ = (Z/kZ)^{*d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CyclicFreeProduct {
    pub d: usize,
    pub k: usize,
}

impl CyclicFreeProduct {
    /// Reduces a sequence of 0-based `(generator, exponent)` letters.
    /// Exponents may be any integer (negative means inverse).
    pub fn reduce<I>(&self, letters: I) -> Result<ReducedWord>
    where
        I: IntoIterator<Item = (usize, i64)>,
    {
        let mut stack: Vec<Syllable> = Vec::new();
        for (g, e) in letters {
            if g >= self.d {
                return Err(Error::invalid(format!(
                    "generator index {} out of range 1..={}",
                    g + 1,
                    self.d
                )));
            }
            let power = e.rem_euclid(self.k as i64) as usize;
            self.push(&mut stack, Syllable { generator: g, power });
        }
        Ok(ReducedWord { syllables: stack })
    }

    fn push(&self, stack: &mut Vec<Syllable>, s: Syllable) {
        if s.power == 0 {
            return;
        }
        match stack.last_mut() {
            Some(top) if top.generator == s.generator => {
                let p = (top.power + s.power) % self.k;
                if p == 0 {
                    stack.pop();
                } else {
                    top.power = p;
                }
            }
            _ => stack.push(s),
        }
    }

    pub fn generator(&self, g: usize) -> ReducedWord {
        debug_assert!(g < self.d);
        ReducedWord { syllables: vec![Syllable { generator: g, power: 1 }] }
    }

    pub fn power(&self, g: usize, p: usize) -> ReducedWord {
        let mut out = Vec::new();
        self.push(&mut out, Syllable { generator: g, power: p % self.k });
        ReducedWord { syllables: out }
    }

    pub fn mul(&self, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
        let mut stack = a.syllables.clone();
        for &s in &b.syllables {
            self.push(&mut stack, s);
        }
        ReducedWord { syllables: stack }
    }

    pub fn inverse(&self, w: &ReducedWord) -> ReducedWord {
        let syllables = w
            .syllables
            .iter()
            .rev()
            .map(|s| Syllable { generator: s.generator, power: self.k - s.power })
            .collect();
        ReducedWord { syllables }
    }

    /// Right multiplication by `s_g^p`.
    pub fn append(&self, w: &ReducedWord, g: usize, p: usize) -> ReducedWord {
        let mut stack = w.syllables.clone();
        self.push(&mut stack, Syllable { generator: g, power: p % self.k });
        ReducedWord { syllables: stack }
    }
}

/// Normalizes a word given as 1-based `(generator, exponent)` letters.
pub fn reduce_word(params: &ModelParams, letters: &[(usize, i64)]) -> Result<ReducedWord> {
    let group = params.group();
    let mut zero_based = Vec::with_capacity(letters.len());
    for &(g, e) in letters {
        if g == 0 || g > params.d {
            return Err(Error::invalid(format!(
                "generator index {g} out of range 1..={}",
                params.d
            )));
        }
        zero_based.push((g - 1, e));
    }
    group.reduce(zero_based)
}

/// A homomorphism `Γ → Sym(n)` in which every generator acts as a disjoint
/// product of `k`-cycles. `images[i][v]` is the image of vertex `v` under
/// generator `i` (both 0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniformHom {
    params: ModelParams,
    images: Vec<Vec<usize>>,
}

impl UniformHom {
    /// Validates that every image is a permutation whose orbits all have size `k`.
    pub fn new(params: ModelParams, images: Vec<Vec<usize>>) -> Result<Self> {
        params.require_uniform()?;
        if images.len() != params.d {
            return Err(Error::invalid(format!(
                "expected {} generator images, got {}",
                params.d,
                images.len()
            )));
        }
        for (i, perm) in images.iter().enumerate() {
            check_k_cycle_product(perm, params.n, params.k)
                .map_err(|m| Error::invalid(format!("generator {}: {m}", i + 1)))?;
        }
        Ok(UniformHom { params, images })
    }

    pub(crate) fn from_parts_unchecked(params: ModelParams, images: Vec<Vec<usize>>) -> Self {
        debug_assert!(UniformHom::new(params, images.clone()).is_ok());
        UniformHom { params, images }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &[usize] {
        &self.images[generator]
    }

    /// Applies `s_g^p` to `v`.
    pub fn apply_power(&self, g: usize, p: usize, mut v: usize) -> usize {
        let perm = &self.images[g];
        for _ in 0..p {
            v = perm[v];
        }
        v
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&HomRecord::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: HomRecord = serde_json::from_str(s)?;
        rec.try_into()
    }
}

fn check_k_cycle_product(perm: &[usize], n: usize, k: usize) -> std::result::Result<(), String> {
    if perm.len() != n {
        return Err(format!("image has length {}, expected {n}", perm.len()));
    }
    let mut seen = vec![false; n];
    for &w in perm {
        if w >= n {
            return Err(format!("vertex {w} out of range"));
        }
        if seen[w] {
            return Err(format!("vertex {w} hit twice; not a permutation"));
        }
        seen[w] = true;
    }
    let mut visited = vec![false; n];
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut v = start;
        while !visited[v] {
            visited[v] = true;
            v = perm[v];
            len += 1;
        }
        if len != k {
            return Err(format!("orbit of {start} has size {len}, expected {k}"));
        }
    }
    Ok(())
}

/// On-disk instance format: `{"n":..,"k":..,"d":..,"images":[[..],..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomRecord {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub images: Vec<Vec<usize>>,
}

impl From<&UniformHom> for HomRecord {
    fn from(h: &UniformHom) -> Self {
        HomRecord { n: h.params.n, k: h.params.k, d: h.params.d, images: h.images.clone() }
    }
}

impl TryFrom<HomRecord> for UniformHom {
    type Error = Error;

    fn try_from(rec: HomRecord) -> Result<Self> {
        let params = ModelParams::new(rec.d, rec.k, rec.n)?;
        UniformHom::new(params, rec.images)
    }
}

impl Serialize for UniformHom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HomRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for UniformHom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = HomRecord::deserialize(d)?;
        rec.try_into().map_err(serde::de::Error::custom)
    }
}

/// `σ(w)v`, applying syllables right to left.
pub fn evaluate_word(hom: &UniformHom, w: &ReducedWord, v: usize) -> Result<usize> {
    if v >= hom.n() {
        return Err(Error::invalid(format!("vertex {v} out of range 0..{}", hom.n())));
    }
    if let Some(s) = w.syllables().iter().find(|s| s.generator >= hom.params.d) {
        return Err(Error::invalid(format!("word uses generator {} > d", s.generator + 1)));
    }
    Ok(eval_unchecked(hom, w, v))
}

pub(crate) fn eval_unchecked(hom: &UniformHom, w: &ReducedWord, v: usize) -> usize {
    w.syllables().iter().rev().fold(v, |acc, s| hom.apply_power(s.generator, s.power, acc))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoficReport {
    pub n: usize,
    pub multiplicative_count: usize,
    pub trace_count: usize,
    pub mult_fraction: f64,
    pub trace_fraction: f64,
    pub multiplicative: bool,
    pub trace_preserving: bool,
    pub sofic: bool,
}

/// Measures `(D, δ)`-multiplicativity and trace preservation of `hom`.
pub fn check_sofic(hom: &UniformHom, words: &[ReducedWord], delta: Fraction) -> Result<SoficReport> {
    let group = hom.params.group();
    for w in words {
        if w.syllables().iter().any(|s| s.generator >= hom.params.d) {
            return Err(Error::invalid(format!("word {w} uses a generator beyond d")));
        }
    }
    let n = hom.n();
    let products: Vec<(usize, usize, ReducedWord)> = (0..words.len())
        .flat_map(|a| (0..words.len()).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, group.mul(&words[a], &words[b])))
        .collect();
    let nontrivial: Vec<&ReducedWord> = words.iter().filter(|w| !w.is_identity()).collect();

    let mut multiplicative_count = 0;
    let mut trace_count = 0;
    for v in 0..n {
        let mult_ok = products.iter().all(|(a, b, gh)| {
            let composed = eval_unchecked(hom, &words[*a], eval_unchecked(hom, &words[*b], v));
            eval_unchecked(hom, gh, v) == composed
        });
        if mult_ok {
            multiplicative_count += 1;
        }
        if nontrivial.iter().all(|f| eval_unchecked(hom, f, v) != v) {
            trace_count += 1;
        }
    }
    // count > (1 - δ) n, exactly
    let exceeds = |count: usize| {
        let lhs = count as i128 * *delta.denom() as i128;
        let rhs = (*delta.denom() as i128 - *delta.numer() as i128) * n as i128;
        lhs > rhs
    };
    let multiplicative = exceeds(multiplicative_count);
    let trace_preserving = exceeds(trace_count);
    Ok(SoficReport {
        n,
        multiplicative_count,
        trace_count,
        mult_fraction: multiplicative_count as f64 / n as f64,
        trace_fraction: trace_count as f64 / n as f64,
        multiplicative,
        trace_preserving,
        sofic: multiplicative && trace_preserving,
    })
}

/// Number of permutations of `[n]` that are products of disjoint `k`-cycles:
/// `n! / (k^{n/k} (n/k)!)`.
pub fn cycle_product_count(n: usize, k: usize) -> BigUint {
    let m = n / k;
    let mut num = BigUint::one();
    for i in 2..=n {
        num *= BigUint::from(i);
    }
    let mut den = BigUint::from(k).pow(m as u32);
    for i in 2..=m {
        den *= BigUint::from(i);
    }
    num / den
}

/// `[n! (k-1)!^{n/k} / (k!^{n/k} (n/k)!)]^d`.
pub fn uniform_hom_count(params: &ModelParams) -> BigUint {
    cycle_product_count(params.n, params.k).pow(params.d as u32)
}

/// The `index`-th product of disjoint `k`-cycles on `[n]` in a fixed order.
///
/// Mixed radix: at each step the smallest unused vertex opens a cycle, and the
/// digit picks the ordered `(k-1)`-tuple that follows it.
pub fn unrank_cycle_product(n: usize, k: usize, mut index: u64) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut perm = vec![0usize; n];
    while !remaining.is_empty() {
        let head = remaining.remove(0);
        let mut prev = head;
        for _ in 1..k {
            let r = remaining.len() as u64;
            let pick = (index % r) as usize;
            index /= r;
            let next = remaining.remove(pick);
            perm[prev] = next;
            prev = next;
        }
        perm[prev] = head;
    }
    perm
}

/// Streams every uniform homomorphism for `params` exactly once.
#[derive(Debug, Clone)]
pub struct HomEnumerator {
    params: ModelParams,
    per_generator: u64,
    total: u64,
    next: u64,
}

impl HomEnumerator {
    pub fn total(&self) -> u64 {
        self.total
    }

    /// The homomorphism with the given rank, generator 1 varying fastest.
    pub fn get(&self, mut rank: u64) -> UniformHom {
        let mut images = Vec::with_capacity(self.params.d);
        for _ in 0..self.params.d {
            let idx = rank % self.per_generator;
            rank /= self.per_generator;
            images.push(unrank_cycle_product(self.params.n, self.params.k, idx));
        }
        UniformHom::from_parts_unchecked(self.params, images)
    }
}

impl Iterator for HomEnumerator {
    type Item = UniformHom;

    fn next(&mut self) -> Option<UniformHom> {
        if self.next >= self.total {
            return None;
        }
        let h = self.get(self.next);
        self.next += 1;
        Some(h)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for HomEnumerator {}

/// All uniform homomorphisms, refusing when their number exceeds `limit`.
pub fn enumerate_uniform_homs(params: &ModelParams, limit: u64) -> Result<HomEnumerator> {
    params.require_uniform()?;
    let total = uniform_hom_count(params);
    match total.to_u64() {
        Some(t) if t <= limit => Ok(HomEnumerator {
            params: *params,
            per_generator: cycle_product_count(params.n, params.k).to_u64().unwrap_or(u64::MAX),
            total: t,
            next: 0,
        }),
        _ => Err(Error::scale("uniform homomorphism enumeration", total, limit)),
    }
}
