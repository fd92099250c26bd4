//! The Markov measure `μ` on proper colorings of the Cayley hypertree of
//! `Γ`: finite domains, pattern counts `Q(D)`, cylinder masses, exact
//! sampling, pullbacks of finite colorings, and a lazily grown tree for
//! core statistics at the root.

use crate::error::{Error, Result};
use crate::group::{eval_unchecked, CyclicFreeProduct, ReducedWord, UniformHom};
use crate::hypergraph::Coloring;
use crate::rng::RngState;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeEdge {
    pub label: usize,
    /// Element indices; the first is the element the edge was attached at.
    pub members: Vec<usize>,
}

/// A connected finite union of hyperedges of the Cayley hypertree that
/// contains the identity, or the singleton `{1}`. Edges are kept in the
/// order they were attached, so each edge meets the earlier ones in
/// exactly its first member.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeDomain {
    d: usize,
    k: usize,
    elements: Vec<ReducedWord>,
    #[serde(skip)]
    index: HashMap<ReducedWord, usize>,
    edges: Vec<TreeEdge>,
}

impl TreeDomain {
    pub fn singleton(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k < 2 {
            return Err(Error::invalid("need d >= 1 and k >= 2"));
        }
        let id = ReducedWord::identity();
        Ok(TreeDomain { d, k, elements: vec![id.clone()], index: HashMap::from([(id, 0)]), edges: Vec::new() })
    }

    /// The edge `⟨s_label⟩` through the identity.
    pub fn single_edge(d: usize, k: usize, label: usize) -> Result<Self> {
        let mut dom = TreeDomain::singleton(d, k)?;
        dom.add_edge(0, label)?;
        Ok(dom)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn elements(&self) -> &[ReducedWord] {
        &self.elements
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, w: &ReducedWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    fn group(&self) -> CyclicFreeProduct {
        CyclicFreeProduct { d: self.d, k: self.k }
    }

    /// Adds the coset `g⟨s_label⟩` through element `at`. Returns the edge index.
    pub fn add_edge(&mut self, at: usize, label: usize) -> Result<usize> {
        if at >= self.elements.len() {
            return Err(Error::invalid(format!("element {at} is not in the domain")));
        }
        if label >= self.d {
            return Err(Error::invalid(format!("label {} out of range 1..={}", label + 1, self.d)));
        }
        let group = self.group();
        let base = self.elements[at].clone();
        let coset: Vec<ReducedWord> = (0..self.k).map(|j| group.append(&base, label, j)).collect();
        if coset[1..].iter().any(|w| self.index.contains_key(w)) {
            return Err(Error::invalid(format!("edge with label {} through {base} is already present", label + 1)));
        }
        let mut members = vec![at];
        for w in coset.into_iter().skip(1) {
            let idx = self.elements.len();
            self.index.insert(w.clone(), idx);
            self.elements.push(w);
            members.push(idx);
        }
        self.edges.push(TreeEdge { label, members });
        Ok(self.edges.len() - 1)
    }
}

/// Generator label of the edge through `w` that leads back toward the
/// identity: the generator of its last syllable.
fn parent_label(w: &ReducedWord) -> Option<usize> {
    w.last().map(|s| s.generator)
}

/// All hyperedges within `radius` edge layers of the identity. Refuses to
/// build more than `max_elements` elements.
pub fn build_ball(d: usize, k: usize, radius: usize, max_elements: usize) -> Result<TreeDomain> {
    let mut dom = TreeDomain::singleton(d, k)?;
    // 1 + d(k-1) Σ ((d-1)(k-1))^j
    let mut expected: u128 = 1;
    let mut layer: u128 = (d * (k - 1)) as u128;
    for _ in 0..radius {
        expected = expected.saturating_add(layer);
        layer = layer.saturating_mul(((d - 1) * (k - 1)) as u128);
    }
    if expected > max_elements as u128 {
        return Err(Error::scale("tree ball elements", expected, max_elements));
    }
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let back = parent_label(&dom.elements[v]);
            for label in (0..d).filter(|&l| Some(l) != back) {
                let e = dom.add_edge(v, label)?;
                next.extend_from_slice(&dom.edges[e].members[1..]);
            }
        }
        frontier = next;
    }
    Ok(dom)
}

/// A 0/1 assignment on the elements of a domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pattern {
    pub bits: Vec<u8>,
}

impl Pattern {
    pub fn is_proper_on(&self, dom: &TreeDomain) -> bool {
        self.bits.len() == dom.len()
            && dom.edges.iter().all(|e| {
                let first = self.bits[e.members[0]];
                e.members.iter().any(|&m| self.bits[m] != first)
            })
    }
}

/// `Q(D)`: `2` for the singleton, otherwise `(2^k - 2)(2^{k-1} - 1)^{|E(D)|-1}`.
pub fn count_proper_patterns(dom: &TreeDomain) -> BigUint {
    if dom.edges.is_empty() {
        return BigUint::from(2u32);
    }
    let k = dom.k;
    let root = (BigUint::one() << k) - 2u32;
    let step = (BigUint::one() << (k - 1)) - 1u32;
    root * step.pow(dom.edges.len() as u32 - 1)
}

/// Largest domain [`count_proper_patterns_brute`] accepts.
pub const BRUTE_PATTERN_MAX: usize = 20;

/// `Q(D)` by enumerating all `2^{|D|}` assignments.
pub fn count_proper_patterns_brute(dom: &TreeDomain) -> Result<BigUint> {
    if dom.len() > BRUTE_PATTERN_MAX {
        return Err(Error::scale("brute-force pattern domain", dom.len(), BRUTE_PATTERN_MAX));
    }
    let n = dom.len();
    let masks: Vec<u32> =
        dom.edges.iter().map(|e| e.members.iter().fold(0u32, |m, &v| m | (1 << v))).collect();
    let count = (0u32..(1 << n))
        .filter(|&x| masks.iter().all(|&m| x & m != 0 && x & m != m))
        .count();
    Ok(BigUint::from(count))
}

/// `μ([ξ])`: `1/Q(D)` for proper `ξ`, and `0` for an improper one (its
/// cylinder contains no proper coloring).
pub fn cylinder_probability(dom: &TreeDomain, xi: &Pattern) -> Result<BigRational> {
    if xi.bits.len() != dom.len() {
        return Err(Error::invalid("pattern length does not match the domain"));
    }
    if !xi.is_proper_on(dom) {
        return Ok(BigRational::zero());
    }
    Ok(BigRational::new(BigInt::one(), BigInt::from(count_proper_patterns(dom))))
}

/// Uniform coloring of `k - 1` new vertices that does not make a
/// monochromatic edge together with a vertex of color `anchor`.
fn completion<R: Rng + ?Sized>(k: usize, anchor: u8, rng: &mut R) -> u64 {
    let choices = (1u64 << (k - 1)) - 1;
    let u = rng.gen_range(0..choices);
    if anchor == 0 {
        u + 1
    } else {
        u
    }
}

/// Draws `ξ ~ μ` restricted to `D`: the identity gets a fair bit and each
/// edge, in attachment order, a uniform proper completion.
pub fn sample_mu_pattern<R: Rng + ?Sized>(dom: &TreeDomain, rng: &mut R) -> Pattern {
    let mut bits = vec![0u8; dom.len()];
    bits[0] = rng.gen_range(0..2);
    for e in &dom.edges {
        let x = completion(dom.k, bits[e.members[0]], rng);
        for (j, &m) in e.members[1..].iter().enumerate() {
            bits[m] = ((x >> j) & 1) as u8;
        }
    }
    Pattern { bits }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pullback {
    pub pattern: Pattern,
    /// Whether `g ↦ σ(g^{-1})v` is injective on `D`.
    pub injective: bool,
}

/// `Π_v(c)` on `D`: `g ↦ c[σ(g^{-1}) v]`.
pub fn pullback_pattern(hom: &UniformHom, c: &Coloring, v: usize, dom: &TreeDomain) -> Result<Pullback> {
    let p = hom.params();
    if p.d != dom.d || p.k != dom.k {
        return Err(Error::invalid("domain and homomorphism use different (d, k)"));
    }
    if c.len() != hom.n() {
        return Err(Error::invalid("coloring length does not match the homomorphism"));
    }
    if v >= hom.n() {
        return Err(Error::invalid(format!("vertex {v} out of range 0..{}", hom.n())));
    }
    let group = dom.group();
    let images: Vec<usize> = dom.elements.iter().map(|g| eval_unchecked(hom, &group.inverse(g), v)).collect();
    let mut seen = images.clone();
    seen.sort_unstable();
    seen.dedup();
    Ok(Pullback {
        injective: seen.len() == images.len(),
        pattern: Pattern { bits: images.iter().map(|&u| c.get(u)).collect() },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalStat {
    pub n: usize,
    pub matches: usize,
    pub frequency: f64,
    /// Vertices whose pullback is not proper on `D`.
    pub improper: usize,
    /// Vertices whose pullback map is not injective on `D`.
    pub non_injective: usize,
    /// `1/Q(D)`.
    pub reference: f64,
}

/// `n^{-1} |{v : Π_v(χ)|_D = ξ}|` with the tree reference `1/Q(D)`.
pub fn local_convergence_stat(hom: &UniformHom, chi: &Coloring, dom: &TreeDomain, xi: &Pattern) -> Result<LocalStat> {
    if xi.bits.len() != dom.len() {
        return Err(Error::invalid("pattern length does not match the domain"));
    }
    let (mut matches, mut improper, mut non_injective) = (0, 0, 0);
    for v in 0..hom.n() {
        let pb = pullback_pattern(hom, chi, v, dom)?;
        if pb.pattern == *xi {
            matches += 1;
        }
        if !pb.pattern.is_proper_on(dom) {
            improper += 1;
        }
        if !pb.injective {
            non_injective += 1;
        }
    }
    let q = count_proper_patterns(dom);
    Ok(LocalStat {
        n: hom.n(),
        matches,
        frequency: matches as f64 / hom.n() as f64,
        improper,
        non_injective,
        reference: 1.0 / crate::samplers::ratio_to_f64(&q, &BigUint::one()),
    })
}

struct Node {
    color: u8,
    /// Edge through which the node was reached; `None` at the root.
    parent_edge: Option<usize>,
    parent_label: Option<usize>,
    edges: Option<Vec<usize>>,
    core: Vec<Option<bool>>,
}

struct LazyEdge {
    members: Vec<usize>,
    support: Option<usize>,
}

/// A `μ`-distributed coloring of the hypertree around the root, grown only
/// where a query looks. Answers core and attachment membership exactly on
/// the infinite tree, with no truncation radius.
pub struct LazyTree<'r, R: Rng + ?Sized> {
    d: usize,
    k: usize,
    levels: usize,
    nodes: Vec<Node>,
    edges: Vec<LazyEdge>,
    rng: &'r mut R,
}

impl<'r, R: Rng + ?Sized> LazyTree<'r, R> {
    /// A fresh tree answering queries up to level `levels`.
    pub fn new(d: usize, k: usize, levels: usize, rng: &'r mut R) -> Result<Self> {
        if k < 3 || d == 0 {
            return Err(Error::Unsupported("tree core statistics need k >= 3 and d >= 1".into()));
        }
        let color = rng.gen_range(0..2);
        let mut t = LazyTree { d, k, levels, nodes: Vec::new(), edges: Vec::new(), rng };
        t.nodes.push(Node { color, parent_edge: None, parent_label: None, edges: None, core: vec![None; levels + 1] });
        Ok(t)
    }

    /// Nodes materialized so far.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    fn expand(&mut self, v: usize) -> Vec<usize> {
        if let Some(e) = &self.nodes[v].edges {
            return e.clone();
        }
        let mut all: Vec<usize> = self.nodes[v].parent_edge.into_iter().collect();
        for label in 0..self.d {
            if self.nodes[v].parent_label == Some(label) {
                continue;
            }
            let e = self.edges.len();
            let x = completion(self.k, self.nodes[v].color, self.rng);
            let mut members = vec![v];
            for j in 0..self.k - 1 {
                self.nodes.push(Node {
                    color: ((x >> j) & 1) as u8,
                    parent_edge: Some(e),
                    parent_label: Some(label),
                    edges: None,
                    core: vec![None; self.levels + 1],
                });
                members.push(self.nodes.len() - 1);
            }
            let support = self.support_of(&members);
            self.edges.push(LazyEdge { members, support });
            all.push(e);
        }
        self.nodes[v].edges = Some(all.clone());
        all
    }

    fn support_of(&self, members: &[usize]) -> Option<usize> {
        let ones = members.iter().filter(|&&m| self.nodes[m].color == 1).count();
        let minority = if ones == 1 {
            1
        } else if ones + 1 == self.k {
            0
        } else {
            return None;
        };
        members.iter().copied().find(|&m| self.nodes[m].color == minority)
    }

    fn supported(&mut self, v: usize) -> Vec<usize> {
        self.expand(v).into_iter().filter(|&e| self.edges[e].support == Some(v)).collect()
    }

    /// Whether every vertex of `e` other than its support lies in `C_l`.
    fn good(&mut self, e: usize, l: usize) -> bool {
        let s = self.edges[e].support;
        let members = self.edges[e].members.clone();
        members.into_iter().filter(|&u| Some(u) != s).all(|u| self.in_core(u, l))
    }

    pub fn in_core(&mut self, v: usize, l: usize) -> bool {
        assert!(l <= self.levels, "level {l} beyond the tree's {}", self.levels);
        if l == 0 {
            return true;
        }
        if let Some(b) = self.nodes[v].core[l] {
            return b;
        }
        // C_l ⊆ C_{l-1}
        let mut ans = self.in_core(v, l - 1);
        if ans {
            let sup = self.supported(v);
            let mut hits = 0;
            for e in sup {
                if self.good(e, l - 1) {
                    hits += 1;
                    if hits == 3 {
                        break;
                    }
                }
            }
            ans = hits >= 3;
        }
        self.nodes[v].core[l] = Some(ans);
        ans
    }

    /// `v ∈ A_l`.
    pub fn attached(&mut self, v: usize, l: usize) -> bool {
        if l == 0 || self.in_core(v, l) {
            return false;
        }
        let sup = self.supported(v);
        sup.into_iter().any(|e| self.good(e, l - 1))
    }

    /// `v ∈ A'_l`.
    pub fn attached_prime(&mut self, v: usize, l: usize) -> bool {
        if !self.attached(v, l) {
            return false;
        }
        for ev in self.supported(v) {
            if !self.good(ev, l - 1) {
                continue;
            }
            for x in self.edges[ev].members.clone() {
                for f in self.expand(x) {
                    if f == ev {
                        continue;
                    }
                    let Some(w) = self.edges[f].support else { continue };
                    if w != v && self.good(f, l - 1) && !self.in_core(w, l) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Whether the root lies in `C_l ∪ A_l ∖ A'_l`.
    pub fn root_in_rigid_set(&mut self, l: usize) -> bool {
        self.in_core(0, l) || (self.attached(0, l) && !self.attached_prime(0, l))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeEstimate {
    pub samples: usize,
    pub hits: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Largest number of nodes any single sample materialized.
    pub max_nodes: usize,
}

/// Samples per RNG stream in [`tree_rigid_density`].
pub const TREE_CHUNK: usize = 1000;

/// Monte Carlo estimate of `μ(C̃_l ∪ Ã_l ∖ Ã'_l)`. Chunks of
/// [`TREE_CHUNK`] samples run on separate streams of `rng`, so the result
/// does not depend on the thread count.
pub fn tree_rigid_density(d: usize, k: usize, l: usize, samples: usize, rng: &RngState) -> Result<TreeEstimate> {
    if k < 3 || d == 0 {
        return Err(Error::Unsupported("tree core statistics need k >= 3 and d >= 1".into()));
    }
    let chunks = samples.div_ceil(TREE_CHUNK);
    let parts: Vec<(usize, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.replica(c as u64).rng();
            let count = TREE_CHUNK.min(samples - c * TREE_CHUNK);
            let (mut hits, mut max_nodes) = (0, 0);
            for _ in 0..count {
                let mut t = LazyTree::new(d, k, l, &mut r).expect("checked above");
                if t.root_in_rigid_set(l) {
                    hits += 1;
                }
                max_nodes = max_nodes.max(t.size());
            }
            (hits, max_nodes)
        })
        .collect();
    let hits: usize = parts.iter().map(|p| p.0).sum();
    let max_nodes = parts.iter().map(|p| p.1).max().unwrap_or(0);
    let mean = hits as f64 / samples.max(1) as f64;
    Ok(TreeEstimate {
        samples,
        hits,
        mean,
        stderr: (mean * (1.0 - mean) / samples.max(1) as f64).sqrt(),
        max_nodes,
    })
}
