//! The generator-labeled hypergraph `G_σ` and coloring statistics on it.

use crate::error::{Error, Result};
use crate::group::UniformHom;
use crate::numeric::Fraction;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    /// 0-based generator label.
    pub label: usize,
    /// Sorted vertex list.
    pub vertices: Vec<usize>,
}

/// `n` vertices and `d` labeled partitions of `[n]` into `k`-sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledHypergraph {
    n: usize,
    k: usize,
    d: usize,
    edges: Vec<Edge>,
    /// `incidence[v][i]` is the index of the label-`i` edge through `v`.
    incidence: Vec<Vec<usize>>,
}

impl LabeledHypergraph {
    /// Builds a hypergraph from explicit edges, checking that each label's
    /// edges partition `[n]` into `k`-sets.
    pub fn from_edges(n: usize, k: usize, d: usize, edges: Vec<Edge>) -> Result<Self> {
        if k < 2 || d == 0 {
            return Err(Error::invalid("need k >= 2 and d >= 1"));
        }
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|mut e| {
                e.vertices.sort_unstable();
                e
            })
            .collect();
        edges.sort_by(|a, b| (a.label, &a.vertices).cmp(&(b.label, &b.vertices)));
        let mut incidence = vec![vec![usize::MAX; d]; n];
        for (idx, e) in edges.iter().enumerate() {
            if e.label >= d {
                return Err(Error::invalid(format!("edge label {} out of range", e.label + 1)));
            }
            if e.vertices.len() != k {
                return Err(Error::invalid(format!("edge {idx} has {} vertices", e.vertices.len())));
            }
            if e.vertices.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("edge {idx} repeats a vertex")));
            }
            for &v in &e.vertices {
                if v >= n {
                    return Err(Error::invalid(format!("vertex {v} out of range")));
                }
                if incidence[v][e.label] != usize::MAX {
                    return Err(Error::invalid(format!(
                        "vertex {v} lies in two edges of label {}",
                        e.label + 1
                    )));
                }
                incidence[v][e.label] = idx;
            }
        }
        if incidence.iter().any(|row| row.contains(&usize::MAX)) {
            return Err(Error::invalid("some label does not cover every vertex"));
        }
        Ok(LabeledHypergraph { n, k, d, edges, incidence })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    /// Edge indices through `v`, one per label.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn edges_with_label(&self, label: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.label == label)
    }

    /// Checks that every label partitions the vertex set.
    pub fn check_partitions(&self) -> bool {
        (0..self.d).all(|i| {
            let mut seen = vec![false; self.n];
            let mut count = 0;
            for (_, e) in self.edges_with_label(i) {
                for &v in &e.vertices {
                    if seen[v] {
                        return false;
                    }
                    seen[v] = true;
                    count += 1;
                }
            }
            count == self.n
        })
    }
}

/// One labeled edge per generator orbit, ordered by label then minimal vertex.
pub fn build_hypergraph(hom: &UniformHom) -> LabeledHypergraph {
    let p = hom.params();
    let mut edges = Vec::with_capacity(p.d * p.n / p.k);
    let mut incidence = vec![vec![0usize; p.d]; p.n];
    for i in 0..p.d {
        let perm = hom.image(i);
        let mut seen = vec![false; p.n];
        for start in 0..p.n {
            if seen[start] {
                continue;
            }
            let mut vertices = Vec::with_capacity(p.k);
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                vertices.push(v);
                v = perm[v];
            }
            vertices.sort_unstable();
            for &u in &vertices {
                incidence[u][i] = edges.len();
            }
            edges.push(Edge { label: i, vertices });
        }
    }
    LabeledHypergraph { n: p.n, k: p.k, d: p.d, edges, incidence }
}

/// A 0/1 vertex coloring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coloring {
    bits: Vec<u8>,
}

impl Coloring {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("coloring entries must be 0 or 1"));
        }
        Ok(Coloring { bits })
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        Coloring { bits }
    }

    pub fn zeros(n: usize) -> Self {
        Coloring { bits: vec![0; n] }
    }

    /// `0...01...1` with `n/2` of each color.
    pub fn canonical_equitable(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::invalid("equitable coloring needs even n"));
        }
        Ok(Coloring { bits: (0..n).map(|v| u8::from(v >= n / 2)).collect() })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, v: usize) -> u8 {
        self.bits[v]
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn equitable(&self) -> bool {
        2 * self.ones() == self.len()
    }

    pub fn complement(&self) -> Self {
        Coloring { bits: self.bits.iter().map(|b| 1 - b).collect() }
    }

    pub fn class(&self, color: u8) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.bits[v] == color).collect()
    }
}

impl FromStr for Coloring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::invalid(format!("bad coloring character {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Coloring { bits })
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn check_len(g: &LabeledHypergraph, c: &Coloring) -> Result<()> {
    if c.len() != g.n() {
        return Err(Error::invalid(format!(
            "coloring has length {}, hypergraph has {} vertices",
            c.len(),
            g.n()
        )));
    }
    Ok(())
}

/// Number of ones on an edge.
pub fn ones_on(edge: &Edge, c: &Coloring) -> usize {
    edge.vertices.iter().filter(|&&v| c.get(v) == 1).count()
}

pub fn monochromatic_edge_count(g: &LabeledHypergraph, c: &Coloring) -> Result<usize> {
    check_len(g, c)?;
    Ok(g
        .edges()
        .iter()
        .filter(|e| {
            let j = ones_on(e, c);
            j == 0 || j == g.k()
        })
        .count())
}

/// At most `εn` monochromatic edges.
pub fn is_eps_proper(g: &LabeledHypergraph, c: &Coloring, eps: &Fraction) -> Result<bool> {
    let m = monochromatic_edge_count(g, c)? as i128;
    Ok(m * *eps.denom() as i128 <= *eps.numer() as i128 * g.n() as i128)
}

pub fn is_proper(g: &LabeledHypergraph, c: &Coloring) -> Result<bool> {
    Ok(monochromatic_edge_count(g, c)? == 0)
}

/// The unique vertex of `edge` whose color appears once on it, if any.
/// Only meaningful for `k >= 3`.
pub fn edge_support(edge: &Edge, c: &Coloring) -> Option<usize> {
    let j = ones_on(edge, c);
    let minority = if j == 1 {
        1
    } else if j + 1 == edge.vertices.len() {
        0
    } else {
        return None;
    };
    edge.vertices.iter().copied().find(|&v| c.get(v) == minority)
}

/// Critical edges with their supporting vertices, in edge order.
pub fn critical_edges(g: &LabeledHypergraph, c: &Coloring) -> Result<Vec<(usize, usize)>> {
    check_len(g, c)?;
    if g.k() < 3 {
        return Err(Error::Unsupported(
            "edge support is undefined for k = 2 (both vertices are singletons)".into(),
        ));
    }
    Ok(g
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(i, e)| edge_support(e, c).map(|v| (i, v)))
        .collect())
}

pub fn hamming_count(c1: &Coloring, c2: &Coloring) -> Result<usize> {
    if c1.len() != c2.len() {
        return Err(Error::invalid("colorings have different lengths"));
    }
    Ok(c1.bits.iter().zip(&c2.bits).filter(|(a, b)| a != b).count())
}

/// Normalized Hamming distance `d_n`.
pub fn hamming_distance(c1: &Coloring, c2: &Coloring) -> Result<Fraction> {
    let m = hamming_count(c1, c2)?;
    if c1.is_empty() {
        return Ok(Fraction::from_integer(0));
    }
    Ok(Fraction::new(m as i64, c1.len() as i64))
}

/// Overlap counts `e_ij = |P ∩ χ⁻¹(i) ∩ χ̃⁻¹(j)|` of one part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairTypeMatrix {
    pub e00: usize,
    pub e01: usize,
    pub e10: usize,
    pub e11: usize,
}

impl PairTypeMatrix {
    pub fn total(&self) -> usize {
        self.e00 + self.e01 + self.e10 + self.e11
    }

    /// Member of `𝓔`: bichromatic under both colorings.
    pub fn is_admissible(&self, k: usize) -> bool {
        let a = self.e10 + self.e11;
        let b = self.e01 + self.e11;
        self.total() == k && 0 < a && a < k && 0 < b && b < k
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.e00, self.e01, self.e10, self.e11]
    }
}

/// All of `𝓔` for edge size `k`, in lexicographic order.
pub fn admissible_pair_types(k: usize) -> Vec<PairTypeMatrix> {
    let mut out = Vec::new();
    for e00 in 0..=k {
        for e01 in 0..=k - e00 {
            for e10 in 0..=k - e00 - e01 {
                let e11 = k - e00 - e01 - e10;
                let m = PairTypeMatrix { e00, e01, e10, e11 };
                if m.is_admissible(k) {
                    out.push(m);
                }
            }
        }
    }
    out
}

pub fn pair_type_matrix(edge: &Edge, chi: &Coloring, chi_t: &Coloring) -> PairTypeMatrix {
    let mut m = PairTypeMatrix { e00: 0, e01: 0, e10: 0, e11: 0 };
    for &v in &edge.vertices {
        match (chi.get(v), chi_t.get(v)) {
            (0, 0) => m.e00 += 1,
            (0, _) => m.e01 += 1,
            (_, 0) => m.e10 += 1,
            _ => m.e11 += 1,
        }
    }
    m
}

/// Number of label-`label` parts of each pair type. Errors if some part is
/// not bichromatic under both colorings.
pub fn pair_type_counts(
    g: &LabeledHypergraph,
    chi: &Coloring,
    chi_t: &Coloring,
    label: usize,
) -> Result<BTreeMap<PairTypeMatrix, usize>> {
    check_len(g, chi)?;
    check_len(g, chi_t)?;
    if label >= g.d() {
        return Err(Error::invalid(format!("label {} out of range", label + 1)));
    }
    let mut counts = BTreeMap::new();
    for (idx, e) in g.edges_with_label(label) {
        let m = pair_type_matrix(e, chi, chi_t);
        if !m.is_admissible(g.k()) {
            return Err(Error::domain(format!(
                "part {idx} {:?} is not bichromatic under both colorings",
                e.vertices
            )));
        }
        *counts.entry(m).or_insert(0) += 1;
    }
    Ok(counts)
}

/// `t(ε) = n⁻¹ #{parts of type ε}` for one label.
pub fn pair_type_map(
    g: &LabeledHypergraph,
    chi: &Coloring,
    chi_t: &Coloring,
    label: usize,
) -> Result<BTreeMap<PairTypeMatrix, Fraction>> {
    let n = g.n() as i64;
    Ok(pair_type_counts(g, chi, chi_t, label)?
        .into_iter()
        .map(|(m, c)| (m, Fraction::new(c as i64, n)))
        .collect())
}

/// Type of a single partition with respect to a coloring: `counts[j]` parts
/// carry exactly `j` ones, so `t_j = counts[j] / n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeVector {
    pub n: usize,
    pub k: usize,
    pub counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(n: usize, k: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != k + 1 {
            return Err(Error::invalid(format!("type vector needs {} entries", k + 1)));
        }
        if counts.iter().sum::<usize>() * k != n {
            return Err(Error::invalid("type vector entries must sum to n/k parts"));
        }
        Ok(TypeVector { n, k, counts })
    }

    pub fn t(&self, j: usize) -> Fraction {
        Fraction::new(self.counts[j] as i64, self.n as i64)
    }

    /// Number of ones covered, `p(t) n`.
    pub fn ones(&self) -> usize {
        self.counts.iter().enumerate().map(|(j, c)| j * c).sum()
    }

    pub fn p(&self) -> Fraction {
        Fraction::new(self.ones() as i64, self.n as i64)
    }

    pub fn is_bichromatic(&self) -> bool {
        self.counts[0] == 0 && self.counts[self.k] == 0
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }
}

/// Per-label type counts: `counts[i][j]` label-`i` edges carry `j` ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorTypeMatrix {
    pub n: usize,
    pub k: usize,
    pub counts: Vec<Vec<usize>>,
}

impl GeneratorTypeMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Fraction {
        Fraction::new(self.counts[i][j] as i64, self.n as i64)
    }

    pub fn row(&self, i: usize) -> TypeVector {
        TypeVector { n: self.n, k: self.k, counts: self.counts[i].clone() }
    }

    /// `p(T̄)` if all rows share it.
    pub fn common_p(&self) -> Option<Fraction> {
        let ps: Vec<Fraction> = (0..self.counts.len()).map(|i| self.row(i).p()).collect();
        let first = *ps.first()?;
        ps.iter().all(|&p| p == first).then_some(first)
    }

    pub fn as_f64(&self) -> Vec<Vec<f64>> {
        (0..self.counts.len()).map(|i| self.row(i).as_f64()).collect()
    }
}

pub fn generator_type(g: &LabeledHypergraph, chi: &Coloring) -> Result<GeneratorTypeMatrix> {
    check_len(g, chi)?;
    let mut counts = vec![vec![0usize; g.k() + 1]; g.d()];
    for e in g.edges() {
        counts[e.label][ones_on(e, chi)] += 1;
    }
    Ok(GeneratorTypeMatrix { n: g.n(), k: g.k(), counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ModelParams, UniformHom};

    fn hom(k: usize, n: usize, images: Vec<Vec<usize>>) -> UniformHom {
        let params = ModelParams::new(images.len(), k, n).unwrap();
        UniformHom::new(params, images).unwrap()
    }

    fn four_cycle() -> LabeledHypergraph {
        build_hypergraph(&hom(2, 4, vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]))
    }

    fn c(s: &str) -> Coloring {
        s.parse().unwrap()
    }

    #[test]
    fn single_cycle_single_edge() {
        let g = build_hypergraph(&hom(3, 3, vec![vec![1, 2, 0]]));
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edge(0).vertices, vec![0, 1, 2]);
    }

    #[test]
    fn orbit_listing_of_four_cycle() {
        let g = four_cycle();
        let listed: Vec<(usize, Vec<usize>)> =
            g.edges().iter().map(|e| (e.label, e.vertices.clone())).collect();
        assert_eq!(
            listed,
            vec![(0, vec![0, 1]), (0, vec![2, 3]), (1, vec![0, 2]), (1, vec![1, 3])]
        );
        assert!(g.check_partitions());
    }

    #[test]
    fn from_edges_matches_build() {
        let g = four_cycle();
        let rebuilt = LabeledHypergraph::from_edges(4, 2, 2, g.edges().to_vec()).unwrap();
        assert_eq!(rebuilt, g);
        let bad = vec![Edge { label: 0, vertices: vec![0, 1] }, Edge { label: 0, vertices: vec![1, 2] }];
        assert!(LabeledHypergraph::from_edges(4, 2, 1, bad).is_err());
    }

    #[test]
    fn monochromatic_counts() {
        let g = build_hypergraph(&hom(2, 4, vec![vec![1, 0, 3, 2]]));
        assert_eq!(monochromatic_edge_count(&g, &c("0101")).unwrap(), 0);
        assert_eq!(monochromatic_edge_count(&g, &c("0011")).unwrap(), 2);
        assert_eq!(monochromatic_edge_count(&g, &Coloring::zeros(4)).unwrap(), 2);
        assert!(is_eps_proper(&g, &c("0011"), &Fraction::new(1, 2)).unwrap());
        assert!(!is_eps_proper(&g, &c("0011"), &Fraction::new(1, 4)).unwrap());
    }

    #[test]
    fn critical_support() {
        let g = build_hypergraph(&hom(3, 3, vec![vec![1, 2, 0]]));
        assert_eq!(critical_edges(&g, &c("100")).unwrap(), vec![(0, 0)]);
        assert_eq!(critical_edges(&g, &c("101")).unwrap(), vec![(0, 1)]);
        assert!(critical_edges(&g, &c("000")).unwrap().is_empty());
        assert!(matches!(
            critical_edges(&four_cycle(), &c("0101")),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn hamming() {
        assert_eq!(hamming_distance(&c("0101"), &c("0101")).unwrap(), Fraction::from_integer(0));
        assert_eq!(hamming_distance(&c("0101"), &c("1010")).unwrap(), Fraction::from_integer(1));
        assert_eq!(hamming_distance(&c("0101"), &c("0100")).unwrap(), Fraction::new(1, 4));
        assert!(hamming_distance(&c("01"), &c("010")).is_err());
    }

    #[test]
    fn pair_types() {
        let e = Edge { label: 0, vertices: vec![0, 1] };
        let m = pair_type_matrix(&e, &c("10"), &c("01"));
        assert_eq!(m, PairTypeMatrix { e00: 0, e01: 1, e10: 1, e11: 0 });

        let g = build_hypergraph(&hom(2, 4, vec![vec![1, 0, 3, 2]]));
        let map = pair_type_map(&g, &c("0101"), &c("0101"), 0).unwrap();
        assert!(map.keys().all(|m| m.e01 == 0 && m.e10 == 0));
        assert!(pair_type_map(&g, &c("0101"), &c("0011"), 0).is_err());
    }

    #[test]
    fn diagonal_single_type_at_n_2k() {
        let g = build_hypergraph(&hom(4, 8, vec![vec![1, 2, 3, 0, 5, 6, 7, 4]]));
        let chi = c("00110011");
        let map = pair_type_map(&g, &chi, &chi, 0).unwrap();
        assert_eq!(map.len(), 1);
        let (m, t) = map.into_iter().next().unwrap();
        assert_eq!(m, PairTypeMatrix { e00: 2, e01: 0, e10: 0, e11: 2 });
        assert_eq!(t, Fraction::new(1, 4));
    }

    #[test]
    fn admissible_set_size_k2() {
        // only (0,1,1,0) and (1,0,0,1)
        assert_eq!(admissible_pair_types(2).len(), 2);
    }

    #[test]
    fn generator_types() {
        let g = build_hypergraph(&hom(2, 4, vec![vec![1, 0, 3, 2]]));
        let t = generator_type(&g, &c("0101")).unwrap();
        assert_eq!(t.counts, vec![vec![0, 2, 0]]);
        assert_eq!(t.entry(0, 1), Fraction::new(1, 2));
        let z = generator_type(&g, &Coloring::zeros(4)).unwrap();
        assert_eq!(z.entry(0, 0), Fraction::new(1, 2));
    }
}
