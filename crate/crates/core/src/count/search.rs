//! Backtracking over 2-colorings of a labeled hypergraph.
//!
//! Vertices are branched in order of residual degree. Once the budget of
//! monochromatic edges is used up, an edge whose `k-1` colored vertices
//! agree forces its last vertex. When no remaining edge can push the count
//! over budget, the free vertices are counted in closed form.

use crate::hypergraph::{Coloring, LabeledHypergraph};

/// What a search counts or lists.
#[derive(Debug, Clone)]
pub struct SearchSpec {
    /// Maximum number of monochromatic edges.
    pub budget: usize,
    /// Inclusive range for the number of ones.
    pub ones: Option<(usize, usize)>,
    pub reference: Option<Reference>,
}

/// Constrains disagreements with a reference coloring on a vertex subset.
#[derive(Debug, Clone)]
pub struct Reference {
    pub coloring: Coloring,
    /// `None` means every vertex.
    pub mask: Option<Vec<bool>>,
    /// Inclusive range of disagreements on the mask.
    pub disagreements: (usize, usize),
}

impl SearchSpec {
    pub fn proper() -> Self {
        SearchSpec { budget: 0, ones: None, reference: None }
    }

    pub fn equitable(n: usize) -> Self {
        SearchSpec { budget: 0, ones: Some((n / 2, n / 2)), reference: None }
    }
}

/// Counts indexed by `(ones, disagreements)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    width: usize,
    cells: Vec<u128>,
}

impl Histogram {
    fn new(n: usize) -> Self {
        Histogram { width: n + 1, cells: vec![0; (n + 1) * (n + 1)] }
    }

    pub fn get(&self, ones: usize, dis: usize) -> u128 {
        self.cells[ones * self.width + dis]
    }

    pub fn total(&self) -> u128 {
        self.cells.iter().sum()
    }

    /// Sum over all ones counts, indexed by disagreements.
    pub fn by_disagreement(&self) -> Vec<u128> {
        (0..self.width).map(|m| (0..self.width).map(|o| self.get(o, m)).sum()).collect()
    }

    pub fn by_ones(&self) -> Vec<u128> {
        (0..self.width).map(|o| (0..self.width).map(|m| self.get(o, m)).sum()).collect()
    }
}

const FREE: i8 = -1;

struct State<'a> {
    g: &'a LabeledHypergraph,
    k: usize,
    budget: usize,
    ones_range: (usize, usize),
    dis_range: (usize, usize),
    mask: Vec<bool>,
    refc: Vec<u8>,
    color: Vec<i8>,
    edge_zeros: Vec<usize>,
    edge_ones: Vec<usize>,
    violations: usize,
    ones: usize,
    assigned: usize,
    dis: usize,
    /// Free masked vertices by reference color.
    free_masked: [usize; 2],
    trail: Vec<usize>,
}

impl<'a> State<'a> {
    fn new(g: &'a LabeledHypergraph, spec: &SearchSpec) -> Self {
        let n = g.n();
        let (mask, refc, dis_range) = match &spec.reference {
            Some(r) => (
                r.mask.clone().unwrap_or_else(|| vec![true; n]),
                r.coloring.bits().to_vec(),
                r.disagreements,
            ),
            None => (vec![false; n], vec![0; n], (0, 0)),
        };
        let mut free_masked = [0; 2];
        for v in 0..n {
            if mask[v] {
                free_masked[refc[v] as usize] += 1;
            }
        }
        let m = g.edges().len();
        State {
            g,
            k: g.k(),
            budget: spec.budget,
            ones_range: spec.ones.unwrap_or((0, n)),
            dis_range,
            mask,
            refc,
            color: vec![FREE; n],
            edge_zeros: vec![0; m],
            edge_ones: vec![0; m],
            violations: 0,
            ones: 0,
            assigned: 0,
            dis: 0,
            free_masked,
            trail: Vec::with_capacity(n),
        }
    }

    fn n(&self) -> usize {
        self.color.len()
    }

    fn assign(&mut self, v: usize, c: u8) {
        debug_assert_eq!(self.color[v], FREE);
        self.color[v] = c as i8;
        self.assigned += 1;
        self.ones += c as usize;
        if self.mask[v] {
            self.free_masked[self.refc[v] as usize] -= 1;
            if self.refc[v] != c {
                self.dis += 1;
            }
        }
        for &e in self.g.incident(v) {
            if c == 0 {
                self.edge_zeros[e] += 1;
                if self.edge_zeros[e] == self.k {
                    self.violations += 1;
                }
            } else {
                self.edge_ones[e] += 1;
                if self.edge_ones[e] == self.k {
                    self.violations += 1;
                }
            }
        }
        self.trail.push(v);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            let c = self.color[v] as u8;
            self.color[v] = FREE;
            self.assigned -= 1;
            self.ones -= c as usize;
            if self.mask[v] {
                self.free_masked[self.refc[v] as usize] += 1;
                if self.refc[v] != c {
                    self.dis -= 1;
                }
            }
            for &e in self.g.incident(v) {
                if c == 0 {
                    if self.edge_zeros[e] == self.k {
                        self.violations -= 1;
                    }
                    self.edge_zeros[e] -= 1;
                } else {
                    if self.edge_ones[e] == self.k {
                        self.violations -= 1;
                    }
                    self.edge_ones[e] -= 1;
                }
            }
        }
    }

    fn feasible(&self) -> bool {
        let free = self.n() - self.assigned;
        let free_m = self.free_masked[0] + self.free_masked[1];
        self.violations <= self.budget
            && self.ones <= self.ones_range.1
            && self.ones + free >= self.ones_range.0
            && self.dis <= self.dis_range.1
            && self.dis + free_m >= self.dis_range.0
    }

    /// Forces vertices while the budget is exhausted. Returns false on conflict.
    fn propagate(&mut self) -> bool {
        loop {
            if self.violations < self.budget {
                return true;
            }
            let mut changed = false;
            for e in 0..self.edge_zeros.len() {
                let (z, o) = (self.edge_zeros[e], self.edge_ones[e]);
                if z + o != self.k - 1 || (z != self.k - 1 && o != self.k - 1) {
                    continue;
                }
                let u = self.g.edge(e).vertices.iter().copied().find(|&u| self.color[u] == FREE);
                let u = u.expect("edge with k-1 colored vertices has a free one");
                self.assign(u, if z == self.k - 1 { 1 } else { 0 });
                if !self.feasible() {
                    return false;
                }
                changed = true;
            }
            if !changed {
                return true;
            }
        }
    }

    /// Edges that could still become monochromatic.
    fn live_edges(&self) -> usize {
        (0..self.edge_zeros.len())
            .filter(|&e| {
                let (z, o) = (self.edge_zeros[e], self.edge_ones[e]);
                !(z > 0 && o > 0) && z + o < self.k
            })
            .count()
    }

    fn pick_vertex(&self) -> usize {
        let mut best = usize::MAX;
        let mut best_score = 0usize;
        for v in 0..self.n() {
            if self.color[v] != FREE {
                continue;
            }
            let score: usize = self
                .g
                .incident(v)
                .iter()
                .filter(|&&e| !(self.edge_zeros[e] > 0 && self.edge_ones[e] > 0))
                .map(|&e| 1 + self.edge_zeros[e] + self.edge_ones[e])
                .sum();
            if best == usize::MAX || score > best_score {
                best = v;
                best_score = score;
            }
        }
        best
    }
}

trait Sink {
    /// Receives a state whose free vertices are unconstrained by edges.
    /// Returns false to stop the search.
    fn block(&mut self, s: &State<'_>) -> bool;
}

fn dfs<S: Sink>(s: &mut State<'_>, sink: &mut S) -> bool {
    let mark = s.trail.len();
    let mut keep_going = true;
    if s.feasible() && s.propagate() {
        if s.violations + s.live_edges() <= s.budget {
            keep_going = sink.block(s);
        } else {
            let v = s.pick_vertex();
            for c in [0u8, 1] {
                let inner = s.trail.len();
                s.assign(v, c);
                keep_going = dfs(s, sink);
                s.undo_to(inner);
                if !keep_going {
                    break;
                }
            }
        }
    }
    s.undo_to(mark);
    keep_going
}

struct CountSink {
    binom: Vec<Vec<u128>>,
    hist: Histogram,
}

impl Sink for CountSink {
    fn block(&mut self, s: &State<'_>) -> bool {
        let [m0, m1] = s.free_masked;
        let u = s.n() - s.assigned - m0 - m1;
        let b = &self.binom;
        // ones among free vertices of each class: x (masked, reference 0),
        // y (masked, reference 1), z (unmasked)
        for x in 0..=m0 {
            for y in 0..=m1 {
                let dis = s.dis + x + (m1 - y);
                if dis < s.dis_range.0 || dis > s.dis_range.1 {
                    continue;
                }
                let w = b[m0][x] * b[m1][y];
                for z in 0..=u {
                    let ones = s.ones + x + y + z;
                    if ones < s.ones_range.0 || ones > s.ones_range.1 {
                        continue;
                    }
                    self.hist.cells[ones * self.hist.width + dis] += w * b[u][z];
                }
            }
        }
        true
    }
}

struct ListSink<F: FnMut(&Coloring) -> bool> {
    visit: F,
}

impl<F: FnMut(&Coloring) -> bool> ListSink<F> {
    fn expand(&mut self, s: &State<'_>, bits: &mut Vec<u8>, free: &[usize], ones: usize, dis: usize) -> bool {
        match free.split_first() {
            None => {
                if ones < s.ones_range.0 || ones > s.ones_range.1 || dis < s.dis_range.0 || dis > s.dis_range.1 {
                    return true;
                }
                (self.visit)(&Coloring::from_bits_unchecked(bits.clone()))
            }
            Some((&v, rest)) => {
                for c in [0u8, 1] {
                    bits[v] = c;
                    let d = dis + usize::from(s.mask[v] && s.refc[v] != c);
                    if !self.expand(s, bits, rest, ones + c as usize, d) {
                        return false;
                    }
                }
                true
            }
        }
    }
}

impl<F: FnMut(&Coloring) -> bool> Sink for ListSink<F> {
    fn block(&mut self, s: &State<'_>) -> bool {
        let mut bits: Vec<u8> = s.color.iter().map(|&c| c.max(0) as u8).collect();
        let free: Vec<usize> = (0..s.n()).filter(|&v| s.color[v] == FREE).collect();
        self.expand(s, &mut bits, &free, s.ones, s.dis)
    }
}

fn pascal(n: usize) -> Vec<Vec<u128>> {
    let mut b = vec![vec![0u128; n + 1]; n + 1];
    for i in 0..=n {
        b[i][0] = 1;
        for j in 1..=i {
            b[i][j] = b[i - 1][j - 1] + if j < i { b[i - 1][j] } else { 0 };
        }
    }
    b
}

/// Counts colorings satisfying `spec`, split by ones and disagreements.
pub fn histogram(g: &LabeledHypergraph, spec: &SearchSpec) -> Histogram {
    let mut state = State::new(g, spec);
    let mut sink = CountSink { binom: pascal(g.n()), hist: Histogram::new(g.n()) };
    dfs(&mut state, &mut sink);
    sink.hist
}

/// Calls `visit` on each coloring satisfying `spec` until it returns false.
pub fn for_each<F: FnMut(&Coloring) -> bool>(g: &LabeledHypergraph, spec: &SearchSpec, visit: F) {
    let mut state = State::new(g, spec);
    let mut sink = ListSink { visit };
    dfs(&mut state, &mut sink);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{ModelParams, UniformHom};
    use crate::hypergraph::{build_hypergraph, monochromatic_edge_count};
    use crate::rng::RngState;
    use crate::samplers::sample_uniform_hom;

    fn brute(g: &LabeledHypergraph, spec: &SearchSpec) -> Histogram {
        let n = g.n();
        let mut h = Histogram::new(n);
        for mask in 0u64..(1 << n) {
            let c = Coloring::new((0..n).map(|v| ((mask >> v) & 1) as u8).collect()).unwrap();
            if monochromatic_edge_count(g, &c).unwrap() > spec.budget {
                continue;
            }
            let ones = c.ones();
            if let Some((lo, hi)) = spec.ones {
                if ones < lo || ones > hi {
                    continue;
                }
            }
            let mut dis = 0;
            if let Some(r) = &spec.reference {
                dis = (0..n)
                    .filter(|&v| r.mask.as_ref().is_none_or(|m| m[v]) && r.coloring.get(v) != c.get(v))
                    .count();
                if dis < r.disagreements.0 || dis > r.disagreements.1 {
                    continue;
                }
            }
            h.cells[ones * h.width + dis] += 1;
        }
        h
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        for (seed, (d, k, n)) in [(2, 2, 8), (3, 3, 12), (2, 3, 12), (4, 4, 12), (3, 2, 14)].into_iter().enumerate() {
            let params = ModelParams::uniform(d, k, n).unwrap();
            let hom = sample_uniform_hom(&params, &mut RngState::new(seed as u64, 0).rng()).unwrap();
            let g = build_hypergraph(&hom);
            let reference = Coloring::canonical_equitable(n).unwrap();
            let mask: Vec<bool> = (0..n).map(|v| v % 3 != 0).collect();
            let specs = [
                SearchSpec::proper(),
                SearchSpec::equitable(n),
                SearchSpec { budget: 2, ones: None, reference: None },
                SearchSpec {
                    budget: 1,
                    ones: Some((n / 2 - 1, n / 2 + 1)),
                    reference: Some(Reference {
                        coloring: reference.clone(),
                        mask: Some(mask.clone()),
                        disagreements: (1, n / 3),
                    }),
                },
            ];
            for spec in &specs {
                assert_eq!(histogram(&g, spec), brute(&g, spec), "d={d} k={k} n={n} spec={spec:?}");
                let mut listed = 0u128;
                for_each(&g, spec, |c| {
                    assert!(monochromatic_edge_count(&g, c).unwrap() <= spec.budget);
                    listed += 1;
                    true
                });
                assert_eq!(listed, histogram(&g, spec).total());
            }
        }
    }

    #[test]
    fn four_cycle_has_two_proper_colorings() {
        let params = ModelParams::new(2, 2, 4).unwrap();
        let hom = UniformHom::new(params, vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]]).unwrap();
        let g = build_hypergraph(&hom);
        assert_eq!(histogram(&g, &SearchSpec::proper()).total(), 2);
    }

    #[test]
    fn listing_stops_early() {
        let params = ModelParams::uniform(1, 2, 8).unwrap();
        let hom = sample_uniform_hom(&params, &mut RngState::new(0, 0).rng()).unwrap();
        let g = build_hypergraph(&hom);
        let mut seen = 0;
        for_each(&g, &SearchSpec::proper(), |_| {
            seen += 1;
            seen < 3
        });
        assert_eq!(seen, 3);
    }
}
