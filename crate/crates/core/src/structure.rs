//! Core/attachment peeling of a properly colored hypergraph, the
//! expansivity scan `|E_T| <= 2|T|`, and rigidity violation search.
//!
//! A vertex supports an edge when it is the only vertex of its color on it.
//! `C_0 = V` and `C_{l+1}` keeps the vertices that support at least three
//! edges whose other vertices all lie in `C_l`. `A_l` collects vertices
//! outside `C_l` supporting some edge whose other vertices lie in
//! `C_{l-1}`, and `A'_l ⊆ A_l` those whose such edges meet the such edges of
//! another vertex of `A_l`.

use crate::count::cluster_radius;
use crate::count::search::{for_each, Reference, SearchSpec};
use crate::count::CountLimits;
use crate::error::{Error, Result};
use crate::hypergraph::{critical_edges, is_proper, Coloring, LabeledHypergraph};
use crate::numeric::Fraction;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Number of identical consecutive levels that count as stable.
pub const STABLE_REPEATS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreLevel {
    pub core: Vec<usize>,
    pub attached: Vec<usize>,
    pub attached_prime: Vec<usize>,
}

impl CoreLevel {
    /// `C_l ∪ A_l ∖ A'_l`, sorted.
    pub fn rigid_set(&self) -> Vec<usize> {
        let mut out = self.core.clone();
        out.extend(self.attached.iter().filter(|v| self.attached_prime.binary_search(v).is_err()));
        out.sort_unstable();
        out
    }

    pub fn rigid_len(&self) -> usize {
        self.core.len() + self.attached.len() - self.attached_prime.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreDecomposition {
    pub n: usize,
    /// `levels[l]` holds `(C_l, A_l, A'_l)`.
    pub levels: Vec<CoreLevel>,
    /// First `l` from which [`STABLE_REPEATS`] consecutive levels coincide.
    pub stabilized_at: Option<usize>,
}

impl CoreDecomposition {
    /// Level `l`, reading past the end as the last computed (stable) level.
    pub fn level(&self, l: usize) -> Result<&CoreLevel> {
        if l < self.levels.len() {
            return Ok(&self.levels[l]);
        }
        if self.stabilized_at.is_some() {
            return Ok(self.levels.last().expect("level 0 always exists"));
        }
        Err(Error::invalid(format!(
            "level {l} was not computed and the decomposition did not stabilize"
        )))
    }
}

/// Supported edges: `(support, other vertices)`.
struct Supported {
    support: Vec<usize>,
    others: Vec<Vec<usize>>,
    by_support: Vec<Vec<usize>>,
    /// Supported edges in which a vertex appears as a non-support vertex.
    by_member: Vec<Vec<usize>>,
    members: Vec<Vec<usize>>,
}

fn supported_edges(g: &LabeledHypergraph, chi: &Coloring) -> Result<Supported> {
    if !is_proper(g, chi)? {
        return Err(Error::domain("core decomposition needs a proper coloring"));
    }
    let crit = critical_edges(g, chi)?;
    let n = g.n();
    let mut s = Supported {
        support: Vec::with_capacity(crit.len()),
        others: Vec::with_capacity(crit.len()),
        by_support: vec![Vec::new(); n],
        by_member: vec![Vec::new(); n],
        members: Vec::with_capacity(crit.len()),
    };
    for (idx, (e, v)) in crit.into_iter().enumerate() {
        let verts = &g.edge(e).vertices;
        let others: Vec<usize> = verts.iter().copied().filter(|&u| u != v).collect();
        for &u in &others {
            s.by_member[u].push(idx);
        }
        s.by_support[v].push(idx);
        s.support.push(v);
        s.others.push(others);
        s.members.push(verts.clone());
    }
    Ok(s)
}

fn to_list(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v).collect()
}

/// `A_l` and `A'_l` from `C_l` and the edges good with respect to `C_{l-1}`.
fn attachment(s: &Supported, n: usize, core: &[bool], good: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let mut attached = vec![false; n];
    for (idx, &v) in s.support.iter().enumerate() {
        if good[idx] && !core[v] {
            attached[v] = true;
        }
    }
    // for every vertex, the first attached vertex whose good edge covers it,
    // and whether a second distinct one exists
    let mut first: Vec<Option<usize>> = vec![None; n];
    let mut shared = vec![false; n];
    for (idx, &v) in s.support.iter().enumerate() {
        if !good[idx] || !attached[v] {
            continue;
        }
        for &x in &s.members[idx] {
            match first[x] {
                None => first[x] = Some(v),
                Some(w) if w != v => shared[x] = true,
                _ => {}
            }
        }
    }
    let mut prime = vec![false; n];
    for (idx, &v) in s.support.iter().enumerate() {
        if good[idx] && attached[v] && s.members[idx].iter().any(|&x| shared[x]) {
            prime[v] = true;
        }
    }
    (attached, prime)
}

fn level_from_masks(core: &[bool], attached: &[bool], prime: &[bool]) -> CoreLevel {
    CoreLevel { core: to_list(core), attached: to_list(attached), attached_prime: to_list(prime) }
}

fn stable_suffix(levels: &[CoreLevel]) -> Option<usize> {
    let l = levels.len();
    if l >= STABLE_REPEATS && levels[l - STABLE_REPEATS..].windows(2).all(|w| w[0] == w[1]) {
        Some(l - STABLE_REPEATS)
    } else {
        None
    }
}

/// Peels levels `0..=l_max`, stopping early once stable. Each step only
/// revisits edges touching vertices that just left the core.
pub fn core_decomposition(g: &LabeledHypergraph, chi: &Coloring, l_max: usize) -> Result<CoreDecomposition> {
    let s = supported_edges(g, chi)?;
    let n = g.n();
    let m = s.support.len();
    let mut core = vec![true; n];
    // outside[e]: other vertices of e not in the current core
    let mut outside = vec![0usize; m];
    let mut good_count: Vec<usize> = s.by_support.iter().map(Vec::len).collect();
    let none = vec![false; n];
    let mut levels = vec![level_from_masks(&core, &none, &none)];
    let mut stabilized_at = None;
    for _ in 1..=l_max {
        // edges good with respect to the previous core
        let good_prev: Vec<bool> = outside.iter().map(|&c| c == 0).collect();
        let next: Vec<bool> = (0..n).map(|v| core[v] && good_count[v] >= 3).collect();
        for v in 0..n {
            if core[v] && !next[v] {
                for &idx in &s.by_member[v] {
                    if outside[idx] == 0 {
                        good_count[s.support[idx]] -= 1;
                    }
                    outside[idx] += 1;
                }
            }
        }
        if next.iter().zip(&core).any(|(a, b)| *a && !*b) {
            return Err(Error::Solver("core grew between levels".into()));
        }
        core = next;
        let (attached, prime) = attachment(&s, n, &core, &good_prev);
        levels.push(level_from_masks(&core, &attached, &prime));
        if let Some(at) = stable_suffix(&levels) {
            stabilized_at = Some(at);
            break;
        }
    }
    Ok(CoreDecomposition { n, levels, stabilized_at })
}

/// The same levels recomputed from the definitions at every step.
pub fn core_decomposition_reference(
    g: &LabeledHypergraph,
    chi: &Coloring,
    l_max: usize,
) -> Result<CoreDecomposition> {
    let s = supported_edges(g, chi)?;
    let n = g.n();
    let good_for = |core: &[bool]| -> Vec<bool> {
        s.others.iter().map(|o| o.iter().all(|&u| core[u])).collect()
    };
    let mut core = vec![true; n];
    let none = vec![false; n];
    let mut levels = vec![level_from_masks(&core, &none, &none)];
    let mut stabilized_at = None;
    for _ in 1..=l_max {
        let good = good_for(&core);
        let mut next = vec![false; n];
        for v in 0..n {
            let c = s.by_support[v].iter().filter(|&&idx| good[idx]).count();
            next[v] = c >= 3;
        }
        let mut attached = vec![false; n];
        for v in 0..n {
            attached[v] = !next[v] && s.by_support[v].iter().any(|&idx| good[idx]);
        }
        let mut prime = vec![false; n];
        for v in 0..n {
            if !attached[v] {
                continue;
            }
            'outer: for &ev in s.by_support[v].iter().filter(|&&i| good[i]) {
                for w in (0..n).filter(|&w| w != v && attached[w]) {
                    for &ew in s.by_support[w].iter().filter(|&&i| good[i]) {
                        if s.members[ev].iter().any(|x| s.members[ew].contains(x)) {
                            prime[v] = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        core = next;
        levels.push(level_from_masks(&core, &attached, &prime));
        if let Some(at) = stable_suffix(&levels) {
            stabilized_at = Some(at);
            break;
        }
    }
    Ok(CoreDecomposition { n, levels, stabilized_at })
}

/// `|C_l ∪ A_l ∖ A'_l| / n`.
pub fn density_report(g: &LabeledHypergraph, chi: &Coloring, l: usize) -> Result<Fraction> {
    let dec = core_decomposition(g, chi, l)?;
    let level = dec.level(l)?;
    Ok(Fraction::new(level.rigid_len() as i64, g.n() as i64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub set: Vec<usize>,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansivityReport {
    pub t_max: usize,
    pub subsets_checked: u64,
    /// `max |E_T| - 2|T|` over `1 <= |T| <= t_max`.
    pub max_excess: i64,
    /// Lexicographically first set attaining `max_excess`.
    pub argmax: Vec<usize>,
    pub violations: u64,
    /// Up to [`MAX_LISTED_VIOLATIONS`] violating sets in lexicographic order.
    pub listed: Vec<Violation>,
    /// Size cap of the randomized search, `floor(2^{-k/2} n)`.
    pub random_size_cap: usize,
    pub random_trials: usize,
    /// Best excess found by the randomized search above `t_max`, if it ran.
    pub random_best_excess: Option<i64>,
    pub random_violations: Vec<Violation>,
}

pub const MAX_LISTED_VIOLATIONS: usize = 100;

/// Largest number of subsets the exhaustive scan will visit.
pub const EXPANSIVITY_SUBSET_LIMIT: u64 = 200_000_000;

struct Expander<'a> {
    s: &'a Supported,
}

impl Expander<'_> {
    /// `|E_T|`: the sets `E_v` are disjoint, so count per support vertex.
    fn edges(&self, t: &[usize], in_t: &[bool]) -> usize {
        t.iter()
            .map(|&v| {
                self.s.by_support[v]
                    .iter()
                    .filter(|&&idx| self.s.others[idx].iter().any(|&u| in_t[u]))
                    .count()
            })
            .sum()
    }
}

fn binom_u64(n: u64, r: u64) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[derive(Default)]
struct ScanAcc {
    checked: u64,
    best: Option<(i64, Vec<usize>)>,
    violations: u64,
    listed: Vec<Violation>,
}

impl ScanAcc {
    fn record(&mut self, t: &[usize], edges: usize) {
        self.checked += 1;
        let excess = edges as i64 - 2 * t.len() as i64;
        if self.best.as_ref().is_none_or(|(b, _)| excess > *b) {
            self.best = Some((excess, t.to_vec()));
        }
        if excess > 0 {
            self.violations += 1;
            if self.listed.len() < MAX_LISTED_VIOLATIONS {
                self.listed.push(Violation { set: t.to_vec(), edges });
            }
        }
    }

    /// Merges a later block; ties keep the earlier (lexicographically smaller) set.
    fn merge(mut self, other: ScanAcc) -> ScanAcc {
        self.checked += other.checked;
        self.violations += other.violations;
        if let Some((e, t)) = other.best {
            if self.best.as_ref().is_none_or(|(b, _)| e > *b) {
                self.best = Some((e, t));
            }
        }
        for v in other.listed {
            if self.listed.len() < MAX_LISTED_VIOLATIONS {
                self.listed.push(v);
            }
        }
        self
    }
}

fn scan_from(ex: &Expander, n: usize, t_max: usize, t: &mut Vec<usize>, in_t: &mut [bool], acc: &mut ScanAcc) {
    acc.record(t, ex.edges(t, in_t));
    if t.len() == t_max {
        return;
    }
    let start = t.last().map_or(0, |&v| v + 1);
    for v in start..n {
        t.push(v);
        in_t[v] = true;
        scan_from(ex, n, t_max, t, in_t, acc);
        in_t[v] = false;
        t.pop();
    }
}

/// Exhaustive `|E_T| - 2|T|` over all `T` with `1 <= |T| <= t_max`, then
/// `random_trials` greedy growths from supported edges up to
/// `floor(2^{-k/2} n)` vertices. The randomized part is a heuristic and can
/// miss violations.
pub fn expansivity_scan<R: Rng + ?Sized>(
    g: &LabeledHypergraph,
    chi: &Coloring,
    t_max: usize,
    random_trials: usize,
    rng: &mut R,
) -> Result<ExpansivityReport> {
    let s = supported_edges(g, chi)?;
    let n = g.n();
    if t_max == 0 {
        return Err(Error::invalid("t_max must be at least 1"));
    }
    let total: u64 = (1..=t_max.min(n)).map(|t| binom_u64(n as u64, t as u64)).fold(0u64, u64::saturating_add);
    if total > EXPANSIVITY_SUBSET_LIMIT {
        return Err(Error::scale("expansivity subsets", total, EXPANSIVITY_SUBSET_LIMIT));
    }
    let ex = Expander { s: &s };
    let acc = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut acc = ScanAcc::default();
            let mut in_t = vec![false; n];
            in_t[v] = true;
            scan_from(&ex, n, t_max.min(n), &mut vec![v], &mut in_t, &mut acc);
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ScanAcc::default(), ScanAcc::merge);
    let (max_excess, argmax) = acc.best.unwrap_or((0, Vec::new()));

    let cap = (1..=n).take_while(|&m| ((m * m) as u128) << g.k() <= (n * n) as u128).last().unwrap_or(0);
    debug_assert_eq!(cap, cluster_radius(n, g.k()));
    let mut random_best = None;
    let mut random_violations = Vec::new();
    if cap > t_max && !s.support.is_empty() {
        for _ in 0..random_trials {
            let (best, viol) = greedy_growth(&ex, n, cap, t_max, rng);
            random_best = Some(random_best.map_or(best, |b: i64| b.max(best)));
            if let Some(v) = viol {
                if random_violations.len() < MAX_LISTED_VIOLATIONS {
                    random_violations.push(v);
                }
            }
        }
    }
    Ok(ExpansivityReport {
        t_max,
        subsets_checked: acc.checked,
        max_excess,
        argmax,
        violations: acc.violations,
        listed: acc.listed,
        random_size_cap: cap,
        random_trials,
        random_best_excess: random_best,
        random_violations,
    })
}

/// Grows `T` from a random supported edge, adding the neighbor that most
/// increases `|E_T|`. Returns the best excess seen above `t_max` and the
/// first violating set.
fn greedy_growth<R: Rng + ?Sized>(
    ex: &Expander,
    n: usize,
    cap: usize,
    t_max: usize,
    rng: &mut R,
) -> (i64, Option<Violation>) {
    let s = ex.s;
    let idx = rng.gen_range(0..s.support.len());
    let mut t = vec![s.support[idx], *s.others[idx].choose(rng).expect("k >= 3")];
    let mut in_t = vec![false; n];
    for &v in &t {
        in_t[v] = true;
    }
    let mut best = i64::MIN;
    let mut violation = None;
    while t.len() < cap {
        let mut candidates: Vec<usize> = t
            .iter()
            .flat_map(|&v| s.by_support[v].iter().chain(&s.by_member[v]))
            .flat_map(|&i| s.members[i].iter().copied())
            .filter(|&u| !in_t[u])
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            break;
        }
        candidates.shuffle(rng);
        let mut pick = candidates[0];
        let mut pick_edges = 0;
        for &u in &candidates {
            t.push(u);
            in_t[u] = true;
            let e = ex.edges(&t, &in_t);
            in_t[u] = false;
            t.pop();
            if e > pick_edges {
                pick = u;
                pick_edges = e;
            }
        }
        t.push(pick);
        in_t[pick] = true;
        if t.len() > t_max {
            let excess = pick_edges as i64 - 2 * t.len() as i64;
            best = best.max(excess);
            if excess > 0 && violation.is_none() {
                let mut set = t.clone();
                set.sort_unstable();
                violation = Some(Violation { set, edges: pick_edges });
            }
        }
    }
    (best, violation)
}

/// A proper coloring disagreeing with `chi` on between `ceil(ρn)` and
/// `floor(2^{-k/2} n)` vertices of `r`, if one exists. `None` means `r` is
/// `ρ`-rigid.
pub fn rigidity_violation_search(
    g: &LabeledHypergraph,
    chi: &Coloring,
    r: &[usize],
    rho: &Fraction,
) -> Result<Option<Coloring>> {
    let n = g.n();
    if chi.len() != n {
        return Err(Error::invalid("coloring length does not match the hypergraph"));
    }
    if *rho < Fraction::from_integer(0) {
        return Err(Error::invalid("ρ must be non-negative"));
    }
    if let Some(&v) = r.iter().find(|&&v| v >= n) {
        return Err(Error::invalid(format!("vertex {v} is out of range")));
    }
    CountLimits::default().check(n, 0)?;
    let scaled = *rho * Fraction::from_integer(n as i64);
    let lo = scaled.ceil().to_integer().max(0) as usize;
    let hi = cluster_radius(n, g.k()).min(r.len());
    if lo > hi {
        return Ok(None);
    }
    let mut mask = vec![false; n];
    for &v in r {
        mask[v] = true;
    }
    let spec = SearchSpec {
        budget: 0,
        ones: None,
        reference: Some(Reference { coloring: chi.clone(), mask: Some(mask), disagreements: (lo, hi) }),
    };
    let mut witness = None;
    for_each(g, &spec, |c| {
        witness = Some(c.clone());
        false
    });
    Ok(witness)
}
