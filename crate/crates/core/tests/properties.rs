use num_bigint::BigUint;
use proptest::prelude::*;
use sofic_lab::analytics::{core_fixed_point, delta0_of_delta, delta_of_delta0};
use sofic_lab::count::{count_at_distance, count_equitable, count_proper, distance_histogram};
use sofic_lab::group::{evaluate_word, CyclicFreeProduct};
use sofic_lab::hypergraph::{
    build_hypergraph, critical_edges, generator_type, hamming_count, is_proper, monochromatic_edge_count,
};
use sofic_lab::numeric::Fraction;
use sofic_lab::samplers::{sample_planted_hom, sample_uniform_hom};
use sofic_lab::structure::{core_decomposition, core_decomposition_reference};
use sofic_lab::{Coloring, ModelParams, RngState, UniformHom};
use std::collections::HashSet;

fn uniform(d: usize, k: usize, parts: usize, seed: u64) -> UniformHom {
    let p = ModelParams::uniform(d, k, k * parts).unwrap();
    sample_uniform_hom(&p, &mut RngState::new(seed, 0).rng()).unwrap()
}

/// Planted instance with `n = 2k * half_parts`, so `n` is even and divisible by `k`.
fn planted(d: usize, k: usize, half_parts: usize, seed: u64) -> (UniformHom, Coloring) {
    let n = 2 * k * half_parts;
    let p = ModelParams::planted(d, k, n).unwrap();
    let chi = Coloring::canonical_equitable(n).unwrap();
    let hom = sample_planted_hom(&p, &chi, &mut RngState::new(seed, 1).rng()).unwrap();
    (hom, chi)
}

fn letters(d: usize) -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0..d, -7i64..8), 0..12)
}

fn coloring(n: usize) -> impl Strategy<Value = Coloring> {
    prop::collection::vec(0u8..2, n).prop_map(|b| Coloring::new(b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_orbit_has_size_k(d in 1usize..4, k in 2usize..6, parts in 1usize..6, seed: u64) {
        let hom = uniform(d, k, parts, seed);
        for g in 0..d {
            let img = hom.image(g);
            for v in 0..hom.n() {
                let mut w = img[v];
                let mut len = 1;
                while w != v {
                    w = img[w];
                    len += 1;
                }
                prop_assert_eq!(len, k);
            }
        }
    }

    #[test]
    fn reduction_is_idempotent(k in 2usize..6, w in letters(3)) {
        let grp = CyclicFreeProduct { d: 3, k };
        let once = grp.reduce(w).unwrap();
        let letters: Vec<(usize, i64)> = once.syllables().iter().map(|s| (s.generator, s.power as i64)).collect();
        prop_assert_eq!(grp.reduce(letters).unwrap(), once.clone());
        for pair in once.syllables().windows(2) {
            prop_assert_ne!(pair[0].generator, pair[1].generator);
        }
    }

    #[test]
    fn evaluation_is_a_homomorphism(
        k in 2usize..5, parts in 1usize..5, seed: u64, a in letters(2), b in letters(2), v in 0usize..20,
    ) {
        let hom = uniform(2, k, parts, seed);
        let grp = CyclicFreeProduct { d: 2, k };
        let (wa, wb) = (grp.reduce(a).unwrap(), grp.reduce(b).unwrap());
        let v = v % hom.n();
        let lhs = evaluate_word(&hom, &grp.mul(&wa, &wb), v).unwrap();
        let rhs = evaluate_word(&hom, &wa, evaluate_word(&hom, &wb, v).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        let inv = grp.inverse(&wa);
        prop_assert_eq!(evaluate_word(&hom, &inv, evaluate_word(&hom, &wa, v).unwrap()).unwrap(), v);
    }

    #[test]
    fn hypergraph_partitions_every_label(d in 1usize..4, k in 2usize..6, parts in 1usize..6, seed: u64) {
        let g = build_hypergraph(&uniform(d, k, parts, seed));
        prop_assert!(g.check_partitions());
        prop_assert_eq!(g.edges().len(), d * parts);
    }

    #[test]
    fn properness_three_ways(d in 1usize..4, k in 2usize..5, seed: u64, bits in coloring(12)) {
        let g = build_hypergraph(&uniform(d, k, 12 / k, seed));
        let proper = is_proper(&g, &bits).unwrap();
        let mono = monochromatic_edge_count(&g, &bits).unwrap();
        let t = generator_type(&g, &bits).unwrap();
        let extremes_empty = t.counts.iter().all(|row| row[0] == 0 && row[k] == 0);
        prop_assert_eq!(proper, mono == 0);
        prop_assert_eq!(proper, extremes_empty);
    }

    #[test]
    fn support_count_at_most_d(d in 1usize..5, k in 3usize..7, seed: u64, bits in coloring(60)) {
        let g = build_hypergraph(&uniform(d, k, 60 / k, seed));
        let crit = critical_edges(&g, &bits).unwrap();
        let mut per_vertex = vec![0usize; 60];
        for &(_, v) in &crit {
            per_vertex[v] += 1;
        }
        prop_assert!(per_vertex.iter().all(|&c| c <= d));
    }

    #[test]
    fn hamming_is_a_metric(a in coloring(16), b in coloring(16), c in coloring(16)) {
        let h = |x: &Coloring, y: &Coloring| hamming_count(x, y).unwrap();
        prop_assert_eq!(h(&a, &a), 0);
        prop_assert_eq!(h(&a, &b), h(&b, &a));
        prop_assert!(h(&a, &c) <= h(&a, &b) + h(&b, &c));
        prop_assert_eq!(h(&a, &b) == 0, a == b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn count_is_monotone_in_eps(d in 1usize..4, seed: u64) {
        let g = build_hypergraph(&uniform(d, 3, 4, seed));
        let mut prev = BigUint::from(0u8);
        for num in 0..=4 {
            let z = count_proper(&g, &Fraction::new(num, 12)).unwrap().value;
            prop_assert!(z >= prev);
            prev = z;
        }
        let ze = count_equitable(&g).unwrap().value;
        prop_assert!(count_proper(&g, &Fraction::new(0, 1)).unwrap().value >= ze);
    }

    #[test]
    fn distance_counts_partition_and_mirror(d in 1usize..5, k in 2usize..4, seed: u64) {
        let (hom, chi) = planted(d, k, 6 / k, seed);
        let g = build_hypergraph(&hom);
        let n = g.n();
        let hist = distance_histogram(&g, &chi).unwrap();
        let total: BigUint = hist.iter().sum();
        prop_assert_eq!(total, count_equitable(&g).unwrap().value);
        for m in (0..=n).step_by(2) {
            let z = count_at_distance(&g, &chi, &Fraction::new(m as i64, n as i64)).unwrap().value;
            let mirror = count_at_distance(&g, &chi, &Fraction::new((n - m) as i64, n as i64)).unwrap().value;
            prop_assert_eq!(&z, &mirror);
            prop_assert_eq!(&z, &hist[m]);
        }
    }

    #[test]
    fn core_levels_are_nested(d in 3usize..12, k in 3usize..6, half_parts in 2usize..8, seed: u64) {
        let (hom, chi) = planted(d, k, half_parts, seed);
        let g = build_hypergraph(&hom);
        let dec = core_decomposition(&g, &chi, 8).unwrap();
        prop_assert_eq!(&dec, &core_decomposition_reference(&g, &chi, 8).unwrap());
        for pair in dec.levels.windows(2) {
            let outer: HashSet<_> = pair[0].core.iter().collect();
            prop_assert!(pair[1].core.iter().all(|v| outer.contains(v)));
        }
        for level in &dec.levels {
            let core: HashSet<_> = level.core.iter().collect();
            let attached: HashSet<_> = level.attached.iter().collect();
            prop_assert!(level.attached.iter().all(|v| !core.contains(v)));
            prop_assert!(level.attached_prime.iter().all(|v| attached.contains(v)));
            // A' members pair off, so a lone member is impossible.
            prop_assert_ne!(level.attached_prime.len(), 1);
        }
    }

    #[test]
    fn fixed_point_iterates_decrease(d in 1u64..200, k in 3usize..12) {
        let t = core_fixed_point(d, k, 1e-14, 5000).unwrap();
        prop_assert!(t.p.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(t.p_inf >= 0.0 && t.p_inf <= t.p[0]);
    }

    #[test]
    fn delta0_maps_are_inverse(x in 0.001f64..0.999, k in 2usize..30) {
        let back = delta_of_delta0(delta0_of_delta(x, k).unwrap(), k).unwrap();
        prop_assert!((back - x).abs() <= 1e-10);
    }
}
