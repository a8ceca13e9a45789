//! The cycle decomposition against a per-node brute-force walk, and the
//! statistical laws the decomposition feeds.

use ergolab_core::orbits::{asymptotic_measure, decompose, mean_orbit_cardinality};
use ergolab_core::DiscretizedMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Walks the orbit of `start`, returning (tail length, cycle length) from the
/// first repeated node. Quadratic and obviously correct.
fn walk(map: &DiscretizedMap, start: usize) -> (usize, usize) {
    let mut seen = std::collections::HashMap::new();
    let mut x = start;
    let mut step = 0usize;
    loop {
        if let Some(&first) = seen.get(&x) {
            return (first, step - first);
        }
        seen.insert(x, step);
        x = map.apply(x);
        step += 1;
    }
}

#[test]
fn decomposition_matches_brute_force_walks() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let map = DiscretizedMap::random_uniform(1500, &mut rng);
    let dec = decompose(&map);
    let mut total = 0usize;
    for i in 0..map.n() {
        let (tail, cycle) = walk(&map, i);
        assert_eq!(dec.tail_length(i), tail, "node {i}");
        assert_eq!(dec.orbit_cardinality(i), tail + cycle, "node {i}");
        assert_eq!(dec.is_on_cycle(i), tail == 0, "node {i}");
        total += tail + cycle;
    }
    let mean = total as f64 / map.n() as f64;
    assert!((dec.mean_orbit_cardinality() - mean).abs() < 1e-12);
}

#[test]
fn nodes_reaching_same_cycle_share_its_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let map = DiscretizedMap::random_uniform(800, &mut rng);
    let dec = decompose(&map);
    // Basins partition the nodes.
    let total: u64 = dec.basin_sizes().iter().sum();
    assert_eq!(total, 800);
    for i in 0..map.n() {
        let c = dec.cycle_of(i);
        let (_, cycle) = walk(&map, i);
        assert_eq!(dec.cycle_lengths()[c] as usize, cycle);
    }
}

#[test]
fn asymptotic_measure_is_invariant_and_supported_on_cycles() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let map = DiscretizedMap::random_uniform(4096, &mut rng);
    let dec = decompose(&map);
    let mu = asymptotic_measure(&map);
    assert!((mu.mass() - 1.0).abs() < 1e-12);
    for i in 0..map.n() {
        assert_eq!(mu.weights()[i] > 0.0, dec.is_on_cycle(i), "node {i}");
    }
    let pushed = ergolab_core::measure::pushforward_table(&mu, &map).unwrap();
    // A cycle permutes its own (equal) weights, so invariance is bitwise.
    assert_eq!(mu.weights(), pushed.weights());
}

#[test]
fn random_tables_follow_the_square_root_law() {
    // Mean orbit cardinality of a uniform random table grows like
    // sqrt(pi n / 2); average a few tables and ask for 20%.
    let n = 10_000;
    let want = (std::f64::consts::PI * n as f64 / 2.0).sqrt();
    let mut acc = 0.0;
    let tables = 10;
    for seed in 0..tables {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        acc += mean_orbit_cardinality(&DiscretizedMap::random_uniform(n, &mut rng));
    }
    let got = acc / tables as f64;
    assert!((got - want).abs() / want < 0.2, "got {got}, law {want}");
}
