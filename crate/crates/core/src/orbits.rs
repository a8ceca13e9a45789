//! Long-run structure of a discretized map as a functional graph.
//!
//! Every self-map of a finite set decomposes into disjoint cycles with trees
//! hanging off them; every orbit is eventually periodic. The Cesàro limit of
//! the pushforwards of the uniform measure (the *asymptotic measure*) follows
//! in closed form from that decomposition: a cycle of length `L` with basin
//! size `B` carries weight `B / (n L)` on each of its nodes.

use crate::grid::DiscretizedMap;
use crate::measure::GridMeasure;

const UNSET: u32 = u32::MAX;

/// Full cycle/basin decomposition of a functional graph on `n` nodes.
#[derive(Debug, Clone)]
pub struct CycleDecomposition {
    /// Index of the cycle each node eventually reaches.
    cycle_of: Vec<u32>,
    /// Steps until the orbit of each node enters its cycle.
    tail_len: Vec<u32>,
    /// Length of each cycle.
    cycle_lens: Vec<u32>,
    /// Number of nodes (cycle included) draining into each cycle.
    basin_sizes: Vec<u64>,
}

/// Decomposes by walking each unresolved path iteratively (no recursion;
/// overall O(n): every node is walked at most twice).
pub fn decompose(map: &DiscretizedMap) -> CycleDecomposition {
    let n = map.n();
    assert!(n < UNSET as usize, "table too large for u32 bookkeeping");
    let mut cycle_of = vec![UNSET; n];
    let mut tail_len = vec![0u32; n];
    let mut pos_on_path = vec![UNSET; n];
    let mut cycle_lens: Vec<u32> = Vec::new();
    let mut basin_sizes: Vec<u64> = Vec::new();
    let mut path: Vec<u32> = Vec::new();

    for start in 0..n {
        if cycle_of[start] != UNSET {
            continue;
        }
        path.clear();
        let mut x = start;
        // Walk forward until hitting either a resolved node or this path.
        while cycle_of[x] == UNSET && pos_on_path[x] == UNSET {
            pos_on_path[x] = path.len() as u32;
            path.push(x as u32);
            x = map.apply(x);
        }
        let (cycle, mut tail_from) = if cycle_of[x] == UNSET {
            // Found a brand-new cycle: it starts where the path revisits x.
            let cstart = pos_on_path[x] as usize;
            let len = (path.len() - cstart) as u32;
            let c = cycle_lens.len() as u32;
            cycle_lens.push(len);
            basin_sizes.push(0);
            for &node in &path[cstart..] {
                cycle_of[node as usize] = c;
                tail_len[node as usize] = 0;
            }
            (c, cstart)
        } else {
            // Merged into an already-resolved orbit at x.
            (cycle_of[x], path.len())
        };
        // Resolve the tail part of the path, back to front.
        let mut t = if tail_from == path.len() { tail_len[x] } else { 0 };
        while tail_from > 0 {
            tail_from -= 1;
            t += 1;
            let node = path[tail_from] as usize;
            cycle_of[node] = cycle;
            tail_len[node] = t;
        }
        basin_sizes[cycle as usize] += path.len() as u64;
    }
    debug_assert_eq!(basin_sizes.iter().sum::<u64>(), n as u64);
    CycleDecomposition { cycle_of, tail_len, cycle_lens, basin_sizes }
}

impl CycleDecomposition {
    pub fn n(&self) -> usize {
        self.cycle_of.len()
    }

    pub fn num_cycles(&self) -> usize {
        self.cycle_lens.len()
    }

    pub fn cycle_lengths(&self) -> &[u32] {
        &self.cycle_lens
    }

    pub fn basin_sizes(&self) -> &[u64] {
        &self.basin_sizes
    }

    /// Cycle index the orbit of `i` ends in.
    pub fn cycle_of(&self, i: usize) -> usize {
        self.cycle_of[i] as usize
    }

    /// Steps before the orbit of `i` enters its cycle.
    pub fn tail_length(&self, i: usize) -> usize {
        self.tail_len[i] as usize
    }

    pub fn is_on_cycle(&self, i: usize) -> bool {
        self.tail_len[i] == 0
    }

    /// Number of distinct points the orbit of `i` ever visits:
    /// tail plus one full cycle.
    pub fn orbit_cardinality(&self, i: usize) -> usize {
        self.tail_len[i] as usize + self.cycle_lens[self.cycle_of[i] as usize] as usize
    }

    /// Mean of [`orbit_cardinality`](Self::orbit_cardinality) over all start
    /// points. For uniformly random tables this grows like `sqrt(pi n / 2)`.
    pub fn mean_orbit_cardinality(&self) -> f64 {
        let total: u64 = (0..self.n()).map(|i| self.orbit_cardinality(i) as u64).sum();
        total as f64 / self.n() as f64
    }

    /// First time the orbit of `i` revisits a point (tail + cycle length):
    /// identical to the orbit cardinality for a deterministic table.
    pub fn time_to_cycle(&self, i: usize) -> usize {
        self.orbit_cardinality(i)
    }
}

/// Mean orbit cardinality of a table, decomposing on the fly.
pub fn mean_orbit_cardinality(map: &DiscretizedMap) -> f64 {
    decompose(map).mean_orbit_cardinality()
}

/// The Cesàro limit of `(1/K) sum_{k<K} (f_N^k)_* Leb_N`: each node of a
/// cycle of length `L` with basin `B` gets weight `B / (n L)`; tree nodes get
/// zero. Exactly invariant under the map (each cycle's weights are equal).
pub fn asymptotic_measure(map: &DiscretizedMap) -> GridMeasure {
    let dec = decompose(map);
    let n = map.n();
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        if dec.is_on_cycle(i) {
            let c = dec.cycle_of(i);
            *wi = dec.basin_sizes[c] as f64 / (n as f64 * dec.cycle_lens[c] as f64);
        }
    }
    GridMeasure::from_raw(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::pushforward_table;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_cycle_with_tail() {
        // 0 -> 1 -> 2 -> 0 (cycle), 3 -> 0 (tail of length 1).
        let map = DiscretizedMap::from_table(vec![1, 2, 0, 0]).unwrap();
        let dec = decompose(&map);
        assert_eq!(dec.num_cycles(), 1);
        assert_eq!(dec.cycle_lengths(), &[3]);
        assert_eq!(dec.basin_sizes(), &[4]);
        assert_eq!(dec.tail_length(3), 1);
        assert!(dec.is_on_cycle(0) && !dec.is_on_cycle(3));
        assert_eq!(dec.orbit_cardinality(3), 4);
        assert!((dec.mean_orbit_cardinality() - 13.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn chain_into_fixed_point() {
        // 2 -> 1 -> 0 -> 0.
        let map = DiscretizedMap::from_table(vec![0, 0, 1]).unwrap();
        let dec = decompose(&map);
        assert_eq!(dec.cycle_lengths(), &[1]);
        assert_eq!(dec.tail_length(2), 2);
        assert_eq!(dec.orbit_cardinality(2), 3);
        // All mass concentrates on the fixed point, exactly.
        let mu = asymptotic_measure(&map);
        assert_eq!(mu.weights(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_disjoint_transpositions_give_uniform() {
        let map = DiscretizedMap::from_table(vec![1, 0, 3, 2]).unwrap();
        let dec = decompose(&map);
        assert_eq!(dec.num_cycles(), 2);
        assert_eq!(asymptotic_measure(&map).weights(), &[0.25; 4]);
    }

    #[test]
    fn asymptotic_measure_is_exactly_invariant() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = DiscretizedMap::random_uniform(300, &mut rng);
            let mu = asymptotic_measure(&map);
            assert!((mu.mass() - 1.0).abs() < 1e-12);
            let pushed = pushforward_table(&mu, &map).unwrap();
            // Within each cycle all weights are equal, so the pushforward
            // permutes identical values: bitwise equality.
            assert_eq!(pushed.weights(), mu.weights());
        }
    }

    #[test]
    fn random_table_orbit_scale() {
        // Very loose sanity check of the sqrt(pi n / 2) growth law.
        let n = 4000;
        let mut acc = 0.0;
        let trials = 30;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            acc += mean_orbit_cardinality(&DiscretizedMap::random_uniform(n, &mut rng));
        }
        let mean = acc / trials as f64;
        let law = (std::f64::consts::PI * n as f64 / 2.0).sqrt();
        assert!((mean - law).abs() / law < 0.2, "mean={mean} law={law}");
    }
}
