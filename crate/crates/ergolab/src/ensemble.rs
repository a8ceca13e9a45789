//! Map ensembles and the local preimage-count statistics used by the
//! positional experiments.

use ergolab_core::{DiscretizedMap, MapParams};

use crate::config::HarnessError;

/// The 5x5 perturbation grid around `base`: `c1 + step*p1`, `c2 + step*p2`
/// with `p1, p2` ranging over {-1, -1/2, 0, 1/2, 1} (p1 outer, p2 inner, so
/// member 12 is `base` itself). Every member must still be expanding.
pub fn ensemble(base: &MapParams, step: f64) -> Result<Vec<MapParams>, HarnessError> {
    if step.is_nan() || step < 0.0 {
        return Err(HarnessError::InvalidSpec("ensemble step must be >= 0".into()));
    }
    const OFFSETS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut members = Vec::with_capacity(25);
    for p1 in OFFSETS {
        for p2 in OFFSETS {
            members.push(MapParams::new(
                base.c1() + step * p1,
                base.c2() + step * p2,
                base.shift(),
            )?);
        }
    }
    Ok(members)
}

/// Local frequency of preimage counts: for each requested center cell `c` and
/// count `m`, the fraction `(1/2R) * Card{ y in window(c) : |f_N^{-k}(y)| = m }`
/// over the window of `2R` cells `{c-R, .., c+R-1}` (cyclically). Returns one
/// histogram per center, all padded to a common length (index = m).
pub fn local_preimage_histogram(
    map: &DiscretizedMap,
    k: usize,
    r: usize,
    centers: &[usize],
) -> Vec<Vec<f64>> {
    assert!(r >= 1, "window half-width must be positive");
    let n = map.n();
    assert!(2 * r <= n, "window wider than the circle");
    let counts = ergolab_core::predictions::preimage_counts(map, k);
    let max_m = centers
        .iter()
        .flat_map(|&c| (0..2 * r).map(move |o| (c + n - r + o) % n))
        .map(|y| counts[y])
        .max()
        .unwrap_or(0) as usize;
    let weight = 1.0 / (2 * r) as f64;
    centers
        .iter()
        .map(|&c| {
            let mut hist = vec![0.0; max_m + 1];
            for o in 0..2 * r {
                let y = (c + n - r + o) % n;
                hist[counts[y] as usize] += weight;
            }
            hist
        })
        .collect()
}

/// Looks for an exact recurrence in a series of integer state fingerprints
/// (one per time step). Returns `(first_repeat_time, period)` for the first
/// state seen twice. This is the reporting heuristic for eventually-periodic
/// pushforward iterations; a return of `None` only means "no repeat within
/// the horizon".
pub fn detect_recurrence(fingerprints: &[u64]) -> Option<(usize, usize)> {
    let mut seen = std::collections::HashMap::new();
    for (t, &f) in fingerprints.iter().enumerate() {
        if let Some(&first) = seen.get(&f) {
            return Some((t, t - first));
        }
        seen.insert(f, t);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use ergolab_core::expanding_map::check_expanding;

    #[test]
    fn ensemble_has_25_members_centered_on_base() {
        let base = MapParams::default();
        let members = ensemble(&base, 0.001).unwrap();
        assert_eq!(members.len(), 25);
        assert_eq!(members[12].c1(), base.c1());
        assert_eq!(members[12].c2(), base.c2());
        for m in &members {
            assert!(check_expanding(m.c1(), m.c2()));
        }
        // Corners differ from the base in both coefficients.
        assert!((members[0].c1() - (base.c1() - 0.001)).abs() < 1e-18);
        assert!((members[24].c2() - (base.c2() + 0.001)).abs() < 1e-18);
    }

    #[test]
    fn zero_step_gives_identical_copies() {
        let base = MapParams::default();
        let members = ensemble(&base, 0.0).unwrap();
        assert!(members.iter().all(|m| m.c1() == base.c1() && m.c2() == base.c2()));
    }

    #[test]
    fn oversized_perturbation_fails_expansivity() {
        let base = MapParams::default();
        assert!(ensemble(&base, 0.05).is_err());
    }

    #[test]
    fn histogram_at_time_zero_is_all_singletons() {
        // A power-of-two window keeps the equal-weight sums exact in f64.
        let map = DiscretizedMap::discretize(&MapParams::default(), 500);
        let hists = local_preimage_histogram(&map, 0, 32, &[0, 100, 499]);
        for h in hists {
            assert_eq!(h[1], 1.0);
            assert_eq!(h.iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn doubling_histogram_splits_evenly() {
        // i -> 2i mod N: image cells have 2 preimages, the rest none.
        let n = 1 << 10;
        let table: Vec<u32> = (0..n as u32).map(|i| (2 * i) % n as u32).collect();
        let map = DiscretizedMap::from_table(table).unwrap();
        let hists = local_preimage_histogram(&map, 1, 8, &[0, 17, 512]);
        for h in hists {
            assert_eq!(h[0], 0.5);
            assert_eq!(h[2], 0.5);
        }
    }

    #[test]
    fn recurrence_detection() {
        assert_eq!(detect_recurrence(&[1, 2, 3, 4, 2, 5]), Some((4, 3)));
        assert_eq!(detect_recurrence(&[1, 2, 3]), None);
        assert_eq!(detect_recurrence(&[7, 7]), Some((1, 1)));
    }
}
