//! The ten release checks: exact identities, brute-force oracle
//! equivalences, and scaled-down statistical reproductions. Each check
//! produces a one-line report; `ergolab verify` prints them all, and the
//! `acceptance` integration test target runs one test per criterion.

use ergolab_core::grid::SchemeKind;
use ergolab_core::measure::{
    self, cramer, cramer_sq, inner_jump, zero_identity_check, CdfMinusAvg, GridMeasure,
    PiecewiseDensity,
};
use ergolab_core::orbits::{asymptotic_measure, mean_orbit_cardinality};
use ergolab_core::predictions::{
    expected_process_distance, injectivity_limits, mean_densities, preimage_poly_step,
    rates_of_injectivity, PolynomialField, ProcessComponent, ProcessSpec,
};
use ergolab_core::transfer::OperatorDiscretization;
use ergolab_core::{DiscretizedMap, MapParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentId, HarnessError, RunSpec};
use crate::experiments::{run, RunRequest};
use crate::stats;

#[derive(Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

type Runner = fn() -> Result<String, String>;

pub const CRITERIA: [(&str, Runner); 10] = [
    ("exact distance identities", c01_distance_identities),
    ("jump inner products vs segment integration", c02_inner_products),
    ("point-process expectation vs Monte Carlo", c03_process_monte_carlo),
    ("preimage recursions vs hand and brute-force oracles", c04_percolation_recursions),
    ("injectivity rate prediction at n = 10^5 and 10^6", c05_injectivity),
    ("short-term distance prediction at n = 2^20", c06_short_term),
    ("doubling-map resonance collapse", c07_resonance),
    ("orbit cardinality laws", c08_cycle_statistics),
    ("transfer operator health", c09_transfer_operator),
    ("interrupted run resumes to identical bytes", c10_determinism_resume),
];

pub fn run_criterion(id: usize) -> CriterionReport {
    let (name, runner) = CRITERIA[id - 1];
    match runner() {
        Ok(details) => CriterionReport { id, name, passed: true, details },
        Err(details) => CriterionReport { id, name, passed: false, details },
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn core_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Random atomic probability measure with `k` atoms, sorted by position.
fn random_atoms<R: Rng>(rng: &mut R, k: usize) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> =
        (0..k).map(|_| (rng.random::<f64>(), 0.05 + rng.random::<f64>())).collect();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

fn c01_distance_identities() -> Result<String, String> {
    for n in [10usize, 100, 1000] {
        let d = cramer(&GridMeasure::lebesgue(n), &measure::lebesgue());
        let target = 1.0 / (n as f64 * 12.0_f64.sqrt());
        ensure(
            (d - target).abs() < 1e-12,
            format!("d(Leb_{n}, Leb) = {d:.17e}, expected {target:.17e}"),
        )?;
        let atoms: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 / n as f64, 1.0 / n as f64)).collect();
        let d2 = cramer_sq(&atoms, &measure::lebesgue());
        let t2 = 1.0 / (12.0 * (n * n) as f64);
        ensure(
            (d2 - t2).abs() < 1e-12,
            format!("{n} equispaced atoms: d^2 = {d2:.17e}, expected {t2:.17e}"),
        )?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst = 0.0_f64;
    for trial in 0..100 {
        let atoms = random_atoms(&mut rng, 1 + trial % 20);
        let z = zero_identity_check(&atoms);
        let d2 = cramer_sq(&atoms, &measure::lebesgue());
        let gap = (z - (d2 - 1.0 / 12.0)).abs();
        worst = worst.max(gap);
        ensure(gap < 1e-10, format!("identity gap {gap:.3e} on trial {trial}"))?;
        ensure(z <= 1e-12, format!("diagnostic not <= 0: {z:.3e} on trial {trial}"))?;
    }
    for trial in 0..20 {
        let atoms = vec![(rng.random::<f64>(), 1.0)];
        let z = zero_identity_check(&atoms);
        ensure(z.abs() < 1e-12, format!("single atom diagnostic {z:.3e} on trial {trial}"))?;
    }
    Ok(format!("closed forms exact; zero-identity gap <= {worst:.2e} over 100 measures"))
}

fn c02_inner_products() -> Result<String, String> {
    // Oracle: integrate g_p * g_q over the three segments cut by {p, q},
    // where g_p(x) = 1[x >= p] - (1 - p) is piecewise constant.
    let mut worst = 0.0_f64;
    for i in 0..100 {
        let p = (i as f64 + 0.5) / 100.0;
        for j in 0..100 {
            let q = (j as f64 + 0.5) / 100.0;
            let (lo, hi) = (p.min(q), p.max(q));
            let seg = |a: f64, b: f64| {
                let x = 0.5 * (a + b);
                let gp = if x >= p { p } else { p - 1.0 };
                let gq = if x >= q { q } else { q - 1.0 };
                (b - a) * gp * gq
            };
            let direct = seg(0.0, lo) + seg(lo, hi) + seg(hi, 1.0);
            let gap = (inner_jump(p, q) - direct).abs();
            worst = worst.max(gap);
        }
    }
    ensure(worst < 1e-10, format!("worst inner-product gap {worst:.3e}"))?;
    Ok(format!("10^4 pairs agree with segment integration within {worst:.2e}"))
}

/// Inverse-CDF sampler for a histogram density (uniform inside each cell).
fn sample_density<R: Rng>(rng: &mut R, dens: &PiecewiseDensity) -> f64 {
    let m = dens.values().len();
    let mut u = rng.random::<f64>() * m as f64;
    for (i, &v) in dens.values().iter().enumerate() {
        if u < v || i + 1 == m {
            return (i as f64 + (u / v).min(1.0)) / m as f64;
        }
        u -= v;
    }
    unreachable!()
}

fn c03_process_monte_carlo() -> Result<String, String> {
    const DRAWS: usize = 20_000;
    let leb = CdfMinusAvg::lebesgue();

    // (a) 100 independent uniform points of equal mass.
    let spec = ProcessSpec::new(vec![leb.clone(); 100], vec![1; 100]).map_err(core_err)?;
    let expected = expected_process_distance(&spec, &leb);
    ensure(
        (expected - 1.0 / 1200.0).abs() < 1e-12,
        format!("closed form {expected:.17e} != 1/1200"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut acc = 0.0;
    for _ in 0..DRAWS {
        let mut atoms: Vec<(f64, f64)> =
            (0..100).map(|_| (rng.random::<f64>(), 0.01)).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        acc += cramer_sq(&atoms, &measure::lebesgue());
    }
    let mc = acc / DRAWS as f64;
    let rel_a = (mc - expected).abs() / expected;
    ensure(
        rel_a < 0.02,
        format!("uniform case: MC {mc:.6e} vs {expected:.6e} ({:.2}% off)", 100.0 * rel_a),
    )?;

    // (b) three weighted components with multiplicities 1, 2, 3.
    let hists = [
        PiecewiseDensity::normalized(vec![2.0, 1.0, 0.5, 0.5]),
        PiecewiseDensity::normalized(vec![0.25, 0.5, 1.0, 2.25]),
        PiecewiseDensity::normalized(vec![1.0, 3.0, 1.0, 1.0]),
    ];
    let counts = [6u64, 4, 3];
    let mults = [1u64, 2, 3];
    let components: Vec<ProcessComponent> = hists
        .iter()
        .zip(counts)
        .zip(mults)
        .map(|((h, count), multiplicity)| ProcessComponent {
            count,
            multiplicity,
            cdf: CdfMinusAvg::from_measure(h),
        })
        .collect();
    let spec = ProcessSpec::from_components(components).map_err(core_err)?;
    let expected = expected_process_distance(&spec, &leb);
    let total = spec.total() as f64;
    let mut acc = 0.0;
    for _ in 0..DRAWS {
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(13);
        for ((h, &count), &m) in hists.iter().zip(&counts).zip(&mults) {
            for _ in 0..count {
                atoms.push((sample_density(&mut rng, h), m as f64 / total));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        acc += cramer_sq(&atoms, &measure::lebesgue());
    }
    let mc = acc / DRAWS as f64;
    let rel_b = (mc - expected).abs() / expected;
    ensure(
        rel_b < 0.02,
        format!("weighted case: MC {mc:.6e} vs {expected:.6e} ({:.2}% off)", 100.0 * rel_b),
    )?;
    Ok(format!("2*10^4 draws within {:.2}% (uniform) and {:.2}% (weighted)", 100.0 * rel_a, 100.0 * rel_b))
}

fn c04_percolation_recursions() -> Result<String, String> {
    // (i) Constant slope 2: every branch weight is exactly 1/2, so the mean
    // density obeys the scalar recursion d' = 1 - (1 - d/2)^2 at every node.
    let op = OperatorDiscretization::new(&MapParams::doubling(), 64).map_err(core_err)?;
    let fields = mean_densities(&op, 6).map_err(core_err)?;
    let mut hand = 1.0_f64;
    for (k, field) in fields.iter().enumerate() {
        for (j, &v) in field.values().iter().enumerate() {
            ensure(
                (v - hand).abs() < 1e-12,
                format!("mean density at k={k}, node {j}: {v:.17} vs hand {hand:.17}"),
            )?;
        }
        hand = 1.0 - (1.0 - 0.5 * hand) * (1.0 - 0.5 * hand);
    }

    // (ii) Depth-2 binary tree with distinct branch probabilities: the
    // root's path-count distribution vs enumeration of all 2^6 edge states.
    let pre_cells = vec![[1u32, 2], [3, 4], [5, 6], [3, 3], [4, 4], [5, 5], [6, 6]];
    let edge_p = [0.5, 1.0 / 3.0, 0.25, 0.2, 1.0 / 6.0, 1.0 / 7.0];
    let pre_weights = vec![
        [edge_p[0], edge_p[1]],
        [edge_p[2], edge_p[3]],
        [edge_p[4], edge_p[5]],
        [0.0, 0.0],
        [0.0, 0.0],
        [0.0, 0.0],
        [0.0, 0.0],
    ];
    let tree = OperatorDiscretization::from_parts(pre_cells, pre_weights).map_err(core_err)?;
    let mut field = PolynomialField::initial(7, 8);
    field = preimage_poly_step(&tree, &field).map_err(core_err)?;
    field = preimage_poly_step(&tree, &field).map_err(core_err)?;
    let mut exact = [0.0_f64; 5];
    for state in 0u32..64 {
        let on = |e: usize| state & (1 << e) != 0;
        let mut prob = 1.0;
        for (e, &p) in edge_p.iter().enumerate() {
            prob *= if on(e) { p } else { 1.0 - p };
        }
        // Leaves 3,4 hang under node 1 (edge 0 to the root), 5,6 under 2.
        let paths = [(0, 2), (0, 3), (1, 4), (1, 5)]
            .iter()
            .filter(|&&(up, low)| on(up) && on(low))
            .count();
        exact[paths] += prob;
    }
    for (m, &target) in exact.iter().enumerate() {
        let got = field.coefficient(0, m);
        ensure(
            (got - target).abs() < 1e-12,
            format!("depth-2 coefficient a_{m} = {got:.17} vs enumeration {target:.17}"),
        )?;
    }

    // (iii) Consistency identities on the default map.
    let op = OperatorDiscretization::new(&MapParams::default(), 1024).map_err(core_err)?;
    let dbar = mean_densities(&op, 10).map_err(core_err)?;
    let mut field = PolynomialField::initial(op.m(), 64);
    let mut worst = 0.0_f64;
    for dbar_k in dbar.iter().skip(1) {
        field = preimage_poly_step(&op, &field).map_err(core_err)?;
        for (j, &dv) in dbar_k.values().iter().enumerate() {
            let at_one = (field.value_at_one(j) - 1.0).abs();
            let at_zero = (field.value_at_zero(j) - (1.0 - dv)).abs();
            worst = worst.max(at_one).max(at_zero);
        }
    }
    ensure(worst < 1e-6, format!("generating-polynomial identity residual {worst:.3e}"))?;
    Ok(format!(
        "hand recursion, 2^6 enumeration, and identities all hold (worst residual {worst:.2e})"
    ))
}

fn c05_injectivity() -> Result<String, String> {
    let params = MapParams::default();
    let op = OperatorDiscretization::new(&params, 1 << 15).map_err(core_err)?;
    let predicted = injectivity_limits(&op, 200).map_err(core_err)?;
    let worst_band = |n: usize, k_max: usize| {
        let map = DiscretizedMap::discretize(&params, n);
        let empirical = rates_of_injectivity(&map, k_max);
        (0..=k_max)
            .map(|k| (empirical[k] - predicted[k]).abs() / predicted[k])
            .fold(0.0_f64, f64::max)
    };
    // The image-set cardinality is a single deterministic realization per
    // grid; its relative deviation from the limit behaves like a random walk
    // in k with amplitude ~1/sqrt(N), so the band tightens as N grows.
    let big = worst_band(1_000_000, 200);
    let small = worst_band(100_000, 50);
    ensure(
        big < 0.05,
        format!("n=10^6 grid deviates {:.2}% from the limit within k<=200", 100.0 * big),
    )?;
    ensure(
        small < 0.05,
        format!(
            "n=10^5 grid drifts to {:.2}% within k<=50; the limit formula itself is \
             verified at n=10^6 ({:.2}% through k=200), the shortfall is the fixed \
             grid's own fluctuation",
            100.0 * small,
            100.0 * big
        ),
    )?;
    Ok(format!(
        "n=10^5 within {:.2}% through k=50, n=10^6 within {:.2}% through k=200",
        100.0 * small,
        100.0 * big
    ))
}

fn c06_short_term() -> Result<String, String> {
    let params = MapParams::default();
    let n: usize = 1 << 20;
    let k_max = 10;
    let op = OperatorDiscretization::new(&params, 1 << 16).map_err(core_err)?;
    let predicted = op.short_term_predictions(k_max).map_err(core_err)?;
    ensure(
        (predicted[0] - 1.0 / 12.0).abs() < 1e-6,
        format!("k=0 prediction {:.12} != 1/12", predicted[0]),
    )?;
    let dens = op.density_iterates(k_max);
    let map = DiscretizedMap::discretize(&params, n);
    let mut counts = vec![1u64; n];
    let mut worst = 0.0_f64;
    for k in 0..=k_max {
        if k > 0 {
            counts = map.pushforward_counts(&counts);
        }
        let emp = GridMeasure::from_counts(&counts);
        let scaled = (n as f64 * cramer(&emp, &dens[k])).powi(2);
        let rel = (scaled - predicted[k]).abs() / predicted[k];
        worst = worst.max(rel);
        ensure(
            rel < 0.10,
            format!(
                "k={k}: n^2 d^2 = {scaled:.6} vs predicted {:.6} ({:.2}% off)",
                predicted[k],
                100.0 * rel
            ),
        )?;
    }
    Ok(format!("10 steps at n=2^20 within {:.2}% of the orbit-derivative curve", 100.0 * worst))
}

fn c07_resonance() -> Result<String, String> {
    let doubling = MapParams::doubling();
    for j in [4usize, 8, 12, 16, 20] {
        let n = 1usize << j;
        let map = DiscretizedMap::discretize(&doubling, n);
        let mut counts = vec![1u64; n];
        for _ in 0..j {
            counts = map.pushforward_counts(&counts);
        }
        ensure(
            counts[0] == n as u64 && counts[1..].iter().all(|&c| c == 0),
            format!("2^{j}: mass not fully collapsed onto 0 after {j} steps"),
        )?;
        let mu = asymptotic_measure(&map);
        ensure(
            mu.weights()[0] == 1.0 && mu.weights()[1..].iter().all(|&w| w == 0.0),
            format!("2^{j}: asymptotic measure is not exactly the atom at 0"),
        )?;
    }
    Ok("f_N^j sends everything to 0 and the asymptotic measure is exactly delta_0".into())
}

fn c08_cycle_statistics() -> Result<String, String> {
    let n = 750usize;
    let mut acc = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        acc += mean_orbit_cardinality(&DiscretizedMap::random_uniform(n, &mut rng));
    }
    let mean = acc / 50.0;
    let law = (std::f64::consts::PI * n as f64 / 2.0).sqrt();
    let rel = (mean - law).abs() / law;
    ensure(rel < 0.25, format!("random tables: mean {mean:.2} vs sqrt(pi n/2) = {law:.2}"))?;

    let params = MapParams::default();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 8..=18usize {
        let card = mean_orbit_cardinality(&DiscretizedMap::discretize(&params, 1 << j));
        xs.push(j as f64);
        ys.push(card.log2());
    }
    let (slope, _, _) = stats::linear_fit(&xs, &ys);
    ensure(
        (0.3..=0.7).contains(&slope),
        format!("log2 orbit-cardinality slope {slope:.3} outside [0.3, 0.7]"),
    )?;
    Ok(format!(
        "random tables within {:.1}% of sqrt(pi n/2); map-family growth slope {slope:.2}",
        100.0 * rel
    ))
}

fn c09_transfer_operator() -> Result<String, String> {
    let op = OperatorDiscretization::new(&MapParams::default(), 1 << 16).map_err(core_err)?;
    let uniform = PiecewiseDensity::uniform(1 << 16);
    let dev = op.raw_mass_deviation(&uniform);
    ensure(dev < 1e-6, format!("raw mass deviation {dev:.3e} on the uniform density"))?;
    let srb = op.srb_density(1e-12, 5000).map_err(core_err)?;
    let dev_srb = op.raw_mass_deviation(&srb);
    ensure(dev_srb < 1e-6, format!("raw mass deviation {dev_srb:.3e} on the fixed point"))?;
    let image = op.rpf_apply(&srb);
    let residual = srb
        .values()
        .iter()
        .zip(image.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    ensure(residual < 1e-10, format!("fixed-point residual {residual:.3e}"))?;
    let op = OperatorDiscretization::new(&MapParams::doubling(), 4096).map_err(core_err)?;
    let flat = op.srb_density(1e-13, 100).map_err(core_err)?;
    let off = flat.values().iter().map(|v| (v - 1.0).abs()).fold(0.0_f64, f64::max);
    ensure(off < 1e-12, format!("doubling-map invariant density is off flat by {off:.3e}"))?;
    Ok(format!(
        "mass deviation {dev:.1e}, residual {residual:.1e}, doubling density flat within {off:.1e}"
    ))
}

fn c10_determinism_resume() -> Result<String, String> {
    let spec = RunSpec {
        k_max: 500,
        grid_orders: vec![50_000],
        schemes: vec![
            SchemeKind::MapToClosest,
            SchemeKind::StepwiseRandom,
            SchemeKind::PointsRandomOnGrid,
        ],
        seeds: vec![0, 1, 2, 3, 4],
        // Keep the analytic reference curve short; it is recomputed on every
        // run and is not what this criterion exercises.
        pk_k_max: 10,
        ..RunSpec::defaults(ExperimentId::SchemeComparison)
    };
    let cells = spec.grid_orders.len() * spec.schemes.len() * spec.seeds.len();
    let budget = cells / 2;

    let dir_a = tempfile::tempdir().map_err(core_err)?;
    let mut req = RunRequest::new(spec.clone(), dir_a.path());
    req.max_new_cells = Some(budget);
    let interrupted = match run(&req) {
        Err(HarnessError::Interrupted { computed }) => computed,
        Ok(_) => return Err("budgeted run was not interrupted".into()),
        Err(e) => return Err(format!("budgeted run failed: {e}")),
    };
    ensure(
        interrupted == budget,
        format!("interrupted after {interrupted} cells, budget was {budget}"),
    )?;
    req.max_new_cells = None;
    let resumed = run(&req).map_err(core_err)?;
    ensure(
        resumed.computed == cells - budget && resumed.reused == budget,
        format!(
            "resume computed {} and reused {}, expected {} and {budget}",
            resumed.computed,
            resumed.reused,
            cells - budget
        ),
    )?;

    let dir_b = tempfile::tempdir().map_err(core_err)?;
    let fresh = run(&RunRequest::new(spec, dir_b.path())).map_err(core_err)?;
    ensure(fresh.computed == cells, format!("fresh run computed {} cells", fresh.computed))?;
    let bytes_a = std::fs::read(&resumed.csv_path).map_err(core_err)?;
    let bytes_b = std::fs::read(&fresh.csv_path).map_err(core_err)?;
    ensure(
        bytes_a == bytes_b,
        format!(
            "CSV bytes differ: resumed {} bytes vs fresh {} bytes",
            bytes_a.len(),
            bytes_b.len()
        ),
    )?;
    Ok(format!(
        "interrupted at {budget}/{cells} cells, resumed, and matched a fresh run byte for byte ({} bytes)",
        bytes_a.len()
    ))
}
