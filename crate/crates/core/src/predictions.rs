//! Predictors for how a grid degrades injectivity, and the point-process
//! model of the resulting discretized iterates.
//!
//! A discretized map `f_N = P_N ∘ f` is never injective for long: images
//! collide. Three related objects quantify this:
//!
//! * the *rate of injectivity* `tau^k(f_N) = |f_N^k(E_N)| / N` (empirical,
//!   exact integer computation);
//! * its large-`N` limit `int Dbar_k`, where the mean density field obeys
//!   `Dbar_{k+1}(y) = 1 - prod_x (1 - Dbar_k(x)/f'(x))` over the branch
//!   preimages `x` of `y`, starting from `Dbar_0 = 1`;
//! * the full distribution of the number of `k`-step grid preimages of a
//!   point, encoded per node as a generating polynomial
//!   `Pbar_k(y) = sum_m a_m(y, k) X^m`. Writing `Qbar = Pbar - 1`, one step
//!   is `Qbar_{k+1}(y) = prod_x (1 + Qbar_k(x)/f'(x)) - 1`, truncated at a
//!   configured maximum degree.
//!
//! The coefficient functions `a_m` feed a closed-form prediction for the
//! expected squared distance between a deterministic measure and a random
//! atomic measure that independently samples one point per component
//! ([`expected_process_distance`]), and its two specializations to the
//! discretized-iterate process ([`pk_direct`], [`pk_point_process`]).

use crate::grid::DiscretizedMap;
use crate::measure::{CdfMinusAvg, PiecewiseDensity};
use crate::transfer::OperatorDiscretization;
use crate::util::Kahan;
use crate::CoreError;
use rayon::prelude::*;

/// A nonnegative field sampled at operator nodes; `Dbar_k` lives here.
#[derive(Debug, Clone)]
pub struct DensityField {
    values: Vec<f64>,
}

impl DensityField {
    /// `Dbar_0 = 1`.
    pub fn initial(m: usize) -> Self {
        assert!(m >= 1);
        DensityField { values: vec![1.0; m] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        let mut s = Kahan::new();
        for &v in &self.values {
            s.add(v);
        }
        s.value() / self.values.len() as f64
    }
}

/// One step of the mean-density recursion
/// `Dbar'(y) = 1 - prod_x (1 - Dbar(x)/f'(x))`.
pub fn mean_density_step(
    op: &OperatorDiscretization,
    d: &DensityField,
) -> Result<DensityField, CoreError> {
    if d.values.len() != op.m() {
        return Err(CoreError::DimensionMismatch { left: d.values.len(), right: op.m() });
    }
    let values = (0..op.m())
        .map(|j| {
            let c = op.preimage_cells(j);
            let w = op.preimage_weights(j);
            1.0 - (1.0 - w[0] * d.values[c[0]]) * (1.0 - w[1] * d.values[c[1]])
        })
        .collect();
    Ok(DensityField { values })
}

/// `Dbar_k` for `k = 0..=k_max`.
pub fn mean_densities(
    op: &OperatorDiscretization,
    k_max: usize,
) -> Result<Vec<DensityField>, CoreError> {
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(DensityField::initial(op.m()));
    for _ in 0..k_max {
        let next = mean_density_step(op, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// Predicted large-`N` rates of injectivity `int Dbar_k` for `k = 0..=k_max`.
pub fn injectivity_limits(
    op: &OperatorDiscretization,
    k_max: usize,
) -> Result<Vec<f64>, CoreError> {
    Ok(mean_densities(op, k_max)?.iter().map(DensityField::mean).collect())
}

/// Empirical rates of injectivity `|f_N^k(E_N)| / N` for `k = 0..=k_max`,
/// computed by iterating the image set (exact).
pub fn rates_of_injectivity(map: &DiscretizedMap, k_max: usize) -> Vec<f64> {
    let n = map.n();
    let mut rates = Vec::with_capacity(k_max + 1);
    rates.push(1.0);
    let mut cur: Vec<u32> = (0..n as u32).collect();
    for _ in 1..=k_max {
        let mut seen = vec![false; n];
        let mut next = Vec::with_capacity(cur.len());
        for &i in &cur {
            let j = map.apply(i as usize);
            if !seen[j] {
                seen[j] = true;
                next.push(j as u32);
            }
        }
        cur = next;
        rates.push(cur.len() as f64 / n as f64);
    }
    rates
}

/// Generating polynomials of the `k`-step grid-preimage count, one per node:
/// row `j` holds the coefficients of `Pbar_k(y_j)` up to degree `max_degree`.
#[derive(Debug, Clone)]
pub struct PolynomialField {
    m: usize,
    max_degree: usize,
    /// Effective degree: coefficients above it are identically zero.
    degree: usize,
    /// Row-major, stride `max_degree + 1`.
    rows: Vec<f64>,
}

impl PolynomialField {
    /// `Pbar_0 = X` at every node (each point is its own 0-step preimage).
    pub fn initial(m: usize, max_degree: usize) -> Self {
        assert!(m >= 1 && max_degree >= 1);
        let stride = max_degree + 1;
        let mut rows = vec![0.0; m * stride];
        for j in 0..m {
            rows[j * stride + 1] = 1.0;
        }
        PolynomialField { m, max_degree, degree: 1, rows }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `X^d` at node `j`.
    pub fn coefficient(&self, j: usize, d: usize) -> f64 {
        self.rows[j * (self.max_degree + 1) + d]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let stride = self.max_degree + 1;
        &self.rows[j * stride..j * stride + self.degree + 1]
    }

    /// The coefficient function `a_d` over all nodes.
    pub fn column(&self, d: usize) -> Vec<f64> {
        (0..self.m).map(|j| self.coefficient(j, d)).collect()
    }

    /// `int a_d` (mean over nodes).
    pub fn column_integral(&self, d: usize) -> f64 {
        let mut s = Kahan::new();
        for j in 0..self.m {
            s.add(self.coefficient(j, d));
        }
        s.value() / self.m as f64
    }

    /// `Pbar(1)` at node `j`: total probability, identically 1 up to
    /// truncation and roundoff.
    pub fn value_at_one(&self, j: usize) -> f64 {
        let mut s = Kahan::new();
        for &c in self.row(j) {
            s.add(c);
        }
        s.value()
    }

    /// `Pbar(0)` at node `j`: probability of no `k`-step preimage.
    pub fn value_at_zero(&self, j: usize) -> f64 {
        self.coefficient(j, 0)
    }

    /// `d/dX Pbar(1)` at node `j`: mean preimage count.
    pub fn derivative_at_one(&self, j: usize) -> f64 {
        let mut s = Kahan::new();
        for (d, &c) in self.row(j).iter().enumerate() {
            s.add(d as f64 * c);
        }
        s.value()
    }
}

/// One step of the preimage-count recursion. In `Qbar = Pbar - 1` form, with
/// branch weights `w_x = 1/f'(x)`:
///
/// ```text
/// Qbar'(y) = w_0 Qbar(x_0) + w_1 Qbar(x_1) + w_0 w_1 Qbar(x_0) Qbar(x_1)
/// ```
///
/// which is the expansion of `prod (1 + w Qbar) - 1` for two branches; the
/// cross convolution is truncated at `max_degree`. The linear part reuses the
/// operator's branch weights bit-for-bit, so the identities
/// `Pbar(0) = 1 - Dbar` and `d/dX Pbar(1) = L^k 1` hold to roundoff.
pub fn preimage_poly_step(
    op: &OperatorDiscretization,
    f: &PolynomialField,
) -> Result<PolynomialField, CoreError> {
    if f.m != op.m() {
        return Err(CoreError::DimensionMismatch { left: f.m, right: op.m() });
    }
    let stride = f.max_degree + 1;
    let d_in = f.degree;
    let d_out = (2 * d_in).min(f.max_degree);
    let mut rows = vec![0.0; f.m * stride];
    rows.par_chunks_mut(stride).enumerate().for_each(|(j, out)| {
        let c = op.preimage_cells(j);
        let w = op.preimage_weights(j);
        let q = |cell: usize, d: usize| -> f64 {
            f.rows[cell * stride + d] - if d == 0 { 1.0 } else { 0.0 }
        };
        for (d, o) in out.iter_mut().enumerate().take(d_in + 1) {
            *o = w[0] * q(c[0], d) + w[1] * q(c[1], d);
        }
        let ww = w[0] * w[1];
        for a in 0..=d_in.min(d_out) {
            let qa = q(c[0], a);
            if qa == 0.0 {
                continue;
            }
            for b in 0..=d_in.min(d_out - a) {
                out[a + b] += ww * qa * q(c[1], b);
            }
        }
        out[0] += 1.0;
    });
    Ok(PolynomialField { m: f.m, max_degree: f.max_degree, degree: d_out, rows })
}

/// The number of `k`-step `f_N`-preimages of every grid point, by iterated
/// exact count pushforward.
pub fn preimage_counts(map: &DiscretizedMap, k: usize) -> Vec<u64> {
    let mut counts = vec![1u64; map.n()];
    for _ in 0..k {
        counts = map.pushforward_counts(&counts);
    }
    counts
}

/// One independently sampled point per component: `count` copies, each point
/// carrying mass `multiplicity / N`, positions drawn from the distribution
/// whose centered CDF is `cdf`.
#[derive(Debug, Clone)]
pub struct ProcessComponent {
    pub count: u64,
    pub multiplicity: u64,
    pub cdf: CdfMinusAvg,
}

/// A random atomic measure `nu = sum_i (m_i / N) delta_{p_i}` with
/// independent `p_i`; `N = sum_i m_i` so `nu` is a probability measure.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    components: Vec<ProcessComponent>,
}

impl ProcessSpec {
    /// One component per entry, all counts 1.
    pub fn new(cdfs: Vec<CdfMinusAvg>, multiplicities: Vec<u64>) -> Result<Self, CoreError> {
        if cdfs.len() != multiplicities.len() {
            return Err(CoreError::DimensionMismatch {
                left: cdfs.len(),
                right: multiplicities.len(),
            });
        }
        let components = cdfs
            .into_iter()
            .zip(multiplicities)
            .map(|(cdf, multiplicity)| ProcessComponent { count: 1, multiplicity, cdf })
            .collect();
        Self::from_components(components)
    }

    pub fn from_components(components: Vec<ProcessComponent>) -> Result<Self, CoreError> {
        if components.is_empty() {
            return Err(CoreError::InvalidState("process needs at least one component".into()));
        }
        if components.iter().any(|c| c.multiplicity == 0 || c.count == 0) {
            return Err(CoreError::InvalidState(
                "component multiplicities and counts must be positive".into(),
            ));
        }
        Ok(ProcessSpec { components })
    }

    pub fn components(&self) -> &[ProcessComponent] {
        &self.components
    }

    /// Total mass denominator `N = sum count * multiplicity`.
    pub fn total(&self) -> u64 {
        self.components.iter().map(|c| c.count * c.multiplicity).sum()
    }

    /// Centered CDF of the mean measure `E[nu] = sum (count m / N) mu_i`.
    pub fn mean_cdf(&self) -> CdfMinusAvg {
        let n = self.total() as f64;
        let parts: Vec<(f64, &CdfMinusAvg)> = self
            .components
            .iter()
            .map(|c| ((c.count * c.multiplicity) as f64 / n, &c.cdf))
            .collect();
        CdfMinusAvg::combine(&parts)
    }
}

/// Exact expectation of the squared quadratic distance between a fixed
/// measure (given by its centered CDF `base`) and one draw of the process:
///
/// ```text
/// E d(nu, base)^2 = d(base, E[nu])^2
///                 + sum_i count_i (m_i/N)^2 (1/12 - d(mu_i, Leb)^2)
/// ```
///
/// The second sum is the sampling variance: each component contributes its
/// own spread around its mean, maximal (1/12) for a deterministic point.
pub fn expected_process_distance(spec: &ProcessSpec, base: &CdfMinusAvg) -> f64 {
    let (bias, spread) = expected_process_distance_parts(spec, base);
    bias + spread
}

/// The two terms of [`expected_process_distance`] reported separately:
/// `(bias, spread)` where `bias` is the squared distance from `base` to the
/// process mean and `spread` is the summed per-component sampling variance.
pub fn expected_process_distance_parts(spec: &ProcessSpec, base: &CdfMinusAvg) -> (f64, f64) {
    let n = spec.total() as f64;
    let mean = spec.mean_cdf();
    let mut spread = Kahan::new();
    for c in spec.components() {
        let frac = c.multiplicity as f64 / n;
        let var = 1.0 / 12.0 - c.cdf.distance_sq_to_lebesgue();
        spread.add(c.count as f64 * frac * frac * var);
    }
    (base.distance_sq(&mean), spread.value())
}

/// Per-multiplicity data extracted from a polynomial field: the integrals
/// `int a_m` and, for each contributing `m >= 1`, the centered CDF of the
/// normalized coefficient density `a_m / int a_m`.
#[derive(Debug, Clone)]
pub struct CoefficientComponents {
    pub integrals: Vec<f64>,
    pub cdfs: Vec<Option<CdfMinusAvg>>,
}

/// Coefficient columns with `int a_m` below this are treated as absent.
const NEGLIGIBLE_COLUMN: f64 = 1e-14;

pub fn coefficient_components(field: &PolynomialField) -> CoefficientComponents {
    let deg = field.degree();
    let mut integrals = Vec::with_capacity(deg + 1);
    let mut cdfs = Vec::with_capacity(deg + 1);
    for d in 0..=deg {
        let integral = field.column_integral(d);
        integrals.push(integral);
        if d >= 1 && integral > NEGLIGIBLE_COLUMN {
            // Coefficients are probabilities; clamp the roundoff negatives.
            let vals: Vec<f64> = field.column(d).iter().map(|&v| v.max(0.0)).collect();
            let dens = PiecewiseDensity::normalized(vals);
            cdfs.push(Some(CdfMinusAvg::from_measure(&dens)));
        } else {
            cdfs.push(None);
        }
    }
    CoefficientComponents { integrals, cdfs }
}

/// Direct coefficient-weighted prediction of the expected squared distance
/// between the discretized iterate and its smooth limit, scaled by `N^2`:
///
/// ```text
/// p(k) = sum_{m >= 1} (int a_m)^2 (1/12 - d(a_m / int a_m, Leb)^2)
/// ```
pub fn pk_direct(comp: &CoefficientComponents) -> f64 {
    let mut s = Kahan::new();
    for (m, cdf) in comp.cdfs.iter().enumerate() {
        if let Some(cdf) = cdf {
            let w = comp.integrals[m];
            s.add(w * w * (1.0 / 12.0 - cdf.distance_sq_to_lebesgue()));
        }
    }
    s.value()
}

/// Builds the integer point process that models one draw of the random
/// discretized iterate: `floor(p * lambda_m)` independent atoms of
/// multiplicity `m`, where `lambda_m` is the fraction of occupied cells
/// carrying exactly `m` preimages (`int a_m / sum_n int a_n`). As `p` grows
/// the mean of this process converges to the coefficient mean density, and
/// the counts of the true image set are recovered at `p ≈ (occupied cells)`.
/// Returns `None` when every count floors to zero.
pub fn coefficient_process_spec(comp: &CoefficientComponents, p: u64) -> Option<ProcessSpec> {
    let mut occupied = Kahan::new();
    for (m, cdf) in comp.cdfs.iter().enumerate() {
        if cdf.is_some() {
            occupied.add(comp.integrals[m]);
        }
    }
    let occupied = occupied.value();
    if occupied <= 0.0 {
        return None;
    }
    let mut components = Vec::new();
    for (m, cdf) in comp.cdfs.iter().enumerate() {
        if let Some(cdf) = cdf {
            let count = (p as f64 * comp.integrals[m] / occupied).floor() as u64;
            if count > 0 {
                components.push(ProcessComponent {
                    count,
                    multiplicity: m as u64,
                    cdf: cdf.clone(),
                });
            }
        }
    }
    ProcessSpec::from_components(components).ok()
}

/// The prediction rephrased through the point process of
/// [`coefficient_process_spec`]: the exact expected squared distance between
/// one draw with resolution parameter `p` and `base`. Unlike [`pk_direct`]
/// this is an unscaled expectation, of order `1/p`; the two quantities answer
/// different normalizations of the same question and are both reported.
/// Returns `None` when every component count floors to zero.
pub fn pk_point_process(
    comp: &CoefficientComponents,
    p: u64,
    base: &CdfMinusAvg,
) -> Option<f64> {
    let spec = coefficient_process_spec(comp, p)?;
    Some(expected_process_distance(&spec, base))
}

/// The mean preimage-count density `sum_m m a_m`, normalized. This is the
/// natural base measure for [`pk_point_process`]: the smooth density the
/// process approximates.
pub fn coefficient_mean_density(field: &PolynomialField) -> PiecewiseDensity {
    let vals: Vec<f64> = (0..field.m())
        .map(|j| field.derivative_at_one(j).max(0.0))
        .collect();
    PiecewiseDensity::normalized(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expanding_map::MapParams;
    use crate::measure;

    /// A one-node operator with both branch weights 1/2: the exactly solvable
    /// constant-slope-2 model.
    fn constant_slope_two() -> OperatorDiscretization {
        OperatorDiscretization::from_parts(vec![[0, 0]], vec![[0.5, 0.5]]).unwrap()
    }

    #[test]
    fn mean_density_hand_recursion() {
        // d_{k+1} = 1 - (1 - d_k/2)^2: 1, 3/4, 39/64, ...
        let op = constant_slope_two();
        let ds = mean_densities(&op, 6).unwrap();
        let mut want = 1.0_f64;
        for (k, d) in ds.iter().enumerate() {
            assert!((d.values()[0] - want).abs() < 1e-15, "k={k}");
            want = 1.0 - (1.0 - 0.5 * want) * (1.0 - 0.5 * want);
        }
        assert!((ds[1].values()[0] - 0.75).abs() < 1e-15);
        assert!((ds[2].values()[0] - 39.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn injectivity_rates_small_table() {
        // 0 -> 1 -> 2 -> 2, 3 -> 2: image sets {0..3}, {1,2}, {2}, {2}.
        let map = DiscretizedMap::from_table(vec![1, 2, 2, 2]).unwrap();
        assert_eq!(rates_of_injectivity(&map, 3), vec![1.0, 0.5, 0.25, 0.25]);
    }

    #[test]
    fn doubling_keeps_full_rate() {
        // An odd modulus makes i -> 2i mod n a bijection.
        let n = 101;
        let table: Vec<u32> = (0..n).map(|i| (2 * i % n) as u32).collect();
        let map = DiscretizedMap::from_table(table).unwrap();
        assert!(rates_of_injectivity(&map, 10).iter().all(|&r| r == 1.0));
    }

    #[test]
    fn binomial_polynomial_one_step() {
        // Constant-slope-2: each branch contributes Bernoulli(1/2), so
        // Pbar_1 = ((1 + X)/2)^2 = 1/4 + X/2 + X^2/4.
        let op = constant_slope_two();
        let f1 = preimage_poly_step(&op, &PolynomialField::initial(1, 8)).unwrap();
        assert!((f1.coefficient(0, 0) - 0.25).abs() < 1e-15);
        assert!((f1.coefficient(0, 1) - 0.5).abs() < 1e-15);
        assert!((f1.coefficient(0, 2) - 0.25).abs() < 1e-15);
        assert_eq!(f1.degree(), 2);
    }

    #[test]
    fn polynomial_identities_track_companions() {
        // Pbar(1) = 1, Pbar(0) = 1 - Dbar, d/dX Pbar(1) = L^k 1,
        // all on the analytic map at modest resolution.
        let op = OperatorDiscretization::new(&MapParams::default(), 128).unwrap();
        let mut field = PolynomialField::initial(op.m(), 64);
        let mut dens = DensityField::initial(op.m());
        let mut lk1 = vec![1.0; op.m()];
        for _k in 0..5 {
            field = preimage_poly_step(&op, &field).unwrap();
            dens = mean_density_step(&op, &dens).unwrap();
            lk1 = op.apply_raw(&lk1);
            for j in (0..op.m()).step_by(17) {
                assert!((field.value_at_one(j) - 1.0).abs() < 1e-12);
                assert!((field.value_at_zero(j) - (1.0 - dens.values()[j])).abs() < 1e-12);
                assert!((field.derivative_at_one(j) - lk1[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn truncation_caps_degree() {
        let op = constant_slope_two();
        let mut field = PolynomialField::initial(1, 4);
        for _ in 0..5 {
            field = preimage_poly_step(&op, &field).unwrap();
        }
        assert_eq!(field.degree(), 4);
        // Truncation only discards mass (counts above 4). The count mean is 1,
        // so Markov bounds the discarded tail well below 1/4.
        let kept = field.value_at_one(0);
        assert!(kept < 1.0 && kept > 0.75, "kept={kept}");
    }

    #[test]
    fn process_distance_single_uniform_point() {
        // One point drawn from Lebesgue vs Lebesgue itself:
        // E d^2 = 0 + (1/12 - 0) = 1/12.
        let spec = ProcessSpec::new(vec![CdfMinusAvg::lebesgue()], vec![1]).unwrap();
        let d = expected_process_distance(&spec, &CdfMinusAvg::lebesgue());
        assert!((d - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn process_distance_merging_components() {
        // Splitting "count" across identical entries cannot change anything.
        let u = CdfMinusAvg::lebesgue();
        let merged = ProcessSpec::from_components(vec![ProcessComponent {
            count: 4,
            multiplicity: 2,
            cdf: u.clone(),
        }])
        .unwrap();
        let split = ProcessSpec::new(vec![u.clone(); 4], vec![2; 4]).unwrap();
        let base = CdfMinusAvg::from_measure(&measure::GridMeasure::lebesgue(16));
        let a = expected_process_distance(&merged, &base);
        let b = expected_process_distance(&split, &base);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn uniform_empirical_process_closed_form() {
        // N unit-mass points each drawn from Lebesgue, compared to Lebesgue:
        // E d^2 = N (1/N^2)(1/12) = 1/(12 N).
        let n = 100u64;
        let spec = ProcessSpec::new(vec![CdfMinusAvg::lebesgue(); n as usize], vec![1; n as usize])
            .unwrap();
        let d = expected_process_distance(&spec, &CdfMinusAvg::lebesgue());
        assert!((d - 1.0 / (12.0 * n as f64)).abs() < 1e-15);
    }

    /// Least-squares slope of ln(y) against ln(x).
    fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        cov / var
    }

    #[test]
    fn process_bias_term_decays_faster_than_spread() {
        // Floored counts p*lambda_m approximate the mixture weights with an
        // O(1/p) error, so the bias term (squared) falls like 1/p^2 while the
        // sampling-variance term falls like 1/p and dominates for large p.
        let op = OperatorDiscretization::new(&MapParams::default(), 256).unwrap();
        let mut field = PolynomialField::initial(op.m(), 16);
        for _ in 0..2 {
            field = preimage_poly_step(&op, &field).unwrap();
        }
        let comp = coefficient_components(&field);
        let base = CdfMinusAvg::from_measure(&coefficient_mean_density(&field));
        let ps = [100u64, 316, 1000, 3162, 10000];
        let mut biases = Vec::new();
        let mut spreads = Vec::new();
        for &p in &ps {
            let spec = coefficient_process_spec(&comp, p).unwrap();
            let (bias, spread) = expected_process_distance_parts(&spec, &base);
            assert!(bias > 0.0 && spread > 0.0, "p={p} bias={bias} spread={spread}");
            biases.push(bias);
            spreads.push(spread);
        }
        let xs: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
        let bias_slope = log_log_slope(&xs, &biases);
        let spread_slope = log_log_slope(&xs, &spreads);
        assert!(bias_slope < -1.5, "bias slope {bias_slope}");
        assert!(
            (-1.15..=-0.85).contains(&spread_slope),
            "spread slope {spread_slope}"
        );
        assert!(spreads[4] > 10.0 * biases[4], "spread should dominate at p=10^4");
    }
}
