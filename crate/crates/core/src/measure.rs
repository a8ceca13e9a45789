//! Measures on the circle and exact distances between them.
//!
//! Distances are computed from the difference of distribution functions
//! `H = F_mu - F_nu` (CDFs from basepoint 0). `H` is piecewise linear with
//! jumps, so every integral below has a closed form per segment; there is no
//! quadrature anywhere in this module. The two distances are
//!
//! * quadratic / Cramér: `d(mu, nu) = min_c (int (H - c)^2)^(1/2)`, minimized
//!   at `c = int H`, so `d^2 = int H^2 - (int H)^2`;
//! * Wasserstein-1 on the circle: `min_c int |H - c|`, minimized at a median
//!   of `H`.
//!
//! `H` is built by a single merge sweep over the *signed* measure `mu - nu`
//! rather than by subtracting two separately accumulated CDFs, which would
//! cancel catastrophically for nearby measures.

use crate::grid::DiscretizedMap;
use crate::util::Kahan;
use crate::CoreError;

/// Grid position `i/n`. All modules must compute grid coordinates through
/// this function so that equal positions are bit-equal in merge sweeps.
#[inline]
pub fn grid_pos(i: usize, n: usize) -> f64 {
    i as f64 / n as f64
}

/// A probability measure supported on the grid `{i/n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    weights: Vec<f64>,
}

impl GridMeasure {
    /// Validates: nonnegative weights summing to 1 within 1e-12.
    pub fn new(weights: Vec<f64>) -> Result<Self, CoreError> {
        if weights.is_empty() {
            return Err(CoreError::InvalidState("grid measure needs n >= 1".into()));
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(CoreError::InvalidState("grid measure has a negative weight".into()));
        }
        let mut s = Kahan::new();
        for &w in &weights {
            s.add(w);
        }
        if (s.value() - 1.0).abs() > 1e-12 {
            return Err(CoreError::InvalidState(format!(
                "grid measure mass {} is not 1",
                s.value()
            )));
        }
        Ok(GridMeasure { weights })
    }

    /// Skips validation; for internal mass-preserving transforms.
    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        GridMeasure { weights }
    }

    /// Uniform measure on the grid.
    pub fn lebesgue(n: usize) -> Self {
        assert!(n >= 1);
        GridMeasure { weights: vec![1.0 / n as f64; n] }
    }

    /// Point mass at grid index `i`.
    pub fn dirac(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        GridMeasure { weights: w }
    }

    /// Empirical measure of integer occupation counts.
    pub fn from_counts(counts: &[u64]) -> Self {
        let total: u64 = counts.iter().sum();
        assert!(total > 0, "empty point configuration");
        let t = total as f64;
        GridMeasure { weights: counts.iter().map(|&c| c as f64 / t).collect() }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        let mut s = Kahan::new();
        for &w in &self.weights {
            s.add(w);
        }
        s.value()
    }
}

/// A density on the circle, constant on each of `m` equal cells `[j/m, (j+1)/m)`,
/// with mean 1 (a probability density).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseDensity {
    values: Vec<f64>,
}

impl PiecewiseDensity {
    /// Validates: nonnegative values with mean 1 within 1e-10.
    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        if values.is_empty() {
            return Err(CoreError::InvalidState("density needs m >= 1 cells".into()));
        }
        if values.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(CoreError::InvalidState("density has a negative cell".into()));
        }
        let mut s = Kahan::new();
        for &v in &values {
            s.add(v);
        }
        let mean = s.value() / values.len() as f64;
        if (mean - 1.0).abs() > 1e-10 {
            return Err(CoreError::InvalidState(format!("density mean {mean} is not 1")));
        }
        Ok(PiecewiseDensity { values })
    }

    /// Rescales arbitrary nonnegative cell values to mean 1.
    pub fn normalized(values: Vec<f64>) -> Self {
        let mut s = Kahan::new();
        for &v in &values {
            s.add(v);
        }
        let mean = s.value() / values.len() as f64;
        assert!(mean > 0.0, "cannot normalize a zero density");
        PiecewiseDensity { values: values.iter().map(|&v| v / mean).collect() }
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1);
        PiecewiseDensity { values: vec![1.0; m] }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Borrowed view of a measure, for distance computations.
///
/// `Atoms` must be sorted by position (ascending, positions in `[0,1)`);
/// weights need not be normalized for intermediate uses, but all public
/// distances assume both arguments have equal total mass.
#[derive(Debug, Clone, Copy)]
pub enum MeasureView<'a> {
    Grid(&'a GridMeasure),
    Density(&'a PiecewiseDensity),
    Atoms(&'a [(f64, f64)]),
}

impl<'a> From<&'a GridMeasure> for MeasureView<'a> {
    fn from(g: &'a GridMeasure) -> Self {
        MeasureView::Grid(g)
    }
}

impl<'a> From<&'a PiecewiseDensity> for MeasureView<'a> {
    fn from(d: &'a PiecewiseDensity) -> Self {
        MeasureView::Density(d)
    }
}

impl<'a> From<&'a [(f64, f64)]> for MeasureView<'a> {
    fn from(a: &'a [(f64, f64)]) -> Self {
        debug_assert!(a.windows(2).all(|w| w[0].0 <= w[1].0), "atoms must be sorted");
        debug_assert!(a.iter().all(|&(p, _)| (0.0..1.0).contains(&p)));
        MeasureView::Atoms(a)
    }
}

impl<'a> From<&'a Vec<(f64, f64)>> for MeasureView<'a> {
    fn from(a: &'a Vec<(f64, f64)>) -> Self {
        MeasureView::from(a.as_slice())
    }
}

/// Lebesgue measure as a (one-cell) density, for comparisons against the
/// smooth reference.
pub fn lebesgue() -> PiecewiseDensity {
    PiecewiseDensity::uniform(1)
}

enum Event {
    Jump(f64),
    Slope(f64),
}

/// Streams the CDF events of one measure in position order: atom jumps, or
/// slope changes at density cell boundaries.
struct Cursor<'a> {
    view: MeasureView<'a>,
    idx: usize,
}

impl<'a> Cursor<'a> {
    fn new(view: MeasureView<'a>) -> Self {
        let mut c = Cursor { view, idx: 0 };
        c.skip_zeros();
        c
    }

    fn skip_zeros(&mut self) {
        if let MeasureView::Grid(g) = self.view {
            let w = g.weights();
            while self.idx < w.len() && w[self.idx] == 0.0 {
                self.idx += 1;
            }
        }
    }

    fn peek(&self) -> f64 {
        match self.view {
            MeasureView::Grid(g) => {
                if self.idx < g.n() {
                    grid_pos(self.idx, g.n())
                } else {
                    f64::INFINITY
                }
            }
            MeasureView::Density(d) => {
                if self.idx < d.m() {
                    grid_pos(self.idx, d.m())
                } else {
                    f64::INFINITY
                }
            }
            MeasureView::Atoms(a) => {
                if self.idx < a.len() {
                    a[self.idx].0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn pop(&mut self) -> Event {
        let ev = match self.view {
            MeasureView::Grid(g) => Event::Jump(g.weights()[self.idx]),
            MeasureView::Density(d) => Event::Slope(d.values()[self.idx]),
            MeasureView::Atoms(a) => Event::Jump(a[self.idx].1),
        };
        self.idx += 1;
        self.skip_zeros();
        ev
    }
}

/// Sweeps `H = F_mu - F_nu` (or `F_mu` alone) across `[0, 1)` and emits each
/// maximal segment as `(x0, len, h, slope)` where `H(x) = h + slope (x - x0)`
/// on the segment (jumps applied at the left endpoint).
fn sweep<F: FnMut(f64, f64, f64, f64)>(
    mu: MeasureView<'_>,
    nu: Option<MeasureView<'_>>,
    mut emit: F,
) {
    let mut ca = Cursor::new(mu);
    let mut cb = nu.map(Cursor::new);
    let mut x = 0.0_f64;
    let mut h = Kahan::new(); // jumps plus the linear drift of finished segments
    let (mut sa, mut sb) = (0.0_f64, 0.0_f64);
    loop {
        while ca.peek() == x {
            match ca.pop() {
                Event::Jump(w) => h.add(w),
                Event::Slope(s) => sa = s,
            }
        }
        if let Some(cb) = cb.as_mut() {
            while cb.peek() == x {
                match cb.pop() {
                    Event::Jump(w) => h.add(-w),
                    Event::Slope(s) => sb = s,
                }
            }
        }
        let next = ca
            .peek()
            .min(cb.as_ref().map_or(f64::INFINITY, Cursor::peek))
            .min(1.0);
        let slope = sa - sb;
        if next > x {
            emit(x, next - x, h.value(), slope);
        }
        if next >= 1.0 {
            return;
        }
        h.add(slope * (next - x));
        x = next;
    }
}

/// Quadratic (Cramér) distance on the circle.
pub fn cramer<'a, 'b>(mu: impl Into<MeasureView<'a>>, nu: impl Into<MeasureView<'b>>) -> f64 {
    cramer_sq(mu, nu).sqrt()
}

/// Squared quadratic distance `int H^2 - (int H)^2`.
pub fn cramer_sq<'a, 'b>(mu: impl Into<MeasureView<'a>>, nu: impl Into<MeasureView<'b>>) -> f64 {
    let (mut i1, mut i2) = (Kahan::new(), Kahan::new());
    sweep(mu.into(), Some(nu.into()), |_x0, len, h, s| {
        i1.add(len * (h + 0.5 * s * len));
        i2.add(len * (h * h + h * s * len + s * s * len * len / 3.0));
    });
    let d2 = i2.value() - i1.value() * i1.value();
    d2.max(0.0)
}

/// Wasserstein-1 distance on the circle: `min_c int |H - c|`, the minimum
/// attained at any median of `H` (computed exactly from the segment
/// decomposition, not by scanning candidate `c`).
pub fn wasserstein1<'a, 'b>(mu: impl Into<MeasureView<'a>>, nu: impl Into<MeasureView<'b>>) -> f64 {
    let mut segs: Vec<(f64, f64, f64)> = Vec::new();
    sweep(mu.into(), Some(nu.into()), |_x0, len, h, s| {
        segs.push((len, h, h + s * len));
    });
    let c = linear_segments_median(&segs);
    let mut total = Kahan::new();
    for &(len, a, b) in &segs {
        let (da, db) = (a - c, b - c);
        if da * db >= 0.0 {
            total.add(0.5 * len * (da.abs() + db.abs()));
        } else {
            // One sign change inside the segment: two triangles.
            let t = len * da.abs() / (da.abs() + db.abs());
            total.add(0.5 * (t * da.abs() + (len - t) * db.abs()));
        }
    }
    total.value()
}

/// Exact median of the value distribution of a piecewise-linear function
/// given as segments `(length, left value, right value)` with total length 1.
fn linear_segments_median(segs: &[(f64, f64, f64)]) -> f64 {
    // Candidate medians are segment endpoint values; between consecutive
    // candidates the distribution function of H is linear in c.
    let mut vals: Vec<f64> = Vec::with_capacity(2 * segs.len());
    for &(_, a, b) in segs {
        vals.push(a);
        vals.push(b);
    }
    vals.sort_by(f64::total_cmp);
    vals.dedup();

    // measure{H <= c} and measure{H < c}.
    let le = |c: f64| -> f64 {
        let mut s = Kahan::new();
        for &(len, a, b) in segs {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if c >= hi {
                s.add(len);
            } else if c > lo {
                s.add(len * (c - lo) / (hi - lo));
            }
        }
        s.value()
    };
    let lt = |c: f64| -> f64 {
        let mut s = Kahan::new();
        for &(len, a, b) in segs {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if lo == hi {
                if c > lo {
                    s.add(len);
                }
            } else if c >= hi {
                s.add(len);
            } else if c > lo {
                s.add(len * (c - lo) / (hi - lo));
            }
        }
        s.value()
    };

    // Smallest candidate with measure{H <= v} >= 1/2 (binary search on the
    // monotone function `le`).
    let (mut lo, mut hi) = (0usize, vals.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if le(vals[mid]) >= 0.5 {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let v = vals[lo];
    if lt(v) <= 0.5 || lo == 0 {
        return v;
    }
    // Median lies strictly inside (prev, v), where the distribution is linear.
    let prev = vals[lo - 1];
    let (g0, g1) = (le(prev), lt(v));
    v.min(prev + (0.5 - g0) * (v - prev) / (g1 - g0))
}

/// Covariance-style product of two centered single-jump CDFs:
/// `int g_p g_q = min(p, q) (1 - max(p, q))`, where `g_p` is the CDF of a
/// point mass at `p` minus its average.
pub fn inner_jump(p: f64, q: f64) -> f64 {
    p.min(q) * (1.0 - p.max(q))
}

/// The signed diagnostic `int (f^2 + 2F)` where `f = F_mu - int F_mu` and
/// `F(x) = int_0^x f`. Always `<= 0` (up to roundoff), equals
/// `d(mu, Leb)^2 - 1/12`, and vanishes exactly for a single atom.
pub fn zero_identity_check<'a>(mu: impl Into<MeasureView<'a>>) -> f64 {
    let mu = mu.into();
    let mut avg = Kahan::new();
    sweep(mu, None, |_x0, len, h, s| {
        avg.add(len * (h + 0.5 * s * len));
    });
    let a = avg.value();

    let mut f_sq = Kahan::new();
    let mut big_f_int = Kahan::new();
    let mut big_f = Kahan::new(); // running value of F at the segment start
    sweep(mu, None, |_x0, len, h, s| {
        let v = h - a; // f at segment start
        f_sq.add(len * (v * v + v * s * len + s * s * len * len / 3.0));
        big_f_int.add(len * big_f.value() + len * len * (0.5 * v + s * len / 6.0));
        big_f.add(len * (v + 0.5 * s * len));
    });
    f_sq.value() + 2.0 * big_f_int.value()
}

/// Pushes a grid measure through a discretized map on the same grid.
pub fn pushforward_table(mu: &GridMeasure, map: &DiscretizedMap) -> Result<GridMeasure, CoreError> {
    if mu.n() != map.n() {
        return Err(CoreError::DimensionMismatch { left: mu.n(), right: map.n() });
    }
    let mut out = vec![0.0; mu.n()];
    for (i, &w) in mu.weights().iter().enumerate() {
        out[map.apply(i)] += w;
    }
    Ok(GridMeasure::from_raw(out))
}

/// Centered moving-window average of a grid measure, as a density with one
/// cell per grid point: `out[j] = (n/w) sum_{o} weights[(j - o) mod n]` over a
/// window of `w` consecutive offsets centered at 0 (for even `w` the window
/// extends one step further to the right). `window = 1` returns the raw
/// weights scaled by `n`.
pub fn smooth(mu: &GridMeasure, window: usize) -> PiecewiseDensity {
    let n = mu.n();
    assert!(window >= 1 && window <= n);
    let w = mu.weights();
    let scale = n as f64 / window as f64;
    let lo = -((window as i64 - 1) / 2);
    let hi = window as i64 / 2;
    // Rolling sum over [j + lo, j + hi] (indices mod n).
    let at = |k: i64| -> f64 { w[(k.rem_euclid(n as i64)) as usize] };
    let mut acc = 0.0;
    for o in lo..=hi {
        acc += at(o);
    }
    let mut out = Vec::with_capacity(n);
    for j in 0..n as i64 {
        out.push(acc * scale);
        acc += at(j + 1 + hi) - at(j + lo);
    }
    PiecewiseDensity { values: out }
}

/// A centered CDF: `F_mu - int F_mu`, stored as a piecewise-linear function
/// with jumps. Linear combinations of these represent CDFs of signed mixtures
/// exactly, which the point-process discrepancy formulas need.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfMinusAvg {
    /// Segment starts; strictly increasing, `breaks[0] == 0.0`, all `< 1`.
    breaks: Vec<f64>,
    /// Value at each segment start (right limit, after any jump).
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CdfMinusAvg {
    pub fn from_measure<'a>(mu: impl Into<MeasureView<'a>>) -> Self {
        let mu = mu.into();
        let mut avg = Kahan::new();
        sweep(mu, None, |_x0, len, h, s| {
            avg.add(len * (h + 0.5 * s * len));
        });
        let a = avg.value();
        let (mut breaks, mut values, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
        sweep(mu, None, |x0, _len, h, s| {
            breaks.push(x0);
            values.push(h - a);
            slopes.push(s);
        });
        CdfMinusAvg { breaks, values, slopes }
    }

    /// Centered CDF of Lebesgue measure: `x - 1/2`.
    pub fn lebesgue() -> Self {
        CdfMinusAvg { breaks: vec![0.0], values: vec![-0.5], slopes: vec![1.0] }
    }

    pub fn segments(&self) -> usize {
        self.breaks.len()
    }

    /// `int_0^1` of the function; ~0 by construction, exposed as a diagnostic.
    pub fn integral(&self) -> f64 {
        let mut s = Kahan::new();
        self.for_each_segment(|len, v, sl| s.add(len * (v + 0.5 * sl * len)));
        s.value()
    }

    fn for_each_segment<F: FnMut(f64, f64, f64)>(&self, mut f: F) {
        for k in 0..self.breaks.len() {
            let end = if k + 1 < self.breaks.len() { self.breaks[k + 1] } else { 1.0 };
            f(end - self.breaks[k], self.values[k], self.slopes[k]);
        }
    }

    /// Weighted sum `sum_i lambda_i f_i` on the merged break set.
    pub fn combine(parts: &[(f64, &CdfMinusAvg)]) -> Self {
        assert!(!parts.is_empty());
        let mut acc = CdfMinusAvg {
            breaks: vec![0.0],
            values: vec![0.0],
            slopes: vec![0.0],
        };
        for &(lambda, f) in parts {
            acc = acc.merged(f, |a, b| a + lambda * b);
        }
        acc
    }

    /// Pointwise merge of two centered CDFs on the union of their breaks.
    fn merged(&self, other: &CdfMinusAvg, op: impl Fn(f64, f64) -> f64) -> CdfMinusAvg {
        let (mut ia, mut ib) = (0usize, 0usize);
        let mut breaks = Vec::with_capacity(self.breaks.len().max(other.breaks.len()));
        let mut values = Vec::with_capacity(breaks.capacity());
        let mut slopes = Vec::with_capacity(breaks.capacity());
        while ia < self.breaks.len() || ib < other.breaks.len() {
            let xa = self.breaks.get(ia).copied().unwrap_or(f64::INFINITY);
            let xb = other.breaks.get(ib).copied().unwrap_or(f64::INFINITY);
            let x = xa.min(xb);
            if xa == x {
                ia += 1;
            }
            if xb == x {
                ib += 1;
            }
            // ia/ib now point past the segment containing x in each operand.
            let va = self.values[ia - 1] + self.slopes[ia - 1] * (x - self.breaks[ia - 1]);
            let vb = other.values[ib - 1] + other.slopes[ib - 1] * (x - other.breaks[ib - 1]);
            breaks.push(x);
            values.push(op(va, vb));
            slopes.push(op(self.slopes[ia - 1], other.slopes[ib - 1]));
        }
        CdfMinusAvg { breaks, values, slopes }
    }

    /// `int f g` over the circle (exact on merged segments).
    pub fn inner(&self, other: &CdfMinusAvg) -> f64 {
        let mut s = Kahan::new();
        self.merged_for_each(other, |len, a0, sa, b0, sb| {
            s.add(len * (a0 * b0 + 0.5 * (a0 * sb + b0 * sa) * len + sa * sb * len * len / 3.0));
        });
        s.value()
    }

    /// Squared quadratic distance between the underlying measures:
    /// `int (f - g)^2 - (int (f - g))^2`.
    pub fn distance_sq(&self, other: &CdfMinusAvg) -> f64 {
        let (mut i1, mut i2) = (Kahan::new(), Kahan::new());
        self.merged_for_each(other, |len, a0, sa, b0, sb| {
            let (v, s) = (a0 - b0, sa - sb);
            i1.add(len * (v + 0.5 * s * len));
            i2.add(len * (v * v + v * s * len + s * s * len * len / 3.0));
        });
        (i2.value() - i1.value() * i1.value()).max(0.0)
    }

    /// `d(mu, Leb)^2` for the measure this centered CDF came from.
    pub fn distance_sq_to_lebesgue(&self) -> f64 {
        self.distance_sq(&CdfMinusAvg::lebesgue())
    }

    fn merged_for_each(
        &self,
        other: &CdfMinusAvg,
        mut f: impl FnMut(f64, f64, f64, f64, f64),
    ) {
        let (mut ia, mut ib) = (0usize, 0usize);
        let mut x = 0.0_f64;
        // Both break lists start at 0.0.
        while x < 1.0 {
            let next_a = self.breaks.get(ia + 1).copied().unwrap_or(1.0);
            let next_b = other.breaks.get(ib + 1).copied().unwrap_or(1.0);
            let next = next_a.min(next_b).min(1.0);
            let a0 = self.values[ia] + self.slopes[ia] * (x - self.breaks[ia]);
            let b0 = other.values[ib] + other.slopes[ib] * (x - other.breaks[ib]);
            if next > x {
                f(next - x, a0, self.slopes[ia], b0, other.slopes[ib]);
            }
            if next_a == next {
                ia += 1;
            }
            if next_b == next {
                ib += 1;
            }
            x = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atoms(ps: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut v = ps.to_vec();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    #[test]
    fn grid_vs_lebesgue_closed_form() {
        // d(Leb_N, Leb) = 1/(N sqrt(12)).
        for n in [10usize, 100, 1000] {
            let g = GridMeasure::lebesgue(n);
            let d = cramer(&g, &lebesgue());
            let want = 1.0 / (n as f64 * 12f64.sqrt());
            assert!((d - want).abs() < 1e-12, "n={n}: {d} vs {want}");
        }
    }

    #[test]
    fn equispaced_atoms_vs_lebesgue() {
        // N equispaced atoms anywhere have d^2 = 1/(12 N^2).
        for n in [7usize, 32] {
            let off = 0.013;
            let pts = atoms(
                &(0..n)
                    .map(|i| ((grid_pos(i, n) + off) % 1.0, 1.0 / n as f64))
                    .collect::<Vec<_>>(),
            );
            let d2 = cramer_sq(&pts, &lebesgue());
            assert!((d2 - 1.0 / (12.0 * (n * n) as f64)).abs() < 1e-13);
        }
    }

    #[test]
    fn dirac_pair_distance() {
        let a = atoms(&[(0.0, 1.0)]);
        let b = atoms(&[(0.5, 1.0)]);
        assert!((cramer_sq(&a, &b) - 0.25).abs() < 1e-15);
        assert!((wasserstein1(&a, &b) - 0.5).abs() < 1e-15);
        // Any point mass is at squared distance exactly 1/12 from Lebesgue.
        for p in [0.0, 0.3, 0.77] {
            let d = atoms(&[(p, 1.0)]);
            assert!((cramer_sq(&d, &lebesgue()) - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_measures_are_at_zero_distance() {
        let g = GridMeasure::lebesgue(37);
        assert_eq!(cramer(&g, &g), 0.0);
        let a = atoms(&[(0.1, 0.5), (0.6, 0.25), (0.9, 0.25)]);
        assert_eq!(cramer(&a, &a), 0.0);
        assert_eq!(wasserstein1(&a, &a), 0.0);
    }

    #[test]
    fn wasserstein_grid_vs_lebesgue() {
        // H is a sawtooth on (0, 1/N]; min_c int |H - c| = 1/(4N).
        for n in [10usize, 64] {
            let d = wasserstein1(&GridMeasure::lebesgue(n), &lebesgue());
            assert!((d - 0.25 / n as f64).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn wasserstein_matches_scan_minimum() {
        // The exact median minimizer beats (or ties) a dense scan over c.
        let a = atoms(&[(0.05, 0.3), (0.31, 0.45), (0.8, 0.25)]);
        let b = GridMeasure::lebesgue(13);
        let got = wasserstein1(&a, &b);
        let mut segs = Vec::new();
        sweep((&a).into(), Some((&b).into()), |_x, len, h, s| segs.push((len, h, h + s * len)));
        let cost = |c: f64| -> f64 {
            segs.iter()
                .map(|&(len, u, v)| {
                    let (da, db) = (u - c, v - c);
                    if da * db >= 0.0 {
                        0.5 * len * (da.abs() + db.abs())
                    } else {
                        let t = len * da.abs() / (da.abs() + db.abs());
                        0.5 * (t * da.abs() + (len - t) * db.abs())
                    }
                })
                .sum()
        };
        let scan = (0..20000)
            .map(|i| cost(-1.0 + i as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        assert!(got <= scan + 1e-9, "median {got} vs scan {scan}");
        // The scan only locates the minimum to its own 1e-4 step size.
        assert!((got - scan).abs() < 2e-4);
    }

    #[test]
    fn jump_product_closed_form() {
        // int g_p g_q against exact segment integration of the two CDFs.
        for &(p, q) in &[(0.2, 0.7), (0.5, 0.5), (0.0, 0.9), (0.33, 0.11)] {
            let gp = CdfMinusAvg::from_measure(&atoms(&[(p, 1.0)]));
            let gq = CdfMinusAvg::from_measure(&atoms(&[(q, 1.0)]));
            assert!((gp.inner(&gq) - inner_jump(p, q)).abs() < 1e-14, "p={p} q={q}");
        }
    }

    #[test]
    fn zero_identity_closed_forms() {
        // Lebesgue: int f^2 = 1/12, 2 int F = -2/12, total -1/12.
        let v = zero_identity_check(&lebesgue());
        assert!((v + 1.0 / 12.0).abs() < 1e-15);
        // A single atom gives exactly zero (analytically).
        for p in [0.0, 0.25, 0.9] {
            let v = zero_identity_check(&atoms(&[(p, 1.0)]));
            assert!(v.abs() < 1e-15, "p={p}: {v}");
        }
    }

    #[test]
    fn zero_identity_matches_distance() {
        // int (f^2 + 2F) = d(mu, Leb)^2 - 1/12 via an independent code path.
        let mu = atoms(&[(0.12, 0.2), (0.4, 0.5), (0.55, 0.1), (0.91, 0.2)]);
        let lhs = zero_identity_check(&mu);
        let rhs = cramer_sq(&mu, &lebesgue()) - 1.0 / 12.0;
        assert!((lhs - rhs).abs() < 1e-13);
        assert!(lhs <= 1e-15);
    }

    #[test]
    fn pushforward_conserves_mass() {
        let map = DiscretizedMap::from_table(vec![3, 3, 0, 1]).unwrap();
        let mu = GridMeasure::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let push = pushforward_table(&mu, &map).unwrap();
        assert!((push.mass() - 1.0).abs() < 1e-15);
        assert_eq!(push.weights()[3], 0.1 + 0.2);
        assert_eq!(push.weights()[2], 0.0);
        let small = GridMeasure::lebesgue(3);
        assert!(pushforward_table(&small, &map).is_err());
    }

    #[test]
    fn smoothing_window_conventions() {
        let n = 1000;
        // window 1 is the identity scaled by n.
        let mu = GridMeasure::dirac(n, 0);
        let s1 = smooth(&mu, 1);
        assert_eq!(s1.values()[0], n as f64);
        assert_eq!(s1.values()[5], 0.0);
        // Uniform input stays the constant density 1.
        let flat = smooth(&GridMeasure::lebesgue(n), 500);
        assert!(flat.values().iter().all(|&v| (v - 1.0).abs() < 1e-9));
        // A point mass spreads to a plateau of height n/window over window cells.
        let s = smooth(&mu, 500);
        let plateau = s.values().iter().filter(|&&v| (v - 2.0).abs() < 1e-9).count();
        assert_eq!(plateau, 500);
    }

    #[test]
    fn centered_cdf_agrees_with_sweep_distance() {
        let a = atoms(&[(0.15, 0.6), (0.7, 0.4)]);
        let g = GridMeasure::lebesgue(17);
        let fa = CdfMinusAvg::from_measure(&a);
        let fg = CdfMinusAvg::from_measure(&g);
        assert!(fa.integral().abs() < 1e-15);
        assert!((fa.distance_sq(&fg) - cramer_sq(&a, &g)).abs() < 1e-14);
        assert!((fa.distance_sq_to_lebesgue() - cramer_sq(&a, &lebesgue())).abs() < 1e-14);
    }

    #[test]
    fn combine_is_the_cdf_of_the_mixture() {
        let p = atoms(&[(0.2, 1.0)]);
        let q = atoms(&[(0.65, 1.0)]);
        let mix_direct = CdfMinusAvg::from_measure(&atoms(&[(0.2, 0.3), (0.65, 0.7)]));
        let gp = CdfMinusAvg::from_measure(&p);
        let gq = CdfMinusAvg::from_measure(&q);
        let mix = CdfMinusAvg::combine(&[(0.3, &gp), (0.7, &gq)]);
        assert!(mix.distance_sq(&mix_direct) < 1e-28);
    }

    proptest! {
        #[test]
        fn cramer_is_symmetric_and_triangular(
            raw_a in proptest::collection::vec((0.0_f64..1.0, 0.05_f64..1.0), 1..6),
            raw_b in proptest::collection::vec((0.0_f64..1.0, 0.05_f64..1.0), 1..6),
            raw_c in proptest::collection::vec((0.0_f64..1.0, 0.05_f64..1.0), 1..6),
        ) {
            let norm = |raw: &[(f64, f64)]| {
                let t: f64 = raw.iter().map(|&(_, w)| w).sum();
                atoms(&raw.iter().map(|&(p, w)| (p, w / t)).collect::<Vec<_>>())
            };
            let (a, b, c) = (norm(&raw_a), norm(&raw_b), norm(&raw_c));
            let dab = cramer(&a, &b);
            prop_assert!((dab - cramer(&b, &a)).abs() < 1e-15);
            prop_assert!(dab <= cramer(&a, &c) + cramer(&c, &b) + 1e-12);
        }

        #[test]
        fn zero_identity_is_nonpositive_and_consistent(
            raw in proptest::collection::vec((0.0_f64..1.0, 0.05_f64..1.0), 1..8),
        ) {
            let t: f64 = raw.iter().map(|&(_, w)| w).sum();
            let mu = atoms(&raw.iter().map(|&(p, w)| (p, w / t)).collect::<Vec<_>>());
            let v = zero_identity_check(&mu);
            prop_assert!(v <= 1e-12);
            let rhs = cramer_sq(&mu, &lebesgue()) - 1.0 / 12.0;
            prop_assert!((v - rhs).abs() < 1e-12);
        }
    }
}
