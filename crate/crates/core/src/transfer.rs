//! Collocation discretization of the transfer operator
//!
//! ```text
//! (L phi)(y) = sum_{f(x) = y} phi(x) / f'(x)
//! ```
//!
//! on the midpoints `y_j = (j + 1/2)/m` of `m` equal cells. For each node the
//! two branch preimages `x` and exact weights `1/f'(x)` are cached once;
//! applying the operator then reads `phi` at the cell containing each
//! preimage. This is a collocation scheme, not a cell-to-cell transition
//! matrix: the same cached structure also drives the preimage-count
//! recursions in [`crate::predictions`], which need the genuinely nonlinear
//! per-branch weights.

use crate::expanding_map::{CirclePoint, MapParams};
use crate::measure::PiecewiseDensity;
use crate::util::Kahan;
use crate::CoreError;
use rayon::prelude::*;

/// Residual tolerance for the cached branch inversions.
const PREIMAGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct OperatorDiscretization {
    /// Present when the discretization came from an analytic map; the
    /// synthetic constructors used in model tests have no map behind them.
    params: Option<MapParams>,
    /// Cell index of each branch preimage of node `j`.
    pre_cells: Vec<[u32; 2]>,
    /// `1/f'(x)` at each branch preimage of node `j`.
    pre_weights: Vec<[f64; 2]>,
}

impl OperatorDiscretization {
    pub fn new(params: &MapParams, m: usize) -> Result<Self, CoreError> {
        assert!(m >= 1 && m <= u32::MAX as usize);
        let per_node: Vec<([u32; 2], [f64; 2])> = (0..m)
            .into_par_iter()
            .map(|j| {
                let y = CirclePoint::new(node_pos(j, m));
                let pre = params.preimages(y, PREIMAGE_TOL)?;
                let cells = [cell_of(pre[0].value(), m) as u32, cell_of(pre[1].value(), m) as u32];
                let weights = [1.0 / params.derivative(pre[0]), 1.0 / params.derivative(pre[1])];
                Ok((cells, weights))
            })
            .collect::<Result<_, CoreError>>()?;
        let (pre_cells, pre_weights) = per_node.into_iter().unzip();
        Ok(OperatorDiscretization { params: Some(*params), pre_cells, pre_weights })
    }

    /// Builds a discretization from explicit preimage structure. Model tests
    /// use this to realize small branching processes exactly; such operators
    /// cannot produce orbit-derivative predictions (no map behind them).
    pub fn from_parts(
        pre_cells: Vec<[u32; 2]>,
        pre_weights: Vec<[f64; 2]>,
    ) -> Result<Self, CoreError> {
        if pre_cells.len() != pre_weights.len() {
            return Err(CoreError::DimensionMismatch {
                left: pre_cells.len(),
                right: pre_weights.len(),
            });
        }
        let m = pre_cells.len();
        if m == 0 {
            return Err(CoreError::InvalidState("operator needs m >= 1 nodes".into()));
        }
        if pre_cells.iter().flatten().any(|&c| c as usize >= m) {
            return Err(CoreError::InvalidState("preimage cell out of range".into()));
        }
        Ok(OperatorDiscretization { params: None, pre_cells, pre_weights })
    }

    pub fn m(&self) -> usize {
        self.pre_cells.len()
    }

    pub fn params(&self) -> Option<&MapParams> {
        self.params.as_ref()
    }

    /// Collocation node `y_j = (j + 1/2)/m`.
    pub fn node(&self, j: usize) -> f64 {
        node_pos(j, self.m())
    }

    pub fn preimage_cells(&self, j: usize) -> [usize; 2] {
        let c = self.pre_cells[j];
        [c[0] as usize, c[1] as usize]
    }

    pub fn preimage_weights(&self, j: usize) -> [f64; 2] {
        self.pre_weights[j]
    }

    /// One application of `L` to raw cell values. No renormalization: the
    /// output's mean drifts from the input's by the quadrature error, and
    /// several consumers (coefficient fields, diagnostics) need exactly the
    /// unnormalized sum.
    pub fn apply_raw(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.m());
        self.pre_cells
            .iter()
            .zip(&self.pre_weights)
            .map(|(c, w)| {
                w[0] * values[c[0] as usize] + w[1] * values[c[1] as usize]
            })
            .collect()
    }

    /// Like [`apply_raw`](Self::apply_raw) but with squared branch weights:
    /// the collocation of `phi -> sum phi(x)/f'(x)^2`. The preimage-count
    /// recursion needs this with bit-exact consistency against `apply_raw`.
    pub fn apply_raw_squared_weights(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.m());
        self.pre_cells
            .iter()
            .zip(&self.pre_weights)
            .map(|(c, w)| {
                w[0] * w[0] * values[c[0] as usize] + w[1] * w[1] * values[c[1] as usize]
            })
            .collect()
    }

    /// `L` restricted to probability densities: apply and renormalize.
    pub fn rpf_apply(&self, d: &PiecewiseDensity) -> PiecewiseDensity {
        PiecewiseDensity::normalized(self.apply_raw(d.values()))
    }

    /// `|mean(L d) - 1|` before renormalization — the quadrature-consistency
    /// diagnostic for a probability density `d`.
    pub fn raw_mass_deviation(&self, d: &PiecewiseDensity) -> f64 {
        let raw = self.apply_raw(d.values());
        let mut s = Kahan::new();
        for &v in &raw {
            s.add(v);
        }
        (s.value() / raw.len() as f64 - 1.0).abs()
    }

    /// The SRB (absolutely continuous invariant) density as the
    /// power-iteration fixed point of [`rpf_apply`](Self::rpf_apply),
    /// starting from the uniform density, stopping when the sup-change drops
    /// below `tol`.
    pub fn srb_density(
        &self,
        tol: f64,
        max_iter: usize,
    ) -> Result<PiecewiseDensity, CoreError> {
        let mut d = PiecewiseDensity::uniform(self.m());
        let mut last_change = f64::INFINITY;
        for _ in 0..max_iter {
            let next = self.rpf_apply(&d);
            last_change = sup_diff(d.values(), next.values());
            d = next;
            if last_change < tol {
                return Ok(d);
            }
        }
        Err(CoreError::NoConvergence { max_iter, last_change })
    }

    /// `sup |L d - d|` (renormalized application) — fixed-point residual.
    pub fn residual_sup(&self, d: &PiecewiseDensity) -> f64 {
        sup_diff(self.rpf_apply(d).values(), d.values())
    }

    /// The densities `L^k 1` for `k = 0..=k_max` (renormalized each step).
    pub fn density_iterates(&self, k_max: usize) -> Vec<PiecewiseDensity> {
        let mut out = Vec::with_capacity(k_max + 1);
        out.push(PiecewiseDensity::uniform(self.m()));
        for _ in 0..k_max {
            out.push(self.rpf_apply(out.last().unwrap()));
        }
        out
    }

    /// The short-term discrepancy predictor for the canonical grid
    /// discretization: for each `k <= k_max`,
    ///
    /// ```text
    /// limit of N^2 d(mu_k^N, f^k Leb)^2  =  1/12 + (1/12) sum_{m=0}^{k-1} < (f^{k-m})' , (L^m 1)^2 >
    /// ```
    ///
    /// with the orbit derivatives `(f^i)'` taken along true orbits of the
    /// analytic map and all brackets as mean values over the nodes.
    pub fn short_term_predictions(&self, k_max: usize) -> Result<Vec<f64>, CoreError> {
        let params = self.params.ok_or_else(|| {
            CoreError::InvalidState("synthetic operator has no analytic map for orbit derivatives".into())
        })?;
        let m = self.m();
        let dens = self.density_iterates(k_max.saturating_sub(1));
        // acc[k] accumulates the bracket sum for horizon k.
        let mut acc = vec![0.0_f64; k_max + 1];
        let mut xs: Vec<f64> = (0..m).map(|j| self.node(j)).collect();
        let mut prod = vec![1.0_f64; m];
        for i in 1..=k_max {
            prod.par_iter_mut().zip(xs.par_iter_mut()).for_each(|(p, x)| {
                let pt = CirclePoint::new(*x);
                *p *= params.derivative(pt);
                *x = params.eval(pt).value();
            });
            // Pair (f^i)' with every density iterate that keeps i + m <= k_max.
            let terms: Vec<f64> = (0..=(k_max - i))
                .into_par_iter()
                .map(|mm| {
                    let dv = dens[mm].values();
                    let mut s = Kahan::new();
                    for j in 0..m {
                        s.add(prod[j] * dv[j] * dv[j]);
                    }
                    s.value() / m as f64
                })
                .collect();
            for (mm, t) in terms.into_iter().enumerate() {
                acc[i + mm] += t;
            }
        }
        Ok(acc.into_iter().map(|a| (1.0 + a) / 12.0).collect())
    }
}

#[inline]
pub(crate) fn node_pos(j: usize, m: usize) -> f64 {
    (j as f64 + 0.5) / m as f64
}

/// Index of the cell `[c/m, (c+1)/m)` containing `x` in `[0, 1)`.
#[inline]
pub(crate) fn cell_of(x: f64, m: usize) -> usize {
    let c = (x * m as f64).floor() as usize;
    c.min(m - 1)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_operator_is_exact() {
        // For x -> 2x both weights are exactly 1/2 and L 1 = 1 bit-exactly,
        // so the invariant density is the constant 1 and power iteration
        // stops immediately.
        let op = OperatorDiscretization::new(&MapParams::doubling(), 1 << 10).unwrap();
        let ones = vec![1.0; op.m()];
        assert_eq!(op.apply_raw(&ones), ones);
        let srb = op.srb_density(1e-12, 5).unwrap();
        assert!(srb.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn mass_is_nearly_conserved_without_renormalization() {
        let op = OperatorDiscretization::new(&MapParams::default(), 1 << 12).unwrap();
        let d = PiecewiseDensity::uniform(op.m());
        assert!(op.raw_mass_deviation(&d) < 1e-6);
    }

    #[test]
    fn srb_density_has_small_residual() {
        let op = OperatorDiscretization::new(&MapParams::default(), 1 << 12).unwrap();
        let srb = op.srb_density(1e-12, 500).unwrap();
        assert!(op.residual_sup(&srb) < 1e-10);
        assert!(srb.values().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn density_iterates_start_at_uniform() {
        let op = OperatorDiscretization::new(&MapParams::default(), 256).unwrap();
        let it = op.density_iterates(3);
        assert_eq!(it.len(), 4);
        assert!(it[0].values().iter().all(|&v| v == 1.0));
        // One step already deviates from uniform.
        assert!(it[1].values().iter().any(|&v| (v - 1.0).abs() > 1e-3));
    }

    #[test]
    fn doubling_predictions_closed_form() {
        // All derivatives are 2 and every density iterate is 1, so the
        // predictor telescopes to (2^(k+1) - 1)/12.
        let op = OperatorDiscretization::new(&MapParams::doubling(), 512).unwrap();
        let pred = op.short_term_predictions(6).unwrap();
        for (k, &p) in pred.iter().enumerate() {
            let want = ((1u64 << (k + 1)) - 1) as f64 / 12.0;
            assert!((p - want).abs() < 1e-12, "k={k}: {p} vs {want}");
        }
        assert_eq!(pred[0], 1.0 / 12.0);
    }

    #[test]
    fn synthetic_operator_rejects_prediction() {
        let op = OperatorDiscretization::from_parts(
            vec![[0, 0]],
            vec![[0.5, 0.5]],
        )
        .unwrap();
        assert!(op.short_term_predictions(2).is_err());
    }

    #[test]
    fn duality_against_composition() {
        // <L phi, psi> = <phi, psi o f> for smooth observables, both sides by
        // midpoint sums. Checks that preimage cells/weights are consistent.
        let params = MapParams::default();
        let m = 1 << 14;
        let op = OperatorDiscretization::new(&params, m).unwrap();
        let phi: Vec<f64> = (0..m)
            .map(|j| 1.0 + 0.1 * (std::f64::consts::TAU * node_pos(j, m)).sin())
            .collect();
        let psi = |x: f64| 1.0 + 0.2 * (2.0 * std::f64::consts::TAU * x).cos();
        let lphi = op.apply_raw(&phi);
        let mut lhs = Kahan::new();
        let mut rhs = Kahan::new();
        for j in 0..m {
            let y = node_pos(j, m);
            lhs.add(lphi[j] * psi(y));
            rhs.add(phi[j] * psi(params.eval(CirclePoint::new(y)).value()));
        }
        let (lhs, rhs) = (lhs.value() / m as f64, rhs.value() / m as f64);
        assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
    }
}
