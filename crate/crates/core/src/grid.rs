//! Uniform grids `E_N = {i/N}` and the ways a map gets forced onto them.
//!
//! The canonical spatial discretization replaces `f` by `P_N ∘ f` on grid
//! points, where `P_N` sends `x` to the nearest grid point (ties round up):
//! grid cell `i` is `[(i - 1/2)/N, (i + 1/2)/N)`. Beyond that deterministic
//! rounding, this module implements the six rounding schemes compared in the
//! experiments — deterministic, frozen-random, per-step-random, two particle
//! variants, and a mass-splitting scheme that is affine on measures.

use crate::expanding_map::{CirclePoint, MapParams};
use crate::measure::{grid_pos, pushforward_table, GridMeasure, MeasureView};
use crate::CoreError;
use rand::Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// The uniform grid of `n` points `{i/n}` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "grid needs at least one point");
        Grid { n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> CirclePoint {
        debug_assert!(i < self.n);
        CirclePoint::new(grid_pos(i, self.n))
    }

    pub fn points(&self) -> impl Iterator<Item = CirclePoint> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

/// Index of the grid point nearest to `x` (ties round up): `floor(nx + 1/2) mod n`.
#[inline]
pub fn project(n: usize, x: CirclePoint) -> usize {
    let i = (n as f64 * x.value() + 0.5).floor() as usize;
    if i >= n {
        i - n
    } else {
        i
    }
}

/// Position of `x` between its two neighboring grid points:
/// `x = (lower + epsilon)/n` with `epsilon` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSplit {
    pub lower: u32,
    pub epsilon: f64,
}

/// Splits `x` into its lower grid neighbor and fractional offset. The random
/// schemes round to `lower + 1 (mod n)` with probability `epsilon`, which
/// makes the grid point an unbiased representative of `x`.
#[inline]
pub fn round_split(n: usize, x: CirclePoint) -> RoundSplit {
    let scaled = n as f64 * x.value();
    let i = scaled.floor();
    // x < 1 guarantees scaled < n mathematically; rounding can still land on n.
    if i >= n as f64 {
        return RoundSplit { lower: 0, epsilon: 0.0 };
    }
    RoundSplit { lower: i as u32, epsilon: scaled - i }
}

/// A self-map of `{0, .., n-1}`: the object a grid forces any dynamics into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedMap {
    table: Vec<u32>,
}

impl DiscretizedMap {
    pub fn from_table(table: Vec<u32>) -> Result<Self, CoreError> {
        let n = table.len();
        if n == 0 || n > u32::MAX as usize {
            return Err(CoreError::InvalidState(format!("unsupported table size {n}")));
        }
        if let Some(&bad) = table.iter().find(|&&j| j as usize >= n) {
            return Err(CoreError::DimensionMismatch { left: bad as usize, right: n });
        }
        Ok(DiscretizedMap { table })
    }

    /// The canonical discretization `i -> project(n, f(i/n))`.
    pub fn discretize(params: &MapParams, n: usize) -> Self {
        assert!(n >= 1 && n <= u32::MAX as usize);
        let table = (0..n)
            .into_par_iter()
            .map(|i| project(n, params.eval(CirclePoint::new(grid_pos(i, n)))) as u32)
            .collect();
        DiscretizedMap { table }
    }

    /// A uniformly random functional table (the mean-field comparison model
    /// for orbit statistics).
    pub fn random_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1 && n <= u32::MAX as usize);
        let table = (0..n).map(|_| rng.random_range(0..n as u32)).collect();
        DiscretizedMap { table }
    }

    pub fn n(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.table[i] as usize
    }

    /// `k`-fold application to a single index.
    pub fn apply_iter(&self, i: usize, k: usize) -> usize {
        let mut j = i;
        for _ in 0..k {
            j = self.apply(j);
        }
        j
    }

    /// Pushes integer occupation counts through the map (exact arithmetic).
    pub fn pushforward_counts(&self, counts: &[u64]) -> Vec<u64> {
        assert_eq!(counts.len(), self.n());
        let mut out = vec![0u64; counts.len()];
        for (i, &c) in counts.iter().enumerate() {
            out[self.table[i] as usize] += c;
        }
        out
    }
}

/// The six rounding schemes compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Deterministic nearest-point rounding of `f` on the grid.
    MapToClosest,
    /// One random rounding table drawn up front, then reused every step.
    OnceDecidedRandom,
    /// A fresh random rounding table at every step.
    StepwiseRandom,
    /// `n` particles on the grid, each rounded independently every step.
    PointsRandomOnGrid,
    /// `n` exact circle points, perturbed uniformly in `±1/(2n)` after each
    /// application of `f` (never re-gridded).
    PointsPerturbed,
    /// Mass splitting: `delta_x -> (1 - eps) delta_lower + eps delta_upper`.
    /// The only scheme that is affine on measures.
    MapToCombination,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::MapToClosest,
        SchemeKind::OnceDecidedRandom,
        SchemeKind::StepwiseRandom,
        SchemeKind::PointsRandomOnGrid,
        SchemeKind::PointsPerturbed,
        SchemeKind::MapToCombination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::MapToClosest => "map-to-closest",
            SchemeKind::OnceDecidedRandom => "once-decided-random",
            SchemeKind::StepwiseRandom => "stepwise-random",
            SchemeKind::PointsRandomOnGrid => "points-random-on-grid",
            SchemeKind::PointsPerturbed => "points-perturbed",
            SchemeKind::MapToCombination => "map-to-combination",
        }
    }

    /// Particle schemes evolve point configurations, not measures.
    pub fn is_particle_based(self) -> bool {
        matches!(self, SchemeKind::PointsRandomOnGrid | SchemeKind::PointsPerturbed)
    }

    /// Schemes whose one-step action on measures needs no RNG.
    pub fn is_deterministic(self) -> bool {
        matches!(self, SchemeKind::MapToClosest | SchemeKind::MapToCombination)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoreError::InvalidState(format!("unknown scheme '{s}'")))
    }
}

/// Evolving state of a scheme: a measure, or one of the particle clouds.
#[derive(Debug, Clone)]
pub enum SchemeState {
    Mass(GridMeasure),
    GridPoints(Vec<u32>),
    Points(Vec<f64>),
}

/// A scheme bound to a map and a grid size, with any frozen randomness drawn
/// at construction time.
#[derive(Debug, Clone)]
pub struct Scheme {
    kind: SchemeKind,
    n: usize,
    params: MapParams,
    /// `(lower, epsilon)` of `f(i/n)` for every grid point.
    splits: Vec<(u32, f64)>,
    /// Rounding table for the two table-driven schemes.
    frozen: Option<DiscretizedMap>,
}

impl Scheme {
    /// `rng` is consumed only by `OnceDecidedRandom` (its frozen table).
    pub fn new<R: Rng + ?Sized>(
        kind: SchemeKind,
        params: &MapParams,
        n: usize,
        rng: &mut R,
    ) -> Self {
        assert!(n >= 1 && n <= u32::MAX as usize);
        let splits: Vec<(u32, f64)> = if kind == SchemeKind::PointsPerturbed {
            Vec::new()
        } else {
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let s = round_split(n, params.eval(CirclePoint::new(grid_pos(i, n))));
                    (s.lower, s.epsilon)
                })
                .collect()
        };
        let frozen = match kind {
            SchemeKind::MapToClosest => Some(DiscretizedMap::discretize(params, n)),
            SchemeKind::OnceDecidedRandom => {
                let table = splits
                    .iter()
                    .map(|&(lo, eps)| round_up(lo, eps, n, rng))
                    .collect();
                Some(DiscretizedMap { table })
            }
            _ => None,
        };
        Scheme { kind, n, params: *params, splits, frozen }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The state every experiment starts from: the uniform measure on the
    /// grid, or the full grid as a particle cloud.
    pub fn initial_state(&self) -> SchemeState {
        match self.kind {
            SchemeKind::PointsRandomOnGrid => SchemeState::GridPoints((0..self.n as u32).collect()),
            SchemeKind::PointsPerturbed => {
                SchemeState::Points((0..self.n).map(|i| grid_pos(i, self.n)).collect())
            }
            _ => SchemeState::Mass(GridMeasure::lebesgue(self.n)),
        }
    }

    /// Advances the state by one step of the discretized dynamics.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut SchemeState,
        rng: &mut R,
    ) -> Result<(), CoreError> {
        match (self.kind, state) {
            (SchemeKind::MapToClosest | SchemeKind::OnceDecidedRandom, SchemeState::Mass(mu)) => {
                *mu = pushforward_table(mu, self.frozen.as_ref().expect("frozen table"))?;
                Ok(())
            }
            (SchemeKind::StepwiseRandom, SchemeState::Mass(mu)) => {
                let mut out = vec![0.0; self.n];
                for (i, &w) in mu.weights().iter().enumerate() {
                    let (lo, eps) = self.splits[i];
                    out[round_up(lo, eps, self.n, rng) as usize] += w;
                }
                *mu = GridMeasure::from_raw(out);
                Ok(())
            }
            (SchemeKind::MapToCombination, SchemeState::Mass(mu)) => {
                let mut out = vec![0.0; self.n];
                for (i, &w) in mu.weights().iter().enumerate() {
                    let (lo, eps) = self.splits[i];
                    let hi = if lo as usize + 1 == self.n { 0 } else { lo + 1 };
                    out[lo as usize] += (1.0 - eps) * w;
                    out[hi as usize] += eps * w;
                }
                *mu = GridMeasure::from_raw(out);
                Ok(())
            }
            (SchemeKind::PointsRandomOnGrid, SchemeState::GridPoints(pts)) => {
                for p in pts.iter_mut() {
                    let (lo, eps) = self.splits[*p as usize];
                    *p = round_up(lo, eps, self.n, rng);
                }
                Ok(())
            }
            (SchemeKind::PointsPerturbed, SchemeState::Points(pts)) => {
                let half_cell = 0.5 / self.n as f64;
                for x in pts.iter_mut() {
                    let fx = self.params.eval(CirclePoint::new(*x)).value();
                    let noise = (2.0 * rng.random::<f64>() - 1.0) * half_cell;
                    *x = CirclePoint::new(fx + noise).value();
                }
                Ok(())
            }
            (kind, _) => Err(CoreError::InvalidState(format!(
                "scheme {kind} cannot advance this state variant"
            ))),
        }
    }

    /// One-step action on a grid measure. Particle schemes have no such
    /// action and report `InvalidState`.
    pub fn push_measure<R: Rng + ?Sized>(
        &self,
        mu: &GridMeasure,
        rng: &mut R,
    ) -> Result<GridMeasure, CoreError> {
        if self.kind.is_particle_based() {
            return Err(CoreError::InvalidState(format!(
                "scheme {} acts on particles, not measures",
                self.kind
            )));
        }
        if mu.n() != self.n {
            return Err(CoreError::DimensionMismatch { left: mu.n(), right: self.n });
        }
        let mut state = SchemeState::Mass(mu.clone());
        self.step(&mut state, rng)?;
        match state {
            SchemeState::Mass(out) => Ok(out),
            _ => unreachable!(),
        }
    }

    /// The empirical probability measure carried by a state.
    pub fn empirical(&self, state: &SchemeState) -> EmpiricalMeasure {
        match state {
            SchemeState::Mass(mu) => EmpiricalMeasure::Grid(mu.clone()),
            SchemeState::GridPoints(pts) => {
                let mut counts = vec![0u64; self.n];
                for &p in pts {
                    counts[p as usize] += 1;
                }
                EmpiricalMeasure::Grid(GridMeasure::from_counts(&counts))
            }
            SchemeState::Points(pts) => {
                let w = 1.0 / pts.len() as f64;
                let mut atoms: Vec<(f64, f64)> = pts.iter().map(|&x| (x, w)).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                EmpiricalMeasure::Atoms(atoms)
            }
        }
    }
}

/// A state's measure, either grid-supported or a cloud of exact atoms.
#[derive(Debug, Clone)]
pub enum EmpiricalMeasure {
    Grid(GridMeasure),
    Atoms(Vec<(f64, f64)>),
}

impl<'a> From<&'a EmpiricalMeasure> for MeasureView<'a> {
    fn from(e: &'a EmpiricalMeasure) -> Self {
        match e {
            EmpiricalMeasure::Grid(g) => MeasureView::Grid(g),
            EmpiricalMeasure::Atoms(a) => MeasureView::Atoms(a),
        }
    }
}

/// Rounds `(lower, epsilon)` up with probability `epsilon`.
#[inline]
fn round_up<R: Rng + ?Sized>(lo: u32, eps: f64, n: usize, rng: &mut R) -> u32 {
    if rng.random::<f64>() < eps {
        if lo as usize + 1 == n {
            0
        } else {
            lo + 1
        }
    } else {
        lo
    }
}
