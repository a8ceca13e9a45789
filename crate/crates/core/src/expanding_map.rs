//! The analytic map family under study:
//!
//! ```text
//! f(x) = 2x + c1 sin(2 pi x) + c2 sin(4 pi x) + shift   (mod 1)
//! ```
//!
//! a degree-2 cover of the circle. It is uniformly expanding exactly when
//! `2 pi |c1| + 4 pi |c2| < 1`, which bounds `f'` inside
//! `[2 - margin, 2 + margin]` with `margin < 1`; every constructor enforces
//! this so the rest of the crate can assume `f' > 1` everywhere.

use crate::CoreError;
use std::f64::consts::TAU;

/// A point on the circle `R/Z`, stored as its representative in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CirclePoint(f64);

impl CirclePoint {
    /// Reduces any finite real to `[0, 1)`.
    ///
    /// Uses `x - floor(x)` followed by a wrap of the single value `1.0` to
    /// `0.0` (the subtraction can round up to `1.0` for tiny negative inputs).
    #[inline]
    pub fn new(x: f64) -> Self {
        debug_assert!(x.is_finite());
        let mut r = x - x.floor();
        if r >= 1.0 {
            r = 0.0;
        }
        CirclePoint(r)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Shortest distance along the circle.
    pub fn distance(self, other: CirclePoint) -> f64 {
        let d = (self.0 - other.0).abs();
        d.min(1.0 - d)
    }
}

impl From<f64> for CirclePoint {
    fn from(x: f64) -> Self {
        CirclePoint::new(x)
    }
}

/// Topological degree of every map in the family.
pub const DEGREE: usize = 2;

/// Parameters of one map in the family. Construction validates expansivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapParams {
    c1: f64,
    c2: f64,
    shift: f64,
}

/// `2 pi |c1| + 4 pi |c2|`, the sup-deviation of `f'` from 2.
pub fn expansion_margin(c1: f64, c2: f64) -> f64 {
    TAU * c1.abs() + 2.0 * TAU * c2.abs()
}

/// True iff the parameters give a uniformly expanding map.
pub fn check_expanding(c1: f64, c2: f64) -> bool {
    expansion_margin(c1, c2) < 1.0
}

impl MapParams {
    pub fn new(c1: f64, c2: f64, shift: f64) -> Result<Self, CoreError> {
        let excess = expansion_margin(c1, c2);
        if excess.is_nan() || excess >= 1.0 {
            return Err(CoreError::NotExpanding { c1, c2, excess });
        }
        Ok(MapParams { c1, c2, shift })
    }

    /// The plain doubling map `x -> 2x`.
    pub fn doubling() -> Self {
        MapParams { c1: 0.0, c2: 0.0, shift: 0.0 }
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Lift of `f` to `[0, 1] -> [shift, shift + 2]` (no mod-1 reduction).
    /// Strictly increasing, since `f' >= 2 - margin > 1`.
    #[inline]
    pub fn lift(&self, x: f64) -> f64 {
        2.0 * x + self.c1 * (TAU * x).sin() + self.c2 * (2.0 * TAU * x).sin() + self.shift
    }

    #[inline]
    pub fn eval(&self, x: CirclePoint) -> CirclePoint {
        CirclePoint::new(self.lift(x.value()))
    }

    /// `f'` as a 1-periodic function; the argument is reduced before the
    /// trigonometric evaluation so large lifts do not degrade accuracy.
    #[inline]
    pub fn derivative(&self, x: CirclePoint) -> f64 {
        let x = x.value();
        2.0 + TAU * self.c1 * (TAU * x).cos() + 2.0 * TAU * self.c2 * (2.0 * TAU * x).cos()
    }

    /// Uniform lower bound `2 - margin` for `f'`.
    pub fn min_derivative(&self) -> f64 {
        2.0 - expansion_margin(self.c1, self.c2)
    }

    /// Uniform upper bound `2 + margin` for `f'`.
    pub fn max_derivative(&self) -> f64 {
        2.0 + expansion_margin(self.c1, self.c2)
    }

    /// `(f^n)'(x)` by the chain rule along the forward orbit; `n = 0` gives 1.
    pub fn iterate_derivative(&self, x: CirclePoint, n: usize) -> f64 {
        let mut p = 1.0;
        let mut y = x;
        for _ in 0..n {
            p *= self.derivative(y);
            y = self.eval(y);
        }
        p
    }

    /// The two preimages of `y`, in increasing order.
    ///
    /// Inverts the lift on `[0, 1]` for the two targets `y + m` lying in
    /// `[shift, shift + 2)`: bisection down to a bracket of width `1e-8`,
    /// then at most 5 safeguarded Newton steps. Each returned `x` satisfies
    /// `|lift(x) - (y + m)| <= tol`; fails with [`CoreError::Convergence`]
    /// otherwise.
    pub fn preimages(&self, y: CirclePoint, tol: f64) -> Result<[CirclePoint; 2], CoreError> {
        let m0 = (self.shift - y.value()).ceil();
        let t0 = y.value() + m0;
        let a = self.invert_lift(t0, tol)?;
        let b = self.invert_lift(t0 + 1.0, tol)?;
        Ok(if a.value() <= b.value() { [a, b] } else { [b, a] })
    }

    /// Solves `lift(x) = t` for `t` in `[shift, shift + 2)`.
    fn invert_lift(&self, t: f64, tol: f64) -> Result<CirclePoint, CoreError> {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            if self.lift(mid) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        let mut res = self.lift(x) - t;
        for _ in 0..5 {
            if res.abs() <= tol {
                break;
            }
            let step = res / self.derivative(CirclePoint::new(x));
            x = (x - step).clamp(lo, hi);
            res = self.lift(x) - t;
        }
        if res.abs() > tol {
            return Err(CoreError::Convergence { target: t, residual: res.abs(), tol });
        }
        if x >= 1.0 {
            x -= 1.0;
        }
        Ok(CirclePoint(x))
    }
}

/// The reference parameter point used throughout the experiments:
/// `c1 = 0.0531647`, `c2 = 0.03932758`, `shift = 0.347`. Margin ≈ 0.828,
/// so `f' > 1.17` everywhere.
impl Default for MapParams {
    fn default() -> Self {
        MapParams { c1: 0.0531647, c2: 0.03932758, shift: 0.347 }
    }
}
