//! RMM and maxmin copula evaluation, reflection, and stand geometry.
//!
//! The RMM form is `C(u, v) = max(0, u v - f(u) g(v))`; the associated
//! maxmin copula is its reflection in the second coordinate,
//! `C_mm(u, v) = u - C(u, 1 - v)`. The *stand* is the closed region where
//! `f(u) g(v) < u v` (the copula is positive there); its lower boundary, the
//! zero-level curve `f*(u) g*(v) = 1`, is the only possible carrier of
//! singular mass and is solved here by bisection on the monotone starred
//! transforms.

use crate::generator::{Generator, GeneratorError, MaxminGenerators};
use crate::num::{lit, ExtendedNonneg, Scalar};
use crate::piecewise::Side;

/// Bisection tolerance in `v` for all curve solves.
pub const CURVE_TOL: f64 = 1e-13;
const MAX_BISECT: usize = 100;

/// A total map `[0,1]^2 -> [0,1]`: analytic copula, grid interpolant, or
/// empirical copula. Inference consumes this abstraction so the sources
/// interchange.
pub trait CopulaEvaluator<F>: Sync {
    fn cdf(&self, u: F, v: F) -> F;
}

impl<F, T: CopulaEvaluator<F> + ?Sized> CopulaEvaluator<F> for &T {
    fn cdf(&self, u: F, v: F) -> F {
        (**self).cdf(u, v)
    }
}

/// Wraps a closure as a copula evaluator.
pub struct FnCopula<G>(pub G);

impl<F, G: Fn(F, F) -> F + Sync> CopulaEvaluator<F> for FnCopula<G> {
    fn cdf(&self, u: F, v: F) -> F {
        (self.0)(u, v)
    }
}

/// Reflected maxmin copula `max(0, uv - f(u) g(v))` for validated generators.
#[derive(Clone, Debug)]
pub struct RmmCopula<F> {
    f: Generator<F>,
    g: Generator<F>,
    symmetric: bool,
}

impl<F: Scalar> RmmCopula<F> {
    pub fn new(f: Generator<F>, g: Generator<F>) -> Result<Self, GeneratorError> {
        for (name, gen) in [("f", &f), ("g", &g)] {
            let report = gen.validate(64);
            if !report.passed() {
                return Err(GeneratorError::Invalid(format!(
                    "generator {name}: {}",
                    report.first_failure()
                )));
            }
        }
        Ok(Self::new_unchecked(f, g))
    }

    pub fn new_symmetric(f: Generator<F>) -> Result<Self, GeneratorError> {
        RmmCopula::new(f.clone(), f)
    }

    /// Skips validation; for internal conversions that preserve validity.
    pub(crate) fn new_unchecked(f: Generator<F>, g: Generator<F>) -> Self {
        let symmetric = f.structurally_eq(&g, lit(1e-15));
        RmmCopula { f, g, symmetric }
    }

    pub fn f(&self) -> &Generator<F> {
        &self.f
    }

    pub fn g(&self) -> &Generator<F> {
        &self.g
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// True when both generators vanish, i.e. the copula is the product.
    pub fn is_product(&self) -> bool {
        self.f.is_zero() || self.g.is_zero()
    }

    /// `C(u, v) = max(0, uv - f(u) g(v))`.
    pub fn cdf(&self, u: F, v: F) -> F {
        (u * v - self.f.eval(u) * self.g.eval(v)).max(F::zero())
    }

    /// Starred form `uv max(0, 1 - f*(u) g*(v))`; falls back to the direct
    /// form on the axes where the starred transforms degenerate.
    pub fn cdf_starred(&self, u: F, v: F) -> F {
        if u <= F::zero() || v <= F::zero() {
            return self.cdf(u, v);
        }
        let fs = self.f.star_value(u);
        let gs = self.g.star_value(v);
        u * v * (F::one() - fs * gs).max(F::zero())
    }

    /// Reflection in the second coordinate: the associated maxmin copula.
    pub fn reflect(&self) -> MaxminCopula<F> {
        MaxminCopula {
            mm: MaxminGenerators::from_rmm_pair(&self.f, &self.g),
        }
    }

    /// `dC/du`: 0 on the open zero region, `v - f'(u) g(v)` on the stand
    /// (boundary points take the stand branch, making the result the
    /// right-continuous conditional distribution function of `V` given `u`).
    pub fn partial_u(&self, u: F, v: F, side: Side) -> Result<F, GeneratorError> {
        if u * v - self.f.eval(u) * self.g.eval(v) >= F::zero() {
            Ok(v - self.f.derivative(u, side)? * self.g.eval(v))
        } else {
            Ok(F::zero())
        }
    }

    /// `dC/dv`, symmetric to [`RmmCopula::partial_u`].
    pub fn partial_v(&self, u: F, v: F, side: Side) -> Result<F, GeneratorError> {
        if u * v - self.f.eval(u) * self.g.eval(v) >= F::zero() {
            Ok(u - self.g.derivative(v, side)? * self.f.eval(u))
        } else {
            Ok(F::zero())
        }
    }

    /// Smallest `v` with `f*(u) g*(v) = 1` for this `u`, i.e. the lower edge
    /// of the stand section; 0 when the whole strip lies in the stand.
    pub fn boundary_v(&self, u: F) -> F {
        let target = match self.f.star(u) {
            ExtendedNonneg::Finite(fs) if fs > lit(1e-300) => F::one() / fs,
            ExtendedNonneg::Finite(_) => return F::zero(),
            ExtendedNonneg::Infinite => F::zero(),
        };
        // smallest v with g*(v) <= target; g* is nonincreasing
        if self.g.star(F::zero()).le(ExtendedNonneg::Finite(target)) {
            return F::zero();
        }
        let (mut lo, mut hi) = (F::zero(), F::one());
        for _ in 0..MAX_BISECT {
            if hi - lo <= lit(CURVE_TOL) {
                break;
            }
            let mid = (lo + hi) * lit(0.5);
            if self.g.star_value(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Largest `v` with `f*(u) g*(v) >= 1`: the upper edge of the zero-set
    /// section at this `u` (0 when the section is empty).
    pub fn zero_set_v(&self, u: F) -> F {
        let target = match self.f.star(u) {
            ExtendedNonneg::Finite(fs) if fs > lit(1e-300) => F::one() / fs,
            ExtendedNonneg::Finite(_) => return F::zero(),
            ExtendedNonneg::Infinite => F::zero(),
        };
        let ge = |v: F| match self.g.star(v) {
            ExtendedNonneg::Finite(gs) => gs >= target,
            ExtendedNonneg::Infinite => true,
        };
        if !ge(F::zero()) {
            return F::zero();
        }
        let (mut lo, mut hi) = (F::zero(), F::one());
        for _ in 0..MAX_BISECT {
            if hi - lo <= lit(CURVE_TOL) {
                break;
            }
            let mid = (lo + hi) * lit(0.5);
            if ge(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Samples the zero-level boundary curve on a breakpoint-aware grid that
    /// clusters near the kinks of `f`. Only points with `v0` strictly inside
    /// `(0, 1)` are kept; an empty polyline means the stand fills the square.
    pub fn boundary_curve(&self, n_samples: usize) -> StandGeometry<F> {
        let mut points = Vec::new();
        for u in self.u_sample_grid(n_samples) {
            let v0 = self.boundary_v(u);
            if v0 > lit(CURVE_TOL) && v0 < F::one() - lit(CURVE_TOL) {
                points.push((u, v0));
            }
        }
        let u_range = match (points.first(), points.last()) {
            (Some(&(a, _)), Some(&(b, _))) => Some((a, b)),
            _ => None,
        };
        StandGeometry { points, u_range }
    }

    /// Level curve `{(u, v) : uv - f(u) g(v) = t}` for `t in (0, 1]`.
    pub fn level_curve(&self, t: F, n_samples: usize) -> Vec<(F, F)> {
        let mut points = Vec::new();
        for u in self.u_sample_grid(n_samples) {
            if u < t {
                continue;
            }
            let v0 = self.boundary_v(u);
            // uv - f(u) g(v) is nondecreasing in v on [v0, 1]
            let h = |v: F| u * v - self.f.eval(u) * self.g.eval(v);
            if h(F::one()) < t {
                continue;
            }
            let (mut lo, mut hi) = (v0, F::one());
            for _ in 0..MAX_BISECT {
                if hi - lo <= lit(CURVE_TOL) {
                    break;
                }
                let mid = (lo + hi) * lit(0.5);
                if h(mid) >= t {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            points.push((u, hi));
        }
        points
    }

    /// Sample grid over `[0, 1]`: per-piece Chebyshev-style nodes of `f`,
    /// clustered at piece ends, plus every breakpoint exactly.
    fn u_sample_grid(&self, n_samples: usize) -> Vec<F> {
        let pieces = self.f.pieces();
        let per = (n_samples / pieces.len()).max(8);
        let mut us = Vec::with_capacity(per * pieces.len() + 2);
        for p in pieces {
            for j in 0..=per {
                let theta = std::f64::consts::PI * (j as f64) / (per as f64);
                let x = (F::one() - lit::<F>(theta.cos())) * lit(0.5);
                us.push(p.lo + (p.hi - p.lo) * x);
            }
        }
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        us.dedup_by(|a, b| (*a - *b).abs() <= lit(1e-15));
        us
    }
}

impl<F: Scalar> CopulaEvaluator<F> for RmmCopula<F> {
    fn cdf(&self, u: F, v: F) -> F {
        RmmCopula::cdf(self, u, v)
    }
}

/// Maxmin copula `min(u, phi(u) v - phi(u) psi(v) + u psi(v))`.
#[derive(Clone, Debug)]
pub struct MaxminCopula<F> {
    mm: MaxminGenerators<F>,
}

impl<F: Scalar> MaxminCopula<F> {
    pub fn new(mm: MaxminGenerators<F>) -> Result<Self, GeneratorError> {
        mm.validate()?;
        Ok(MaxminCopula { mm })
    }

    pub fn generators(&self) -> &MaxminGenerators<F> {
        &self.mm
    }

    pub fn cdf(&self, u: F, v: F) -> F {
        let phi = self.mm.phi(u);
        let psi = self.mm.psi(v);
        u.min(phi * v - phi * psi + u * psi)
    }

    /// Reflection back to the RMM side; an exact involution on coefficients.
    pub fn reflect(&self) -> RmmCopula<F> {
        let (f, g) = self.mm.to_rmm_pair_unchecked();
        RmmCopula::new_unchecked(f, g)
    }

    /// The curve `phi*(u) = psi_*(v)` containing the singular component:
    /// the boundary curve of the reflected copula mapped through
    /// `(u, v) -> (u, 1 - v)`.
    pub fn singular_curve(&self, n_samples: usize) -> Vec<(F, F)> {
        self.reflect()
            .boundary_curve(n_samples)
            .points
            .into_iter()
            .map(|(u, v)| (u, F::one() - v))
            .collect()
    }
}

impl<F: Scalar> CopulaEvaluator<F> for MaxminCopula<F> {
    fn cdf(&self, u: F, v: F) -> F {
        MaxminCopula::cdf(self, u, v)
    }
}

/// Sampled zero-level curve of an RMM copula together with the `u`-interval
/// where boundary points exist strictly inside the square.
#[derive(Clone, Debug)]
pub struct StandGeometry<F> {
    pub points: Vec<(F, F)>,
    pub u_range: Option<(F, F)>,
}

impl<F: Scalar> StandGeometry<F> {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest residual `|u v0 - f(u) g(v0)|` over the sampled points.
    pub fn max_residual(&self, c: &RmmCopula<F>) -> F {
        self.points
            .iter()
            .map(|&(u, v)| (u * v - c.f().eval(u) * c.g().eval(v)).abs())
            .fold(F::zero(), F::max)
    }
}

/// `C(u2,v2) - C(u2,v1) - C(u1,v2) + C(u1,v1)`, the mass the copula assigns
/// to the rectangle.
pub fn rectangle_volume<F: Scalar>(ev: &impl CopulaEvaluator<F>, u1: F, u2: F, v1: F, v2: F) -> F {
    ev.cdf(u2, v2) - ev.cdf(u2, v1) - ev.cdf(u1, v2) + ev.cdf(u1, v1)
}

/// Result of checking the pointwise bounds `W <= C <= Pi` on a grid.
#[derive(Clone, Debug)]
pub struct FrechetReport<F> {
    pub pass: bool,
    /// Most negative `C - W` and its location.
    pub worst_lower: (F, F, F),
    /// Most negative `Pi - C` and its location.
    pub worst_upper: (F, F, F),
}

/// Checks `max(0, u+v-1) <= C(u,v) <= uv` on an `(n+1) x (n+1)` grid with
/// `1e-12` slack. Every RMM copula satisfies both bounds.
pub fn frechet_bounds_check<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    grid_n: usize,
) -> FrechetReport<F> {
    let n = grid_n.max(2);
    let mut worst_lower = (F::zero(), F::zero(), F::infinity());
    let mut worst_upper = (F::zero(), F::zero(), F::infinity());
    for i in 0..=n {
        let u = lit::<F>(i as f64) / lit(n as f64);
        for j in 0..=n {
            let v = lit::<F>(j as f64) / lit(n as f64);
            let c = ev.cdf(u, v);
            let low = c - (u + v - F::one()).max(F::zero());
            let high = u * v - c;
            if low < worst_lower.2 {
                worst_lower = (u, v, low);
            }
            if high < worst_upper.2 {
                worst_upper = (u, v, high);
            }
        }
    }
    let tol = lit::<F>(-1e-12);
    FrechetReport {
        pass: worst_lower.2 >= tol && worst_upper.2 >= tol,
        worst_lower,
        worst_upper,
    }
}

/// Largest deviation of the margins from uniformity on a grid.
pub fn margin_deviation<F: Scalar>(ev: &impl CopulaEvaluator<F>, grid_n: usize) -> F {
    let n = grid_n.max(2);
    let mut worst = F::zero();
    for i in 0..=n {
        let t = lit::<F>(i as f64) / lit(n as f64);
        worst = worst
            .max((ev.cdf(t, F::one()) - t).abs())
            .max((ev.cdf(F::one(), t) - t).abs())
            .max(ev.cdf(t, F::zero()).abs())
            .max(ev.cdf(F::zero(), t).abs());
    }
    worst
}

/// Sup distance between two evaluators on an `(n+1) x (n+1)` grid.
pub fn max_grid_deviation<F: Scalar>(
    a: &impl CopulaEvaluator<F>,
    b: &impl CopulaEvaluator<F>,
    grid_n: usize,
) -> F {
    let n = grid_n.max(1);
    let mut worst = F::zero();
    for i in 0..=n {
        let u = lit::<F>(i as f64) / lit(n as f64);
        for j in 0..=n {
            let v = lit::<F>(j as f64) / lit(n as f64);
            let d = (a.cdf(u, v) - b.cdf(u, v)).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}
