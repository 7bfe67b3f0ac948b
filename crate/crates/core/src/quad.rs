//! Gauss-Legendre quadrature with adaptive interval splitting.
//!
//! Nodes and weights are computed once per order by Newton iteration on the
//! Legendre recurrence and cached. The adaptive driver compares one panel
//! against its two halves and splits until the local discrepancy meets the
//! budget, so piecewise-smooth integrands converge fast as long as panel
//! boundaries include the kink locations the caller knows about.

use std::sync::OnceLock;

use crate::num::{lit, Scalar};

/// Default quadrature order for the measure computations.
pub const DEFAULT_ORDER: usize = 32;

/// Nodes and weights on `[-1, 1]` for a given order (cached for 32).
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    static CACHE32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    if order == 32 {
        return CACHE32.get_or_init(|| compute_gauss_legendre(32)).clone();
    }
    compute_gauss_legendre(order)
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Fixed-order panel integral of `f` over `[a, b]`.
pub fn integrate_panel<F: Scalar>(f: &impl Fn(F) -> F, a: F, b: F, order: usize) -> F {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let mut acc = F::zero();
    for &(x, w) in gauss_legendre(order).iter() {
        acc = acc + lit::<F>(w) * f(mid + half * lit(x));
    }
    acc * half
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<F> {
    pub value: F,
    /// Accumulated local discrepancy estimate.
    pub error_estimate: F,
    pub converged: bool,
}

/// Adaptive Gauss-Legendre integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate_adaptive<F: Scalar>(
    f: &impl Fn(F) -> F,
    a: F,
    b: F,
    tol: F,
    order: usize,
) -> QuadResult<F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Scalar>(
        f: &impl Fn(F) -> F,
        a: F,
        b: F,
        whole: F,
        tol: F,
        order: usize,
        depth: usize,
        err: &mut F,
        converged: &mut bool,
    ) -> F {
        let mid = (a + b) * lit(0.5);
        let left = integrate_panel(f, a, mid, order);
        let right = integrate_panel(f, mid, b, order);
        let disc = (left + right - whole).abs();
        if disc <= tol || (b - a) < lit(1e-13) {
            if disc > tol {
                *converged = false;
            }
            *err = *err + disc;
            return left + right;
        }
        if depth == 0 {
            *converged = false;
            *err = *err + disc;
            return left + right;
        }
        let half_tol = tol * lit(0.5);
        recurse(f, a, mid, left, half_tol, order, depth - 1, err, converged)
            + recurse(f, mid, b, right, half_tol, order, depth - 1, err, converged)
    }

    if b <= a || b.is_nan() || a.is_nan() {
        return QuadResult {
            value: F::zero(),
            error_estimate: F::zero(),
            converged: true,
        };
    }
    let whole = integrate_panel(f, a, b, order);
    let mut err = F::zero();
    let mut converged = true;
    let value = recurse(f, a, b, whole, tol, order, 28, &mut err, &mut converged);
    QuadResult {
        value,
        error_estimate: err,
        converged,
    }
}

/// Splits `[a, b]` at the interior points of `cuts` and integrates each cell
/// adaptively, sharing the tolerance across cells.
pub fn integrate_with_cuts<F: Scalar>(
    f: &(impl Fn(F) -> F + Sync),
    a: F,
    b: F,
    cuts: &[F],
    tol: F,
    order: usize,
) -> QuadResult<F> {
    let mut nodes: Vec<F> = vec![a, b];
    nodes.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    nodes.dedup_by(|x, y| (*x - *y).abs() <= lit(1e-13));
    let cells = nodes.len() - 1;
    let cell_tol = tol / lit(cells as f64);
    let mut total = F::zero();
    let mut err = F::zero();
    let mut converged = true;
    for w in nodes.windows(2) {
        let r = integrate_adaptive(f, w[0], w[1], cell_tol, order);
        total = total + r.value;
        err = err + r.error_estimate;
        converged &= r.converged;
    }
    QuadResult {
        value: total,
        error_estimate: err,
        converged,
    }
}
