//! Dense univariate polynomials with real-root isolation on an interval.
//!
//! Coefficients are stored in ascending degree. Root isolation uses the
//! classical derivative recursion: the critical points of `p` split the
//! interval into monotone segments, and each segment holds at most one root,
//! found by bisection. That keeps every monotonicity and sign check in the
//! crate exact up to floating-point rounding, with no reliance on sampling
//! grids.

use crate::num::{lit, Scalar};

/// Tolerance for treating a polynomial value as zero during root isolation.
const ROOT_VALUE_EPS: f64 = 1e-13;
/// Two isolated roots closer than this collapse into one.
const ROOT_MERGE_EPS: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<F> {
    coeffs: Vec<F>,
}

impl<F: Scalar> Polynomial<F> {
    pub fn new(coeffs: Vec<F>) -> Self {
        let coeffs = if coeffs.is_empty() {
            vec![F::zero()]
        } else {
            coeffs
        };
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial {
            coeffs: vec![F::zero()],
        }
    }

    pub fn constant(c: F) -> Self {
        Polynomial { coeffs: vec![c] }
    }

    /// The monomial `t`.
    pub fn identity() -> Self {
        Polynomial {
            coeffs: vec![F::zero(), F::one()],
        }
    }

    pub fn from_f64(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| lit(c)).collect())
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Degree after dropping numerically-zero leading coefficients.
    pub fn degree(&self) -> usize {
        let scale = self.coeff_scale().max(F::one());
        let tol = scale * lit(1e-14);
        let mut d = self.coeffs.len() - 1;
        while d > 0 && self.coeffs[d].abs() <= tol {
            d -= 1;
        }
        d
    }

    fn coeff_scale(&self) -> F {
        self.coeffs
            .iter()
            .fold(F::zero(), |m, c| if c.abs() > m { c.abs() } else { m })
    }

    /// True when every coefficient is numerically zero.
    pub fn is_zero(&self, tol: F) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    pub fn eval(&self, t: F) -> F {
        let mut acc = F::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * lit(k as f64))
            .collect();
        Polynomial::new(coeffs)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = vec![F::zero(); self.coeffs.len() + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs[k + 1] = c / lit((k + 1) as f64);
        }
        Polynomial::new(coeffs)
    }

    pub fn integral(&self, a: F, b: F) -> F {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    pub fn scale(&self, k: F) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![F::zero(); n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let a = self.coeffs.get(k).copied().unwrap_or_else(F::zero);
            let b = rhs.coeffs.get(k).copied().unwrap_or_else(F::zero);
            *c = a + b;
        }
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-F::one()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut coeffs = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == F::zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Composition with an affine map: returns `q(t) = p(a + b t)`.
    pub fn compose_affine(&self, a: F, b: F) -> Self {
        // Horner in the outer variable: q = (...((c_n) * (a + b t) + c_{n-1}) ...)
        let mut acc = Polynomial::zero();
        let affine = Polynomial::new(vec![a, b]);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(&affine).add(&Polynomial::constant(c));
        }
        acc
    }

    /// Exact polynomial square root, if `self` is a perfect square.
    ///
    /// Returns `s` with `s^2 = self` coefficient-wise within a small relative
    /// tolerance. The sign of `s` is unspecified; callers fix it by sign at a
    /// sample point.
    pub fn sqrt_exact(&self) -> Option<Self> {
        let scale = self.coeff_scale();
        let tol = (scale.max(F::one())) * lit(1e-10);
        if self.is_zero(tol) {
            return Some(Polynomial::zero());
        }
        let deg = self.degree();
        if !deg.is_multiple_of(2) {
            return None;
        }
        let half = deg / 2;
        let lead = self.coeffs[deg];
        if lead <= F::zero() {
            return None;
        }
        let mut s = vec![F::zero(); half + 1];
        s[half] = lead.sqrt();
        // Match coefficients top-down: coefficient of t^(deg-k) in s^2.
        for k in 1..=half {
            let idx = half - k;
            let mut acc = F::zero();
            for j in (idx + 1)..=half.min(deg - k - idx) {
                let other = deg - k - j;
                if other > half || other <= idx {
                    continue;
                }
                acc = acc + s[j] * s[other];
            }
            // Remaining cross terms involving s[idx] itself: 2 s[half-?]...
            let target = self.coeffs.get(deg - k).copied().unwrap_or_else(F::zero);
            s[idx] = (target - acc) / (lit::<F>(2.0) * s[half]);
        }
        let cand = Polynomial::new(s);
        let sq = cand.mul(&cand);
        let diff = sq.sub(self);
        if diff.is_zero(tol) {
            Some(cand)
        } else {
            None
        }
    }

    /// Distinct real roots in `[lo, hi]`, ascending.
    ///
    /// Roots of an identically-zero polynomial are reported as empty; callers
    /// that care about degenerate pieces test `is_zero` first.
    pub fn roots_in(&self, lo: F, hi: F) -> Vec<F> {
        let scale = self.coeff_scale().max(F::one());
        let vtol = scale * lit(ROOT_VALUE_EPS);
        if self.is_zero(vtol) || lo >= hi {
            return Vec::new();
        }
        let deg = self.degree();
        let mut roots = match deg {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= lo && r <= hi {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            2 => quadratic_roots(self.coeffs[0], self.coeffs[1], self.coeffs[2], lo, hi),
            _ => {
                let crit = self.derivative().roots_in(lo, hi);
                let mut nodes = Vec::with_capacity(crit.len() + 2);
                nodes.push(lo);
                nodes.extend(crit);
                nodes.push(hi);
                let mut out = Vec::new();
                for w in nodes.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if b <= a {
                        continue;
                    }
                    let fa = self.eval(a);
                    let fb = self.eval(b);
                    if fa.abs() <= vtol {
                        out.push(a);
                    }
                    if fb.abs() <= vtol {
                        out.push(b);
                    } else if fa.abs() > vtol && (fa < F::zero()) != (fb < F::zero()) {
                        out.push(bisect_root(|t| self.eval(t), a, b));
                    }
                }
                out
            }
        };
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() <= lit(ROOT_MERGE_EPS));
        roots.retain(|&r| r >= lo && r <= hi);
        roots
    }

    /// Candidate points where extrema of `self` on `[lo, hi]` can occur.
    pub fn extremum_candidates(&self, lo: F, hi: F) -> Vec<F> {
        let mut pts = vec![lo, hi];
        pts.extend(self.derivative().roots_in(lo, hi));
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= lit(ROOT_MERGE_EPS));
        pts
    }

    /// Minimum of the polynomial over `[lo, hi]`, exact for polynomials.
    pub fn min_on(&self, lo: F, hi: F) -> F {
        self.extremum_candidates(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold(F::infinity(), F::min)
    }

    /// Maximum of the polynomial over `[lo, hi]`.
    pub fn max_on(&self, lo: F, hi: F) -> F {
        self.extremum_candidates(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold(F::neg_infinity(), F::max)
    }
}

/// Roots of `c0 + c1 t + c2 t^2` in `[lo, hi]` via the numerically stable
/// quadratic formula.
fn quadratic_roots<F: Scalar>(c0: F, c1: F, c2: F, lo: F, hi: F) -> Vec<F> {
    let scale = c0.abs().max(c1.abs()).max(c2.abs()).max(F::one());
    if c2.abs() <= scale * lit(1e-14) {
        if c1.abs() <= scale * lit(1e-14) {
            return Vec::new();
        }
        let r = -c0 / c1;
        return if r >= lo && r <= hi {
            vec![r]
        } else {
            Vec::new()
        };
    }
    let disc = c1 * c1 - lit::<F>(4.0) * c2 * c0;
    let disc_tol = (c1 * c1 + (lit::<F>(4.0) * c2 * c0).abs()) * lit(1e-13);
    if disc < -disc_tol {
        return Vec::new();
    }
    if disc <= disc_tol {
        // tangent (double) root
        let r = -c1 / (lit::<F>(2.0) * c2);
        return if r >= lo && r <= hi {
            vec![r]
        } else {
            Vec::new()
        };
    }
    let sq = disc.sqrt();
    let q = if c1 >= F::zero() {
        -(c1 + sq) / lit::<F>(2.0)
    } else {
        (sq - c1) / lit::<F>(2.0)
    };
    let mut out = Vec::new();
    if q != F::zero() {
        out.push(c0 / q);
    }
    out.push(q / c2);
    out.retain(|&r| r >= lo && r <= hi);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() <= lit(ROOT_MERGE_EPS));
    out
}

/// Bisection for a continuous function with a sign change on `[a, b]`.
pub fn bisect_root<F: Scalar>(f: impl Fn(F) -> F, a: F, b: F) -> F {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let half = lit::<F>(0.5);
    for _ in 0..120 {
        let m = (a + b) * half;
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if (fm < F::zero()) == (fa < F::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) * half
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[f64]) -> Polynomial<f64> {
        Polynomial::from_f64(coeffs)
    }

    #[test]
    fn eval_and_derivative() {
        let q = p(&[1.0, -2.0, 3.0]); // 1 - 2t + 3t^2
        assert_eq!(q.eval(0.0), 1.0);
        assert_eq!(q.eval(2.0), 9.0);
        assert_eq!(q.derivative().coeffs(), &[-2.0, 6.0]);
    }

    #[test]
    fn integral_matches_hand_value() {
        let q = p(&[0.0, 1.0]); // t
        assert!((q.integral(0.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roots_of_cubic() {
        // (t - 0.2)(t - 0.5)(t - 0.9) expanded
        let q = p(&[-0.09, 0.73, -1.6, 1.0]);
        let r = q.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        assert!((r[0] - 0.2).abs() < 1e-9);
        assert!((r[1] - 0.5).abs() < 1e-9);
        assert!((r[2] - 0.9).abs() < 1e-9);
    }

    #[test]
    fn tangent_root_detected() {
        // (t - 0.5)^2 touches zero without a sign change
        let q = p(&[0.25, -1.0, 1.0]);
        let r = q.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn min_on_interval() {
        let q = p(&[0.25, -1.0, 1.0]);
        assert!(q.min_on(0.0, 1.0).abs() < 1e-12);
        assert!((q.max_on(0.0, 1.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn perfect_square_sqrt() {
        // (a t (1-t))^2 with a = 0.5
        let s = p(&[0.0, 0.5, -0.5]);
        let q = s.mul(&s);
        let r = q.sqrt_exact().expect("perfect square");
        let diff = r.sub(&s);
        let neg = r.add(&s);
        assert!(diff.is_zero(1e-10) || neg.is_zero(1e-10));
        assert!(p(&[0.5, -2.0, 1.0, 1.0]).sqrt_exact().is_none());
    }

    #[test]
    fn compose_affine_flip() {
        // p(1 - t) for p = t^2 is (1-t)^2
        let q = p(&[0.0, 0.0, 1.0]).compose_affine(1.0, -1.0);
        assert!((q.eval(0.25) - 0.5625).abs() < 1e-15);
    }
}
