//! Diagonal sections of (symmetric) RMM copulas.
//!
//! A diagonal function satisfies (D1) `delta(0)=0, delta(1)=1`, (D2)
//! `delta(t) <= t`, (D3) nondecreasing, (D4) 2-Lipschitz. Diagonals of RMM
//! copulas additionally sit below `t^2` and have `delta#(t) = delta(t)/t^2`
//! nondecreasing; symmetric RMM copulas further make
//! `delta-hat(t) = t + sqrt(t^2 - delta(t))` nondecreasing. The class with
//! both monotonicity properties characterizes diagonals of symmetric RMM
//! copulas: `f(t) = sqrt(t^2 - delta(t))` generates one with diagonal
//! `delta`, and among all of them the generators `f <= g <= h` with
//! `h(t) = 2 a_delta - t` on `(0, a_delta]` give the pointwise bounds
//! `C_h <= C_g <= C_f`.

use crate::copula::RmmCopula;
use crate::generator::{ConditionCheck, Generator, GeneratorError, TOL};
use crate::num::{lit, to_f64, Scalar};
use crate::piecewise::{
    chain_nondecreasing, chain_nonincreasing, Piece, PieceExpr, Piecewise, PiecewiseError,
};
use crate::poly::Polynomial;

#[derive(Clone, Debug, thiserror::Error)]
pub enum DiagonalError {
    #[error("piece list malformed: {0}")]
    Structural(#[from] PiecewiseError),
    #[error("pieces must cover [0, 1], got [{lo}, {hi}]")]
    DomainNotUnit { lo: f64, hi: f64 },
    #[error("diagonal pieces must be polynomial")]
    NonPolynomialPiece,
    #[error("generator product is not piecewise polynomial; no exact diagonal")]
    NonPolynomialProduct,
    #[error("diagonal is not in the admissible class: {0}")]
    NotInDHat(String),
    #[error("reconstructed generator failed validation: {0}")]
    BadGenerator(#[from] GeneratorError),
}

/// Piecewise-polynomial diagonal section with its largest zero `a_delta`.
#[derive(Clone, Debug)]
pub struct DiagonalSection<F> {
    pw: Piecewise<F>,
    a_delta: F,
}

impl<F: Scalar> DiagonalSection<F> {
    pub fn new(pieces: Vec<Piece<F>>) -> Result<Self, DiagonalError> {
        let pw = Piecewise::new(pieces)?;
        let (lo, hi) = pw.domain();
        if lo.abs() > lit(TOL) || (hi - F::one()).abs() > lit(TOL) {
            return Err(DiagonalError::DomainNotUnit {
                lo: to_f64(lo),
                hi: to_f64(hi),
            });
        }
        if pw.pieces().iter().any(|p| !p.expr.is_poly()) {
            return Err(DiagonalError::NonPolynomialPiece);
        }
        let a_delta = largest_zero(&pw);
        Ok(DiagonalSection { pw, a_delta })
    }

    pub fn from_poly_pieces(pieces: &[(f64, f64, &[f64])]) -> Result<Self, DiagonalError> {
        DiagonalSection::new(
            pieces
                .iter()
                .map(|&(lo, hi, coeffs)| Piece::poly(lit(lo), lit(hi), coeffs))
                .collect(),
        )
    }

    pub fn pieces(&self) -> &[Piece<F>] {
        self.pw.pieces()
    }

    /// Largest `t` with `delta(t) = 0`.
    pub fn a_delta(&self) -> F {
        self.a_delta
    }

    /// `delta(t)`, clamped below at 0 so unsplit piece lists evaluate like
    /// their truncated exact form.
    pub fn eval(&self, t: F) -> F {
        self.pw.eval(t).max(F::zero())
    }

    /// `delta#(t) = delta(t) / t^2` on `(0, 1]`.
    pub fn sharp(&self, t: F) -> F {
        self.eval(t) / (t * t)
    }

    /// `delta-hat(t) = t + sqrt(t^2 - delta(t))`.
    pub fn hat(&self, t: F) -> F {
        t + (t * t - self.eval(t)).max(F::zero()).sqrt()
    }

    /// Lower semilinear copula built from this diagonal, with `0/0 := 0`;
    /// the comparison oracle separating RMM copulas from the semilinear
    /// class (only the product copula lies in both).
    pub fn semilinear(&self, u: F, v: F) -> F {
        let (lo, hi) = if v <= u { (v, u) } else { (u, v) };
        if hi <= F::zero() {
            return F::zero();
        }
        lo * self.eval(hi) / hi
    }

    /// Membership report for the class of symmetric-RMM diagonals.
    pub fn check_d_hat(&self, grid_n: usize) -> DHatReport {
        let tol = lit::<F>(TOL);
        let t_poly = Polynomial::identity();
        let t_sq = t_poly.mul(&t_poly);

        let d0 = self.eval(F::zero());
        let d1v = self.eval(F::one());
        let d1 = if d0.abs() <= tol && (d1v - F::one()).abs() <= tol {
            ConditionCheck::pass("delta(0) = 0, delta(1) = 1")
        } else {
            ConditionCheck::fail(format!(
                "delta(0) = {:.3e}, delta(1) = {}",
                to_f64(d0),
                to_f64(d1v)
            ))
        };

        let mut d2 = ConditionCheck::pass("delta(t) <= t");
        let mut d3 = ConditionCheck::pass("delta nondecreasing");
        let mut d4 = ConditionCheck::pass("delta 2-Lipschitz");
        let mut below_sq = ConditionCheck::pass("delta(t) <= t^2");
        let mut sharp_nd = ConditionCheck::pass("delta(t)/t^2 nondecreasing");
        let mut hat_nd = ConditionCheck::pass("t + sqrt(t^2 - delta) nondecreasing");
        let mut hat_ratio_ni = ConditionCheck::pass("delta-hat(t)/t nonincreasing");
        let mut boundary_case = false;

        for p in self.pw.pieces() {
            let poly = &p.expr.poly;
            if poly.sub(&t_poly).max_on(p.lo, p.hi) > tol && d2.passed {
                d2 = ConditionCheck::fail(format!(
                    "delta exceeds t on [{}, {}]",
                    to_f64(p.lo),
                    to_f64(p.hi)
                ));
            }
            let dp = poly.derivative();
            let cands = p.expr.extremum_candidates(p.lo, p.hi);
            let mono = chain_nondecreasing(&cands, |t| p.expr.eval(t), tol);
            boundary_case |= mono.boundary_case;
            if !mono.ok && d3.passed {
                d3 = ConditionCheck::fail(format!(
                    "delta decreases inside [{}, {}]",
                    to_f64(p.lo),
                    to_f64(p.hi)
                ));
            }
            if (dp.max_on(p.lo, p.hi) > lit::<F>(2.0) + tol
                || dp.min_on(p.lo, p.hi) < -lit::<F>(2.0) - tol)
                && d4.passed
            {
                d4 = ConditionCheck::fail(format!(
                    "|delta'| exceeds 2 on [{}, {}]",
                    to_f64(p.lo),
                    to_f64(p.hi)
                ));
            }
            if poly.sub(&t_sq).max_on(p.lo, p.hi) > tol && below_sq.passed {
                below_sq = ConditionCheck::fail(format!(
                    "delta exceeds t^2 on [{}, {}]",
                    to_f64(p.lo),
                    to_f64(p.hi)
                ));
            }

            // delta# nondecreasing, with the right limit at 0 as chain start
            let sharp0 = sharp_limit_at_zero(poly);
            let cands = p.expr.ratio_candidates(2, p.lo, p.hi);
            let check = chain_nondecreasing(
                &cands,
                |t| {
                    if t <= F::zero() {
                        sharp0
                    } else {
                        self.sharp(t)
                    }
                },
                tol,
            );
            boundary_case |= check.boundary_case;
            if !check.ok && sharp_nd.passed {
                let (t1, t2, v1, v2) = check.witness.unwrap();
                sharp_nd = ConditionCheck::fail(format!(
                    "delta# falls from {:.12} at t={:.12} to {:.12} at t={:.12}",
                    to_f64(v1),
                    to_f64(t1),
                    to_f64(v2),
                    to_f64(t2)
                ));
            }

            // delta-hat nondecreasing via the sqrt expression t + sqrt(t^2-p)
            let hat_expr = PieceExpr {
                poly: t_poly.clone(),
                sqrt: Some((F::one(), t_sq.sub(poly))),
            };
            let cands = hat_expr.extremum_candidates(p.lo, p.hi);
            let check = chain_nondecreasing(&cands, |t| hat_expr.eval(t), tol);
            boundary_case |= check.boundary_case;
            if !check.ok && hat_nd.passed {
                let (t1, t2, v1, v2) = check.witness.unwrap();
                hat_nd = ConditionCheck::fail(format!(
                    "delta-hat falls from {:.12} at t={:.12} to {:.12} at t={:.12}",
                    to_f64(v1),
                    to_f64(t1),
                    to_f64(v2),
                    to_f64(t2)
                ));
            }

            // equivalent form: delta-hat(t)/t nonincreasing
            let hat0 = F::one() + (F::one() - sharp0.min(F::one())).max(F::zero()).sqrt();
            let cands = hat_expr.ratio_candidates(1, p.lo, p.hi);
            let check = chain_nonincreasing(
                &cands,
                |t| {
                    if t <= F::zero() {
                        hat0
                    } else {
                        hat_expr.eval(t) / t
                    }
                },
                tol,
            );
            if !check.ok && hat_ratio_ni.passed {
                hat_ratio_ni = ConditionCheck::fail(format!(
                    "delta-hat(t)/t rises inside [{}, {}]",
                    to_f64(p.lo),
                    to_f64(p.hi)
                ));
            }
        }

        let grid = self.grid_cross_check(grid_n.max(2));
        let member = d1.passed
            && d2.passed
            && d3.passed
            && d4.passed
            && below_sq.passed
            && sharp_nd.passed
            && hat_nd.passed;
        DHatReport {
            d1,
            d2,
            d3,
            d4,
            below_t_squared: below_sq,
            sharp_nondecreasing: sharp_nd,
            hat_nondecreasing: hat_nd,
            hat_over_t_nonincreasing: hat_ratio_ni,
            grid,
            boundary_case,
            member,
        }
    }

    fn grid_cross_check(&self, n: usize) -> ConditionCheck {
        let tol = lit::<F>(TOL);
        let mut prev_sharp = F::neg_infinity();
        let mut prev_hat = F::zero();
        for k in 1..=n {
            let t = lit::<F>(k as f64) / lit(n as f64);
            let s = self.sharp(t);
            let h = self.hat(t);
            if s < prev_sharp - tol {
                return ConditionCheck::fail(format!("grid: delta# dips at t = {}", to_f64(t)));
            }
            if h < prev_hat - tol {
                return ConditionCheck::fail(format!("grid: delta-hat dips at t = {}", to_f64(t)));
            }
            prev_sharp = s;
            prev_hat = h;
        }
        ConditionCheck::pass("sampled cross-check")
    }
}

/// Right limit of `p(t)/t^2` at 0 (infinite when `p(0) > 0` or `p'(0) > 0`).
fn sharp_limit_at_zero<F: Scalar>(p: &Polynomial<F>) -> F {
    let c = p.coeffs();
    let c0 = c.first().copied().unwrap_or_else(F::zero);
    let c1 = c.get(1).copied().unwrap_or_else(F::zero);
    let c2 = c.get(2).copied().unwrap_or_else(F::zero);
    let tol = lit::<F>(TOL);
    if c0.abs() > tol || c1.abs() > tol {
        if c0 > tol || c1 > tol {
            F::infinity()
        } else {
            F::neg_infinity()
        }
    } else {
        c2
    }
}

fn largest_zero<F: Scalar>(pw: &Piecewise<F>) -> F {
    let tol = lit::<F>(1e-13);
    let mut a = F::zero();
    for p in pw.pieces() {
        if p.expr.poly.is_zero(tol) {
            a = a.max(p.hi);
        } else if let Some(&r) = p.expr.poly.roots_in(p.lo, p.hi).last() {
            a = a.max(r);
        }
    }
    a
}

/// Membership report for the admissible diagonal class.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DHatReport {
    pub d1: ConditionCheck,
    pub d2: ConditionCheck,
    pub d3: ConditionCheck,
    pub d4: ConditionCheck,
    pub below_t_squared: ConditionCheck,
    pub sharp_nondecreasing: ConditionCheck,
    pub hat_nondecreasing: ConditionCheck,
    /// Cross-check of the equivalent membership form.
    pub hat_over_t_nonincreasing: ConditionCheck,
    pub grid: ConditionCheck,
    /// Equality held on some stretch: membership is a boundary case.
    pub boundary_case: bool,
    pub member: bool,
}

impl DHatReport {
    pub fn first_failure(&self) -> String {
        for (name, c) in [
            ("(D1)", &self.d1),
            ("(D2)", &self.d2),
            ("(D3)", &self.d3),
            ("(D4)", &self.d4),
            ("delta <= t^2", &self.below_t_squared),
            ("delta# monotone", &self.sharp_nondecreasing),
            ("delta-hat monotone", &self.hat_nondecreasing),
        ] {
            if !c.passed {
                return format!("{name}: {}", c.detail);
            }
        }
        "member".to_string()
    }
}

/// Exact diagonal section `max(0, t^2 - f(t) g(t))` of an RMM copula.
///
/// With `exact = true` the truncation points are isolated and the zero part
/// is stored as explicit zero pieces; with `exact = false` the raw
/// `t^2 - f g` pieces are kept and evaluation clamps at 0. Both forms
/// evaluate identically.
pub fn diagonal_of<F: Scalar>(
    c: &RmmCopula<F>,
    exact: bool,
) -> Result<DiagonalSection<F>, DiagonalError> {
    let t_sq = Polynomial::<F>::identity().mul(&Polynomial::identity());
    // refine breakpoints of f and g into a common partition
    let mut cuts: Vec<F> = vec![F::zero(), F::one()];
    cuts.extend(c.f().breakpoints());
    cuts.extend(c.g().breakpoints());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= lit(1e-13));

    let mut pieces: Vec<Piece<F>> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = (lo + hi) * lit(0.5);
        let fe = &c.f().pieces()[piece_at(c.f(), mid)].expr;
        let ge = &c.g().pieces()[piece_at(c.g(), mid)].expr;
        let prod = expr_product(fe, ge).ok_or(DiagonalError::NonPolynomialProduct)?;
        let q = t_sq.sub(&prod);
        if !exact {
            pieces.push(Piece {
                lo,
                hi,
                expr: PieceExpr::poly(q),
            });
            continue;
        }
        // split at the roots of q and store the nonpositive parts as zero
        let mut nodes = vec![lo];
        nodes.extend(q.roots_in(lo, hi).into_iter().filter(|&r| r > lo && r < hi));
        nodes.push(hi);
        for sub in nodes.windows(2) {
            let m = (sub[0] + sub[1]) * lit(0.5);
            let expr = if q.eval(m) > F::zero() {
                PieceExpr::poly(q.clone())
            } else {
                PieceExpr::poly(Polynomial::zero())
            };
            pieces.push(Piece {
                lo: sub[0],
                hi: sub[1],
                expr,
            });
        }
    }
    DiagonalSection::new(pieces)
}

fn piece_at<F: Scalar>(g: &Generator<F>, t: F) -> usize {
    g.piecewise().piece_index(t)
}

/// Product of two piece expressions when it is polynomial: both polynomial,
/// or both pure square roots (their product is the geometric mean of the
/// radicands, polynomial when they agree up to the coefficients).
fn expr_product<F: Scalar>(a: &PieceExpr<F>, b: &PieceExpr<F>) -> Option<Polynomial<F>> {
    match (&a.sqrt, &b.sqrt) {
        (None, None) => Some(a.poly.mul(&b.poly)),
        (Some((ca, qa)), Some((cb, qb))) => {
            let tol = lit::<F>(1e-12);
            if a.poly.is_zero(tol) && b.poly.is_zero(tol) && qa.sub(qb).is_zero(tol) {
                Some(qa.scale(*ca * *cb))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Symmetric RMM copula with the given diagonal: `f(t) = sqrt(t^2 - delta)`.
///
/// Pieces whose radicand is a perfect square become polynomial pieces;
/// the rest stay in square-root form.
pub fn srmm_from_diagonal<F: Scalar>(
    d: &DiagonalSection<F>,
) -> Result<RmmCopula<F>, DiagonalError> {
    let report = d.check_d_hat(64);
    if !report.member {
        return Err(DiagonalError::NotInDHat(report.first_failure()));
    }
    let f = generator_from_diagonal(d)?;
    Ok(RmmCopula::new_symmetric(f)?)
}

fn generator_from_diagonal<F: Scalar>(
    d: &DiagonalSection<F>,
) -> Result<Generator<F>, DiagonalError> {
    let t_sq = Polynomial::<F>::identity().mul(&Polynomial::identity());
    let mut pieces = Vec::new();
    for p in d.pieces() {
        let q = t_sq.sub(&p.expr.poly);
        let expr = if q.is_zero(lit(1e-13)) {
            PieceExpr::poly(Polynomial::zero())
        } else if let Some(mut s) = q.sqrt_exact() {
            let mid = (p.lo + p.hi) * lit(0.5);
            if s.eval(mid) < F::zero() {
                s = s.scale(-F::one());
            }
            PieceExpr::poly(s)
        } else {
            PieceExpr::sqrt(F::one(), q)
        };
        pieces.push(Piece {
            lo: p.lo,
            hi: p.hi,
            expr,
        });
    }
    Ok(Generator::from_pieces(pieces)?)
}

/// True when the diagonal pins down its symmetric RMM copula uniquely,
/// i.e. `delta > 0 on (0, 1]`.
pub fn srmm_uniqueness<F: Scalar>(d: &DiagonalSection<F>) -> bool {
    d.a_delta() <= lit(TOL)
}

/// The extreme symmetric RMM copulas with diagonal `d`: `C_h <= C_g <= C_f`
/// for every symmetric copula `C_g` sharing the diagonal. When
/// `a_delta = 0` the bounds coincide.
pub fn diagonal_bounds<F: Scalar>(
    d: &DiagonalSection<F>,
) -> Result<(RmmCopula<F>, RmmCopula<F>), DiagonalError> {
    let upper = srmm_from_diagonal(d)?;
    let a = d.a_delta();
    if a <= lit(TOL) {
        return Ok((upper.clone(), upper));
    }
    // h(t) = 2 a - t on (0, a], then sqrt(t^2 - delta) as in f
    let f = upper.f();
    let mut pieces = vec![Piece {
        lo: F::zero(),
        hi: a,
        expr: PieceExpr::poly(Polynomial::new(vec![lit::<F>(2.0) * a, -F::one()])),
    }];
    for p in f.pieces() {
        if p.hi <= a + lit(1e-12) {
            continue;
        }
        let lo = if p.lo < a { a } else { p.lo };
        pieces.push(Piece {
            lo,
            hi: p.hi,
            expr: p.expr.clone(),
        });
    }
    let h = Generator::from_pieces(pieces)?;
    let lower = RmmCopula::new_symmetric(h)?;
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::max_grid_deviation;

    fn delta_w() -> DiagonalSection<f64> {
        DiagonalSection::from_poly_pieces(&[(0.0, 0.5, &[0.0]), (0.5, 1.0, &[-1.0, 2.0])]).unwrap()
    }

    fn delta_pi() -> DiagonalSection<f64> {
        DiagonalSection::from_poly_pieces(&[(0.0, 1.0, &[0.0, 0.0, 1.0])]).unwrap()
    }

    /// delta# nondecreasing but delta-hat not: not a symmetric-RMM diagonal.
    fn dhat_counterexample() -> DiagonalSection<f64> {
        let b = 1.0 - std::f64::consts::SQRT_2 / 2.0;
        DiagonalSection::from_poly_pieces(&[
            (0.0, 0.25, &[0.0]),
            (0.25, b, &[-0.5, 2.0]),
            (b, 1.0, &[0.0, 0.0, 1.0]),
        ])
        .unwrap()
    }

    /// Diagonal of the asymmetric pair f = min(t, 1-t), g = max(0, 1/2 - t).
    fn asym_counterexample() -> DiagonalSection<f64> {
        DiagonalSection::from_poly_pieces(&[
            (0.0, 0.25, &[0.0]),
            (0.25, 0.5, &[0.0, -0.5, 2.0]),
            (0.5, 1.0, &[0.0, 0.0, 1.0]),
        ])
        .unwrap()
    }

    fn tent_copula() -> RmmCopula<f64> {
        let f = Generator::from_poly_pieces(&[(0.0, 0.5, &[0.0, 1.0]), (0.5, 1.0, &[1.0, -1.0])])
            .unwrap();
        RmmCopula::new_symmetric(f).unwrap()
    }

    #[test]
    fn diagonal_of_w_is_delta_w() {
        let w: RmmCopula<f64> = RmmCopula::new_symmetric(
            Generator::from_poly_pieces(&[(0.0, 1.0, &[1.0, -1.0])]).unwrap(),
        )
        .unwrap();
        let d = diagonal_of(&w, true).unwrap();
        assert!((d.a_delta() - 0.5).abs() < 1e-12);
        for k in 0..=40 {
            let t = k as f64 / 40.0;
            assert!((d.eval(t) - (2.0 * t - 1.0).max(0.0)).abs() < 1e-12);
        }
        // raw and exact forms agree pointwise
        let raw = diagonal_of(&w, false).unwrap();
        for k in 0..=40 {
            let t = k as f64 / 40.0;
            assert!((d.eval(t) - raw.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_of_asymmetric_counterexample() {
        let f = Generator::from_poly_pieces(&[(0.0, 0.5, &[0.0, 1.0]), (0.5, 1.0, &[1.0, -1.0])])
            .unwrap();
        let g =
            Generator::from_poly_pieces(&[(0.0, 0.5, &[0.5, -1.0]), (0.5, 1.0, &[0.0])]).unwrap();
        let c = RmmCopula::new(f, g).unwrap();
        let d = diagonal_of(&c, true).unwrap();
        let want = asym_counterexample();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((d.eval(t) - want.eval(t)).abs() < 1e-12, "t = {t}");
        }
        assert!((d.a_delta() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn product_diagonal() {
        let pi = RmmCopula::new_symmetric(Generator::zero()).unwrap();
        let d = diagonal_of(&pi, true).unwrap();
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!((d.eval(t) - t * t).abs() < 1e-15);
        }
        assert_eq!(d.a_delta(), 0.0);
    }

    #[test]
    fn sharp_and_hat_values() {
        let d = delta_pi();
        assert_eq!(d.sharp(0.37), 1.0);
        assert!((d.hat(0.37) - 0.37).abs() < 1e-15);
        let w = delta_w();
        assert!((w.sharp(0.75) - 8.0 / 9.0).abs() < 1e-15);
        assert!((w.hat(0.25) - 0.5).abs() < 1e-15);
        // delta#(t) = (4t - 1)/(2 t^2) on the middle piece
        let ce = dhat_counterexample();
        let t = 0.275;
        assert!((ce.sharp(t) - (4.0 * t - 1.0) / (2.0 * t * t)).abs() < 1e-13);
        // identity linking the two transforms
        for k in 1..=50 {
            let t = k as f64 / 50.0;
            for d in [&delta_w(), &delta_pi(), &asym_counterexample()] {
                let lhs = d.sharp(t);
                let rhs = 1.0 - (d.hat(t) / t - 1.0).powi(2);
                assert!((lhs - rhs).abs() < 1e-12);
                let hat_from_sharp = t * (1.0 + (1.0 - d.sharp(t)).max(0.0).sqrt());
                assert!((d.hat(t) - hat_from_sharp).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn membership_table() {
        assert!(delta_w().check_d_hat(101).member);
        assert!(delta_pi().check_d_hat(101).member);
        let r = dhat_counterexample().check_d_hat(101);
        assert!(r.sharp_nondecreasing.passed);
        assert!(!r.hat_nondecreasing.passed);
        assert!(!r.member);
        let r = asym_counterexample().check_d_hat(101);
        assert!(!r.hat_nondecreasing.passed);
        // the witness pair from the asymmetric example
        let d = asym_counterexample();
        let lhs = d.hat(3.0 / 8.0);
        assert!((lhs - (3.0 + 3.0f64.sqrt()) / 8.0).abs() < 1e-14);
        assert!(lhs > d.hat(0.5));
        assert!((d.hat(0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn srmm_from_delta_w_is_tent() {
        let c = srmm_from_diagonal(&delta_w()).unwrap();
        let tent = tent_copula();
        assert!(max_grid_deviation(&c, &tent, 64) <= 1e-12);
        // the four-piece closed form at one point, exactly
        assert_eq!(c.cdf(0.25, 0.75), 0.125);
        // diagonal reproduced
        let d = diagonal_of(&c, true).unwrap();
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            assert!((d.eval(t) - delta_w().eval(t)).abs() <= 1e-10);
        }
    }

    #[test]
    fn srmm_from_efgm_diagonal_recovers_generator() {
        let a = 0.5;
        let f = Generator::from_poly_pieces(&[(0.0, 1.0, &[0.0, a, -a])]).unwrap();
        let c = RmmCopula::new_symmetric(f.clone()).unwrap();
        let d = diagonal_of(&c, true).unwrap();
        assert!(srmm_uniqueness(&d));
        let c2 = srmm_from_diagonal(&d).unwrap();
        // perfect square radicand: the generator comes back polynomial
        assert!(c2.f().pieces().iter().all(|p| p.expr.is_poly()));
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            assert!((c2.f().eval(t) - f.eval(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn srmm_from_sqrt_radicand() {
        // the diagonal of the generator (1-t) sqrt((1+t)/2): its radicand
        // (1-t)^2 (1+t)/2 has odd degree, so no polynomial square root
        let cubic = |t: f64| t * t * t - 3.0 * t * t - t + 1.0; // 2t^2 = (1-t)^2(1+t)
        let (mut lo, mut hi) = (0.4, 0.5);
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if cubic(m) > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let r = 0.5 * (lo + hi);
        let d = DiagonalSection::from_poly_pieces(&[
            (0.0, r, &[0.0]),
            (r, 1.0, &[-0.5, 0.5, 1.5, -0.5]),
        ])
        .unwrap();
        let rep = d.check_d_hat(101);
        assert!(rep.member, "{}", rep.first_failure());
        let c = srmm_from_diagonal(&d).unwrap();
        assert!(c.f().pieces().iter().any(|p| !p.expr.is_poly()));
        let back = diagonal_of(&c, true).unwrap();
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            assert!((back.eval(t) - d.eval(t)).abs() <= 1e-10, "t = {t}");
        }
        // bounds exist and braket the copula it came from
        let (lower, upper) = diagonal_bounds(&d).unwrap();
        for i in 0..=40 {
            for j in 0..=40 {
                let (u, v) = (i as f64 / 40.0, j as f64 / 40.0);
                assert!(lower.cdf(u, v) <= c.cdf(u, v) + 1e-12);
                assert!(c.cdf(u, v) <= upper.cdf(u, v) + 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_member() {
        assert!(matches!(
            srmm_from_diagonal(&dhat_counterexample()),
            Err(DiagonalError::NotInDHat(_))
        ));
    }

    #[test]
    fn bounds_for_delta_w() {
        let (lower, upper) = diagonal_bounds(&delta_w()).unwrap();
        // lower bound is W itself: h(t) = 1 - t
        for k in 1..=50 {
            let t = k as f64 / 50.0;
            assert!((lower.f().eval(t) - (1.0 - t)).abs() < 1e-12);
        }
        assert_eq!(upper.cdf(0.25, 0.75), 0.125);
        // ordering against an intermediate generator with the same diagonal
        let mid =
            Generator::from_poly_pieces(&[(0.0, 0.5, &[0.5]), (0.5, 1.0, &[1.0, -1.0])]).unwrap();
        let cg = RmmCopula::new_symmetric(mid).unwrap();
        let dg = diagonal_of(&cg, true).unwrap();
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((dg.eval(t) - delta_w().eval(t)).abs() < 1e-12);
        }
        for i in 0..=60 {
            for j in 0..=60 {
                let (u, v) = (i as f64 / 60.0, j as f64 / 60.0);
                let (cl, cm, cu) = (lower.cdf(u, v), cg.cdf(u, v), upper.cdf(u, v));
                assert!(cl <= cm + 1e-12 && cm <= cu + 1e-12);
            }
        }
    }

    #[test]
    fn bounds_collapse_when_unique() {
        let (lower, upper) = diagonal_bounds(&delta_pi()).unwrap();
        assert!(max_grid_deviation(&lower, &upper, 32) <= 1e-15);
    }

    #[test]
    fn semilinear_values() {
        let d = delta_pi();
        for (u, v) in [(0.3, 0.8), (0.5, 0.5), (0.9, 0.2)] {
            assert!((d.semilinear(u, v) - u * v).abs() < 1e-15);
        }
        assert_eq!(d.semilinear(0.0, 0.0), 0.0);
        // diagonal of M gives the upper Frechet bound
        let m: DiagonalSection<f64> =
            DiagonalSection::from_poly_pieces(&[(0.0, 1.0, &[0.0, 1.0])]).unwrap();
        for (u, v) in [(0.3, 0.8), (0.6, 0.4)] {
            assert!((m.semilinear(u, v) - u.min(v)).abs() < 1e-15);
        }
    }
}
