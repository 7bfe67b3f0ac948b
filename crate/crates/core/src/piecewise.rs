//! Piecewise function machinery shared by generators and diagonal sections.
//!
//! A piece evaluates `p(t) + c * sqrt(q(t))` on its interval, where `p`, `q`
//! are polynomials. The plain polynomial case is `c = 0`. The square-root
//! form shows up when a symmetric copula is rebuilt from a diagonal section
//! whose `t^2 - delta(t)` pieces are not perfect squares.
//!
//! Monotonicity of such an expression, or of `expr(t)/t^k`, is decided
//! exactly: the derivative can only vanish on a finite candidate set obtained
//! from polynomial root isolation (after clearing the square root by
//! squaring), so checking the expression values along the sorted candidate
//! chain settles monotonicity up to the stated tolerance.

use crate::num::{lit, Scalar};
use crate::poly::Polynomial;

/// Which one-sided limit to take at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `poly(t) + sqrt_coeff * sqrt(max(radicand(t), 0))` on a piece interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PieceExpr<F> {
    pub poly: Polynomial<F>,
    pub sqrt: Option<(F, Polynomial<F>)>,
}

impl<F: Scalar> PieceExpr<F> {
    pub fn poly(p: Polynomial<F>) -> Self {
        PieceExpr {
            poly: p,
            sqrt: None,
        }
    }

    pub fn sqrt(coeff: F, radicand: Polynomial<F>) -> Self {
        PieceExpr {
            poly: Polynomial::zero(),
            sqrt: Some((coeff, radicand)),
        }
    }

    pub fn is_poly(&self) -> bool {
        self.sqrt.is_none()
    }

    pub fn eval(&self, t: F) -> F {
        let mut v = self.poly.eval(t);
        if let Some((c, q)) = &self.sqrt {
            v = v + *c * q.eval(t).max(F::zero()).sqrt();
        }
        v
    }

    /// Pointwise derivative; infinite where the radicand vanishes.
    pub fn deriv(&self, t: F) -> F {
        let mut v = self.poly.derivative().eval(t);
        if let Some((c, q)) = &self.sqrt {
            let qv = q.eval(t).max(F::zero());
            v = v + *c * q.derivative().eval(t) / (lit::<F>(2.0) * qv.sqrt());
        }
        v
    }

    pub fn scale(&self, k: F) -> Self {
        PieceExpr {
            poly: self.poly.scale(k),
            sqrt: self.sqrt.as_ref().map(|(c, q)| (*c * k, q.clone())),
        }
    }

    pub fn add_poly(&self, p: &Polynomial<F>) -> Self {
        PieceExpr {
            poly: self.poly.add(p),
            sqrt: self.sqrt.clone(),
        }
    }

    /// Substitutes `t -> a + b t`.
    pub fn compose_affine(&self, a: F, b: F) -> Self {
        PieceExpr {
            poly: self.poly.compose_affine(a, b),
            sqrt: self
                .sqrt
                .as_ref()
                .map(|(c, q)| (*c, q.compose_affine(a, b))),
        }
    }

    /// Points in `[lo, hi]` where the derivative of the expression may vanish
    /// or fail to exist, plus the endpoints. Between consecutive candidates
    /// the expression is strictly monotone.
    pub fn extremum_candidates(&self, lo: F, hi: F) -> Vec<F> {
        let mut pts = vec![lo, hi];
        match &self.sqrt {
            None => pts.extend(self.poly.derivative().roots_in(lo, hi)),
            Some((c, q)) => {
                // p' + c q' / (2 sqrt q) = 0  =>  4 p'^2 q = c^2 q'^2
                let dp = self.poly.derivative();
                let dq = q.derivative();
                let lhs = dp.mul(&dp).mul(q).scale(lit(4.0));
                let rhs = dq.mul(&dq).scale(*c * *c);
                pts.extend(lhs.sub(&rhs).roots_in(lo, hi));
                pts.extend(q.roots_in(lo, hi));
            }
        }
        sort_dedup(&mut pts);
        pts
    }

    /// Candidate extrema of `expr(t) / t^k` on `[lo, hi]`, `lo > 0` expected
    /// when `k > 0`.
    pub fn ratio_candidates(&self, k: u32, lo: F, hi: F) -> Vec<F> {
        let kf = lit::<F>(k as f64);
        let t = Polynomial::identity();
        let mut pts = vec![lo, hi];
        match &self.sqrt {
            None => {
                // (p/t^k)' = 0  <=>  p' t - k p = 0
                let num = self.poly.derivative().mul(&t).sub(&self.poly.scale(kf));
                pts.extend(num.roots_in(lo, hi));
            }
            Some((c, q)) => {
                // 2 sqrt(q) (p' t - k p) = -c (q' t - 2 k q), then square.
                let a = self.poly.derivative().mul(&t).sub(&self.poly.scale(kf));
                let b = q.derivative().mul(&t).sub(&q.scale(lit::<F>(2.0) * kf));
                let lhs = a.mul(&a).mul(q).scale(lit(4.0));
                let rhs = b.mul(&b).scale(*c * *c);
                pts.extend(lhs.sub(&rhs).roots_in(lo, hi));
                pts.extend(q.roots_in(lo, hi));
            }
        }
        sort_dedup(&mut pts);
        pts
    }

    pub fn min_on(&self, lo: F, hi: F) -> F {
        self.extremum_candidates(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold(F::infinity(), F::min)
    }

    pub fn max_on(&self, lo: F, hi: F) -> F {
        self.extremum_candidates(lo, hi)
            .into_iter()
            .map(|t| self.eval(t))
            .fold(F::neg_infinity(), F::max)
    }
}

fn sort_dedup<F: Scalar>(pts: &mut Vec<F>) {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= lit(1e-13));
}

/// Outcome of a chain monotonicity check.
#[derive(Clone, Debug)]
pub struct MonotoneCheck<F> {
    pub ok: bool,
    /// Witness `(t1, t2, v1, v2)` of the first violation, when `ok == false`.
    pub witness: Option<(F, F, F, F)>,
    /// Equality held (within tolerance) on at least one candidate interval.
    pub boundary_case: bool,
}

/// Checks that `value` is nondecreasing along the sorted candidate chain.
///
/// Between consecutive candidates the underlying function is monotone, so
/// this decides monotonicity on the whole interval.
pub fn chain_nondecreasing<F: Scalar>(
    points: &[F],
    value: impl Fn(F) -> F,
    tol: F,
) -> MonotoneCheck<F> {
    let mut boundary = false;
    let mut prev_t = None;
    let mut prev_v = F::neg_infinity();
    for &t in points {
        let v = value(t);
        if let Some(pt) = prev_t {
            if v < prev_v - tol {
                return MonotoneCheck {
                    ok: false,
                    witness: Some((pt, t, prev_v, v)),
                    boundary_case: boundary,
                };
            }
            if (v - prev_v).abs() <= tol {
                boundary = true;
            }
        }
        prev_t = Some(t);
        prev_v = v;
    }
    MonotoneCheck {
        ok: true,
        witness: None,
        boundary_case: boundary,
    }
}

/// Checks that `value` is nonincreasing along the candidate chain.
pub fn chain_nonincreasing<F: Scalar>(
    points: &[F],
    value: impl Fn(F) -> F,
    tol: F,
) -> MonotoneCheck<F> {
    let flipped = chain_nondecreasing(points, |t| -value(t), tol);
    MonotoneCheck {
        ok: flipped.ok,
        witness: flipped.witness.map(|(t1, t2, v1, v2)| (t1, t2, -v1, -v2)),
        boundary_case: flipped.boundary_case,
    }
}

/// One piece of a piecewise function.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece<F> {
    pub lo: F,
    pub hi: F,
    pub expr: PieceExpr<F>,
}

impl<F: Scalar> Piece<F> {
    pub fn poly(lo: F, hi: F, coeffs: &[f64]) -> Self {
        Piece {
            lo,
            hi,
            expr: PieceExpr::poly(Polynomial::from_f64(coeffs)),
        }
    }
}

/// Structural problems found when assembling a piecewise function.
#[derive(Clone, Debug, thiserror::Error)]
pub enum PiecewiseError {
    #[error("piece list is empty")]
    Empty,
    #[error("piece {index} has an empty or inverted interval [{lo}, {hi}]")]
    BadInterval { index: usize, lo: f64, hi: f64 },
    #[error("gap or overlap of size {gap:.3e} between pieces {index} and {}", index + 1)]
    GapOrOverlap { index: usize, gap: f64 },
}

/// A function on `[domain_lo, domain_hi]` given by abutting pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise<F> {
    pieces: Vec<Piece<F>>,
}

impl<F: Scalar> Piecewise<F> {
    /// Assembles pieces after checking they tile an interval. Abutting
    /// endpoints may differ by at most `1e-12`; they are snapped exactly.
    pub fn new(mut pieces: Vec<Piece<F>>) -> Result<Self, PiecewiseError> {
        if pieces.is_empty() {
            return Err(PiecewiseError::Empty);
        }
        pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());
        let join_tol = lit::<F>(1e-12);
        for i in 0..pieces.len() {
            let (lo, hi) = (pieces[i].lo, pieces[i].hi);
            if lo >= hi || lo.is_nan() || hi.is_nan() {
                return Err(PiecewiseError::BadInterval {
                    index: i,
                    lo: lo.to_f64().unwrap_or(f64::NAN),
                    hi: hi.to_f64().unwrap_or(f64::NAN),
                });
            }
            if i + 1 < pieces.len() {
                let gap = (pieces[i + 1].lo - hi).abs();
                if gap > join_tol {
                    return Err(PiecewiseError::GapOrOverlap {
                        index: i,
                        gap: gap.to_f64().unwrap_or(f64::NAN),
                    });
                }
                pieces[i + 1].lo = hi;
            }
        }
        Ok(Piecewise { pieces })
    }

    pub fn single(expr: PieceExpr<F>, lo: F, hi: F) -> Self {
        Piecewise {
            pieces: vec![Piece { lo, hi, expr }],
        }
    }

    pub fn pieces(&self) -> &[Piece<F>] {
        &self.pieces
    }

    pub fn domain(&self) -> (F, F) {
        (self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    /// Index of the piece evaluated at `t` (ties at a shared breakpoint go to
    /// the left piece, which matches the right piece by continuity).
    pub fn piece_index(&self, t: F) -> usize {
        let n = self.pieces.len();
        let mut idx = self.pieces.partition_point(|p| p.hi < t);
        if idx >= n {
            idx = n - 1;
        }
        idx
    }

    pub fn eval(&self, t: F) -> F {
        self.pieces[self.piece_index(t)].expr.eval(t)
    }

    /// One-sided derivative at `t`.
    pub fn deriv(&self, t: F, side: Side) -> F {
        let n = self.pieces.len();
        let mut idx = self.piece_index(t);
        match side {
            Side::Left => {
                if idx > 0 && (t - self.pieces[idx].lo).abs() <= lit(1e-15) {
                    idx -= 1;
                }
            }
            Side::Right => {
                if idx + 1 < n && (t - self.pieces[idx].hi).abs() <= lit(1e-15) {
                    idx += 1;
                }
            }
        }
        self.pieces[idx].expr.deriv(t)
    }

    /// Interior breakpoints, ascending.
    pub fn breakpoints(&self) -> Vec<F> {
        self.pieces[..self.pieces.len() - 1]
            .iter()
            .map(|p| p.hi)
            .collect()
    }

    /// Value of the first piece at the lower domain endpoint (the right limit
    /// there when the stored function has a jump conventions at 0).
    pub fn first_value(&self) -> F {
        self.pieces[0].expr.eval(self.pieces[0].lo)
    }

    /// Value of the last piece at the upper domain endpoint.
    pub fn last_value(&self) -> F {
        let last = &self.pieces[self.pieces.len() - 1];
        last.expr.eval(last.hi)
    }

    /// Largest jump between adjacent pieces at their shared breakpoint.
    pub fn max_joint_mismatch(&self) -> F {
        let mut worst = F::zero();
        for w in self.pieces.windows(2) {
            let d = (w[0].expr.eval(w[0].hi) - w[1].expr.eval(w[1].lo)).abs();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn map_exprs(&self, f: impl Fn(&PieceExpr<F>) -> PieceExpr<F>) -> Self {
        Piecewise {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lo: p.lo,
                    hi: p.hi,
                    expr: f(&p.expr),
                })
                .collect(),
        }
    }

    /// Near-equality of two piecewise functions as stored objects: same
    /// breakpoints and coefficients within `tol`.
    pub fn structurally_eq(&self, other: &Self, tol: F) -> bool {
        if self.pieces.len() != other.pieces.len() {
            return false;
        }
        self.pieces.iter().zip(&other.pieces).all(|(a, b)| {
            (a.lo - b.lo).abs() <= tol
                && (a.hi - b.hi).abs() <= tol
                && exprs_close(&a.expr, &b.expr, tol)
        })
    }
}

fn exprs_close<F: Scalar>(a: &PieceExpr<F>, b: &PieceExpr<F>, tol: F) -> bool {
    let pa = a.poly.coeffs();
    let pb = b.poly.coeffs();
    let n = pa.len().max(pb.len());
    for k in 0..n {
        let ca = pa.get(k).copied().unwrap_or_else(F::zero);
        let cb = pb.get(k).copied().unwrap_or_else(F::zero);
        if (ca - cb).abs() > tol {
            return false;
        }
    }
    match (&a.sqrt, &b.sqrt) {
        (None, None) => true,
        (Some((ca, qa)), Some((cb, qb))) => (*ca - *cb).abs() <= tol && qa.sub(qb).is_zero(tol),
        _ => false,
    }
}
