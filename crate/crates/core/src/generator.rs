//! Generator functions of RMM and maxmin copulas.
//!
//! An RMM generator is a function `f` on `[0, 1]` with `f(0) = f(1) = 0`,
//! continuous on `(0, 1]` but allowed a jump at 0 (carried by `zero_limit`),
//! such that
//!
//! * (G1) `f(1) = 0` (and `f(0) = 0` by convention),
//! * (G2) `t + f(t)` is nondecreasing,
//! * (G3) `f(t)/t` is nonincreasing on `(0, 1]`.
//!
//! The starred transform `f*(t) = f(t)/t` takes an extended value at 0: the
//! right limit when it exists, `+inf` otherwise.
//!
//! The maxmin side works with a pair `(phi, psi)` satisfying (F1)-(F3); the
//! two parameterizations are in bijection via `f(u) = phi(u) - u` and
//! `g(v) = 1 - v - psi(1 - v)`, which is implemented here exactly on piece
//! coefficients.

use serde::Serialize;

use crate::num::{lit, to_f64, ExtendedNonneg, Scalar};
use crate::piecewise::{
    chain_nondecreasing, chain_nonincreasing, Piece, PieceExpr, Piecewise, PiecewiseError, Side,
};
use crate::poly::Polynomial;

/// Slack for all equality and monotonicity checks.
pub const TOL: f64 = 1e-12;

#[derive(Clone, Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error("piece list malformed: {0}")]
    Structural(#[from] PiecewiseError),
    #[error("pieces must cover [0, 1], got [{lo}, {hi}]")]
    DomainNotUnit { lo: f64, hi: f64 },
    #[error("generator conditions failed: {0}")]
    Invalid(String),
    #[error("derivative undefined at 0 across the jump (zero limit {0})")]
    DerivativeAtJump(f64),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
}

/// Generator of an RMM copula: piecewise `p(t) + c sqrt(q(t))` on `(0, 1]`
/// with `f(0) = 0` by convention and right limit `zero_limit` at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator<F> {
    pw: Piecewise<F>,
    zero_limit: F,
}

impl<F: Scalar> Generator<F> {
    /// Builds a generator from pieces covering `[0, 1]`. The jump at 0 is
    /// derived from the first piece's value there, so the stored function is
    /// automatically consistent.
    pub fn from_pieces(pieces: Vec<Piece<F>>) -> Result<Self, GeneratorError> {
        let pw = Piecewise::new(pieces)?;
        let (lo, hi) = pw.domain();
        if lo.abs() > lit(TOL) || (hi - F::one()).abs() > lit(TOL) {
            return Err(GeneratorError::DomainNotUnit {
                lo: to_f64(lo),
                hi: to_f64(hi),
            });
        }
        let zero_limit = pw.first_value();
        Ok(Generator { pw, zero_limit })
    }

    /// Convenience constructor from `(lo, hi, coeffs)` polynomial pieces.
    pub fn from_poly_pieces(pieces: &[(f64, f64, &[f64])]) -> Result<Self, GeneratorError> {
        Generator::from_pieces(
            pieces
                .iter()
                .map(|&(lo, hi, coeffs)| Piece::poly(lit(lo), lit(hi), coeffs))
                .collect(),
        )
    }

    /// The zero generator of the product copula.
    pub fn zero() -> Self {
        Generator {
            pw: Piecewise::single(PieceExpr::poly(Polynomial::zero()), F::zero(), F::one()),
            zero_limit: F::zero(),
        }
    }

    pub fn pieces(&self) -> &[Piece<F>] {
        self.pw.pieces()
    }

    pub fn piecewise(&self) -> &Piecewise<F> {
        &self.pw
    }

    /// Right limit of `f` at 0; `f(0)` itself is always 0.
    pub fn zero_limit(&self) -> F {
        self.zero_limit
    }

    /// Interior breakpoints of the piece partition.
    pub fn breakpoints(&self) -> Vec<F> {
        self.pw.breakpoints()
    }

    /// `f(t)`; total on `[0, 1]`, with `f(0) = 0` regardless of the jump.
    pub fn eval(&self, t: F) -> F {
        if t <= F::zero() {
            return F::zero();
        }
        self.pw.eval(t)
    }

    /// `f*(t) = f(t)/t`, extended at 0 by the right limit (or `+inf`).
    pub fn star(&self, t: F) -> ExtendedNonneg<F> {
        if t > F::zero() {
            ExtendedNonneg::Finite(self.eval(t) / t)
        } else {
            limit_ratio_at_zero(&self.pw.pieces()[0].expr)
        }
    }

    /// `f*(t)` as a plain scalar, `+inf` when the extended value diverges.
    pub fn star_value(&self, t: F) -> F {
        match self.star(t) {
            ExtendedNonneg::Finite(x) => x,
            ExtendedNonneg::Infinite => F::infinity(),
        }
    }

    /// `f-hat(t) = t + f(t)`, the distortion whose monotonicity is (G2).
    pub fn hat(&self, t: F) -> F {
        t + self.eval(t)
    }

    /// One-sided derivative of `f` at `t in (0, 1)` (either side at interior
    /// breakpoints; endpoints take the inward side). Errors at `t = 0` when
    /// the generator jumps there.
    pub fn derivative(&self, t: F, side: Side) -> Result<F, GeneratorError> {
        if t <= F::zero() {
            if self.zero_limit > lit(TOL) {
                return Err(GeneratorError::DerivativeAtJump(to_f64(self.zero_limit)));
            }
            return Ok(self.pw.deriv(F::zero(), Side::Right));
        }
        Ok(self.pw.deriv(t, side))
    }

    /// `lambda * f`, no validity check (see [`scale_pair`]).
    pub fn scale(&self, lambda: F) -> Self {
        Generator {
            pw: self.pw.map_exprs(|e| e.scale(lambda)),
            zero_limit: self.zero_limit * lambda,
        }
    }

    /// Structural near-equality of the stored pieces.
    pub fn structurally_eq(&self, other: &Self, tol: F) -> bool {
        self.pw.structurally_eq(&other.pw, tol) && (self.zero_limit - other.zero_limit).abs() <= tol
    }

    /// True when `f` is numerically the zero generator.
    pub fn is_zero(&self) -> bool {
        self.zero_limit.abs() <= lit(TOL)
            && self
                .pw
                .pieces()
                .iter()
                .all(|p| p.expr.max_on(p.lo, p.hi).abs() <= lit(TOL))
    }

    /// Validates conditions (G1)-(G3) plus nonnegativity and continuity.
    ///
    /// Monotonicity is decided exactly per piece by sign analysis of the
    /// relevant polynomials (candidate chains); `grid_n` only controls the
    /// redundant sampled cross-check.
    pub fn validate(&self, grid_n: usize) -> ValidationReport {
        let tol = lit::<F>(TOL);
        let mut structural_issues = Vec::new();

        let joint = self.pw.max_joint_mismatch();
        if joint > tol {
            structural_issues.push(format!(
                "adjacent pieces disagree at a breakpoint by {:.3e}",
                to_f64(joint)
            ));
        }
        for (i, p) in self.pw.pieces().iter().enumerate() {
            if let Some((_, q)) = &p.expr.sqrt {
                let qmin = q.min_on(p.lo, p.hi);
                if qmin < -tol {
                    structural_issues.push(format!(
                        "piece {i}: radicand dips to {:.3e} below zero",
                        to_f64(qmin)
                    ));
                }
            }
        }

        // (G1): f(1) = 0; f(0) = 0 holds by convention.
        let f1 = self.pw.last_value();
        let g1 = if f1.abs() <= tol {
            ConditionCheck::pass("f(1) = 0")
        } else {
            ConditionCheck::fail(format!("f(1) = {:.6e}, expected 0", to_f64(f1)))
        };

        // (G2): t + f(t) nondecreasing; the jump at 0 is upward whenever
        // zero_limit >= 0, so only the pieces need checking.
        let mut g2 = ConditionCheck::pass("t + f(t) nondecreasing");
        for p in self.pw.pieces() {
            let hat = p.expr.add_poly(&Polynomial::identity());
            let cands = hat.extremum_candidates(p.lo, p.hi);
            let check = chain_nondecreasing(&cands, |t| hat.eval(t), tol);
            if !check.ok {
                let (t1, t2, v1, v2) = check.witness.unwrap();
                g2 = ConditionCheck::fail(format!(
                    "t + f(t) decreases from {:.12} at t={:.12} to {:.12} at t={:.12}",
                    to_f64(v1),
                    to_f64(t1),
                    to_f64(v2),
                    to_f64(t2)
                ));
                break;
            }
        }

        // (G3): f(t)/t nonincreasing on (0, 1]; the extended value at 0
        // dominates the right limit by construction.
        let mut g3 = ConditionCheck::pass("f(t)/t nonincreasing");
        'outer: for p in self.pw.pieces() {
            let cands = p.expr.ratio_candidates(1, p.lo, p.hi);
            let star0 = self.star_value(F::zero());
            let check = chain_nonincreasing(
                &cands,
                |t| {
                    if t <= F::zero() {
                        star0
                    } else {
                        p.expr.eval(t) / t
                    }
                },
                tol,
            );
            if !check.ok {
                let (t1, t2, v1, v2) = check.witness.unwrap();
                g3 = ConditionCheck::fail(format!(
                    "f(t)/t increases from {:.12} at t={:.12} to {:.12} at t={:.12}",
                    to_f64(v1),
                    to_f64(t1),
                    to_f64(v2),
                    to_f64(t2)
                ));
                break 'outer;
            }
        }

        // f >= 0 on [0, 1], exact per piece.
        let mut nonneg = ConditionCheck::pass("f >= 0");
        for p in self.pw.pieces() {
            let m = p.expr.min_on(p.lo, p.hi);
            if m < -tol {
                nonneg = ConditionCheck::fail(format!(
                    "f reaches {:.6e} inside [{:.6}, {:.6}]",
                    to_f64(m),
                    to_f64(p.lo),
                    to_f64(p.hi)
                ));
                break;
            }
        }

        let grid = self.grid_cross_check(grid_n.max(2));

        ValidationReport {
            structural_ok: structural_issues.is_empty(),
            structural_issues,
            g1,
            g2,
            g3,
            nonneg,
            grid,
        }
    }

    fn grid_cross_check(&self, grid_n: usize) -> ConditionCheck {
        let tol = lit::<F>(TOL);
        let n = grid_n;
        let mut prev_hat = F::zero(); // f-hat(0) = 0
        let mut prev_star = F::infinity();
        for k in 1..=n {
            let t = lit::<F>(k as f64) / lit(n as f64);
            let ft = self.eval(t);
            if ft < -tol {
                return ConditionCheck::fail(format!("grid: f({}) < 0", to_f64(t)));
            }
            let hat = t + ft;
            if hat < prev_hat - tol {
                return ConditionCheck::fail(format!("grid: t + f(t) dips at {}", to_f64(t)));
            }
            let star = ft / t;
            if star > prev_star + tol {
                return ConditionCheck::fail(format!("grid: f(t)/t rises at {}", to_f64(t)));
            }
            prev_hat = hat;
            prev_star = star;
        }
        ConditionCheck::pass("sampled cross-check")
    }
}

/// Right limit of `expr(t)/t` as `t` decreases to 0, extended to `+inf`.
fn limit_ratio_at_zero<F: Scalar>(expr: &PieceExpr<F>) -> ExtendedNonneg<F> {
    let tol = lit::<F>(TOL);
    let p = expr.poly.coeffs();
    let p0 = p.first().copied().unwrap_or_else(F::zero);
    let p1 = p.get(1).copied().unwrap_or_else(F::zero);
    match &expr.sqrt {
        None => {
            if p0.abs() > tol {
                ExtendedNonneg::Infinite
            } else {
                ExtendedNonneg::Finite(p1)
            }
        }
        Some((c, q)) => {
            let qc = q.coeffs();
            let q0 = qc.first().copied().unwrap_or_else(F::zero);
            let q1 = qc.get(1).copied().unwrap_or_else(F::zero);
            let q2 = qc.get(2).copied().unwrap_or_else(F::zero);
            if p0.abs() > tol || (c.abs() > tol && q0.abs() > tol) {
                ExtendedNonneg::Infinite
            } else if c.abs() > tol && q1.abs() > tol {
                // sqrt(q1 t)/t diverges
                ExtendedNonneg::Infinite
            } else {
                ExtendedNonneg::Finite(p1 + *c * q2.max(F::zero()).sqrt())
            }
        }
    }
}

/// `(lambda f, g / lambda)`, validated; the induced RMM copula is unchanged.
pub fn scale_pair<F: Scalar>(
    f: &Generator<F>,
    g: &Generator<F>,
    lambda: F,
) -> Result<(Generator<F>, Generator<F>), GeneratorError> {
    if lambda <= F::zero() || lambda.is_nan() {
        return Err(GeneratorError::NonPositiveScale(to_f64(lambda)));
    }
    let sf = f.scale(lambda);
    let sg = g.scale(F::one() / lambda);
    for (name, gen) in [("lambda*f", &sf), ("g/lambda", &sg)] {
        let report = gen.validate(64);
        if !report.passed() {
            return Err(GeneratorError::Invalid(format!(
                "{name}: {}",
                report.first_failure()
            )));
        }
    }
    Ok((sf, sg))
}

/// Result of checking one named generator condition.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub passed: bool,
    pub detail: String,
}

impl ConditionCheck {
    pub fn pass(detail: impl Into<String>) -> Self {
        ConditionCheck {
            passed: true,
            detail: detail.into(),
        }
    }

    pub fn fail(detail: impl Into<String>) -> Self {
        ConditionCheck {
            passed: false,
            detail: detail.into(),
        }
    }
}

/// Per-condition validation report; structural problems are kept separate
/// from condition failures.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub structural_ok: bool,
    pub structural_issues: Vec<String>,
    pub g1: ConditionCheck,
    pub g2: ConditionCheck,
    pub g3: ConditionCheck,
    pub nonneg: ConditionCheck,
    pub grid: ConditionCheck,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.structural_ok
            && self.g1.passed
            && self.g2.passed
            && self.g3.passed
            && self.nonneg.passed
            && self.grid.passed
    }

    pub fn first_failure(&self) -> String {
        if !self.structural_ok {
            return format!("structural: {}", self.structural_issues.join("; "));
        }
        for (name, c) in [
            ("(G1)", &self.g1),
            ("(G2)", &self.g2),
            ("(G3)", &self.g3),
            ("nonneg", &self.nonneg),
            ("grid", &self.grid),
        ] {
            if !c.passed {
                return format!("{name} failed: {}", c.detail);
            }
        }
        "all conditions passed".to_string()
    }
}

/// Maxmin generator pair `(phi, psi)` with the conventions `phi(0) = 0`
/// (jump allowed at 0) and `psi(1) = 1` (jump allowed at 1).
#[derive(Clone, Debug, PartialEq)]
pub struct MaxminGenerators<F> {
    phi: Piecewise<F>,
    psi: Piecewise<F>,
}

impl<F: Scalar> MaxminGenerators<F> {
    /// Builds the pair from raw piecewise functions. `phi` carries the
    /// convention `phi(0) = 0`, `psi` the convention `psi(1) = 1`; use
    /// [`MaxminGenerators::validate`] to check (F1)-(F3).
    pub fn from_parts(phi: Piecewise<F>, psi: Piecewise<F>) -> Self {
        MaxminGenerators { phi, psi }
    }

    /// Builds the pair associated with RMM generators:
    /// `phi(u) = u + f(u)`, `psi(v) = v - g(1 - v)`.
    pub fn from_rmm_pair(f: &Generator<F>, g: &Generator<F>) -> Self {
        let t = Polynomial::identity();
        let phi = f.piecewise().map_exprs(|e| e.add_poly(&t));
        let psi_pieces = g
            .pieces()
            .iter()
            .map(|p| {
                // on v in [1-hi, 1-lo]: psi(v) = v - g(1-v)
                let expr = p
                    .expr
                    .compose_affine(F::one(), -F::one())
                    .scale(-F::one())
                    .add_poly(&t);
                Piece {
                    lo: F::one() - p.hi,
                    hi: F::one() - p.lo,
                    expr,
                }
            })
            .collect();
        MaxminGenerators {
            phi,
            psi: Piecewise::new(psi_pieces).expect("reflected pieces tile [0,1]"),
        }
    }

    /// Recovers the RMM pair: `f(u) = phi(u) - u`, `g(v) = 1 - v - psi(1-v)`.
    /// The outputs are validated (they satisfy (G1)-(G3) iff the pair
    /// satisfies (F1)-(F3)).
    pub fn to_rmm_pair(&self) -> Result<(Generator<F>, Generator<F>), GeneratorError> {
        let (f, g) = self.to_rmm_pair_unchecked();
        for (name, gen) in [("f = phi - id", &f), ("g from psi", &g)] {
            let report = gen.validate(64);
            if !report.passed() {
                return Err(GeneratorError::Invalid(format!(
                    "{name}: {}",
                    report.first_failure()
                )));
            }
        }
        Ok((f, g))
    }

    pub fn to_rmm_pair_unchecked(&self) -> (Generator<F>, Generator<F>) {
        let neg_t = Polynomial::new(vec![F::zero(), -F::one()]);
        let f_pw = self.phi.map_exprs(|e| e.add_poly(&neg_t));
        let one_minus_t = Polynomial::new(vec![F::one(), -F::one()]);
        let g_pieces = self
            .psi
            .pieces()
            .iter()
            .map(|p| {
                // on v in [1-hi, 1-lo]: g(v) = 1 - v - psi(1-v)
                let expr = p
                    .expr
                    .compose_affine(F::one(), -F::one())
                    .scale(-F::one())
                    .add_poly(&one_minus_t);
                Piece {
                    lo: F::one() - p.hi,
                    hi: F::one() - p.lo,
                    expr,
                }
            })
            .collect();
        let f = Generator {
            pw: f_pw.clone(),
            zero_limit: f_pw.first_value(),
        };
        let g_pw = Piecewise::new(g_pieces).expect("reflected pieces tile [0,1]");
        let g = Generator {
            zero_limit: g_pw.first_value(),
            pw: g_pw,
        };
        (f, g)
    }

    /// `phi(u)` with `phi(0) = 0`.
    pub fn phi(&self, u: F) -> F {
        if u <= F::zero() {
            F::zero()
        } else {
            self.phi.eval(u)
        }
    }

    /// `psi(v)` with `psi(1) = 1`.
    pub fn psi(&self, v: F) -> F {
        if v >= F::one() {
            F::one()
        } else {
            self.psi.eval(v)
        }
    }

    /// `phi*(u) = phi(u)/u`, extended at 0.
    pub fn phi_star(&self, u: F) -> ExtendedNonneg<F> {
        if u > F::zero() {
            ExtendedNonneg::Finite(self.phi(u) / u)
        } else {
            limit_ratio_at_zero(&self.phi.pieces()[0].expr)
        }
    }

    /// `psi_*(v) = (1 - psi(v)) / (v - psi(v))`, infinite where `psi(v) = v`.
    pub fn psi_star(&self, v: F) -> ExtendedNonneg<F> {
        let denom = v - self.psi(v);
        if denom.abs() <= lit(1e-14) {
            ExtendedNonneg::Infinite
        } else {
            ExtendedNonneg::Finite((F::one() - self.psi(v)) / denom)
        }
    }

    /// Validates (F1)-(F3) by checking the equivalent (G1)-(G3) conditions of
    /// the associated RMM pair, plus the endpoint normalization.
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let tol = lit::<F>(TOL);
        let phi1 = self.phi(F::one());
        if (phi1 - F::one()).abs() > tol {
            return Err(GeneratorError::Invalid(format!(
                "(F1) failed: phi(1) = {}, expected 1",
                to_f64(phi1)
            )));
        }
        let psi0 = self.psi(F::zero());
        if psi0.abs() > tol {
            return Err(GeneratorError::Invalid(format!(
                "(F1) failed: psi(0) = {}, expected 0",
                to_f64(psi0)
            )));
        }
        self.to_rmm_pair().map(|_| ())
    }
}
