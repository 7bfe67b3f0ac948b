//! Decomposition of the RMM copula measure.
//!
//! On the stand the copula has density `1 - f'(u) g'(v)`; on the zero set the
//! density vanishes; singular mass can live only on the zero-level curve
//! `v0(u)`. Along that curve the conditional distribution of `V` given `u`
//! jumps by
//!
//! `jump(u) = v0(u) - f'(u) g(v0(u))`,
//!
//! which is the atom the sampler realizes and the density the singular mass
//! profile records. Integrating the density over the stand and the jump along
//! the curve splits the unit mass exactly; the two integrals are computed
//! independently and cross-checked.
//!
//! Quadrature cells are bounded by the breakpoints of `f` (in `u`), the
//! breakpoints of `g` (in `v`), the `u`-locations where the boundary curve
//! crosses a `v`-breakpoint or leaves the square, and the curve itself;
//! each cell is handled by adaptive Gauss-Legendre panels.

use crate::copula::RmmCopula;
use crate::generator::Generator;
use crate::num::{lit, to_f64, ExtendedNonneg, Scalar};
use crate::piecewise::Side;
use crate::quad::{integrate_panel, integrate_with_cuts, QuadResult, DEFAULT_ORDER};

/// Absolute error target for the mass integrals.
pub const MASS_TOL: f64 = 1e-8;
/// Allowed discrepancy between `1 - ac_mass` and the profile integral.
pub const CONSERVATION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("quadrature did not converge: value {value}, error estimate {error_estimate}")]
    QuadratureNotConverged { value: f64, error_estimate: f64 },
    #[error(
        "singular mass {singular} disagrees with the boundary profile integral {profile_integral}"
    )]
    ProfileMismatch {
        singular: f64,
        profile_integral: f64,
    },
}

/// Splitting of the copula measure into its absolutely continuous part, the
/// singular mass on the boundary curve, and the area of the zero set.
#[derive(Clone, Debug)]
pub struct MassDecomposition<F> {
    pub ac_mass: F,
    pub singular_mass: F,
    pub zero_set_area: F,
    /// Sampled `(u, jump(u))` along the boundary curve.
    pub profile: Vec<(F, F)>,
}

/// Density value with a flag for requests exactly on a breakpoint or on the
/// boundary curve, where one-sided (right) derivatives are used.
#[derive(Clone, Copy, Debug)]
pub struct DensityPoint<F> {
    pub value: F,
    pub flagged: bool,
}

/// `1 - f'(u) g'(v)` on the stand, 0 on the open zero set.
pub fn density<F: Scalar>(c: &RmmCopula<F>, u: F, v: F) -> DensityPoint<F> {
    let eps = lit::<F>(1e-14);
    let on_breakpoint =
        |t: F, gen: &Generator<F>| gen.breakpoints().iter().any(|&b| (b - t).abs() <= eps);
    let slack = u * v - c.f().eval(u) * c.g().eval(v);
    let flagged = slack.abs() <= eps
        || on_breakpoint(u, c.f())
        || on_breakpoint(v, c.g())
        || u <= eps
        || v <= eps;
    let value = if slack >= F::zero() {
        let fd = c.f().piecewise().deriv(u.max(F::zero()), Side::Right);
        let gd = c.g().piecewise().deriv(v.max(F::zero()), Side::Right);
        F::one() - fd * gd
    } else {
        F::zero()
    };
    DensityPoint { value, flagged }
}

/// Conditional-distribution jump across the boundary curve at `u`, using the
/// average of the one-sided derivatives of `f` at its breakpoints.
fn jump_at<F: Scalar>(c: &RmmCopula<F>, u: F, v0: F) -> F {
    let f = c.f();
    let fd = if f.breakpoints().iter().any(|&b| (b - u).abs() <= lit(1e-14)) {
        let l = f.piecewise().deriv(u, Side::Left);
        let r = f.piecewise().deriv(u, Side::Right);
        (l + r) * lit(0.5)
    } else {
        f.piecewise().deriv(u, Side::Right)
    };
    v0 - fd * c.g().eval(v0)
}

/// `u`-locations that bound smooth cells of `v0(u)`: breakpoints of `f`, plus
/// the points where the curve crosses a breakpoint level of `g` or leaves the
/// open square.
fn u_cuts<F: Scalar>(c: &RmmCopula<F>) -> Vec<F> {
    let f = c.f();
    let g = c.g();
    let mut cuts = f.breakpoints();
    let mut levels: Vec<F> = Vec::new();
    for b in g.breakpoints() {
        if let ExtendedNonneg::Finite(gs) = g.star(b) {
            if gs > lit(1e-13) {
                levels.push(F::one() / gs);
            }
        }
    }
    // curve exits at v = 0 where f*(u) g*(0+) = 1
    if let ExtendedNonneg::Finite(gs0) = g.star(F::zero()) {
        if gs0 > lit(1e-13) {
            levels.push(F::one() / gs0);
        }
    }
    for target in levels {
        cuts.push(smallest_u_with_star_le(f, target));
        cuts.push(largest_u_with_star_ge(f, target));
    }
    cuts.retain(|&u| u > lit(1e-13) && u < F::one() - lit(1e-13));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= lit(1e-12));
    cuts
}

fn smallest_u_with_star_le<F: Scalar>(f: &Generator<F>, target: F) -> F {
    if f.star(F::zero()).le(ExtendedNonneg::Finite(target)) {
        return F::zero();
    }
    let (mut lo, mut hi) = (F::zero(), F::one());
    for _ in 0..100 {
        if hi - lo <= lit(1e-13) {
            break;
        }
        let mid = (lo + hi) * lit(0.5);
        if f.star_value(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn largest_u_with_star_ge<F: Scalar>(f: &Generator<F>, target: F) -> F {
    let ge = |u: F| match f.star(u) {
        ExtendedNonneg::Finite(s) => s >= target,
        ExtendedNonneg::Infinite => true,
    };
    if !ge(F::zero()) {
        return F::zero();
    }
    let (mut lo, mut hi) = (F::zero(), F::one());
    for _ in 0..100 {
        if hi - lo <= lit(1e-13) {
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

/// Integral of the density over the vertical stand section at `u`:
/// per-`v`-cell Gauss-Legendre of `1 - f'(u) g'(v)` from `v0(u)` to 1.
fn stand_section_integral<F: Scalar>(c: &RmmCopula<F>, u: F) -> F {
    let v0 = c.boundary_v(u);
    if v0 >= F::one() {
        return F::zero();
    }
    let fd = c.f().piecewise().deriv(u, Side::Right);
    let g = c.g();
    let mut nodes: Vec<F> = vec![v0, F::one()];
    nodes.extend(
        g.breakpoints()
            .into_iter()
            .filter(|&b| b > v0 && b < F::one()),
    );
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() <= lit(1e-14));
    let mut acc = F::zero();
    for w in nodes.windows(2) {
        let integrand = |v: F| F::one() - fd * g.piecewise().deriv(v, Side::Right);
        acc = acc + integrate_panel(&integrand, w[0], w[1], DEFAULT_ORDER);
    }
    acc
}

/// Mass of the absolutely continuous part, with quadrature diagnostics.
pub fn ac_mass_detailed<F: Scalar>(c: &RmmCopula<F>) -> QuadResult<F> {
    let cuts = u_cuts(c);
    let integrand = |u: F| stand_section_integral(c, u);
    integrate_with_cuts(
        &integrand,
        F::zero(),
        F::one(),
        &cuts,
        lit(MASS_TOL),
        DEFAULT_ORDER,
    )
}

/// Integral of the density over the stand; errors when the quadrature does
/// not reach its target.
pub fn ac_mass<F: Scalar>(c: &RmmCopula<F>) -> Result<F, MeasureError> {
    let r = ac_mass_detailed(c);
    if !r.converged {
        return Err(MeasureError::QuadratureNotConverged {
            value: to_f64(r.value),
            error_estimate: to_f64(r.error_estimate),
        });
    }
    Ok(r.value.max(F::zero()).min(F::one()))
}

/// Mass of the singular part, `1 - ac_mass`, cross-validated against the
/// boundary profile integral.
pub fn singular_mass<F: Scalar>(c: &RmmCopula<F>) -> Result<F, MeasureError> {
    let ac = ac_mass(c)?;
    let singular = (F::one() - ac).max(F::zero());
    let profile = profile_integral(c)?;
    if (singular - profile).abs() > lit(CONSERVATION_TOL) {
        return Err(MeasureError::ProfileMismatch {
            singular: to_f64(singular),
            profile_integral: to_f64(profile),
        });
    }
    Ok(singular)
}

/// Integral of `jump(u)` over the `u`-range where the boundary curve lies
/// strictly inside the square.
pub fn profile_integral<F: Scalar>(c: &RmmCopula<F>) -> Result<F, MeasureError> {
    profile_integral_over(c, F::zero(), F::one())
}

/// Same, restricted to `[a, b]`; used to check per-arc masses.
pub fn profile_integral_over<F: Scalar>(c: &RmmCopula<F>, a: F, b: F) -> Result<F, MeasureError> {
    let cuts = u_cuts(c);
    let integrand = |u: F| {
        let v0 = c.boundary_v(u);
        if v0 > lit(1e-12) && v0 < F::one() - lit(1e-12) {
            jump_at(c, u, v0)
        } else {
            F::zero()
        }
    };
    let r = integrate_with_cuts(&integrand, a, b, &cuts, lit(MASS_TOL), DEFAULT_ORDER);
    if !r.converged {
        return Err(MeasureError::QuadratureNotConverged {
            value: to_f64(r.value),
            error_estimate: to_f64(r.error_estimate),
        });
    }
    Ok(r.value)
}

/// Samples `(u, jump(u))` along the boundary curve on a breakpoint-aware
/// grid; empty when the curve never enters the open square.
pub fn singular_profile<F: Scalar>(c: &RmmCopula<F>, n_samples: usize) -> Vec<(F, F)> {
    let mut nodes: Vec<F> = vec![F::zero(), F::one()];
    nodes.extend(u_cuts(c));
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup_by(|a, b| (*a - *b).abs() <= lit(1e-12));
    let per = (n_samples / (nodes.len() - 1)).max(4);
    let mut out = Vec::new();
    for w in nodes.windows(2) {
        for j in 0..=per {
            let x = lit::<F>(j as f64) / lit(per as f64);
            let u = w[0] + (w[1] - w[0]) * x;
            let v0 = c.boundary_v(u);
            if v0 > lit(1e-12) && v0 < F::one() - lit(1e-12) {
                out.push((u, jump_at(c, u, v0)));
            }
        }
    }
    out.dedup_by(|a, b| (a.0 - b.0).abs() <= lit(1e-14));
    out
}

/// Area of the zero set, `integral of zero_set_v(u) du`.
pub fn zero_set_area<F: Scalar>(c: &RmmCopula<F>) -> Result<F, MeasureError> {
    let cuts = u_cuts(c);
    let integrand = |u: F| c.zero_set_v(u);
    let r = integrate_with_cuts(
        &integrand,
        F::zero(),
        F::one(),
        &cuts,
        lit(MASS_TOL),
        DEFAULT_ORDER,
    );
    if !r.converged {
        return Err(MeasureError::QuadratureNotConverged {
            value: to_f64(r.value),
            error_estimate: to_f64(r.error_estimate),
        });
    }
    Ok(r.value.max(F::zero()))
}

/// Full decomposition: density mass, singular mass with its profile, and the
/// zero-set area.
pub fn mass_decomposition<F: Scalar>(
    c: &RmmCopula<F>,
    profile_samples: usize,
) -> Result<MassDecomposition<F>, MeasureError> {
    let ac = ac_mass(c)?;
    let singular = singular_mass(c)?;
    let area = zero_set_area(c)?;
    Ok(MassDecomposition {
        ac_mass: ac,
        singular_mass: singular,
        zero_set_area: area,
        profile: singular_profile(c, profile_samples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::rectangle_volume;
    use crate::generator::Generator;
    use crate::quad::integrate_adaptive;

    fn sym(pieces: &[(f64, f64, &[f64])]) -> RmmCopula<f64> {
        RmmCopula::new_symmetric(Generator::from_poly_pieces(pieces).unwrap()).unwrap()
    }

    fn w() -> RmmCopula<f64> {
        sym(&[(0.0, 1.0, &[1.0, -1.0])])
    }

    fn pi() -> RmmCopula<f64> {
        RmmCopula::new_symmetric(Generator::zero()).unwrap()
    }

    fn ex3b(d: f64) -> RmmCopula<f64> {
        sym(&[
            (0.0, d, &[d]),
            (d, 0.5, &[0.0, 1.0]),
            (0.5, 1.0, &[1.0, -1.0]),
        ])
    }

    fn ex3c(mu: f64) -> RmmCopula<f64> {
        let f = Generator::from_poly_pieces(&[(0.0, 1.0, &[0.0, 1.0, -1.0])]).unwrap();
        let g = if mu < 1.0 {
            Generator::from_poly_pieces(&[(0.0, mu, &[mu, -1.0]), (mu, 1.0, &[0.0])]).unwrap()
        } else {
            Generator::from_poly_pieces(&[(0.0, 1.0, &[1.0, -1.0])]).unwrap()
        };
        RmmCopula::new(f, g).unwrap()
    }

    fn ex3a(theta: f64, eta: f64) -> RmmCopula<f64> {
        let mk = |p: f64| {
            Generator::from_poly_pieces(&[(0.0, p, &[0.0, 1.0 / p - 1.0]), (p, 1.0, &[1.0, -1.0])])
                .unwrap()
        };
        RmmCopula::new(mk(theta), mk(eta)).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&pi(), 0.37, 0.66).value, 1.0);
        // EFGM a=0.5: density 1 - a^2 (1-2u)(1-2v); equals 0.75 at the origin
        let a = 0.5;
        let efgm = sym(&[(0.0, 1.0, &[0.0, a, -a])]);
        let d = density(&efgm, 1e-9, 1e-9);
        assert!((d.value - 0.75).abs() < 1e-7);
        for (u, v) in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            let want = 1.0 - a * a * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
            assert!((density(&efgm, u, v).value - want).abs() < 1e-12);
        }
        // W has no absolutely continuous part on its stand
        let d = density(&w(), 0.7, 0.8);
        assert_eq!(d.value, 0.0);
        // zero set interior
        assert_eq!(density(&w(), 0.3, 0.3).value, 0.0);
    }

    #[test]
    fn density_flags_kinks() {
        let c = ex3b(1.0 / 3.0);
        assert!(density(&c, 1.0 / 3.0, 0.7).flagged);
        assert!(!density(&c, 0.4, 0.7).flagged);
    }

    #[test]
    fn ac_mass_closed_forms() {
        // two fully continuous families
        let c31: RmmCopula<f64> = {
            let f =
                Generator::from_poly_pieces(&[(0.0, 0.5, &[0.0, 0.4]), (0.5, 1.0, &[0.4, -0.4])])
                    .unwrap();
            let g = Generator::from_poly_pieces(&[(0.0, 1.0, &[0.0, 0.6, -0.6])]).unwrap();
            RmmCopula::new(f, g).unwrap()
        };
        assert!((ac_mass(&c31).unwrap() - 1.0).abs() < 1e-6);

        // min(theta + eta, 1)
        assert!((ac_mass(&ex3a(1.0 / 3.0, 1.0 / 3.0)).unwrap() - 2.0 / 3.0).abs() < 1e-6);
        assert!((ac_mass(&ex3a(1.0 / 3.0, 2.0 / 3.0)).unwrap() - 1.0).abs() < 1e-6);

        // 1 - 2 d ln 2
        let d = 1.0 / 3.0;
        let want = 1.0 - 2.0 * d * std::f64::consts::LN_2;
        assert!((ac_mass(&ex3b(d)).unwrap() - want).abs() < 1e-6);

        // 1 - mu (ln 4 - 1)
        for mu in [0.5, 1.0] {
            let want = 1.0 - mu * (4.0f64.ln() - 1.0);
            assert!((ac_mass(&ex3c(mu)).unwrap() - want).abs() < 1e-6);
        }

        assert!((ac_mass(&w()).unwrap()).abs() < 1e-6);
        assert!((ac_mass(&pi()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_profile_matches_analytic_jumps() {
        // jump(u) = d/u on the right arc of the three-piece family
        let d = 1.0 / 3.0;
        let c = ex3b(d);
        for (u, j) in singular_profile(&c, 400) {
            if u > 0.5 + 1e-9 {
                assert!((j - d / u).abs() < 1e-9, "jump({u}) = {j}");
            }
            assert!(j >= -1e-12);
        }
        // uniform atom of size 1 along the middle segment
        let c = ex3a(1.0 / 3.0, 1.0 / 3.0);
        for (u, j) in singular_profile(&c, 400) {
            if u > 1.0 / 3.0 + 1e-6 && u < 2.0 / 3.0 - 1e-6 {
                assert!((j - 1.0).abs() < 1e-9);
            }
        }
        assert!(singular_profile(&pi(), 100).is_empty());
    }

    #[test]
    fn arc_masses() {
        let d = 1.0 / 3.0;
        let c = ex3b(d);
        let right = profile_integral_over(&c, 0.5, 1.0).unwrap();
        let left = profile_integral_over(&c, 0.0, d + 1e-12).unwrap();
        let arc = d * std::f64::consts::LN_2;
        assert!((right - arc).abs() < 1e-6);
        assert!((left - arc).abs() < 1e-6);
    }

    #[test]
    fn decomposition_table() {
        let dec = mass_decomposition(&w(), 100).unwrap();
        assert!(dec.ac_mass.abs() < 1e-6);
        assert!((dec.singular_mass - 1.0).abs() < 1e-6);
        assert!((dec.zero_set_area - 0.5).abs() < 1e-6);

        let dec = mass_decomposition(&pi(), 100).unwrap();
        assert!((dec.ac_mass - 1.0).abs() < 1e-9);
        assert!(dec.singular_mass.abs() < 1e-9);
        assert!(dec.zero_set_area.abs() < 1e-9);
        assert!(dec.profile.is_empty());

        // theta + eta = 1: absolutely continuous, yet the zero set has area
        let dec = mass_decomposition(&ex3a(1.0 / 3.0, 2.0 / 3.0), 100).unwrap();
        assert!((dec.ac_mass - 1.0).abs() < 1e-6);
        assert!(dec.singular_mass.abs() < 1e-6);
        assert!((dec.zero_set_area - 2.0 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn density_integrates_to_rectangle_volume_inside_stand() {
        let c = ex3c(1.0);
        // rectangles strictly inside the stand
        for (u1, u2, v1, v2) in [
            (0.55, 0.8, 0.35, 0.6),
            (0.6, 0.95, 0.5, 0.9),
            (0.3, 0.5, 0.5, 0.7),
        ] {
            let inner = |u: f64| {
                integrate_adaptive(&|v: f64| density(&c, u, v).value, v1, v2, 1e-10, 32).value
            };
            let mass = integrate_adaptive(&inner, u1, u2, 1e-9, 32);
            let vol = rectangle_volume(&c, u1, u2, v1, v2);
            assert!(
                (mass.value - vol).abs() < 1e-7,
                "({u1},{u2})x({v1},{v2}): {} vs {vol}",
                mass.value
            );
        }
        // rectangles inside the open zero set carry no mass
        assert_eq!(rectangle_volume(&c, 0.05, 0.2, 0.05, 0.2), 0.0);
    }
}
