//! Generator recovery from copula values.
//!
//! For an NQD copula the independence gap `Delta(u, v) = uv - C(u, v)` is
//! nonnegative, and on the stand of an RMM copula it equals `f(u) g(v)`, so
//! the two-point quotient `Q(u1, v1; u2, v2) = Delta(u1, v1)/Delta(u2, v2)`
//! cancels the second generator whenever both points share `v` and sit on
//! the stand. Anchoring at `u_min` (the largest `t` with `C(t, t) = 0`,
//! where `f(u_min) = u_min` for a symmetric copula) gives the closed form
//!
//! `f(u) = u_min * Q(u, v; u_min, v)`,
//!
//! for any admissible `v`: both scanned points must carry positive copula
//! mass (so the stand identity applies) and the denominator gap must clear a
//! noise threshold. When `u_min = 0` the anchor degenerates; a scale-fixed
//! variant anchors instead at the diagonal argmax of the gap and pins the
//! symmetric scale through `f(u_ref) = sqrt(Delta(u_ref, u_ref))`.
//!
//! All of this consumes only the [`CopulaEvaluator`] abstraction, so
//! analytic copulas, assembled closed forms, and rank-based empirical
//! copulas interchange.

use crate::copula::CopulaEvaluator;
use crate::num::{lit, to_f64, Scalar};

/// Denominator guard for quotients of an analytic evaluator.
pub const ANALYTIC_THRESHOLD: f64 = 1e-9;
/// Points in the admissible-`v` scan (endpoints of `(0,1)` excluded).
pub const V_SCAN_POINTS: usize = 101;

#[derive(Clone, Debug, thiserror::Error)]
pub enum InferenceError {
    #[error(
        "quotient undefined: denominator gap {denom:.3e} at or below threshold {threshold:.3e}"
    )]
    QuotientUndefined { denom: f64, threshold: f64 },
    #[error("anchor undefined: u_min = {u_min:.3e}; the diagonal never vanishes, use the scale-fixed recovery")]
    AnchorUndefined { u_min: f64 },
    #[error("no admissible scan point for the anchor")]
    AnchorNotUsable,
    #[error("empty sample")]
    EmptySample,
}

/// Independence gap `uv - C(u, v)`, clamped at zero. RMM copulas are NQD, so
/// a materially negative raw gap flags an inadmissible input; see
/// [`nqd_violation`].
pub fn delta_c<F: Scalar>(ev: &impl CopulaEvaluator<F>, u: F, v: F) -> F {
    delta_c_raw(ev, u, v).max(F::zero())
}

/// The gap without clamping.
pub fn delta_c_raw<F: Scalar>(ev: &impl CopulaEvaluator<F>, u: F, v: F) -> F {
    u * v - ev.cdf(u, v)
}

/// Worst positive-quadrant violation `max(C - Pi, 0)` on a grid; zero for
/// genuinely NQD inputs up to evaluator noise.
pub fn nqd_violation<F: Scalar>(ev: &impl CopulaEvaluator<F>, grid_n: usize) -> F {
    let n = grid_n.max(2);
    let mut worst = F::zero();
    for i in 0..=n {
        for j in 0..=n {
            let u = lit::<F>(i as f64) / lit(n as f64);
            let v = lit::<F>(j as f64) / lit(n as f64);
            worst = worst.max(-delta_c_raw(ev, u, v));
        }
    }
    worst
}

/// Two-point quotient of gaps, defined only when the denominator clears the
/// threshold.
pub fn q_c<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    p1: (F, F),
    p2: (F, F),
    denom_threshold: F,
) -> Result<F, InferenceError> {
    let denom = delta_c(ev, p2.0, p2.1);
    if denom <= denom_threshold {
        return Err(InferenceError::QuotientUndefined {
            denom: to_f64(denom),
            threshold: to_f64(denom_threshold),
        });
    }
    Ok(delta_c(ev, p1.0, p1.1) / denom)
}

/// Largest `t` with `C(t, t) = 0`, located by bisection on the diagonal;
/// 0 when the diagonal is positive throughout. For a symmetric RMM copula
/// this is the recovery anchor: `f(u_min) = u_min`.
pub fn find_u_min<F: Scalar>(ev: &impl CopulaEvaluator<F>) -> F {
    if ev.cdf(F::one(), F::one()) <= F::zero() {
        return F::zero();
    }
    let (mut lo, mut hi) = (F::zero(), F::one());
    for _ in 0..80 {
        if hi - lo <= lit(1e-11) {
            break;
        }
        let mid = (lo + hi) * lit(0.5);
        if ev.cdf(mid, mid) <= F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo < lit(1e-9) {
        F::zero()
    } else {
        lo
    }
}

/// One recovered sample of the generator.
#[derive(Clone, Copy, Debug)]
pub struct RecoveredPoint<F> {
    pub u: F,
    pub f_u: F,
    pub valid: bool,
}

/// How the recovery fixed the generator's scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorKind {
    /// Anchored at `u_min` where `f(u_min) = u_min`; the recovered values
    /// are absolute.
    UMin,
    /// `u_min = 0`: anchored at the diagonal argmax of the gap with the
    /// symmetric scale `f(u_ref) = sqrt(Delta(u_ref, u_ref))`.
    ScaleReference,
}

/// Pointwise recovered generator with its anchor and diagnostics.
#[derive(Clone, Debug)]
pub struct RecoveredGenerator<F> {
    pub anchor: F,
    pub anchor_kind: AnchorKind,
    pub u_min: F,
    pub points: Vec<RecoveredPoint<F>>,
}

impl<F: Scalar> RecoveredGenerator<F> {
    /// Recovered value at the grid point nearest to `u`, when valid.
    pub fn value_near(&self, u: F) -> Option<F> {
        self.points
            .iter()
            .filter(|p| p.valid)
            .min_by(|a, b| (a.u - u).abs().partial_cmp(&(b.u - u).abs()).unwrap())
            .map(|p| p.f_u)
    }
}

/// Scans the interior `v` grid for the point maximizing the smaller of the
/// two gaps, subject to both scan points carrying positive copula mass and
/// the anchored gap clearing the threshold. Returns `(v, gap_u, gap_anchor)`.
fn scan_v<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    u: F,
    anchor: F,
    threshold: F,
) -> Option<(F, F, F)> {
    let m = V_SCAN_POINTS;
    let mut best: Option<(F, F, F, F)> = None; // (score, v, d1, d2)
    for j in 1..=m {
        let v = lit::<F>(j as f64) / lit((m + 1) as f64);
        let d2 = delta_c(ev, anchor, v);
        if d2 <= threshold {
            continue;
        }
        if ev.cdf(anchor, v) <= F::zero() || ev.cdf(u, v) <= F::zero() {
            continue;
        }
        let d1 = delta_c(ev, u, v);
        let score = d1.min(d2);
        let better = match &best {
            None => true,
            Some((s, _, _, _)) => score > *s,
        };
        if better {
            best = Some((score, v, d1, d2));
        }
    }
    best.map(|(_, v, d1, d2)| (v, d1, d2))
}

/// Recovers `f` on the given grid from an (approximately) symmetric RMM
/// evaluator with `u_min > 0`. Grid points with no admissible scan `v` are
/// reported invalid rather than extrapolated.
pub fn recover_generator<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    grid: &[F],
    threshold: F,
) -> Result<RecoveredGenerator<F>, InferenceError> {
    let u_min = find_u_min(ev);
    if is_product_like(ev, threshold) {
        return Ok(RecoveredGenerator {
            anchor: u_min,
            anchor_kind: AnchorKind::UMin,
            u_min,
            points: grid
                .iter()
                .map(|&u| RecoveredPoint {
                    u,
                    f_u: F::zero(),
                    valid: true,
                })
                .collect(),
        });
    }
    if u_min <= F::zero() {
        return Err(InferenceError::AnchorUndefined {
            u_min: to_f64(u_min),
        });
    }
    let points = grid
        .iter()
        .map(|&u| match scan_v(ev, u, u_min, threshold) {
            Some((_, d1, d2)) => RecoveredPoint {
                u,
                f_u: u_min * d1 / d2,
                valid: true,
            },
            None => RecoveredPoint {
                u,
                f_u: F::nan(),
                valid: false,
            },
        })
        .collect();
    Ok(RecoveredGenerator {
        anchor: u_min,
        anchor_kind: AnchorKind::UMin,
        u_min,
        points,
    })
}

/// Scale-fixed recovery for copulas whose diagonal never vanishes
/// (`u_min = 0`): anchors at the diagonal argmax of the gap and fixes the
/// symmetric scale via `f(u_ref) = sqrt(Delta(u_ref, u_ref))`.
pub fn recover_generator_scaled<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    grid: &[F],
    threshold: F,
) -> Result<RecoveredGenerator<F>, InferenceError> {
    let u_min = find_u_min(ev);
    if is_product_like(ev, threshold) {
        return Ok(RecoveredGenerator {
            anchor: F::zero(),
            anchor_kind: AnchorKind::ScaleReference,
            u_min,
            points: grid
                .iter()
                .map(|&u| RecoveredPoint {
                    u,
                    f_u: F::zero(),
                    valid: true,
                })
                .collect(),
        });
    }
    // diagonal argmax of the gap among on-stand points
    let mut u_ref = F::zero();
    let mut best = F::zero();
    for k in 1..400 {
        let t = lit::<F>(k as f64) / lit(400.0);
        if ev.cdf(t, t) <= F::zero() {
            continue;
        }
        let d = delta_c(ev, t, t);
        if d > best {
            best = d;
            u_ref = t;
        }
    }
    if best <= threshold {
        return Err(InferenceError::AnchorNotUsable);
    }
    let f_ref = best.sqrt();
    let points = grid
        .iter()
        .map(|&u| match scan_v(ev, u, u_ref, threshold) {
            Some((_, d1, d2)) => RecoveredPoint {
                u,
                f_u: f_ref * d1 / d2,
                valid: true,
            },
            None => RecoveredPoint {
                u,
                f_u: F::nan(),
                valid: false,
            },
        })
        .collect();
    Ok(RecoveredGenerator {
        anchor: u_ref,
        anchor_kind: AnchorKind::ScaleReference,
        u_min,
        points,
    })
}

fn is_product_like<F: Scalar>(ev: &impl CopulaEvaluator<F>, threshold: F) -> bool {
    let floor = threshold.max(lit(1e-12));
    for i in 1..20 {
        for j in 1..20 {
            let u = lit::<F>(i as f64) / lit(20.0);
            let v = lit::<F>(j as f64) / lit(20.0);
            if delta_c(ev, u, v) > floor {
                return false;
            }
        }
    }
    true
}

/// The anchored generator factor at `x` for a specific scan point `w`;
/// `None` when `w` is not admissible. Used to check that the assembled
/// closed form does not depend on the scan choice.
pub fn anchored_factor_at<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    anchor: F,
    x: F,
    w: F,
    threshold: F,
) -> Option<F> {
    let d2 = delta_c(ev, anchor, w);
    if d2 <= threshold || ev.cdf(anchor, w) <= F::zero() || ev.cdf(x, w) <= F::zero() {
        return None;
    }
    Some(anchor * delta_c(ev, x, w) / d2)
}

/// Saturation value for grid points where no scan point is admissible: it
/// forces the zero branch of the assembled formula without disturbing the
/// margins (the opposite factor vanishes there).
const FACTOR_SATURATION: f64 = 1e12;

fn assembled_factor<F: Scalar>(
    ev: &impl CopulaEvaluator<F>,
    anchor: F,
    is_product: bool,
    x: F,
    threshold: F,
) -> F {
    if is_product {
        return F::zero();
    }
    if x <= F::zero() {
        // f(0) = 0 by the generator convention
        return F::zero();
    }
    match scan_v(ev, x, anchor, threshold) {
        Some((_, d1, d2)) => anchor * d1 / d2,
        None => lit(FACTOR_SATURATION),
    }
}

/// RMM copula assembled from the generators of two symmetric factors:
/// `C(u,v) = max(0, uv - [u_min Q_1(u,w;u_min,w)] [v_min Q_2(v,w';v_min,w')])`.
pub struct AssembledRmm<F, E1, E2> {
    c1: E1,
    c2: E2,
    u_min: F,
    v_min: F,
    pi1: bool,
    pi2: bool,
    threshold: F,
}

impl<F: Scalar, E1: CopulaEvaluator<F>, E2: CopulaEvaluator<F>> AssembledRmm<F, E1, E2> {
    pub fn u_min(&self) -> F {
        self.u_min
    }

    pub fn v_min(&self) -> F {
        self.v_min
    }

    /// First-factor generator value at `u` (the second is symmetric).
    pub fn factor1(&self, u: F) -> F {
        assembled_factor(&self.c1, self.u_min, self.pi1, u, self.threshold)
    }

    pub fn factor2(&self, v: F) -> F {
        assembled_factor(&self.c2, self.v_min, self.pi2, v, self.threshold)
    }
}

impl<F: Scalar, E1: CopulaEvaluator<F>, E2: CopulaEvaluator<F>> CopulaEvaluator<F>
    for AssembledRmm<F, E1, E2>
{
    fn cdf(&self, u: F, v: F) -> F {
        (u * v - self.factor1(u) * self.factor2(v)).max(F::zero())
    }
}

/// Builds the closed-form RMM copula from two symmetric factor evaluators.
/// Each factor must either be product-like or admit a positive anchor.
pub fn assemble_rmm_from_two_srmm<F: Scalar, E1, E2>(
    c1: E1,
    c2: E2,
    threshold: F,
) -> Result<AssembledRmm<F, E1, E2>, InferenceError>
where
    E1: CopulaEvaluator<F>,
    E2: CopulaEvaluator<F>,
{
    let pi1 = is_product_like(&c1, threshold);
    let pi2 = is_product_like(&c2, threshold);
    let u_min = find_u_min(&c1);
    let v_min = find_u_min(&c2);
    if !pi1 && u_min <= F::zero() {
        return Err(InferenceError::AnchorUndefined {
            u_min: to_f64(u_min),
        });
    }
    if !pi2 && v_min <= F::zero() {
        return Err(InferenceError::AnchorUndefined {
            u_min: to_f64(v_min),
        });
    }
    Ok(AssembledRmm {
        c1,
        c2,
        u_min,
        v_min,
        pi1,
        pi2,
        threshold,
    })
}

/// Maxmin copula assembled from two symmetric RMM factors, i.e. the
/// reflection `u - C_rmm(u, 1 - v)` of the assembled RMM closed form.
pub struct AssembledMaxmin<F, E1, E2> {
    inner: AssembledRmm<F, E1, E2>,
}

impl<F: Scalar, E1: CopulaEvaluator<F>, E2: CopulaEvaluator<F>> AssembledMaxmin<F, E1, E2> {
    /// The reflection of the second factor's anchor: `v_max = 1 - v_min`.
    pub fn v_max(&self) -> F {
        F::one() - self.inner.v_min
    }
}

impl<F: Scalar, E1: CopulaEvaluator<F>, E2: CopulaEvaluator<F>> CopulaEvaluator<F>
    for AssembledMaxmin<F, E1, E2>
{
    fn cdf(&self, u: F, v: F) -> F {
        u - self.inner.cdf(u, F::one() - v)
    }
}

pub fn maxmin_closed_form<F: Scalar, E1, E2>(
    c1: E1,
    c2: E2,
    threshold: F,
) -> Result<AssembledMaxmin<F, E1, E2>, InferenceError>
where
    E1: CopulaEvaluator<F>,
    E2: CopulaEvaluator<F>,
{
    Ok(AssembledMaxmin {
        inner: assemble_rmm_from_two_srmm(c1, c2, threshold)?,
    })
}

/// Rank-based empirical copula over `n` observed pairs:
/// `C_n(u, v) = #{i : U_i <= u, V_i <= v} / n` with ranks scaled by `n + 1`.
///
/// Queries run in `O(log^2 n)` through a static merge tree over the rank
/// permutation.
#[derive(Clone, Debug)]
pub struct EmpiricalCopula<F> {
    n: usize,
    /// Segment tree over `u`-rank order; node i covers a range of `u`-ranks
    /// and stores its sorted `v`-ranks.
    tree: Vec<Vec<u32>>,
    _marker: std::marker::PhantomData<F>,
}

impl<F: Scalar> EmpiricalCopula<F> {
    pub fn from_pairs(pairs: &[(F, F)]) -> Result<Self, InferenceError> {
        if pairs.is_empty() {
            return Err(InferenceError::EmptySample);
        }
        let n = pairs.len();
        let rank = |key: fn(&(F, F)) -> F| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| {
                key(&pairs[a])
                    .partial_cmp(&key(&pairs[b]))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut r = vec![0u32; n];
            for (pos, &i) in idx.iter().enumerate() {
                r[i] = (pos + 1) as u32;
            }
            r
        };
        let ur = rank(|p| p.0);
        let vr = rank(|p| p.1);
        let mut perm = vec![0u32; n];
        for i in 0..n {
            perm[(ur[i] - 1) as usize] = vr[i];
        }
        let mut tree = vec![Vec::new(); 2 * n.next_power_of_two()];
        build_tree(&mut tree, 1, 0, n, &perm);
        Ok(EmpiricalCopula {
            n,
            tree,
            _marker: std::marker::PhantomData,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Recommended denominator threshold for quotients of this evaluator.
    pub fn quotient_threshold(&self) -> F {
        lit::<F>(10.0) / lit(self.n as f64)
    }

    fn count_leq(&self, u_prefix: usize, v_rank: u32) -> usize {
        // count of perm[0..u_prefix] <= v_rank via the segment tree
        fn go(
            tree: &[Vec<u32>],
            node: usize,
            lo: usize,
            hi: usize,
            prefix: usize,
            v: u32,
        ) -> usize {
            if prefix <= lo || tree[node].is_empty() {
                return 0;
            }
            if hi <= prefix {
                return tree[node].partition_point(|&x| x <= v);
            }
            let mid = (lo + hi) / 2;
            go(tree, 2 * node, lo, mid, prefix, v) + go(tree, 2 * node + 1, mid, hi, prefix, v)
        }
        go(&self.tree, 1, 0, self.n, u_prefix, v_rank)
    }
}

fn build_tree(tree: &mut Vec<Vec<u32>>, node: usize, lo: usize, hi: usize, perm: &[u32]) {
    if hi <= lo {
        return;
    }
    let mut vals = perm[lo..hi].to_vec();
    vals.sort_unstable();
    tree[node] = vals;
    if hi - lo > 1 {
        let mid = (lo + hi) / 2;
        build_tree(tree, 2 * node, lo, mid, perm);
        build_tree(tree, 2 * node + 1, mid, hi, perm);
    }
}

impl<F: Scalar> CopulaEvaluator<F> for EmpiricalCopula<F> {
    fn cdf(&self, u: F, v: F) -> F {
        if u <= F::zero() || v <= F::zero() {
            return F::zero();
        }
        let np1 = (self.n + 1) as f64;
        let ku = ((to_f64(u) * np1).floor() as usize).min(self.n);
        let kv = ((to_f64(v) * np1).floor() as u32).min(self.n as u32);
        if ku == 0 || kv == 0 {
            return F::zero();
        }
        lit::<F>(self.count_leq(ku, kv) as f64) / lit(self.n as f64)
    }
}

/// Evenly spaced recovery grid `{k/n : k = 1..n}`.
pub fn uniform_grid<F: Scalar>(n: usize) -> Vec<F> {
    (1..=n)
        .map(|k| lit::<F>(k as f64) / lit(n as f64))
        .collect()
}
