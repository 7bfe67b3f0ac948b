//! Cross-module invariants: monotone transforms of validated generators,
//! the starred evaluation identity, conditional-derivative bounds, density
//! consistency inside the stand, diagonal transforms, and recovery fixpoints.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use rmm_copulas::copula::rectangle_volume;
use rmm_copulas::diagonal::diagonal_of;
use rmm_copulas::inference::{find_u_min, recover_generator, uniform_grid, EmpiricalCopula};
use rmm_copulas::measure::{density, singular_profile};
use rmm_copulas::presets;
use rmm_copulas::quad::integrate_adaptive;
use rmm_copulas::sampler::sample_rmm;
use rmm_copulas::{RmmCopula, Side};

fn preset(key: &str) -> RmmCopula {
    presets::rmm::<f64>(key).expect(key)
}

fn any_preset() -> impl Strategy<Value = &'static str> {
    proptest::sample::select(presets::standard_keys())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // f(t)/t nonincreasing and t + f(t) nondecreasing on random pairs
    #[test]
    fn starred_and_hat_transforms_are_monotone(
        key in any_preset(),
        a in 1e-6..1.0f64,
        b in 1e-6..1.0f64,
    ) {
        let c = preset(key);
        let (s, t) = (a.min(b), a.max(b));
        prop_assume!(s < t);
        for g in [c.f(), c.g()] {
            prop_assert!(g.eval(t) / t <= g.eval(s) / s + 1e-12);
            prop_assert!(s + g.eval(s) <= t + g.eval(t) + 1e-12);
        }
    }

    // the two published forms of the copula agree
    #[test]
    fn starred_evaluation_identity(
        key in any_preset(),
        u in 0.0..=1.0f64,
        v in 0.0..=1.0f64,
    ) {
        let c = preset(key);
        prop_assert!((c.cdf(u, v) - c.cdf_starred(u, v)).abs() <= 1e-12);
    }

    // dC/du is a sub-distribution function bounded by the opposite hat
    #[test]
    fn partial_derivative_bounds(
        key in any_preset(),
        u in 1e-3..0.999f64,
        v in 0.0..=1.0f64,
    ) {
        let c = preset(key);
        prop_assume!(!c.f().breakpoints().iter().any(|&b| (b - u).abs() < 1e-9));
        let d = c.partial_u(u, v, Side::Right).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&d));
        prop_assert!(d <= c.g().hat(v) + 1e-12);
    }

    // rectangles inside the open zero set carry no mass at all
    #[test]
    fn zero_set_rectangles_are_massless(
        key in proptest::sample::select(vec!["w", "ex3a:theta=1/3,eta=1/3", "ex3b:delta=1/3", "ex3c:mu=1"]),
        u1 in 0.01..0.9f64,
        du in 0.01..0.2f64,
        v1 in 0.01..0.9f64,
        dv in 0.01..0.2f64,
    ) {
        let c = preset(key);
        let (u2, v2) = ((u1 + du).min(0.999), (v1 + dv).min(0.999));
        // inside the zero set iff the upper-right corner is below the curve
        prop_assume!(v2 < c.boundary_v(u2) - 1e-9);
        prop_assert_eq!(rectangle_volume(&c, u1, u2, v1, v2), 0.0);
    }

    // delta#(t) = delta(t)/t^2 never decreases for any preset diagonal
    #[test]
    fn diagonal_sharp_monotone(key in any_preset()) {
        let d = diagonal_of(&preset(key), true).unwrap();
        let mut prev = 0.0f64;
        for k in 1..=1000 {
            let t = k as f64 / 1000.0;
            let s = d.sharp(t);
            prop_assert!(s >= prev - 1e-12, "{key}: delta# dips at t={t}");
            prev = s;
        }
    }
}

#[test]
fn derivatives_bounded_below_on_grid() {
    for key in presets::standard_keys() {
        let c = preset(key);
        for g in [c.f(), c.g()] {
            'point: for k in 1..1000 {
                let t = k as f64 / 1000.0;
                for b in g.breakpoints() {
                    if (b - t).abs() < 1e-9 {
                        continue 'point;
                    }
                }
                let d = g.derivative(t, Side::Right).unwrap();
                assert!(d >= -1.0 - 1e-9, "{key}: f'({t}) = {d}");
            }
        }
    }
}

#[test]
fn maxmin_generators_of_presets_validate() {
    for key in presets::standard_keys() {
        let c = preset(key);
        c.reflect()
            .generators()
            .validate()
            .unwrap_or_else(|e| panic!("{key}: {e}"));
    }
}

#[test]
fn hat_transform_of_symmetric_diagonals_is_monotone() {
    for key in presets::symmetric_keys() {
        let d = diagonal_of(&preset(key), true).unwrap();
        let mut prev = 0.0f64;
        for k in 0..=1000 {
            let t = k as f64 / 1000.0;
            let h = d.hat(t);
            assert!(h >= prev - 1e-12, "{key}: delta-hat dips at t={t}");
            prev = h;
        }
        assert!(d.check_d_hat(101).member, "{key}");
    }
    // regression pin: the asymmetric pair's diagonal is not in the class
    let d = diagonal_of(&preset("ex5asym"), true).unwrap();
    assert!(!d.check_d_hat(101).hat_nondecreasing.passed);
}

#[test]
fn sharp_hat_link_identity() {
    for key in presets::standard_keys() {
        let d = diagonal_of(&preset(key), true).unwrap();
        for k in 1..=500 {
            let t = k as f64 / 500.0;
            let lhs = d.sharp(t);
            let rhs = 1.0 - (d.hat(t) / t - 1.0).powi(2);
            assert!((lhs - rhs).abs() <= 1e-12, "{key} at t={t}");
            let hat = t * (1.0 + (1.0 - lhs).max(0.0).sqrt());
            assert!((d.hat(t) - hat).abs() <= 1e-12, "{key} at t={t}");
        }
    }
}

#[test]
fn density_matches_mass_inside_stand() {
    let mut rng = ChaCha12Rng::seed_from_u64(404);
    for key in ["ex3c:mu=1", "ex3b:delta=1/3", "efgm:a=0.5"] {
        let c = preset(key);
        let mut done = 0;
        while done < 100 {
            let u1 = rng.gen::<f64>() * 0.9 + 0.05;
            let v1 = rng.gen::<f64>() * 0.9 + 0.05;
            let u2 = (u1 + rng.gen::<f64>() * 0.2).min(0.98);
            let v2 = (v1 + rng.gen::<f64>() * 0.2).min(0.98);
            if u2 - u1 < 1e-3 || v2 - v1 < 1e-3 {
                continue;
            }
            // fully inside the open stand: the lower-left corner must sit
            // strictly above the boundary curve
            if v1 <= c.boundary_v(u1) + 1e-6 {
                continue;
            }
            let inner = |u: f64| {
                integrate_adaptive(&|v: f64| density(&c, u, v).value, v1, v2, 1e-10, 32).value
            };
            let mass = integrate_adaptive(&inner, u1, u2, 1e-9, 32).value;
            let vol = rectangle_volume(&c, u1, u2, v1, v2);
            assert!(
                (mass - vol).abs() <= 1e-7,
                "{key} on ({u1},{u2})x({v1},{v2}): {mass} vs {vol}"
            );
            done += 1;
        }
    }
}

#[test]
fn profile_jumps_are_nonnegative_everywhere() {
    for key in presets::standard_keys() {
        let c = preset(key);
        for (u, j) in singular_profile(&c, 512) {
            assert!(j >= -1e-12, "{key}: jump({u}) = {j}");
        }
    }
}

#[test]
fn recovery_fixpoint_for_anchored_symmetric_presets() {
    for key in ["w", "tent", "ex3b:delta=1/3", "fig2-3"] {
        let c = preset(key);
        if find_u_min(&c) <= 0.0 {
            continue;
        }
        let grid = uniform_grid::<f64>(60);
        let rec = recover_generator(&c, &grid, 1e-9).unwrap();
        for (i, pi) in rec.points.iter().enumerate() {
            for pj in rec.points.iter().skip(i) {
                if !(pi.valid && pj.valid) {
                    continue;
                }
                let rebuilt = (pi.u * pj.u - pi.f_u * pj.f_u).max(0.0);
                let direct = c.cdf(pi.u, pj.u);
                if direct > 1e-9 {
                    assert!(
                        (rebuilt - direct).abs() <= 1e-7,
                        "{key} at ({}, {}): {rebuilt} vs {direct}",
                        pi.u,
                        pj.u
                    );
                }
            }
        }
    }
}

#[test]
fn empirical_recovery_improves_with_sample_size() {
    let c = preset("tent");
    let truth = |u: f64| u.min(1.0 - u);
    let mut errs = Vec::new();
    for n in [10_000usize, 1_000_000] {
        let s = sample_rmm(&c, n, 555, "tent");
        let emp = EmpiricalCopula::from_pairs(&s.pairs()).unwrap();
        let rec = recover_generator(&emp, &uniform_grid(40), emp.quotient_threshold()).unwrap();
        let mut err: f64 = 0.0;
        for p in rec.points.iter().filter(|p| p.u >= 0.55 && p.u <= 0.95) {
            if p.valid {
                err = err.max((p.f_u - truth(p.u)).abs());
            }
        }
        errs.push(err);
    }
    assert!(
        errs[1] <= errs[0],
        "recovery error did not improve: {errs:?}"
    );
}

#[test]
fn sample_bytes_are_deterministic() {
    let c = preset("ex3c:mu=1");
    let a = rmm_copulas::io::sample_to_csv(&sample_rmm(&c, 5_000, 99, "ex3c:mu=1"));
    let b = rmm_copulas::io::sample_to_csv(&sample_rmm(&c, 5_000, 99, "ex3c:mu=1"));
    assert_eq!(a, b);
}

#[test]
fn f32_instantiation_tracks_f64() {
    let c64 = presets::rmm::<f64>("efgm:a=0.5").unwrap();
    let c32 = presets::rmm::<f32>("efgm:a=0.5").unwrap();
    for i in 0..=10 {
        for j in 0..=10 {
            let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
            let d = (c64.cdf(u, v) - c32.cdf(u as f32, v as f32) as f64).abs();
            assert!(d <= 1e-5, "({u},{v}): {d}");
        }
    }
}
