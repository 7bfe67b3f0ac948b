//! Small goodness-of-fit statistics used to validate sampler output.

use crate::num::{lit, Scalar};

/// Kolmogorov-Smirnov statistic of a sorted sample against the uniform law
/// on `[0, 1]`.
pub fn ks_uniform<F: Scalar>(sorted: &[F]) -> F {
    let n = sorted.len();
    if n == 0 {
        return F::zero();
    }
    let nf = lit::<F>(n as f64);
    let mut d = F::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let hi = lit::<F>((i + 1) as f64) / nf - x;
        let lo = x - lit::<F>(i as f64) / nf;
        d = d.max(hi).max(lo);
    }
    d
}

/// Pearson chi-square statistic of pair counts on an `m x m` grid against
/// the uniform distribution on the square (`m^2 - 1` degrees of freedom).
pub fn chi_square_uniform_grid<F: Scalar>(pairs: &[(F, F)], m: usize) -> F {
    let n = pairs.len();
    let mut counts = vec![0usize; m * m];
    for &(u, v) in pairs {
        let i = ((u * lit(m as f64)).to_f64().unwrap().floor() as usize).min(m - 1);
        let j = ((v * lit(m as f64)).to_f64().unwrap().floor() as usize).min(m - 1);
        counts[i * m + j] += 1;
    }
    let expected = n as f64 / (m * m) as f64;
    let mut stat = 0.0;
    for c in counts {
        let d = c as f64 - expected;
        stat += d * d / expected;
    }
    lit(stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_exact_grid_is_small() {
        let n = 1000;
        let sorted: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        assert!(ks_uniform(&sorted) <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn chi_square_detects_degeneracy() {
        let uniformish: Vec<(f64, f64)> = (0..10_000)
            .map(|k| {
                let x = (k as f64 * 0.6180339887498949) % 1.0;
                let y = (k as f64 * 0.4142135623730951) % 1.0;
                (x, y)
            })
            .collect();
        let stat = chi_square_uniform_grid(&uniformish, 10);
        assert!(stat < 200.0);
        let degenerate: Vec<(f64, f64)> = (0..10_000).map(|_| (0.1, 0.1)).collect();
        assert!(chi_square_uniform_grid(&degenerate, 10) > 10_000.0);
    }
}
