//! Seeded sampling of RMM and maxmin copulas.
//!
//! Draws use the conditional-inverse method: given `u`, the conditional
//! distribution of `V` is `F(v|u) = v - f'(u) g(v)` above the boundary curve,
//! zero below it, with an atom of size `jump(u) = v0(u) - f'(u) g(v0(u))` on
//! the curve itself. A uniform `w` below the atom returns the curve point
//! exactly (a singular draw, flagged); otherwise `F(v|u) = w` is inverted by
//! bisection. Maxmin samples are reflected RMM samples.
//!
//! Draws are produced in fixed-size chunks, each from its own ChaCha12
//! stream derived from the seed, so output is bit-reproducible for a given
//! `(copula, n, seed)` regardless of how many worker threads run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::copula::{MaxminCopula, RmmCopula};
use crate::num::{lit, to_f64, Scalar};
use crate::piecewise::Side;
use crate::presets::{self, PresetError};

/// Identifier of the random source written into metadata.
pub const RNG_ALGORITHM: &str = "chacha12-stream-chunks-8192";
const CHUNK: usize = 8192;

/// One sampled pair; `singular` flags an atom draw on the boundary curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Draw<F> {
    pub u: F,
    pub v: F,
    pub singular: bool,
}

/// A reproducible sample: same `(source, n, seed)` gives identical draws.
#[derive(Clone, Debug)]
pub struct SampleSet<F> {
    pub draws: Vec<Draw<F>>,
    pub seed: u64,
    pub source: String,
    pub algorithm: &'static str,
}

impl<F: Scalar> SampleSet<F> {
    pub fn pairs(&self) -> Vec<(F, F)> {
        self.draws.iter().map(|d| (d.u, d.v)).collect()
    }

    /// Fraction of draws flagged singular.
    pub fn singular_fraction(&self) -> F {
        if self.draws.is_empty() {
            return F::zero();
        }
        let k = self.draws.iter().filter(|d| d.singular).count();
        lit::<F>(k as f64) / lit(self.draws.len() as f64)
    }
}

/// Samples `n` pairs from an RMM copula.
pub fn sample_rmm<F: Scalar>(
    c: &RmmCopula<F>,
    n: usize,
    seed: u64,
    source: impl Into<String>,
) -> SampleSet<F> {
    let chunks = n.div_ceil(CHUNK).max(1);
    let draws: Vec<Draw<F>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64 + 1);
            let count = CHUNK.min(n - chunk * CHUNK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(draw_one(c, &mut rng));
            }
            out
        })
        .flatten_iter()
        .collect();
    SampleSet {
        draws,
        seed,
        source: source.into(),
        algorithm: RNG_ALGORITHM,
    }
}

/// Samples a maxmin copula by reflecting RMM draws: `(u, 1 - v)`.
pub fn sample_maxmin<F: Scalar>(
    c: &MaxminCopula<F>,
    n: usize,
    seed: u64,
    source: impl Into<String>,
) -> SampleSet<F> {
    let mut set = sample_rmm(&c.reflect(), n, seed, source);
    for d in &mut set.draws {
        d.v = F::one() - d.v;
    }
    set
}

fn draw_one<F: Scalar>(c: &RmmCopula<F>, rng: &mut ChaCha12Rng) -> Draw<F> {
    let mut u: F = lit(rng.gen::<f64>());
    // a draw exactly at 0 or at a breakpoint of f has an undefined f'(u);
    // nudge by one ulp toward the interior (probability-zero event)
    if u <= F::zero() {
        u = lit(f64::from_bits(0f64.to_bits() + 1));
    }
    while c.f().breakpoints().contains(&u) {
        u = lit(f64::from_bits(to_f64(u).to_bits() + 1));
    }
    let fd = c.f().piecewise().deriv(u, Side::Right);
    let g = c.g();
    let v0 = c.boundary_v(u);
    let interior = v0 > lit(1e-12) && v0 < F::one() - lit(1e-12);
    let jump = if interior {
        v0 - fd * g.eval(v0)
    } else {
        F::zero()
    };
    let w: F = lit(rng.gen::<f64>());
    if w <= jump {
        return Draw {
            u,
            v: v0,
            singular: true,
        };
    }
    // invert F(v|u) = v - f'(u) g(v) on [v0, 1]; nondecreasing there
    let cond = |v: F| v - fd * g.eval(v);
    let (mut lo, mut hi) = (v0, F::one());
    for _ in 0..100 {
        if hi - lo <= lit(1e-13) {
            break;
        }
        let mid = (lo + hi) * lit(0.5);
        if cond(mid) >= w {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Draw {
        u,
        v: hi,
        singular: false,
    }
}

/// Sample for a preset key, with the key recorded as the source.
pub fn figure_dataset<F: Scalar>(
    preset_key: &str,
    n: usize,
    seed: u64,
) -> Result<SampleSet<F>, PresetError> {
    let c = presets::rmm::<F>(preset_key)?;
    Ok(sample_rmm(&c, n, seed, preset_key))
}

/// The twelve scatterplot datasets of the two figure bundles.
pub fn figure_bundle_keys() -> Vec<&'static str> {
    let mut keys = presets::figure1_keys();
    keys.extend(presets::figure2_keys());
    keys
}
