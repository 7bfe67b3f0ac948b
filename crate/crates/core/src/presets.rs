//! Named generator pairs.
//!
//! Keys are either fixed (`"w"`, `"pi"`, `"tent"`, `"ex5asym"`, `"fig1-1"`
//! ... `"fig2-6"`) or parametrized as `name:key=value,key=value` with plain
//! decimals or fractions as values (`"ex3a:theta=1/3,eta=2/3"`). Every
//! preset passes generator validation on load.

use std::collections::BTreeMap;

use crate::copula::RmmCopula;
use crate::generator::{Generator, GeneratorError};
use crate::num::Scalar;

#[derive(Clone, Debug, thiserror::Error)]
pub enum PresetError {
    #[error("unknown preset key '{0}'")]
    UnknownKey(String),
    #[error("bad preset parameter: {0}")]
    BadParam(String),
    #[error("preset failed validation: {0}")]
    Invalid(#[from] GeneratorError),
}

/// Catalog entry: key pattern and what it builds.
#[derive(Clone, Debug)]
pub struct PresetInfo {
    pub key: &'static str,
    pub summary: &'static str,
}

/// Every key pattern the catalog accepts, with the generator formulas.
pub fn catalog() -> Vec<PresetInfo> {
    vec![
        PresetInfo { key: "pi", summary: "independence: f = g = 0" },
        PresetInfo {
            key: "w",
            summary: "lower Frechet-Hoeffding bound: f = g = 1 - t (jump at 0); fully singular",
        },
        PresetInfo {
            key: "efgm:a=<0..1>",
            summary: "f = g = a t (1 - t): EFGM copula uv - a^2 uv(1-u)(1-v), absolutely continuous",
        },
        PresetInfo {
            key: "ex31:a=<0..1>,b=<0..1>",
            summary: "f = a min(t, 1-t), g = b t (1 - t): absolutely continuous pair; only a*b matters",
        },
        PresetInfo {
            key: "ex3a:theta=<0..1>,eta=<0..1>",
            summary: "f = min((1/theta - 1) t, 1 - t), g likewise with eta; uniform singular mass 1 - min(theta+eta, 1) on a segment of v = 1 - u",
        },
        PresetInfo {
            key: "ex3b:delta=<0..1/2>",
            summary: "f = g = (delta on (0, delta]; t; 1 - t): singular arcs v = delta(1-u)/u, mass delta ln 2 each",
        },
        PresetInfo {
            key: "ex3c:mu=<0..1]",
            summary: "f = t (1 - t), g = max(mu - t, 0) (jump at 0): singular mass mu(ln 4 - 1) on v = mu(1-u)/(2-u)",
        },
        PresetInfo {
            key: "tent",
            summary: "f = g = min(t, 1 - t): diagonal max(0, 2t - 1); two product blocks glued at 1/2",
        },
        PresetInfo {
            key: "ex5asym",
            summary: "f = min(t, 1-t), g = max(0, 1/2 - t) (jump at 0): asymmetric pair with non-monotone t + sqrt(t^2 - delta(t))",
        },
        PresetInfo { key: "fig1-1", summary: "alias of ex3a:theta=1/3,eta=1/3" },
        PresetInfo { key: "fig1-2", summary: "alias of ex3a:theta=1/3,eta=2/3" },
        PresetInfo { key: "fig1-3", summary: "alias of ex3a:theta=2/3,eta=2/3" },
        PresetInfo { key: "fig1-4", summary: "alias of ex3b:delta=1/3" },
        PresetInfo { key: "fig1-5", summary: "alias of ex3c:mu=1" },
        PresetInfo { key: "fig1-6", summary: "alias of ex3c:mu=1/2" },
        PresetInfo {
            key: "fig2-1",
            summary: "f = (2t on [0,1/3]; 1-t), g = max(2/3 - t, 0) (jump at 0)",
        },
        PresetInfo {
            key: "fig2-2",
            summary: "f = max(1/2 - t, 0), g = max(2/3 - t, 0) (both jump at 0)",
        },
        PresetInfo {
            key: "fig2-3",
            summary: "f = g = (1/2 on (0,1/2]; 1-t) (jump at 0)",
        },
        PresetInfo {
            key: "fig2-4",
            summary: "f = (2t on [0,1/3]; 1-t), g = t(1-t)",
        },
        PresetInfo {
            key: "fig2-5",
            summary: "f = (t/2 on [0,2/3]; 1-t), g = t(1-t)",
        },
        PresetInfo {
            key: "fig2-6",
            summary: "f = (1/3 on (0,1/3]; t; 1-t) (jump at 0), g = t(1-t)",
        },
    ]
}

/// The instantiated presets used by the test suites: every fixed key plus
/// one or two parameter choices per family.
pub fn standard_keys() -> Vec<&'static str> {
    vec![
        "pi",
        "w",
        "efgm:a=0.5",
        "ex31:a=0.4,b=0.6",
        "ex3a:theta=1/3,eta=1/3",
        "ex3a:theta=1/3,eta=2/3",
        "ex3a:theta=2/3,eta=2/3",
        "ex3b:delta=1/3",
        "ex3c:mu=1",
        "ex3c:mu=1/2",
        "tent",
        "ex5asym",
        "fig2-1",
        "fig2-2",
        "fig2-3",
        "fig2-4",
        "fig2-5",
        "fig2-6",
    ]
}

/// Symmetric members of [`standard_keys`].
pub fn symmetric_keys() -> Vec<&'static str> {
    vec!["pi", "w", "efgm:a=0.5", "ex3b:delta=1/3", "tent", "fig2-3"]
}

/// The six scatterplot datasets of the first figure bundle.
pub fn figure1_keys() -> Vec<&'static str> {
    vec!["fig1-1", "fig1-2", "fig1-3", "fig1-4", "fig1-5", "fig1-6"]
}

/// The six scatterplot datasets of the second figure bundle.
pub fn figure2_keys() -> Vec<&'static str> {
    vec!["fig2-1", "fig2-2", "fig2-3", "fig2-4", "fig2-5", "fig2-6"]
}

/// Builds the RMM copula for a preset key.
pub fn rmm<F: Scalar>(key: &str) -> Result<RmmCopula<F>, PresetError> {
    let key = key.trim();
    let (name, params) = match key.split_once(':') {
        Some((n, p)) => (n.trim(), parse_params(p)?),
        None => (key, BTreeMap::new()),
    };
    let c = match name {
        "pi" => RmmCopula::new_symmetric(Generator::zero())?,
        "w" => RmmCopula::new_symmetric(w_generator()?)?,
        "tent" => RmmCopula::new_symmetric(tent_generator()?)?,
        "efgm" => {
            let a = param(&params, "a", key)?;
            check_range(a, 0.0, 1.0, false, true, "a", key)?;
            RmmCopula::new_symmetric(efgm_generator(a)?)?
        }
        "ex31" => {
            let a = param(&params, "a", key)?;
            let b = param(&params, "b", key)?;
            check_range(a, 0.0, 1.0, false, true, "a", key)?;
            check_range(b, 0.0, 1.0, false, true, "b", key)?;
            let f = Generator::from_poly_pieces(&[(0.0, 0.5, &[0.0, a]), (0.5, 1.0, &[a, -a])])?;
            RmmCopula::new(f, efgm_generator(b)?)?
        }
        "ex3a" => {
            let theta = param(&params, "theta", key)?;
            let eta = param(&params, "eta", key)?;
            check_range(theta, 0.0, 1.0, false, false, "theta", key)?;
            check_range(eta, 0.0, 1.0, false, false, "eta", key)?;
            RmmCopula::new(kinked_generator(theta)?, kinked_generator(eta)?)?
        }
        "ex3b" => {
            let d = param(&params, "delta", key)?;
            check_range(d, 0.0, 0.5, false, false, "delta", key)?;
            RmmCopula::new_symmetric(Generator::from_poly_pieces(&[
                (0.0, d, &[d]),
                (d, 0.5, &[0.0, 1.0]),
                (0.5, 1.0, &[1.0, -1.0]),
            ])?)?
        }
        "ex3c" => {
            let mu = param(&params, "mu", key)?;
            check_range(mu, 0.0, 1.0, false, true, "mu", key)?;
            RmmCopula::new(efgm_generator(1.0)?, wedge_generator(mu)?)?
        }
        "ex5asym" => RmmCopula::new(tent_generator()?, wedge_generator(0.5)?)?,
        "fig1-1" => return rmm("ex3a:theta=1/3,eta=1/3"),
        "fig1-2" => return rmm("ex3a:theta=1/3,eta=2/3"),
        "fig1-3" => return rmm("ex3a:theta=2/3,eta=2/3"),
        "fig1-4" => return rmm("ex3b:delta=1/3"),
        "fig1-5" => return rmm("ex3c:mu=1"),
        "fig1-6" => return rmm("ex3c:mu=1/2"),
        "fig2-1" => RmmCopula::new(
            rise_fall_generator(1.0 / 3.0, 2.0)?,
            wedge_generator(2.0 / 3.0)?,
        )?,
        "fig2-2" => RmmCopula::new(wedge_generator(0.5)?, wedge_generator(2.0 / 3.0)?)?,
        "fig2-3" => RmmCopula::new_symmetric(Generator::from_poly_pieces(&[
            (0.0, 0.5, &[0.5]),
            (0.5, 1.0, &[1.0, -1.0]),
        ])?)?,
        "fig2-4" => RmmCopula::new(rise_fall_generator(1.0 / 3.0, 2.0)?, efgm_generator(1.0)?)?,
        "fig2-5" => RmmCopula::new(rise_fall_generator(2.0 / 3.0, 0.5)?, efgm_generator(1.0)?)?,
        "fig2-6" => RmmCopula::new(
            Generator::from_poly_pieces(&[
                (0.0, 1.0 / 3.0, &[1.0 / 3.0]),
                (1.0 / 3.0, 0.5, &[0.0, 1.0]),
                (0.5, 1.0, &[1.0, -1.0]),
            ])?,
            efgm_generator(1.0)?,
        )?,
        _ => return Err(PresetError::UnknownKey(key.to_string())),
    };
    Ok(c)
}

/// `f(t) = 1 - t` on `(0, 1]` with `f(0) = 0`.
fn w_generator<F: Scalar>() -> Result<Generator<F>, PresetError> {
    Ok(Generator::from_poly_pieces(&[(0.0, 1.0, &[1.0, -1.0])])?)
}

/// `f(t) = min(t, 1 - t)`.
fn tent_generator<F: Scalar>() -> Result<Generator<F>, PresetError> {
    Ok(Generator::from_poly_pieces(&[
        (0.0, 0.5, &[0.0, 1.0]),
        (0.5, 1.0, &[1.0, -1.0]),
    ])?)
}

/// `f(t) = a t (1 - t)`.
fn efgm_generator<F: Scalar>(a: f64) -> Result<Generator<F>, PresetError> {
    Ok(Generator::from_poly_pieces(&[(0.0, 1.0, &[0.0, a, -a])])?)
}

/// `f(t) = max(c - t, 0)` for `t > 0`, with the jump `c` at 0.
fn wedge_generator<F: Scalar>(c: f64) -> Result<Generator<F>, PresetError> {
    if c >= 1.0 {
        return Ok(Generator::from_poly_pieces(&[(0.0, 1.0, &[1.0, -1.0])])?);
    }
    Ok(Generator::from_poly_pieces(&[
        (0.0, c, &[c, -1.0]),
        (c, 1.0, &[0.0]),
    ])?)
}

/// `f(t) = slope * t` up to the breakpoint, then `1 - t`.
fn rise_fall_generator<F: Scalar>(brk: f64, slope: f64) -> Result<Generator<F>, PresetError> {
    Ok(Generator::from_poly_pieces(&[
        (0.0, brk, &[0.0, slope]),
        (brk, 1.0, &[1.0, -1.0]),
    ])?)
}

/// `f = min((1/p - 1) t, 1 - t)` with the kink at `p`.
fn kinked_generator<F: Scalar>(p: f64) -> Result<Generator<F>, PresetError> {
    Ok(Generator::from_poly_pieces(&[
        (0.0, p, &[0.0, 1.0 / p - 1.0]),
        (p, 1.0, &[1.0, -1.0]),
    ])?)
}

fn parse_params(s: &str) -> Result<BTreeMap<String, f64>, PresetError> {
    let mut out = BTreeMap::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| PresetError::BadParam(format!("'{part}' is not key=value")))?;
        out.insert(k.trim().to_string(), parse_number(v.trim())?);
    }
    Ok(out)
}

/// Parses a decimal or a fraction like `2/3`.
pub fn parse_number(s: &str) -> Result<f64, PresetError> {
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| PresetError::BadParam(format!("bad numerator in '{s}'")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| PresetError::BadParam(format!("bad denominator in '{s}'")))?;
        if d == 0.0 {
            return Err(PresetError::BadParam(format!("zero denominator in '{s}'")));
        }
        Ok(n / d)
    } else {
        s.parse()
            .map_err(|_| PresetError::BadParam(format!("'{s}' is not a number")))
    }
}

fn param(params: &BTreeMap<String, f64>, name: &str, key: &str) -> Result<f64, PresetError> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| PresetError::BadParam(format!("preset '{key}' needs parameter '{name}'")))
}

fn check_range(
    x: f64,
    lo: f64,
    hi: f64,
    lo_incl: bool,
    hi_incl: bool,
    name: &str,
    key: &str,
) -> Result<(), PresetError> {
    let ok_lo = if lo_incl { x >= lo } else { x > lo };
    let ok_hi = if hi_incl { x <= hi } else { x < hi };
    if ok_lo && ok_hi {
        Ok(())
    } else {
        Err(PresetError::BadParam(format!(
            "parameter '{name}' = {x} out of range for preset '{key}'"
        )))
    }
}
