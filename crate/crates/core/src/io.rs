//! File formats: generator and diagonal JSON, decomposition and metadata
//! JSON, sample and recovery CSV.
//!
//! Numeric output carries 12 significant digits; CSV uses commas, `.`
//! decimals, LF line endings, UTF-8. Generator files are schema-versioned
//! and parsers reject gaps, overlaps, and degrees above 3.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::diagonal::DiagonalSection;
use crate::generator::{Generator, TOL};
use crate::inference::RecoveredGenerator;
use crate::measure::MassDecomposition;
use crate::num::{lit, to_f64, Scalar};
use crate::piecewise::Piece;
use crate::sampler::SampleSet;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("format: {0}")]
    Format(String),
    #[error("not representable in the file schema: {0}")]
    NotRepresentable(String),
}

/// One polynomial piece in the file schema, ascending coefficients,
/// degree at most 3.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceSpec {
    pub from: f64,
    pub to: f64,
    pub coeffs: Vec<f64>,
}

/// Schema-versioned generator file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub version: u32,
    pub zero_limit: f64,
    pub pieces: Vec<PieceSpec>,
}

/// Diagonal file: the same piece schema under the `delta_pieces` key.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagonalFile {
    pub version: u32,
    pub delta_pieces: Vec<PieceSpec>,
}

fn pieces_from_specs<F: Scalar>(specs: &[PieceSpec]) -> Result<Vec<Piece<F>>, IoError> {
    specs
        .iter()
        .map(|p| {
            if p.coeffs.is_empty() || p.coeffs.len() > 4 {
                return Err(IoError::Format(format!(
                    "piece [{}, {}]: coefficient list must have 1..=4 entries (degree <= 3)",
                    p.from, p.to
                )));
            }
            Ok(Piece::poly(lit(p.from), lit(p.to), &p.coeffs))
        })
        .collect()
}

/// Parses a generator file, rejecting schema violations, gaps/overlaps, and
/// a `zero_limit` inconsistent with the first piece.
pub fn generator_from_json<F: Scalar>(s: &str) -> Result<Generator<F>, IoError> {
    let file: GeneratorFile = serde_json::from_str(s)?;
    if file.version != 1 {
        return Err(IoError::Format(format!(
            "unsupported generator schema version {}",
            file.version
        )));
    }
    let gen = Generator::from_pieces(pieces_from_specs(&file.pieces)?)
        .map_err(|e| IoError::Format(e.to_string()))?;
    if (to_f64(gen.zero_limit()) - file.zero_limit).abs() > TOL {
        return Err(IoError::Format(format!(
            "zero_limit {} disagrees with the first piece's value {} at 0",
            file.zero_limit,
            to_f64(gen.zero_limit())
        )));
    }
    Ok(gen)
}

/// Serializes a polynomial-piece generator; square-root pieces have no file
/// representation (store the diagonal they came from instead).
pub fn generator_to_json<F: Scalar>(gen: &Generator<F>) -> Result<String, IoError> {
    let pieces = gen
        .pieces()
        .iter()
        .map(|p| {
            if !p.expr.is_poly() {
                return Err(IoError::NotRepresentable(
                    "generator has square-root pieces".to_string(),
                ));
            }
            Ok(PieceSpec {
                from: to_f64(p.lo),
                to: to_f64(p.hi),
                coeffs: p.expr.poly.coeffs().iter().map(|&c| to_f64(c)).collect(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let file = GeneratorFile {
        version: 1,
        zero_limit: to_f64(gen.zero_limit()),
        pieces,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn diagonal_from_json<F: Scalar>(s: &str) -> Result<DiagonalSection<F>, IoError> {
    let file: DiagonalFile = serde_json::from_str(s)?;
    if file.version != 1 {
        return Err(IoError::Format(format!(
            "unsupported diagonal schema version {}",
            file.version
        )));
    }
    DiagonalSection::new(pieces_from_specs(&file.delta_pieces)?)
        .map_err(|e| IoError::Format(e.to_string()))
}

pub fn diagonal_to_json<F: Scalar>(d: &DiagonalSection<F>) -> Result<String, IoError> {
    let delta_pieces = d
        .pieces()
        .iter()
        .map(|p| PieceSpec {
            from: to_f64(p.lo),
            to: to_f64(p.hi),
            coeffs: p.expr.poly.coeffs().iter().map(|&c| to_f64(c)).collect(),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&DiagonalFile {
        version: 1,
        delta_pieces,
    })?)
}

/// Formats with `sig` significant digits, plain decimal where reasonable,
/// scientific otherwise; trailing zeros trimmed.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sig = sig.max(1);
    let formatted = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = formatted.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp >= -4 && exp < sig as i32 + 3 {
        if exp >= 0 {
            let point = exp as usize + 1;
            if point >= digits.len() {
                format!("{}{}", digits, "0".repeat(point - digits.len()))
            } else {
                trim_fraction(&format!("{}.{}", &digits[..point], &digits[point..]))
            }
        } else {
            trim_fraction(&format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits))
        }
    } else {
        let m = trim_fraction(&if digits.len() > 1 {
            format!("{}.{}", &digits[..1], &digits[1..])
        } else {
            digits.clone()
        });
        format!("{m}e{exp}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let s = s.trim_end_matches('0');
    s.trim_end_matches('.').to_string()
}

/// Mass decomposition as JSON with 12 significant digits throughout.
pub fn decomposition_to_json<F: Scalar>(dec: &MassDecomposition<F>) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!(
        "  \"ac_mass\": {},\n",
        fmt_sig(to_f64(dec.ac_mass), 12)
    ));
    out.push_str(&format!(
        "  \"singular_mass\": {},\n",
        fmt_sig(to_f64(dec.singular_mass), 12)
    ));
    out.push_str(&format!(
        "  \"zero_set_area\": {},\n",
        fmt_sig(to_f64(dec.zero_set_area), 12)
    ));
    out.push_str("  \"profile\": [");
    for (i, (u, j)) in dec.profile.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!(
            "[{}, {}]",
            fmt_sig(to_f64(*u), 12),
            fmt_sig(to_f64(*j), 12)
        ));
    }
    out.push_str("]\n}\n");
    out
}

/// Sample CSV: header `u,v,singular` with the atom flag as 0/1.
pub fn sample_to_csv<F: Scalar>(set: &SampleSet<F>) -> String {
    let mut out = String::from("u,v,singular\n");
    for d in &set.draws {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(to_f64(d.u), 12),
            fmt_sig(to_f64(d.v), 12),
            u8::from(d.singular)
        ));
    }
    out
}

/// Metadata sidecar recording the provenance of a sample file.
pub fn sample_metadata_json<F: Scalar>(set: &SampleSet<F>) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "source": set.source,
        "n": set.draws.len(),
        "seed": set.seed,
        "rng": set.algorithm,
    }))
    .expect("metadata serializes")
        + "\n"
}

/// Reads `u,v` pairs from CSV with a header line; extra columns are ignored.
pub fn read_pairs_csv<R: BufRead>(reader: R) -> Result<Vec<(f64, f64)>, IoError> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 {
            let mut cols = line.split(',').map(str::trim);
            if cols.next() != Some("u") || cols.next() != Some("v") {
                return Err(IoError::Format(
                    "expected CSV header starting with 'u,v'".to_string(),
                ));
            }
            continue;
        }
        let mut cols = line.split(',');
        let u = parse_field(cols.next(), lineno)?;
        let v = parse_field(cols.next(), lineno)?;
        out.push((u, v));
    }
    if out.is_empty() {
        return Err(IoError::Format("no data rows in CSV".to_string()));
    }
    Ok(out)
}

fn parse_field(field: Option<&str>, lineno: usize) -> Result<f64, IoError> {
    let s = field
        .ok_or_else(|| IoError::Format(format!("line {}: missing column", lineno + 1)))?
        .trim();
    let x: f64 = s
        .parse()
        .map_err(|_| IoError::Format(format!("line {}: '{s}' is not a number", lineno + 1)))?;
    if !x.is_finite() {
        return Err(IoError::Format(format!(
            "line {}: non-finite value",
            lineno + 1
        )));
    }
    Ok(x)
}

/// Recovery output CSV: `u,f_u,valid`; invalid points keep their row with an
/// empty value and flag 0.
pub fn recovery_to_csv<F: Scalar>(rec: &RecoveredGenerator<F>) -> String {
    let mut out = String::from("u,f_u,valid\n");
    for p in &rec.points {
        if p.valid {
            out.push_str(&format!(
                "{},{},1\n",
                fmt_sig(to_f64(p.u), 12),
                fmt_sig(to_f64(p.f_u), 12)
            ));
        } else {
            out.push_str(&format!("{},,0\n", fmt_sig(to_f64(p.u), 12)));
        }
    }
    out
}

/// Summary sidecar for a recovery run.
pub fn recovery_summary_json<F: Scalar>(rec: &RecoveredGenerator<F>) -> String {
    let valid = rec.points.iter().filter(|p| p.valid).count();
    serde_json::to_string_pretty(&serde_json::json!({
        "u_min": to_f64(rec.u_min),
        "anchor": to_f64(rec.anchor),
        "anchor_kind": match rec.anchor_kind {
            crate::inference::AnchorKind::UMin => "u_min",
            crate::inference::AnchorKind::ScaleReference => "scale_reference",
        },
        "points_total": rec.points.len(),
        "points_valid": valid,
    }))
    .expect("summary serializes")
        + "\n"
}
