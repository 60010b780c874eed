//! Reproducible numerical experiments: accuracy of the quadratic deviation
//! formula, the exact-vs-parabolic mutual information curve, stream
//! continuity of the sources, and the seeded-generator demonstration.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bitstream::{concat_all, BitSequence};
use crate::error::{Error, Result};
use crate::estimators::{analyze, AnalysisReport, PairCounts};
use crate::model::{self, markov_prediction};
use crate::sources::{generate, seeded_entropy_bound, xorshift64_bits, BitSource, SourceConfig, SourceKind, SplitMix64};

const GRID_HALF_WIDTH: f64 = 0.1;

/// Rounds away accumulated floating-point drift from grid coordinates.
fn snap(x: f64) -> f64 {
    let v = (x * 1e12).round() / 1e12;
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// Fixed-point decimal with at least ten significant digits.
pub fn format_decimal(x: f64) -> String {
    const SIGNIFICANT: i32 = 10;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIGNIFICANT - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalCell {
    pub n_bits: u64,
    pub deviation_plugin: f64,
    /// `(plugin - exact) / sigma_D(exact, n)`.
    pub z_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub b: f64,
    pub a1: f64,
    pub deviation_exact: f64,
    pub deviation_approx: f64,
    pub relative_error: f64,
    pub empirical: Option<EmpiricalCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    /// Row-major in `(b, a1)`, origin excluded.
    pub rows: Vec<GridRow>,
    pub max_relative_error: f64,
    /// `(b, a1)` where the maximum occurs (first in row order).
    pub argmax: (f64, f64),
}

impl GridResult {
    pub fn max_abs_z(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.empirical.map(|e| e.z_score.abs()))
            .reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let empirical = self.rows.iter().any(|r| r.empirical.is_some());
        let mut out = String::from("b,a1,d_exact,d_approx,rel_err");
        if empirical {
            out.push_str(",n_bits,d_plugin,z");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                format_decimal(r.b),
                format_decimal(r.a1),
                format_decimal(r.deviation_exact),
                format_decimal(r.deviation_approx),
                format_decimal(r.relative_error)
            );
            if let Some(e) = r.empirical {
                let _ = write!(
                    out,
                    ",{},{},{}",
                    e.n_bits,
                    format_decimal(e.deviation_plugin),
                    format_decimal(e.z_score)
                );
            }
            out.push('\n');
        }
        out
    }
}

fn axis(step: f64) -> Vec<f64> {
    let steps = ((2.0 * GRID_HALF_WIDTH + 1e-9) / step).floor() as usize;
    (0..=steps)
        .map(|i| snap(-GRID_HALF_WIDTH + i as f64 * step))
        .collect()
}

/// Compares the quadratic deviation formula with the exact Markov deviation
/// on `|b|, |a1| <= 0.1`. With `n_bits`, every grid point is also simulated
/// and its plug-in estimate scored against the exact value.
pub fn validate_approx(step: f64, n_bits: Option<usize>, seed: u64) -> Result<GridResult> {
    if !(step.is_finite() && step > 0.0 && step <= GRID_HALF_WIDTH) {
        return Err(Error::InvalidParameter(format!(
            "grid step must lie in (0, 0.1], got {step}"
        )));
    }
    if n_bits.is_some_and(|n| n < 2) {
        return Err(Error::InvalidParameter(
            "empirical mode needs at least 2 bits per grid point".into(),
        ));
    }
    let axis = axis(step);
    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&b| axis.iter().map(move |&a1| (b, a1)))
        .filter(|&(b, a1)| !(b == 0.0 && a1 == 0.0))
        .collect();
    let mut seeder = SplitMix64::new(seed);
    let seeds: Vec<u64> = points.iter().map(|_| seeder.next_u64()).collect();

    let rows = points
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(&(b, a1), &point_seed)| {
            let p = markov_prediction(b, a1)?;
            let empirical = match n_bits {
                None => None,
                Some(n) => {
                    let cfg = SourceConfig::new(SourceKind::Markov { b, a1 }, point_seed);
                    let counts = PairCounts::from_bits(&generate(&cfg, n)?);
                    let d = crate::estimators::deviation_plugin(&counts)?;
                    let sigma = model::deviation_sigma(p.deviation_exact, n as u64);
                    Some(EmpiricalCell {
                        n_bits: n as u64,
                        deviation_plugin: d,
                        z_score: (d - p.deviation_exact) / sigma,
                    })
                }
            };
            Ok(GridRow {
                b,
                a1,
                deviation_exact: p.deviation_exact,
                deviation_approx: p.deviation_approx,
                relative_error: (p.deviation_approx - p.deviation_exact).abs() / p.deviation_exact,
                empirical,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (max_relative_error, argmax) = rows
        .iter()
        .fold((0.0, (0.0, 0.0)), |best, r| {
            if r.relative_error > best.0 {
                (r.relative_error, (r.b, r.a1))
            } else {
                best
            }
        });
    Ok(GridResult {
        rows,
        max_relative_error,
        argmax,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig2Row {
    pub a1: f64,
    pub mi_exact: f64,
    pub mi_approx: f64,
}

/// Exact and parabolic lag-1 mutual information of an unbiased Markov
/// source over an `a1` grid.
pub fn fig2_curve(a1_min: f64, a1_max: f64, step: f64) -> Result<Vec<Fig2Row>> {
    let valid = a1_min.is_finite()
        && a1_max.is_finite()
        && -1.0 <= a1_min
        && a1_min < a1_max
        && a1_max <= 1.0
        && step.is_finite()
        && step > 0.0;
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "need -1 <= min < max <= 1 and step > 0, got min={a1_min} max={a1_max} step={step}"
        )));
    }
    let steps = ((a1_max - a1_min) / step + 1e-9).floor() as usize;
    Ok((0..=steps)
        .map(|i| snap(a1_min + i as f64 * step).min(a1_max))
        .map(|a1| Fig2Row {
            a1,
            mi_exact: model::mi_exact_unbiased(a1),
            mi_approx: model::mi_parabolic(a1),
        })
        .collect())
}

pub fn fig2_csv(rows: &[Fig2Row]) -> String {
    let mut out = String::from("a1,mi_exact,mi_approx\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_decimal(r.a1),
            format_decimal(r.mi_exact),
            format_decimal(r.mi_approx)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcatCheck {
    pub total_bits: usize,
    pub bits_identical: bool,
    /// `None` when the stream is too short or degenerate to analyse.
    pub reports_identical: Option<bool>,
}

impl ConcatCheck {
    pub fn passed(&self) -> bool {
        self.bits_identical && self.reports_identical.unwrap_or(true)
    }
}

/// Generates the pieces `n_1, ..., n_m` from one live source and checks that
/// their concatenation equals a single fresh generation of `sum n_i` bits,
/// and that both analyse identically.
pub fn concat_property(config: &SourceConfig, parts: &[usize], max_lag: usize) -> Result<ConcatCheck> {
    let total: usize = parts.iter().sum();
    let mut live = config.build()?;
    let pieces: Vec<BitSequence> = parts.iter().map(|&n| live.take_bits(n)).collect();
    let joined = concat_all(&pieces);
    let whole = generate(config, total)?;
    let bits_identical = joined == whole;
    let reports_identical = match (analyze(&joined, max_lag), analyze(&whole, max_lag)) {
        (Ok(a), Ok(b)) => Some(a == b),
        _ => None,
    };
    Ok(ConcatCheck {
        total_bits: total,
        bits_identical,
        reports_identical,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrngDemo {
    pub seed: u64,
    pub length: u64,
    pub report: AnalysisReport,
    /// Upper bound on the true entropy per emitted bit.
    pub entropy_bound: f64,
    /// A second generation from the same seed is bit-identical.
    pub reproducible: bool,
    /// Largest |z| of the bias and autocorrelation estimates against zero.
    pub max_abs_z: f64,
}

/// Analyses `length` xorshift64 bits next to the entropy bound implied by
/// the 64-bit seed.
pub fn prng_demo(seed: u64, length: usize, max_lag: usize) -> Result<PrngDemo> {
    if length < 64 {
        return Err(Error::InvalidParameter(format!(
            "demo length must be at least 64 bits, got {length}"
        )));
    }
    let first = xorshift64_bits(seed, length)?;
    let second = xorshift64_bits(seed, length)?;
    let report = analyze(&first, max_lag)?;
    let max_abs_z = report
        .null_z_scores()
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok(PrngDemo {
        seed,
        length: length as u64,
        entropy_bound: seeded_entropy_bound(64, length as u64),
        reproducible: first == second,
        max_abs_z,
        report,
    })
}
