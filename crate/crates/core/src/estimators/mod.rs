//! One-pass, mergeable estimators.
//!
//! Everything is built from two integer accumulators, [`PairCounts`] and
//! [`LagAccumulator`]. Both merge exactly, so analysing a stream in chunks
//! (serially or in parallel) gives the same report, bit for bit, as a single
//! pass over the whole stream.

mod counts;
mod lag;

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::BitSequence;
use crate::error::{Error, Result};
use crate::model::{self, NMax};

pub use counts::{PairCounts, PairDistribution};
pub use lag::{autocorr, LagAccumulator};

/// A point estimate with its one-sigma statistical uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    /// Distance from `target` in units of sigma.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagEstimate {
    pub lag: usize,
    pub value: f64,
    pub sigma: f64,
}

/// `b = 2 * ones / n - 1` with `sigma = 1/sqrt(n)`.
pub fn bias_estimate(counts: &PairCounts) -> Result<Estimate> {
    if counts.n == 0 {
        return Err(Error::EmptyInput);
    }
    let n = counts.n as f64;
    Ok(Estimate {
        value: -1.0 + 2.0 * counts.ones as f64 / n,
        sigma: 1.0 / n.sqrt(),
    })
}

fn pair_joint(counts: &PairCounts) -> Result<PairDistribution> {
    counts.joint().ok_or(Error::InsufficientData {
        needed: 2,
        got: counts.n,
    })
}

/// Plug-in mutual information between neighbouring bits, in bits.
pub fn mutual_information_lag1(counts: &PairCounts) -> Result<f64> {
    Ok(pair_joint(counts)?.mutual_information())
}

/// Plug-in `H(x_{i+1} | x_i)`, in bits.
pub fn cond_entropy_lag1(counts: &PairCounts) -> Result<f64> {
    Ok(pair_joint(counts)?.cond_entropy())
}

/// Plug-in entropy of the successor bit's marginal, in bits.
pub fn marginal_entropy_lag1(counts: &PairCounts) -> Result<f64> {
    Ok(pair_joint(counts)?.successor_entropy())
}

/// Plug-in deviation from randomness, `1 - H(x_{i+1} | x_i)`.
pub fn deviation_plugin(counts: &PairCounts) -> Result<f64> {
    Ok((1.0 - cond_entropy_lag1(counts)?).clamp(0.0, 1.0))
}

/// G statistic `2 (n-1) ln 2 * I` for the lag-1 independence null; under the
/// null it is asymptotically chi-square with one degree of freedom.
pub fn independence_statistic(counts: &PairCounts) -> Result<f64> {
    Ok(2.0 * counts.pairs() as f64 * LN_2 * mutual_information_lag1(counts)?)
}

/// Everything measured on one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n_bits: u64,
    pub bias: Estimate,
    pub autocorr: Vec<LagEstimate>,
    pub mi_lag1: f64,
    pub cond_entropy: f64,
    pub deviation_plugin: f64,
    /// Quadratic Markov approximation from the measured bias and `a_1`.
    pub deviation_markov: f64,
    pub deviation_sigma: f64,
    pub n_max: NMax,
}

impl AnalysisReport {
    pub fn a1(&self) -> f64 {
        self.autocorr[0].value
    }

    /// z-scores of the bias and every autocorrelation lag against zero.
    pub fn null_z_scores(&self) -> Vec<f64> {
        std::iter::once(self.bias.value / self.bias.sigma)
            .chain(self.autocorr.iter().map(|a| a.value / a.sigma))
            .collect()
    }
}

/// Streaming analysis state: pair counts plus one accumulator per lag.
#[derive(Debug, Clone, PartialEq)]
pub struct Analyzer {
    pairs: PairCounts,
    lags: Vec<LagAccumulator>,
}

impl Analyzer {
    pub fn new(max_lag: usize) -> Result<Self> {
        if max_lag == 0 {
            return Err(Error::InvalidParameter(
                "max lag must be at least 1".into(),
            ));
        }
        let lags = (1..=max_lag)
            .map(LagAccumulator::new)
            .collect::<Result<_>>()?;
        Ok(Self {
            pairs: PairCounts::new(),
            lags,
        })
    }

    /// State after seeing bits `start .. start + len` of `seq`.
    pub fn from_range(seq: &BitSequence, max_lag: usize, start: usize, len: usize) -> Result<Self> {
        let mut a = Self::new(max_lag)?;
        a.pairs = PairCounts::from_range(seq, start, len);
        for acc in &mut a.lags {
            *acc = LagAccumulator::from_range(seq, acc.lag(), start, len)?;
        }
        Ok(a)
    }

    pub fn max_lag(&self) -> usize {
        self.lags.len()
    }

    pub fn pair_counts(&self) -> &PairCounts {
        &self.pairs
    }

    pub fn push(&mut self, seq: &BitSequence) {
        self.pairs.accumulate(seq);
        for acc in &mut self.lags {
            acc.update(seq);
        }
    }

    /// Joins with the state of the data that immediately follows.
    pub fn merge(&self, next: &Analyzer) -> Analyzer {
        assert_eq!(self.max_lag(), next.max_lag(), "max lag mismatch");
        Analyzer {
            pairs: self.pairs.merge(&next.pairs),
            lags: self
                .lags
                .iter()
                .zip(&next.lags)
                .map(|(a, b)| a.merge(b))
                .collect(),
        }
    }

    pub fn report(&self) -> Result<AnalysisReport> {
        let n = self.pairs.n;
        let needed = self.max_lag() as u64 + 2;
        if n < needed {
            return Err(if n == 0 {
                Error::EmptyInput
            } else {
                Error::InsufficientData { needed, got: n }
            });
        }
        let bias = bias_estimate(&self.pairs)?;
        let autocorr = self
            .lags
            .iter()
            .map(|acc| {
                acc.autocorr().map(|e| LagEstimate {
                    lag: acc.lag(),
                    value: e.value,
                    sigma: e.sigma,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let joint = pair_joint(&self.pairs)?;
        let cond_entropy = joint.cond_entropy();
        let deviation = (1.0 - cond_entropy).clamp(0.0, 1.0);
        Ok(AnalysisReport {
            n_bits: n,
            bias,
            mi_lag1: joint.mutual_information(),
            cond_entropy,
            deviation_plugin: deviation,
            deviation_markov: model::deviation_approx(bias.value, autocorr[0].value),
            deviation_sigma: model::deviation_sigma(deviation, n),
            n_max: model::n_max(deviation),
            autocorr,
        })
    }
}

/// Single-pass analysis with lags `1..=max_lag`.
pub fn analyze(seq: &BitSequence, max_lag: usize) -> Result<AnalysisReport> {
    Analyzer::from_range(seq, max_lag, 0, seq.len())?.report()
}

/// Chunked analysis on the rayon pool; identical output to [`analyze`].
pub fn par_analyze(seq: &BitSequence, max_lag: usize, chunk_bits: usize) -> Result<AnalysisReport> {
    par_analyzer(seq, max_lag, chunk_bits)?.report()
}

/// Analyzer state for `seq`, built from chunks of `chunk_bits` in parallel.
pub fn par_analyzer(seq: &BitSequence, max_lag: usize, chunk_bits: usize) -> Result<Analyzer> {
    if chunk_bits == 0 {
        return Err(Error::InvalidParameter("chunk size must be positive".into()));
    }
    let starts: Vec<usize> = (0..seq.len()).step_by(chunk_bits).collect();
    let parts = starts
        .par_iter()
        .map(|&start| {
            Analyzer::from_range(seq, max_lag, start, chunk_bits.min(seq.len() - start))
        })
        .collect::<Result<Vec<_>>>()?;
    let empty = Analyzer::new(max_lag)?;
    Ok(parts.iter().fold(empty, |acc, part| acc.merge(part)))
}
