use serde::{Deserialize, Serialize};

use crate::bitstream::BitSequence;
use crate::model::{binary_entropy, xlog2x};

/// Mergeable one-pass tally of bits and adjacent pairs `(x_i, x_{i+1})`.
///
/// `first_bit` and `last_bit` remember the stream boundary so that two
/// tallies of consecutive chunks can be joined without losing the pair that
/// straddles the cut.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairCounts {
    pub n: u64,
    pub ones: u64,
    pub c00: u64,
    pub c01: u64,
    pub c10: u64,
    pub c11: u64,
    pub first_bit: Option<bool>,
    pub last_bit: Option<bool>,
}

impl PairCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(seq: &BitSequence) -> Self {
        Self::from_range(seq, 0, seq.len())
    }

    /// Tally of bits `start .. start + len` of `seq`.
    pub fn from_range(seq: &BitSequence, start: usize, len: usize) -> Self {
        if len == 0 {
            return Self::default();
        }
        let first = seq.get(start).expect("range start in bounds");
        let last = seq.get(start + len - 1).expect("range end in bounds");
        let ones = seq.count_ones_in(start, len);
        let c11 = seq.count_coincident(start, 1, len - 1);
        // Ones among pair heads are all ones but the last bit, among pair
        // tails all ones but the first.
        let c10 = ones - u64::from(last) - c11;
        let c01 = ones - u64::from(first) - c11;
        let c00 = (len as u64 - 1) - c01 - c10 - c11;
        Self {
            n: len as u64,
            ones,
            c00,
            c01,
            c10,
            c11,
            first_bit: Some(first),
            last_bit: Some(last),
        }
    }

    /// Appends a chunk, including the pair across the boundary.
    pub fn accumulate(&mut self, seq: &BitSequence) {
        *self = self.merge(&Self::from_bits(seq));
    }

    /// Joins a tally with the tally of the data that immediately follows it.
    pub fn merge(&self, next: &PairCounts) -> PairCounts {
        if next.n == 0 {
            return *self;
        }
        if self.n == 0 {
            return *next;
        }
        let mut out = PairCounts {
            n: self.n + next.n,
            ones: self.ones + next.ones,
            c00: self.c00 + next.c00,
            c01: self.c01 + next.c01,
            c10: self.c10 + next.c10,
            c11: self.c11 + next.c11,
            first_bit: self.first_bit,
            last_bit: next.last_bit,
        };
        match (self.last_bit, next.first_bit) {
            (Some(false), Some(false)) => out.c00 += 1,
            (Some(false), Some(true)) => out.c01 += 1,
            (Some(true), Some(false)) => out.c10 += 1,
            (Some(true), Some(true)) => out.c11 += 1,
            _ => {}
        }
        out
    }

    pub fn pairs(&self) -> u64 {
        self.c00 + self.c01 + self.c10 + self.c11
    }

    /// Empirical joint distribution of adjacent pairs; `None` without pairs.
    pub fn joint(&self) -> Option<PairDistribution> {
        let total = self.pairs();
        if total == 0 {
            return None;
        }
        let t = total as f64;
        Some(PairDistribution {
            p00: self.c00 as f64 / t,
            p01: self.c01 as f64 / t,
            p10: self.c10 as f64 / t,
            p11: self.c11 as f64 / t,
        })
    }
}

/// Joint distribution `p_jk = P(x_i = j, x_{i+1} = k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

impl PairDistribution {
    /// Independent pair with `P(1) = p1` for both bits.
    pub fn product(p1: f64) -> Self {
        let p0 = 1.0 - p1;
        Self {
            p00: p0 * p0,
            p01: p0 * p1,
            p10: p1 * p0,
            p11: p1 * p1,
        }
    }

    fn rows(&self) -> [f64; 2] {
        [self.p00 + self.p01, self.p10 + self.p11]
    }

    fn cols(&self) -> [f64; 2] {
        [self.p00 + self.p10, self.p01 + self.p11]
    }

    fn cells(&self) -> [[f64; 2]; 2] {
        [[self.p00, self.p01], [self.p10, self.p11]]
    }

    pub fn mutual_information(&self) -> f64 {
        let (rows, cols) = (self.rows(), self.cols());
        let mut mi = 0.0;
        for (j, row) in self.cells().iter().enumerate() {
            for (k, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    mi += p * (p / (rows[j] * cols[k])).log2();
                }
            }
        }
        mi.max(0.0)
    }

    /// `H(x_{i+1} | x_i)`.
    pub fn cond_entropy(&self) -> f64 {
        let rows = self.rows();
        self.cells()
            .iter()
            .zip(rows)
            .filter(|(_, r)| *r > 0.0)
            .map(|(cells, r)| r * binary_entropy(cells[1] / r))
            .sum()
    }

    /// Entropy of the successor marginal `x_{i+1}`.
    pub fn successor_entropy(&self) -> f64 {
        let [c0, c1] = self.cols();
        -xlog2x(c0) - xlog2x(c1)
    }
}
