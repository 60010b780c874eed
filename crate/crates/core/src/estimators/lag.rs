use crate::bitstream::{concat, BitSequence};
use crate::error::{Error, Result};

use super::Estimate;

/// Mergeable sums behind the lag-`k` serial autocorrelation coefficient
///
/// ```text
///         sum_{i=1}^{N-k} (x_i - m)(x_{i+k} - m)
/// a_k = ------------------------------------------ ,   m = mean of all N bits
///         sum_{i=1}^{N-k} (x_i - m)^2
/// ```
///
/// For bits `x^2 = x`, so both sums reduce to `sum_prod`, `sum_head` and
/// `sum_tail` plus the global mean. The first and last `k` bits are kept to
/// complete the products that straddle a chunk boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagAccumulator {
    lag: usize,
    n: u64,
    ones: u64,
    /// `sum_{i=1}^{N-k} x_i x_{i+k}`
    sum_prod: u64,
    /// `sum_{i=1}^{N-k} x_i`
    sum_head: u64,
    /// `sum_{i=k+1}^{N} x_i`
    sum_tail: u64,
    head: BitSequence,
    ring: BitSequence,
}

impl LagAccumulator {
    pub fn new(lag: usize) -> Result<Self> {
        if lag == 0 {
            return Err(Error::InvalidParameter("lag must be at least 1".into()));
        }
        Ok(Self::empty(lag))
    }

    fn empty(lag: usize) -> Self {
        Self {
            lag,
            n: 0,
            ones: 0,
            sum_prod: 0,
            sum_head: 0,
            sum_tail: 0,
            head: BitSequence::new(),
            ring: BitSequence::new(),
        }
    }

    pub fn from_bits(seq: &BitSequence, lag: usize) -> Result<Self> {
        Self::from_range(seq, lag, 0, seq.len())
    }

    pub fn from_range(seq: &BitSequence, lag: usize, start: usize, len: usize) -> Result<Self> {
        let mut acc = Self::new(lag)?;
        if len == 0 {
            return Ok(acc);
        }
        acc.n = len as u64;
        acc.ones = seq.count_ones_in(start, len);
        if len > lag {
            let span = len - lag;
            acc.sum_prod = seq.count_coincident(start, lag, span);
            acc.sum_head = seq.count_ones_in(start, span);
            acc.sum_tail = seq.count_ones_in(start + lag, span);
        }
        let edge = lag.min(len);
        acc.head = seq.slice(start, edge);
        acc.ring = seq.slice(start + len - edge, edge);
        Ok(acc)
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn update(&mut self, seq: &BitSequence) {
        let chunk = Self::from_bits(seq, self.lag).expect("lag already validated");
        *self = self.merge(&chunk);
    }

    /// Joins with the accumulator of the data that immediately follows.
    pub fn merge(&self, next: &LagAccumulator) -> LagAccumulator {
        assert_eq!(self.lag, next.lag, "cannot merge accumulators of different lags");
        if next.n == 0 {
            return self.clone();
        }
        if self.n == 0 {
            return next.clone();
        }
        let k = self.lag;
        let mut out = Self::empty(k);
        out.n = self.n + next.n;
        out.ones = self.ones + next.ones;
        out.sum_prod = self.sum_prod + next.sum_prod;
        out.sum_head = self.sum_head + next.sum_head;
        out.sum_tail = self.sum_tail + next.sum_tail;

        // Products whose first factor is in `self` and second in `next`.
        let seam = concat(&self.ring, &next.head);
        let left = self.ring.len();
        let crossing = (left + next.head.len()).saturating_sub(k).min(left);
        for i in 0..crossing {
            let a = seam.get(i).unwrap();
            let b = seam.get(i + k).unwrap();
            out.sum_prod += u64::from(a && b);
            out.sum_head += u64::from(a);
            out.sum_tail += u64::from(b);
        }

        let total = out.n as usize;
        let edge = k.min(total);
        let mut head = concat(&self.head, &next.head);
        head.truncate(edge);
        out.head = head;
        let tail = concat(&self.ring, &next.ring);
        out.ring = tail.slice(tail.len() - edge, edge);
        out
    }

    /// The coefficient `a_k` with uncertainty `1/sqrt(N)`.
    pub fn autocorr(&self) -> Result<Estimate> {
        let needed = self.lag as u64 + 2;
        if self.n < needed {
            return Err(Error::InsufficientData {
                needed,
                got: self.n,
            });
        }
        if self.ones == 0 || self.ones == self.n {
            return Err(Error::Degenerate(
                "constant sequence has zero variance; autocorrelation is undefined".into(),
            ));
        }
        // Both sums scaled by N^2 are exact integers.
        let n = self.n as i128;
        let ones = self.ones as i128;
        let span = n - self.lag as i128;
        let head = self.sum_head as i128;
        let tail = self.sum_tail as i128;
        let prod = self.sum_prod as i128;
        let num = n * n * prod - n * ones * (head + tail) + span * ones * ones;
        let den = n * n * head - 2 * n * ones * head + span * ones * ones;
        if den == 0 {
            return Err(Error::Degenerate(
                "leading bits carry no variance about the mean".into(),
            ));
        }
        Ok(Estimate {
            value: num as f64 / den as f64,
            sigma: 1.0 / (self.n as f64).sqrt(),
        })
    }
}

/// Lag-`k` serial autocorrelation of a whole sequence.
pub fn autocorr(seq: &BitSequence, lag: usize) -> Result<Estimate> {
    LagAccumulator::from_bits(seq, lag)?.autocorr()
}
