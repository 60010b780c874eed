//! Seeded, reproducible bit sources.
//!
//! Every source draws from a [`SplitMix64`] stream (except the xorshift
//! demonstration, which *is* its own generator), so a given
//! [`SourceConfig`] always yields the same bits. A live source keeps all of
//! its state between calls: drawing `n1` bits and then `n2` bits yields
//! exactly the first `n1 + n2` bits of a fresh source with the same config.

use std::fmt;

use crate::bitstream::BitSequence;
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 base generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform real in `[0, 1)` from the top 53 bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Two-state chain `P(1 | previous bit)` with its stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    pub p1_given_0: f64,
    pub p1_given_1: f64,
    pub pi0: f64,
    pub pi1: f64,
}

/// Lowest admissible lag-1 autocorrelation for a stationary binary chain with
/// bias `b`.
pub fn min_markov_a1(b: f64) -> f64 {
    -(1.0 - b.abs()) / (1.0 + b.abs())
}

pub fn check_markov_params(b: f64, a1: f64) -> Result<()> {
    if !b.is_finite() || b.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "bias must satisfy |b| < 1, got {b}"
        )));
    }
    let lo = min_markov_a1(b);
    if !a1.is_finite() || a1 < lo || a1 > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "a1 = {a1} is not admissible for bias {b}: a1 must lie in [{lo:.6}, 1]"
        )));
    }
    Ok(())
}

/// Chain with marginal `P(1) = (1 + b) / 2` and `a_k = a1^k`.
///
/// The non-unit eigenvalue of the transition matrix is `a1`, which is what
/// produces the geometric autocorrelation decay.
pub fn markov_transition_matrix(b: f64, a1: f64) -> Result<TransitionMatrix> {
    check_markov_params(b, a1)?;
    let p1 = (1.0 + b) / 2.0;
    let p0 = (1.0 - b) / 2.0;
    Ok(TransitionMatrix {
        p1_given_0: (p1 * (1.0 - a1)).clamp(0.0, 1.0),
        p1_given_1: (p1 + a1 * p0).clamp(0.0, 1.0),
        pi0: p0,
        pi1: p1,
    })
}

/// What happens to a photon that reaches a detector during its dead time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeadTimePolicy {
    /// The photon is registered by the other detector if that one is live,
    /// and lost otherwise.
    #[default]
    Reroute,
    /// The photon is lost.
    Lose,
}

impl std::str::FromStr for DeadTimePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reroute" => Ok(Self::Reroute),
            "lose" => Ok(Self::Lose),
            other => Err(Error::InvalidParameter(format!(
                "unknown dead-time policy {other:?} (expected reroute or lose)"
            ))),
        }
    }
}

/// Generator parameterizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    /// Fair independent bits.
    Ideal,
    /// Independent bits with `P(1) = p`.
    Bernoulli { p: f64 },
    /// Beamsplitter with bias `b`, i.e. independent bits with `P(1) = (1 + b) / 2`.
    UnbalancedSplitter { b: f64 },
    /// Stationary two-state chain with bias `b` and lag-1 autocorrelation `a1`.
    Markov { b: f64, a1: f64 },
    /// Two-detector beamsplitter fed by Poisson photons with mean spacing
    /// `tau`; each detector is blind for `tau_d` after a detection.
    DeadTime {
        tau: f64,
        tau_d: f64,
        policy: DeadTimePolicy,
    },
    /// Deterministic xorshift64 stream seeded by the config seed.
    Xorshift64,
}

impl SourceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SourceKind::Ideal => "ideal",
            SourceKind::Bernoulli { .. } => "bernoulli",
            SourceKind::UnbalancedSplitter { .. } => "splitter",
            SourceKind::Markov { .. } => "markov",
            SourceKind::DeadTime { .. } => "deadtime",
            SourceKind::Xorshift64 => "xorshift64",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceConfig {
    pub kind: SourceKind,
    pub seed: u64,
}

impl SourceConfig {
    pub fn new(kind: SourceKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SourceKind::Ideal => Ok(()),
            SourceKind::Bernoulli { p } => {
                if (0.0..=1.0).contains(&p) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "probability p must lie in [0, 1], got {p}"
                    )))
                }
            }
            SourceKind::UnbalancedSplitter { b } => {
                if b.is_finite() && b.abs() < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "bias must satisfy |b| < 1, got {b}"
                    )))
                }
            }
            SourceKind::Markov { b, a1 } => check_markov_params(b, a1),
            SourceKind::DeadTime { tau, tau_d, .. } => check_deadtime_params(tau, tau_d),
            SourceKind::Xorshift64 => {
                if self.seed == 0 {
                    Err(Error::InvalidParameter(
                        "xorshift64 requires a nonzero seed".into(),
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// A live source positioned at the start of its stream.
    pub fn build(&self) -> Result<Source> {
        self.validate()?;
        let rng = SplitMix64::new(self.seed);
        Ok(match self.kind {
            SourceKind::Ideal => Source::Bernoulli(BernoulliSource::new(0.5, rng)),
            SourceKind::Bernoulli { p } => Source::Bernoulli(BernoulliSource::new(p, rng)),
            SourceKind::UnbalancedSplitter { b } => {
                Source::Bernoulli(BernoulliSource::new((1.0 + b) / 2.0, rng))
            }
            SourceKind::Markov { b, a1 } => {
                Source::Markov(MarkovSource::new(markov_transition_matrix(b, a1)?, rng))
            }
            SourceKind::DeadTime { tau, tau_d, policy } => {
                Source::DeadTime(DeadTimeSource::new(tau, tau_d, policy, rng))
            }
            SourceKind::Xorshift64 => Source::Xorshift64(Xorshift64Source::new(self.seed)?),
        })
    }
}

impl fmt::Display for SourceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SourceKind::Ideal | SourceKind::Xorshift64 => write!(f, "{}", self.kind.name())?,
            SourceKind::Bernoulli { p } => write!(f, "bernoulli(p={p})")?,
            SourceKind::UnbalancedSplitter { b } => write!(f, "splitter(b={b})")?,
            SourceKind::Markov { b, a1 } => write!(f, "markov(b={b}, a1={a1})")?,
            SourceKind::DeadTime { tau, tau_d, .. } => {
                write!(f, "deadtime(tau={tau}, tau_d={tau_d})")?
            }
        }
        write!(f, " seed={}", self.seed)
    }
}

fn check_deadtime_params(tau: f64, tau_d: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mean inter-arrival time tau must be positive, got {tau}"
        )));
    }
    if !(tau_d.is_finite() && tau_d >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dead time must be non-negative, got {tau_d}"
        )));
    }
    Ok(())
}

/// Anything that emits bits one at a time.
pub trait BitSource {
    fn next_bit(&mut self) -> bool;

    /// Draws the next `n` bits.
    fn take_bits(&mut self, n: usize) -> BitSequence {
        let mut out = BitSequence::with_capacity(n);
        for _ in 0..n {
            out.push(self.next_bit());
        }
        out
    }
}

/// Independent bits: `1` iff a fresh uniform is below `p`.
#[derive(Debug, Clone)]
pub struct BernoulliSource {
    p: f64,
    rng: SplitMix64,
}

impl BernoulliSource {
    pub fn new(p: f64, rng: SplitMix64) -> Self {
        Self { p, rng }
    }
}

impl BitSource for BernoulliSource {
    #[inline]
    fn next_bit(&mut self) -> bool {
        self.rng.next_f64() < self.p
    }
}

#[derive(Debug, Clone)]
pub struct MarkovSource {
    matrix: TransitionMatrix,
    rng: SplitMix64,
    prev: Option<bool>,
}

impl MarkovSource {
    pub fn new(matrix: TransitionMatrix, rng: SplitMix64) -> Self {
        Self {
            matrix,
            rng,
            prev: None,
        }
    }
}

impl BitSource for MarkovSource {
    #[inline]
    fn next_bit(&mut self) -> bool {
        let p1 = match self.prev {
            None => self.matrix.pi1,
            Some(false) => self.matrix.p1_given_0,
            Some(true) => self.matrix.p1_given_1,
        };
        let bit = self.rng.next_f64() < p1;
        self.prev = Some(bit);
        bit
    }
}

/// Event-driven two-detector simulation.
///
/// Per photon: one uniform for the exponential waiting time, then one uniform
/// for the path (`< 0.5` means detector 1). Both detectors start live.
#[derive(Debug, Clone)]
pub struct DeadTimeSource {
    tau: f64,
    tau_d: f64,
    policy: DeadTimePolicy,
    rng: SplitMix64,
    now: f64,
    dead_until: [f64; 2],
}

impl DeadTimeSource {
    pub fn new(tau: f64, tau_d: f64, policy: DeadTimePolicy, rng: SplitMix64) -> Self {
        Self {
            tau,
            tau_d,
            policy,
            rng,
            now: 0.0,
            dead_until: [f64::NEG_INFINITY; 2],
        }
    }
}

impl BitSource for DeadTimeSource {
    fn next_bit(&mut self) -> bool {
        loop {
            let u = self.rng.next_f64();
            self.now += -self.tau * (1.0 - u).ln();
            let mut detector = usize::from(self.rng.next_f64() < 0.5);
            if self.dead_until[detector] > self.now {
                match self.policy {
                    DeadTimePolicy::Lose => continue,
                    DeadTimePolicy::Reroute => {
                        let other = 1 - detector;
                        if self.dead_until[other] > self.now {
                            continue;
                        }
                        detector = other;
                    }
                }
            }
            self.dead_until[detector] = self.now + self.tau_d;
            return detector == 1;
        }
    }
}

/// `s ^= s << 13; s ^= s >> 7; s ^= s << 17`, emitting all 64 state bits of
/// each update, lowest first.
#[derive(Debug, Clone)]
pub struct Xorshift64Source {
    state: u64,
    word: u64,
    remaining: u32,
}

impl Xorshift64Source {
    pub fn new(seed: u64) -> Result<Self> {
        if seed == 0 {
            return Err(Error::InvalidParameter(
                "xorshift64 requires a nonzero seed".into(),
            ));
        }
        Ok(Self {
            state: seed,
            word: 0,
            remaining: 0,
        })
    }

    #[inline]
    fn step(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        self.state = s;
        s
    }
}

impl BitSource for Xorshift64Source {
    #[inline]
    fn next_bit(&mut self) -> bool {
        if self.remaining == 0 {
            self.word = self.step();
            self.remaining = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.remaining -= 1;
        bit
    }

    fn take_bits(&mut self, n: usize) -> BitSequence {
        let mut out = BitSequence::with_capacity(n);
        let mut left = n;
        while left > 0 && self.remaining > 0 {
            out.push(self.next_bit());
            left -= 1;
        }
        while left >= 64 {
            let w = self.step();
            out.push_word(w, 64);
            left -= 64;
        }
        while left > 0 {
            out.push(self.next_bit());
            left -= 1;
        }
        out
    }
}

/// A live source of any kind.
#[derive(Debug, Clone)]
pub enum Source {
    Bernoulli(BernoulliSource),
    Markov(MarkovSource),
    DeadTime(DeadTimeSource),
    Xorshift64(Xorshift64Source),
}

impl BitSource for Source {
    #[inline]
    fn next_bit(&mut self) -> bool {
        match self {
            Source::Bernoulli(s) => s.next_bit(),
            Source::Markov(s) => s.next_bit(),
            Source::DeadTime(s) => s.next_bit(),
            Source::Xorshift64(s) => s.next_bit(),
        }
    }

    fn take_bits(&mut self, n: usize) -> BitSequence {
        match self {
            Source::Bernoulli(s) => s.take_bits(n),
            Source::Markov(s) => s.take_bits(n),
            Source::DeadTime(s) => s.take_bits(n),
            Source::Xorshift64(s) => s.take_bits(n),
        }
    }
}

/// `n` bits from a fresh source.
pub fn generate(config: &SourceConfig, n: usize) -> Result<BitSequence> {
    Ok(config.build()?.take_bits(n))
}

/// Dead-time simulation with the default (reroute) policy.
pub fn simulate_deadtime(tau: f64, tau_d: f64, n: usize, seed: u64) -> Result<BitSequence> {
    let kind = SourceKind::DeadTime {
        tau,
        tau_d,
        policy: DeadTimePolicy::Reroute,
    };
    generate(&SourceConfig::new(kind, seed), n)
}

pub fn xorshift64_bits(seed: u64, n: usize) -> Result<BitSequence> {
    Ok(Xorshift64Source::new(seed)?.take_bits(n))
}

/// Upper bound on the entropy per emitted bit of a generator fully determined
/// by a `seed_bits`-bit seed, over `emitted` bits.
pub fn seeded_entropy_bound(seed_bits: u32, emitted: u64) -> f64 {
    (seed_bits as f64 / emitted as f64).min(1.0)
}
