//! Closed-form values of the measured quantities.
//!
//! The deviation from randomness of a source is `D = 1 - H(x | past)`, the
//! information per bit that the past already fixes. For a stationary
//! two-state Markov source the conditional entropy only depends on the
//! previous bit, so everything here is exact for the Markov family; the
//! quadratic forms (`a1^2 / (2 ln 2)`, `(a1^2 + b^2) / (2 ln 2)`) are their
//! small-parameter expansions.

use std::f64::consts::LN_2;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::sources::{markov_transition_matrix, SourceConfig, SourceKind};

/// `x * log2(x)` with `0 log 0 = 0`.
#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy of a biased coin, in bits.
pub fn binary_entropy(q: f64) -> f64 {
    -xlog2x(q) - xlog2x(1.0 - q)
}

/// Lag-1 autocorrelation of a dead-time limited two-detector generator.
pub fn deadtime_a1(tau: f64, tau_d: f64) -> f64 {
    (-tau_d / tau).exp() - 1.0
}

/// Mutual information between neighbouring bits of an unbiased Markov source.
pub fn mi_exact_unbiased(a1: f64) -> f64 {
    0.5 * xlog2x(1.0 + a1) + 0.5 * xlog2x(1.0 - a1)
}

/// Leading Taylor term of [`mi_exact_unbiased`].
pub fn mi_parabolic(a1: f64) -> f64 {
    a1 * a1 / (2.0 * LN_2)
}

/// Quadratic approximation of the deviation of a Markov source.
pub fn deviation_approx(b: f64, a1: f64) -> f64 {
    (a1 * a1 + b * b) / (2.0 * LN_2)
}

/// Statistical uncertainty of a deviation estimated from `n` bits.
pub fn deviation_sigma(d: f64, n: u64) -> f64 {
    (2.0 * d.max(0.0) / (n as f64 * LN_2)).sqrt()
}

/// Longest sequence before a deviation becomes statistically detectable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NMax {
    Finite(f64),
    Unbounded,
}

impl NMax {
    pub fn as_f64(self) -> f64 {
        match self {
            NMax::Finite(v) => v,
            NMax::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for NMax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NMax::Finite(v) => write!(f, "{v}"),
            NMax::Unbounded => f.write_str("unbounded"),
        }
    }
}

impl Serialize for NMax {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NMax::Finite(v) => serializer.serialize_f64(*v),
            NMax::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for NMax {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(NMax::Finite(v)),
            Repr::Str(s) if s == "unbounded" => Ok(NMax::Unbounded),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"unbounded\", got {s:?}"
            ))),
        }
    }
}

pub fn n_max(d: f64) -> NMax {
    if d > 0.0 {
        NMax::Finite(2.0 / (LN_2 * d))
    } else {
        NMax::Unbounded
    }
}

/// Expected values of the estimator outputs for a source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub bias: f64,
    pub a1: f64,
    /// Bits shared between a bit and its past.
    pub mutual_info: f64,
    /// Bits of fresh information per bit given the past.
    pub cond_entropy: f64,
    pub deviation_exact: f64,
    pub deviation_approx: f64,
}

pub fn markov_prediction(b: f64, a1: f64) -> Result<ModelPrediction> {
    let m = markov_transition_matrix(b, a1)?;
    let cond_entropy = m.pi0 * binary_entropy(m.p1_given_0) + m.pi1 * binary_entropy(m.p1_given_1);
    Ok(ModelPrediction {
        bias: b,
        a1,
        mutual_info: (binary_entropy(m.pi1) - cond_entropy).max(0.0),
        cond_entropy,
        deviation_exact: 1.0 - cond_entropy,
        deviation_approx: deviation_approx(b, a1),
    })
}

fn independent_prediction(p: f64) -> ModelPrediction {
    let b = 2.0 * p - 1.0;
    let h = binary_entropy(p);
    ModelPrediction {
        bias: b,
        a1: 0.0,
        mutual_info: 0.0,
        cond_entropy: h,
        deviation_exact: 1.0 - h,
        deviation_approx: deviation_approx(b, 0.0),
    }
}

/// Prediction for any configured source.
///
/// The xorshift stream is fully determined by its seed, so given its past
/// the next bit carries no information at all: its exact deviation is 1 even
/// though its low-order statistics (and hence the quadratic approximation)
/// are those of a fair coin.
pub fn predict(config: &SourceConfig) -> Result<ModelPrediction> {
    config.validate()?;
    Ok(match config.kind {
        SourceKind::Ideal => independent_prediction(0.5),
        SourceKind::Bernoulli { p } => independent_prediction(p),
        SourceKind::UnbalancedSplitter { b } => independent_prediction((1.0 + b) / 2.0),
        SourceKind::Markov { b, a1 } => markov_prediction(b, a1)?,
        SourceKind::DeadTime { tau, tau_d, .. } => markov_prediction(0.0, deadtime_a1(tau, tau_d))?,
        SourceKind::Xorshift64 => ModelPrediction {
            bias: 0.0,
            a1: 0.0,
            mutual_info: 1.0,
            cond_entropy: 0.0,
            deviation_exact: 1.0,
            deviation_approx: 0.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::DeadTimePolicy;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        // direct evaluation: -0.55 log2 0.55 - 0.45 log2 0.45
        assert!(close(binary_entropy(0.55), 0.992_774_453, 1e-9));
        // Taylor cross-check at b = 0.1: 1 - b^2 / (2 ln 2) = 0.992786
        assert!(close(binary_entropy(0.55), 1.0 - 0.01 / (2.0 * LN_2), 2e-5));
    }

    #[test]
    fn deadtime_a1_values() {
        assert_eq!(deadtime_a1(1000.0, 0.0), 0.0);
        assert!(close(deadtime_a1(1000.0, 40.0), -0.039_210_560, 1e-9));
        assert!(close(deadtime_a1(1.0, 1e6), -1.0, 1e-15));
    }

    #[test]
    fn mi_values() {
        assert_eq!(mi_exact_unbiased(0.0), 0.0);
        assert_eq!(mi_exact_unbiased(1.0), 1.0);
        assert_eq!(mi_exact_unbiased(-1.0), 1.0);
        assert!(close(mi_exact_unbiased(0.1), 0.007_225_546, 1e-9));
        assert_eq!(mi_parabolic(0.0), 0.0);
        assert!(close(mi_parabolic(0.1), 0.007_213_475, 1e-9));
        assert!(close(mi_parabolic(0.5), 0.180_336_880, 1e-9));
        assert!(close(mi_exact_unbiased(0.5), 0.188_721_876, 1e-9));
    }

    #[test]
    fn mi_is_one_minus_entropy_of_agreement() {
        for i in -100..=100 {
            let a1 = i as f64 / 100.0;
            let via_entropy = 1.0 - binary_entropy((1.0 + a1) / 2.0);
            assert!(close(mi_exact_unbiased(a1), via_entropy, 1e-14), "a1={a1}");
        }
    }

    #[test]
    fn markov_prediction_examples() {
        let ideal = markov_prediction(0.0, 0.0).unwrap();
        assert_eq!(ideal.deviation_exact, 0.0);
        assert_eq!(ideal.mutual_info, 0.0);

        let biased = markov_prediction(0.1, 0.0).unwrap();
        assert!(close(biased.deviation_exact, 0.007_225_546, 1e-9));
        assert!(biased.mutual_info.abs() < 1e-15);

        let both = markov_prediction(0.1, 0.1).unwrap();
        assert!(close(both.deviation_exact, 0.014_442_0, 5e-7));
        assert!(close(both.deviation_approx, 0.014_427_0, 5e-7));
        let rel = (both.deviation_approx - both.deviation_exact).abs() / both.deviation_exact;
        assert!(close(rel, 0.001_059_9, 1e-6), "{rel}");
    }

    #[test]
    fn markov_prediction_rejects_invalid() {
        assert!(markov_prediction(0.5, -0.9).is_err());
    }

    #[test]
    fn chain_rule_and_symmetries() {
        for bi in -9..=9 {
            for ai in -9..=9 {
                let (b, a1) = (bi as f64 / 10.0, ai as f64 / 10.0);
                if a1 < crate::sources::min_markov_a1(b) {
                    continue;
                }
                let p = markov_prediction(b, a1).unwrap();
                let marginal = binary_entropy((1.0 + b) / 2.0);
                assert!(close(marginal, p.cond_entropy + p.mutual_info, 1e-12));
                assert!((0.0..=1.0).contains(&p.cond_entropy));
                assert!(p.mutual_info >= 0.0);
                let mirrored = markov_prediction(-b, a1).unwrap();
                assert!(close(p.deviation_exact, mirrored.deviation_exact, 1e-14));
            }
        }
        for ai in 0..=10 {
            let a1 = ai as f64 / 10.0;
            let pos = markov_prediction(0.0, a1).unwrap();
            let neg = markov_prediction(0.0, -a1).unwrap();
            assert!(close(pos.deviation_exact, neg.deviation_exact, 1e-14));
            assert!(close(pos.mutual_info, mi_exact_unbiased(a1), 1e-12));
        }
    }

    #[test]
    fn parabolic_remainder_is_quartic() {
        for i in -500..=500 {
            let a1 = i as f64 / 1000.0;
            let gap = (mi_parabolic(a1) - mi_exact_unbiased(a1)).abs();
            assert!(gap <= a1.powi(4), "a1={a1} gap={gap}");
        }
    }

    #[test]
    fn deviation_sigma_values() {
        assert_eq!(deviation_sigma(0.0, 1000), 0.0);
        assert!(close(deviation_sigma(0.001_442_6, 10_000_000), 2.04e-5, 5e-8));
    }

    #[test]
    fn deviation_sigma_matches_error_propagation() {
        // central finite differences of the quadratic deviation
        let n = 1_000_000u64;
        let h = 1e-6;
        for &(b, a1) in &[(0.02, 0.04), (0.1, -0.05), (0.0, 0.1), (0.07, 0.0)] {
            let d_da = (deviation_approx(b, a1 + h) - deviation_approx(b, a1 - h)) / (2.0 * h);
            let d_db = (deviation_approx(b + h, a1) - deviation_approx(b - h, a1)) / (2.0 * h);
            let sigma = 1.0 / (n as f64).sqrt();
            let propagated = ((d_da * sigma).powi(2) + (d_db * sigma).powi(2)).sqrt();
            let closed = deviation_sigma(deviation_approx(b, a1), n);
            assert!((propagated - closed).abs() / closed < 1e-6);
        }
    }

    #[test]
    fn n_max_values() {
        let NMax::Finite(v) = n_max(1e-18) else { panic!() };
        assert!((v - 2.885e18).abs() / 2.885e18 < 1e-3);
        let NMax::Finite(v) = n_max(1.0) else { panic!() };
        assert!(close(v, 2.885_390_082, 1e-9));
        assert_eq!(n_max(0.0), NMax::Unbounded);
    }

    #[test]
    fn n_max_json_forms() {
        assert_eq!(serde_json::to_string(&NMax::Unbounded).unwrap(), "\"unbounded\"");
        assert_eq!(serde_json::to_string(&NMax::Finite(2.5)).unwrap(), "2.5");
        let back: NMax = serde_json::from_str("\"unbounded\"").unwrap();
        assert_eq!(back, NMax::Unbounded);
        let back: NMax = serde_json::from_str("12.0").unwrap();
        assert_eq!(back, NMax::Finite(12.0));
        assert!(serde_json::from_str::<NMax>("\"lots\"").is_err());
    }

    #[test]
    fn predict_per_source() {
        let ideal = predict(&SourceConfig::new(SourceKind::Ideal, 0)).unwrap();
        assert_eq!(ideal.deviation_exact, 0.0);
        assert_eq!(ideal.deviation_approx, 0.0);

        let dt = SourceKind::DeadTime {
            tau: 1000.0,
            tau_d: 40.0,
            policy: DeadTimePolicy::Reroute,
        };
        let p = predict(&SourceConfig::new(dt, 0)).unwrap();
        assert!(close(p.a1, -0.039_211, 1e-6));
        assert!(close(p.deviation_approx, 1.109e-3, 1e-6));

        let split = predict(&SourceConfig::new(SourceKind::UnbalancedSplitter { b: 0.1 }, 0)).unwrap();
        let markov = markov_prediction(0.1, 0.0).unwrap();
        assert!(close(split.deviation_exact, markov.deviation_exact, 1e-14));

        let xs = predict(&SourceConfig::new(SourceKind::Xorshift64, 5)).unwrap();
        assert_eq!(xs.deviation_exact, 1.0);
        assert!(predict(&SourceConfig::new(SourceKind::Xorshift64, 0)).is_err());
    }
}
