//! Simulation and measurement of deviations from randomness in bit streams.
//!
//! * [`bitstream`]: packed bit sequences and their file formats.
//! * [`sources`]: seeded generators (ideal, biased, Markov, detector dead
//!   time, xorshift).
//! * [`model`]: closed-form expectations for those generators.
//! * [`estimators`]: mergeable one-pass estimators and the analysis report.
//! * [`experiments`]: grid validations, curves and demonstrations built on
//!   the above.

pub mod bitstream;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod model;
pub mod sources;

pub use bitstream::{BitFormat, BitSequence};
pub use error::{Error, Result};
pub use estimators::{analyze, par_analyze, AnalysisReport, Analyzer, PairCounts};
pub use model::{ModelPrediction, NMax};
pub use sources::{BitSource, DeadTimePolicy, SourceConfig, SourceKind};
