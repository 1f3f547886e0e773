//! Random mappings of `[n]`: cycle/tree/crown structure, exact small-n
//! counts, critical Poisson branching-process references, asymptotic
//! constants, and a reproducible Monte Carlo experiment runner.

pub mod asymptotics;
pub mod branching;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod mapping;
pub mod stats;
pub mod stream;

pub use error::{Error, Result};
pub use mapping::{
    classify, crown_report, decompose, sample_uniform, ClassificationFlags, CrownAnalyzer, CrownReport, Decomposition,
    Mapping,
};
