//! Simulated experiments: outcome sampling, maximum-likelihood estimation,
//! covariance studies, merit invariance under local unitaries, and the search
//! for probes whose QFI beats the maximally entangled one.

mod mle;
mod sampling;
mod search;
mod study;

pub use mle::{check_identifiable, log_likelihood, mle, mle_with, MleConfig, MleResult};
pub use sampling::{check_distribution, derive_seed, sample_outcomes};
pub use search::{
    counterexample_search, decode_amplitudes, encode_amplitudes, QfiAtIdentity, SearchReport,
    WITNESS_MARGIN,
};
pub use study::{
    covariance_study, invariance_sweep, sample_covariance, EstimationReport, InvarianceReport,
};

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;
use crate::serialize;

/// Write a report as JSON with 17 significant digits.
pub fn write_report<T: Serialize>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize::to_string(report)?)?;
    Ok(())
}

pub fn read_report<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    serialize::from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_report_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("search.json");
        let r = counterexample_search(3, 20, 1).unwrap();
        write_report(&r, &path).unwrap();
        let back: SearchReport = read_report(&path).unwrap();
        assert_eq!(back, r);
    }
}
