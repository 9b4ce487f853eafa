use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mle::{check_identifiable, mle_with, MleConfig};
use super::sampling::{derive_seed, sample_outcomes};
use crate::channel_model::ProbeFamily;
use crate::error::{Error, Result};
use crate::fisher;
use crate::linalg::{self, RMat};
use crate::povm::Povm;

/// Repeated sample-then-estimate runs at a fixed true parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub theta0: Vec<f64>,
    /// One estimate per repetition, in repetition order.
    pub estimates: Vec<Vec<f64>>,
    /// Shots per repetition.
    pub n: u64,
    pub reps: usize,
    /// Sample covariance of the estimates (normalized by `reps - 1`).
    pub covariance: Vec<Vec<f64>>,
    /// `I(θ0)^{-1} / N`.
    pub predicted: Vec<Vec<f64>>,
    /// `tr(V) · N / tr(I^{-1})`.
    pub trace_ratio: f64,
    /// Smallest eigenvalue of `N V - I^{-1}`.
    pub crb_gap_min_eigenvalue: f64,
    pub seed: u64,
}

fn rows(m: &RMat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Unbiased sample covariance of row vectors.
pub fn sample_covariance(samples: &[Vec<f64>]) -> Result<RMat> {
    let reps = samples.len();
    if reps < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let p = samples[0].len();
    let mut mean = vec![0.0; p];
    for s in samples {
        for a in 0..p {
            mean[a] += s[a] / reps as f64;
        }
    }
    let mut cov = RMat::zeros(p, p);
    for s in samples {
        for a in 0..p {
            for b in 0..p {
                cov[(a, b)] += (s[a] - mean[a]) * (s[b] - mean[b]);
            }
        }
    }
    Ok(cov / (reps - 1) as f64)
}

/// Sample `N` outcomes at `θ0`, estimate, repeat `reps` times, and compare the
/// spread of the estimates with the Cramér-Rao prediction `I(θ0)^{-1}/N`.
///
/// Repetition `r` uses the seed stream `derive_seed(seed, r)`, so the report
/// does not depend on how repetitions are scheduled across threads.
pub fn covariance_study(
    family: &ProbeFamily,
    theta0: &[f64],
    povm: &Povm,
    n: u64,
    reps: usize,
    seed: u64,
) -> Result<EstimationReport> {
    if reps < 2 {
        return Err(Error::InvalidArgument(format!(
            "need reps >= 2, got {reps}"
        )));
    }
    let config = MleConfig::default();
    let fi = check_identifiable(family, povm, theta0, config.identifiability)?;
    let fi_inv = fi.inverse(family.tolerances())?;
    let probs = family.probabilities(theta0, povm)?;

    let estimates = (0..reps)
        .into_par_iter()
        .map(|r| {
            let counts: Vec<f64> = sample_outcomes(&probs, n, derive_seed(seed, r as u64))?
                .into_iter()
                .map(|k| k as f64)
                .collect();
            mle_with(&counts, family, povm, theta0, &config).map(|m| m.theta)
        })
        .collect::<Result<Vec<_>>>()?;

    let cov = sample_covariance(&estimates)?;
    let nf = n as f64;
    let trace_ratio = cov.trace() * nf / fi_inv.trace();
    let crb_gap = linalg::min_eigenvalue_symmetric(&(&cov * nf - &fi_inv));
    Ok(EstimationReport {
        theta0: theta0.to_vec(),
        estimates,
        n,
        reps,
        covariance: rows(&cov),
        predicted: rows(&(&fi_inv / nf)),
        trace_ratio,
        crb_gap_min_eigenvalue: crb_gap,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub merit0: f64,
    pub merit1: f64,
    pub difference: f64,
}

/// Merit of `M` at `θ0` against the merit of `(V⊗1) M (V⊗1)^dagger` at `θ1`,
/// with `V = U(θ1) U(θ0)^dagger`.
pub fn invariance_sweep(
    family: &ProbeFamily,
    theta0: &[f64],
    theta1: &[f64],
    povm: &Povm,
) -> Result<InvarianceReport> {
    let tol = family.tolerances();
    let v = family.unitary(theta1)? * family.unitary(theta0)?.adjoint();
    let moved = povm.conjugate_first(&v)?;
    let (_, _, r0) = fisher::evaluate(&family.output_model(theta0)?, povm, tol)?;
    let (_, _, r1) = fisher::evaluate(&family.output_model(theta1)?, &moved, tol)?;
    Ok(InvarianceReport {
        merit0: r0.merit,
        merit1: r1.merit,
        difference: (r0.merit - r1.merit).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{bell_basis, random_product_povm, reduced_bell, time_shared};

    const THETA0: [f64; 3] = [0.6, 1.0, 0.8];

    #[test]
    fn covariance_of_known_samples() {
        let s = vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 2.0],
            vec![0.0, -2.0],
        ];
        let c = sample_covariance(&s).unwrap();
        assert!((c[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((c[(1, 1)] - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(c[(0, 1)], 0.0);
        assert!(sample_covariance(&s[..1]).is_err());
    }

    #[test]
    fn reduced_bell_alone_is_rejected() {
        let fam = ProbeFamily::su2_singlet();
        let r = covariance_study(&fam, &THETA0, &reduced_bell(1).unwrap(), 1000, 10, 1);
        assert!(matches!(r, Err(Error::NonIdentifiable { .. })));
    }

    #[test]
    fn time_shared_reduced_bell_saturates_bound() {
        let fam = ProbeFamily::su2_singlet();
        let parts: Vec<Povm> = (1..=3).map(|k| reduced_bell(k).unwrap()).collect();
        let povm = time_shared(&parts, &[1.0 / 3.0; 3]).unwrap();
        let r = covariance_study(&fam, &THETA0, &povm, 10_000, 200, 2024).unwrap();
        assert!((0.8..=1.25).contains(&r.trace_ratio), "{}", r.trace_ratio);
    }

    #[test]
    fn study_is_reproducible() {
        let fam = ProbeFamily::su2_singlet();
        let a = covariance_study(&fam, &THETA0, &bell_basis(), 1000, 8, 5).unwrap();
        let b = covariance_study(&fam, &THETA0, &bell_basis(), 1000, 8, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.estimates.len(), 8);
        let c = RMat::from_fn(3, 3, |i, j| a.covariance[i][j]);
        assert!(linalg::min_eigenvalue_symmetric(&c) > -1e-15);
        assert_eq!(c, c.transpose());
    }

    #[test]
    fn invariance_for_bell_and_product() {
        let fam = ProbeFamily::su2_singlet();
        let t1 = [1.1, 2.0, -0.4];
        let r = invariance_sweep(&fam, &THETA0, &t1, &bell_basis()).unwrap();
        assert!((r.merit0 - 3.0).abs() < 1e-9 && (r.merit1 - 3.0).abs() < 1e-9);
        let prod = random_product_povm(2, 2, 8).unwrap();
        let r = invariance_sweep(&fam, &THETA0, &t1, &prod).unwrap();
        assert!((r.merit0 - 1.0).abs() < 1e-9 && r.difference < 1e-9);
        assert!(invariance_sweep(&fam, &THETA0, &[0.0, 1.0, 1.0], &prod).is_err());
    }
}
