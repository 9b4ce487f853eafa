use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::derive_seed;
use crate::channel_model::{output_model, BipartiteState};
use crate::error::{Error, Result};
use crate::fisher;
use crate::linalg::{c, CMat};
use crate::su_algebra::{gellmann_basis, unitary_exp_with_derivatives};

/// An eigenvalue must exceed `4/d` by more than this to count as a witness.
pub const WITNESS_MARGIN: f64 = 1e-6;

const STEPS: [f64; 5] = [0.1, 0.03, 0.01, 0.003, 0.001];
const MAX_SWEEPS_PER_STEP: usize = 50;

/// Outcome of a search for a probe whose QFI at `U = 1` is not dominated by
/// the maximally entangled one, `(4/d)·1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub d: usize,
    pub trials: usize,
    pub seed: u64,
    /// Best probe coefficients `R[k][l] = [re, im]`.
    pub best_r: Vec<Vec<[f64; 2]>>,
    /// Its QFI in the exponential chart at `θ = 0`.
    pub qfi: Vec<Vec<f64>>,
    pub max_eigenvalue: f64,
    /// `4/d`.
    pub reference: f64,
    /// `max_eigenvalue - 4/d`.
    pub excess: f64,
    /// `excess > WITNESS_MARGIN`.
    pub found: bool,
}

/// QFI at `θ = 0` of the exponential chart, for probes of one dimension.
pub struct QfiAtIdentity {
    u: CMat,
    du: Vec<CMat>,
}

impl QfiAtIdentity {
    pub fn new(d: usize) -> Result<Self> {
        let basis = gellmann_basis(d)?;
        let zero = vec![0.0; basis.len()];
        let (u, du) = unitary_exp_with_derivatives(&basis, &zero)?;
        Ok(Self { u, du })
    }

    pub fn qfi(&self, input: &BipartiteState) -> Result<fisher::FisherMatrix> {
        Ok(fisher::qfi_pure(&output_model(&self.u, &self.du, input)?))
    }

    pub fn max_eigenvalue(&self, input: &BipartiteState) -> Result<f64> {
        Ok(self
            .qfi(input)?
            .eigenvalues()
            .last()
            .copied()
            .unwrap_or(0.0))
    }
}

pub fn encode_amplitudes(r: &CMat) -> Vec<Vec<[f64; 2]>> {
    r.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn decode_amplitudes(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse(
            "amplitude matrix must be square and non-empty".into(),
        ));
    }
    Ok(CMat::from_fn(d, d, |k, l| c(rows[k][l][0], rows[k][l][1])))
}

/// Coordinate-wise ascent on `λ_max(H)` over the real and imaginary parts of
/// `R`, with the step annealed from 0.1 down to 1e-3.
fn hill_climb(eval: &QfiAtIdentity, start: &BipartiteState) -> Result<(BipartiteState, f64)> {
    let d = start.dim();
    let mut best = start.clone();
    let mut best_value = eval.max_eigenvalue(&best)?;
    for &step in &STEPS {
        for _ in 0..MAX_SWEEPS_PER_STEP {
            let mut improved = false;
            for k in 0..d * d {
                for part in 0..2 {
                    for sign in [1.0, -1.0] {
                        let mut r = best.amplitudes().clone();
                        let delta = if part == 0 {
                            c(sign * step, 0.0)
                        } else {
                            c(0.0, sign * step)
                        };
                        r[(k / d, k % d)] += delta;
                        let Ok(candidate) = BipartiteState::normalize(r) else {
                            continue;
                        };
                        let value = eval.max_eigenvalue(&candidate)?;
                        if value > best_value {
                            best = candidate;
                            best_value = value;
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    Ok((best, best_value))
}

/// Random Gaussian probes followed by a hill-climb on the best one.
///
/// Trial `t` draws its probe from `derive_seed(seed, t)`; ties keep the lowest
/// trial index, so the report is independent of thread scheduling.
pub fn counterexample_search(d: usize, trials: usize, seed: u64) -> Result<SearchReport> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let eval = QfiAtIdentity::new(d)?;
    let scored = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, t as u64));
            let state = BipartiteState::random(d, &mut rng);
            eval.max_eigenvalue(&state).map(|v| (t, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let (best_trial, _) =
        scored.iter().copied().fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, best_trial as u64));
    let start = BipartiteState::random(d, &mut rng);
    let (best, value) = hill_climb(&eval, &start)?;

    let h = eval.qfi(&best)?;
    let reference = 4.0 / d as f64;
    let excess = value - reference;
    Ok(SearchReport {
        d,
        trials,
        seed,
        best_r: encode_amplitudes(best.amplitudes()),
        qfi: h
            .entries()
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        max_eigenvalue: value,
        reference,
        excess,
        found: excess > WITNESS_MARGIN,
    })
}
