//! Quantum and classical Fisher information, the merit `tr H^{-1} I`, the
//! quantum Cramér-Rao check and the pure-state achievability condition.

use serde::{Deserialize, Serialize};

use crate::channel_model::{BipartiteState, OutputModel};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat};
use crate::povm::Povm;
use crate::su_algebra::GeneratorBasis;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FisherKind {
    Quantum,
    Classical,
}

/// Real symmetric PSD `p × p` information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    entries: RMat,
    kind: FisherKind,
}

impl FisherMatrix {
    /// Symmetrizes the input.
    pub fn new(entries: RMat, kind: FisherKind) -> Self {
        let entries = (&entries + entries.transpose()) * 0.5;
        Self { entries, kind }
    }

    pub fn entries(&self) -> &RMat {
        &self.entries
    }

    pub fn kind(&self) -> FisherKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue_symmetric(&self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::symmetric_eigen(&self.entries).0
    }

    pub fn is_psd(&self, tol: &Tolerances) -> bool {
        self.min_eigenvalue() >= -tol.fisher_psd
    }

    /// Rank relative to the largest eigenvalue.
    pub fn rank(&self, rel_tol: f64) -> usize {
        linalg::numerical_rank(&self.entries, rel_tol)
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Inverse of a positive definite matrix via its eigendecomposition.
    pub fn inverse(&self, tol: &Tolerances) -> Result<RMat> {
        let min = self.min_eigenvalue();
        if min <= tol.qfi_positive_definite {
            return Err(Error::NotPositiveDefinite {
                context: format!("{:?} Fisher matrix cannot be inverted", self.kind),
                min_eigenvalue: min,
            });
        }
        Ok(linalg::symmetric_function(&self.entries, |x| 1.0 / x))
    }

    /// `Jᵀ F J`: the matrix in coordinates `θ = θ0 + J η`.
    pub fn pull_back(&self, jacobian: &RMat) -> Self {
        Self::new(jacobian.transpose() * &self.entries * jacobian, self.kind)
    }
}

/// `H_ij = Re <l_i|l_j>` for a pure output state.
pub fn qfi_pure(model: &OutputModel) -> FisherMatrix {
    let l = model.l_vectors();
    let p = l.len();
    FisherMatrix::new(
        RMat::from_fn(p, p, |i, j| linalg::inner(&l[i], &l[j]).re),
        FisherKind::Quantum,
    )
}

/// Symmetric logarithmic derivatives `λ_i` solving `ρ_i = ½(ρ λ_i + λ_i ρ)`
/// on the support of `ρ`.
pub fn sld_mixed(rho: &CMat, drho: &[CMat], tol: &Tolerances) -> Result<Vec<CMat>> {
    let n = rho.nrows();
    if let Some(bad) = drho.iter().find(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::DimensionMismatch(format!(
            "state is {n}x{n}, derivative is {}x{}",
            bad.nrows(),
            bad.ncols()
        )));
    }
    let (r, v) = linalg::hermitian_eigen(rho);
    let vd = v.adjoint();
    drho.iter()
        .map(|d| {
            let de = &vd * d * &v;
            let mut lam = CMat::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let s = r[a] + r[b];
                    if s > tol.sld_cutoff {
                        lam[(a, b)] = de[(a, b)] * c(2.0 / s, 0.0);
                    } else if de[(a, b)].norm() > tol.sld_ill_posed {
                        return Err(Error::IllPosedSld {
                            entry: de[(a, b)].norm(),
                        });
                    }
                }
            }
            Ok(&v * lam * &vd)
        })
        .collect()
}

/// `H_ij = Re tr[ρ λ_i λ_j]`.
pub fn qfi_mixed(rho: &CMat, sld: &[CMat]) -> FisherMatrix {
    let p = sld.len();
    FisherMatrix::new(
        RMat::from_fn(p, p, |i, j| {
            linalg::trace_product(rho, &(&sld[i] * &sld[j])).re
        }),
        FisherKind::Quantum,
    )
}

/// Classical Fisher information of a parametric distribution given its
/// probabilities and their derivatives (`dp[ξ][i] = ∂_i p_ξ`).
///
/// Outcomes with vanishing probability contribute nothing when all their
/// derivatives vanish too; otherwise the information diverges and an error is
/// returned.
pub fn fisher_from_distribution(
    probabilities: &[f64],
    derivatives: &[Vec<f64>],
    num_params: usize,
    tol: &Tolerances,
) -> Result<FisherMatrix> {
    if probabilities.len() != derivatives.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities but {} derivative rows",
            probabilities.len(),
            derivatives.len()
        )));
    }
    let mut fi = RMat::zeros(num_params, num_params);
    for (xi, (&p, dp)) in probabilities.iter().zip(derivatives).enumerate() {
        if dp.len() != num_params {
            return Err(Error::DimensionMismatch(format!(
                "derivative row {xi} has length {}, expected {num_params}",
                dp.len()
            )));
        }
        if p < tol.zero_probability {
            let worst = dp.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if worst >= tol.zero_derivative {
                return Err(Error::SingularOutcome {
                    outcome: xi,
                    probability: p,
                    derivative: worst,
                });
            }
            continue;
        }
        for i in 0..num_params {
            for j in 0..num_params {
                fi[(i, j)] += dp[i] * dp[j] / p;
            }
        }
    }
    Ok(FisherMatrix::new(fi, FisherKind::Classical))
}

/// `I_ij = Σ_ξ tr[ρ_i M_ξ] tr[ρ_j M_ξ] / tr[ρ M_ξ]`.
pub fn classical_fi(
    rho: &CMat,
    drho: &[CMat],
    povm: &Povm,
    tol: &Tolerances,
) -> Result<FisherMatrix> {
    if rho.nrows() != povm.dim() || drho.iter().any(|d| d.nrows() != povm.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, POVM acts on {}",
            rho.nrows(),
            povm.dim()
        )));
    }
    let probs: Vec<f64> = povm
        .matrices()
        .map(|m| linalg::trace_product(rho, m).re)
        .collect();
    let derivs: Vec<Vec<f64>> = povm
        .matrices()
        .map(|m| {
            drho.iter()
                .map(|d| linalg::trace_product(d, m).re)
                .collect()
        })
        .collect();
    fisher_from_distribution(&probs, &derivs, drho.len(), tol)
}

/// Outcome probabilities `<ψ|M|ψ>` and derivatives `2 Re <ψ|M|ψ_i>` of a pure model.
pub fn pure_distribution(model: &OutputModel, povm: &Povm) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let psi = model.psi();
    if psi.len() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, POVM acts on {}",
            psi.len(),
            povm.dim()
        )));
    }
    let mut probs = Vec::with_capacity(povm.len());
    let mut derivs = Vec::with_capacity(povm.len());
    for m in povm.matrices() {
        let m_psi: CVec = m * psi;
        probs.push(linalg::inner(psi, &m_psi).re);
        derivs.push(
            model
                .dpsi()
                .iter()
                .map(|dp| 2.0 * linalg::inner(&m_psi, dp).re)
                .collect(),
        );
    }
    Ok((probs, derivs))
}

/// Classical Fisher information of a POVM on a pure output model.
pub fn classical_fi_pure(
    model: &OutputModel,
    povm: &Povm,
    tol: &Tolerances,
) -> Result<FisherMatrix> {
    let (p, dp) = pure_distribution(model, povm)?;
    fisher_from_distribution(&p, &dp, model.num_params(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeritWeight {
    HInverse,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeritReport {
    pub merit: f64,
    pub weight: MeritWeight,
    /// `max |Im <l_i|l_j>|` when a model was supplied.
    pub achievability_gap: Option<f64>,
    /// Smallest eigenvalue of `H - I`.
    pub qcrb_min_eig: f64,
}

/// `tr H^{-1} I`, or `tr G I` when a weight matrix is given.
pub fn merit(
    h: &FisherMatrix,
    i: &FisherMatrix,
    g: Option<&RMat>,
    tol: &Tolerances,
) -> Result<MeritReport> {
    let p = h.size();
    if i.size() != p {
        return Err(Error::DimensionMismatch(format!(
            "H is {p}x{p}, I is {0}x{0}",
            i.size()
        )));
    }
    let (value, weight) = match g {
        None => {
            let inv = h.inverse(tol)?;
            ((inv * i.entries()).trace(), MeritWeight::HInverse)
        }
        Some(g) => {
            if g.nrows() != p || g.ncols() != p {
                return Err(Error::DimensionMismatch(format!(
                    "weight is {}x{}, expected {p}x{p}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            let gmin = linalg::min_eigenvalue_symmetric(g);
            if gmin < -tol.fisher_psd {
                return Err(Error::InvalidArgument(format!(
                    "weight matrix is not PSD (smallest eigenvalue {gmin:e})"
                )));
            }
            ((g * i.entries()).trace(), MeritWeight::General)
        }
    };
    Ok(MeritReport {
        merit: value,
        weight,
        achievability_gap: None,
        qcrb_min_eig: qcrb_check(h, i, tol).min_eigenvalue,
    })
}

/// Quantum Fisher information, classical Fisher information and merit of a
/// POVM on a pure output model, with the achievability gap filled in.
pub fn evaluate(
    model: &OutputModel,
    povm: &Povm,
    tol: &Tolerances,
) -> Result<(FisherMatrix, FisherMatrix, MeritReport)> {
    let h = qfi_pure(model);
    let i = classical_fi_pure(model, povm, tol)?;
    let mut report = merit(&h, &i, None, tol)?;
    report.achievability_gap = Some(achievability_gap(model).max_abs);
    Ok((h, i, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcrbVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// `H - I ≥ 0`?
pub fn qcrb_check(h: &FisherMatrix, i: &FisherMatrix, tol: &Tolerances) -> QcrbVerdict {
    let min = linalg::min_eigenvalue_symmetric(&(h.entries() - i.entries()));
    QcrbVerdict {
        psd: min >= -tol.fisher_psd,
        min_eigenvalue: min,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AchievabilityGap {
    /// `Im <l_i|l_j>`, antisymmetric.
    pub matrix: RMat,
    pub max_abs: f64,
}

pub fn achievability_gap(model: &OutputModel) -> AchievabilityGap {
    let l = model.l_vectors();
    let p = l.len();
    let matrix = RMat::from_fn(p, p, |i, j| linalg::inner(&l[i], &l[j]).im);
    let max_abs = linalg::max_abs_real(&matrix);
    AchievabilityGap { matrix, max_abs }
}

/// `(2/i) tr(RR^dagger [T_a, T_b])`, the gap matrix at `U = 1` in the
/// exponential chart expressed through the probe's reduced state.
pub fn achievability_gap_at_identity(input: &BipartiteState, basis: &GeneratorBasis) -> RMat {
    let rr = input.reduced();
    let t = basis.generators();
    let p = t.len();
    RMat::from_fn(p, p, |a, b| {
        let comm = &t[a] * &t[b] - &t[b] * &t[a];
        (linalg::trace_product(&rr, &comm) * c(0.0, -2.0)).re
    })
}

/// `|<ψ|φ>|²`
pub fn fidelity_pure(psi: &CVec, phi: &CVec) -> f64 {
    linalg::inner(psi, phi).norm_sqr()
}

/// Squared Bures distance `2(1 - √F)` between pure states.
pub fn bures_distance_sq_pure(psi: &CVec, phi: &CVec) -> f64 {
    2.0 * (1.0 - linalg::inner(psi, phi).norm())
}
