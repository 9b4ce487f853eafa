//! Numerical thresholds shared across the crate.

use serde::{Deserialize, Serialize};

/// Every tolerance used by constructors, validators and the Fisher routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity, tracelessness and orthonormality of generator bases.
    pub generator: f64,
    /// `U^dagger U = 1`.
    pub unitarity: f64,
    /// State normalization `tr RR^dagger = 1`.
    pub normalization: f64,
    /// `||RR^dagger - 1/d||_max` below which a state counts as maximally entangled.
    pub max_entangled: f64,
    /// Distance from the su2-polar chart boundary that is rejected.
    pub chart_margin: f64,
    /// Smallest eigenvalue accepted for a POVM element.
    pub povm_psd: f64,
    /// Entrywise completeness residual for constructed POVMs.
    pub povm_completeness: f64,
    /// Completeness residual accepted when loading a POVM from disk.
    pub povm_load_completeness: f64,
    /// Smallest eigenvalue accepted for a Fisher matrix (and for `H - I`).
    pub fisher_psd: f64,
    /// Symmetry tolerance for Fisher matrices.
    pub fisher_symmetry: f64,
    /// Gate on the smallest eigenvalue of `H` before it is inverted.
    pub qfi_positive_definite: f64,
    /// Outcome probabilities below this are treated as zero.
    pub zero_probability: f64,
    /// Derivatives below this on a zero-probability outcome are treated as zero.
    pub zero_derivative: f64,
    /// Eigenvalue-sum cutoff for the SLD Lyapunov solution.
    pub sld_cutoff: f64,
    /// Derivative entries above this on the kernel-kernel block make the SLD ill-posed.
    pub sld_ill_posed: f64,
    /// Achievability gap accepted by the optimal-measurement construction.
    pub achievability: f64,
    /// Floor on `|o_{alpha,p+1}|` for the optimal-measurement rotation.
    pub rotation_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            generator: 1e-12,
            unitarity: 1e-10,
            normalization: 1e-12,
            max_entangled: 1e-10,
            chart_margin: 1e-6,
            povm_psd: 1e-10,
            povm_completeness: 1e-10,
            povm_load_completeness: 1e-8,
            fisher_psd: 1e-9,
            fisher_symmetry: 1e-10,
            qfi_positive_definite: 1e-10,
            zero_probability: 1e-12,
            zero_derivative: 1e-9,
            sld_cutoff: 1e-10,
            sld_ill_posed: 1e-8,
            achievability: 1e-8,
            rotation_floor: 1e-6,
        }
    }
}
