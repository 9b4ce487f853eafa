//! The `p + 2` element measurement attaining `I = H` for pure-state models
//! whose `l`-vectors have real Gram matrix.
//!
//! With `|m_k> = Σ_l (H^{-1/2})_{kl} |l_l>` for `k ≤ p` and `|m_{p+1}> = |ψ>`,
//! the set `{|m_k>}` is orthonormal. Rotating it by a real orthogonal `o`
//! whose last column has no zero entry gives `|b_a> = Σ_b o_ab |m_b>`; the
//! measurement is `{|b_a><b_a|}` plus the projector onto the complement.

use super::{Povm, PovmElement};
use crate::channel_model::OutputModel;
use crate::error::{Error, Result};
use crate::fisher::{achievability_gap, FisherMatrix};
use crate::linalg::{self, c, CMat, CVec, RMat};
use crate::tolerances::Tolerances;

/// Real orthogonal `(p+1) × (p+1)` rotation with a floor on `|o_{a,p+1}|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatsumotoConfig {
    o: RMat,
    floor: f64,
}

impl MatsumotoConfig {
    pub fn new(o: RMat, floor: f64) -> Result<Self> {
        let n = o.nrows();
        if n != o.ncols() || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "rotation must be square of size >= 2, got {}x{}",
                o.nrows(),
                o.ncols()
            )));
        }
        if floor.is_nan() || floor <= 0.0 {
            return Err(Error::InvalidArgument("floor must be positive".into()));
        }
        let orth = linalg::max_abs_real(&(o.transpose() * &o - RMat::identity(n, n)));
        if orth > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "rotation is not orthogonal (residual {orth:e})"
            )));
        }
        if let Some(a) = (0..n).find(|&a| o[(a, n - 1)].abs() < floor) {
            return Err(Error::InvalidArgument(format!(
                "|o[{a}, last]| = {:e} is below the floor {floor:e}",
                o[(a, n - 1)].abs()
            )));
        }
        Ok(Self { o, floor })
    }

    /// Householder reflection sending `e_{p+1}` to `(1, …, 1)/√(p+1)`, so every
    /// entry of the last column equals `1/√(p+1)`.
    pub fn householder(p: usize) -> Self {
        let n = p + 1;
        let u = 1.0 / (n as f64).sqrt();
        let mut v = nalgebra::DVector::from_element(n, -u);
        v[n - 1] += 1.0;
        let vv = v.dot(&v);
        let o = RMat::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
        Self { o, floor: u }
    }

    pub fn rotation(&self) -> &RMat {
        &self.o
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

/// `{|m_1>, …, |m_p>, |ψ>}`.
pub fn optimal_frame(model: &OutputModel, h: &FisherMatrix, tol: &Tolerances) -> Result<Vec<CVec>> {
    let p = model.num_params();
    if h.entries().nrows() != p {
        return Err(Error::DimensionMismatch(format!(
            "H is {0}x{0}, model has {p} parameters",
            h.entries().nrows()
        )));
    }
    let min_eig = h.min_eigenvalue();
    if min_eig <= tol.qfi_positive_definite {
        return Err(Error::NotPositiveDefinite {
            context: "QFI must be invertible for the optimal measurement".into(),
            min_eigenvalue: min_eig,
        });
    }
    let inv_sqrt = linalg::symmetric_function(h.entries(), |x| 1.0 / x.sqrt());
    let l = model.l_vectors();
    let mut frame: Vec<CVec> = (0..p)
        .map(|k| {
            let mut acc = CVec::zeros(model.psi().len());
            for (j, lj) in l.iter().enumerate() {
                acc += lj * c(inv_sqrt[(k, j)], 0.0);
            }
            acc
        })
        .collect();
    frame.push(model.psi().clone());
    Ok(frame)
}

/// Build the bound-attaining measurement at the model's parameter point.
pub fn matsumoto_povm(
    model: &OutputModel,
    h: &FisherMatrix,
    config: &MatsumotoConfig,
    tol: &Tolerances,
) -> Result<Povm> {
    let gap = achievability_gap(model).max_abs;
    if gap > tol.achievability {
        return Err(Error::NotAchievable { gap });
    }
    let p = model.num_params();
    if config.o.nrows() != p + 1 {
        return Err(Error::DimensionMismatch(format!(
            "rotation has size {}, expected p + 1 = {}",
            config.o.nrows(),
            p + 1
        )));
    }
    let frame = optimal_frame(model, h, tol)?;
    let dim = model.psi().len();
    let mut elements = Vec::with_capacity(p + 2);
    let mut rest = linalg::identity(dim);
    for a in 0..=p {
        let mut b = CVec::zeros(dim);
        for (beta, m) in frame.iter().enumerate() {
            b += m * c(config.o[(a, beta)], 0.0);
        }
        let proj = linalg::projector(&b);
        rest -= &proj;
        elements.push(PovmElement::generic(proj));
    }
    let rest: CMat = (&rest + rest.adjoint()) * c(0.5, 0.0);
    elements.push(PovmElement::generic(rest));
    Povm::new(dim, elements, tol)
}
