//! Bipartite probe states pushed through `U ⊗ 1`.
//!
//! A probe `Σ_kl R_kl |k>|l>` is stored by its coefficient matrix `R`. Acting
//! with `A ⊗ 1` maps `R` to `A R`, so output kets and their parameter
//! derivatives are plain `d × d` matrix products. Kets are flattened row-major,
//! index `k * d + l`, matching `kron(|k>, |l>)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, RMat};
use crate::povm::Povm;
use crate::su_algebra::{self, GeneratorBasis};
use crate::tolerances::Tolerances;

/// Pure state on `C^d ⊗ C^d` given by its amplitude matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    r: CMat,
}

impl BipartiteState {
    /// Wrap a normalized amplitude matrix.
    pub fn from_amplitudes(r: CMat, tol: &Tolerances) -> Result<Self> {
        if r.nrows() != r.ncols() || r.nrows() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "amplitude matrix must be square with d >= 2, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        let norm2 = r.norm_squared();
        if (norm2 - 1.0).abs() > tol.normalization {
            return Err(Error::InvalidArgument(format!(
                "tr(RR^dagger) = {norm2}, expected 1"
            )));
        }
        Ok(Self { r })
    }

    /// Normalize and wrap an arbitrary nonzero amplitude matrix.
    pub fn normalize(r: CMat) -> Result<Self> {
        let n = r.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("zero amplitude matrix".into()));
        }
        Self::from_amplitudes(r / c(n, 0.0), &Tolerances::default())
    }

    /// Amplitudes drawn i.i.d. standard complex Gaussian, then normalized.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let r = CMat::from_fn(d, d, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        Self::normalize(r).expect("gaussian amplitudes are nonzero")
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn amplitudes(&self) -> &CMat {
        &self.r
    }

    /// `RR^dagger`, the reduced state of the first subsystem.
    pub fn reduced(&self) -> CMat {
        &self.r * self.r.adjoint()
    }

    /// `||RR^dagger - 1/d||_max`
    pub fn entanglement_deficit(&self) -> f64 {
        let d = self.dim();
        linalg::max_abs(&(self.reduced() - linalg::identity(d) * c(1.0 / d as f64, 0.0)))
    }

    pub fn is_maximally_entangled(&self, tol: &Tolerances) -> bool {
        self.entanglement_deficit() < tol.max_entangled
    }

    /// Components `t_a = tr[(RR^dagger - 1/d) T_a]`.
    pub fn t_vector(&self, basis: &GeneratorBasis) -> Vec<f64> {
        basis.coordinates(&self.reduced())
    }

    /// The state as a `d^2` ket.
    pub fn ket(&self) -> CVec {
        flatten(&self.r)
    }
}

fn flatten(m: &CMat) -> CVec {
    let d = m.nrows();
    CVec::from_fn(d * m.ncols(), |i, _| m[(i / d, i % d)])
}

/// `Σ_k |kk> / √d`
pub fn max_entangled(d: usize) -> Result<BipartiteState> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    let r = linalg::identity(d) * c(1.0 / (d as f64).sqrt(), 0.0);
    BipartiteState::from_amplitudes(r, &Tolerances::default())
}

/// `(|10> - |01>) / √2`
pub fn singlet() -> BipartiteState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-h, 0.0), c(h, 0.0), c(0.0, 0.0)]);
    BipartiteState { r }
}

/// Output ket, its parameter derivatives and the `l`-vectors at one point.
#[derive(Debug, Clone)]
pub struct OutputModel {
    dim: usize,
    psi: CVec,
    dpsi: Vec<CVec>,
    l: Vec<CVec>,
}

/// Residuals of the [`OutputModel`] invariants.
#[derive(Debug, Clone, Copy)]
pub struct ModelDiagnostics {
    pub norm: f64,
    pub derivative_overlap: f64,
    pub l_overlap: f64,
}

impl OutputModel {
    /// Build from an output ket and its derivatives; `l_a = 2(ψ_a + <ψ_a|ψ> ψ)`.
    pub fn from_kets(psi: CVec, dpsi: Vec<CVec>) -> Self {
        let dim = (psi.len() as f64).sqrt().round() as usize;
        let l = dpsi
            .iter()
            .map(|dp| (dp + &psi * linalg::inner(dp, &psi)) * c(2.0, 0.0))
            .collect();
        Self { dim, psi, dpsi, l }
    }

    /// Local dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_params(&self) -> usize {
        self.dpsi.len()
    }

    pub fn psi(&self) -> &CVec {
        &self.psi
    }

    pub fn dpsi(&self) -> &[CVec] {
        &self.dpsi
    }

    pub fn l_vectors(&self) -> &[CVec] {
        &self.l
    }

    /// `ρ = |ψ><ψ|`
    pub fn density(&self) -> CMat {
        linalg::projector(&self.psi)
    }

    /// `ρ_a = |ψ_a><ψ| + |ψ><ψ_a|`
    pub fn density_derivatives(&self) -> Vec<CMat> {
        self.dpsi
            .iter()
            .map(|dp| {
                let a = linalg::outer(dp, &self.psi);
                &a + a.adjoint()
            })
            .collect()
    }

    /// Same state in new coordinates `θ = θ0 + J η`: `∂/∂η_b = Σ_a J_ab ∂/∂θ_a`.
    pub fn reparametrize(&self, jacobian: &RMat) -> Result<Self> {
        if jacobian.nrows() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "jacobian has {} rows, model has {} parameters",
                jacobian.nrows(),
                self.num_params()
            )));
        }
        let dpsi = (0..jacobian.ncols())
            .map(|b| {
                let mut acc = CVec::zeros(self.psi.len());
                for (a, dp) in self.dpsi.iter().enumerate() {
                    acc += dp * c(jacobian[(a, b)], 0.0);
                }
                acc
            })
            .collect();
        Ok(Self::from_kets(self.psi.clone(), dpsi))
    }

    pub fn diagnostics(&self) -> ModelDiagnostics {
        let norm = (self.psi.norm_squared() - 1.0).abs();
        let derivative_overlap = self
            .dpsi
            .iter()
            .map(|dp| linalg::inner(dp, &self.psi).re.abs())
            .fold(0.0, f64::max);
        let l_overlap = self
            .l
            .iter()
            .map(|l| linalg::inner(l, &self.psi).re.abs())
            .fold(0.0, f64::max);
        ModelDiagnostics {
            norm,
            derivative_overlap,
            l_overlap,
        }
    }
}

/// Push `input` through `U ⊗ 1` and differentiate with the supplied `∂U/∂θ_a`.
pub fn output_model(u: &CMat, du: &[CMat], input: &BipartiteState) -> Result<OutputModel> {
    let d = input.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, probe has d = {d}",
            u.nrows(),
            u.ncols()
        )));
    }
    if let Some(bad) = du.iter().find(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::DimensionMismatch(format!(
            "derivative is {}x{}, probe has d = {d}",
            bad.nrows(),
            bad.ncols()
        )));
    }
    let r = input.amplitudes();
    let psi = flatten(&(u * r));
    let dpsi = du.iter().map(|m| flatten(&(m * r))).collect();
    Ok(OutputModel::from_kets(psi, dpsi))
}

/// Output ket only, for likelihood evaluations that need no derivatives.
pub fn output_ket(u: &CMat, input: &BipartiteState) -> CVec {
    flatten(&(u * input.amplitudes()))
}

/// Reduced state of the second (untouched) subsystem of a `d^2` ket.
pub fn reduced_second(psi: &CVec, d: usize) -> CMat {
    let m = CMat::from_fn(d, d, |k, l| psi[k * d + l]);
    m.transpose() * m.map(|z| z.conj())
}

/// Coordinates on the unknown unitary.
#[derive(Debug, Clone)]
pub enum Chart {
    /// `(α, θ, φ)` on SU(2).
    Su2Polar,
    /// `exp(i Σ θ_a T_a)` on SU(d).
    Exp(GeneratorBasis),
}

impl Chart {
    pub fn dim(&self) -> usize {
        match self {
            Chart::Su2Polar => 2,
            Chart::Exp(b) => b.dim(),
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            Chart::Su2Polar => 3,
            Chart::Exp(b) => b.len(),
        }
    }

    pub fn kind(&self) -> su_algebra::ChartKind {
        match self {
            Chart::Su2Polar => su_algebra::ChartKind::Su2Polar,
            Chart::Exp(_) => su_algebra::ChartKind::Exp,
        }
    }

    pub fn check(&self, theta: &[f64], tol: &Tolerances) -> Result<()> {
        if theta.len() != self.num_params() {
            return Err(Error::DimensionMismatch(format!(
                "chart has {} parameters, got {}",
                self.num_params(),
                theta.len()
            )));
        }
        match self {
            Chart::Su2Polar => {
                su_algebra::check_su2_domain(theta[0], theta[1], theta[2], tol.chart_margin)
            }
            Chart::Exp(_) => {
                if theta.iter().all(|x| x.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Domain("non-finite coordinate".into()))
                }
            }
        }
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<CMat> {
        match self {
            Chart::Su2Polar => Ok(su_algebra::unitary_su2(theta[0], theta[1], theta[2]).u),
            Chart::Exp(b) => su_algebra::unitary_exp(b, theta),
        }
    }

    pub fn unitary_with_derivatives(&self, theta: &[f64]) -> Result<(CMat, Vec<CMat>)> {
        match self {
            Chart::Su2Polar => {
                let s = su_algebra::unitary_su2(theta[0], theta[1], theta[2]);
                Ok((s.u, s.partials.to_vec()))
            }
            Chart::Exp(b) => su_algebra::unitary_exp_with_derivatives(b, theta),
        }
    }
}

/// A probe state together with a chart on the unknown unitary.
#[derive(Debug, Clone)]
pub struct ProbeFamily {
    chart: Chart,
    input: BipartiteState,
    tol: Tolerances,
}

impl ProbeFamily {
    pub fn new(chart: Chart, input: BipartiteState) -> Result<Self> {
        if chart.dim() != input.dim() {
            return Err(Error::DimensionMismatch(format!(
                "chart acts on d = {}, probe has d = {}",
                chart.dim(),
                input.dim()
            )));
        }
        Ok(Self {
            chart,
            input,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Singlet probe with the polar chart.
    pub fn su2_singlet() -> Self {
        Self::new(Chart::Su2Polar, singlet()).expect("dimensions agree")
    }

    /// Maximally entangled probe with the exponential chart on SU(d).
    pub fn exp_max_entangled(d: usize) -> Result<Self> {
        Self::new(
            Chart::Exp(su_algebra::gellmann_basis(d)?),
            max_entangled(d)?,
        )
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn input(&self) -> &BipartiteState {
        &self.input
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn num_params(&self) -> usize {
        self.chart.num_params()
    }

    pub fn unitary(&self, theta: &[f64]) -> Result<CMat> {
        self.chart.check(theta, &self.tol)?;
        self.chart.unitary(theta)
    }

    pub fn output_model(&self, theta: &[f64]) -> Result<OutputModel> {
        self.chart.check(theta, &self.tol)?;
        let (u, du) = self.chart.unitary_with_derivatives(theta)?;
        output_model(&u, &du, &self.input)
    }

    pub fn output_ket(&self, theta: &[f64]) -> Result<CVec> {
        self.chart.check(theta, &self.tol)?;
        Ok(output_ket(&self.chart.unitary(theta)?, &self.input))
    }

    /// Outcome probabilities `<ψ(θ)|M_ξ|ψ(θ)>`.
    pub fn probabilities(&self, theta: &[f64], povm: &Povm) -> Result<Vec<f64>> {
        probabilities_pure(&self.output_ket(theta)?, povm)
    }
}

/// `ρ = ¼(1⊗1 - Σ_i U σ_i U^dagger ⊗ σ_i)` for the singlet probe, with its
/// three parameter derivatives.
pub fn pauli_output_density(
    alpha: f64,
    theta: f64,
    phi: f64,
    tol: &Tolerances,
) -> Result<(CMat, [CMat; 3])> {
    su_algebra::check_su2_domain(alpha, theta, phi, tol.chart_margin)?;
    Ok(pauli_output_density_unchecked(alpha, theta, phi))
}

pub(crate) fn pauli_output_density_unchecked(
    alpha: f64,
    theta: f64,
    phi: f64,
) -> (CMat, [CMat; 3]) {
    let su = su_algebra::unitary_su2(alpha, theta, phi);
    let sig = linalg::pauli();
    let quarter = c(0.25, 0.0);
    let ud = su.u.adjoint();
    let mut rho = linalg::identity(4) * quarter;
    for s in &sig {
        rho -= linalg::kron(&(&su.u * s * &ud), s) * quarter;
    }
    let derivs = su.partials.clone().map(|du| {
        let mut acc = CMat::zeros(4, 4);
        for s in &sig {
            let rot = &du * s * &ud + &su.u * s * du.adjoint();
            acc -= linalg::kron(&rot, s) * quarter;
        }
        acc
    });
    (rho, derivs)
}

/// `½ tr(U σ_i U^dagger σ_j) = cos 2α δ_ij - sin 2α Σ_k ε_ijk n_k + 2 sin²α n_i n_j`.
pub fn heisenberg_coefficients(alpha: f64, theta: f64, phi: f64, tol: &Tolerances) -> Result<RMat> {
    su_algebra::check_su2_domain(alpha, theta, phi, tol.chart_margin)?;
    let n = su_algebra::polar_axis(theta, phi);
    let (s2, c2) = (2.0 * alpha).sin_cos();
    let sa2 = alpha.sin().powi(2);
    Ok(RMat::from_fn(3, 3, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        let eps: f64 = (0..3).map(|k| levi_civita(i, j, k) * n[k]).sum();
        c2 * delta - s2 * eps + 2.0 * sa2 * n[i] * n[j]
    }))
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `p_ξ = Re tr(ρ M_ξ)`.
pub fn outcome_probabilities(rho: &CMat, povm: &Povm) -> Result<Vec<f64>> {
    if rho.nrows() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, POVM acts on {}",
            rho.nrows(),
            povm.dim()
        )));
    }
    Ok(povm
        .elements()
        .iter()
        .map(|m| linalg::trace_product(rho, &m.matrix).re)
        .collect())
}

/// `p_ξ = <ψ|M_ξ|ψ>` for a pure state.
pub fn probabilities_pure(psi: &CVec, povm: &Povm) -> Result<Vec<f64>> {
    if psi.len() != povm.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, POVM acts on {}",
            psi.len(),
            povm.dim()
        )));
    }
    Ok(povm
        .elements()
        .iter()
        .map(|m| linalg::sandwich(psi, &m.matrix, psi).re)
        .collect())
}

/// `|a> ⊗ |b>` as a ket, used by tests and the POVM constructors.
pub fn product_ket(a: &CVec, b: &CVec) -> CVec {
    linalg::kron_vec(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::povm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn ket2(bits: [usize; 2]) -> CVec {
        linalg::basis_ket(4, bits[0] * 2 + bits[1])
    }

    #[test]
    fn max_entangled_properties() {
        let tol = Tolerances::default();
        for d in 2..=5 {
            let s = max_entangled(d).unwrap();
            let expected = linalg::identity(d) * c(1.0 / d as f64, 0.0);
            assert!(max_abs(&(s.reduced() - expected)) < 1e-15);
            assert!((s.reduced().trace().re - 1.0).abs() < 1e-12);
            assert!(s.is_maximally_entangled(&tol));
        }
        assert!(max_entangled(1).is_err());
    }

    #[test]
    fn singlet_amplitudes() {
        let s = singlet();
        let psi = s.ket();
        assert!((psi[1] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((psi[2] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(psi[0].norm() < 1e-15);
        assert!((linalg::inner(&ket2([0, 1]), &psi) - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(max_abs(&(s.reduced() - linalg::identity(2) * c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let r = linalg::identity(2);
        assert!(BipartiteState::from_amplitudes(r, &Tolerances::default()).is_err());
    }

    #[test]
    fn derivative_at_identity_matches_generator_action() {
        let d = 3;
        let basis = su_algebra::gellmann_basis(d).unwrap();
        let fam = ProbeFamily::exp_max_entangled(d).unwrap();
        let model = fam.output_model(&[0.0; 8]).unwrap();
        let r = fam.input().amplitudes();
        for (a, t) in basis.generators().iter().enumerate() {
            // i Σ_kl R_kl T|k> ⊗ |l>
            let mut expected = CVec::zeros(d * d);
            for k in 0..d {
                for l in 0..d {
                    let tk = t * linalg::basis_ket(d, k);
                    expected +=
                        linalg::kron_vec(&tk, &linalg::basis_ket(d, l)) * (r[(k, l)] * linalg::I);
                }
            }
            assert!((&model.dpsi()[a] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn second_subsystem_untouched() {
        let fam = ProbeFamily::su2_singlet();
        let before = reduced_second(&singlet().ket(), 2);
        for &(a, t, p) in &[(0.3, 0.9, 2.0), (2.1, 1.7, -0.4)] {
            let psi = fam.output_ket(&[a, t, p]).unwrap();
            assert!(max_abs(&(reduced_second(&psi, 2) - &before)) < 1e-14);
        }
    }

    #[test]
    fn model_invariants_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fam = ProbeFamily::su2_singlet();
        for _ in 0..50 {
            let theta = [
                rng.random_range(0.05..3.09),
                rng.random_range(0.05..3.09),
                rng.random_range(0.0..std::f64::consts::TAU),
            ];
            let m = fam.output_model(&theta).unwrap();
            let diag = m.diagnostics();
            assert!(diag.norm < 1e-12);
            assert!(diag.derivative_overlap < 1e-10);
            assert!(diag.l_overlap < 1e-10);
        }
        let d3 = ProbeFamily::new(
            Chart::Exp(su_algebra::gellmann_basis(3).unwrap()),
            BipartiteState::random(3, &mut rng),
        )
        .unwrap();
        let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diag = d3.output_model(&theta).unwrap().diagnostics();
        assert!(diag.norm < 1e-12 && diag.derivative_overlap < 1e-10 && diag.l_overlap < 1e-10);
    }

    #[test]
    fn density_forms_agree() {
        let fam = ProbeFamily::su2_singlet();
        let m = fam.output_model(&[0.7, 1.2, 0.4]).unwrap();
        let rho = m.density();
        let psi = m.psi();
        assert!(max_abs(&(&rho - psi * psi.adjoint())) < 1e-15);
        for (dr, dp) in m.density_derivatives().iter().zip(m.dpsi()) {
            let expected = dp * psi.adjoint() + psi * dp.adjoint();
            assert!(max_abs(&(dr - expected)) < 1e-12);
        }
    }

    #[test]
    fn pauli_density_matches_output_model() {
        let tol = Tolerances::default();
        let fam = ProbeFamily::su2_singlet();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let (a, t, p) = (
                rng.random_range(0.05..3.09),
                rng.random_range(0.05..3.09),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let (rho, drho) = pauli_output_density(a, t, p, &tol).unwrap();
            let m = fam.output_model(&[a, t, p]).unwrap();
            assert!(max_abs(&(&rho - m.density())) < 1e-10);
            for (x, y) in drho.iter().zip(m.density_derivatives()) {
                assert!(max_abs(&(x - y)) < 1e-10);
            }
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(max_abs(&(&rho * &rho - &rho)) < 1e-10);
        }
    }

    #[test]
    fn pauli_density_near_identity_is_singlet_projector() {
        let tol = Tolerances::default();
        let alpha = 1e-3;
        let (rho, _) = pauli_output_density(alpha, 1.0, 0.5, &tol).unwrap();
        let tau = linalg::projector(&singlet().ket());
        // |ψ - τ| ≤ α for the ket, so the projector moves by at most 2α.
        assert!(max_abs(&(rho - tau)) <= 2.0 * alpha);
        assert!(pauli_output_density(0.0, 1.0, 0.5, &tol).is_err());
    }

    fn heisenberg_direct(u: &CMat) -> RMat {
        let s = linalg::pauli();
        RMat::from_fn(3, 3, |i, j| {
            (linalg::trace_product(&(u * &s[i] * u.adjoint()), &s[j]) * c(0.5, 0.0)).re
        })
    }

    #[test]
    fn heisenberg_closed_form() {
        let tol = Tolerances::default();
        let k = heisenberg_coefficients(PI / 2.0, PI / 2.0, 0.0, &tol).unwrap();
        let x = linalg::pauli()[0].clone();
        let direct = RMat::from_fn(3, 3, |i, j| {
            let s = linalg::pauli();
            (linalg::trace_product(&(&x * &s[i] * &x), &s[j]) * c(0.5, 0.0)).re
        });
        let expected = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0]));
        assert!(linalg::max_abs_real(&(&k - &expected)) < 1e-15);
        assert!(linalg::max_abs_real(&(&direct - &expected)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (a, t, p) = (
                rng.random_range(0.05..3.09),
                rng.random_range(0.05..3.09),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let k = heisenberg_coefficients(a, t, p, &tol).unwrap();
            let u = su_algebra::unitary_su2(a, t, p).u;
            assert!(linalg::max_abs_real(&(&k - heisenberg_direct(&u))) < 1e-12);
            let orth = k.transpose() * &k - RMat::identity(3, 3);
            assert!(linalg::max_abs_real(&orth) < 1e-10);
            assert!((k.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn probabilities_of_trivial_povm() {
        let rho = linalg::projector(&singlet().ket());
        let p = outcome_probabilities(&rho, &povm::Povm::trivial(4)).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(outcome_probabilities(&linalg::identity(3), &povm::Povm::trivial(4)).is_err());
    }

    #[test]
    fn bell_singlet_outcome_near_identity() {
        let fam = ProbeFamily::su2_singlet();
        let p = fam
            .probabilities(&[1e-4, 1.0, 0.3], &povm::bell_basis())
            .unwrap();
        assert!(p[3] > 0.9999);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_probabilities_match_bloch_formula() {
        let tol = Tolerances::default();
        let fam = ProbeFamily::su2_singlet();
        let m = povm::random_product_povm(2, 3, 17).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let (al, t, ph) = (
                rng.random_range(0.05..3.09),
                rng.random_range(0.05..3.09),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let rho = fam.output_model(&[al, t, ph]).unwrap().density();
            let probs = outcome_probabilities(&rho, &m).unwrap();
            let n = su_algebra::polar_axis(t, ph);
            for (el, &p) in m.elements().iter().zip(&probs) {
                let term = &el.product_terms().unwrap()[0];
                let a = povm::bloch_vector(&term.a);
                let b = povm::bloch_vector(&term.b);
                let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
                let cross = [
                    b[1] * a[2] - b[2] * a[1],
                    b[2] * a[0] - b[0] * a[2],
                    b[0] * a[1] - b[1] * a[0],
                ];
                let expected = term.c / 4.0
                    * (1.0 - (2.0 * al).cos() * dot(a, b) + (2.0 * al).sin() * dot(cross, n)
                        - 2.0 * al.sin().powi(2) * dot(n, a) * dot(n, b));
                assert!((p - expected).abs() < 1e-12);
            }
            let _ = &tol;
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn probabilities_form_distribution(seed in any::<u64>(), d in 2usize..=3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let fam = ProbeFamily::new(
                    Chart::Exp(su_algebra::gellmann_basis(d).unwrap()),
                    BipartiteState::random(d, &mut rng),
                ).unwrap();
                let theta: Vec<f64> = (0..d * d - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
                let m = povm::random_product_povm(d, 2, seed).unwrap();
                let p = fam.probabilities(&theta, &m).unwrap();
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
                prop_assert!(p.iter().all(|&x| x >= -1e-12));
            }
        }
    }
}
