//! su(d) generator bases, the exponential chart on SU(d) and the closed-form
//! polar chart on SU(2).
//!
//! Generators are normalized so that `tr(T_a T_b) = δ_ab`. The off-diagonal
//! generators come in pairs
//!
//! ```text
//! T_{kls} = i^s (|k><l| + (-1)^s |l><k|) / √2,   k > l, s ∈ {0, 1}
//! ```
//!
//! followed by `d - 1` diagonal generators `T_m = Σ_k c_{mk} |k><k|` built from
//! the generalized Gell-Mann coefficients
//! `c_m = (1, …, 1, -m, 0, …, 0) / √(m(m+1))`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, RMat, I, ONE};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorLabel {
    OffDiagonal { k: usize, l: usize, s: u8 },
    Diagonal { m: usize },
}

/// Orthonormal traceless Hermitian basis of su(d).
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<CMat>,
    labels: Vec<GeneratorLabel>,
    diagonal_coeffs: RMat,
}

/// Worst-case residuals of the basis invariants.
#[derive(Debug, Clone, Copy)]
pub struct BasisDiagnostics {
    pub hermiticity: f64,
    pub trace: f64,
    pub orthonormality: f64,
    pub coeff_sum: f64,
    pub coeff_orthonormality: f64,
    pub coeff_completeness: f64,
}

impl BasisDiagnostics {
    pub fn max(&self) -> f64 {
        [
            self.hermiticity,
            self.trace,
            self.orthonormality,
            self.coeff_sum,
            self.coeff_orthonormality,
            self.coeff_completeness,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Generalized Gell-Mann diagonal coefficients, one row per `m = 1..d-1`.
pub fn diagonal_coefficients(d: usize) -> RMat {
    DMatrix::from_fn(d - 1, d, |row, k| {
        let m = row + 1;
        let norm = ((m * (m + 1)) as f64).sqrt();
        if k < m {
            1.0 / norm
        } else if k == m {
            -(m as f64) / norm
        } else {
            0.0
        }
    })
}

/// Build the generalized Gell-Mann basis of su(d).
pub fn gellmann_basis(d: usize) -> Result<GeneratorBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "generator basis needs d >= 2, got {d}"
        )));
    }
    let mut generators = Vec::with_capacity(d * d - 1);
    let mut labels = Vec::with_capacity(d * d - 1);
    let h = c(FRAC_1_SQRT_2, 0.0);
    for k in 1..d {
        for l in 0..k {
            for s in 0..2u8 {
                let mut t = CMat::zeros(d, d);
                let phase = if s == 0 { ONE } else { I };
                let sign = if s == 0 { ONE } else { -ONE };
                t[(k, l)] = phase * h;
                t[(l, k)] = phase * sign * h;
                generators.push(t);
                labels.push(GeneratorLabel::OffDiagonal { k, l, s });
            }
        }
    }
    let coeffs = diagonal_coefficients(d);
    for m in 0..d - 1 {
        let mut t = CMat::zeros(d, d);
        for k in 0..d {
            t[(k, k)] = c(coeffs[(m, k)], 0.0);
        }
        generators.push(t);
        labels.push(GeneratorLabel::Diagonal { m: m + 1 });
    }
    Ok(GeneratorBasis {
        dim: d,
        generators,
        labels,
        diagonal_coeffs: coeffs,
    })
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, `d^2 - 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[CMat] {
        &self.generators
    }

    pub fn generator(&self, alpha: usize) -> &CMat {
        &self.generators[alpha]
    }

    pub fn labels(&self) -> &[GeneratorLabel] {
        &self.labels
    }

    pub fn diagonal_coeffs(&self) -> &RMat {
        &self.diagonal_coeffs
    }

    /// `Σ_a θ_a T_a`
    pub fn combination(&self, theta: &[f64]) -> Result<CMat> {
        self.check_len(theta)?;
        let mut acc = CMat::zeros(self.dim, self.dim);
        for (t, &x) in self.generators.iter().zip(theta) {
            if x != 0.0 {
                acc += t * c(x, 0.0);
            }
        }
        Ok(acc)
    }

    /// Coordinates of a Hermitian matrix in this basis, `x_a = tr(X T_a)`.
    pub fn coordinates(&self, x: &CMat) -> Vec<f64> {
        self.generators
            .iter()
            .map(|t| linalg::trace_product(x, t).re)
            .collect()
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "parameter vector has length {} but su({}) has {} generators",
                theta.len(),
                self.dim,
                self.len()
            )));
        }
        Ok(())
    }

    pub fn diagnostics(&self) -> BasisDiagnostics {
        let d = self.dim;
        let mut diag = BasisDiagnostics {
            hermiticity: 0.0,
            trace: 0.0,
            orthonormality: 0.0,
            coeff_sum: 0.0,
            coeff_orthonormality: 0.0,
            coeff_completeness: 0.0,
        };
        for (a, ta) in self.generators.iter().enumerate() {
            diag.hermiticity = diag.hermiticity.max(linalg::hermiticity_residual(ta));
            diag.trace = diag.trace.max(ta.trace().norm());
            for (b, tb) in self.generators.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                let r = (linalg::trace_product(ta, tb) - c(expected, 0.0)).norm();
                diag.orthonormality = diag.orthonormality.max(r);
            }
        }
        let cm = &self.diagonal_coeffs;
        for m in 0..d - 1 {
            diag.coeff_sum = diag.coeff_sum.max(cm.row(m).sum().abs());
            for n in 0..d - 1 {
                let expected = if m == n { 1.0 } else { 0.0 };
                let dot = cm.row(m).dot(&cm.row(n));
                diag.coeff_orthonormality = diag.coeff_orthonormality.max((dot - expected).abs());
            }
        }
        for k in 0..d {
            for l in 0..d {
                let expected = if k == l { 1.0 } else { 0.0 } - 1.0 / d as f64;
                let sum: f64 = (0..d - 1).map(|m| cm[(m, k)] * cm[(m, l)]).sum();
                diag.coeff_completeness = diag.coeff_completeness.max((sum - expected).abs());
            }
        }
        diag
    }

    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let diag = self.diagnostics();
        if diag.max() > tol.generator {
            return Err(Error::InvalidArgument(format!(
                "generator basis invariants violated: {diag:?}"
            )));
        }
        Ok(())
    }
}

/// Which coordinate system a parameter vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    /// `U = exp(i Σ θ_a T_a)`, `d^2 - 1` coordinates.
    Exp,
    /// `U = cos α 1 + i sin α n(θ, φ)·σ`, coordinates `(α, θ, φ)`.
    Su2Polar,
}

/// A validated parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub chart: ChartKind,
    pub coords: Vec<f64>,
}

impl ParamPoint {
    pub fn su2(alpha: f64, theta: f64, phi: f64, tol: &Tolerances) -> Result<Self> {
        check_su2_domain(alpha, theta, phi, tol.chart_margin)?;
        Ok(Self {
            chart: ChartKind::Su2Polar,
            coords: vec![alpha, theta, phi],
        })
    }

    pub fn exp(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        Ok(Self {
            chart: ChartKind::Exp,
            coords,
        })
    }
}

/// The su2-polar chart is singular at `α ∈ {0, π}` and `θ ∈ {0, π}`.
pub fn check_su2_domain(alpha: f64, theta: f64, phi: f64, margin: f64) -> Result<()> {
    if !(alpha.is_finite() && theta.is_finite() && phi.is_finite()) {
        return Err(Error::Domain("non-finite coordinate".into()));
    }
    if alpha < margin || alpha > PI - margin {
        return Err(Error::Domain(format!(
            "alpha = {alpha} must lie in (0, pi) at least {margin:e} from the boundary"
        )));
    }
    if theta < margin || theta > PI - margin {
        return Err(Error::Domain(format!(
            "theta = {theta} must lie in (0, pi) at least {margin:e} from the boundary"
        )));
    }
    Ok(())
}

/// `exp(i Σ θ_a T_a)`
pub fn unitary_exp(basis: &GeneratorBasis, theta: &[f64]) -> Result<CMat> {
    let a = basis.combination(theta)? * I;
    Ok(a.exp())
}

/// Partial derivatives `∂U/∂θ_a` of the exponential chart.
///
/// Each derivative is the upper-right block of `exp([[A, E], [0, A]])` with
/// `A = i Σ θ T` and `E = i T_a`.
pub fn unitary_derivatives_exp(basis: &GeneratorBasis, theta: &[f64]) -> Result<Vec<CMat>> {
    let d = basis.dim();
    let a = basis.combination(theta)? * I;
    let mut out = Vec::with_capacity(basis.len());
    let mut block = CMat::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(&a);
    block.view_mut((d, d), (d, d)).copy_from(&a);
    for t in basis.generators() {
        block.view_mut((0, d), (d, d)).copy_from(&(t * I));
        let e = block.exp();
        out.push(e.view((0, d), (d, d)).into_owned());
    }
    Ok(out)
}

/// `U` and all its partial derivatives in the exponential chart.
pub fn unitary_exp_with_derivatives(
    basis: &GeneratorBasis,
    theta: &[f64],
) -> Result<(CMat, Vec<CMat>)> {
    Ok((
        unitary_exp(basis, theta)?,
        unitary_derivatives_exp(basis, theta)?,
    ))
}

/// Closed-form SU(2) element and its partials in the polar chart.
#[derive(Debug, Clone)]
pub struct Su2Unitary {
    pub u: CMat,
    /// `[∂U/∂α, ∂U/∂θ, ∂U/∂φ]`
    pub partials: [CMat; 3],
}

/// `n(θ, φ) = (sin θ cos φ, sin θ sin φ, cos θ)`
pub fn polar_axis(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

fn polar_axis_partials(theta: f64, phi: f64) -> ([f64; 3], [f64; 3]) {
    let dtheta = [
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        -theta.sin(),
    ];
    let dphi = [-theta.sin() * phi.sin(), theta.sin() * phi.cos(), 0.0];
    (dtheta, dphi)
}

fn dot_sigma(v: [f64; 3]) -> CMat {
    let [x, y, z] = linalg::pauli();
    x * c(v[0], 0.0) + y * c(v[1], 0.0) + z * c(v[2], 0.0)
}

/// `U(α, θ, φ) = cos α 1 + i sin α n(θ, φ)·σ` with analytic partials.
///
/// This is the bare formula and accepts any real arguments; chart-domain checks
/// happen where the Fisher information is involved.
pub fn unitary_su2(alpha: f64, theta: f64, phi: f64) -> Su2Unitary {
    let n = polar_axis(theta, phi);
    let (dn_theta, dn_phi) = polar_axis_partials(theta, phi);
    let one = linalg::identity(2);
    let (s, co) = alpha.sin_cos();
    let n_sigma = dot_sigma(n);
    let u = &one * c(co, 0.0) + &n_sigma * c(0.0, s);
    let du_alpha = &one * c(-s, 0.0) + &n_sigma * c(0.0, co);
    let du_theta = dot_sigma(dn_theta) * c(0.0, s);
    let du_phi = dot_sigma(dn_phi) * c(0.0, s);
    Su2Unitary {
        u,
        partials: [du_alpha, du_theta, du_phi],
    }
}

/// Exponential-chart coordinates of a polar-chart point for the d = 2 Gell-Mann
/// basis `(σ1, σ2, σ3)/√2`: `θ_exp = √2 α n(θ, φ)`.
pub fn su2_polar_to_exp(alpha: f64, theta: f64, phi: f64) -> [f64; 3] {
    let n = polar_axis(theta, phi);
    [
        SQRT_2 * alpha * n[0],
        SQRT_2 * alpha * n[1],
        SQRT_2 * alpha * n[2],
    ]
}

/// Jacobian `∂θ_exp/∂(α, θ, φ)` of [`su2_polar_to_exp`], rows indexed by the
/// exponential coordinate.
pub fn su2_polar_to_exp_jacobian(alpha: f64, theta: f64, phi: f64) -> RMat {
    let n = polar_axis(theta, phi);
    let (dt, dp) = polar_axis_partials(theta, phi);
    RMat::from_fn(3, 3, |r, col| match col {
        0 => SQRT_2 * n[r],
        1 => SQRT_2 * alpha * dt[r],
        _ => SQRT_2 * alpha * dp[r],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn central_difference(f: impl Fn(&[f64]) -> CMat, x: &[f64], i: usize, h: f64) -> CMat {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / c(2.0 * h, 0.0)
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(gellmann_basis(1).is_err());
        assert!(gellmann_basis(0).is_err());
    }

    #[test]
    fn d2_basis_is_pauli_over_sqrt2() {
        let b = gellmann_basis(2).unwrap();
        let paulis = linalg::pauli();
        for (t, s) in b.generators().iter().zip(paulis.iter()) {
            assert!(max_abs(&(t - s * c(FRAC_1_SQRT_2, 0.0))) < 1e-15);
        }
    }

    #[test]
    fn d3_orthonormal() {
        let b = gellmann_basis(3).unwrap();
        assert_eq!(b.len(), 8);
        for (i, ti) in b.generators().iter().enumerate() {
            for (j, tj) in b.generators().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((linalg::trace_product(ti, tj) - c(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn d4_coefficient_completeness() {
        let b = gellmann_basis(4).unwrap();
        let cm = b.diagonal_coeffs();
        for k in 0..4 {
            for l in 0..4 {
                let s: f64 = (0..3).map(|m| cm[(m, k)] * cm[(m, l)]).sum();
                let expected = if k == l { 1.0 } else { 0.0 } - 0.25;
                assert!((s - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invariants_hold_for_small_d() {
        let tol = Tolerances::default();
        for d in 2..=8 {
            gellmann_basis(d).unwrap().check(&tol).unwrap();
        }
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let b = gellmann_basis(3).unwrap();
        let u = unitary_exp(&b, &[0.0; 8]).unwrap();
        assert!(max_abs(&(u - linalg::identity(3))) < 1e-15);
    }

    #[test]
    fn exp_rejects_wrong_length() {
        let b = gellmann_basis(3).unwrap();
        assert!(matches!(
            unitary_exp(&b, &[0.0; 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(unitary_derivatives_exp(&b, &[0.0; 9]).is_err());
    }

    #[test]
    fn exp_along_t3_matches_polar_chart() {
        let b = gellmann_basis(2).unwrap();
        let u = unitary_exp(&b, &[0.0, 0.0, SQRT_2 * PI / 2.0]).unwrap();
        let polar = unitary_su2(PI / 2.0, 0.0, 0.0).u;
        assert!(max_abs(&(u - polar)) < 1e-10);
    }

    #[test]
    fn derivatives_at_zero_are_i_t() {
        let b = gellmann_basis(3).unwrap();
        let du = unitary_derivatives_exp(&b, &[0.0; 8]).unwrap();
        for (d, t) in du.iter().zip(b.generators()) {
            assert!(max_abs(&(d - t * I)) < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences_d3() {
        let b = gellmann_basis(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let theta: Vec<f64> = (0..8).map(|_| rng.random_range(-1.5..1.5)).collect();
            let du = unitary_derivatives_exp(&b, &theta).unwrap();
            for (i, d) in du.iter().enumerate() {
                let fd = central_difference(|x| unitary_exp(&b, x).unwrap(), &theta, i, 1e-5);
                assert!(max_abs(&(d - fd)) < 1e-7);
            }
        }
    }

    #[test]
    fn su2_special_values() {
        assert!(max_abs(&(unitary_su2(0.0, 0.4, 1.0).u - linalg::identity(2))) < 1e-15);
        let u = unitary_su2(PI / 2.0, PI / 2.0, 0.0).u;
        assert!(max_abs(&(u - &linalg::pauli()[0] * I)) < 1e-15);
    }

    #[test]
    fn su2_partials_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = [
                rng.random_range(0.1..3.0),
                rng.random_range(0.1..3.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            ];
            let su = unitary_su2(x[0], x[1], x[2]);
            for i in 0..3 {
                let fd = central_difference(|p| unitary_su2(p[0], p[1], p[2]).u, &x, i, 1e-5);
                assert!(max_abs(&(&su.partials[i] - fd)) < 1e-8);
            }
        }
    }

    #[test]
    fn exp_chart_tangents_match_polar_chart_via_jacobian() {
        let b = gellmann_basis(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let (a, t, p) = (
                rng.random_range(0.2..2.9),
                rng.random_range(0.2..2.9),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let x = su2_polar_to_exp(a, t, p);
            let (u, du) = unitary_exp_with_derivatives(&b, &x).unwrap();
            let polar = unitary_su2(a, t, p);
            assert!(max_abs(&(&u - &polar.u)) < 1e-12);
            let jac = su2_polar_to_exp_jacobian(a, t, p);
            for col in 0..3 {
                let mut chained = CMat::zeros(2, 2);
                for row in 0..3 {
                    chained += &du[row] * c(jac[(row, col)], 0.0);
                }
                assert!(max_abs(&(chained - &polar.partials[col])) < 1e-10);
            }
        }
    }

    #[test]
    fn domain_checks() {
        let tol = Tolerances::default();
        assert!(ParamPoint::su2(0.5, 0.5, 0.0, &tol).is_ok());
        assert!(ParamPoint::su2(0.0, 0.5, 0.0, &tol).is_err());
        assert!(ParamPoint::su2(0.5, PI - 1e-7, 0.0, &tol).is_err());
        assert!(ParamPoint::su2(f64::NAN, 0.5, 0.0, &tol).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn exp_is_unitary(d in 2usize..=6, seed in any::<u64>()) {
                let b = gellmann_basis(d).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta: Vec<f64> = (0..b.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let u = unitary_exp(&b, &theta).unwrap();
                prop_assert!(linalg::unitarity_residual(&u) < 1e-10);
                prop_assert!((u.determinant().norm() - 1.0).abs() < 1e-10);
            }

            #[test]
            fn derivatives_match_fd(d in 2usize..=4, seed in any::<u64>()) {
                let b = gellmann_basis(d).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let theta: Vec<f64> = (0..b.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let du = unitary_derivatives_exp(&b, &theta).unwrap();
                let i = rng.random_range(0..b.len());
                let fd = central_difference(|x| unitary_exp(&b, x).unwrap(), &theta, i, 1e-5);
                prop_assert!(max_abs(&(&du[i] - fd)) < 1e-7);
            }
        }
    }
}
