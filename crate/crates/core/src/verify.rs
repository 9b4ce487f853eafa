//! Closed-form identities checked numerically, one [`CheckResult`] per identity.
//!
//! Each check compares a computed quantity against a known value and reports
//! its worst residual next to the tolerance it was held to. The suite runs
//! from a fixed seed, so repeated runs print identical tables.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channel_model::{max_entangled, BipartiteState, Chart, ProbeFamily};
use crate::error::Result;
use crate::estimate::{counterexample_search, covariance_study, invariance_sweep, WITNESS_MARGIN};
use crate::fisher::{self, FisherMatrix};
use crate::linalg::{self, RMat};
use crate::povm::{
    bell_basis, linear_optics_bell, local_spin_povm, matsumoto_povm, random_product_povm,
    random_unitary, reduced_bell, refine_separable, time_shared, MatsumotoConfig, Povm,
    PovmElement,
};
use crate::su_algebra::gellmann_basis;
use crate::tolerances::Tolerances;

/// Number of checks in the suite.
pub const NUM_CHECKS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Replaces every per-check tolerance when set.
    pub tolerance_override: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            tolerance_override: None,
        }
    }
}

impl VerifyConfig {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance_override.unwrap_or(default)
    }

    fn rng(&self, id: usize) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(id as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: String,
    /// The identity being checked.
    pub statement: String,
    pub expected: String,
    pub computed: String,
    /// Worst deviation found; the check passes when it is at most `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

struct Outcome {
    expected: String,
    computed: String,
    residual: f64,
    /// Extra pass conditions that are not residual bounds.
    side_conditions: bool,
}

impl Outcome {
    fn new(expected: impl Into<String>, computed: impl Into<String>, residual: f64) -> Self {
        Self {
            expected: expected.into(),
            computed: computed.into(),
            residual,
            side_conditions: true,
        }
    }
}

type CheckFn = fn(&VerifyConfig) -> Result<Outcome>;

struct Spec {
    name: &'static str,
    statement: &'static str,
    tolerance: f64,
    run: CheckFn,
}

const SPECS: [Spec; NUM_CHECKS] = [
    Spec {
        name: "qubit QFI closed form",
        statement: "singlet probe, polar chart: H = 4 diag(1, sin²α, sin²α sin²θ) at 100 random points",
        tolerance: 1e-9,
        run: qubit_qfi_closed_form,
    },
    Spec {
        name: "Bell measurement attains the QFI",
        statement: "I(Bell) = H entrywise and tr H⁻¹I = 3 on a 5x5x5 grid",
        tolerance: 1e-9,
        run: bell_attains_qfi,
    },
    Spec {
        name: "partial Bell measurements",
        statement: "reduced Bell merit 1 for each k; 3-outcome Bell merit 2; time-shared reduced Bell merit 1 with rank-3 FI",
        tolerance: 1e-9,
        run: partial_bell_merits,
    },
    Spec {
        name: "local spin measurement",
        statement: "uniform time-share of the nine σ_i⊗σ_j settings has merit 1",
        tolerance: 1e-9,
        run: local_spin_merit,
    },
    Spec {
        name: "separable measurement identity",
        statement: "20 random product POVMs per d in 2..=5 with a maximally entangled probe: merit = d(d-1)/2",
        tolerance: 1e-9,
        run: separable_identity,
    },
    Spec {
        name: "maximally entangled QFI",
        statement: "exponential chart at θ = 0: H = (4/d)·1 for d in 2..=6",
        tolerance: 1e-9,
        run: max_entangled_qfi,
    },
    Spec {
        name: "optimal measurement attains the QFI",
        statement: "I = H for the p+2 element construction at 5 random qubit points and at d = 3, θ = 0; merit d²-1",
        tolerance: 1e-8,
        run: optimal_attains_qfi,
    },
    Spec {
        name: "entangled advantage ratio",
        statement: "best entangled merit over separable merit = 2(d+1)/d for d = 2, 3, 4",
        tolerance: 1e-9,
        run: entangled_advantage,
    },
    Spec {
        name: "quantum Cramér-Rao bound",
        statement: "200 random (POVM, point, d <= 4) cases: λ_min(H - I) >= -1e-9 and merit <= p + 1e-8",
        tolerance: 1e-9,
        run: qcrb_sweep,
    },
    Spec {
        name: "achievability iff maximal entanglement",
        statement: "Im<l_i|l_j> vanishes for maximally entangled probes, not for 100 random ones, and equals (2/i)tr(RR†[T_a,T_b]) at θ = 0",
        tolerance: 1e-10,
        run: achievability_iff_max_entangled,
    },
    Spec {
        name: "refinement monotonicity",
        statement: "splitting separable elements into product terms never lowers the FI (50 cases)",
        tolerance: 1e-9,
        run: refinement_monotonicity,
    },
    Spec {
        name: "merit invariance under local unitaries",
        statement: "merit of M at θ0 equals merit of (V⊗1)M(V⊗1)† at θ1 with V = U(θ1)U(θ0)† (50 cases)",
        tolerance: 1e-9,
        run: merit_invariance,
    },
    Spec {
        name: "Bures metric",
        statement: "2(1-√F) ≈ ¼ δᵀHδ at |δ| = 1e-3, relative error, 20 random points",
        tolerance: 1e-2,
        run: bures_metric,
    },
    Spec {
        name: "MLE covariance",
        statement: "Bell, d = 2, N = 1e4, 200 repetitions: tr(V)·N / tr(H⁻¹) in [0.8, 1.25] within 60 s",
        tolerance: 0.0,
        run: mle_covariance,
    },
    Spec {
        name: "QFI counterexample search",
        statement: "no qubit probe beats (4/d)·1 over 1e4 trials; the qutrit search result is reported",
        tolerance: 1e-6,
        run: counterexample,
    },
];

/// Run check `id` (1-based).
pub fn run_check(id: usize, config: &VerifyConfig) -> CheckResult {
    let spec = &SPECS[id - 1];
    let tolerance = config.tol(spec.tolerance);
    match (spec.run)(config) {
        Ok(o) => CheckResult {
            id,
            name: spec.name.into(),
            statement: spec.statement.into(),
            expected: o.expected,
            computed: o.computed,
            residual: o.residual,
            tolerance,
            pass: o.side_conditions && o.residual <= tolerance,
            error: None,
        },
        Err(e) => CheckResult {
            id,
            name: spec.name.into(),
            statement: spec.statement.into(),
            expected: String::new(),
            computed: String::new(),
            residual: f64::INFINITY,
            tolerance,
            pass: false,
            error: Some(e.to_string()),
        },
    }
}

pub fn run_all(config: &VerifyConfig) -> VerifyReport {
    let checks: Vec<CheckResult> = (1..=NUM_CHECKS).map(|id| run_check(id, config)).collect();
    let all_pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        seed: config.seed,
        checks,
        all_pass,
    }
}

impl CheckResult {
    /// One line: status, id, name, residual against tolerance.
    pub fn summary_line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("{status} [{:2}] {}: error: {e}", self.id, self.name),
            None => format!(
                "{status} [{:2}] {}: expected {}, computed {}, residual {:.3e} (tol {:.1e})",
                self.id, self.name, self.expected, self.computed, self.residual, self.tolerance
            ),
        }
    }
}

fn random_su2_point<R: Rng>(rng: &mut R) -> [f64; 3] {
    [
        rng.random_range(0.1..PI - 0.1),
        rng.random_range(0.1..PI - 0.1),
        rng.random_range(0.0..2.0 * PI),
    ]
}

fn merit_of(
    family: &ProbeFamily,
    theta: &[f64],
    povm: &Povm,
) -> Result<(FisherMatrix, FisherMatrix, f64)> {
    let (h, i, report) = fisher::evaluate(&family.output_model(theta)?, povm, family.tolerances())?;
    Ok((h, i, report.merit))
}

fn max_entry_diff(a: &FisherMatrix, b: &FisherMatrix) -> f64 {
    linalg::max_abs_real(&(a.entries() - b.entries()))
}

fn qubit_qfi_closed_form(config: &VerifyConfig) -> Result<Outcome> {
    let family = ProbeFamily::su2_singlet();
    let mut rng = config.rng(1);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let t = random_su2_point(&mut rng);
        let h = fisher::qfi_pure(&family.output_model(&t)?);
        let s2a = t[0].sin().powi(2);
        let expected = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            4.0,
            4.0 * s2a,
            4.0 * s2a * t[1].sin().powi(2),
        ]));
        worst = worst.max(linalg::max_abs_real(&(h.entries() - expected)));
    }
    Ok(Outcome::new(
        "4 diag(1, sin²α, sin²α sin²θ)",
        format!("max |ΔH| = {worst:.2e}"),
        worst,
    ))
}

fn bell_attains_qfi(_: &VerifyConfig) -> Result<Outcome> {
    let family = ProbeFamily::su2_singlet();
    let povm = bell_basis();
    let axis = |start: f64, step: f64| (0..5).map(move |k| start + step * k as f64);
    let mut worst_entry = 0.0_f64;
    let mut worst_merit = 0.0_f64;
    for a in axis(0.2, 0.6) {
        for t in axis(0.2, 0.6) {
            for p in axis(0.3, 1.2) {
                let (h, i, m) = merit_of(&family, &[a, t, p], &povm)?;
                worst_entry = worst_entry.max(max_entry_diff(&h, &i));
                worst_merit = worst_merit.max((m - 3.0).abs());
            }
        }
    }
    Ok(Outcome::new(
        "I = H, merit 3",
        format!("max |I - H| = {worst_entry:.2e}, max |merit - 3| = {worst_merit:.2e}"),
        worst_entry.max(worst_merit),
    ))
}

const PROBE_POINTS: [[f64; 3]; 3] = [[0.6, 1.0, 0.8], [1.2, 0.4, 2.5], [2.3, 2.0, 4.0]];

fn partial_bell_merits(_: &VerifyConfig) -> Result<Outcome> {
    let family = ProbeFamily::su2_singlet();
    let mut worst = 0.0_f64;
    let mut min_rank = usize::MAX;
    let shared = time_shared(
        &[reduced_bell(1)?, reduced_bell(2)?, reduced_bell(3)?],
        &[1.0 / 3.0; 3],
    )?;
    for t in &PROBE_POINTS {
        for k in 1..=4 {
            worst = worst.max((merit_of(&family, t, &reduced_bell(k)?)?.2 - 1.0).abs());
        }
        for k in 1..=4 {
            for l in (k + 1)..=4 {
                let m = merit_of(&family, t, &linear_optics_bell(k, l)?)?.2;
                worst = worst.max((m - 2.0).abs());
            }
        }
        let (_, i, m) = merit_of(&family, t, &shared)?;
        worst = worst.max((m - 1.0).abs());
        min_rank = min_rank.min(i.rank(1e-9));
    }
    let mut o = Outcome::new(
        "merits 1 / 2 / 1, time-share FI rank 3",
        format!("max merit error {worst:.2e}, time-share rank {min_rank}"),
        worst,
    );
    o.side_conditions = min_rank == 3;
    Ok(o)
}

fn local_spin_merit(config: &VerifyConfig) -> Result<Outcome> {
    let family = ProbeFamily::su2_singlet();
    let povm = local_spin_povm();
    let mut rng = config.rng(4);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let t = random_su2_point(&mut rng);
        worst = worst.max((merit_of(&family, &t, &povm)?.2 - 1.0).abs());
    }
    Ok(Outcome::new(
        "1",
        format!("max |merit - 1| = {worst:.2e}"),
        worst,
    ))
}

fn random_exp_point<R: Rng>(rng: &mut R, p: usize, scale: f64) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-scale..scale)).collect()
}

fn separable_identity(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(5);
    let mut worst = 0.0_f64;
    let mut merits = Vec::new();
    for d in 2..=5 {
        let family = ProbeFamily::exp_max_entangled(d)?;
        let target = (d * (d - 1)) as f64 / 2.0;
        let mut last = 0.0;
        for _ in 0..20 {
            let povm = random_product_povm(d, rng.random_range(1..=3), rng.random())?;
            let theta = random_exp_point(&mut rng, d * d - 1, 0.5);
            last = merit_of(&family, &theta, &povm)?.2;
            worst = worst.max((last - target).abs());
        }
        merits.push(format!("{last:.10}"));
    }
    Ok(Outcome::new(
        "1, 3, 6, 10",
        format!("[{}], max error {worst:.2e}", merits.join(", ")),
        worst,
    ))
}

fn max_entangled_qfi(_: &VerifyConfig) -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for d in 2..=6 {
        let family = ProbeFamily::exp_max_entangled(d)?;
        let p = d * d - 1;
        let h = fisher::qfi_pure(&family.output_model(&vec![0.0; p])?);
        let expected = RMat::identity(p, p) * (4.0 / d as f64);
        worst = worst.max(linalg::max_abs_real(&(h.entries() - expected)));
    }
    Ok(Outcome::new(
        "(4/d)·1",
        format!("max |ΔH| = {worst:.2e}"),
        worst,
    ))
}

/// `(|I - H|_max, merit)` for the optimal construction.
fn optimal_case(family: &ProbeFamily, theta: &[f64]) -> Result<(f64, f64)> {
    let tol = family.tolerances();
    let model = family.output_model(theta)?;
    let h = fisher::qfi_pure(&model);
    let config = MatsumotoConfig::householder(model.num_params());
    let povm = matsumoto_povm(&model, &h, &config, tol)?;
    let (h, i, report) = fisher::evaluate(&model, &povm, tol)?;
    Ok((max_entry_diff(&h, &i), report.merit))
}

fn optimal_attains_qfi(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(7);
    let qubit = ProbeFamily::su2_singlet();
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let (diff, merit) = optimal_case(&qubit, &random_su2_point(&mut rng))?;
        worst = worst.max(diff).max((merit - 3.0).abs());
    }
    let (diff, merit3) = optimal_case(&ProbeFamily::exp_max_entangled(3)?, &[0.0; 8])?;
    worst = worst.max(diff).max((merit3 - 8.0).abs());
    Ok(Outcome::new(
        "I = H, merit 3 (d = 2) and 8 (d = 3)",
        format!("d = 3 merit {merit3:.10}, max error {worst:.2e}"),
        worst,
    ))
}

fn entangled_advantage(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(8);
    let mut worst = 0.0_f64;
    let mut ratios = Vec::new();
    for d in 2..=4 {
        let family = ProbeFamily::exp_max_entangled(d)?;
        let theta = random_exp_point(&mut rng, d * d - 1, 0.5);
        let (_, best) = optimal_case(&family, &theta)?;
        let sep = merit_of(&family, &theta, &random_product_povm(d, 2, rng.random())?)?.2;
        let ratio = best / sep;
        worst = worst.max((ratio - 2.0 * (d + 1) as f64 / d as f64).abs());
        ratios.push(format!("{ratio:.10}"));
    }
    Ok(Outcome::new(
        "3, 8/3, 5/2",
        format!("[{}], max error {worst:.2e}", ratios.join(", ")),
        worst,
    ))
}

/// Projective measurement onto a Haar-random orthonormal basis of `C^d ⊗ C^d`.
fn random_projective<R: Rng>(d: usize, rng: &mut R) -> Result<Povm> {
    let u = random_unitary(d * d, rng);
    let elements = (0..d * d)
        .map(|k| linalg::projector(&u.column(k).into_owned()))
        .collect();
    Povm::from_matrices(elements, &Tolerances::default())
}

fn random_case_povm<R: Rng>(d: usize, rng: &mut R) -> Result<Povm> {
    match rng.random_range(0..4) {
        0 => random_projective(d, rng),
        1 if d == 2 => Ok(bell_basis()),
        2 if d == 2 => Ok(local_spin_povm()),
        _ => random_product_povm(d, rng.random_range(1..=3), rng.random()),
    }
}

fn random_probe<R: Rng>(d: usize, rng: &mut R) -> Result<ProbeFamily> {
    let input = if rng.random_bool(0.5) {
        max_entangled(d)?
    } else {
        BipartiteState::random(d, rng)
    };
    ProbeFamily::new(Chart::Exp(gellmann_basis(d)?), input)
}

fn qcrb_sweep(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(9);
    let mut worst_eig = f64::INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..200 {
        let d = rng.random_range(2..=4);
        let family = random_probe(d, &mut rng)?;
        let povm = random_case_povm(d, &mut rng)?;
        let theta = random_exp_point(&mut rng, d * d - 1, 1.0);
        let (h, i, merit) = merit_of(&family, &theta, &povm)?;
        worst_eig = worst_eig.min(fisher::qcrb_check(&h, &i, family.tolerances()).min_eigenvalue);
        worst_excess = worst_excess.max(merit - (d * d - 1) as f64);
    }
    let mut o = Outcome::new(
        "λ_min(H - I) >= 0, merit <= p",
        format!("min λ_min(H - I) = {worst_eig:.2e}, max merit - p = {worst_excess:.2e}"),
        (-worst_eig).max(0.0),
    );
    o.side_conditions = worst_excess <= 1e-8;
    Ok(o)
}

fn achievability_iff_max_entangled(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(10);
    let mut max_ent_gap = 0.0_f64;
    for d in 2..=4 {
        let family = ProbeFamily::exp_max_entangled(d)?;
        for _ in 0..5 {
            let theta = random_exp_point(&mut rng, d * d - 1, 1.0);
            max_ent_gap =
                max_ent_gap.max(fisher::achievability_gap(&family.output_model(&theta)?).max_abs);
        }
    }
    let mut min_random_gap = f64::INFINITY;
    let mut formula_diff = 0.0_f64;
    let mut tested = 0;
    while tested < 100 {
        let d = rng.random_range(2..=4);
        let input = BipartiteState::random(d, &mut rng);
        if input.entanglement_deficit() <= 1e-3 {
            continue;
        }
        tested += 1;
        let basis = gellmann_basis(d)?;
        let family = ProbeFamily::new(Chart::Exp(basis.clone()), input.clone())?;
        let theta = random_exp_point(&mut rng, d * d - 1, 1.0);
        min_random_gap =
            min_random_gap.min(fisher::achievability_gap(&family.output_model(&theta)?).max_abs);
        let at_zero = fisher::achievability_gap(&family.output_model(&vec![0.0; d * d - 1])?);
        let formula = fisher::achievability_gap_at_identity(&input, &basis);
        formula_diff = formula_diff.max(linalg::max_abs_real(&(at_zero.matrix - formula)));
    }
    let mut o = Outcome::new(
        "gap 0 iff RR† = 1/d; gap(0) = (2/i)tr(RR†[T_a,T_b])",
        format!(
            "max-entangled gap {max_ent_gap:.2e}, min random gap {min_random_gap:.2e}, formula diff {formula_diff:.2e}"
        ),
        max_ent_gap.max(formula_diff),
    );
    o.side_conditions = min_random_gap > 1e-8;
    Ok(o)
}

/// Group the rank-one elements of a product POVM into random separable chunks.
fn coarsen<R: Rng>(fine: &Povm, rng: &mut R) -> Result<Povm> {
    let mut terms: Vec<_> = fine
        .elements()
        .iter()
        .flat_map(|e| e.product_terms().unwrap_or_default().to_vec())
        .collect();
    for k in (1..terms.len()).rev() {
        terms.swap(k, rng.random_range(0..=k));
    }
    let mut elements = Vec::new();
    while !terms.is_empty() {
        let take = rng.random_range(1..=3).min(terms.len());
        elements.push(PovmElement::separable(terms.drain(..take).collect()));
    }
    Povm::new(fine.dim(), elements, &Tolerances::default())
}

fn refinement_monotonicity(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(11);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let d = rng.random_range(2..=3);
        let family = random_probe(d, &mut rng)?;
        let fine = random_product_povm(d, rng.random_range(1..=3), rng.random())?;
        let coarse = coarsen(&fine, &mut rng)?;
        let refined = refine_separable(&coarse)?;
        let theta = random_exp_point(&mut rng, d * d - 1, 1.0);
        let model = family.output_model(&theta)?;
        let tol = family.tolerances();
        let i_fine = fisher::classical_fi_pure(&model, &refined, tol)?;
        let i_coarse = fisher::classical_fi_pure(&model, &coarse, tol)?;
        worst = worst.min(linalg::min_eigenvalue_symmetric(
            &(i_fine.entries() - i_coarse.entries()),
        ));
    }
    Ok(Outcome::new(
        "λ_min(I_refined - I_coarse) >= 0",
        format!("min eigenvalue {worst:.2e}"),
        (-worst).max(0.0),
    ))
}

fn merit_invariance(config: &VerifyConfig) -> Result<Outcome> {
    let mut rng = config.rng(12);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let (family, t0, t1, povm) = if k % 2 == 0 {
            let povm = match rng.random_range(0..3) {
                0 => bell_basis(),
                1 => local_spin_povm(),
                _ => random_product_povm(2, 2, rng.random())?,
            };
            let t0 = random_su2_point(&mut rng).to_vec();
            let t1 = random_su2_point(&mut rng).to_vec();
            (ProbeFamily::su2_singlet(), t0, t1, povm)
        } else {
            let d = 3;
            let family = ProbeFamily::exp_max_entangled(d)?;
            let povm = random_case_povm(d, &mut rng)?;
            let t0 = random_exp_point(&mut rng, 8, 1.0);
            let t1 = random_exp_point(&mut rng, 8, 1.0);
            (family, t0, t1, povm)
        };
        worst = worst.max(invariance_sweep(&family, &t0, &t1, &povm)?.difference);
    }
    Ok(Outcome::new(
        "0",
        format!("max |merit0 - merit1| = {worst:.2e}"),
        worst,
    ))
}

fn bures_metric(config: &VerifyConfig) -> Result<Outcome> {
    let family = ProbeFamily::su2_singlet();
    let mut rng = config.rng(13);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let t = random_su2_point(&mut rng);
        let mut delta = [0.0; 3];
        for x in delta.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        let norm = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
        delta.iter_mut().for_each(|x| *x *= 1e-3 / norm);
        let moved: Vec<f64> = t.iter().zip(&delta).map(|(a, b)| a + b).collect();
        let h = fisher::qfi_pure(&family.output_model(&t)?);
        let dv = nalgebra::DVector::from_column_slice(&delta);
        let quad = 0.25 * (dv.transpose() * h.entries() * &dv)[(0, 0)];
        let bures =
            fisher::bures_distance_sq_pure(&family.output_ket(&t)?, &family.output_ket(&moved)?);
        worst = worst.max(((bures - quad) / quad).abs());
    }
    Ok(Outcome::new(
        "ratio 1",
        format!("max relative error {worst:.2e}"),
        worst,
    ))
}

/// True parameter of the covariance study: generic, with every Bell
/// probability well away from zero.
pub const STUDY_POINT: [f64; 3] = [0.6, 1.0, 0.8];

fn mle_covariance(config: &VerifyConfig) -> Result<Outcome> {
    let family = ProbeFamily::su2_singlet();
    let start = Instant::now();
    let report = covariance_study(
        &family,
        &STUDY_POINT,
        &bell_basis(),
        10_000,
        200,
        config.seed,
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    let h = fisher::qfi_pure(&family.output_model(&STUDY_POINT)?);
    let h_inv = h.inverse(family.tolerances())?;
    let cov = RMat::from_fn(3, 3, |i, j| report.covariance[i][j]);
    let ratio = cov.trace() * report.n as f64 / h_inv.trace();
    let outside = (0.8 - ratio).max(ratio - 1.25).max(0.0);
    let mut o = Outcome::new(
        "ratio in [0.8, 1.25]",
        format!("ratio {ratio:.4}, {elapsed:.1} s"),
        outside,
    );
    o.side_conditions = elapsed < 60.0;
    Ok(o)
}

fn counterexample(config: &VerifyConfig) -> Result<Outcome> {
    let qubit = counterexample_search(2, 10_000, config.seed)?;
    let qutrit = counterexample_search(3, 10_000, config.seed)?;
    let qutrit_note = if qutrit.found {
        format!("d = 3 witness with excess {:.4}", qutrit.excess)
    } else {
        "d = 3 none found".to_string()
    };
    let mut o = Outcome::new(
        "d = 2 excess <= 1e-6",
        format!("d = 2 excess {:.2e}; {qutrit_note}", qubit.excess),
        qubit.excess.max(0.0),
    );
    o.side_conditions = qubit.excess <= WITNESS_MARGIN || qubit.excess.is_nan();
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_checks_pass() {
        let config = VerifyConfig::default();
        for id in [1, 2, 3, 4, 6, 7, 8, 13] {
            let r = run_check(id, &config);
            assert!(r.pass, "{}", r.summary_line());
        }
    }

    #[test]
    fn zero_tolerance_fails_with_residuals() {
        let config = VerifyConfig {
            tolerance_override: Some(0.0),
            ..VerifyConfig::default()
        };
        let r = run_check(1, &config);
        assert!(!r.pass);
        assert!(r.residual > 0.0);
        assert_eq!(r.tolerance, 0.0);
        assert!(r.summary_line().starts_with("FAIL"));
    }
}
