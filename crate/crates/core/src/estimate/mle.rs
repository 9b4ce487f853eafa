use serde::{Deserialize, Serialize};

use crate::channel_model::ProbeFamily;
use crate::error::{Error, Result};
use crate::fisher;
use crate::povm::Povm;

/// Settings for the grid-seeded simplex maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    /// Grid points per axis, centred on the initial point.
    pub grid_points: usize,
    /// Half-width of the seeding box.
    pub radius: f64,
    /// Stop once every vertex is within this distance (max-norm) of the best one.
    pub simplex_tol: f64,
    pub max_iterations: usize,
    /// Above this many tensor-grid points the seeding falls back to one line
    /// search per axis.
    pub max_grid: usize,
    /// `I(init)` counts as singular when `λ_min ≤ identifiability · λ_max`.
    pub identifiability: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            grid_points: 9,
            radius: 0.5,
            simplex_tol: 1e-8,
            max_iterations: 10_000,
            max_grid: 100_000,
            identifiability: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub theta: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

/// `Σ_ξ n_ξ log p_ξ(θ)`; `-∞` outside the chart domain or where an observed
/// outcome has zero probability.
pub fn log_likelihood(counts: &[f64], family: &ProbeFamily, povm: &Povm, theta: &[f64]) -> f64 {
    let Ok(p) = family.probabilities(theta, povm) else {
        return f64::NEG_INFINITY;
    };
    let mut total = 0.0;
    for (&n, &pk) in counts.iter().zip(&p) {
        if n == 0.0 {
            continue;
        }
        if pk <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += n * pk.ln();
    }
    total
}

/// Fail with [`Error::NonIdentifiable`] when the classical Fisher information
/// at `theta` is singular.
pub fn check_identifiable(
    family: &ProbeFamily,
    povm: &Povm,
    theta: &[f64],
    rel_tol: f64,
) -> Result<fisher::FisherMatrix> {
    let model = family.output_model(theta)?;
    let fi = fisher::classical_fi_pure(&model, povm, family.tolerances())?;
    let eig = fi.eigenvalues();
    let min = eig.first().copied().unwrap_or(0.0);
    let max = eig.last().copied().unwrap_or(0.0);
    if max <= 0.0 || min <= rel_tol * max {
        return Err(Error::NonIdentifiable {
            min_eigenvalue: min,
        });
    }
    Ok(fi)
}

/// Maximum-likelihood estimate with the default [`MleConfig`].
pub fn mle(counts: &[f64], family: &ProbeFamily, povm: &Povm, init: &[f64]) -> Result<Vec<f64>> {
    mle_with(counts, family, povm, init, &MleConfig::default()).map(|r| r.theta)
}

/// Coarse grid around `init`, then Nelder-Mead on `-log L`.
///
/// The grid contains `init`, so the returned log-likelihood is never below
/// its value there.
pub fn mle_with(
    counts: &[f64],
    family: &ProbeFamily,
    povm: &Povm,
    init: &[f64],
    config: &MleConfig,
) -> Result<MleResult> {
    if counts.len() != povm.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for a POVM with {} outcomes",
            counts.len(),
            povm.len()
        )));
    }
    if counts.iter().any(|&n| !n.is_finite() || n < 0.0) {
        return Err(Error::InvalidArgument("counts must be non-negative".into()));
    }
    if config.grid_points < 1 || config.radius.is_nan() || config.radius < 0.0 {
        return Err(Error::InvalidArgument(
            "grid needs at least one point".into(),
        ));
    }
    family.chart().check(init, family.tolerances())?;
    check_identifiable(family, povm, init, config.identifiability)?;

    let cost = |theta: &[f64]| -log_likelihood(counts, family, povm, theta);
    let (start, step) = grid_seed(init, config, &cost);
    nelder_mead(&cost, &start, step, config)
}

fn grid_offsets(config: &MleConfig) -> Vec<f64> {
    let n = config.grid_points;
    if n == 1 {
        return vec![0.0];
    }
    let h = 2.0 * config.radius / (n - 1) as f64;
    // Odd counts put the centre on the grid; even counts get it appended.
    let mut offsets: Vec<f64> = (0..n).map(|k| -config.radius + k as f64 * h).collect();
    if n.is_multiple_of(2) {
        offsets.push(0.0);
    }
    offsets
}

/// Best grid point and the grid spacing (used as the initial simplex edge).
fn grid_seed(init: &[f64], config: &MleConfig, cost: &impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let offsets = grid_offsets(config);
    let p = init.len();
    let spacing = if config.grid_points > 1 {
        2.0 * config.radius / (config.grid_points - 1) as f64
    } else {
        config.radius.max(1e-3)
    };
    let total = (offsets.len() as f64).powi(p as i32);
    let mut best = init.to_vec();
    let mut best_cost = cost(init);
    if total <= config.max_grid as f64 {
        let mut idx = vec![0usize; p];
        let mut point = vec![0.0; p];
        loop {
            for a in 0..p {
                point[a] = init[a] + offsets[idx[a]];
            }
            let c = cost(&point);
            if c < best_cost {
                best_cost = c;
                best.copy_from_slice(&point);
            }
            let mut a = 0;
            while a < p {
                idx[a] += 1;
                if idx[a] < offsets.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == p {
                break;
            }
        }
    } else {
        for a in 0..p {
            let mut point = best.clone();
            for &o in &offsets {
                point[a] = init[a] + o;
                let c = cost(&point);
                if c < best_cost {
                    best_cost = c;
                    best[a] = point[a];
                }
            }
        }
    }
    (best, spacing)
}

fn simplex_size(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn nelder_mead(
    cost: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    config: &MleConfig,
) -> Result<MleResult> {
    let p = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p + 1);
    simplex.push((start.to_vec(), cost(start)));
    for a in 0..p {
        let mut x = start.to_vec();
        x[a] += step;
        let mut fx = cost(&x);
        if !fx.is_finite() {
            x[a] = start[a] - step;
            fx = cost(&x);
        }
        simplex.push((x, fx));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    order(&mut simplex);

    let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(f, g)| f + t * (g - f)).collect()
    };

    for iteration in 0..config.max_iterations {
        if simplex_size(&simplex) < config.simplex_tol {
            return Ok(MleResult {
                theta: simplex[0].0.clone(),
                log_likelihood: -simplex[0].1,
                iterations: iteration,
            });
        }
        let mut centroid = vec![0.0; p];
        for (x, _) in &simplex[..p] {
            for a in 0..p {
                centroid[a] += x[a] / p as f64;
            }
        }
        let (worst, f_worst) = simplex[p].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[p - 1].1;

        let reflected = along(&centroid, &worst, -1.0);
        let f_r = cost(&reflected);
        if f_r < f_best {
            let expanded = along(&centroid, &worst, -2.0);
            let f_e = cost(&expanded);
            simplex[p] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < f_second {
            simplex[p] = (reflected, f_r);
        } else {
            let (contracted, f_c) = if f_r < f_worst {
                let x = along(&centroid, &reflected, 0.5);
                let f = cost(&x);
                (x, f)
            } else {
                let x = along(&centroid, &worst, 0.5);
                let f = cost(&x);
                (x, f)
            };
            if f_c < f_worst.min(f_r) {
                simplex[p] = (contracted, f_c);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = along(&best, &vertex.0, 0.5);
                    let f = cost(&x);
                    *vertex = (x, f);
                }
            }
        }
        order(&mut simplex);
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        best: simplex[0].0.clone(),
        best_value: -simplex[0].1,
    })
}
