use std::f64::consts::FRAC_1_SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ElementStructure, Povm, PovmElement, ProductTerm};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, I, ONE};
use crate::tolerances::Tolerances;

/// Bell vectors in the order
/// `(|00> - |11>)/√2, (|00> + |11>)/√2, (|01> + |10>)/√2, (|01> - |10>)/√2`.
pub fn bell_ket(k: usize) -> Result<CVec> {
    let (x, y, sign) = match k {
        1 => (0, 3, -1.0),
        2 => (0, 3, 1.0),
        3 => (1, 2, 1.0),
        4 => (1, 2, -1.0),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "Bell index must be 1..=4, got {k}"
            )))
        }
    };
    let mut v = CVec::zeros(4);
    v[x] = c(FRAC_1_SQRT_2, 0.0);
    v[y] = c(sign * FRAC_1_SQRT_2, 0.0);
    Ok(v)
}

fn bell_projector(k: usize) -> Result<CMat> {
    Ok(linalg::projector(&bell_ket(k)?))
}

/// Projective measurement in the Bell basis.
pub fn bell_basis() -> Povm {
    let elements = (1..=4)
        .map(|k| PovmElement::generic(bell_projector(k).expect("index in range")))
        .collect();
    Povm::new(4, elements, &Tolerances::default()).expect("Bell basis is complete")
}

/// `{M_k, 1 - M_k}` for one Bell projector.
pub fn reduced_bell(k: usize) -> Result<Povm> {
    let m = bell_projector(k)?;
    let rest = linalg::identity(4) - &m;
    Povm::from_matrices(vec![m, rest], &Tolerances::default())
}

/// `{M_k, M_l, 1 - M_k - M_l}` for two distinct Bell projectors.
pub fn linear_optics_bell(k: usize, l: usize) -> Result<Povm> {
    if k == l {
        return Err(Error::InvalidArgument(format!(
            "Bell indices must differ, got {k} twice"
        )));
    }
    let mk = bell_projector(k)?;
    let ml = bell_projector(l)?;
    let rest = linalg::identity(4) - &mk - &ml;
    Povm::from_matrices(vec![mk, ml, rest], &Tolerances::default())
}

/// Perform `povms[i]` on a fraction `weights[i]` of the copies: the union of
/// all elements, each scaled by its weight.
pub fn time_shared(povms: &[Povm], weights: &[f64]) -> Result<Povm> {
    if povms.is_empty() || povms.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} POVMs but {} weights",
            povms.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    let dim = povms[0].dim();
    if povms.iter().any(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch(
            "time-shared POVMs act on different dimensions".into(),
        ));
    }
    let elements = povms
        .iter()
        .zip(weights)
        .flat_map(|(p, &w)| p.scaled_unchecked(w).elements)
        .collect();
    Povm::new(dim, elements, &Tolerances::default())
}

fn pauli_eigenbases() -> [[CVec; 2]; 3] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let ket = |a: num_complex::Complex64, b: num_complex::Complex64| CVec::from_vec(vec![a, b]);
    [
        [ket(h, h), ket(h, -h)],
        [ket(h, I * h), ket(h, -I * h)],
        [ket(ONE, c(0.0, 0.0)), ket(c(0.0, 0.0), ONE)],
    ]
}

/// Uniform time-share over the nine local spin settings `σ_i ⊗ σ_j`.
pub fn local_spin_povm() -> Povm {
    let bases = pauli_eigenbases();
    let mut elements = Vec::with_capacity(36);
    for ba in &bases {
        for bb in &bases {
            for a in ba {
                for b in bb {
                    elements.push(PovmElement::product(ProductTerm::new(
                        1.0 / 9.0,
                        a.clone(),
                        b.clone(),
                    )));
                }
            }
        }
    }
    Povm::new(4, elements, &Tolerances::default()).expect("local spin POVM is complete")
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `diag(R)` divided out.
pub fn random_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniform time-share over `n_bases` product orthonormal bases `U_A|i> ⊗ U_B|j>`
/// with Haar-random local unitaries drawn from `seed`.
pub fn random_product_povm(d: usize, n_bases: usize, seed: u64) -> Result<Povm> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    if n_bases == 0 {
        return Err(Error::InvalidArgument("need at least one basis".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let w = 1.0 / n_bases as f64;
    let mut elements = Vec::with_capacity(n_bases * d * d);
    for _ in 0..n_bases {
        let ua = random_unitary(d, &mut rng);
        let ub = random_unitary(d, &mut rng);
        for i in 0..d {
            for j in 0..d {
                let a = ua.column(i).into_owned();
                let b = ub.column(j).into_owned();
                elements.push(PovmElement::product(ProductTerm::new(w, a, b)));
            }
        }
    }
    Povm::new(d * d, elements, &Tolerances::default())
}

/// Split every separable element into its rank-one product terms.
pub fn refine_separable(povm: &Povm) -> Result<Povm> {
    let mut elements = Vec::new();
    for (i, e) in povm.elements().iter().enumerate() {
        match &e.structure {
            ElementStructure::Generic => {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has no product decomposition"
                )))
            }
            ElementStructure::Separable(terms) if terms.len() == 1 => elements.push(e.clone()),
            ElementStructure::Separable(terms) => {
                elements.extend(terms.iter().cloned().map(PovmElement::product))
            }
        }
    }
    Povm::new(povm.dim(), elements, &Tolerances::default())
}
