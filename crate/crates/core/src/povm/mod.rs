//! Measurements on the joint output state.
//!
//! A [`Povm`] is a list of PSD elements summing to the identity. Elements may
//! carry a separable decomposition `Σ_i c_i |a_i><a_i| ⊗ |b_i><b_i|`; a single
//! term is the rank-one product form used throughout the separable analysis.

mod families;
mod io;
mod matsumoto;

pub use families::{
    bell_basis, bell_ket, linear_optics_bell, local_spin_povm, random_product_povm, random_unitary,
    reduced_bell, refine_separable, time_shared,
};
pub use io::{from_json_str, read_povm, to_json_string, write_povm};
pub use matsumoto::{matsumoto_povm, MatsumotoConfig};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::tolerances::Tolerances;

/// One term `c |a><a| ⊗ |b><b|` of a separable decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub c: f64,
    pub a: CVec,
    pub b: CVec,
}

impl ProductTerm {
    /// Normalizes `a` and `b`.
    pub fn new(c: f64, a: CVec, b: CVec) -> Self {
        Self {
            c,
            a: linalg::normalized(&a),
            b: linalg::normalized(&b),
        }
    }

    pub fn matrix(&self) -> CMat {
        linalg::kron(&linalg::projector(&self.a), &linalg::projector(&self.b)) * c(self.c, 0.0)
    }

    pub fn ket(&self) -> CVec {
        linalg::kron_vec(&self.a, &self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementStructure {
    Generic,
    /// Positive combination of product projectors.
    Separable(Vec<ProductTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub matrix: CMat,
    pub structure: ElementStructure,
}

impl PovmElement {
    pub fn generic(matrix: CMat) -> Self {
        Self {
            matrix,
            structure: ElementStructure::Generic,
        }
    }

    pub fn product(term: ProductTerm) -> Self {
        Self::separable(vec![term])
    }

    pub fn separable(terms: Vec<ProductTerm>) -> Self {
        let dim = terms[0].a.len() * terms[0].b.len();
        let mut matrix = CMat::zeros(dim, dim);
        for t in &terms {
            matrix += t.matrix();
        }
        Self {
            matrix,
            structure: ElementStructure::Separable(terms),
        }
    }

    pub fn product_terms(&self) -> Option<&[ProductTerm]> {
        match &self.structure {
            ElementStructure::Separable(t) => Some(t),
            ElementStructure::Generic => None,
        }
    }

    /// Rank-one product element `c |a><a| ⊗ |b><b|`.
    pub fn is_product_rank_one(&self) -> bool {
        matches!(&self.structure, ElementStructure::Separable(t) if t.len() == 1)
    }

    fn scaled(&self, w: f64) -> Self {
        let structure = match &self.structure {
            ElementStructure::Generic => ElementStructure::Generic,
            ElementStructure::Separable(terms) => ElementStructure::Separable(
                terms
                    .iter()
                    .map(|t| ProductTerm {
                        c: t.c * w,
                        ..t.clone()
                    })
                    .collect(),
            ),
        };
        Self {
            matrix: &self.matrix * c(w, 0.0),
            structure,
        }
    }
}

/// Residuals reported by [`Povm::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmDiagnostics {
    /// `max |Σ M_ξ - 1|` entrywise.
    pub completeness_residual: f64,
    /// Smallest eigenvalue over all elements.
    pub min_eigenvalue: f64,
    /// Largest Hermiticity violation over all elements.
    pub hermiticity_residual: f64,
    /// Largest mismatch between an element and its stored decomposition.
    pub structure_residual: f64,
}

impl PovmDiagnostics {
    pub fn is_valid(&self, tol: &Tolerances) -> bool {
        self.is_valid_with(tol, tol.povm_completeness)
    }

    fn is_valid_with(&self, tol: &Tolerances, completeness: f64) -> bool {
        self.completeness_residual <= completeness
            && self.min_eigenvalue >= -tol.povm_psd
            && self.hermiticity_residual <= tol.povm_completeness
            && self.structure_residual <= 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    /// Validated construction.
    pub fn new(dim: usize, elements: Vec<PovmElement>, tol: &Tolerances) -> Result<Self> {
        let p = Self::new_unchecked(dim, elements)?;
        p.ensure_valid(tol, tol.povm_completeness)?;
        Ok(p)
    }

    /// Construction with shape checks only; use [`Povm::validate`] to inspect it.
    pub fn new_unchecked(dim: usize, elements: Vec<PovmElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        for (i, e) in elements.iter().enumerate() {
            if e.matrix.nrows() != dim || e.matrix.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "element {i} is {}x{}, expected {dim}x{dim}",
                    e.matrix.nrows(),
                    e.matrix.ncols()
                )));
            }
        }
        Ok(Self { dim, elements })
    }

    pub fn from_matrices(matrices: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        Self::new(
            dim,
            matrices.into_iter().map(PovmElement::generic).collect(),
            tol,
        )
    }

    /// `{1}`: a measurement with a single certain outcome.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            elements: vec![PovmElement::generic(linalg::identity(dim))],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn matrices(&self) -> impl Iterator<Item = &CMat> {
        self.elements.iter().map(|e| &e.matrix)
    }

    /// True when every element is a rank-one product `c |a><a| ⊗ |b><b|`.
    pub fn is_product_rank_one(&self) -> bool {
        self.elements.iter().all(PovmElement::is_product_rank_one)
    }

    pub fn validate(&self) -> PovmDiagnostics {
        let mut sum = CMat::zeros(self.dim, self.dim);
        let mut min_eig = f64::INFINITY;
        let mut herm = 0.0_f64;
        let mut structure = 0.0_f64;
        for e in &self.elements {
            sum += &e.matrix;
            herm = herm.max(linalg::hermiticity_residual(&e.matrix));
            min_eig = min_eig.min(linalg::min_eigenvalue_hermitian(&e.matrix));
            if let ElementStructure::Separable(terms) = &e.structure {
                let mut rebuilt = CMat::zeros(self.dim, self.dim);
                for t in terms {
                    if t.a.len() * t.b.len() != self.dim || t.c < 0.0 {
                        structure = f64::INFINITY;
                        continue;
                    }
                    rebuilt += t.matrix();
                }
                structure = structure.max(linalg::max_abs(&(rebuilt - &e.matrix)));
            }
        }
        PovmDiagnostics {
            completeness_residual: linalg::max_abs(&(sum - linalg::identity(self.dim))),
            min_eigenvalue: min_eig,
            hermiticity_residual: herm,
            structure_residual: structure,
        }
    }

    pub(crate) fn ensure_valid(&self, tol: &Tolerances, completeness: f64) -> Result<()> {
        let diag = self.validate();
        if !diag.is_valid_with(tol, completeness) {
            return Err(Error::InvalidPovm(format!(
                "completeness residual {:e}, min eigenvalue {:e}, hermiticity {:e}, structure {:e}",
                diag.completeness_residual,
                diag.min_eigenvalue,
                diag.hermiticity_residual,
                diag.structure_residual
            )));
        }
        Ok(())
    }

    /// Every element multiplied by `w`; the result is not a POVM unless `w = 1`.
    pub fn scaled_unchecked(&self, w: f64) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.iter().map(|e| e.scaled(w)).collect(),
        }
    }

    /// `M_ξ -> (V ⊗ 1) M_ξ (V ⊗ 1)^dagger` for a unitary `V` on the first factor.
    /// Product decompositions are carried along (`a -> V a`).
    pub fn conjugate_first(&self, v: &CMat) -> Result<Self> {
        let d = v.nrows();
        if d * d != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "local unitary is {d}x{d}, POVM acts on dimension {}",
                self.dim
            )));
        }
        let big = linalg::kron(v, &linalg::identity(d));
        let big_adj = big.adjoint();
        let elements = self
            .elements
            .iter()
            .map(|e| {
                let matrix = &big * &e.matrix * &big_adj;
                let structure = match &e.structure {
                    ElementStructure::Generic => ElementStructure::Generic,
                    ElementStructure::Separable(terms) => ElementStructure::Separable(
                        terms
                            .iter()
                            .map(|t| ProductTerm {
                                c: t.c,
                                a: v * &t.a,
                                b: t.b.clone(),
                            })
                            .collect(),
                    ),
                };
                PovmElement { matrix, structure }
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            elements,
        })
    }
}

/// Bloch vector `(<σ1>, <σ2>, <σ3>)` of a qubit ket.
pub fn bloch_vector(ket: &CVec) -> [f64; 3] {
    let k = linalg::normalized(ket);
    let s = linalg::pauli();
    [
        linalg::sandwich(&k, &s[0], &k).re,
        linalg::sandwich(&k, &s[1], &k).re,
        linalg::sandwich(&k, &s[2], &k).re,
    ]
}
