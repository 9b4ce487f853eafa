//! POVM text files.
//!
//! ```text
//! {"dim": D,
//!  "elements": [{"matrix": [[re, im], ...],            // row-major, D*D entries
//!                "product": {"c": c, "a": [[re, im], ...], "b": [[re, im], ...]}}, ...]}
//! ```
//!
//! `product` is optional. Elements with several product terms are written with
//! a `product_terms` list instead.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ElementStructure, Povm, PovmElement, ProductTerm};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::serialize;
use crate::tolerances::Tolerances;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmFile {
    dim: usize,
    elements: Vec<ElementFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    matrix: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    product: Option<ProductFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    product_terms: Option<Vec<ProductFile>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductFile {
    c: f64,
    a: Vec<[f64; 2]>,
    b: Vec<[f64; 2]>,
}

fn pairs(v: impl Iterator<Item = num_complex::Complex64>) -> Vec<[f64; 2]> {
    v.map(|z| [z.re, z.im]).collect()
}

fn ket(p: &[[f64; 2]]) -> CVec {
    CVec::from_iterator(p.len(), p.iter().map(|&[re, im]| c(re, im)))
}

impl From<&ProductTerm> for ProductFile {
    fn from(t: &ProductTerm) -> Self {
        Self {
            c: t.c,
            a: pairs(t.a.iter().copied()),
            b: pairs(t.b.iter().copied()),
        }
    }
}

impl ProductFile {
    fn into_term(self, dim: usize) -> Result<ProductTerm> {
        if self.a.len() * self.b.len() != dim || self.a.is_empty() {
            return Err(Error::Parse(format!(
                "product factors of length {} and {} do not match dimension {dim}",
                self.a.len(),
                self.b.len()
            )));
        }
        Ok(ProductTerm {
            c: self.c,
            a: ket(&self.a),
            b: ket(&self.b),
        })
    }
}

fn to_file(povm: &Povm) -> PovmFile {
    let dim = povm.dim();
    let elements = povm
        .elements()
        .iter()
        .map(|e| {
            let matrix = (0..dim * dim).map(|i| e.matrix[(i / dim, i % dim)]);
            let (product, product_terms) = match &e.structure {
                ElementStructure::Generic => (None, None),
                ElementStructure::Separable(t) if t.len() == 1 => (Some((&t[0]).into()), None),
                ElementStructure::Separable(t) => (None, Some(t.iter().map(Into::into).collect())),
            };
            ElementFile {
                matrix: pairs(matrix),
                product,
                product_terms,
            }
        })
        .collect();
    PovmFile { dim, elements }
}

fn from_file(file: PovmFile, tol: &Tolerances) -> Result<Povm> {
    let dim = file.dim;
    if dim == 0 {
        return Err(Error::Parse("dim must be positive".into()));
    }
    let mut elements = Vec::with_capacity(file.elements.len());
    for (i, e) in file.elements.into_iter().enumerate() {
        if e.matrix.len() != dim * dim {
            return Err(Error::Parse(format!(
                "element {i} has {} entries, expected {}",
                e.matrix.len(),
                dim * dim
            )));
        }
        let matrix = CMat::from_fn(dim, dim, |r, col| {
            let [re, im] = e.matrix[r * dim + col];
            c(re, im)
        });
        let structure = match (e.product, e.product_terms) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse(format!(
                    "element {i} has both product and product_terms"
                )))
            }
            (Some(p), None) => ElementStructure::Separable(vec![p.into_term(dim)?]),
            (None, Some(ts)) if !ts.is_empty() => ElementStructure::Separable(
                ts.into_iter()
                    .map(|t| t.into_term(dim))
                    .collect::<Result<_>>()?,
            ),
            _ => ElementStructure::Generic,
        };
        elements.push(PovmElement { matrix, structure });
    }
    let povm = Povm::new_unchecked(dim, elements)?;
    povm.ensure_valid(tol, tol.povm_load_completeness)?;
    Ok(povm)
}

pub fn to_json_string(povm: &Povm) -> Result<String> {
    serialize::to_string(&to_file(povm))
}

/// Parse and validate (completeness residual at most `tol.povm_load_completeness`).
pub fn from_json_str(text: &str, tol: &Tolerances) -> Result<Povm> {
    from_file(serialize::from_str(text)?, tol)
}

pub fn write_povm(povm: &Povm, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(povm)?)?;
    Ok(())
}

pub fn read_povm(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Povm> {
    from_json_str(&fs::read_to_string(path)?, tol)
}
