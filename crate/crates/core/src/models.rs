//! Second-order polynomial model on a design: model matrix, information
//! matrix and coefficient variances.

use std::fmt;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::Design;
use crate::error::{Error, Result};
use crate::orthopoly::{orthonormal_basis, OrthonormalBasis};

/// Pivots below this (on the information matrix, unit-diagonal scale) make
/// the model non-estimable.
pub const SINGULAR_PIVOT: f64 = 1e-10;

/// One model coefficient. Factors are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Intercept,
    Linear(usize),
    Quadratic(usize),
    Bilinear(usize, usize),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Intercept => write!(f, "a0"),
            Term::Linear(j) => write!(f, "a{j}"),
            Term::Quadratic(j) => write!(f, "a{j}{j}"),
            Term::Bilinear(j, k) => write!(f, "a{j}{k}"),
        }
    }
}

impl Term {
    /// Label that stays unambiguous past nine factors.
    pub fn label(&self) -> String {
        match self {
            Term::Intercept => "a0".into(),
            Term::Linear(j) => format!("a{j}"),
            Term::Quadratic(j) => format!("a{j}.{j}"),
            Term::Bilinear(j, k) => format!("a{j}.{k}"),
        }
    }
}

/// Intercept, linear 1..n, quadratic 1..n, then bilinear (j, k), j < k.
pub fn model_terms(n: usize) -> Vec<Term> {
    let mut terms = vec![Term::Intercept];
    terms.extend((1..=n).map(Term::Linear));
    terms.extend((1..=n).map(Term::Quadratic));
    for j in 1..=n {
        terms.extend((j + 1..=n).map(|k| Term::Bilinear(j, k)));
    }
    terms
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    terms: Vec<Term>,
    values: DMatrix<f64>,
}

impl ModelMatrix {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

pub fn model_matrix(design: &Design, basis: &OrthonormalBasis) -> Result<ModelMatrix> {
    if basis.q() != design.q().as_usize() {
        return Err(Error::Shape(format!(
            "basis is for q={} but the design has q={}",
            basis.q(),
            design.q()
        )));
    }
    let terms = model_terms(design.factors());
    let values = DMatrix::from_fn(design.runs(), terms.len(), |i, c| {
        let row = design.row(i);
        let p = |u: usize, j: usize| basis.value(u, row[j - 1] as usize);
        match terms[c] {
            Term::Intercept => 1.0,
            Term::Linear(j) => p(1, j),
            Term::Quadratic(j) => p(2, j),
            Term::Bilinear(j, k) => p(1, j) * p(1, k),
        }
    });
    Ok(ModelMatrix { terms, values })
}

/// `M^T M / N` with its term labels.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoSummary {
    terms: Vec<Term>,
    runs: usize,
    matrix: DMatrix<f64>,
}

impl InfoSummary {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn entry(&self, a: Term, b: Term) -> Option<f64> {
        let i = self.terms.iter().position(|&t| t == a)?;
        let j = self.terms.iter().position(|&t| t == b)?;
        Some(self.matrix[(i, j)])
    }

    /// The sub-matrix on the given terms, in that order.
    pub fn block(&self, terms: &[Term]) -> Option<DMatrix<f64>> {
        let idx: Vec<usize> = terms
            .iter()
            .map(|t| self.terms.iter().position(|s| s == t))
            .collect::<Option<_>>()?;
        Some(DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
            self.matrix[(idx[r], idx[c])]
        }))
    }

    /// CSV with a header row of labels. `decimals` rounds for display; `None`
    /// writes full precision.
    pub fn to_csv(&self, decimals: Option<usize>) -> String {
        let mut s = String::from("term");
        for t in &self.terms {
            write!(s, ",{}", t.label()).unwrap();
        }
        s.push('\n');
        for (r, t) in self.terms.iter().enumerate() {
            s.push_str(&t.label());
            for c in 0..self.terms.len() {
                let v = self.matrix[(r, c)];
                match decimals {
                    Some(d) => write!(s, ",{}", fmt_rounded(v, d)).unwrap(),
                    None => write!(s, ",{v:?}").unwrap(),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Rounds for display, printing negative zero as zero.
pub fn fmt_rounded(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn information_matrix(design: &Design) -> InfoSummary {
    let basis = orthonormal_basis(design.q());
    let m = model_matrix(design, &basis).expect("basis built for the design's q");
    let runs = design.runs();
    let matrix = m.values.tr_mul(&m.values) / runs as f64;
    InfoSummary {
        terms: m.terms,
        runs,
        matrix,
    }
}

/// Diagonal of `(M^T M)^-1`: each coefficient's variance as a multiple of σ².
pub fn estimate_variances(design: &Design) -> Result<Vec<(Term, f64)>> {
    let info = information_matrix(design);
    let lu = info.matrix.clone().lu();
    let u = lu.u();
    for c in 0..u.ncols() {
        let pivot = u[(c, c)];
        if !(pivot.abs() >= SINGULAR_PIVOT) {
            return Err(Error::Singular { column: c, pivot });
        }
    }
    let inv = lu
        .try_inverse()
        .ok_or(Error::Singular { column: 0, pivot: 0.0 })?;
    let runs = info.runs as f64;
    Ok(info
        .terms
        .iter()
        .enumerate()
        .map(|(i, &t)| (t, inv[(i, i)] / runs))
        .collect())
}
