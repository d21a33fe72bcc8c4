//! Orthonormal polynomial contrasts on the equally spaced levels {0, ..., q-1}.
//!
//! `p_0 = 1` and `p_u` has degree `u`; the table is normalized so that
//! `sum_x p_i(x) p_j(x) = q * delta_ij`, with every leading coefficient
//! positive. The construction orthogonalizes in increasing degree, so the
//! basis is the one Gram-Schmidt produces from `1, x, x^2, ...`; each new
//! direction is taken as `t * p_{u-1}` (t the centred, rescaled level) rather
//! than a raw monomial, which spans the same space and keeps the process well
//! conditioned for larger q.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::PrimeLevel;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    q: usize,
    values: Vec<f64>,
    rho: f64,
}

impl OrthonormalBasis {
    pub fn new(q: PrimeLevel) -> Self {
        orthonormal_basis(q)
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    /// `p_u(x)`.
    #[inline]
    pub fn value(&self, u: usize, x: usize) -> f64 {
        self.values[u * self.q + x]
    }

    /// `p_u` evaluated at every level.
    #[inline]
    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.q..(u + 1) * self.q]
    }

    /// Normalizer of the linear contrast, `p_1(x) = rho (x - (q-1)/2)`.
    pub fn rho(&self) -> f64 {
        self.rho
    }
}

pub fn orthonormal_basis(q: PrimeLevel) -> OrthonormalBasis {
    let q = q.as_usize();
    let qf = q as f64;
    let half = (qf - 1.0) / 2.0;
    let t: Vec<f64> = (0..q).map(|x| (x as f64 - half) / half).collect();

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(q);
    for u in 0..q {
        let mut v: Vec<f64> = if u == 0 {
            vec![1.0; q]
        } else {
            rows[u - 1].iter().zip(&t).map(|(p, t)| p * t).collect()
        };
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for r in &rows {
                let proj = dot(&v, r) / qf;
                v.iter_mut().zip(r).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let norm = (dot(&v, &v) / qf).sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        rows.push(v);
    }

    let rho = (12.0 / ((qf + 1.0) * (qf - 1.0))).sqrt();
    OrthonormalBasis {
        q,
        values: rows.concat(),
        rho,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The weight `g(v) = cos(pi (v+1/2)/q) / sin^2(pi (v+1/2)/q)` of the cosine
/// expansion below.
pub fn cosine_weight(q: PrimeLevel, v: usize) -> f64 {
    let a = PI * (v as f64 + 0.5) / q.get() as f64;
    a.cos() / (a.sin() * a.sin())
}

/// Evaluates the linear contrast through its finite cosine expansion
/// `-(rho / 2q) sum_v g(v) cos((2v+1) pi (x + 1/2) / q)`, an independent
/// route to `p_1(x)`.
pub fn linear_poly_cosine(q: PrimeLevel, x: u32) -> Result<f64> {
    if x >= q.get() {
        return Err(Error::OutOfRange {
            what: "level",
            value: x as i64,
            lo: 0,
            hi: q.get() as i64 - 1,
        });
    }
    let qf = q.get() as f64;
    let rho = (12.0 / ((qf + 1.0) * (qf - 1.0))).sqrt();
    let s: f64 = (0..q.as_usize())
        .map(|v| {
            cosine_weight(q, v) * ((2.0 * v as f64 + 1.0) * PI * (x as f64 + 0.5) / qf).cos()
        })
        .sum();
    Ok(-rho / (2.0 * qf) * s)
}
