//! Multilevel nonregular fractional factorial designs obtained by permuting
//! the levels of regular designs, ranked by their β-wordlength patterns.

pub mod aberration;
pub mod catalog;
pub mod design;
pub mod error;
pub mod field;
pub mod models;
pub mod optimal;
pub mod orthopoly;
pub mod recursion;

pub use aberration::{
    beta_k, beta_pattern, beta_sum_check, beta_sums, compare_patterns, odd_beta_sum, BetaPattern, COMPARE_TOL, ZERO_TOL,
};
pub use design::{
    expand, is_mirror_symmetric, linear_permute, same_design, strength, williams,
    williams_inverse, williams_value, Design, GeneratorSet, PermutationVector,
};
pub use error::{Error, Result};
pub use field::{check_odd_prime, enumerate_tuples, rank_mod, CoefVector, PrimeLevel};
pub use orthopoly::{linear_poly_cosine, orthonormal_basis, OrthonormalBasis};
