//! Rank-one factorization of auto-correlation matrix polynomials.
//!
//! Given signals `x_1..x_K` of length `N`, [`autocorr::correlate`] builds the
//! `K x K` matrix polynomial `Gamma(z)` of their cross-correlations. The
//! [`factorize`] module solves the inverse problem: it decides whether
//! `Gamma` determines the signals up to a global unit scalar, counts the
//! distinct solutions when it does not, and enumerates all of them.
//!
//! Polynomials are [`poly::BoundedPoly`] values: coefficient vectors in
//! ascending powers whose length fixes the degree bound, so that vanishing
//! leading coefficients act as roots at infinity.

pub mod autocorr;
pub mod cli;
pub mod error;
pub mod factorize;
pub mod gcd;
pub mod oracle;
pub mod poly;
pub mod roots;

pub use autocorr::{correlate, palindromic_check, residual, CorrMatrixPoly, SignalTuple};
pub use error::{Error, Result};
pub use factorize::{
    common_gcd, coprime_recover, count_solutions, enumerate_all, is_unique, k2_explicit,
    root_pairs, row_gcd, FactorizeOptions, RootPair, RootPairStructure, Solution, SolutionSet,
};
pub use gcd::{divides, gcd_many, sylvester_coprime, GcdOptions, GcdResult};
pub use poly::BoundedPoly;
pub use roots::{
    conj_reflect, find_roots, from_roots, riemann_reflection, ExtRoot, RootFactorization,
    RootOptions,
};

pub use num_complex::Complex64;
