//! Algebra of bias-free neural networks with the reciprocal activation
//! `σ(x) = 1/x`: closed-form outputs, parameter recovery, membership tests,
//! finite-field dimension computations and a small trainer.

pub mod error;
pub mod factor;
pub mod field;
pub mod geometry;
pub mod matrix;
pub mod network;
pub mod polyalg;
pub mod reconstruct;
pub mod train;

pub use error::{Error, Result};
pub use field::{Complex, Dual, DualNum, Field, NumericField, PrimeField, RandomScalar, Real};
pub use network::{Architecture, DegreeProfile, RationalTuple, Weights};
pub use matrix::Matrix;
pub use polyalg::{ExponentVector, HomPoly, LinearForm};

/// Binomial coefficient `C(n, k)`, saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}
