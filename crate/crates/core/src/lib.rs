//! Additive functions `w(n)` (equal to 1 on primes), the values `n + w(n)`
//! they leave out, and how `n + w(n)` distributes over residue classes mod a
//! prime, both counted exactly and predicted from Euler products.
//!
//! Layers, bottom up:
//!
//! * [`arith`]: rules for `w`, smallest-prime-factor tables, segmented
//!   windows of `w(n)` with an optional disk cache.
//! * [`counting`]: image multiplicities, `Ξ(N)`, collision counts, residue
//!   histograms and exact lower bounds for `Ξ(N)`.
//! * [`expsum`]: characters mod `p`, the exponential sums of `w`, and the
//!   Fourier identities tying them to the histogram.
//! * [`analytic`]: local factors, Euler products, `1/Γ` and the predicted
//!   residue profile.
//! * [`harness`]: the comparison and scan runs behind the command line tool.
//!
//! The floating-point layers are generic over [`Real`] (`f32` or `f64`);
//! the aliases below fix `f64`, which every documented tolerance assumes.

pub mod analytic;
pub mod arith;
pub mod counting;
pub mod error;
pub mod export;
pub mod expsum;
pub mod harness;
pub mod scalar;
pub mod summation;

pub use error::{Error, Result};
pub use scalar::Real;

pub use arith::{AdditiveRule, AffineTail, RuleKind, WSource, WWindow, WindowCache};
pub use counting::{ResidueHistogram, ResidueSelection, SelectionStrategy};

pub type Complex64 = num_complex::Complex<f64>;
pub type Rational = num_rational::Ratio<i128>;

pub type CharacterTable = expsum::CharacterTable<f64>;
pub type ExpSumSet = expsum::ExpSumSet<f64>;
pub type EulerProductResult = analytic::EulerProductResult<f64>;
pub type PredictionReport = analytic::PredictionReport<f64>;
pub type ACoefficient = analytic::ACoefficient<f64>;

pub type CharacterTable32 = expsum::CharacterTable<f32>;
pub type ExpSumSet32 = expsum::ExpSumSet<f32>;
pub type PredictionReport32 = analytic::PredictionReport<f32>;
