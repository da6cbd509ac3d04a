//! Exact statistics of the Calkin–Wilf tree.
//!
//! The tree is rooted at `1/1` and every node `a/b` has the children
//! `a/(a+b)` and `(a+b)/b`. Reading it row by row enumerates every positive
//! rational exactly once. This crate provides
//!
//! * streaming enumeration of tree rows ([`tree`]),
//! * continued-fraction and tree-path coding ([`contfrac`]),
//! * the limit distribution function of the rows and its empirical
//!   counterparts ([`distribution`]),
//! * the moment relations of that distribution ([`moments`]),
//! * the p-adic limit measures and their Markov chains ([`padic`]),
//! * a reproducible random walk on the tree ([`walk`]).
//!
//! Integer-valued structures are generic over the integer type `T` used in
//! [`num_rational::Ratio<T>`]; floating point routines are generic over
//! [`num_traits::Float`]. The aliases below fix the usual choices.

pub mod contfrac;
pub mod distribution;
mod error;
mod exact;
pub mod moments;
pub mod padic;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, ToPrimitive};

/// Integer types usable as numerators, denominators and partial quotients.
pub trait Integral: Integer + Clone + Debug + Display + ToPrimitive + FromPrimitive {}

impl<T> Integral for T where T: Integer + Clone + Debug + Display + ToPrimitive + FromPrimitive {}

pub(crate) fn to_bigint<T: Integral>(x: &T) -> BigInt {
    match x.to_i128() {
        Some(v) => BigInt::from(v),
        None => x.to_string().parse().expect("integer display is decimal"),
    }
}

/// Arbitrary-precision reduced fraction; the default value type.
pub type Rational = num_rational::BigRational;
/// Machine-word fraction, adequate for rows up to depth ~90.
pub type Rational64 = Ratio<u64>;
/// Continued fraction with arbitrary-precision quotients.
pub type Cf = contfrac::ContinuedFraction<BigInt>;
/// Eventually periodic continued fraction with arbitrary-precision quotients.
pub type PeriodicCf = contfrac::PeriodicCf<BigInt>;
/// Argument type of the limit distribution with arbitrary-precision quotients.
pub type CfReal = distribution::CfReal<BigInt>;

pub use contfrac::{Direction, TreePath};
pub use tree::{GenerationIndex, GenerationStream};
