//! Exact computations for instability stratifications of linear actions and
//! for θ-stability of sheaves of fixed Harder–Narasimhan type.
//!
//! The crate is organised bottom-up:
//!
//! * [`ratpoly`]: Hilbert polynomials, multiplicities and reduced polynomials;
//! * [`convexgeo`]: nearest point of a convex hull (Wolfe's method) and a
//!   brute-force oracle;
//! * [`strata`]: the index set `𝓑`, torus strata, `Z_β`/`Y_β` membership and
//!   certified perturbation bounds;
//! * [`quotmodel`]: Hilbert–Mumford weights of symbolic quot-scheme points and
//!   the weight `β(τ)` of a Harder–Narasimhan type;
//! * [`hntheta`]: symbolic sheaf profiles, direct sums, θ-stability and the
//!   perturbed Hilbert–Mumford calculus.
//!
//! Everything is generic over an exact [`Scalar`]; the aliases below fix it to
//! arbitrary-precision rationals.

pub mod convexgeo;
pub mod error;
pub mod hntheta;
pub mod linalg;
pub mod quotmodel;
pub mod ratpoly;
pub mod scalar;
pub mod schema;
pub mod strata;

pub use error::{Error, Result};
pub use scalar::{parse_scalar, Scalar};

/// Arbitrary-precision rational numbers.
pub type Rational = num_rational::BigRational;

pub type IntPolynomial = ratpoly::Polynomial<Rational>;
pub type RatVector = convexgeo::Vector<Rational>;
pub type RatInnerProduct = convexgeo::InnerProduct<Rational>;
pub type WeightSystem = strata::WeightSystem<Rational>;
pub type HnType = quotmodel::HnType<Rational>;
pub type QuotPoint = quotmodel::QuotPoint<Rational>;
pub type BetaTau = quotmodel::BetaTau<Rational>;
pub type SheafProfile = hntheta::SheafProfile<Rational>;
pub type ThetaParam = hntheta::ThetaParam<Rational>;
