//! Numerical toolkit for the argument principle on closed curves, analytic-disc
//! families and real submanifolds of ℂⁿ.

pub mod argument;
pub mod contour;
pub mod cr;
pub mod error;
pub mod family;
pub mod linalg;
pub mod moments;
pub mod poly;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision complex scalar.
pub type C64 = num_complex::Complex<f64>;
pub type ClosedCurve64 = contour::ClosedCurve<f64>;
pub type HolomorphicBoundary64 = argument::HolomorphicBoundary<f64>;
pub type DiscFamily64 = family::DiscFamily<f64>;
pub type ManifoldPatch64 = cr::ManifoldPatch<f64>;
