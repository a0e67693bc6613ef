use num_complex::Complex;

use crate::contour::{fourier_coefficients, spectral_derivative_scalar};
use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};

/// A function holomorphic on the closed unit disc, known through its boundary
/// samples at `ψ_j = 2πj/N`.
///
/// Interior values come from the Taylor series formed by the non-negative
/// Fourier modes of the samples. Modes below the rounding floor are dropped so
/// that polynomial data is reproduced exactly.
#[derive(Debug, Clone)]
pub struct HolomorphicBoundary<T> {
    samples: Vec<Complex<T>>,
    taylor: Vec<Complex<T>>,
    negative_mass: T,
    scale: T,
}

impl<T: Real> HolomorphicBoundary<T> {
    pub fn from_samples(samples: Vec<Complex<T>>) -> Result<Self> {
        let f = fourier_coefficients(&samples)?;
        let mut taylor = f.nonnegative(0);
        let cmax = max_abs(&taylor);
        let floor = T::lit(1e3) * T::epsilon() * cmax;
        for c in taylor.iter_mut() {
            if c.norm() <= floor {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
        while taylor.len() > 1 && taylor.last().is_some_and(|c| c.norm() == T::zero()) {
            taylor.pop();
        }
        let scale = max_abs(&samples);
        Ok(Self { negative_mass: f.negative_mass(0), samples, taylor, scale })
    }

    /// Samples `φ(e^{iψ_j})` of a closed-form function.
    pub fn from_fn<F: Fn(Complex<T>) -> Complex<T>>(samples: usize, f: F) -> Result<Self> {
        let pts = crate::contour::angles::<T>(samples)
            .into_iter()
            .map(|p| f(crate::scalar::cis(p)))
            .collect();
        Self::from_samples(pts)
    }

    /// Polynomial with coefficients `c_0, c_1, …` sampled on `N` nodes.
    pub fn from_taylor(samples: usize, coefficients: &[Complex<T>]) -> Result<Self> {
        if coefficients.len() * 2 > samples {
            return Err(Error::Dimension(format!(
                "{} coefficients do not fit in {samples} samples",
                coefficients.len()
            )));
        }
        Self::from_fn(samples, |z| horner(coefficients, z))
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn taylor(&self) -> &[Complex<T>] {
        &self.taylor
    }

    /// ℓ² mass of the negative Fourier modes (zero for holomorphic data).
    pub fn negative_mass(&self) -> T {
        self.negative_mass
    }

    /// `max_j |φ(e^{iψ_j})|`.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn is_identically_zero(&self) -> bool {
        self.taylor.iter().all(|c| c.norm() == T::zero())
    }

    /// `φ − b`.
    pub fn shifted(&self, b: Complex<T>) -> Self {
        let mut taylor = self.taylor.clone();
        taylor[0] = taylor[0] - b;
        Self {
            samples: self.samples.iter().map(|z| z - b).collect(),
            scale: self.scale.max(b.norm()),
            negative_mass: self.negative_mass,
            taylor,
        }
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        horner(&self.taylor, z)
    }

    /// `(φ, φ′, φ″)` at `z`.
    pub fn eval_with_derivatives(&self, z: Complex<T>) -> [Complex<T>; 3] {
        let zero = Complex::new(T::zero(), T::zero());
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for c in self.taylor.iter().rev() {
            d2 = d2 * z + d1 * T::lit(2.0);
            d1 = d1 * z + p;
            p = p * z + c;
        }
        [p, d1, d2]
    }

    /// `dφ/dψ` at the boundary nodes (spectral derivative of the samples).
    pub fn angular_derivative(&self) -> Vec<Complex<T>> {
        spectral_derivative_scalar(&self.samples)
    }
}

pub(crate) fn horner<T: Real>(coefficients: &[Complex<T>], z: Complex<T>) -> Complex<T> {
    coefficients.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, c| acc * z + c)
}
