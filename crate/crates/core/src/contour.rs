//! Closed curves sampled at equispaced angles, spectral differentiation and
//! periodic trapezoid quadrature.
//!
//! Samples sit at `ψ_j = 2πj/N`, `N` a power of two no smaller than 16. Every
//! contour integral in the crate is `(2π/N)·Σ_j g(ψ_j)`, which converges
//! geometrically for the real-analytic integrands used throughout.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::{imag_unit, norm, Real};

/// Smallest admissible sample count.
pub const MIN_SAMPLES: usize = 16;

/// Relative threshold below which a sampled derivative counts as vanishing.
pub const REGULARITY_TOL: f64 = 1e-10;

pub fn check_sample_count(n: usize) -> Result<()> {
    if n < MIN_SAMPLES || !n.is_power_of_two() {
        return Err(Error::InvalidSampleCount(n));
    }
    Ok(())
}

/// Equispaced sample angles `2πj/N`.
pub fn angles<T: Real>(n: usize) -> Vec<T> {
    let step = T::TAU() / T::from_count(n);
    (0..n).map(|j| step * T::from_count(j)).collect()
}

/// A closed curve in ℂⁿ stored coordinate-major: `coords[i][j]` is coordinate `i` at `ψ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedCurve<T> {
    coords: Vec<Vec<Complex<T>>>,
}

impl<T: Real> ClosedCurve<T> {
    /// Samples `f(ψ_j)` at `N` equispaced angles; `f` returns a point of ℂⁿ.
    pub fn sample<F>(samples: usize, f: F) -> Result<Self>
    where
        F: Fn(T) -> Result<Vec<Complex<T>>>,
    {
        check_sample_count(samples)?;
        let pts = angles::<T>(samples).into_iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_points(&pts)
    }

    /// Scalar curve in ℂ from a formula.
    pub fn sample_planar<F>(samples: usize, f: F) -> Result<Self>
    where
        F: Fn(T) -> Complex<T>,
    {
        Self::sample(samples, |psi| Ok(vec![f(psi)]))
    }

    /// Builds a curve from a list of points of ℂⁿ (all of the same dimension).
    pub fn from_points(points: &[Vec<Complex<T>>]) -> Result<Self> {
        check_sample_count(points.len())?;
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::Dimension("points must have at least one coordinate".into()));
        }
        let mut coords = vec![Vec::with_capacity(points.len()); dim];
        for (j, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Dimension(format!("point {j} has {} coordinates, expected {dim}", p.len())));
            }
            if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Evaluation(format!("non-finite sample at index {j}")));
            }
            for (c, z) in coords.iter_mut().zip(p) {
                c.push(*z);
            }
        }
        Ok(Self { coords })
    }

    /// Planar curve from scalar samples.
    pub fn from_scalar(samples: Vec<Complex<T>>) -> Result<Self> {
        check_sample_count(samples.len())?;
        Ok(Self { coords: vec![samples] })
    }

    /// Rejects curves whose spectral derivative vanishes somewhere.
    pub fn require_regular(self) -> Result<Self> {
        let d = self.spectral_derivative();
        let scale = self.scale();
        for j in 0..self.len() {
            if norm(&d.point(j)) <= T::lit(REGULARITY_TOL) * scale {
                return Err(Error::IrregularCurve { index: j });
            }
        }
        Ok(self)
    }

    /// Ambient complex dimension.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Sample count `N`.
    pub fn len(&self) -> usize {
        self.coords[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> &[Complex<T>] {
        &self.coords[i]
    }

    pub fn coords(&self) -> &[Vec<Complex<T>>] {
        &self.coords
    }

    /// Sample `j` (indices wrap modulo `N`).
    pub fn point(&self, j: usize) -> Vec<Complex<T>> {
        let j = j % self.len();
        self.coords.iter().map(|c| c[j]).collect()
    }

    pub fn angles(&self) -> Vec<T> {
        angles(self.len())
    }

    /// `max(1, max_j |γ_j|)`: the scale used for relative tolerances.
    pub fn scale(&self) -> T {
        (0..self.len()).fold(T::one(), |acc, j| acc.max(norm(&self.point(j))))
    }

    /// Cyclic shift of the sample phase by `k` positions.
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.len();
        let coords = self
            .coords
            .iter()
            .map(|c| (0..n).map(|j| c[(j + k) % n]).collect())
            .collect();
        Self { coords }
    }

    /// `dγ/dψ` by differentiating the truncated Fourier series.
    pub fn spectral_derivative(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| spectral_derivative_scalar(c)).collect() }
    }

    /// Trigonometric interpolant resampled on `factor · N` nodes (zero padding;
    /// the Nyquist mode is split evenly between `±N/2`).
    pub fn upsampled(&self, factor: usize) -> Self {
        Self { coords: self.coords.iter().map(|c| upsample_scalar(c, factor)).collect() }
    }

    pub fn fourier(&self) -> FourierData<T> {
        FourierData { coefficients: self.coords.iter().map(|c| dft_coefficients(c)).collect() }
    }
}

/// Discrete Fourier coefficients `c_m`, `m = −N/2..N/2−1`, with `samples_j = Σ c_m e^{imψ_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierData<T> {
    /// `coefficients[i][m + N/2]` for coordinate `i`.
    pub coefficients: Vec<Vec<Complex<T>>>,
}

impl<T: Real> FourierData<T> {
    pub fn samples(&self) -> usize {
        self.coefficients[0].len()
    }

    /// `c_m` of coordinate `coord`; zero outside the stored band.
    pub fn coefficient(&self, coord: usize, m: i64) -> Complex<T> {
        let n = self.samples() as i64;
        let idx = m + n / 2;
        if idx < 0 || idx >= n {
            return Complex::new(T::zero(), T::zero());
        }
        self.coefficients[coord][idx as usize]
    }

    /// Coefficients `c_0, c_1, …, c_{N/2−1}` of coordinate `coord`.
    pub fn nonnegative(&self, coord: usize) -> Vec<Complex<T>> {
        let half = self.samples() / 2;
        self.coefficients[coord][half..].to_vec()
    }

    /// ℓ² norm of the coefficients with `m < 0`.
    pub fn negative_mass(&self, coord: usize) -> T {
        let half = self.samples() / 2;
        norm(&self.coefficients[coord][..half])
    }

    /// Samples reconstructed by the inverse transform.
    pub fn inverse(&self) -> Vec<Vec<Complex<T>>> {
        self.coefficients.iter().map(|c| inverse_scalar(c)).collect()
    }
}

/// Fourier coefficients of scalar boundary samples.
pub fn fourier_coefficients<T: Real>(samples: &[Complex<T>]) -> Result<FourierData<T>> {
    check_sample_count(samples.len())?;
    Ok(FourierData { coefficients: vec![dft_coefficients(samples)] })
}

/// Periodic trapezoid rule `(2π/N)·Σ g_j` for an integrand sampled at the curve's nodes.
pub fn contour_integral<T: Real>(curve: &ClosedCurve<T>, integrand: &[Complex<T>]) -> Result<Complex<T>> {
    if integrand.len() != curve.len() {
        return Err(Error::SampleMismatch { expected: curve.len(), got: integrand.len() });
    }
    Ok(periodic_trapezoid(integrand))
}

/// `(2π/N)·Σ g_j` without a curve attached.
pub fn periodic_trapezoid<T: Real>(integrand: &[Complex<T>]) -> Complex<T> {
    let sum = integrand.iter().fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z);
    sum * (T::TAU() / T::from_count(integrand.len()))
}

fn dft_coefficients<T: Real>(samples: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv_n = T::one() / T::from_count(n);
    // Reorder from FFT index (m mod N) to m = −N/2..N/2−1.
    let half = n / 2;
    (0..n).map(|idx| buf[(idx + half) % n] * inv_n).collect()
}

fn inverse_scalar<T: Real>(centered: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = centered.len();
    let half = n / 2;
    let mut buf: Vec<Complex<T>> = (0..n).map(|k| centered[(k + half) % n]).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

fn upsample_scalar<T: Real>(samples: &[Complex<T>], factor: usize) -> Vec<Complex<T>> {
    let n = samples.len();
    let big = n * factor.max(1);
    let c = dft_coefficients(samples);
    let half = n / 2;
    let mut wide = vec![Complex::new(T::zero(), T::zero()); big];
    let bh = big / 2;
    for (idx, ck) in c.iter().enumerate() {
        wide[idx + bh - half] = *ck;
    }
    if factor > 1 {
        let nyq = c[0] * T::lit(0.5);
        wide[bh - half] = nyq;
        wide[bh + half] = nyq;
    }
    inverse_scalar(&wide)
}

/// Spectral derivative of periodic scalar samples; the Nyquist mode is dropped.
pub fn spectral_derivative_scalar<T: Real>(samples: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = samples.len();
    let half = n / 2;
    let mut c = dft_coefficients(samples);
    let i = imag_unit::<T>();
    for (idx, ck) in c.iter_mut().enumerate() {
        let m = idx as i64 - half as i64;
        *ck = if idx == 0 { Complex::new(T::zero(), T::zero()) } else { *ck * i * T::lit(m as f64) };
    }
    inverse_scalar(&c)
}
