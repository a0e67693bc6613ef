//! Winding numbers, zero counts, linking numbers, curve degrees, zero
//! localisation and the principal-value logarithmic residue.

mod count;
mod holomorphic;
mod locate;

pub use count::{boundary_zeros, log_residue_pv, zero_count, ResidueValue, PV_WINDOWS};
pub use holomorphic::HolomorphicBoundary;
pub use locate::{locate_zeros, Disc, Zero, ZeroList, LOCATE_CELL_DIAMETER};

use num_complex::Complex;

use crate::contour::{contour_integral, ClosedCurve};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{nearest_integer, Real};

/// Distance (relative to the curve scale) below which a point counts as on the curve.
pub const ON_CURVE_TOL: f64 = 1e-9;

/// Maximum distance to an integer accepted when rounding a winding or linking number.
pub const INTEGER_TOL: f64 = 1e-8;

/// `(1/2πi)∮ dz/(z − b)` over a planar closed curve, by periodic quadrature.
pub fn winding_number<T: Real>(curve: &ClosedCurve<T>, b: Complex<T>) -> Result<T> {
    if curve.dim() != 1 {
        return Err(Error::Dimension(format!("winding number needs a planar curve, got dimension {}", curve.dim())));
    }
    let z = curve.coord(0);
    let dist = z.iter().fold(T::infinity(), |acc, zj| acc.min((zj - b).norm()));
    if dist <= T::lit(ON_CURVE_TOL) * curve.scale().max(b.norm()) {
        return Err(Error::TooCloseToCurve { distance: dist.as_f64() });
    }
    let quadrature = |c: &ClosedCurve<T>| -> Result<T> {
        let dz = c.spectral_derivative();
        let integrand: Vec<Complex<T>> = c.coord(0).iter().zip(dz.coord(0)).map(|(zj, dzj)| dzj / (zj - b)).collect();
        Ok(contour_integral(c, &integrand)?.im / T::TAU())
    };
    let mut v = quadrature(curve)?;
    // Close approaches of b slow the geometric convergence; refine the
    // interpolant rather than round a poor value.
    for factor in [4, 16, 64] {
        if nearest_integer(v).1.as_f64() <= INTEGER_TOL {
            break;
        }
        v = quadrature(&curve.upsampled(factor))?;
    }
    Ok(v)
}

/// Rounds a value that must be an integer, failing with a diagnostic otherwise.
pub fn round_to_integer<T: Real>(value: T, tolerance: f64) -> Result<i64> {
    let (k, dist) = nearest_integer(value);
    if dist.as_f64() > tolerance || !value.is_finite() {
        return Err(Error::NotNearInteger { value: value.as_f64(), tolerance });
    }
    Ok(k)
}

/// Winding number rounded to an integer at [`INTEGER_TOL`].
pub fn winding_number_rounded<T: Real>(curve: &ClosedCurve<T>, b: Complex<T>) -> Result<i64> {
    round_to_integer(winding_number(curve, b)?, INTEGER_TOL)
}

/// Winding number of the closed polygon through `points` about `b`, from the
/// discrete change of argument. Exact for the polygon; `None` if `b` is a vertex.
pub fn polygon_winding<T: Real>(points: &[Complex<T>], b: Complex<T>) -> Option<i64> {
    // Crossing-number form of the winding count (Sunday's algorithm).
    let n = points.len();
    let mut wn = 0i64;
    for j in 0..n {
        let p = points[j] - b;
        let q = points[(j + 1) % n] - b;
        if p.norm_sqr() == T::zero() {
            return None;
        }
        let cross = p.re * q.im - p.im * q.re;
        if p.im <= T::zero() {
            if q.im > T::zero() && cross > T::zero() {
                wn += 1;
            }
        } else if q.im <= T::zero() && cross < T::zero() {
            wn -= 1;
        }
    }
    Some(wn)
}

/// Degree of a closed planar curve about a reference point: its rounded winding number.
pub fn curve_degree<T: Real>(curve: &ClosedCurve<T>, reference: Complex<T>) -> Result<i64> {
    winding_number_rounded(curve, reference)
}

/// `(1/2πi)∮_γ d(P∘γ)/(P∘γ)`: the linking number of `γ ⊂ ℂⁿ` with `P⁻¹(0)`.
pub fn linking_number<T: Real>(curve: &ClosedCurve<T>, p: &Polynomial<T>) -> Result<T> {
    if p.nvars() != curve.dim() {
        return Err(Error::Dimension(format!(
            "polynomial in {} variables, curve in dimension {}",
            p.nvars(),
            curve.dim()
        )));
    }
    let dgamma = curve.spectral_derivative();
    let values: Vec<Complex<T>> = (0..curve.len()).map(|j| p.eval(&curve.point(j))).collect();
    let scale = values.iter().fold(T::zero(), |acc, v| acc.max(v.norm()));
    let min_abs = values.iter().fold(T::infinity(), |acc, v| acc.min(v.norm()));
    if min_abs <= T::lit(ON_CURVE_TOL) * scale {
        return Err(Error::VanishesOnCurve { min_abs: min_abs.as_f64() });
    }
    let integrand: Vec<Complex<T>> = (0..curve.len())
        .map(|j| {
            let grad = p.gradient(&curve.point(j));
            let dp = grad
                .iter()
                .zip(dgamma.point(j))
                .fold(Complex::new(T::zero(), T::zero()), |acc, (g, d)| acc + g * d);
            dp / values[j]
        })
        .collect();
    Ok(contour_integral(curve, &integrand)?.im / T::TAU())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cis;

    type C = Complex<f64>;

    fn circle(n: usize) -> ClosedCurve<f64> {
        ClosedCurve::sample_planar(n, cis::<f64>).unwrap()
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_number_rounded(&circle(64), C::new(0.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_number_rounded(&circle(64), C::new(2.0, 0.0)).unwrap(), 0);
        let double = ClosedCurve::sample_planar(64, |p: f64| cis(2.0 * p)).unwrap();
        assert_eq!(winding_number_rounded(&double, C::new(0.0, 0.0)).unwrap(), 2);
    }

    #[test]
    fn point_on_curve_is_rejected() {
        assert!(matches!(
            winding_number(&circle(64), C::new(1.0, 0.0)),
            Err(Error::TooCloseToCurve { .. })
        ));
    }

    #[test]
    fn polygon_winding_agrees_with_quadrature() {
        let c = ClosedCurve::sample_planar(256, |p: f64| cis(p) * (1.0 + 0.3 * (3.0 * p).cos())).unwrap();
        for b in [C::new(0.1, 0.2), C::new(1.5, 0.0), C::new(-0.5, -0.5)] {
            assert_eq!(
                polygon_winding(c.coord(0), b),
                Some(winding_number_rounded(&c, b).unwrap())
            );
        }
    }

    #[test]
    fn degree_examples() {
        let zero = C::new(0.0, 0.0);
        let d2 = ClosedCurve::sample_planar(64, |p: f64| cis(2.0 * p)).unwrap();
        assert_eq!(curve_degree(&d2, zero).unwrap(), 2);
        let k = ClosedCurve::sample_planar(64, |_: f64| C::new(0.5, 0.5)).unwrap();
        assert_eq!(curve_degree(&k, zero).unwrap(), 0);
        let rev = ClosedCurve::sample_planar(64, |p: f64| cis(-p)).unwrap();
        assert_eq!(curve_degree(&rev, zero).unwrap(), -1);
    }

    #[test]
    fn linking_examples() {
        let g = ClosedCurve::<f64>::sample(128, |p| Ok(vec![cis(p), C::new(0.0, 0.0)])).unwrap();
        let one = C::new(1.0, 0.0);
        let z1 = Polynomial::from_terms(2, &[(one, &[1, 0])]).unwrap();
        assert_eq!(round_to_integer(linking_number(&g, &z1).unwrap(), INTEGER_TOL).unwrap(), 1);
        let z1m2 = Polynomial::from_terms(2, &[(one, &[1, 0]), (C::new(-2.0, 0.0), &[0, 0])]).unwrap();
        assert_eq!(round_to_integer(linking_number(&g, &z1m2).unwrap(), INTEGER_TOL).unwrap(), 0);
        let sq = Polynomial::from_terms(2, &[(one, &[2, 0]), (C::new(-0.25, 0.0), &[0, 0])]).unwrap();
        assert_eq!(round_to_integer(linking_number(&g, &sq).unwrap(), INTEGER_TOL).unwrap(), 2);
        let z2 = Polynomial::from_terms(2, &[(one, &[0, 1])]).unwrap();
        assert!(matches!(linking_number(&g, &z2), Err(Error::VanishesOnCurve { .. })));
    }
}
