use num_complex::Complex;

use super::holomorphic::HolomorphicBoundary;
use super::{round_to_integer, INTEGER_TOL};
use crate::contour::{periodic_trapezoid, spectral_derivative_scalar};
use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

/// Half-widths of the angular windows excised around boundary zeros; the
/// principal value is the `δ → 0` Richardson limit over these three values.
pub const PV_WINDOWS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Tolerance on `||ζ| − 1|` for a zero to count as a boundary zero.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// An isolated zero on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryZero<T> {
    pub location: Complex<T>,
    /// Angle in `[0, 2π)`.
    pub angle: T,
    pub multiplicity: usize,
}

/// Excluded window `(center − δ, center + δ)` for each `δ` used.
#[derive(Debug, Clone, PartialEq)]
pub struct PvWindow<T> {
    pub center: T,
    pub half_widths: Vec<T>,
}

/// Principal-value logarithmic residue `(1/2πi)∮ d(J/J̄)/(J/J̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueValue<T> {
    pub value: Complex<T>,
    pub pv_windows: Vec<PvWindow<T>>,
}

/// Finds the zeros of `g` lying on the unit circle.
pub fn boundary_zeros<T: Real>(g: &HolomorphicBoundary<T>) -> Result<Vec<BoundaryZero<T>>> {
    if g.is_identically_zero() {
        return Err(Error::NonIsolatedBoundaryZeros);
    }
    let n = 8 * g.len();
    let step = T::TAU() / T::from_count(n);
    let vals: Vec<T> = (0..n).map(|j| g.eval(cis(step * T::from_count(j))).norm()).collect();
    let scale = vals.iter().fold(T::zero(), |a, &b| a.max(b));
    let threshold = T::lit(0.05) * scale;
    let mut candidates: Vec<Complex<T>> = Vec::new();
    for j in 0..n {
        let (prev, next) = (vals[(j + n - 1) % n], vals[(j + 1) % n]);
        if vals[j] <= prev && vals[j] < next && vals[j] < threshold {
            if let Some(z) = polish(g, cis(step * T::from_count(j))) {
                if (z.norm() - T::one()).abs() < T::lit(BOUNDARY_TOL) {
                    let z = z / z.norm();
                    if !candidates.iter().any(|c| (c - z).norm() < T::lit(1e-7)) {
                        candidates.push(z);
                    }
                }
            }
        }
    }
    if candidates.len() > g.len() / 4 {
        return Err(Error::NonIsolatedBoundaryZeros);
    }
    let mut out = Vec::with_capacity(candidates.len());
    for (i, &z) in candidates.iter().enumerate() {
        let gap = candidates
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .fold(T::infinity(), |acc, (_, c)| acc.min((c - z).norm()));
        let rho = T::lit(1e-3).min(gap * T::lit(0.4));
        let turn = arg_change(&|a: T| g.eval(z + cis(a) * rho), T::zero(), T::TAU(), 64)?;
        let m = round_to_integer(turn / T::TAU(), 1e-6)?;
        if m <= 0 {
            continue;
        }
        let mut angle = z.im.atan2(z.re);
        if angle < T::zero() {
            angle = angle + T::TAU();
        }
        out.push(BoundaryZero { location: z, angle, multiplicity: m as usize });
    }
    out.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Schröder iteration `z ← z − g g′/(g′² − g g″)`, quadratic at zeros of any multiplicity.
pub(crate) fn polish<T: Real>(g: &HolomorphicBoundary<T>, mut z: Complex<T>) -> Option<Complex<T>> {
    let scale = g.scale().max(T::min_positive_value());
    for _ in 0..100 {
        let [p, d1, d2] = g.eval_with_derivatives(z);
        if p.norm() <= T::epsilon() * T::epsilon() * scale {
            return Some(z);
        }
        let den = d1 * d1 - p * d2;
        if den.norm() == T::zero() {
            return None;
        }
        let dz = p * d1 / den;
        z = z - dz;
        if !z.re.is_finite() || z.norm() > T::lit(4.0) {
            return None;
        }
        if dz.norm() <= T::lit(4.0) * T::epsilon() * z.norm().max(T::one()) {
            return Some(z);
        }
    }
    None
}

/// Total change of `arg f(s)` for `s ∈ [a, b]`, by adaptive bisection until
/// every step turns by less than π/4.
pub(crate) fn arg_change<T: Real, F: Fn(T) -> Complex<T>>(f: &F, a: T, b: T, steps: usize) -> Result<T> {
    let h = (b - a) / T::from_count(steps);
    let mut total = T::zero();
    let mut s0 = a;
    let mut f0 = f(a);
    for k in 1..=steps {
        let s1 = if k == steps { b } else { a + h * T::from_count(k) };
        let f1 = f(s1);
        total = total + segment(f, s0, f0, s1, f1, 0)?;
        s0 = s1;
        f0 = f1;
    }
    Ok(total)
}

fn segment<T: Real, F: Fn(T) -> Complex<T>>(
    f: &F,
    a: T,
    fa: Complex<T>,
    b: T,
    fb: Complex<T>,
    depth: usize,
) -> Result<T> {
    if fa.norm() == T::zero() || fb.norm() == T::zero() {
        return Err(Error::TooCloseToCurve { distance: 0.0 });
    }
    let r = fb / fa;
    let d = r.im.atan2(r.re);
    if d.abs() <= T::FRAC_PI_4() {
        return Ok(d);
    }
    if depth >= 48 {
        return Err(Error::TooCloseToCurve { distance: fa.norm().min(fb.norm()).as_f64() });
    }
    let m = (a + b) / T::lit(2.0);
    let fm = f(m);
    Ok(segment(f, a, fa, m, fm, depth + 1)? + segment(f, m, fm, b, fb, depth + 1)?)
}

/// Second-order Richardson limit of values at `δ, δ/2, δ/4`.
fn richardson<T: Real>(v: [T; 3]) -> T {
    let two = T::lit(2.0);
    let r1 = two * v[1] - v[0];
    let r2 = two * v[2] - v[1];
    (T::lit(4.0) * r2 - r1) / T::lit(3.0)
}

fn window_scales<T: Real>(zeros: &[BoundaryZero<T>]) -> [T; 3] {
    let mut min_gap = T::TAU();
    for i in 0..zeros.len() {
        let next = if i + 1 < zeros.len() { zeros[i + 1].angle } else { zeros[0].angle + T::TAU() };
        if zeros.len() > 1 {
            min_gap = min_gap.min(next - zeros[i].angle);
        }
    }
    let shrink = (min_gap * T::lit(0.25) / T::lit(PV_WINDOWS[0])).min(T::one());
    [
        T::lit(PV_WINDOWS[0]) * shrink,
        T::lit(PV_WINDOWS[1]) * shrink,
        T::lit(PV_WINDOWS[2]) * shrink,
    ]
}

/// `(1/2π)·Δarg f` along the circle with windows of half-width `delta` removed.
fn windowed_turn<T: Real, F: Fn(T) -> Complex<T>>(f: &F, zeros: &[BoundaryZero<T>], delta: T, steps: usize) -> Result<T> {
    let mut total = T::zero();
    for i in 0..zeros.len() {
        let start = zeros[i].angle + delta;
        let end = if i + 1 < zeros.len() { zeros[i + 1].angle } else { zeros[0].angle + T::TAU() } - delta;
        let frac = (end - start) / T::TAU();
        let arc_steps = (T::from_count(steps) * frac).ceil().to_usize().unwrap_or(steps).max(8);
        total = total + arg_change(f, start, end, arc_steps)?;
    }
    Ok(total / T::TAU())
}

/// Weighted number of zeros of `φ − b` in the closed disc; boundary zeros count ½.
///
/// Without boundary zeros this is the argument principle on the unit circle,
/// `(1/2πi)∮ φ′/(φ − b) dζ`, with `φ′` from the Taylor series. With boundary
/// zeros it is the principal value over excised windows, extrapolated to `δ → 0`.
pub fn zero_count<T: Real>(phi: &HolomorphicBoundary<T>, b: Complex<T>) -> Result<T> {
    let g = phi.shifted(b);
    let zeros = boundary_zeros(&g)?;
    let steps = 4 * g.len();
    let on_circle = |s: T| g.eval(cis(s));
    if zeros.is_empty() {
        let n = g.len();
        let step = T::TAU() / T::from_count(n);
        let integrand: Vec<Complex<T>> = (0..n)
            .map(|j| {
                let z = cis(step * T::from_count(j));
                let [p, d1, _] = g.eval_with_derivatives(z);
                d1 * z / p
            })
            .collect();
        let v = periodic_trapezoid(&integrand).re / T::TAU();
        if let Ok(k) = round_to_integer(v, INTEGER_TOL) {
            return Ok(T::lit(k as f64));
        }
        // A zero hugging the circle: count the change of argument directly.
        let turn = arg_change(&on_circle, T::zero(), T::TAU(), steps)? / T::TAU();
        return round_to_integer(turn, 1e-6).map(|k| T::lit(k as f64));
    }
    let deltas = window_scales(&zeros);
    let vals = [
        windowed_turn(&on_circle, &zeros, deltas[0], steps)?,
        windowed_turn(&on_circle, &zeros, deltas[1], steps)?,
        windowed_turn(&on_circle, &zeros, deltas[2], steps)?,
    ];
    Ok(richardson(vals))
}

/// Principal-value logarithmic residue of `J/J̄` over the unit circle.
///
/// `J/J̄ = J²/|J|²` is unimodular, so the residue is `(1/π)·Δarg J`: twice the
/// weighted zero count of `J` in the closed disc.
pub fn log_residue_pv<T: Real>(j: &HolomorphicBoundary<T>) -> Result<ResidueValue<T>> {
    let zeros = boundary_zeros(j)?;
    let ratio = |s: T| {
        let v = j.eval(cis(s));
        v / v.conj()
    };
    let steps = 4 * j.len();
    if zeros.is_empty() {
        let r: Vec<Complex<T>> = j.samples().iter().map(|v| v / v.conj()).collect();
        let dr = spectral_derivative_scalar(&r);
        let integrand: Vec<Complex<T>> = r.iter().zip(&dr).map(|(ri, dri)| dri / ri).collect();
        let i2pi = Complex::new(T::zero(), T::TAU());
        let value = periodic_trapezoid(&integrand) / i2pi;
        if value.im.abs() < T::lit(INTEGER_TOL) && round_to_integer(value.re, INTEGER_TOL).is_ok() {
            return Ok(ResidueValue { value, pv_windows: Vec::new() });
        }
        let turn = arg_change(&ratio, T::zero(), T::TAU(), steps)? / T::TAU();
        return Ok(ResidueValue { value: Complex::new(turn, T::zero()), pv_windows: Vec::new() });
    }
    let deltas = window_scales(&zeros);
    let vals = [
        windowed_turn(&ratio, &zeros, deltas[0], steps)?,
        windowed_turn(&ratio, &zeros, deltas[1], steps)?,
        windowed_turn(&ratio, &zeros, deltas[2], steps)?,
    ];
    let pv_windows = zeros
        .iter()
        .map(|z| PvWindow { center: z.angle, half_widths: deltas.to_vec() })
        .collect();
    Ok(ResidueValue { value: Complex::new(richardson(vals), T::zero()), pv_windows })
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn poly(coeffs: &[C]) -> HolomorphicBoundary<f64> {
        HolomorphicBoundary::from_taylor(256, coeffs).unwrap()
    }

    #[test]
    fn zero_count_examples() {
        let zero = C::new(0.0, 0.0);
        let id = poly(&[zero, C::new(1.0, 0.0)]);
        assert!((zero_count(&id, zero).unwrap() - 1.0).abs() < 1e-12);
        let cubic = poly(&[C::new(-0.5, 0.0), zero, zero, C::new(1.0, 0.0)]);
        assert!((zero_count(&cubic, zero).unwrap() - 3.0).abs() < 1e-12);
        let edge = poly(&[C::new(-1.0, 0.0), C::new(1.0, 0.0)]);
        let v = zero_count(&edge, zero).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn double_boundary_zero_counts_one() {
        // (ζ − i)² has a double zero on the circle → weight 2·½.
        let i = C::new(0.0, 1.0);
        let p = poly(&[-C::new(1.0, 0.0), -(i + i), C::new(1.0, 0.0)]);
        let v = zero_count(&p, C::new(0.0, 0.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn constant_equal_to_target_is_degenerate() {
        let k = poly(&[C::new(2.0, 0.0)]);
        assert_eq!(zero_count(&k, C::new(2.0, 0.0)).unwrap_err(), Error::NonIsolatedBoundaryZeros);
    }

    #[test]
    fn log_residue_examples() {
        let zero = C::new(0.0, 0.0);
        let j1 = poly(&[zero, zero, C::new(0.0, 2.0)]);
        let r = log_residue_pv(&j1).unwrap();
        assert!((r.value - C::new(4.0, 0.0)).norm() < 1e-10);
        assert!(r.pv_windows.is_empty());
        let j2 = poly(&[zero, C::new(1.0, 0.0)]);
        assert!((log_residue_pv(&j2).unwrap().value - C::new(2.0, 0.0)).norm() < 1e-10);
        let j3 = poly(&[C::new(2.0, 0.0), C::new(1.0, 0.0)]);
        assert!(log_residue_pv(&j3).unwrap().value.norm() < 1e-10);
    }

    #[test]
    fn log_residue_with_boundary_zero_uses_windows() {
        // J = ζ − 1: J/J̄ = −e^{iψ} away from the zero, so I = 1 = 2·½.
        let j = poly(&[C::new(-1.0, 0.0), C::new(1.0, 0.0)]);
        let r = log_residue_pv(&j).unwrap();
        assert_eq!(r.pv_windows.len(), 1);
        assert!((r.value.re - 1.0).abs() < 1e-9, "{:?}", r.value);
    }

    #[test]
    fn identically_zero_residue_is_an_error() {
        let j = poly(&[C::new(0.0, 0.0)]);
        assert_eq!(log_residue_pv(&j).unwrap_err(), Error::NonIsolatedBoundaryZeros);
    }
}
