//! Complex moments, holomorphic extension into discs, and ∂̄ residuals.

use num_complex::Complex;

use crate::contour::{contour_integral, fourier_coefficients, ClosedCurve};
use crate::cr::{complex_tangent_directions, ManifoldPatch, RANK_TOL};
use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};

/// Moments vanish when their maximum modulus is below `MOMENT_TOL · scale`.
pub const MOMENT_TOL: f64 = 1e-8;

/// Boundary data extends when its negative Fourier mass is below `EXTENSION_TOL · max(1, |f|∞)`.
pub const EXTENSION_TOL: f64 = 1e-8;

/// Fewest grid points per direction accepted by the ∂̄ residuals.
pub const MIN_DBAR_POINTS: usize = 5;

/// The holomorphic 1-form `z^α dz_j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonomialForm {
    pub exponents: Vec<u32>,
    pub differential: usize,
}

/// All forms `z^α dz_j` in `n` variables with `|α| ≤ k_max`, ordered by degree,
/// then exponent vector, then `j`.
pub fn monomial_forms(n: usize, k_max: u32) -> Vec<MonomialForm> {
    let mut exps: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..n {
        exps = exps
            .into_iter()
            .flat_map(|e| {
                (0..=k_max).map(move |a| {
                    let mut e = e.clone();
                    e.push(a);
                    e
                })
            })
            .filter(|e| e.iter().sum::<u32>() <= k_max)
            .collect();
    }
    exps.sort_by(|a, b| (a.iter().sum::<u32>(), a).cmp(&(b.iter().sum::<u32>(), b)));
    exps.into_iter()
        .flat_map(|e| (0..n).map(move |j| MonomialForm { exponents: e.clone(), differential: j }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport<T> {
    pub forms: Vec<MonomialForm>,
    pub moments: Vec<Complex<T>>,
    pub max_abs: T,
    pub tolerance: T,
    pub vanish: bool,
}

/// `∮_γ f z^α dz_j` for every form with `|α| ≤ k_max`.
pub fn complex_moments<T: Real>(c: &ClosedCurve<T>, f: &[Complex<T>], k_max: u32) -> Result<MomentReport<T>> {
    complex_moments_with(c, f, &monomial_forms(c.dim(), k_max), T::lit(MOMENT_TOL))
}

pub fn complex_moments_with<T: Real>(
    c: &ClosedCurve<T>,
    f: &[Complex<T>],
    forms: &[MonomialForm],
    tol: T,
) -> Result<MomentReport<T>> {
    if f.len() != c.len() {
        return Err(Error::SampleMismatch { expected: c.len(), got: f.len() });
    }
    let dc = c.spectral_derivative();
    let moments = forms
        .iter()
        .map(|form| {
            if form.exponents.len() != c.dim() || form.differential >= c.dim() {
                return Err(Error::Dimension(format!("form {form:?} in dimension {}", c.dim())));
            }
            let integrand: Vec<Complex<T>> = (0..c.len())
                .map(|j| {
                    let mono = form
                        .exponents
                        .iter()
                        .enumerate()
                        .fold(Complex::new(T::one(), T::zero()), |acc, (i, &e)| acc * c.coord(i)[j].powu(e));
                    f[j] * mono * dc.coord(form.differential)[j]
                })
                .collect();
            contour_integral(c, &integrand)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = max_abs(&moments);
    let tolerance = tol * c.scale();
    Ok(MomentReport { forms: forms.to_vec(), max_abs: m, vanish: m < tolerance, tolerance, moments })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionResult<T> {
    /// Taylor coefficients of the extension `F_D(ζ) = Σ a_k ζ^k`.
    pub taylor: Vec<Complex<T>>,
    pub negative_mass: T,
    pub tolerance: T,
    pub extends: bool,
    /// `max_j |F_D(e^{iψ_j}) − f_j|`.
    pub boundary_mismatch: T,
}

/// Tests whether `f ∘ Φ_t` on `|ζ| = 1` is the boundary value of a function holomorphic in the disc.
pub fn disc_extension<T: Real>(phi_t: &ClosedCurve<T>, f: &[Complex<T>]) -> Result<ExtensionResult<T>> {
    if f.len() != phi_t.len() {
        return Err(Error::SampleMismatch { expected: phi_t.len(), got: f.len() });
    }
    let data = fourier_coefficients(f)?;
    let taylor = data.nonnegative(0);
    let negative_mass = data.negative_mass(0);
    let tolerance = T::lit(EXTENSION_TOL) * T::one().max(max_abs(f));
    let boundary_mismatch = crate::contour::angles::<T>(f.len())
        .iter()
        .zip(f)
        .fold(T::zero(), |acc, (&psi, fj)| {
            let z = crate::scalar::cis(psi);
            let v = taylor.iter().rev().fold(Complex::new(T::zero(), T::zero()), |a, c| a * z + c);
            acc.max((v - fj).norm())
        });
    Ok(ExtensionResult { taylor, extends: negative_mass < tolerance, negative_mass, tolerance, boundary_mismatch })
}

/// Agreement of the moment verdict and the extension verdict on one disc boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence<T> {
    pub moments: MomentReport<T>,
    pub extension: ExtensionResult<T>,
    pub consistent: bool,
}

pub fn moments_equiv_extension<T: Real>(c: &ClosedCurve<T>, f: &[Complex<T>], k_max: u32) -> Result<Equivalence<T>> {
    let moments = complex_moments(c, f, k_max)?;
    let extension = disc_extension(c, f)?;
    Ok(Equivalence { consistent: moments.vanish == extension.extends, moments, extension })
}

/// Rectangular grid `origin + (i·h, j·h)`, `i < nx`, `j < ny`, stored row-major in `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarGrid<T> {
    pub origin: Complex<T>,
    pub h: T,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> PlanarGrid<T> {
    /// `count × count` grid covering the square `[lo, hi]²`.
    pub fn square(lo: T, hi: T, count: usize) -> Self {
        let h = (hi - lo) / T::from_count(count.saturating_sub(1).max(1));
        Self { origin: Complex::new(lo, lo), h, nx: count, ny: count }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> Complex<T> {
        let (j, i) = (idx / self.nx, idx % self.nx);
        self.origin + Complex::new(self.h * T::from_count(i), self.h * T::from_count(j))
    }

    pub fn points(&self) -> Vec<Complex<T>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }
}

/// ∂̄ residual at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct DbarSample<T> {
    pub index: usize,
    pub value: T,
}

/// Fourth-order central difference from samples at offsets `−2, −1, 1, 2`.
fn diff4<T: Real>(m2: Complex<T>, m1: Complex<T>, p1: Complex<T>, p2: Complex<T>, h: T) -> Complex<T> {
    (m2 - p2 + (p1 - m1) * T::lit(8.0)) / (T::lit(12.0) * h)
}

/// `|∂f/∂z̄| = |½(f_x + i f_y)|` at every grid point whose five-point stencils lie
/// in the domain `mask` (all points when `mask` is `None`).
///
/// With fourth-order differences the `h⁴` error terms of `f_x` and `i f_y`
/// cancel for holomorphic `f`, leaving `O(h⁶)`.
pub fn dbar_planar<T: Real>(grid: &PlanarGrid<T>, values: &[Complex<T>], mask: Option<&[bool]>) -> Result<Vec<DbarSample<T>>> {
    if grid.nx < MIN_DBAR_POINTS || grid.ny < MIN_DBAR_POINTS {
        return Err(Error::GridTooCoarse(format!("{}×{} grid", grid.nx, grid.ny)));
    }
    if values.len() != grid.len() || mask.is_some_and(|m| m.len() != grid.len()) {
        return Err(Error::SampleMismatch { expected: grid.len(), got: values.len() });
    }
    let inside = |k: usize| mask.map_or(true, |m| m[k]);
    let half = T::lit(0.5);
    let i = Complex::new(T::zero(), T::one());
    let nx = grid.nx;
    let mut out = Vec::new();
    for j in 2..grid.ny - 2 {
        for ix in 2..nx - 2 {
            let k = j * nx + ix;
            let nb = [k - 2, k - 1, k + 1, k + 2, k - 2 * nx, k - nx, k + nx, k + 2 * nx];
            if !inside(k) || nb.iter().any(|&m| !inside(m)) {
                continue;
            }
            let v = |m: usize| values[m];
            let fx = diff4(v(nb[0]), v(nb[1]), v(nb[2]), v(nb[3]), grid.h);
            let fy = diff4(v(nb[4]), v(nb[5]), v(nb[6]), v(nb[7]), grid.h);
            out.push(DbarSample { index: k, value: ((fx + i * fy) * half).norm() });
        }
    }
    Ok(out)
}

/// `max_Z |Z̄f|` over unit complex tangent directions `Z` of the patch, from
/// samples of `f` on the patch lattice. Points without complex tangents or a
/// full five-point stencil are skipped.
pub fn dbar_tangential<T: Real>(patch: &ManifoldPatch<T>, values: &[Complex<T>]) -> Result<Vec<DbarSample<T>>> {
    if values.len() != patch.len() {
        return Err(Error::SampleMismatch { expected: patch.len(), got: values.len() });
    }
    if let Some(a) = patch.axes().iter().find(|a| a.count < MIN_DBAR_POINTS) {
        return Err(Error::GridTooCoarse(format!("axis with {} points", a.count)));
    }
    let half = T::lit(0.5);
    let i = Complex::new(T::zero(), T::one());
    let mut out = Vec::new();
    for idx in patch.interior_indices() {
        let cols = patch.differential(idx)?;
        let dirs = complex_tangent_directions(&cols, T::lit(RANK_TOL));
        if dirs.is_empty() {
            continue;
        }
        let grads: Option<Vec<Complex<T>>> = (0..patch.dim())
            .map(|k| {
                let at = |d: isize| patch.neighbor(idx, k, d).map(|m| values[m]);
                Some(diff4(at(-2)?, at(-1)?, at(1)?, at(2)?, patch.axes()[k].spacing()))
            })
            .collect();
        let Some(grads) = grads else { continue };
        let along = |c: &[T]| c.iter().zip(&grads).fold(Complex::new(T::zero(), T::zero()), |acc, (ci, g)| acc + g * *ci);
        let value = dirs
            .iter()
            .map(|(a, b)| ((along(a) + i * along(b)) * half).norm())
            .fold(T::zero(), T::max);
        out.push(DbarSample { index: idx, value });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::Axis;
    use crate::scalar::cis;
    use std::sync::Arc;

    type C = Complex<f64>;

    fn circle(r: f64) -> ClosedCurve<f64> {
        ClosedCurve::sample_planar(128, move |p: f64| cis(p) * r).unwrap()
    }

    fn on(c: &ClosedCurve<f64>, f: impl Fn(C) -> C) -> Vec<C> {
        c.coord(0).iter().map(|&z| f(z)).collect()
    }

    #[test]
    fn forms_are_enumerated_by_degree() {
        let f = monomial_forms(2, 1);
        assert_eq!(f.len(), 6);
        assert_eq!(f[0], MonomialForm { exponents: vec![0, 0], differential: 0 });
        assert_eq!(monomial_forms(1, 8).len(), 9);
    }

    #[test]
    fn moment_examples() {
        let c = circle(1.0);
        let e = complex_moments(&c, &on(&c, |z| z.exp()), 8).unwrap();
        assert!(e.max_abs < 1e-12 && e.vanish);
        let b = complex_moments(&c, &on(&c, |z| z.conj()), 8).unwrap();
        assert!((b.moments[0] - C::new(0.0, std::f64::consts::TAU)).norm() < 1e-12);
        assert!(b.moments[1..].iter().all(|m| m.norm() < 1e-12));
        assert!(!b.vanish);
        for t in [1.0, 1.5, 2.0] {
            let c = circle(t);
            assert!(complex_moments(&c, &on(&c, |z| C::new(z.norm(), 0.0)), 8).unwrap().max_abs < 1e-12);
        }
    }

    #[test]
    fn moments_need_matching_samples() {
        let c = circle(1.0);
        assert!(matches!(complex_moments(&c, &[C::new(1.0, 0.0)], 2), Err(Error::SampleMismatch { .. })));
    }

    #[test]
    fn extension_examples() {
        let c = circle(1.0);
        let id = disc_extension(&c, &on(&c, |z| z)).unwrap();
        assert!(id.extends);
        assert!((id.taylor[1] - C::new(1.0, 0.0)).norm() < 1e-14);
        let conj = disc_extension(&c, &on(&c, |z| z.conj())).unwrap();
        assert!(!conj.extends);
        assert!((conj.negative_mass - 1.0).abs() < 1e-14);
        let c2 = circle(1.7);
        let abs = disc_extension(&c2, &on(&c2, |z| C::new(z.norm(), 0.0))).unwrap();
        assert!(abs.extends);
        assert!((abs.taylor[0] - C::new(1.7, 0.0)).norm() < 1e-14);
        assert!(abs.boundary_mismatch < 10.0 * EXTENSION_TOL);
    }

    #[test]
    fn equivalence_examples() {
        let c = circle(1.0);
        let e = moments_equiv_extension(&c, &on(&c, |z| z.exp()), 8).unwrap();
        assert!(e.consistent && e.moments.vanish && e.extension.extends);
        let b = moments_equiv_extension(&c, &on(&c, |z| z.conj()), 8).unwrap();
        assert!(b.consistent && !b.moments.vanish && !b.extension.extends);
    }

    #[test]
    fn planar_dbar_examples() {
        let g = PlanarGrid::square(-1.0, 1.0, 41);
        let pts = g.points();
        let sq: Vec<C> = pts.iter().map(|z| z * z).collect();
        let r = dbar_planar(&g, &sq, None).unwrap();
        assert_eq!(r.len(), 37 * 37);
        assert!(r.iter().all(|s| s.value < 1e-6));
        let cj: Vec<C> = pts.iter().map(|z| z.conj()).collect();
        assert!(dbar_planar(&g, &cj, None).unwrap().iter().all(|s| (s.value - 1.0).abs() < 1e-12));
        let mask: Vec<bool> = pts.iter().map(|z| z.norm() >= 0.3 && z.norm() <= 1.0).collect();
        let ab: Vec<C> = pts.iter().map(|z| C::new(z.norm(), 0.0)).collect();
        let r = dbar_planar(&g, &ab, Some(&mask)).unwrap();
        assert!(!r.is_empty());
        assert!(r.iter().all(|s| (s.value - 0.5).abs() < 1e-2));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = PlanarGrid::square(-1.0, 1.0, 4);
        let v = vec![C::new(0.0, 0.0); 16];
        assert!(matches!(dbar_planar(&g, &v, None), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn tangential_dbar_on_sphere() {
        let axes = vec![
            Axis::closed(0.2, 1.3, 9),
            Axis::periodic(0.0, std::f64::consts::TAU, 32),
            Axis::periodic(0.0, std::f64::consts::TAU, 32),
        ];
        let emb = |u: &[f64]| vec![cis(u[1]) * u[0].cos(), cis(u[2]) * u[0].sin()];
        let patch = ManifoldPatch::new(2, axes, Arc::new(move |u: &[f64]| Ok(emb(u)))).unwrap();
        let pts: Vec<Vec<C>> = (0..patch.len()).map(|k| patch.point(k).unwrap()).collect();
        let holo: Vec<C> = pts.iter().map(|z| z[0] * z[1]).collect();
        let r = dbar_tangential(&patch, &holo).unwrap();
        assert!(r.iter().all(|s| s.value < 1e-2), "{}", r.iter().map(|s| s.value).fold(0.0, f64::max));
        let anti: Vec<C> = pts.iter().map(|z| z[0].conj()).collect();
        let r = dbar_tangential(&patch, &anti).unwrap();
        assert!(r.iter().any(|s| s.value > 0.1));
    }
}
