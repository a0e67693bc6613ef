//! Parametrized families `Φ(ζ, t)` of analytic discs over a parameter manifold:
//! partial derivatives, regularity, rank and Jacobian fields, zero tracking,
//! degeneracy, orbit nontriviality and the combined verdict.

mod jacobian;
mod manifold;
mod topology;
mod tracking;
mod verdict;

pub use jacobian::{fiber_ratio_test, jacobian_field, FiberRatioReport, JacobianField, Perturbation};
pub use manifold::{ManifoldKind, ParamManifold};
pub use topology::{
    common_surrounded_point, degeneracy_check, orbit_nontriviality, CommonPoint, DegeneracyBranch,
    DegeneracyReport, OrbitMode, OrbitReport, OrbitVerdict, ORBIT_SEARCH_GRID,
};
pub use tracking::{track_zeros, Chain, FiberZeros, ZeroTracking};
pub use verdict::{parametric_ap_verdict, parametric_ap_verdict_with, ApVerdict, Outcome};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::argument::polygon_winding;
use crate::contour::{angles, fourier_coefficients, ClosedCurve};
use crate::error::{Error, Result};
use crate::linalg::{real_rank, svd, ColMatrix};
use crate::scalar::{cis, norm, Real};

pub use crate::cr::RANK_TOL;

/// Negative Fourier mass (relative to `max(1, |Φ|)`) tolerated per boundary coordinate.
pub const HOLOMORPHY_TOL: f64 = 1e-10;

/// Radius and node count of the Cauchy circle used for `∂_ζΦ`.
const CAUCHY_RADIUS: f64 = 0.05;
const CAUCHY_NODES: usize = 16;

/// Step of the fourth-order differences along the tangent fields.
pub const FIELD_STEP: f64 = 1e-3;

pub type FamilyFn<T> = Arc<dyn Fn(Complex<T>, &[Complex<T>]) -> Result<Vec<Complex<T>>> + Send + Sync>;

/// Sample points in the closed disc: concentric interior rings plus the boundary circle.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaGrid<T> {
    /// Interior radii; `0` contributes the single point `ζ = 0`.
    pub radii: Vec<T>,
    pub angles: usize,
    /// Boundary samples `e^{iψ_j}`, a power of two ≥ 16.
    pub boundary: usize,
}

impl<T: Real> Default for ZetaGrid<T> {
    fn default() -> Self {
        Self { radii: [0.0, 0.25, 0.5, 0.75].iter().map(|&r| T::lit(r)).collect(), angles: 32, boundary: 256 }
    }
}

impl<T: Real> ZetaGrid<T> {
    pub fn with_boundary(boundary: usize) -> Self {
        Self { boundary, ..Self::default() }
    }

    pub fn interior(&self) -> Vec<Complex<T>> {
        let mut out = Vec::new();
        for &r in &self.radii {
            if r == T::zero() {
                out.push(Complex::new(T::zero(), T::zero()));
            } else {
                out.extend((0..self.angles).map(|j| cis(T::TAU() * T::from_count(j) / T::from_count(self.angles)) * r));
            }
        }
        out
    }

    pub fn boundary_points(&self) -> Vec<Complex<T>> {
        angles::<T>(self.boundary).into_iter().map(cis).collect()
    }

    /// Interior points followed by boundary points.
    pub fn points(&self) -> Vec<Complex<T>> {
        let mut p = self.interior();
        p.extend(self.boundary_points());
        p
    }

    pub fn interior_len(&self) -> usize {
        self.radii.iter().map(|&r| if r == T::zero() { 1 } else { self.angles }).sum()
    }

    pub fn len(&self) -> usize {
        self.interior_len() + self.boundary
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        idx >= self.interior_len()
    }
}

/// A family of analytic discs `Φ(·, t)`, `t ∈ M`, with declared `d = dim Φ(S¹ × M)`.
#[derive(Clone)]
pub struct DiscFamily<T> {
    phi: FamilyFn<T>,
    manifold: ParamManifold<T>,
    zeta_grid: ZetaGrid<T>,
    zeta_points: Vec<Complex<T>>,
    n: usize,
    d: usize,
    scale: T,
    holomorphy_defect: T,
}

impl<T: Real> std::fmt::Debug for DiscFamily<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscFamily")
            .field("manifold", &self.manifold)
            .field("zeta_grid", &self.zeta_grid)
            .field("n", &self.n)
            .field("d", &self.d)
            .finish()
    }
}

/// Builds a family and verifies holomorphy in `ζ` on every lattice fiber.
/// Requires `2n ≥ k + 2` so that the rank statements make sense.
pub fn build_family<T: Real>(
    phi: FamilyFn<T>,
    manifold: ParamManifold<T>,
    zeta_grid: ZetaGrid<T>,
    d: usize,
) -> Result<DiscFamily<T>> {
    let k = manifold.k();
    let n = phi(Complex::new(T::zero(), T::zero()), &manifold.coords(0))?.len();
    if n > 0 && 2 * n < k + 2 {
        return Err(Error::InvalidFamily(format!("2n = {} < k + 2 = {}", 2 * n, k + 2)));
    }
    sample_family(phi, manifold, zeta_grid, d)
}

/// [`build_family`] without the dimension requirement, for moment and strip
/// computations that only need the discs themselves.
pub fn sample_family<T: Real>(
    phi: FamilyFn<T>,
    manifold: ParamManifold<T>,
    zeta_grid: ZetaGrid<T>,
    d: usize,
) -> Result<DiscFamily<T>> {
    crate::contour::check_sample_count(zeta_grid.boundary)?;
    let k = manifold.k();
    let n = phi(Complex::new(T::zero(), T::zero()), &manifold.coords(0))?.len();
    if n == 0 {
        return Err(Error::InvalidFamily("Φ has no coordinates".into()));
    }
    if d != k && d != k + 1 {
        return Err(Error::InvalidFamily(format!("declared d = {d} not in {{k, k+1}} = {{{k}, {}}}", k + 1)));
    }
    let bpts = zeta_grid.boundary_points();
    let per_t: Vec<Result<(T, T)>> = (0..manifold.len())
        .into_par_iter()
        .map(|ti| {
            let t = manifold.coords(ti);
            let mut cols = vec![Vec::with_capacity(bpts.len()); n];
            for &z in &bpts {
                let v = phi(z, &t)?;
                if v.len() != n {
                    return Err(Error::Dimension(format!("Φ returned {} coordinates, expected {n}", v.len())));
                }
                for (c, x) in cols.iter_mut().zip(v) {
                    c.push(x);
                }
            }
            let mut scale = T::zero();
            let mut mass = T::zero();
            for c in &cols {
                scale = scale.max(crate::scalar::max_abs(c));
                mass = mass.max(fourier_coefficients(c)?.negative_mass(0));
            }
            Ok((scale, mass))
        })
        .collect();
    let (mut scale, mut mass) = (T::zero(), T::zero());
    for r in per_t {
        let (s, m) = r?;
        scale = scale.max(s);
        mass = mass.max(m);
    }
    let defect = mass / T::one().max(scale);
    if defect >= T::lit(HOLOMORPHY_TOL) {
        return Err(Error::HolomorphyViolation { mass: defect.as_f64() });
    }
    let zeta_points = zeta_grid.points();
    Ok(DiscFamily { phi, manifold, zeta_grid, zeta_points, n, d, scale, holomorphy_defect: defect })
}

/// `[∂_ζΦ, T_1Φ, …, T_mΦ]` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials<T> {
    pub dzeta: Vec<Complex<T>>,
    pub fields: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Partials<T> {
    pub fn columns(&self) -> Vec<Vec<Complex<T>>> {
        let mut c = vec![self.dzeta.clone()];
        c.extend(self.fields.iter().cloned());
        c
    }

    /// `∂_ψΦ = iζ ∂_ζΦ`.
    pub fn dpsi(&self, zeta: Complex<T>) -> Vec<Complex<T>> {
        let iz = Complex::new(T::zero(), T::one()) * zeta;
        self.dzeta.iter().map(|c| c * iz).collect()
    }
}

impl<T: Real> DiscFamily<T> {
    pub fn manifold(&self) -> &ParamManifold<T> {
        &self.manifold
    }

    pub fn zeta_grid(&self) -> &ZetaGrid<T> {
        &self.zeta_grid
    }

    pub fn zeta_points(&self) -> &[Complex<T>] {
        &self.zeta_points
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.manifold.k()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `max |Φ|` over the boundary lattice.
    pub fn scale(&self) -> T {
        self.scale
    }

    /// Largest relative negative Fourier mass over fibers and coordinates.
    pub fn holomorphy_defect(&self) -> T {
        self.holomorphy_defect
    }

    pub fn eval(&self, zeta: Complex<T>, t: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        (self.phi)(zeta, t)
    }

    /// Boundary curve `ψ ↦ Φ(e^{iψ}, t)` of the fiber at lattice index `t_idx`.
    pub fn boundary_curve(&self, t_idx: usize) -> Result<ClosedCurve<T>> {
        let t = self.manifold.coords(t_idx);
        let pts = self
            .zeta_grid
            .boundary_points()
            .into_iter()
            .map(|z| self.eval(z, &t))
            .collect::<Result<Vec<_>>>()?;
        ClosedCurve::from_points(&pts)
    }

    /// Partials at an arbitrary `ζ` and parameter point `t`.
    pub fn partials_at(&self, zeta: Complex<T>, t: &[Complex<T>]) -> Result<Partials<T>> {
        let r = T::lit(CAUCHY_RADIUS);
        let m = CAUCHY_NODES;
        let mut dzeta = vec![Complex::new(T::zero(), T::zero()); self.n];
        for j in 0..m {
            let w = cis(T::TAU() * T::from_count(j) / T::from_count(m));
            let v = self.eval(zeta + w * r, t)?;
            let weight = w.conj() / (r * T::from_count(m));
            for (a, b) in dzeta.iter_mut().zip(v) {
                *a = *a + b * weight;
            }
        }
        let h = T::lit(FIELD_STEP);
        let fields = (0..self.manifold.field_count())
            .map(|f| {
                let at = |s: T| self.eval(zeta, &self.manifold.flow(t, f, s));
                let (p2, p1, m1, m2) = (at(h + h)?, at(h)?, at(-h)?, at(-h - h)?);
                let den = T::lit(12.0) * h;
                Ok((0..self.n)
                    .map(|c| (-p2[c] + p1[c] * T::lit(8.0) - m1[c] * T::lit(8.0) + m2[c]) / den)
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Partials { dzeta, fields })
    }
}

/// Partials at lattice point `(zeta_idx, t_idx)`.
pub fn partials<T: Real>(f: &DiscFamily<T>, zeta_idx: usize, t_idx: usize) -> Result<Partials<T>> {
    if zeta_idx >= f.zeta_points.len() || t_idx >= f.manifold.len() {
        return Err(Error::OffGrid(zeta_idx, t_idx));
    }
    f.partials_at(f.zeta_points[zeta_idx], &f.manifold.coords(t_idx))
}

/// Partials on the whole `(t, ζ)` lattice, `t`-major.
pub fn sample_partials<T: Real>(f: &DiscFamily<T>) -> Result<Vec<Vec<Partials<T>>>> {
    let rows: Vec<Result<Vec<Partials<T>>>> = (0..f.manifold.len())
        .into_par_iter()
        .map(|ti| {
            let t = f.manifold.coords(ti);
            f.zeta_points.iter().map(|&z| f.partials_at(z, &t)).collect()
        })
        .collect();
    rows.into_iter().collect()
}

/// Partials at selected lattice `t` indices and arbitrary `ζ`, one row per `t`.
pub(crate) fn sample_partials_at<T: Real>(
    f: &DiscFamily<T>,
    t_indices: &[usize],
    zetas: &[Complex<T>],
) -> Result<Vec<Vec<Partials<T>>>> {
    let rows: Vec<Result<Vec<Partials<T>>>> = t_indices
        .par_iter()
        .map(|&ti| {
            let t = f.manifold.coords(ti);
            zetas.iter().map(|&z| f.partials_at(z, &t)).collect()
        })
        .collect();
    rows.into_iter().collect()
}

/// `rank_ℂ dΦ` over the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct RankField<T> {
    pub tau: T,
    pub n_t: usize,
    pub n_zeta: usize,
    /// `ranks[t * n_zeta + z]`.
    pub ranks: Vec<usize>,
    pub sigma: Vec<Vec<T>>,
}

impl<T: Real> RankField<T> {
    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }

    /// `σ₂/σ₁` at every point.
    pub fn second_ratio(&self) -> Vec<T> {
        self.sigma
            .iter()
            .map(|s| match (s.first(), s.get(1)) {
                (Some(&a), Some(&b)) if a > T::zero() => b / a,
                _ => T::zero(),
            })
            .collect()
    }
}

pub fn rank_field<T: Real>(f: &DiscFamily<T>, tau: T) -> Result<RankField<T>> {
    Ok(rank_field_from(f, &sample_partials(f)?, tau))
}

pub fn rank_field_from<T: Real>(f: &DiscFamily<T>, parts: &[Vec<Partials<T>>], tau: T) -> RankField<T> {
    let floor = T::lit(1e-12) * T::one().max(f.scale);
    let mut ranks = Vec::new();
    let mut sigma = Vec::new();
    for row in parts {
        for p in row {
            let s = svd(&ColMatrix::from_columns(f.n, p.columns()));
            ranks.push(s.rank(tau, floor));
            sigma.push(s.sigma);
        }
    }
    RankField { tau, n_t: parts.len(), n_zeta: f.zeta_points.len(), ranks, sigma }
}

/// Conditions of a regular parametrization on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// Real rank of `d_tΦ` equals `k` at every lattice point.
    pub t_rank_pass: bool,
    /// `(t, ζ)` lattice points where it does not, as indices.
    pub t_rank_failures: Vec<(usize, usize)>,
    /// Boundary real rank of `[∂_ψΦ, d_tΦ]` is `d` or `d − 1` everywhere.
    pub boundary_rank_pass: bool,
    /// Histogram of boundary real ranks.
    pub boundary_ranks: BTreeMap<usize, usize>,
}

impl RegularityReport {
    pub fn pass(&self) -> bool {
        self.t_rank_pass && self.boundary_rank_pass
    }
}

pub fn regularity_check<T: Real>(f: &DiscFamily<T>) -> Result<RegularityReport> {
    Ok(regularity_from(f, &sample_partials(f)?))
}

pub fn regularity_from<T: Real>(f: &DiscFamily<T>, parts: &[Vec<Partials<T>>]) -> RegularityReport {
    let tau = T::lit(RANK_TOL);
    let floor = T::lit(1e-12) * T::one().max(f.scale);
    let k = f.k();
    let mut failures = Vec::new();
    let mut hist = BTreeMap::new();
    for (ti, row) in parts.iter().enumerate() {
        for (zi, p) in row.iter().enumerate() {
            if real_rank(&p.fields, tau, floor) != k {
                failures.push((ti, zi));
            }
            if f.zeta_grid.is_boundary(zi) {
                let mut cols = vec![p.dpsi(f.zeta_points[zi])];
                cols.extend(p.fields.iter().cloned());
                *hist.entry(real_rank(&cols, tau, floor)).or_insert(0) += 1;
            }
        }
    }
    let d = f.d;
    let boundary_rank_pass = hist.keys().all(|&r| r == d || r + 1 == d);
    RegularityReport { t_rank_pass: failures.is_empty(), t_rank_failures: failures, boundary_rank_pass, boundary_ranks: hist }
}

/// Velocity criterion `Im(∂_tΨ / ∂_ψΨ) ≠ 0` for a planar family `Ψ = Φ_coordinate`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripRegularity<T> {
    pub pass: bool,
    /// Smallest `|Im(∂_tΨ/∂_ψΨ)|` over the checked points.
    pub min_abs_im: T,
    pub checked: usize,
    /// Boundary points lying on the envelope of the union, not checked.
    pub excluded: usize,
}

/// Checks the velocity criterion at boundary points interior to the union of the
/// closed domains. A point of `γ_t` is interior when it stays covered after a
/// small outward push along the curve normal.
pub fn strip_regularity<T: Real>(f: &DiscFamily<T>, coordinate: usize) -> Result<StripRegularity<T>> {
    if f.k() != 1 || coordinate >= f.n {
        return Err(Error::InvalidFamily("strip criterion needs k = 1 and a valid coordinate".into()));
    }
    let curves: Vec<Vec<Complex<T>>> = (0..f.manifold.len())
        .map(|ti| Ok(f.boundary_curve(ti)?.coord(coordinate).to_vec()))
        .collect::<Result<_>>()?;
    let eps = T::lit(1e-2) * T::one().max(f.scale);
    let bpts = f.zeta_grid.boundary_points();
    let rows: Vec<Result<(T, usize, usize)>> = (0..f.manifold.len())
        .into_par_iter()
        .map(|ti| {
            let t = f.manifold.coords(ti);
            let (mut min_im, mut checked, mut excluded) = (T::infinity(), 0, 0);
            for (j, &z) in bpts.iter().enumerate() {
                let p = f.partials_at(z, &t)?;
                let dpsi = p.dpsi(z)[coordinate];
                let dt = p.fields[0][coordinate];
                // Outward normal of a positively oriented curve: −i·tangent.
                let normal = -Complex::new(T::zero(), T::one()) * dpsi / dpsi.norm().max(T::min_positive_value());
                let probe = curves[ti][j] + normal * eps;
                let covered = curves.iter().any(|c| polygon_winding(c, probe).unwrap_or(0) >= 1);
                if !covered {
                    excluded += 1;
                    continue;
                }
                checked += 1;
                min_im = min_im.min((dt / dpsi).im.abs());
            }
            Ok((min_im, checked, excluded))
        })
        .collect();
    let (mut min_abs_im, mut checked, mut excluded) = (T::infinity(), 0, 0);
    for r in rows {
        let (m, c, e) = r?;
        min_abs_im = min_abs_im.min(m);
        checked += c;
        excluded += e;
    }
    Ok(StripRegularity { pass: checked > 0 && min_abs_im > T::lit(1e-6), min_abs_im, checked, excluded })
}

/// `max |∂_ζΦ|` over the lattice.
pub fn max_dzeta<T: Real>(parts: &[Vec<Partials<T>>]) -> T {
    parts.iter().flatten().fold(T::zero(), |acc, p| acc.max(norm(&p.dzeta)))
}
