use num_complex::Complex;
use rayon::prelude::*;

use super::{sample_partials, DiscFamily, ManifoldKind, Partials};
use crate::argument::polygon_winding;
use crate::error::{Error, Result};
use crate::linalg::{real_least_squares, real_rank};
use crate::scalar::{cis, norm, Real};

/// Cells per side of the common-point search grid.
pub const ORBIT_SEARCH_GRID: usize = 200;

/// Generic base points `(ψ₀, θ₀)` for the regular value `y = Φ(u₀)`.
const BASE_POINTS: [(f64, f64); 2] = [(0.7123, 1.3), (0.3917, 2.1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegeneracyBranch {
    DimensionDrop,
    ZeroDegree,
    NotDegenerate,
    Unknown,
}

impl DegeneracyBranch {
    pub fn name(&self) -> &'static str {
        match self {
            DegeneracyBranch::DimensionDrop => "DimensionDrop",
            DegeneracyBranch::ZeroDegree => "ZeroDegree",
            DegeneracyBranch::NotDegenerate => "NotDegenerate",
            DegeneracyBranch::Unknown => "Unknown",
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, DegeneracyBranch::DimensionDrop | DegeneracyBranch::ZeroDegree)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub branch: DegeneracyBranch,
    /// Largest real rank of `[∂_ψΦ, d_tΦ]` on the boundary lattice.
    pub boundary_max_real_rank: usize,
    /// The sampled boundary rank agrees with the declared `d`.
    pub verified: bool,
    pub degree: Option<i64>,
    /// Preimages of the regular value used for the degree.
    pub preimages: usize,
}

/// Decides whether `Φ|_{S¹×M}` degenerates by dimension or by degree.
pub fn degeneracy_check<T: Real>(f: &DiscFamily<T>) -> Result<DegeneracyReport> {
    degeneracy_from(f, &sample_partials(f)?)
}

pub fn degeneracy_from<T: Real>(f: &DiscFamily<T>, parts: &[Vec<Partials<T>>]) -> Result<DegeneracyReport> {
    let (k, d) = (f.k(), f.d());
    let floor = T::lit(1e-12) * T::one().max(f.scale());
    let tau = T::lit(super::RANK_TOL);
    let zetas = f.zeta_points();
    let mut max_rank = 0;
    for row in parts {
        for (zi, p) in row.iter().enumerate() {
            if f.zeta_grid().is_boundary(zi) {
                let mut cols = vec![p.dpsi(zetas[zi])];
                cols.extend(p.fields.iter().cloned());
                max_rank = max_rank.max(real_rank(&cols, tau, floor));
            }
        }
    }
    if d < k + 1 {
        return Ok(DegeneracyReport {
            branch: DegeneracyBranch::DimensionDrop,
            boundary_max_real_rank: max_rank,
            verified: max_rank <= d,
            degree: None,
            preimages: 0,
        });
    }
    if d > 2 || !matches!(f.manifold().kind(), ManifoldKind::Point | ManifoldKind::Circle) {
        return Ok(DegeneracyReport {
            branch: DegeneracyBranch::Unknown,
            boundary_max_real_rank: max_rank,
            verified: max_rank <= d,
            degree: None,
            preimages: 0,
        });
    }
    let (degree, preimages) = boundary_degree(f)?;
    let branch = match degree {
        Some(0) => DegeneracyBranch::ZeroDegree,
        Some(_) => DegeneracyBranch::NotDegenerate,
        None => DegeneracyBranch::Unknown,
    };
    Ok(DegeneracyReport { branch, boundary_max_real_rank: max_rank, verified: max_rank <= d, degree, preimages })
}

/// Boundary map `u = (ψ[, θ]) ↦ Φ(e^{iψ}, t(θ))` and its real Jacobian columns.
struct BoundaryMap<'a, T> {
    f: &'a DiscFamily<T>,
    k: usize,
}

impl<T: Real> BoundaryMap<'_, T> {
    fn eval(&self, u: &[T]) -> Result<Vec<Complex<T>>> {
        let t = self.f.manifold().coords_at(&u[1..]);
        self.f.eval(cis(u[0]), &t)
    }

    fn columns(&self, u: &[T]) -> Result<Vec<Vec<Complex<T>>>> {
        let t = self.f.manifold().coords_at(&u[1..]);
        let z = cis(u[0]);
        let p = self.f.partials_at(z, &t)?;
        let mut cols = vec![p.dpsi(z)];
        cols.extend(p.fields.into_iter().take(self.k));
        Ok(cols)
    }
}

fn wrap<T: Real>(x: T) -> T {
    let r = x % T::TAU();
    if r < T::zero() {
        r + T::TAU()
    } else {
        r
    }
}

fn angle_gap<T: Real>(a: T, b: T) -> T {
    let g = wrap(a - b);
    g.min(T::TAU() - g)
}

/// Signed count of preimages of a regular value, orientation taken relative to
/// the tangent plane at the base point.
fn boundary_degree<T: Real>(f: &DiscFamily<T>) -> Result<(Option<i64>, usize)> {
    let k = f.k();
    let map = BoundaryMap { f, k };
    let dim = k + 1;
    let scale = T::one().max(f.scale());
    let accept = T::lit(1e-10) * scale;
    for &(psi0, theta0) in &BASE_POINTS {
        let u0: Vec<T> = if k == 0 { vec![T::lit(psi0)] } else { vec![T::lit(psi0), T::lit(theta0)] };
        let base = map.columns(&u0)?;
        if real_rank(&base, T::lit(1e-6), T::lit(1e-12) * scale) < dim {
            continue;
        }
        let y = map.eval(&u0)?;
        let side = if k == 0 { 256 } else { 64 };
        let step = T::TAU() / T::from_count(side);
        let cells = if k == 0 { side } else { side * side };
        let point = |c: usize| -> Vec<T> {
            if k == 0 {
                vec![step * T::from_count(c)]
            } else {
                vec![step * T::from_count(c / side), step * T::from_count(c % side)]
            }
        };
        let dist: Vec<T> = (0..cells)
            .into_par_iter()
            .map(|c| {
                map.eval(&point(c)).map(|v| norm(&v.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>()))
            })
            .collect::<Result<_>>()?;
        let neighbors = |c: usize| -> Vec<usize> {
            if k == 0 {
                vec![(c + side - 1) % side, (c + 1) % side]
            } else {
                let (i, j) = ((c / side) as isize, (c % side) as isize);
                let s = side as isize;
                let mut out = Vec::with_capacity(8);
                for di in -1..=1 {
                    for dj in -1..=1 {
                        if di != 0 || dj != 0 {
                            out.push(((i + di).rem_euclid(s) * s + (j + dj).rem_euclid(s)) as usize);
                        }
                    }
                }
                out
            }
        };
        let minima: Vec<usize> = (0..cells).filter(|&c| neighbors(c).iter().all(|&n| dist[c] <= dist[n])).collect();
        let mut roots: Vec<Vec<T>> = Vec::new();
        for c in minima {
            if let Some(u) = gauss_newton(&map, point(c), &y, accept)? {
                if !roots.iter().any(|r| r.iter().zip(&u).all(|(a, b)| angle_gap(*a, *b) < T::lit(1e-6))) {
                    roots.push(u);
                }
            }
        }
        let mut degree = 0i64;
        let mut regular = true;
        for u in &roots {
            let cols = map.columns(u)?;
            let coeffs: Vec<Vec<T>> = cols.iter().map(|c| real_least_squares(&base, c)).collect();
            let det = real_det(coeffs);
            if det.abs() < T::lit(1e-8) {
                regular = false;
                break;
            }
            degree += if det > T::zero() { 1 } else { -1 };
        }
        if regular {
            return Ok((Some(degree), roots.len()));
        }
    }
    Ok((None, 0))
}

fn gauss_newton<T: Real>(map: &BoundaryMap<'_, T>, mut u: Vec<T>, y: &[Complex<T>], accept: T) -> Result<Option<Vec<T>>> {
    for _ in 0..40 {
        let v = map.eval(&u)?;
        let r: Vec<Complex<T>> = y.iter().zip(&v).map(|(a, b)| a - b).collect();
        if norm(&r) <= accept {
            return Ok(Some(u.into_iter().map(wrap).collect()));
        }
        let cols = map.columns(&u)?;
        let du = real_least_squares(&cols, &r);
        let big = du.iter().fold(T::zero(), |a, x| a.max(x.abs()));
        let damp = if big > T::lit(0.5) { T::lit(0.5) / big } else { T::one() };
        for (a, b) in u.iter_mut().zip(du) {
            *a = *a + b * damp;
        }
    }
    let v = map.eval(&u)?;
    let r: Vec<Complex<T>> = y.iter().zip(&v).map(|(a, b)| a - b).collect();
    Ok((norm(&r) <= accept).then(|| u.into_iter().map(wrap).collect()))
}

/// Determinant of a small real matrix given by columns.
fn real_det<T: Real>(cols: Vec<Vec<T>>) -> T {
    match cols.len() {
        1 => cols[0][0],
        2 => cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1],
        n => {
            let mut a: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
            let mut det = T::one();
            for k in 0..n {
                let piv = (k..n)
                    .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal))
                    .unwrap_or(k);
                if a[piv][k] == T::zero() {
                    return T::zero();
                }
                if piv != k {
                    a.swap(piv, k);
                    det = -det;
                }
                det = det * a[k][k];
                for i in (k + 1)..n {
                    let m = a[i][k] / a[k][k];
                    for j in k..n {
                        let akj = a[k][j];
                        a[i][j] = a[i][j] - m * akj;
                    }
                }
            }
            det
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitVerdict {
    Nontrivial,
    Trivial,
    Inconclusive,
}

impl OrbitVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitVerdict::Nontrivial => "nontrivial",
            OrbitVerdict::Trivial => "trivial",
            OrbitVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitMode {
    /// Search for a point surrounded by every curve `Φ_coordinate(S¹, t)`.
    Planar { coordinate: usize },
    /// Verdict supplied with the scenario.
    Declared(bool),
}

/// A point with winding number ≥ 1 about every curve of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonPoint<T> {
    pub point: Complex<T>,
    /// Distance from the point to the nearest curve sample.
    pub clearance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport<T> {
    pub verdict: OrbitVerdict,
    pub common_point: Option<CommonPoint<T>>,
    pub declared: bool,
    /// Search-grid spacing in planar mode.
    pub grid_spacing: Option<T>,
}

/// Searches a `grid × grid` lattice of cell centers over the bounding box of the
/// curves. Returns the surviving point nearest the centroid of the survivors.
/// Survivors that all sit within one cell of some curve make the search
/// inconclusive.
pub fn common_surrounded_point<T: Real>(
    curves: &[Vec<Complex<T>>],
    grid: usize,
) -> (OrbitVerdict, Option<CommonPoint<T>>, T) {
    let (mut lo, mut hi) = (Complex::new(T::infinity(), T::infinity()), Complex::new(T::neg_infinity(), T::neg_infinity()));
    for z in curves.iter().flatten() {
        lo = Complex::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = Complex::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    let g = T::from_count(grid.max(1));
    let (hx, hy) = ((hi.re - lo.re) / g, (hi.im - lo.im) / g);
    let spacing = hx.max(hy);
    let boxes: Vec<(Complex<T>, Complex<T>)> = curves
        .iter()
        .map(|c| {
            c.iter().fold(
                (Complex::new(T::infinity(), T::infinity()), Complex::new(T::neg_infinity(), T::neg_infinity())),
                |(a, b), z| (Complex::new(a.re.min(z.re), a.im.min(z.im)), Complex::new(b.re.max(z.re), b.im.max(z.im))),
            )
        })
        .collect();
    let survivors: Vec<Complex<T>> = (0..grid * grid)
        .into_par_iter()
        .filter_map(|c| {
            let half = T::lit(0.5);
            let p = Complex::new(
                lo.re + hx * (T::from_count(c / grid) + half),
                lo.im + hy * (T::from_count(c % grid) + half),
            );
            let inside = curves.iter().zip(&boxes).all(|(curve, (a, b))| {
                p.re > a.re && p.re < b.re && p.im > a.im && p.im < b.im && polygon_winding(curve, p).unwrap_or(0) >= 1
            });
            inside.then_some(p)
        })
        .collect();
    if survivors.is_empty() {
        // A point inside or within one cell of every curve means the grid may
        // have stepped over a thin common region.
        let near_miss = (0..grid * grid).into_par_iter().any(|c| {
            let half = T::lit(0.5);
            let p = Complex::new(
                lo.re + hx * (T::from_count(c / grid) + half),
                lo.im + hy * (T::from_count(c % grid) + half),
            );
            curves.iter().zip(&boxes).all(|(curve, (a, b))| {
                let in_box = p.re > a.re - spacing && p.re < b.re + spacing && p.im > a.im - spacing && p.im < b.im + spacing;
                in_box && (polygon_distance(curve, p) < spacing || polygon_winding(curve, p).unwrap_or(0) >= 1)
            })
        });
        let verdict = if near_miss { OrbitVerdict::Inconclusive } else { OrbitVerdict::Nontrivial };
        return (verdict, None, spacing);
    }
    let clearance = |p: Complex<T>| curves.iter().flatten().fold(T::infinity(), |acc, z| acc.min((z - p).norm()));
    let n = T::from_count(survivors.len());
    let centroid = survivors.iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b) / n;
    let best = survivors
        .iter()
        .copied()
        .min_by(|a, b| (a - centroid).norm().partial_cmp(&(b - centroid).norm()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty");
    let clear = survivors.iter().fold(T::zero(), |acc, &p| acc.max(clearance(p)));
    if clear < spacing {
        return (OrbitVerdict::Inconclusive, Some(CommonPoint { point: best, clearance: clearance(best) }), spacing);
    }
    (OrbitVerdict::Trivial, Some(CommonPoint { point: best, clearance: clearance(best) }), spacing)
}

fn polygon_distance<T: Real>(curve: &[Complex<T>], p: Complex<T>) -> T {
    let n = curve.len();
    (0..n).fold(T::infinity(), |acc, j| {
        let (a, b) = (curve[j], curve[(j + 1) % n]);
        let ab = b - a;
        let len2 = ab.norm_sqr();
        let s = if len2 > T::zero() { ((p - a) * ab.conj()).re / len2 } else { T::zero() };
        let q = a + ab * s.max(T::zero()).min(T::one());
        acc.min((p - q).norm())
    })
}

pub fn orbit_nontriviality<T: Real>(f: &DiscFamily<T>, mode: OrbitMode) -> Result<OrbitReport<T>> {
    match mode {
        OrbitMode::Declared(nontrivial) => Ok(OrbitReport {
            verdict: if nontrivial { OrbitVerdict::Nontrivial } else { OrbitVerdict::Trivial },
            common_point: None,
            declared: true,
            grid_spacing: None,
        }),
        OrbitMode::Planar { coordinate } => {
            if coordinate >= f.n() {
                return Err(Error::InvalidFamily(format!("no coordinate {coordinate} in ℂ^{}", f.n())));
            }
            let curves: Vec<Vec<Complex<T>>> = (0..f.manifold().len())
                .map(|ti| Ok(f.boundary_curve(ti)?.coord(coordinate).to_vec()))
                .collect::<Result<_>>()?;
            let (verdict, common_point, spacing) = common_surrounded_point(&curves, ORBIT_SEARCH_GRID);
            Ok(OrbitReport { verdict, common_point, declared: false, grid_spacing: Some(spacing) })
        }
    }
}
