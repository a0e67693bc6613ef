use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use super::{sample_partials_at, DiscFamily, ParamManifold, Partials};
use crate::argument::HolomorphicBoundary;
use crate::contour::angles;
use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::scalar::{cis, max_abs, norm, Real};

/// Boundary points closer than `COINCIDENCE_TOL · max(1, scale)` are treated as one point of `Λ`.
pub const COINCIDENCE_TOL: f64 = 1e-9;

/// Largest admissible `|J/J̄(u₁) − J/J̄(u₂)|` on a coincidence pair.
pub const RATIO_TOL: f64 = 1e-6;

/// Multiplier applied to `J(ζ, t)` to build control experiments.
pub type Perturbation<T> = Arc<dyn Fn(Complex<T>, &[Complex<T>]) -> Complex<T> + Send + Sync>;

/// `J(ζ, t) = η(∂_ψΦ, T_{j₁}Φ, …, T_{j_{d−1}}Φ)` sampled per lattice fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianField<T> {
    /// Coordinate indices `i₁ < … < i_d` of the form `dz_{i₁} ∧ … ∧ dz_{i_d}`.
    pub eta: Vec<usize>,
    pub fields_used: Vec<usize>,
    /// `boundary[t][j] = J(e^{iψ_j}, t)`.
    pub boundary: Vec<Vec<Complex<T>>>,
    /// `interior[t][m]` at the interior ζ-grid points.
    pub interior: Vec<Vec<Complex<T>>>,
    /// `J(0, t)`.
    pub origin: Vec<Complex<T>>,
    pub loops: Vec<(Vec<usize>, bool)>,
    /// `max |J|` over the boundary lattice.
    pub scale: T,
    /// Hadamard bound `max Π|column|` of the minors; `J` below `1e-10 · bound`
    /// counts as zero.
    pub bound: T,
}

impl<T: Real> JacobianField<T> {
    /// Field given in closed form, for fixtures not derived from a family.
    pub fn from_fn<F>(manifold: &ParamManifold<T>, samples: usize, j: F) -> Result<Self>
    where
        F: Fn(Complex<T>, &[Complex<T>]) -> Complex<T>,
    {
        crate::contour::check_sample_count(samples)?;
        let psi = angles::<T>(samples);
        let mut boundary = Vec::with_capacity(manifold.len());
        let mut origin = Vec::with_capacity(manifold.len());
        for ti in 0..manifold.len() {
            let t = manifold.coords(ti);
            boundary.push(psi.iter().map(|&p| j(cis(p), &t)).collect::<Vec<_>>());
            origin.push(j(Complex::new(T::zero(), T::zero()), &t));
        }
        let scale = boundary.iter().fold(T::zero(), |acc, b| acc.max(max_abs(b)));
        Ok(Self {
            eta: Vec::new(),
            fields_used: Vec::new(),
            interior: vec![Vec::new(); manifold.len()],
            loops: manifold.loops(),
            boundary,
            origin,
            scale,
            bound: scale,
        })
    }

    pub fn t_count(&self) -> usize {
        self.boundary.len()
    }

    /// `J(·, t)` as a holomorphic function on the closed disc.
    pub fn fiber(&self, t: usize) -> Result<HolomorphicBoundary<T>> {
        HolomorphicBoundary::from_samples(self.boundary[t].clone())
    }

    pub fn max_origin(&self) -> T {
        max_abs(&self.origin)
    }

    /// Per-fiber negative Fourier mass relative to `max(1, scale)`.
    pub fn negative_masses(&self) -> Result<Vec<T>> {
        let s = T::one().max(self.scale);
        (0..self.t_count()).map(|t| Ok(self.fiber(t)?.negative_mass() / s)).collect()
    }

    /// Fibers on which `J(·, t)` vanishes identically (relative to the field scale).
    pub fn is_singular_fiber(&self, t: usize) -> bool {
        max_abs(&self.boundary[t]) <= T::lit(1e-10) * self.bound
    }
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn jacobian_value<T: Real>(p: &Partials<T>, zeta: Complex<T>, eta: &[usize], fields: &[usize]) -> Complex<T> {
    determinant(&minor_columns(p, zeta, eta, fields))
}

fn minor_columns<T: Real>(p: &Partials<T>, zeta: Complex<T>, eta: &[usize], fields: &[usize]) -> Vec<Vec<Complex<T>>> {
    let mut cols = vec![p.dpsi(zeta)];
    cols.extend(fields.iter().map(|&j| p.fields[j].clone()));
    cols.iter().map(|c| eta.iter().map(|&i| c[i]).collect()).collect()
}

fn validate(n: usize, d: usize, m: usize, eta: &[usize], fields: &[usize]) -> Result<()> {
    let sorted_unique = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
    if eta.len() != d || !sorted_unique(eta) || eta.iter().any(|&i| i >= n) {
        return Err(Error::InvalidMinor(format!("η = {eta:?} is not a {d}-subset of 0..{n}")));
    }
    if fields.len() + 1 != d || !sorted_unique(fields) || fields.iter().any(|&j| j >= m) {
        return Err(Error::InvalidMinor(format!("fields {fields:?} are not a {}-subset of 0..{m}", d.saturating_sub(1))));
    }
    Ok(())
}

/// Samples the Jacobian field. With `eta`/`fields` unset, the coordinate form and
/// field subset maximizing `max |J|` on a probe set are chosen, ties going to the
/// lexicographically first choice.
pub fn jacobian_field<T: Real>(
    f: &DiscFamily<T>,
    eta: Option<Vec<usize>>,
    fields: Option<Vec<usize>>,
) -> Result<JacobianField<T>> {
    let (n, d, m) = (f.n(), f.d(), f.manifold().field_count());
    if d == 0 || d > n {
        return Err(Error::InvalidMinor(format!("no {d}×{d} minor in dimension {n}")));
    }
    let etas = match eta {
        Some(e) => vec![e],
        None => combinations(n, d),
    };
    let field_sets = match fields {
        Some(s) => vec![s],
        None => combinations(m, d - 1),
    };
    for e in &etas {
        for s in &field_sets {
            validate(n, d, m, e, s)?;
        }
    }
    let (eta, fields_used) = if etas.len() * field_sets.len() == 1 {
        (etas[0].clone(), field_sets[0].clone())
    } else {
        choose_form(f, &etas, &field_sets)?
    };
    let zetas = f.zeta_points().to_vec();
    let n_int = f.zeta_grid().interior_len();
    type Row<T> = (Vec<Complex<T>>, Vec<Complex<T>>, Complex<T>, T);
    let rows: Vec<Result<Row<T>>> = (0..f.manifold().len())
        .into_par_iter()
        .map(|ti| {
            let t = f.manifold().coords(ti);
            let mut bound = T::zero();
            let vals: Vec<Complex<T>> = zetas
                .iter()
                .map(|&z| {
                    let cols = minor_columns(&f.partials_at(z, &t)?, z, &eta, &fields_used);
                    bound = bound.max(cols.iter().fold(T::one(), |acc, c| acc * norm(c)));
                    Ok(determinant(&cols))
                })
                .collect::<Result<_>>()?;
            let zero = Complex::new(T::zero(), T::zero());
            let origin = jacobian_value(&f.partials_at(zero, &t)?, zero, &eta, &fields_used);
            Ok((vals[..n_int].to_vec(), vals[n_int..].to_vec(), origin, bound))
        })
        .collect();
    let (mut interior, mut boundary, mut origin, mut bound) = (Vec::new(), Vec::new(), Vec::new(), T::zero());
    for r in rows {
        let (i, b, o, h) = r?;
        interior.push(i);
        boundary.push(b);
        origin.push(o);
        bound = bound.max(h);
    }
    let scale = boundary.iter().fold(T::zero(), |acc, b| acc.max(max_abs(b)));
    Ok(JacobianField { eta, fields_used, boundary, interior, origin, loops: f.manifold().loops(), scale, bound })
}

fn choose_form<T: Real>(f: &DiscFamily<T>, etas: &[Vec<usize>], sets: &[Vec<usize>]) -> Result<(Vec<usize>, Vec<usize>)> {
    let nt = f.manifold().len();
    let probe_t: Vec<usize> = (0..nt.min(8)).map(|i| i * nt / nt.min(8)).collect();
    let probe_z: Vec<Complex<T>> =
        (0..16).map(|j| cis(T::TAU() * (T::from_count(j) + T::lit(0.37)) / T::lit(16.0))).collect();
    let parts = sample_partials_at(f, &probe_t, &probe_z)?;
    let mut best: Option<(T, &Vec<usize>, &Vec<usize>)> = None;
    for e in etas {
        for s in sets {
            let score = parts
                .iter()
                .flat_map(|row| row.iter().zip(&probe_z))
                .fold(T::zero(), |acc, (p, &z)| acc.max(jacobian_value(p, z, e, s).norm()));
            if best.map_or(true, |(b, _, _)| score > b * (T::one() + T::lit(1e-9))) {
                best = Some((score, e, s));
            }
        }
    }
    let (_, e, s) = best.ok_or_else(|| Error::InvalidMinor("no admissible form".into()))?;
    Ok((e.clone(), s.clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberRatioReport<T> {
    /// Number of boundary lattice pairs with coinciding images.
    pub pairs: usize,
    pub max_violation: T,
    /// No coincidence pairs were found, so nothing was tested.
    pub vacuous: bool,
    pub pass: bool,
}

/// Checks that `J/J̄` takes equal values at boundary points with equal images,
/// i.e. that it factors through `Λ`.
pub fn fiber_ratio_test<T: Real>(
    jf: &JacobianField<T>,
    f: &DiscFamily<T>,
    perturbation: Option<Perturbation<T>>,
) -> Result<FiberRatioReport<T>> {
    let bpts = f.zeta_grid().boundary_points();
    let per_t: Vec<Result<Vec<(Vec<Complex<T>>, Complex<T>)>>> = (0..f.manifold().len())
        .into_par_iter()
        .map(|ti| {
            let t = f.manifold().coords(ti);
            bpts.iter()
                .enumerate()
                .map(|(j, &z)| {
                    let mut jv = jf.boundary[ti][j];
                    if let Some(p) = &perturbation {
                        jv = jv * p(z, &t);
                    }
                    Ok((f.eval(z, &t)?, jv))
                })
                .collect()
        })
        .collect();
    let mut pts = Vec::new();
    for r in per_t {
        pts.extend(r?);
    }
    let jscale = pts.iter().fold(T::zero(), |acc, (_, j)| acc.max(j.norm()));
    if jscale <= T::lit(1e-12) * T::one().max(f.scale()) {
        // J ≡ 0: no phase to compare.
        pts.clear();
    }
    pts.retain(|(_, j)| j.norm() > T::lit(1e-6) * jscale);
    let tol = T::lit(COINCIDENCE_TOL) * T::one().max(f.scale());
    pts.sort_by(|a, b| a.0[0].re.partial_cmp(&b.0[0].re).unwrap_or(std::cmp::Ordering::Equal));
    let (mut pairs, mut worst) = (0, T::zero());
    for i in 0..pts.len() {
        for k in (i + 1)..pts.len() {
            if pts[k].0[0].re - pts[i].0[0].re > tol {
                break;
            }
            let diff: Vec<Complex<T>> = pts[i].0.iter().zip(&pts[k].0).map(|(a, b)| a - b).collect();
            if norm(&diff) > tol {
                continue;
            }
            pairs += 1;
            let (j1, j2) = (pts[i].1, pts[k].1);
            worst = worst.max((j1 / j1.conj() - j2 / j2.conj()).norm());
        }
    }
    Ok(FiberRatioReport { pairs, max_violation: worst, vacuous: pairs == 0, pass: pairs > 0 && worst < T::lit(RATIO_TOL) })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{example1, example2};
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn example1_jacobian_matches_closed_form() {
        let f = example1(16);
        let jf = jacobian_field(&f, None, None).unwrap();
        assert_eq!((jf.eta.clone(), jf.fields_used.clone()), (vec![0, 1], vec![0]));
        for (ti, row) in jf.boundary.iter().enumerate() {
            let th = std::f64::consts::TAU * ti as f64 / 16.0;
            for (j, v) in row.iter().enumerate() {
                let z = cis(std::f64::consts::TAU * j as f64 / 64.0);
                let want = -C::new(0.0, 1.0) * z * (2.0 + th.cos()) * th.sin();
                assert!((v - want).norm() < 1e-10);
            }
        }
        assert_eq!(jf.max_origin(), 0.0);
        assert!(jf.negative_masses().unwrap().iter().all(|&m| m < 1e-12));
    }

    #[test]
    fn example2_jacobian_vanishes() {
        let jf = jacobian_field(&example2(16), None, None).unwrap();
        assert!(jf.scale < 1e-12);
    }

    #[test]
    fn invalid_minor_is_rejected() {
        let f = example1(8);
        assert!(matches!(jacobian_field(&f, Some(vec![0, 0]), None), Err(Error::InvalidMinor(_))));
        assert!(matches!(jacobian_field(&f, None, Some(vec![3])), Err(Error::InvalidMinor(_))));
    }

    #[test]
    fn fiber_ratio_on_example1() {
        let f = example1(32);
        let jf = jacobian_field(&f, None, None).unwrap();
        let r = fiber_ratio_test(&jf, &f, None).unwrap();
        assert!(!r.vacuous && r.pass, "{r:?}");
        let bump: Perturbation<f64> = Arc::new(|z: C, t: &[C]| (C::new(0.0, 1.0) * z * t[0]).exp());
        let c = fiber_ratio_test(&jf, &f, Some(bump)).unwrap();
        assert!(c.max_violation > 1e-2);
    }

    #[test]
    fn injective_boundary_is_vacuous() {
        // Φ = (ζ, t): the boundary torus embeds.
        let phi: super::super::FamilyFn<f64> = Arc::new(|z: C, t: &[C]| Ok(vec![z, t[0]]));
        let f = super::super::build_family(
            phi,
            ParamManifold::circle(16).unwrap(),
            super::super::ZetaGrid::with_boundary(32),
            2,
        )
        .unwrap();
        let jf = jacobian_field(&f, None, None).unwrap();
        assert!(fiber_ratio_test(&jf, &f, None).unwrap().vacuous);
    }
}
