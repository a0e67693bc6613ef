//! Real submanifolds of ℂⁿ given by parametrized patches: tangent frames,
//! CR dimension, pointwise classification and graph lifts.

use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{complex_rank, null_space, orthonormalize_real, svd, ColMatrix};
use crate::scalar::{norm, Real};

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-7;

/// Embedding step as a fraction of the parameter-domain scale.
pub const FRAME_STEP: f64 = 1e-5;

pub type Embedding<T> = Arc<dyn Fn(&[T]) -> Result<Vec<Complex<T>>> + Send + Sync>;
pub type GraphFunction<T> = Arc<dyn Fn(&[Complex<T>]) -> Result<Complex<T>> + Send + Sync>;

/// One coordinate axis of a parameter lattice.
///
/// Periodic axes omit the endpoint (`count` points over `[start, end)`); closed
/// axes include both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis<T> {
    pub start: T,
    pub end: T,
    pub count: usize,
    pub periodic: bool,
}

impl<T: Real> Axis<T> {
    pub fn periodic(start: T, end: T, count: usize) -> Self {
        Self { start, end, count, periodic: true }
    }

    pub fn closed(start: T, end: T, count: usize) -> Self {
        Self { start, end, count, periodic: false }
    }

    pub fn spacing(&self) -> T {
        let div = if self.periodic { self.count } else { self.count.saturating_sub(1).max(1) };
        (self.end - self.start) / T::from_count(div)
    }

    pub fn value(&self, i: usize) -> T {
        self.start + self.spacing() * T::from_count(i)
    }

    pub fn extent(&self) -> T {
        (self.end - self.start).abs()
    }
}

/// Parametrized real `d`-dimensional patch `U ⊂ ℝᵈ → ℂⁿ` sampled on a lattice.
#[derive(Clone)]
pub struct ManifoldPatch<T> {
    embedding: Embedding<T>,
    axes: Vec<Axis<T>>,
    n: usize,
}

impl<T: Real> std::fmt::Debug for ManifoldPatch<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManifoldPatch").field("axes", &self.axes).field("n", &self.n).finish()
    }
}

impl<T: Real> ManifoldPatch<T> {
    pub fn new(n: usize, axes: Vec<Axis<T>>, embedding: Embedding<T>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Dimension("patch needs at least one axis".into()));
        }
        if let Some(a) = axes.iter().find(|a| a.count < 3) {
            return Err(Error::GridTooCoarse(format!("axis with {} points", a.count)));
        }
        let patch = Self { embedding, axes, n };
        let p = patch.point(0)?;
        if p.len() != n {
            return Err(Error::Dimension(format!("embedding returns {} coordinates, expected {n}", p.len())));
        }
        Ok(patch)
    }

    /// Real dimension `d`.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Ambient complex dimension `n`.
    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn axes(&self) -> &[Axis<T>] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice multi-index of a flat index (last axis fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = idx % a.count;
            idx /= a.count;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        self.axes.iter().zip(multi).fold(0, |acc, (a, &i)| acc * a.count + i)
    }

    pub fn param(&self, idx: usize) -> Vec<T> {
        self.multi_index(idx).iter().zip(&self.axes).map(|(&i, a)| a.value(i)).collect()
    }

    pub fn eval(&self, u: &[T]) -> Result<Vec<Complex<T>>> {
        (self.embedding)(u)
    }

    pub fn point(&self, idx: usize) -> Result<Vec<Complex<T>>> {
        self.eval(&self.param(idx))
    }

    /// Lattice neighbour along `axis`, wrapping on periodic axes.
    pub fn neighbor(&self, idx: usize, axis: usize, delta: isize) -> Option<usize> {
        let mut m = self.multi_index(idx);
        let a = &self.axes[axis];
        let j = m[axis] as isize + delta;
        m[axis] = if a.periodic {
            j.rem_euclid(a.count as isize) as usize
        } else if j < 0 || j >= a.count as isize {
            return None;
        } else {
            j as usize
        };
        Some(self.flat_index(&m))
    }

    /// Points at least one cell away from every non-periodic axis end.
    pub fn is_interior(&self, idx: usize) -> bool {
        self.multi_index(idx)
            .iter()
            .zip(&self.axes)
            .all(|(&i, a)| a.periodic || (i >= 1 && i + 2 <= a.count))
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i)).collect()
    }

    /// Finite-difference step for the embedding differential.
    pub fn frame_step(&self) -> T {
        let scale = self.axes.iter().fold(T::one(), |acc, a| acc.max(a.extent()));
        T::lit(FRAME_STEP) * scale
    }

    /// Columns `∂_{u_i}` of the embedding differential at parameter `u`.
    pub fn differential_at(&self, u: &[T]) -> Result<Vec<Vec<Complex<T>>>> {
        let h = self.frame_step();
        let two_h = h + h;
        (0..self.dim())
            .map(|i| {
                let mut up = u.to_vec();
                let mut dn = u.to_vec();
                up[i] = up[i] + h;
                dn[i] = dn[i] - h;
                let (p, m) = (self.eval(&up)?, self.eval(&dn)?);
                Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / two_h).collect())
            })
            .collect()
    }

    pub fn differential(&self, idx: usize) -> Result<Vec<Vec<Complex<T>>>> {
        self.differential_at(&self.param(idx))
    }
}

/// Real-orthonormal basis of `T_bΛ` at a lattice point.
pub fn tangent_frame<T: Real>(patch: &ManifoldPatch<T>, idx: usize) -> Result<Vec<Vec<Complex<T>>>> {
    let cols = patch.differential(idx)?;
    orthonormalize_real(&cols, T::lit(RANK_TOL)).ok_or_else(|| Error::RankDeficient {
        rank: crate::linalg::real_rank(&cols, T::lit(RANK_TOL), T::zero()),
        expected: patch.dim(),
    })
}

/// `c = d − rank_ℂ(frame)`: complex dimension of `T ∩ iT`.
pub fn cr_dimension<T: Real>(frame: &[Vec<Complex<T>>], tau: T) -> usize {
    frame.len() - complex_rank(frame, tau, T::zero())
}

/// Directions `v = A·a` in `T ∩ iT`, returned as real coefficient pairs `(a, b)`
/// with `A·b = i·A·a` and `|A·a| = 1`, where `A` holds the differential columns.
pub fn complex_tangent_directions<T: Real>(cols: &[Vec<Complex<T>>], tau: T) -> Vec<(Vec<T>, Vec<T>)> {
    let d = cols.len();
    if d == 0 {
        return Vec::new();
    }
    let rows = cols[0].len();
    let i = Complex::new(T::zero(), T::one());
    let mut block: Vec<Vec<Complex<T>>> = cols.iter().map(|c| c.iter().map(|z| z * i).collect()).collect();
    block.extend(cols.iter().map(|c| c.iter().map(|z| -z).collect::<Vec<_>>()));
    let real = ColMatrix::from_columns(rows, block).realified();
    null_space(&real, tau)
        .into_iter()
        .filter_map(|v| {
            let a: Vec<T> = v[..d].iter().map(|z| z.re).collect();
            let b: Vec<T> = v[d..].iter().map(|z| z.re).collect();
            let va: Vec<Complex<T>> = (0..rows)
                .map(|r| a.iter().zip(cols).fold(Complex::new(T::zero(), T::zero()), |acc, (ai, c)| acc + c[r] * *ai))
                .collect();
            let s = norm(&va);
            if s <= T::zero() {
                return None;
            }
            Some((a.iter().map(|x| *x / s).collect(), b.iter().map(|x| *x / s).collect()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CrClass {
    /// `d` even and `c = d/2`.
    Complex,
    /// `c = 0`.
    TotallyReal,
    /// `d = 2p − 1` and `c = p − 1`.
    MaximallyComplex,
    /// `c = d − n`.
    Generic,
    /// Any other CR dimension.
    Cr(usize),
}

impl CrClass {
    pub fn of(c: usize, d: usize, n: usize) -> Self {
        if d > 0 && d % 2 == 0 && c == d / 2 {
            CrClass::Complex
        } else if c == 0 {
            CrClass::TotallyReal
        } else if d % 2 == 1 && c == d.div_ceil(2) - 1 {
            CrClass::MaximallyComplex
        } else if d >= n && c == d - n {
            CrClass::Generic
        } else {
            CrClass::Cr(c)
        }
    }

    pub fn name(&self) -> String {
        match self {
            CrClass::Complex => "complex".into(),
            CrClass::TotallyReal => "totally-real".into(),
            CrClass::MaximallyComplex => "maximally-complex".into(),
            CrClass::Generic => "generic".into(),
            CrClass::Cr(q) => format!("cr-{q}"),
        }
    }
}

/// CR dimension and class at every interior lattice point of a patch.
#[derive(Debug, Clone, PartialEq)]
pub struct CrField<T> {
    pub d: usize,
    pub n: usize,
    pub tau: T,
    /// Flat lattice indices of the classified points.
    pub points: Vec<usize>,
    pub c: Vec<usize>,
    pub sigma: Vec<Vec<T>>,
    pub classes: Vec<CrClass>,
    /// `c` takes a single value (the patch is a CR manifold).
    pub constant: bool,
}

impl<T: Real> CrField<T> {
    pub fn min_c(&self) -> usize {
        self.c.iter().copied().min().unwrap_or(0)
    }

    pub fn max_c(&self) -> usize {
        self.c.iter().copied().max().unwrap_or(0)
    }

    /// Fraction of points with CR dimension `c`.
    pub fn fraction(&self, c: usize) -> f64 {
        if self.c.is_empty() {
            return 0.0;
        }
        self.c.iter().filter(|&&x| x == c).count() as f64 / self.c.len() as f64
    }

    /// `max(0, d − n) ≤ c ≤ ⌊d/2⌋` everywhere.
    pub fn bounds_hold(&self) -> bool {
        let lo = self.d.saturating_sub(self.n);
        self.c.iter().all(|&c| c >= lo && c <= self.d / 2)
    }
}

/// Classifies every interior lattice point of the patch.
pub fn classify<T: Real>(patch: &ManifoldPatch<T>, tau: T) -> Result<CrField<T>> {
    let points = patch.interior_indices();
    let per_point: Vec<Result<(usize, Vec<T>)>> = points
        .par_iter()
        .map(|&idx| {
            let frame = tangent_frame(patch, idx)?;
            let s = svd(&ColMatrix::from_columns(patch.ambient(), frame));
            let rank = s.rank(tau, T::zero());
            Ok((patch.dim() - rank, s.sigma))
        })
        .collect();
    let mut c = Vec::with_capacity(points.len());
    let mut sigma = Vec::with_capacity(points.len());
    for r in per_point {
        let (ci, si) = r?;
        c.push(ci);
        sigma.push(si);
    }
    let (d, n) = (patch.dim(), patch.ambient());
    let classes = c.iter().map(|&ci| CrClass::of(ci, d, n)).collect();
    let constant = c.windows(2).all(|w| w[0] == w[1]);
    Ok(CrField { d, n, tau, points, c, sigma, classes, constant })
}

/// Graph `u ↦ (x(u), f(x(u)))` of `f` over the patch, in `ℂ^{n+1}`.
pub fn graph_lift<T: Real>(omega: &ManifoldPatch<T>, f: GraphFunction<T>) -> Result<ManifoldPatch<T>> {
    let base = omega.embedding.clone();
    let embedding: Embedding<T> = Arc::new(move |u: &[T]| {
        let mut z = base(u)?;
        let w = f(&z)?;
        z.push(w);
        Ok(z)
    });
    ManifoldPatch::new(omega.ambient() + 1, omega.axes.clone(), embedding)
}

/// CR conclusion drawn from a family's rank collapse, cross-checked on the lift.
#[derive(Debug, Clone, PartialEq)]
pub struct CrVerdict<T> {
    /// The family's hypotheses held and its rank collapsed, so `c ≥ 1` is predicted.
    pub predicted: bool,
    /// `Some(agrees)` when a prediction was made.
    pub confirmed: Option<bool>,
    pub field: CrField<T>,
}

pub fn cr_verdict_from_rank<T: Real>(
    hypotheses_hold: bool,
    rank_collapsed: bool,
    lift: &ManifoldPatch<T>,
    tau: T,
) -> Result<CrVerdict<T>> {
    let field = classify(lift, tau)?;
    let predicted = hypotheses_hold && rank_collapsed;
    let confirmed = predicted.then(|| field.min_c() >= 1);
    Ok(CrVerdict { predicted, confirmed, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cis;

    type C = Complex<f64>;

    fn plane_graph(f: fn(C) -> C) -> ManifoldPatch<f64> {
        let axes = vec![Axis::closed(-1.0, 1.0, 9), Axis::closed(-1.0, 1.0, 9)];
        ManifoldPatch::new(
            2,
            axes,
            Arc::new(move |u: &[f64]| {
                let z = C::new(u[0], u[1]);
                Ok(vec![z, f(z)])
            }),
        )
        .unwrap()
    }

    fn sphere() -> ManifoldPatch<f64> {
        // Hopf-type chart (η, ξ₁, ξ₂) ↦ (cos η e^{iξ₁}, sin η e^{iξ₂}).
        let axes = vec![
            Axis::closed(0.1, 1.4, 7),
            Axis::periodic(0.0, std::f64::consts::TAU, 8),
            Axis::periodic(0.0, std::f64::consts::TAU, 8),
        ];
        ManifoldPatch::new(
            2,
            axes,
            Arc::new(|u: &[f64]| Ok(vec![cis(u[1]) * u[0].cos(), cis(u[2]) * u[0].sin()])),
        )
        .unwrap()
    }

    #[test]
    fn cr_dimension_examples() {
        let one = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        assert_eq!(cr_dimension(&[vec![one, one], vec![i, i]], RANK_TOL), 1);
        assert_eq!(cr_dimension(&[vec![one, one], vec![i, -i]], RANK_TOL), 0);
        let zero = C::new(0.0, 0.0);
        assert_eq!(cr_dimension(&[vec![i, zero], vec![zero, one], vec![zero, i]], RANK_TOL), 1);
    }

    #[test]
    fn holomorphic_graph_is_complex_and_conjugate_graph_totally_real() {
        let f = classify(&plane_graph(|z| z * z), RANK_TOL).unwrap();
        assert!(f.c.iter().all(|&c| c == 1));
        assert!(f.classes.iter().all(|c| *c == CrClass::Complex));
        assert!(f.constant);
        let g = classify(&plane_graph(|z| z.conj()), RANK_TOL).unwrap();
        assert!(g.c.iter().all(|&c| c == 0));
        assert!(g.classes.iter().all(|c| *c == CrClass::TotallyReal));
    }

    #[test]
    fn sphere_is_maximally_complex() {
        let f = classify(&sphere(), RANK_TOL).unwrap();
        assert!(!f.c.is_empty());
        assert!(f.c.iter().all(|&c| c == 1));
        assert!(f.classes.iter().all(|c| *c == CrClass::MaximallyComplex));
        assert!(f.bounds_hold());
    }

    #[test]
    fn sphere_frame_at_pole_spans_kernel_of_radius() {
        // At η = 0, ξ = 0 the point is (1, 0); the tangent space is {(i,0),(0,1),(0,i)}.
        let p = sphere();
        let cols = p.differential_at(&[0.0, 0.0, 0.0]).unwrap();
        let normal = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        for c in &cols {
            assert!(crate::linalg::dot(&normal, c).re.abs() < 1e-9);
        }
        // The chart degenerates at the pole: ∂_{ξ₂} vanishes, (i,0) and (0,1) remain.
        let dirs: Vec<Vec<C>> = cols.into_iter().filter(|c| norm(c) > 1e-6).collect();
        assert_eq!(dirs.len(), 2);
        assert!((dirs[0][1] - C::new(1.0, 0.0)).norm() < 1e-9);
        assert!((dirs[1][0] - C::new(0.0, 1.0)).norm() < 1e-9);
    }

    #[test]
    fn flat_lift_keeps_base_field() {
        let base = ManifoldPatch::new(
            1,
            vec![Axis::closed(0.5, 1.5, 7), Axis::closed(0.5, 1.5, 7)],
            Arc::new(|u: &[f64]| Ok(vec![C::new(u[0], u[1])])),
        )
        .unwrap();
        let lift = graph_lift(&base, Arc::new(|_: &[C]| Ok(C::new(0.0, 0.0)))).unwrap();
        assert_eq!(classify(&base, RANK_TOL).unwrap().c, classify(&lift, RANK_TOL).unwrap().c);
        let id = graph_lift(&base, Arc::new(|z: &[C]| Ok(z[0]))).unwrap();
        assert!(classify(&id, RANK_TOL).unwrap().c.iter().all(|&c| c == 1));
        let abs = graph_lift(&base, Arc::new(|z: &[C]| Ok(C::new(z[0].norm() + 2.0, 0.0)))).unwrap();
        assert!(classify(&abs, RANK_TOL).unwrap().c.iter().all(|&c| c == 0));
    }

    #[test]
    fn complex_directions_satisfy_j_invariance() {
        let p = plane_graph(|z| z * z);
        let cols = p.differential(40).unwrap();
        let dirs = complex_tangent_directions(&cols, RANK_TOL);
        assert_eq!(dirs.len(), 2);
        let i = C::new(0.0, 1.0);
        for (a, b) in dirs {
            for r in 0..2 {
                let va = a[0] * cols[0][r] + a[1] * cols[1][r];
                let vb = b[0] * cols[0][r] + b[1] * cols[1][r];
                assert!((vb - i * va).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn interior_excludes_closed_ends() {
        let p = plane_graph(|z| z);
        assert_eq!(p.interior_indices().len(), 7 * 7);
        assert_eq!(p.neighbor(0, 0, -1), None);
        assert_eq!(sphere().neighbor(0, 1, -1), Some(7 * 8));
    }

    #[test]
    fn verdict_flags_disagreement() {
        let tr = plane_graph(|z| z.conj());
        let v = cr_verdict_from_rank(true, true, &tr, RANK_TOL).unwrap();
        assert_eq!(v.confirmed, Some(false));
        let none = cr_verdict_from_rank(false, true, &tr, RANK_TOL).unwrap();
        assert_eq!(none.confirmed, None);
    }
}
