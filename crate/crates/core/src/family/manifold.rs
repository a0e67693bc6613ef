use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManifoldKind<T> {
    Point,
    /// `|t| = 1`, coordinate `t = e^{iθ}`.
    Circle,
    /// `(e^{iθ₁}, e^{iθ₂})`.
    Torus,
    /// `|λ₁|² + |λ₂|² = ρ²` in ℂ².
    Sphere { radius: T },
}

/// Closed parameter manifold `M^k` with a sampling lattice and tangent fields.
///
/// Circle and torus lattices are uniform in the angles. The sphere uses the
/// Hopf-type lattice `λ = ρ(cos η e^{iξ₁}, sin η e^{iξ₂})` with
/// `η_j = (j + ½)(π/2)/m_η` and uniform `ξ₁, ξ₂`; its tangent fields are the
/// orthogonal projections `P_t(e_i) = e_i − ⟨e_i, t⟩ t/ρ²` of the four real
/// basis vectors of ℂ², which span `T_tS³` at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamManifold<T> {
    kind: ManifoldKind<T>,
    shape: Vec<usize>,
}

impl<T: Real> ParamManifold<T> {
    pub fn point() -> Self {
        Self { kind: ManifoldKind::Point, shape: Vec::new() }
    }

    pub fn circle(m: usize) -> Result<Self> {
        check(&[m])?;
        Ok(Self { kind: ManifoldKind::Circle, shape: vec![m] })
    }

    pub fn torus(m1: usize, m2: usize) -> Result<Self> {
        check(&[m1, m2])?;
        Ok(Self { kind: ManifoldKind::Torus, shape: vec![m1, m2] })
    }

    pub fn sphere(radius: T, m_eta: usize, m1: usize, m2: usize) -> Result<Self> {
        if m_eta == 0 {
            return Err(Error::GridTooCoarse("sphere lattice needs at least one latitude".into()));
        }
        check(&[m1, m2])?;
        if radius <= T::zero() {
            return Err(Error::InvalidFamily(format!("sphere radius {radius}")));
        }
        Ok(Self { kind: ManifoldKind::Sphere { radius }, shape: vec![m_eta, m1, m2] })
    }

    pub fn kind(&self) -> ManifoldKind<T> {
        self.kind
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Real dimension `k`.
    pub fn k(&self) -> usize {
        match self.kind {
            ManifoldKind::Point => 0,
            ManifoldKind::Circle => 1,
            ManifoldKind::Torus => 2,
            ManifoldKind::Sphere { .. } => 3,
        }
    }

    /// Number of complex coordinates of a parameter point.
    pub fn coordinate_count(&self) -> usize {
        match self.kind {
            ManifoldKind::Point => 0,
            ManifoldKind::Circle => 1,
            ManifoldKind::Torus | ManifoldKind::Sphere { .. } => 2,
        }
    }

    /// Number of tangent fields `T_j`.
    pub fn field_count(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere { .. } => 4,
            _ => self.k(),
        }
    }

    /// Whether `H_{k−2}(M) = 0`.
    pub fn low_homology_vanishes(&self) -> bool {
        !matches!(self.kind, ManifoldKind::Torus)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (k, &m) in self.shape.iter().enumerate().rev() {
            out[k] = idx % m;
            idx /= m;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        self.shape.iter().zip(multi).fold(0, |acc, (&m, &i)| acc * m + i)
    }

    /// Lattice angles of a grid point.
    pub fn angles(&self, idx: usize) -> Vec<T> {
        let m = self.multi_index(idx);
        match self.kind {
            ManifoldKind::Sphere { .. } => {
                let eta = (T::from_count(m[0]) + T::lit(0.5)) * T::FRAC_PI_2() / T::from_count(self.shape[0]);
                vec![eta, uniform(m[1], self.shape[1]), uniform(m[2], self.shape[2])]
            }
            _ => m.iter().zip(&self.shape).map(|(&i, &n)| uniform(i, n)).collect(),
        }
    }

    pub fn coords_at(&self, angles: &[T]) -> Vec<Complex<T>> {
        match self.kind {
            ManifoldKind::Point => Vec::new(),
            ManifoldKind::Circle | ManifoldKind::Torus => angles.iter().map(|&a| cis(a)).collect(),
            ManifoldKind::Sphere { radius } => vec![
                cis(angles[1]) * (radius * angles[0].cos()),
                cis(angles[2]) * (radius * angles[0].sin()),
            ],
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<Complex<T>> {
        self.coords_at(&self.angles(idx))
    }

    /// Tangent vector `T_j(t)` in the complex coordinates.
    pub fn field_vector(&self, t: &[Complex<T>], field: usize) -> Vec<Complex<T>> {
        let i = Complex::new(T::zero(), T::one());
        match self.kind {
            ManifoldKind::Point => Vec::new(),
            ManifoldKind::Circle | ManifoldKind::Torus => {
                let mut v = vec![Complex::new(T::zero(), T::zero()); t.len()];
                v[field] = i * t[field];
                v
            }
            ManifoldKind::Sphere { radius } => {
                let e = sphere_basis::<T>(field);
                let proj = (t[0].conj() * e[0] + t[1].conj() * e[1]).re / (radius * radius);
                vec![e[0] - t[0] * proj, e[1] - t[1] * proj]
            }
        }
    }

    /// Point reached from `t` after time `s` along the retraction curve of `T_j`.
    pub fn flow(&self, t: &[Complex<T>], field: usize, s: T) -> Vec<Complex<T>> {
        match self.kind {
            ManifoldKind::Point => Vec::new(),
            ManifoldKind::Circle | ManifoldKind::Torus => {
                let mut out = t.to_vec();
                out[field] = out[field] * cis(s);
                out
            }
            ManifoldKind::Sphere { radius } => {
                let v = self.field_vector(t, field);
                let w = [t[0] + v[0] * s, t[1] + v[1] * s];
                let r = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
                vec![w[0] * (radius / r), w[1] * (radius / r)]
            }
        }
    }

    /// Closed lattice lines used for zero tracking, each with a periodicity flag.
    ///
    /// Circle and torus lines run along the first angle; sphere lines along `ξ₁`.
    pub fn loops(&self) -> Vec<(Vec<usize>, bool)> {
        match self.kind {
            ManifoldKind::Point => vec![(vec![0], false)],
            ManifoldKind::Circle => vec![((0..self.shape[0]).collect(), true)],
            ManifoldKind::Torus => (0..self.shape[1])
                .map(|j| ((0..self.shape[0]).map(|i| self.flat_index(&[i, j])).collect(), true))
                .collect(),
            ManifoldKind::Sphere { .. } => {
                let mut out = Vec::new();
                for a in 0..self.shape[0] {
                    for c in 0..self.shape[2] {
                        out.push(((0..self.shape[1]).map(|b| self.flat_index(&[a, b, c])).collect(), true));
                    }
                }
                out
            }
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            ManifoldKind::Point => "point".into(),
            ManifoldKind::Circle => "circle".into(),
            ManifoldKind::Torus => "torus".into(),
            ManifoldKind::Sphere { .. } => "sphere".into(),
        }
    }
}

fn uniform<T: Real>(i: usize, n: usize) -> T {
    T::TAU() * T::from_count(i) / T::from_count(n)
}

fn check(sizes: &[usize]) -> Result<()> {
    match sizes.iter().find(|&&m| m < 4) {
        Some(m) => Err(Error::GridTooCoarse(format!("{m} samples on a circle factor"))),
        None => Ok(()),
    }
}

fn sphere_basis<T: Real>(i: usize) -> [Complex<T>; 2] {
    let (z, o) = (T::zero(), T::one());
    match i {
        0 => [Complex::new(o, z), Complex::new(z, z)],
        1 => [Complex::new(z, o), Complex::new(z, z)],
        2 => [Complex::new(z, z), Complex::new(o, z)],
        _ => [Complex::new(z, z), Complex::new(z, o)],
    }
}
