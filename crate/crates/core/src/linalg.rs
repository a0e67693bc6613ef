//! Small dense complex linear algebra: one-sided Jacobi SVD, ranks, null spaces.
//!
//! The matrices met in this crate are tiny (a handful of columns in ℂ³ or ℝ⁶),
//! so a column-oriented Hestenes–Jacobi sweep is both exact enough and simple.

use num_complex::Complex;

use crate::scalar::{norm, Real};

/// Column-major complex matrix: `cols[j]` is column `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix<T> {
    pub rows: usize,
    pub cols: Vec<Vec<Complex<T>>>,
}

impl<T: Real> ColMatrix<T> {
    pub fn from_columns(rows: usize, cols: Vec<Vec<Complex<T>>>) -> Self {
        debug_assert!(cols.iter().all(|c| c.len() == rows));
        Self { rows, cols }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Real matrix of size `2·rows × ncols` obtained by identifying ℂⁿ with ℝ²ⁿ.
    pub fn realified(&self) -> ColMatrix<T> {
        let cols = self.cols.iter().map(|c| realify(c)).collect();
        ColMatrix { rows: 2 * self.rows, cols }
    }

    pub fn frobenius(&self) -> T {
        self.cols.iter().fold(T::zero(), |acc, c| acc + norm(c).powi(2)).sqrt()
    }
}

/// Embeds `v ∈ ℂⁿ` as a real vector `(Re v, Im v) ∈ ℝ²ⁿ` stored with zero imaginary parts.
pub fn realify<T: Real>(v: &[Complex<T>]) -> Vec<Complex<T>> {
    v.iter()
        .map(|z| Complex::new(z.re, T::zero()))
        .chain(v.iter().map(|z| Complex::new(z.im, T::zero())))
        .collect()
}

/// Inverse of [`realify`].
pub fn complexify<T: Real>(v: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = v.len() / 2;
    (0..n).map(|i| Complex::new(v[i].re, v[n + i].re)).collect()
}

/// Singular values (descending) with matching right singular vectors.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub sigma: Vec<T>,
    /// `v[j]` is the right singular vector paired with `sigma[j]`.
    pub v: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Svd<T> {
    pub fn sigma_max(&self) -> T {
        self.sigma.first().copied().unwrap_or_else(T::zero)
    }

    /// Number of singular values above `tau · σ_max`; zero when `σ_max ≤ floor`.
    pub fn rank(&self, tau: T, floor: T) -> usize {
        let smax = self.sigma_max();
        if smax <= floor {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > tau * smax).count()
    }

    /// Ratio `σ_{i}/σ_1` (1-based `i`), zero when it does not exist.
    pub fn ratio(&self, i: usize) -> T {
        let smax = self.sigma_max();
        if i == 0 || i > self.sigma.len() || smax <= T::zero() {
            return T::zero();
        }
        self.sigma[i - 1] / smax
    }
}

/// One-sided Jacobi SVD of a complex matrix.
pub fn svd<T: Real>(a: &ColMatrix<T>) -> Svd<T> {
    let n = a.ncols();
    let mut u = a.cols.clone();
    let mut v: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex::new(T::zero(), T::zero()); n];
            e[j] = Complex::new(T::one(), T::zero());
            e
        })
        .collect();
    let eps = T::epsilon();
    // Columns below ε‖A‖ are numerically zero; rotating them only stirs roundoff.
    let tiny = eps * eps * u.iter().fold(T::zero(), |acc, c| acc + sq_norm(c));
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = sq_norm(&u[p]);
                let beta = sq_norm(&u[q]);
                let gamma = dot(&u[p], &u[q]);
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || g == T::zero() || alpha <= tiny || beta <= tiny {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (g + g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, phase, c, s);
                rotate(&mut v, p, q, phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut pairs: Vec<(T, Vec<Complex<T>>)> =
        u.iter().map(|c| norm(c)).zip(v).collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let (sigma, v) = pairs.into_iter().unzip();
    Svd { sigma, v }
}

fn rotate<T: Real>(m: &mut [Vec<Complex<T>>], p: usize, q: usize, phase: Complex<T>, c: T, s: T) {
    // Columns p, q ← (c·a_p − s·ã_q, s·a_p + c·ã_q) with ã_q = a_q·conj(phase).
    let ph = phase.conj();
    let (lo, hi) = m.split_at_mut(q);
    let col_p = &mut lo[p];
    let col_q = &mut hi[0];
    for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
        let yt = *y * ph;
        let xp = *x * c - yt * s;
        let yq = *x * s + yt * c;
        *x = xp;
        *y = yq;
    }
}

fn sq_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Hermitian inner product `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// Right singular vectors whose singular value is at most `tau · σ_max`.
pub fn null_space<T: Real>(a: &ColMatrix<T>, tau: T) -> Vec<Vec<Complex<T>>> {
    let s = svd(a);
    let cut = tau * s.sigma_max();
    s.sigma.iter().zip(s.v).filter(|(sig, _)| **sig <= cut).map(|(_, v)| v).collect()
}

/// Rank over ℂ of a set of vectors in ℂⁿ.
pub fn complex_rank<T: Real>(vectors: &[Vec<Complex<T>>], tau: T, floor: T) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors[0].len();
    svd(&ColMatrix::from_columns(rows, vectors.to_vec())).rank(tau, floor)
}

/// Rank over ℝ of a set of vectors in ℂⁿ ≅ ℝ²ⁿ.
pub fn real_rank<T: Real>(vectors: &[Vec<Complex<T>>], tau: T, floor: T) -> usize {
    let real: Vec<_> = vectors.iter().map(|v| realify(v)).collect();
    complex_rank(&real, tau, floor)
}

/// Orthonormalises vectors of ℂⁿ over ℝ (modified Gram–Schmidt in ℝ²ⁿ).
///
/// Returns `None` if a vector is dependent on its predecessors at relative level `tau`.
pub fn orthonormalize_real<T: Real>(vectors: &[Vec<Complex<T>>], tau: T) -> Option<Vec<Vec<Complex<T>>>> {
    let scale = vectors.iter().fold(T::zero(), |acc, v| acc.max(norm(v)));
    let mut out: Vec<Vec<Complex<T>>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for e in &out {
            let proj = dot(e, &w).re;
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi = *wi - *ei * proj;
            }
        }
        let nw = norm(&w);
        if nw <= tau * scale || nw == T::zero() {
            return None;
        }
        out.push(w.into_iter().map(|z| z / nw).collect());
    }
    Some(out)
}

/// Determinant of a square complex matrix given by columns (Gaussian elimination, partial pivoting).
pub fn determinant<T: Real>(cols: &[Vec<Complex<T>>]) -> Complex<T> {
    let n = cols.len();
    // Work row-major on a copy.
    let mut a: Vec<Vec<Complex<T>>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    let mut det = Complex::new(T::one(), T::zero());
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(k);
        if a[piv][k].norm() == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det = det * a[k][k];
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let akj = a[k][j];
                a[i][j] = a[i][j] - f * akj;
            }
        }
    }
    det
}

/// Least-squares coefficients `x ∈ ℝᵈ` with `Σ x_j cols_j ≈ target`, real combination of complex columns.
pub fn real_least_squares<T: Real>(cols: &[Vec<Complex<T>>], target: &[Complex<T>]) -> Vec<T> {
    // Normal equations on the realified system; d is tiny.
    let d = cols.len();
    let g: Vec<Vec<T>> = (0..d).map(|i| (0..d).map(|j| dot(&cols[i], &cols[j]).re).collect()).collect();
    let rhs: Vec<T> = (0..d).map(|i| dot(&cols[i], target).re).collect();
    solve_real(g, rhs)
}

/// Solves a small dense real system; singular pivots yield zeros.
pub fn solve_real<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Vec<T> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(k);
        a.swap(piv, k);
        b.swap(piv, k);
        if a[k][k].abs() <= T::min_positive_value() {
            continue;
        }
        for i in (k + 1)..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let akj = a[k][j];
                a[i][j] = a[i][j] - f * akj;
            }
            let bk = b[k];
            b[i] = b[i] - f * bk;
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        if a[k][k].abs() <= T::min_positive_value() {
            continue;
        }
        let s = ((k + 1)..n).fold(b[k], |acc, j| acc - a[k][j] * x[j]);
        x[k] = s / a[k][k];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn collinear_columns_have_rank_one() {
        let a = vec![vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 2.0), c(0.0, 2.0)]];
        assert_eq!(complex_rank(&a, 1e-7, 1e-300), 1);
        // Over ℝ the same pair is independent.
        assert_eq!(real_rank(&a, 1e-7, 1e-300), 2);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let a = vec![vec![c(0.0, 0.0); 3]; 2];
        assert_eq!(complex_rank(&a, 1e-7, 1e-300), 0);
    }

    #[test]
    fn determinant_of_totally_real_frame() {
        // {(1,1),(i,−i)} → −i − i = −2i.
        let d = determinant(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 1.0), c(0.0, -1.0)]]);
        assert!((d - c(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn null_vector_of_rank_deficient_matrix() {
        let a = ColMatrix::from_columns(2, vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        let s = svd(&a);
        assert!(s.sigma[1] < 1e-14);
        let nv = &s.v[1];
        // a·nv ≈ 0
        let r0 = a.cols[0][0] * nv[0] + a.cols[1][0] * nv[1];
        assert!(r0.norm() < 1e-14);
    }

    #[test]
    fn orthonormalize_rejects_dependent_set() {
        let v = vec![vec![c(1.0, 0.0)], vec![c(2.0, 0.0)]];
        assert!(orthonormalize_real(&v, 1e-9).is_none());
        let w = vec![vec![c(1.0, 0.0)], vec![c(0.0, 3.0)]];
        let e = orthonormalize_real(&w, 1e-9).unwrap();
        assert!((e[1][0] - c(0.0, 1.0)).norm() < 1e-15);
    }
}
