use num_complex::Complex;
use rayon::prelude::*;

use super::JacobianField;
use crate::argument::{locate_zeros, zero_count, Disc, Zero};
use crate::error::Result;
use crate::scalar::Real;

/// Strands closer than this are the same point of the zero set.
const COINCIDE: f64 = 1e-6;

/// Zeros of `J(·, t)` on one lattice fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberZeros<T> {
    pub t_index: usize,
    /// `J(·, t) ≡ 0`: the fiber lies in the singular part and is skipped.
    pub singular: bool,
    pub zeros: Vec<Zero<T>>,
    /// Weighted zero count from the argument principle.
    pub count: Option<T>,
    /// Located multiplicities sum to `count`.
    pub conserved: bool,
}

/// A branch `t ↦ ζ_j(t)` along one lattice loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain<T> {
    pub loop_index: usize,
    pub t_indices: Vec<usize>,
    pub locations: Vec<Complex<T>>,
    pub multiplicity: usize,
    /// Lattice `t` indices where another chain meets this one.
    pub merges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroTracking<T> {
    pub singular_fibers: Vec<usize>,
    pub fibers: Vec<FiberZeros<T>>,
    pub chains: Vec<Chain<T>>,
    /// Per loop: the strand permutation after one full turn, when the loop is
    /// closed and free of singular fibers and count changes.
    pub monodromy: Vec<Option<Vec<usize>>>,
    pub conserved: bool,
}

/// Locates the zeros of every fiber and stitches them into chains along the loops.
pub fn track_zeros<T: Real>(jf: &JacobianField<T>) -> Result<ZeroTracking<T>> {
    let fibers: Vec<Result<FiberZeros<T>>> = (0..jf.t_count())
        .into_par_iter()
        .map(|ti| {
            if jf.is_singular_fiber(ti) {
                return Ok(FiberZeros { t_index: ti, singular: true, zeros: Vec::new(), count: None, conserved: true });
            }
            let g = jf.fiber(ti)?;
            let zeros = locate_zeros(&g, Disc::unit())?.zeros;
            let count = zero_count(&g, Complex::new(T::zero(), T::zero()))?;
            let located = zeros.iter().fold(T::zero(), |acc, z| {
                let m = T::from_count(z.multiplicity);
                acc + if z.on_boundary { m / T::lit(2.0) } else { m }
            });
            let conserved = (located - count).abs() < T::lit(1e-6);
            Ok(FiberZeros { t_index: ti, singular: false, zeros, count: Some(count), conserved })
        })
        .collect();
    let fibers: Vec<FiberZeros<T>> = fibers.into_iter().collect::<Result<_>>()?;
    let singular_fibers = fibers.iter().filter(|f| f.singular).map(|f| f.t_index).collect();
    let conserved = fibers.iter().all(|f| f.conserved);
    let mut chains = Vec::new();
    let mut monodromy = Vec::new();
    for (li, (indices, periodic)) in jf.loops.iter().enumerate() {
        let (c, m) = stitch(&fibers, li, indices, *periodic);
        chains.extend(c);
        monodromy.push(m);
    }
    Ok(ZeroTracking { singular_fibers, fibers, chains, monodromy, conserved })
}

fn strands<T: Real>(f: &FiberZeros<T>) -> Vec<Complex<T>> {
    f.zeros.iter().flat_map(|z| std::iter::repeat_n(z.location, z.multiplicity)).collect()
}

/// Greedy nearest-first matching: `out[i]` is the index in `next` paired with `prev[i]`.
fn match_nearest<T: Real>(prev: &[Complex<T>], next: &[Complex<T>]) -> Vec<usize> {
    let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(prev.len() * next.len());
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![usize::MAX; prev.len()];
    let mut used = vec![false; next.len()];
    for (_, i, j) in pairs {
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
        }
    }
    out
}

type Segment<T> = (Vec<usize>, Vec<Vec<Complex<T>>>);

fn stitch<T: Real>(
    fibers: &[FiberZeros<T>],
    loop_index: usize,
    indices: &[usize],
    periodic: bool,
) -> (Vec<Chain<T>>, Option<Vec<usize>>) {
    // Segments of constant strand count; each strand is a path of locations.
    let mut segments: Vec<Segment<T>> = Vec::new();
    let mut current: Option<Segment<T>> = None;
    let mut broken = false;
    for &ti in indices {
        let f = &fibers[ti];
        if f.singular {
            broken = true;
            continue;
        }
        let next = strands(f);
        match current.as_mut() {
            Some((ts, paths)) if paths.len() == next.len() => {
                let prev: Vec<Complex<T>> = paths.iter().map(|p| *p.last().expect("nonempty path")).collect();
                let m = match_nearest(&prev, &next);
                for (p, &j) in paths.iter_mut().zip(&m) {
                    p.push(next[j]);
                }
                ts.push(ti);
            }
            _ => {
                if let Some(seg) = current.take() {
                    segments.push(seg);
                    broken = true;
                }
                current = Some((vec![ti], next.into_iter().map(|z| vec![z]).collect()));
            }
        }
    }
    if let Some(seg) = current.take() {
        segments.push(seg);
    }
    let monodromy = match (&segments[..], periodic && !broken) {
        ([(_, paths)], true) if !paths.is_empty() => {
            let first: Vec<Complex<T>> = paths.iter().map(|p| p[0]).collect();
            let last: Vec<Complex<T>> = paths.iter().map(|p| *p.last().expect("nonempty path")).collect();
            Some(match_nearest(&last, &first))
        }
        _ => None,
    };
    let mut chains = Vec::new();
    for (ts, paths) in segments {
        let tol = T::lit(COINCIDE);
        let same = |a: &[Complex<T>], b: &[Complex<T>]| a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol);
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..paths.len() {
            match groups.iter_mut().find(|g| same(&paths[g[0]], &paths[i])) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        for (gi, g) in groups.iter().enumerate() {
            let path = &paths[g[0]];
            let merges = (0..ts.len())
                .filter(|&s| {
                    groups
                        .iter()
                        .enumerate()
                        .any(|(hi, h)| hi != gi && (paths[h[0]][s] - path[s]).norm() < tol)
                })
                .map(|s| ts[s])
                .collect();
            chains.push(Chain {
                loop_index,
                t_indices: ts.clone(),
                locations: path.clone(),
                multiplicity: g.len(),
                merges,
            });
        }
    }
    (chains, monodromy)
}

#[cfg(test)]
mod tests {
    use super::super::tests::example1;
    use super::super::{jacobian_field, ParamManifold};
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn example1_single_chain_with_singular_fibers() {
        let f = example1(16);
        let jf = jacobian_field(&f, None, None).unwrap();
        let tr = track_zeros(&jf).unwrap();
        assert_eq!(tr.singular_fibers, vec![0, 8]);
        assert!(tr.conserved);
        assert_eq!(tr.chains.len(), 1);
        let c = &tr.chains[0];
        assert_eq!((c.multiplicity, c.t_indices.len()), (1, 14));
        assert!(c.locations.iter().all(|z| z.norm() < 1e-8));
        assert_eq!(tr.monodromy, vec![None]);
    }

    #[test]
    fn square_root_branches_exchange() {
        let m = ParamManifold::<f64>::circle(32).unwrap();
        let jf = JacobianField::from_fn(&m, 64, |z: C, t: &[C]| z * z - t[0] / 2.0).unwrap();
        let tr = track_zeros(&jf).unwrap();
        assert!(tr.conserved && tr.singular_fibers.is_empty());
        assert_eq!(tr.chains.len(), 2);
        assert_eq!(tr.monodromy, vec![Some(vec![1, 0])]);
        for c in &tr.chains {
            for (&ti, z) in c.t_indices.iter().zip(&c.locations) {
                let t = m.coords(ti)[0];
                assert!((z * z - t / 2.0).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn double_zero_is_one_chain_of_multiplicity_two() {
        let m = ParamManifold::<f64>::circle(8).unwrap();
        let jf = JacobianField::from_fn(&m, 64, |z: C, _: &[C]| z * z).unwrap();
        let tr = track_zeros(&jf).unwrap();
        assert_eq!(tr.chains.len(), 1);
        assert_eq!(tr.chains[0].multiplicity, 2);
        assert_eq!(tr.monodromy, vec![Some(vec![0, 1])]);
    }

    #[test]
    fn merging_chains_are_flagged() {
        // ζ(ζ − a(t)) with a = 0.5·(1 + cos θ)/2: the zeros meet where cos θ = −1.
        let m = ParamManifold::<f64>::circle(8).unwrap();
        let jf = JacobianField::from_fn(&m, 64, |z: C, t: &[C]| z * (z - (1.0 + t[0].re) * 0.25)).unwrap();
        let tr = track_zeros(&jf).unwrap();
        assert!(tr.conserved);
        let merged: Vec<_> = tr.chains.iter().filter(|c| !c.merges.is_empty()).collect();
        assert!(!merged.is_empty());
        assert!(merged.iter().all(|c| c.merges.contains(&4)));
    }
}
