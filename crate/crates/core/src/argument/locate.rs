use std::cell::Cell;

use num_complex::Complex;
use rayon::prelude::*;

use super::count::{arg_change, polish};
use super::holomorphic::HolomorphicBoundary;
use super::round_to_integer;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cells smaller than this are not subdivided further.
pub const LOCATE_CELL_DIAMETER: f64 = 1e-6;

/// A cell holding a single zero is handed to the polisher once it is this small.
const POLISH_DIAMETER: f64 = 1e-2;

/// Split positions tried in turn when a split line passes through a zero.
const SPLITS: [f64; 3] = [0.501_414_213_562, 0.497_320_508_075, 0.506_180_339_887];

/// Upper bound on cells alive at once before the function is declared degenerate.
const MAX_CELLS: usize = 4096;

/// Closed disc `|ζ − center| ≤ radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc<T> {
    pub center: Complex<T>,
    pub radius: T,
}

impl<T: Real> Disc<T> {
    pub fn unit() -> Self {
        Self { center: Complex::new(T::zero(), T::zero()), radius: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero<T> {
    pub location: Complex<T>,
    pub multiplicity: usize,
    pub on_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroList<T> {
    pub zeros: Vec<Zero<T>>,
}

impl<T: Real> ZeroList<T> {
    /// `Σ multiplicity`, with zeros on the boundary weighted ½.
    pub fn weighted_count(&self) -> T {
        self.zeros.iter().fold(T::zero(), |acc, z| {
            let m = T::from_count(z.multiplicity);
            acc + if z.on_boundary { m / T::lit(2.0) } else { m }
        })
    }

    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct Square<T> {
    lo: Complex<T>,
    hi: Complex<T>,
}

impl<T: Real> Square<T> {
    fn diameter(&self) -> T {
        (self.hi - self.lo).norm()
    }

    fn center(&self) -> Complex<T> {
        (self.lo + self.hi) / T::lit(2.0)
    }

    fn contains(&self, z: Complex<T>, slack: T) -> bool {
        let pad = (self.hi.re - self.lo.re) * slack;
        z.re >= self.lo.re - pad && z.re <= self.hi.re + pad && z.im >= self.lo.im - pad && z.im <= self.hi.im + pad
    }

    fn split(&self, frac: T) -> [Square<T>; 4] {
        let mx = self.lo.re + (self.hi.re - self.lo.re) * frac;
        let my = self.lo.im + (self.hi.im - self.lo.im) * frac;
        let c = |x0, y0, x1, y1| Square { lo: Complex::new(x0, y0), hi: Complex::new(x1, y1) };
        [
            c(self.lo.re, self.lo.im, mx, my),
            c(mx, self.lo.im, self.hi.re, my),
            c(self.lo.re, my, mx, self.hi.im),
            c(mx, my, self.hi.re, self.hi.im),
        ]
    }
}

struct Located<T> {
    location: Complex<T>,
    multiplicity: usize,
}

/// Zeros of `φ` in the closed sub-disc `region`, with multiplicities.
///
/// The bounding square of the region is quadrisected; each cell's zero count is
/// the winding of `φ` along the cell boundary, and cells with zeros are refined
/// until they are small enough to polish.
pub fn locate_zeros<T: Real>(phi: &HolomorphicBoundary<T>, region: Disc<T>) -> Result<ZeroList<T>> {
    if phi.is_identically_zero() {
        return Err(Error::IdenticallyZeroSuspect);
    }
    let noise = T::lit(1e3) * T::epsilon() * phi.taylor().iter().fold(T::zero(), |a, c| a + c.norm());
    let h = region.radius * T::lit(1.02) + T::lit(1e-3);
    let shift = Complex::new(T::lit(1.3e-4), T::lit(0.7e-4)) * region.radius;
    let c = region.center + shift;
    let root = Square { lo: c - Complex::new(h, h), hi: c + Complex::new(h, h) };
    let (count, _) = cell_count(phi, &root)?;
    let mut found = Vec::new();
    let mut live = vec![(root, count)];
    while !live.is_empty() {
        if live.len() > MAX_CELLS {
            return Err(Error::IdenticallyZeroSuspect);
        }
        let steps: Vec<Result<(Vec<Located<T>>, Vec<(Square<T>, usize)>)>> =
            live.par_iter().map(|&(cell, n)| refine(phi, cell, n, noise)).collect();
        live = Vec::new();
        for s in steps {
            let (done, more) = s?;
            found.extend(done);
            live.extend(more);
        }
    }
    let merged = merge(found, T::lit(LOCATE_CELL_DIAMETER));
    let tol = T::lit(1e-8);
    let zeros = merged
        .into_iter()
        .filter_map(|z| {
            let d = (z.location - region.center).norm();
            if d > region.radius + tol {
                return None;
            }
            let on_boundary = (d - region.radius).abs() <= tol;
            let location = if on_boundary && d > T::zero() {
                region.center + (z.location - region.center) * (region.radius / d)
            } else {
                z.location
            };
            Some(Zero { location, multiplicity: z.multiplicity, on_boundary })
        })
        .collect();
    Ok(ZeroList { zeros })
}

type Refined<T> = (Vec<Located<T>>, Vec<(Square<T>, usize)>);

fn refine<T: Real>(phi: &HolomorphicBoundary<T>, cell: Square<T>, n: usize, noise: T) -> Result<Refined<T>> {
    let diam = cell.diameter();
    if n == 1 && diam < T::lit(POLISH_DIAMETER) {
        if let Some(z) = polish(phi, cell.center()) {
            if cell.contains(z, T::lit(0.1)) {
                return Ok((vec![Located { location: z, multiplicity: 1 }], Vec::new()));
            }
        }
    }
    if diam < T::lit(LOCATE_CELL_DIAMETER) {
        return Ok((vec![finish(phi, &cell, n)], Vec::new()));
    }
    for frac in SPLITS {
        let children = cell.split(T::lit(frac));
        let counts: Vec<Result<(usize, T)>> = children.iter().map(|ch| cell_count(phi, ch)).collect();
        if counts.iter().any(|c| c.is_err()) {
            continue;
        }
        let counts: Vec<(usize, T)> = counts.into_iter().map(|c| c.unwrap_or((0, T::zero()))).collect();
        if counts.iter().map(|c| c.0).sum::<usize>() != n {
            continue;
        }
        let mut done = Vec::new();
        let mut more = Vec::new();
        for (ch, (k, min_abs)) in children.into_iter().zip(counts) {
            if k == 0 {
                continue;
            }
            // Below the rounding floor the count cannot be resolved further.
            if k > 1 && min_abs <= noise {
                done.push(finish(phi, &ch, k));
            } else {
                more.push((ch, k));
            }
        }
        return Ok((done, more));
    }
    Err(Error::IdenticallyZeroSuspect)
}

fn finish<T: Real>(phi: &HolomorphicBoundary<T>, cell: &Square<T>, n: usize) -> Located<T> {
    let location = match polish(phi, cell.center()) {
        Some(z) if cell.contains(z, T::lit(0.5)) => z,
        _ => cell.center(),
    };
    Located { location, multiplicity: n }
}

/// Zeros of `φ` inside the cell (winding along its boundary) and the smallest
/// `|φ|` met on the way.
fn cell_count<T: Real>(phi: &HolomorphicBoundary<T>, cell: &Square<T>) -> Result<(usize, T)> {
    let corners = [
        cell.lo,
        Complex::new(cell.hi.re, cell.lo.im),
        cell.hi,
        Complex::new(cell.lo.re, cell.hi.im),
    ];
    let min_abs = Cell::new(T::infinity());
    let mut total = T::zero();
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let f = |s: T| {
            let v = phi.eval(a + (b - a) * s);
            min_abs.set(min_abs.get().min(v.norm()));
            v
        };
        total = total + arg_change(&f, T::zero(), T::one(), 16)?;
    }
    let k = round_to_integer(total / T::TAU(), 1e-6)?;
    if k < 0 {
        return Err(Error::NotNearInteger { value: k as f64, tolerance: 0.0 });
    }
    Ok((k as usize, min_abs.get()))
}

fn merge<T: Real>(mut found: Vec<Located<T>>, tol: T) -> Vec<Located<T>> {
    found.sort_by(|a, b| {
        (a.location.re, a.location.im)
            .partial_cmp(&(b.location.re, b.location.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<Located<T>> = Vec::new();
    for z in found {
        if let Some(prev) = out.iter_mut().find(|p| (p.location - z.location).norm() < tol) {
            let (m1, m2) = (T::from_count(prev.multiplicity), T::from_count(z.multiplicity));
            prev.location = (prev.location * m1 + z.location * m2) / (m1 + m2);
            prev.multiplicity += z.multiplicity;
        } else {
            out.push(z);
        }
    }
    out
}
