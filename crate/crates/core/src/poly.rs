//! Sparse polynomials in several complex variables.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T> {
    pub coefficient: Complex<T>,
    pub exponents: Vec<u32>,
}

/// `P(z) = Σ c_α z^α` over `nvars` complex variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    terms: Vec<Monomial<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(nvars: usize, terms: Vec<Monomial<T>>) -> Result<Self> {
        if let Some(bad) = terms.iter().find(|m| m.exponents.len() != nvars) {
            return Err(Error::Dimension(format!(
                "monomial has {} exponents, polynomial has {nvars} variables",
                bad.exponents.len()
            )));
        }
        Ok(Self { nvars, terms })
    }

    /// Convenience constructor from `(coefficient, exponents)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(Complex<T>, &[u32])]) -> Result<Self> {
        Self::new(
            nvars,
            terms
                .iter()
                .map(|(c, e)| Monomial { coefficient: *c, exponents: e.to_vec() })
                .collect(),
        )
    }

    /// Univariate polynomial with coefficients `c_0, c_1, …`.
    pub fn univariate(coefficients: &[Complex<T>]) -> Self {
        let terms = coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| Monomial { coefficient: *c, exponents: vec![k as u32] })
            .collect();
        Self { nvars: 1, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn eval(&self, z: &[Complex<T>]) -> Complex<T> {
        self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, m| {
            acc + m.coefficient * monomial(z, &m.exponents)
        })
    }

    /// `(∂P/∂z_1, …, ∂P/∂z_n)` at `z`.
    pub fn gradient(&self, z: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.nvars)
            .map(|i| {
                self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, m| {
                    let e = m.exponents[i];
                    if e == 0 {
                        return acc;
                    }
                    let mut ex = m.exponents.clone();
                    ex[i] -= 1;
                    acc + m.coefficient * T::lit(e as f64) * monomial(z, &ex)
                })
            })
            .collect()
    }
}

fn monomial<T: Real>(z: &[Complex<T>], exponents: &[u32]) -> Complex<T> {
    z.iter()
        .zip(exponents)
        .fold(Complex::new(T::one(), T::zero()), |acc, (zi, &e)| acc * zi.powu(e))
}
