//! Univariate polynomials with exact coefficients, used for Hilbert
//! polynomials and their reduced forms.
//!
//! Coefficients are stored lowest degree first with trailing zeros trimmed, so
//! the zero polynomial has no coefficients and no degree. Orderings follow the
//! Gieseker convention: `p > q` iff `p(x) > q(x)` for all large `x`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};


use crate::error::{Error, Result};
use crate::scalar::{factorial, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// Integer coefficients, lowest degree first.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_int(&self, x: i64) -> T {
        self.eval(&T::from_i64(x))
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// Takes integer values at every integer.
    ///
    /// A polynomial of degree `d` is integer-valued iff it is integral at
    /// `0, 1, …, d`.
    pub fn is_integer_valued(&self) -> bool {
        match self.degree() {
            None => true,
            Some(d) => (0..=d as i64).all(|k| self.eval_int(k).is_integer()),
        }
    }

    /// Smallest `N ≥ 0` such that `|self(x)| > 0` with the sign of the leading
    /// coefficient for every real `x > N` (Cauchy's root bound).
    pub fn sign_threshold(&self) -> T {
        let Some(d) = self.degree() else {
            return T::zero();
        };
        let lead = self.leading().abs();
        let m = (0..d)
            .map(|k| self.coeff(k).abs() / lead.clone())
            .max()
            .unwrap_or_else(T::zero);
        T::one() + m
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let unit = mag.is_one();
            match k {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{mag}x")?,
                _ if unit => write!(f, "x^{k}")?,
                _ => write!(f, "{mag}x^{k}")?,
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<'a, T: Scalar> Sum<&'a Polynomial<T>> for Polynomial<T> {
    fn sum<I: Iterator<Item = &'a Polynomial<T>>>(iter: I) -> Self {
        iter.fold(Polynomial::zero(), |acc, p| &acc + p)
    }
}

/// Compares coefficient vectors from the top degree down, padding with zeros.
///
/// Equivalent to the eventual ordering of `p(x)` and `q(x)` as `x → ∞`.
pub fn lex_compare<T: Scalar>(p: &Polynomial<T>, q: &Polynomial<T>) -> Ordering {
    let n = p.coeffs.len().max(q.coeffs.len());
    for k in (0..n).rev() {
        match p.coeff(k).cmp(&q.coeff(k)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// `e! · a_e`, the multiplicity of a sheaf with Hilbert polynomial `p` of
/// dimension `e`.
pub fn multiplicity<T: Scalar>(p: &Polynomial<T>, e: usize) -> Result<T> {
    if p.degree() != Some(e) {
        return Err(Error::Degree {
            expected: e.to_string(),
            found: degree_label(p),
        });
    }
    Ok(factorial::<T>(e) * p.leading())
}

/// `p / multiplicity(p, e)`; its leading coefficient is `1/e!`.
pub fn reduced_hp<T: Scalar>(p: &Polynomial<T>, e: usize) -> Result<Polynomial<T>> {
    let r = multiplicity(p, e)?;
    if r.is_zero() {
        return Err(Error::Degenerate("zero multiplicity".into()));
    }
    Ok(p.scale(&(T::one() / r)))
}

/// Horner evaluation.
pub fn evaluate<T: Scalar>(p: &Polynomial<T>, x: &T) -> T {
    p.eval(x)
}

pub(crate) fn degree_label<T: Scalar>(p: &Polynomial<T>) -> String {
    p.degree()
        .map_or_else(|| "-inf".to_string(), |d| d.to_string())
}

/// Orders `a` against `b` by reduced Hilbert polynomial without dividing:
/// compares `a · r(b)` with `b · r(a)`.
pub fn compare_reduced<T: Scalar>(
    a: &Polynomial<T>,
    b: &Polynomial<T>,
    e: usize,
) -> Result<Ordering> {
    let ra = multiplicity(a, e)?;
    let rb = multiplicity(b, e)?;
    Ok(lex_compare(&a.scale(&rb), &b.scale(&ra)))
}
