//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rational {
    BigRational::from_integer(BigInt::from(num))
}

/// Exponent multi-index, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn var(dim: usize, index: usize) -> Self {
        let mut e = vec![0; dim];
        e[index] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> i64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&a, &w)| a as i64 * w as i64)
            .sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial on R^dim in canonical sparse form: zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(dim, Monomial::one(dim), c)
    }

    pub fn monomial(dim: usize, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.dim(), dim, "monomial dimension");
        let mut p = Polynomial::zero(dim);
        p.add_term(m, c);
        p
    }

    /// The coordinate function x_index.
    pub fn var(dim: usize, index: usize) -> Self {
        Self::monomial(dim, Monomial::var(dim, index), Rational::one())
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Polynomial::zero(dim);
        for (e, c) in terms {
            p.add_term(Monomial(e), c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        assert_eq!(m.dim(), self.dim, "monomial dimension");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, c) in &self.terms {
            let a = m.0[var];
            if a == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[var] -= 1;
            out.add_term(Monomial(e), c * rat_int(a as i64));
        }
        out
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &a) in x.iter().zip(&m.0) {
                if a > 0 {
                    t *= num_traits::pow(xi.clone(), a as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &a) in x.iter().zip(&m.0) {
                    if a > 0 {
                        t *= xi.powi(a as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitute x_j -> s_j * x_j with rational scalings s_j.
    pub fn scale_variables(&self, s: &[Rational]) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            for (sj, &a) in s.iter().zip(&m.0) {
                coef *= num_traits::pow(sj.clone(), a as usize);
            }
            out.add_term(m.clone(), coef);
        }
        out
    }

    /// Split into terms satisfying `pred` and the rest.
    pub fn partition<F: Fn(&Monomial) -> bool>(&self, pred: F) -> (Polynomial, Polynomial) {
        let mut yes = Polynomial::zero(self.dim);
        let mut no = Polynomial::zero(self.dim);
        for (m, c) in &self.terms {
            if pred(m) {
                yes.terms.insert(m.clone(), c.clone());
            } else {
                no.terms.insert(m.clone(), c.clone());
            }
        }
        (yes, no)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension");
        let mut out = Polynomial::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

pub(crate) fn format_rational(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub(crate) fn abs_rational(c: &Rational) -> Rational {
    c.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_drops_cancelled_terms() {
        let x = Polynomial::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
        assert_eq!(d, Polynomial::zero(2));
    }

    #[test]
    fn grlex_order() {
        let a = Monomial(vec![2, 0]);
        let b = Monomial(vec![0, 3]);
        let c = Monomial(vec![1, 1]);
        assert!(a < b);
        assert!(c < a);
    }

    #[test]
    fn derivative_and_eval() {
        // p = x^2 y + 3/2
        let p = Polynomial::from_terms(2, [(vec![2, 1], rat_int(1)), (vec![0, 0], rat(3, 2))]);
        let dx = p.derivative(0);
        assert_eq!(dx, Polynomial::from_terms(2, [(vec![1, 1], rat_int(2))]));
        assert_eq!(p.eval(&[2.0, 3.0]), 13.5);
        assert_eq!(p.eval_exact(&[rat_int(2), rat_int(3)]), rat(27, 2));
    }
}
