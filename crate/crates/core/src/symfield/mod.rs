//! Polynomial vector fields on R^n with exact rational coefficients.
//!
//! A field `X = Σ_j a_j(x) ∂_{x_j}` is stored as `n` sparse polynomials. The
//! Lie bracket, weighted-degree decomposition and dilation pushforward are all
//! exact; floating point only appears in [`PolyVectorField::evaluate`] and the
//! [`compiled`] fast evaluators used by the integrators.

pub mod compiled;
pub mod poly;
pub mod text;

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
pub use poly::{rat, rat_int, Monomial, Polynomial, Rational};

/// Dilation weights `(ω_1, ..., ω_n)`: positive, nondecreasing, starting at 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightVector(Vec<u32>);

impl WeightVector {
    pub fn new(weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Argument("empty weight vector".into()));
        }
        if weights[0] != 1 {
            return Err(Error::Argument(format!(
                "first weight must be 1, got {}",
                weights[0]
            )));
        }
        if weights.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument(format!(
                "weights must be nondecreasing: {weights:?}"
            )));
        }
        Ok(WeightVector(weights))
    }

    /// Weights `ω_j = min{i : j <= n_i}` of a growth vector `(n_1, ..., n_r)`.
    pub fn from_growth(growth: &[usize]) -> Result<Self> {
        let mut w = Vec::new();
        let mut prev = 0;
        for (i, &ni) in growth.iter().enumerate() {
            if ni < prev {
                return Err(Error::Argument(format!("growth vector decreases: {growth:?}")));
            }
            for _ in prev..ni {
                w.push(i as u32 + 1);
            }
            prev = ni;
        }
        WeightVector::new(w)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Homogeneous dimension `Σ ω_j`.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// Vector field with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    dim: usize,
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::Argument("vector field needs at least one component".into()));
        }
        for c in &components {
            check_dim(dim, c.dim())?;
        }
        Ok(PolyVectorField { dim, components })
    }

    pub fn zero(dim: usize) -> Self {
        PolyVectorField {
            dim,
            components: vec![Polynomial::zero(dim); dim],
        }
    }

    /// The coordinate field `∂_{x_index}`.
    pub fn coordinate(dim: usize, index: usize) -> Self {
        Self::monomial(dim, index, vec![0; dim], Rational::one())
    }

    /// `coeff * x^exponents * ∂_{x_component}`.
    pub fn monomial(dim: usize, component: usize, exponents: Vec<u32>, coeff: Rational) -> Self {
        let mut f = PolyVectorField::zero(dim);
        f.components[component] = Polynomial::monomial(dim, Monomial(exponents), coeff);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Polynomial {
        &self.components[j]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add(&self, other: &PolyVectorField) -> Result<PolyVectorField> {
        check_dim(self.dim, other.dim)?;
        Ok(PolyVectorField {
            dim: self.dim,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &PolyVectorField) -> Result<PolyVectorField> {
        check_dim(self.dim, other.dim)?;
        Ok(PolyVectorField {
            dim: self.dim,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &Rational) -> PolyVectorField {
        PolyVectorField {
            dim: self.dim,
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> PolyVectorField {
        self.scale(&-Rational::one())
    }

    /// Directional derivative `X(f) = Σ_k X_k ∂_k f` of a polynomial.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero(self.dim);
        for (k, xk) in self.components.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            let d = f.derivative(k);
            if !d.is_zero() {
                acc = &acc + &(xk * &d);
            }
        }
        acc
    }

    /// Float evaluation of the component vector at `p`.
    pub fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, p.len())?;
        Ok(self.components.iter().map(|c| c.eval(p)).collect())
    }

    pub fn evaluate_exact(&self, p: &[Rational]) -> Result<Vec<Rational>> {
        check_dim(self.dim, p.len())?;
        Ok(self.components.iter().map(|c| c.eval_exact(p)).collect())
    }

    /// Split into the weighted-degree −1 part and the remainder.
    ///
    /// The monomial `x^a ∂_{x_j}` has weighted degree `<a, w> − w_j`.
    pub fn weighted_split(&self, w: &WeightVector) -> Result<(PolyVectorField, PolyVectorField)> {
        check_dim(self.dim, w.dim())?;
        let ws = w.as_slice();
        let mut homogeneous = Vec::with_capacity(self.dim);
        let mut remainder = Vec::with_capacity(self.dim);
        for (j, comp) in self.components.iter().enumerate() {
            for (m, _) in comp.terms() {
                let degree = m.weighted_degree(ws) - ws[j] as i64;
                if degree < -1 {
                    return Err(Error::NotPrivileged {
                        component: j,
                        degree,
                    });
                }
            }
            let (h, r) = comp.partition(|m| m.weighted_degree(ws) - ws[j] as i64 == -1);
            homogeneous.push(h);
            remainder.push(r);
        }
        Ok((
            PolyVectorField {
                dim: self.dim,
                components: homogeneous,
            },
            PolyVectorField {
                dim: self.dim,
                components: remainder,
            },
        ))
    }

    /// Weighted degrees of all monomial terms, as `(component, degree)` pairs.
    pub fn weighted_degrees(&self, w: &WeightVector) -> Vec<(usize, i64)> {
        let ws = w.as_slice();
        self.components
            .iter()
            .enumerate()
            .flat_map(|(j, c)| {
                c.terms()
                    .map(move |(m, _)| (j, m.weighted_degree(ws) - ws[j] as i64))
            })
            .collect()
    }

    /// Pushforward `(δ_λ)_* X` under `δ_λ(x) = (λ^{ω_1} x_1, ..., λ^{ω_n} x_n)`,
    /// computed exactly for rational `λ`.
    pub fn pushforward_by_dilation(&self, w: &WeightVector, lambda: &Rational) -> Result<PolyVectorField> {
        check_dim(self.dim, w.dim())?;
        if lambda <= &Rational::zero() {
            return Err(Error::Argument("dilation factor must be positive".into()));
        }
        let ws = w.as_slice();
        let inv = lambda.recip();
        let substitution: Vec<Rational> = ws
            .iter()
            .map(|&wj| num_traits::pow(inv.clone(), wj as usize))
            .collect();
        let components = self
            .components
            .iter()
            .zip(ws)
            .map(|(c, &wj)| {
                c.scale_variables(&substitution)
                    .scale(&num_traits::pow(lambda.clone(), wj as usize))
            })
            .collect();
        Ok(PolyVectorField {
            dim: self.dim,
            components,
        })
    }
}

/// `[X, Y] = DY·X − DX·Y`, exact.
pub fn lie_bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField> {
    check_dim(x.dim, y.dim)?;
    let components = (0..x.dim)
        .map(|j| &x.apply(&y.components[j]) - &y.apply(&x.components[j]))
        .collect();
    Ok(PolyVectorField {
        dim: x.dim,
        components,
    })
}

/// Float evaluation of a field at a point.
pub fn evaluate(x: &PolyVectorField, p: &[f64]) -> Result<Vec<f64>> {
    x.evaluate(p)
}

/// Human-readable form such as `x1^2*d2 + d1`; not the serialization format.
impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, comp) in self.components.iter().enumerate() {
            if comp.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})*d{}", text::format_polynomial(comp), j + 1)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grushin_x2() -> PolyVectorField {
        PolyVectorField::monomial(2, 1, vec![1, 0], rat_int(1))
    }

    #[test]
    fn bracket_of_dx_and_x_dy_is_dy() {
        let b = lie_bracket(&PolyVectorField::coordinate(2, 0), &grushin_x2()).unwrap();
        assert_eq!(b, PolyVectorField::coordinate(2, 1));
    }

    #[test]
    fn self_bracket_vanishes() {
        let x = PolyVectorField::coordinate(2, 0)
            .add(&PolyVectorField::monomial(2, 1, vec![2, 0], rat_int(1)))
            .unwrap();
        assert!(lie_bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_bracket() {
        let x1 = PolyVectorField::coordinate(3, 0);
        let x2 = PolyVectorField::coordinate(3, 1)
            .add(&PolyVectorField::monomial(3, 2, vec![1, 0, 0], rat_int(1)))
            .unwrap();
        assert_eq!(lie_bracket(&x1, &x2).unwrap(), PolyVectorField::coordinate(3, 2));
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let err = lie_bracket(&PolyVectorField::coordinate(2, 0), &PolyVectorField::coordinate(3, 0));
        assert!(matches!(err, Err(Error::Dimension { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let x = grushin_x2();
        assert_eq!(x.evaluate(&[2.0, 0.0]).unwrap(), vec![0.0, 2.0]);
        assert_eq!(x.evaluate(&[0.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        let pert = x.add(&PolyVectorField::monomial(2, 1, vec![2, 0], rat_int(1))).unwrap();
        assert_eq!(pert.evaluate(&[1.0, 0.0]).unwrap(), vec![0.0, 2.0]);
        assert!(x.evaluate(&[1.0]).is_err());
    }

    #[test]
    fn split_perturbed_grushin() {
        let w = WeightVector::new(vec![1, 2]).unwrap();
        let x2sq = PolyVectorField::monomial(2, 1, vec![2, 0], rat_int(1));
        let pert = grushin_x2().add(&x2sq).unwrap();
        let (h, r) = pert.weighted_split(&w).unwrap();
        assert_eq!(h, grushin_x2());
        assert_eq!(r, x2sq);
        let (h, r) = PolyVectorField::coordinate(2, 0).weighted_split(&w).unwrap();
        assert_eq!(h, PolyVectorField::coordinate(2, 0));
        assert!(r.is_zero());
    }

    #[test]
    fn split_martinet_is_homogeneous() {
        // degrees by hand: ∂y -> 0 - 1 = -1; x^2 ∂z -> 2 - 3 = -1
        let w = WeightVector::new(vec![1, 1, 3]).unwrap();
        let x2 = PolyVectorField::coordinate(3, 1)
            .add(&PolyVectorField::monomial(3, 2, vec![2, 0, 0], rat_int(1)))
            .unwrap();
        assert_eq!(x2.weighted_degrees(&w), vec![(1, -1), (2, -1)]);
        let (h, r) = x2.weighted_split(&w).unwrap();
        assert_eq!(h, x2);
        assert!(r.is_zero());
    }

    #[test]
    fn split_rejects_non_privileged() {
        // y ∂x with weights (1,2): degree 2 - 1 = 1 fine; ∂y has degree -2 only if ω_y = 2 and
        // coefficient is constant: -2 < -1.
        let w = WeightVector::new(vec![1, 2]).unwrap();
        let bad = PolyVectorField::coordinate(2, 1);
        assert!(matches!(
            bad.weighted_split(&w),
            Err(Error::NotPrivileged { component: 1, degree: -2 })
        ));
    }

    #[test]
    fn weights_from_growth() {
        assert_eq!(WeightVector::from_growth(&[2, 2, 3]).unwrap().as_slice(), &[1, 1, 3]);
        assert_eq!(WeightVector::from_growth(&[1, 2]).unwrap().as_slice(), &[1, 2]);
        assert!(WeightVector::new(vec![2, 2]).is_err());
        assert!(WeightVector::new(vec![1, 3, 2]).is_err());
    }

    #[test]
    fn dilation_pushforward_scales_homogeneous_part() {
        let w = WeightVector::new(vec![1, 1, 3]).unwrap();
        let x2 = PolyVectorField::coordinate(3, 1)
            .add(&PolyVectorField::monomial(3, 2, vec![2, 0, 0], rat_int(1)))
            .unwrap();
        for lambda in [rat_int(2), rat(3, 7)] {
            let pushed = x2.pushforward_by_dilation(&w, &lambda).unwrap();
            assert_eq!(pushed, x2.scale(&lambda));
        }
    }
}
