//! Allocation-free f64 evaluation of polynomial frames and their Jacobians.

use num_traits::ToPrimitive;

use super::poly::Polynomial;
use super::PolyVectorField;

#[derive(Clone, Debug)]
struct Term {
    coeff: f64,
    start: u32,
    end: u32,
}

/// A polynomial flattened into float coefficients and (variable, exponent) factors.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<Term>,
    factors: Vec<(u16, u16)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let mut terms = Vec::with_capacity(p.num_terms());
        let mut factors = Vec::new();
        for (m, c) in p.terms() {
            let start = factors.len() as u32;
            for (j, &a) in m.0.iter().enumerate() {
                if a > 0 {
                    factors.push((j as u16, a as u16));
                }
            }
            terms.push(Term {
                coeff: c.to_f64().unwrap_or(f64::NAN),
                start,
                end: factors.len() as u32,
            });
        }
        CompiledPoly { terms, factors }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coeff;
            for &(j, a) in &self.factors[t.start as usize..t.end as usize] {
                let xj = x[j as usize];
                v *= match a {
                    1 => xj,
                    2 => xj * xj,
                    _ => xj.powi(a as i32),
                };
            }
            acc += v;
        }
        acc
    }
}

/// A family of `m` polynomial fields on R^n with precompiled Jacobians.
///
/// Field values are laid out generator-major: `out[i * n + j]` is the `j`-th
/// component of `X_i`. Jacobians use `out[(i * n + j) * n + k] = ∂_k X_i^j`.
#[derive(Clone, Debug)]
pub struct CompiledFrame {
    n: usize,
    m: usize,
    comps: Vec<CompiledPoly>,
    jac: Vec<Option<CompiledPoly>>,
}

impl CompiledFrame {
    pub fn new(fields: &[PolyVectorField]) -> Self {
        let m = fields.len();
        let n = fields.first().map_or(0, PolyVectorField::dim);
        let mut comps = Vec::with_capacity(n * m);
        let mut jac = Vec::with_capacity(n * n * m);
        for f in fields {
            for p in f.components() {
                comps.push(CompiledPoly::new(p));
                for k in 0..n {
                    let d = p.derivative(k);
                    jac.push(if d.is_zero() { None } else { Some(CompiledPoly::new(&d)) });
                }
            }
        }
        CompiledFrame { n, m, comps, jac }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.comps) {
            *o = c.eval(x);
        }
    }

    /// `out = Σ_i u_i X_i(x)`.
    #[inline]
    pub fn combine(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let n = self.n;
        out[..n].iter_mut().for_each(|o| *o = 0.0);
        for (i, &ui) in u.iter().enumerate().take(self.m) {
            if ui == 0.0 {
                continue;
            }
            for j in 0..n {
                let c = &self.comps[i * n + j];
                if !c.is_zero() {
                    out[j] += ui * c.eval(x);
                }
            }
        }
    }

    #[inline]
    pub fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        for (o, d) in out.iter_mut().zip(&self.jac) {
            *o = d.as_ref().map_or(0.0, |p| p.eval(x));
        }
    }

    /// Jacobian of `x ↦ Σ_i u_i X_i(x)`, row-major `n × n`.
    #[inline]
    pub fn combine_jacobian(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        let n = self.n;
        out[..n * n].iter_mut().for_each(|o| *o = 0.0);
        for (i, &ui) in u.iter().enumerate().take(self.m) {
            if ui == 0.0 {
                continue;
            }
            for jk in 0..n * n {
                if let Some(p) = &self.jac[i * n * n + jk] {
                    out[jk] += ui * p.eval(x);
                }
            }
        }
    }
}
