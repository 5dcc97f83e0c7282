//! Ricci tensor of a coordinate metric from finite differences of the metric.

use nalgebra::DMatrix;

use super::WarpingTriple;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct OracleOptions {
    pub step: f64,
    pub richardson: bool,
    /// Reject metrics whose eigenvalue ratio `min |λ| / max |λ|` is below this.
    pub min_rcond: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            step: 3e-2,
            richardson: true,
            min_rcond: 1e-12,
        }
    }
}

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, d) in moves {
        q[i] += d;
    }
    q
}

/// `(∂_k g_ij, ∂_k ∂_l g_ij)` at `p` by central differences with step `h`.
fn derivatives<M>(metric: &M, p: &[f64], h: f64) -> (Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>)
where
    M: Fn(&[f64]) -> DMatrix<f64>,
{
    let n = p.len();
    let g0 = metric(p);
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = vec![vec![DMatrix::zeros(n, n); n]; n];
    for k in 0..n {
        let gp = metric(&shifted(p, &[(k, h)]));
        let gm = metric(&shifted(p, &[(k, -h)]));
        d1.push((&gp - &gm) / (2.0 * h));
        d2[k][k] = (&gp - 2.0 * &g0 + &gm) / (h * h);
    }
    for k in 0..n {
        for l in k + 1..n {
            let pp = metric(&shifted(p, &[(k, h), (l, h)]));
            let pm = metric(&shifted(p, &[(k, h), (l, -h)]));
            let mp = metric(&shifted(p, &[(k, -h), (l, h)]));
            let mm = metric(&shifted(p, &[(k, -h), (l, -h)]));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            d2[k][l] = v.clone();
            d2[l][k] = v;
        }
    }
    (d1, d2)
}

/// Ricci tensor `R_{σν}` of `metric` at `p`.
pub fn curvature_oracle<M>(metric: M, p: &[f64], opts: &OracleOptions) -> Result<DMatrix<f64>>
where
    M: Fn(&[f64]) -> DMatrix<f64>,
{
    let n = p.len();
    let g = metric(p);
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::Dimension { expected: n, got: g.nrows() });
    }
    let eig = g.clone().symmetric_eigen().eigenvalues.abs();
    let rcond = eig.min() / eig.max();
    if !(rcond >= opts.min_rcond) {
        return Err(Error::OracleConditioning(rcond));
    }
    let ginv = g.clone().try_inverse().ok_or(Error::OracleConditioning(rcond))?;
    let h = opts.step;
    let (d1, d2) = if opts.richardson {
        // two Richardson levels on h, h/2, h/4 cancel the h² and h⁴ terms
        let (a1, a2) = derivatives(&metric, p, h);
        let (b1, b2) = derivatives(&metric, p, 0.5 * h);
        let (c1, c2) = derivatives(&metric, p, 0.25 * h);
        let extrap = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>| (64.0 * c - 20.0 * b + a) / 45.0;
        let r1 = (0..n).map(|k| extrap(&a1[k], &b1[k], &c1[k])).collect::<Vec<_>>();
        let r2 = (0..n)
            .map(|k| (0..n).map(|l| extrap(&a2[k][l], &b2[k][l], &c2[k][l])).collect())
            .collect::<Vec<Vec<_>>>();
        (r1, r2)
    } else {
        derivatives(&metric, p, h)
    };
    // T_{λμν} = ∂_μ g_{λν} + ∂_ν g_{λμ} − ∂_λ g_{μν}, and ∂_σ T
    let t = |l: usize, mu: usize, nu: usize| d1[mu][(l, nu)] + d1[nu][(l, mu)] - d1[l][(mu, nu)];
    let dt = |s: usize, l: usize, mu: usize, nu: usize| d2[s][mu][(l, nu)] + d2[s][nu][(l, mu)] - d2[s][l][(mu, nu)];
    let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    let mut gamma = vec![0.0; n * n * n];
    for rho in 0..n {
        for mu in 0..n {
            for nu in 0..n {
                gamma[idx(rho, mu, nu)] = 0.5 * (0..n).map(|l| ginv[(rho, l)] * t(l, mu, nu)).sum::<f64>();
            }
        }
    }
    // ∂_σ g^{-1} = −g^{-1} (∂_σ g) g^{-1}
    let dginv: Vec<DMatrix<f64>> = (0..n).map(|s| -(&ginv * &d1[s] * &ginv)).collect();
    let dgamma = |s: usize, rho: usize, mu: usize, nu: usize| -> f64 {
        0.5 * (0..n)
            .map(|l| dginv[s][(rho, l)] * t(l, mu, nu) + ginv[(rho, l)] * dt(s, l, mu, nu))
            .sum::<f64>()
    };
    let mut ric = DMatrix::zeros(n, n);
    for sig in 0..n {
        for nu in sig..n {
            let mut v = 0.0;
            for rho in 0..n {
                v += dgamma(rho, rho, nu, sig) - dgamma(nu, rho, rho, sig);
                for lam in 0..n {
                    v += gamma[idx(rho, rho, lam)] * gamma[idx(lam, nu, sig)]
                        - gamma[idx(rho, nu, lam)] * gamma[idx(lam, rho, sig)];
                }
            }
            ric[(sig, nu)] = v;
            ric[(nu, sig)] = v;
        }
    }
    Ok(ric)
}

/// Round metric of the unit `S^d` in hyperspherical angles, written into the
/// diagonal block starting at `offset` with factor `scale²`.
fn sphere_block(g: &mut DMatrix<f64>, angles: &[f64], offset: usize, scale: f64) {
    let mut prod = scale * scale;
    for (i, a) in angles.iter().enumerate() {
        g[(offset + i, offset + i)] = prod;
        prod *= a.sin().powi(2);
    }
}

/// The product metric in coordinates
/// `(r, θ₁..θ_m, φ₁..φ_k, ψ)`: `dr² + f² ds_m² + g² ds_k² + h² dψ²`.
pub fn warped_product_metric(w: &WarpingTriple) -> impl Fn(&[f64]) -> DMatrix<f64> {
    let w = *w;
    move |p: &[f64]| {
        let (m, k) = (w.m as usize, w.k as usize);
        let n = m + k + 2;
        let r = p[0];
        let mut g = DMatrix::zeros(n, n);
        g[(0, 0)] = 1.0;
        sphere_block(&mut g, &p[1..1 + m], 1, w.f(r)[0]);
        sphere_block(&mut g, &p[1 + m..1 + m + k], 1 + m, w.g(r)[0]);
        g[(n - 1, n - 1)] = w.h(r)[0].powi(2);
        g
    }
}
