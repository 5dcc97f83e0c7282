//! Cone-Grushin spaces `dr² + (cr)² ds_k² + r^{-2α} dy²` on `R^{k+1} × R`.
//!
//! Points are `(x_1, …, x_{k+1}, y)`. Distances are computed in the plane
//! spanned by the two `x` parts: the cone `dr² + (cr)² dφ²` is unrolled to a
//! flat sector of angle `cπ < π`, so the model becomes `dr² + r² dθ² + r^{-2α} dy²`
//! with `θ = cφ`. The completion across the axis `r = 0` is approached through
//! paths confined to `r ≥ ε`; axis endpoints are joined radially to `r = ε`.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optim::{minimize, LbfgsOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeGrushinSpace {
    pub k: usize,
    pub alpha: f64,
    pub c: f64,
}

impl ConeGrushinSpace {
    pub fn new(k: usize, alpha: f64, c: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("sphere dimension k must be at least 2, got {k}")));
        }
        if !(alpha > 0.0) || !(c > 0.0 && c < 1.0) {
            return Err(Error::Argument(format!("need α > 0 and c ∈ (0,1), got α={alpha}, c={c}")));
        }
        Ok(ConeGrushinSpace { k, alpha, c })
    }

    pub fn dim(&self) -> usize {
        self.k + 2
    }

    /// `(x, y) ↦ (λx, λ^{1+α} y)`.
    pub fn dilate(&self, lambda: f64, p: &[f64]) -> Vec<f64> {
        let n = p.len();
        p.iter()
            .enumerate()
            .map(|(i, v)| if i + 1 == n { v * lambda.powf(1.0 + self.alpha) } else { v * lambda })
            .collect()
    }

    /// The point of the axis `C` at height `y`.
    pub fn axis_point(&self, y: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        p[self.k + 1] = y;
        p
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("point has non-finite coordinates".into()));
        }
        Ok(())
    }

    /// Endpoints `(r, θ, y)` in the unrolled model.
    fn reduce(&self, p: &[f64], q: &[f64]) -> ([f64; 3], [f64; 3]) {
        let k1 = self.k + 1;
        let (x, xp) = (&p[..k1], &q[..k1]);
        let r0 = crate::linalg::norm(x);
        let r1 = crate::linalg::norm(xp);
        let phi = if r0 == 0.0 || r1 == 0.0 {
            0.0
        } else {
            let cos = x.iter().zip(xp).map(|(a, b)| a * b).sum::<f64>() / (r0 * r1);
            cos.clamp(-1.0, 1.0).acos()
        };
        ([r0, 0.0, p[k1]], [r1, self.c * phi, q[k1]])
    }
}

impl ConeGrushinSpace {
    /// Cartesian vertices of a reduced certificate between `p` and `q`, with
    /// their cumulative length fractions in `[0, 1]`.
    pub fn certificate_points(&self, p: &[f64], q: &[f64], path: &[[f64; 3]]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let k1 = self.k + 1;
        let unit = |v: &[f64]| {
            let n = crate::linalg::norm(v);
            (n > 0.0).then(|| v.iter().map(|a| a / n).collect::<Vec<f64>>())
        };
        let (up, uq) = (unit(&p[..k1]), unit(&q[..k1]));
        let e1 = up.clone().or_else(|| uq.clone()).unwrap_or_else(|| {
            let mut e = vec![0.0; k1];
            e[0] = 1.0;
            e
        });
        // second axis of the plane through e1 and q; any orthogonal unit vector when degenerate
        let orth = |v: &[f64]| {
            let d: f64 = v.iter().zip(&e1).map(|(a, b)| a * b).sum();
            unit(&v.iter().zip(&e1).map(|(a, b)| a - d * b).collect::<Vec<_>>())
        };
        let e2 = uq
            .as_deref()
            .and_then(|v| orth(v).filter(|_| up.is_some()))
            .or_else(|| {
                (0..k1).find_map(|i| {
                    let mut b = vec![0.0; k1];
                    b[i] = 1.0;
                    orth(&b)
                })
            })
            .unwrap();
        let points = path
            .iter()
            .map(|v| {
                let phi = v[1] / self.c;
                let mut x: Vec<f64> = (0..k1).map(|i| v[0] * (phi.cos() * e1[i] + phi.sin() * e2[i])).collect();
                x.push(v[2]);
                x
            })
            .collect();
        let mut cum = vec![0.0];
        for w in path.windows(2) {
            cum.push(cum.last().unwrap() + segment_length(&w[0], &w[1], self.alpha));
        }
        let total = *cum.last().unwrap();
        let fractions = cum.iter().map(|c| if total > 0.0 { c / total } else { 0.0 }).collect();
        (fractions, points)
    }
}

#[derive(Clone, Debug)]
pub struct ConeOptions {
    pub segments: usize,
    pub epsilons: Vec<f64>,
    pub max_iter: usize,
    /// Initial radial bulges, in units of `|Δy|^{1/(1+α)}`.
    pub bulges: Vec<f64>,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions {
            segments: 128,
            epsilons: vec![1e-2, 1e-3, 1e-4],
            max_iter: 200,
            bulges: vec![0.0, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeDistance {
    /// Extrapolation `ε → 0` from the last two barriers.
    pub estimate: f64,
    /// Length of the certificate path at the smallest barrier.
    pub upper: f64,
    /// `(ε, length, smallest interior r)` per barrier.
    pub per_epsilon: Vec<(f64, f64, f64)>,
    /// Certificate vertices `(r, θ, y)` at the smallest barrier, radial legs included.
    pub path: Vec<[f64; 3]>,
    pub converged: bool,
}

// Gauss–Legendre on [0, 1]
const GL_S: [f64; 5] = [
    0.046_910_077_030_668,
    0.230_765_344_947_158,
    0.5,
    0.769_234_655_052_842,
    0.953_089_922_969_332,
];
const GL_W: [f64; 5] = [
    0.118_463_442_528_095,
    0.239_314_335_249_683,
    0.284_444_444_444_444,
    0.239_314_335_249_683,
    0.118_463_442_528_095,
];

fn segment_length(a: &[f64; 3], b: &[f64; 3], alpha: f64) -> f64 {
    let (dr, dt, dy) = (b[0] - a[0], b[1] - a[1], b[2] - a[2]);
    let pieces = 4;
    let mut len = 0.0;
    for p in 0..pieces {
        for (s, w) in GL_S.iter().zip(GL_W) {
            let u = (p as f64 + s) / pieces as f64;
            let r = (1.0 - u) * a[0] + u * b[0];
            len += w / pieces as f64 * (dr * dr + r * r * dt * dt + r.powf(-2.0 * alpha) * dy * dy).sqrt();
        }
    }
    len
}

/// Length of the piecewise-linear path in `(r, θ, y)`.
fn path_length(path: &[[f64; 3]], alpha: f64) -> f64 {
    path.windows(2).map(|w| segment_length(&w[0], &w[1], alpha)).sum()
}

/// Discrete energy `M Σ_i ∫₀¹ |P_{i+1} − P_i|²_{g(P(s))} ds` of a polyline
/// in `(r, θ, y)` with interior gradient and block-tridiagonal Hessian
/// (diagonal blocks `d`, super-diagonal blocks `e`). `None` when a vertex
/// violates `r ≥ ε`.
fn reduced_energy(
    path: &[[f64; 3]],
    eps: f64,
    alpha: f64,
    grad: &mut [f64],
    d: &mut [Matrix3<f64>],
    e: &mut [Matrix3<f64>],
) -> Option<f64> {
    let m = path.len() - 1;
    if path[1..m].iter().any(|v| !(v[0] >= eps)) {
        return None;
    }
    let scale = m as f64;
    grad.iter_mut().for_each(|v| *v = 0.0);
    d.iter_mut().for_each(|b| *b = Matrix3::zeros());
    e.iter_mut().for_each(|b| *b = Matrix3::zeros());
    let mut total = 0.0;
    for i in 0..m {
        let (a, b) = (path[i], path[i + 1]);
        let (dr, dt, dy) = (b[0] - a[0], b[1] - a[1], b[2] - a[2]);
        // R2 = ∫ r², RW = ∫ r^{-2α}, with first and second derivatives in (a_r, b_r)
        let (mut r2, mut rw) = (0.0, 0.0);
        let (mut r2_1, mut rw_1) = ([0.0; 2], [0.0; 2]);
        let (mut r2_2, mut rw_2) = ([[0.0; 2]; 2], [[0.0; 2]; 2]);
        for (s, w) in GL_S.iter().zip(GL_W) {
            let r = (1.0 - s) * a[0] + s * b[0];
            let rp = r.powf(-2.0 * alpha);
            let cf = [1.0 - s, *s];
            r2 += w * r * r;
            rw += w * rp;
            for u in 0..2 {
                r2_1[u] += w * 2.0 * r * cf[u];
                rw_1[u] += w * (-2.0 * alpha) * rp / r * cf[u];
                for v in 0..2 {
                    r2_2[u][v] += w * 2.0 * cf[u] * cf[v];
                    rw_2[u][v] += w * 2.0 * alpha * (2.0 * alpha + 1.0) * rp / (r * r) * cf[u] * cf[v];
                }
            }
        }
        total += dr * dr + r2 * dt * dt + rw * dy * dy;
        let sigma = [-1.0, 1.0];
        let mut g6 = [[0.0; 3]; 2];
        let mut h6 = [[Matrix3::<f64>::zeros(); 2]; 2];
        for u in 0..2 {
            g6[u] = [
                2.0 * dr * sigma[u] + r2_1[u] * dt * dt + rw_1[u] * dy * dy,
                2.0 * r2 * dt * sigma[u],
                2.0 * rw * dy * sigma[u],
            ];
            for v in 0..2 {
                let h = &mut h6[u][v];
                h[(0, 0)] = 2.0 * sigma[u] * sigma[v] + r2_2[u][v] * dt * dt + rw_2[u][v] * dy * dy;
                h[(0, 1)] = r2_1[u] * 2.0 * dt * sigma[v];
                h[(1, 0)] = r2_1[v] * 2.0 * dt * sigma[u];
                h[(0, 2)] = rw_1[u] * 2.0 * dy * sigma[v];
                h[(2, 0)] = rw_1[v] * 2.0 * dy * sigma[u];
                h[(1, 1)] = 2.0 * r2 * sigma[u] * sigma[v];
                h[(2, 2)] = 2.0 * rw * sigma[u] * sigma[v];
            }
        }
        // interior vertex j = i + u has unknown index j − 1
        for u in 0..2 {
            let j = i + u;
            if j == 0 || j == m {
                continue;
            }
            for c in 0..3 {
                grad[3 * (j - 1) + c] += scale * g6[u][c];
            }
            d[j - 1] += scale * h6[u][u];
        }
        if i >= 1 && i + 1 < m {
            e[i - 1] += scale * h6[0][1];
        }
    }
    Some(total * scale)
}

/// Solve `(T + μI) x = b` for block-tridiagonal symmetric `T`; `None` if not
/// positive definite.
fn block_tridiagonal_solve(d: &[Matrix3<f64>], e: &[Matrix3<f64>], mu: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = d.len();
    let mut chol = Vec::with_capacity(n);
    let mut y: Vec<Vector3<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = d[i] + Matrix3::identity() * mu;
        let mut rhs = Vector3::new(b[3 * i], b[3 * i + 1], b[3 * i + 2]);
        if i > 0 {
            let prev: &nalgebra::Cholesky<f64, nalgebra::U3> = &chol[i - 1];
            let et = e[i - 1].transpose();
            s -= et * prev.solve(&e[i - 1]);
            rhs -= et * prev.solve(&y[i - 1]);
        }
        chol.push(s.cholesky()?);
        y.push(rhs);
    }
    let mut x = vec![Vector3::zeros(); n];
    for i in (0..n).rev() {
        let mut rhs = y[i];
        if i + 1 < n {
            rhs -= e[i] * x[i + 1];
        }
        x[i] = chol[i].solve(&rhs);
    }
    Some(x.iter().flat_map(|v| [v[0], v[1], v[2]]).collect())
}

/// Damped Newton on the interior vertices, keeping `r ≥ ε`.
fn optimize_reduced(path: &mut [[f64; 3]], eps: f64, alpha: f64, max_iter: usize) -> (f64, bool) {
    let m = path.len() - 1;
    let nv = m - 1;
    for v in path[1..m].iter_mut() {
        v[0] = v[0].max(eps);
    }
    let mut g = vec![0.0; 3 * nv];
    let mut d = vec![Matrix3::zeros(); nv];
    let mut e = vec![Matrix3::zeros(); nv.saturating_sub(1)];
    let Some(mut f) = reduced_energy(path, eps, alpha, &mut g, &mut d, &mut e) else {
        return (f64::INFINITY, false);
    };
    if nv == 0 {
        return (f, true);
    }
    let mut mu = 0.0;
    let mut trial = path.to_vec();
    let (mut tg, mut td, mut te) = (g.clone(), d.clone(), e.clone());
    for _ in 0..max_iter {
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gmax <= 1e-12 * f.max(1.0) {
            return (f, true);
        }
        let neg: Vec<f64> = g.iter().map(|v| -v).collect();
        let diag_scale = d.iter().map(|b| b.diagonal().amax()).fold(0.0, f64::max).max(1e-300);
        let step = loop {
            if let Some(s) = block_tridiagonal_solve(&d, &e, mu, &neg) {
                break s;
            }
            mu = if mu == 0.0 { 1e-10 * diag_scale } else { mu * 10.0 };
            if mu > 1e10 * diag_scale {
                return (f, false);
            }
        };
        let slope: f64 = step.iter().zip(&g).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for (j, v) in trial[1..m].iter_mut().enumerate() {
                for c in 0..3 {
                    v[c] = path[j + 1][c] + t * step[3 * j + c];
                }
            }
            if let Some(ft) = reduced_energy(&trial, eps, alpha, &mut tg, &mut td, &mut te) {
                if ft <= f + 1e-4 * t * slope {
                    let stalled = f - ft <= 1e-15 * f.abs();
                    path.copy_from_slice(&trial);
                    f = ft;
                    std::mem::swap(&mut g, &mut tg);
                    std::mem::swap(&mut d, &mut td);
                    std::mem::swap(&mut e, &mut te);
                    accepted = true;
                    if stalled {
                        return (f, true);
                    }
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            mu = if mu == 0.0 { 1e-6 * diag_scale } else { mu * 10.0 };
            if mu > 1e10 * diag_scale {
                return (f, false);
            }
        } else if t == 1.0 {
            mu *= 0.1;
        }
    }
    (f, false)
}

fn initial_path(a: &[f64; 3], b: &[f64; 3], bulge: f64, m: usize) -> Vec<[f64; 3]> {
    (0..=m)
        .map(|i| {
            let s = i as f64 / m as f64;
            [
                (1.0 - s) * a[0] + s * b[0] + bulge * (std::f64::consts::PI * s).sin(),
                (1.0 - s) * a[1] + s * b[1],
                (1.0 - s) * a[2] + s * b[2],
            ]
        })
        .collect()
}

/// Upper bound and `ε → 0` extrapolation of the completed distance.
pub fn cone_grushin_distance(cg: &ConeGrushinSpace, p: &[f64], q: &[f64], opts: &ConeOptions) -> Result<ConeDistance> {
    cg.check(p)?;
    cg.check(q)?;
    if opts.segments < 2 || opts.epsilons.is_empty() || opts.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Argument("need ≥ 2 segments and strictly decreasing barriers".into()));
    }
    let (a, b) = cg.reduce(p, q);
    if a == b {
        return Ok(ConeDistance {
            estimate: 0.0,
            upper: 0.0,
            per_epsilon: opts.epsilons.iter().map(|e| (*e, 0.0, a[0])).collect(),
            path: vec![a, b],
            converged: true,
        });
    }
    let m = opts.segments;
    let scale = (b[2] - a[2]).abs().powf(1.0 / (1.0 + cg.alpha));
    let lift = |v: &[f64; 3], eps: f64| [v[0].max(eps), v[1], v[2]];
    let mut per_epsilon = Vec::new();
    let mut best: Option<Vec<[f64; 3]>> = None;
    let mut converged = true;
    let mut certificate = Vec::new();
    for (idx, &eps) in opts.epsilons.iter().enumerate() {
        let (sa, sb) = (lift(&a, eps), lift(&b, eps));
        let mut path = if idx == 0 {
            let mut chosen: Option<(f64, Vec<[f64; 3]>, bool)> = None;
            let bulges: Vec<f64> = if scale > 0.0 { opts.bulges.clone() } else { vec![0.0] };
            for bulge in bulges {
                let mut cand = initial_path(&sa, &sb, bulge * scale, m);
                let (e, conv) = optimize_reduced(&mut cand, eps, cg.alpha, opts.max_iter);
                if e.is_finite() && chosen.as_ref().map_or(true, |c| e < c.0) {
                    chosen = Some((e, cand, conv));
                }
            }
            let (_, cand, conv) = chosen.ok_or_else(|| Error::NonConvergence("no finite path energy".into()))?;
            converged &= conv;
            cand
        } else {
            let mut cand = best.clone().unwrap();
            cand[0] = sa;
            cand[m] = sb;
            let (_, conv) = optimize_reduced(&mut cand, eps, cg.alpha, opts.max_iter);
            converged &= conv;
            cand
        };
        best = Some(path.clone());
        // radial legs from the true endpoints
        if a[0] < eps {
            path.insert(0, a);
        }
        if b[0] < eps {
            path.push(b);
        }
        let len = path_length(&path, cg.alpha);
        // the previous certificate is admissible for the smaller barrier too
        if let Some(&(_, prev_len, prev_min)) = per_epsilon.last() {
            if prev_len <= len {
                per_epsilon.push((eps, prev_len, prev_min));
                continue;
            }
        }
        let inner = &path[1..path.len() - 1];
        let min_r = inner.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        per_epsilon.push((eps, len, if inner.is_empty() { a[0].min(b[0]) } else { min_r }));
        certificate = path;
    }
    let n = per_epsilon.len();
    let upper = per_epsilon[n - 1].1;
    let estimate = if n >= 2 {
        let (e1, d1, _) = per_epsilon[n - 2];
        let (e2, d2, _) = per_epsilon[n - 1];
        d2 - (d1 - d2) * e2 / (e1 - e2)
    } else {
        upper
    };
    Ok(ConeDistance {
        estimate,
        upper,
        per_epsilon,
        path: certificate,
        converged,
    })
}

/// Distance in Cartesian coordinates `(x, y)` without the symmetry reduction,
/// for pairs whose minimisers stay away from the axis.
pub fn cone_grushin_distance_full(cg: &ConeGrushinSpace, p: &[f64], q: &[f64], opts: &ConeOptions) -> Result<f64> {
    cg.check(p)?;
    cg.check(q)?;
    let d = cg.dim();
    let m = opts.segments;
    let (c2, alpha) = (cg.c * cg.c, cg.alpha);
    let mut x0 = Vec::with_capacity((m - 1) * d);
    for i in 1..m {
        let s = i as f64 / m as f64;
        x0.extend(p.iter().zip(q).map(|(a, b)| (1.0 - s) * a + s * b));
    }
    // c²|dx|² + (1−c²)(x̂·dx)² + |x|^{-2α} dy² at each quadrature node
    let energy = |x: &[f64], g: &mut [f64]| -> f64 {
        g.iter_mut().for_each(|v| *v = 0.0);
        let vert = |i: usize| -> &[f64] {
            if i == 0 {
                p
            } else if i == m {
                q
            } else {
                &x[(i - 1) * d..i * d]
            }
        };
        let mut e = 0.0;
        let mut xq = vec![0.0; d - 1];
        for i in 0..m {
            let (a, b) = (vert(i), vert(i + 1));
            let dx: Vec<f64> = (0..d - 1).map(|j| b[j] - a[j]).collect();
            let dy = b[d - 1] - a[d - 1];
            let mut ga = vec![0.0; d];
            let mut gb = vec![0.0; d];
            for (s, w) in GL_S.iter().zip(GL_W) {
                for j in 0..d - 1 {
                    xq[j] = (1.0 - s) * a[j] + s * b[j];
                }
                let rho2: f64 = xq.iter().map(|v| v * v).sum();
                let t: f64 = xq.iter().zip(&dx).map(|(u, v)| u * v).sum();
                let rp = rho2.powf(-alpha);
                e += w * (c2 * dx.iter().map(|v| v * v).sum::<f64>() + (1.0 - c2) * t * t / rho2 + rp * dy * dy);
                for j in 0..d - 1 {
                    let gx = (1.0 - c2) * (2.0 * t * dx[j] / rho2 - 2.0 * t * t * xq[j] / (rho2 * rho2))
                        - 2.0 * alpha * rp / rho2 * xq[j] * dy * dy;
                    let gd = 2.0 * c2 * dx[j] + (1.0 - c2) * 2.0 * t * xq[j] / rho2;
                    ga[j] += w * ((1.0 - s) * gx - gd);
                    gb[j] += w * (s * gx + gd);
                }
                ga[d - 1] -= w * 2.0 * rp * dy;
                gb[d - 1] += w * 2.0 * rp * dy;
            }
            if i > 0 {
                for j in 0..d {
                    g[(i - 1) * d + j] += ga[j] * m as f64;
                }
            }
            if i + 1 < m {
                for j in 0..d {
                    g[i * d + j] += gb[j] * m as f64;
                }
            }
        }
        e * m as f64
    };
    let res = minimize(
        energy,
        &x0,
        &LbfgsOptions {
            memory: 20,
            max_iter: opts.max_iter,
            grad_tol: 1e-12,
            rel_tol: 1e-15,
        },
    );
    if !res.f.is_finite() {
        return Err(Error::NonConvergence("full-model path energy is not finite".into()));
    }
    // length by refined quadrature on the Cartesian polyline
    let mut len = 0.0;
    let pieces = 4;
    for i in 0..m {
        let a = if i == 0 { p } else { &res.x[(i - 1) * d..i * d] };
        let b = if i + 1 == m { q } else { &res.x[i * d..(i + 1) * d] };
        let dx: Vec<f64> = (0..d - 1).map(|j| b[j] - a[j]).collect();
        let dy = b[d - 1] - a[d - 1];
        for piece in 0..pieces {
            for (s, w) in GL_S.iter().zip(GL_W) {
                let u = (piece as f64 + s) / pieces as f64;
                let xq: Vec<f64> = (0..d - 1).map(|j| (1.0 - u) * a[j] + u * b[j]).collect();
                let rho2: f64 = xq.iter().map(|v| v * v).sum();
                let t: f64 = xq.iter().zip(&dx).map(|(u, v)| u * v).sum();
                let q2 = c2 * dx.iter().map(|v| v * v).sum::<f64>() + (1.0 - c2) * t * t / rho2
                    + rho2.powf(-alpha) * dy * dy;
                len += w / pieces as f64 * q2.sqrt();
            }
        }
    }
    Ok(len)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilationRow {
    pub pair: usize,
    pub lambda: f64,
    pub scaled: f64,
    pub expected: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilationReport {
    pub rows: Vec<DilationRow>,
    pub max_rel_err: f64,
    pub passed: bool,
}

pub const DILATION_TOL: f64 = 1e-2;

/// `|d(δ_λ p, δ_λ q) − λ d(p, q)| / (λ d(p, q))` from extrapolated estimates.
pub fn dilation_isometry_check(
    cg: &ConeGrushinSpace,
    pairs: &[(Vec<f64>, Vec<f64>)],
    lambdas: &[f64],
    opts: &ConeOptions,
) -> Result<DilationReport> {
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Argument("dilation factors must be positive".into()));
    }
    let per_pair: Vec<Result<Vec<DilationRow>>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (p, q))| {
            let base = cone_grushin_distance(cg, p, q, opts)?.estimate;
            lambdas
                .iter()
                .map(|&l| {
                    let scaled = cone_grushin_distance(cg, &cg.dilate(l, p), &cg.dilate(l, q), opts)?.estimate;
                    let expected = l * base;
                    let rel_err = if expected == 0.0 { scaled.abs() } else { (scaled - expected).abs() / expected };
                    Ok(DilationRow {
                        pair: i,
                        lambda: l,
                        scaled,
                        expected,
                        rel_err,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_pair {
        rows.extend(r?);
    }
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(DilationReport {
        rows,
        max_rel_err,
        passed: max_rel_err <= DILATION_TOL,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisScaling {
    /// `c̃ = d((0,0), (0,1))`.
    pub c_tilde: f64,
    /// `(y, d((0,0),(0,y)), c̃ |y|^{1/(1+α)}, relative error)`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    /// Least-squares slope of `log d` against `log |y|`.
    pub slope: f64,
    pub exponent: f64,
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 1e-300 && xs.len() >= 2).then(|| sxy / sxx)
}

/// Distances from the origin along the singular axis against `c̃ |y|^{1/(1+α)}`.
pub fn singular_axis_scaling(cg: &ConeGrushinSpace, ys: &[f64], opts: &ConeOptions) -> Result<AxisScaling> {
    let origin = cg.axis_point(0.0);
    let c_tilde = cone_grushin_distance(cg, &origin, &cg.axis_point(1.0), opts)?.estimate;
    let exponent = 1.0 / (1.0 + cg.alpha);
    let ds: Vec<Result<f64>> = ys
        .par_iter()
        .map(|&y| Ok(cone_grushin_distance(cg, &origin, &cg.axis_point(y), opts)?.estimate))
        .collect();
    let mut rows = Vec::new();
    for (&y, d) in ys.iter().zip(ds) {
        let d = d?;
        let pred = c_tilde * y.abs().powf(exponent);
        rows.push((y, d, pred, (d - pred).abs() / pred));
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.0.abs().ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let slope = ls_slope(&lx, &ly).ok_or_else(|| Error::EstimateFailed("degenerate y sample".into()))?;
    Ok(AxisScaling {
        c_tilde,
        rows,
        slope,
        exponent,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct HausdorffFit {
    /// `(δ, N(δ))`.
    pub rows: Vec<(f64, u64)>,
    pub slope: f64,
}

/// Covering numbers of `C ∩ {|y| ≤ 1}` by balls of radius `δ = 2^{-3}..2^{-10}`.
/// A ball centred on the axis covers a `y`-interval of half-length
/// `(δ/c̃)^{1+α}`, so `N(δ) = ⌈(c̃/δ)^{1+α}⌉`.
pub fn hausdorff_dimension_estimate(alpha: f64, c_tilde: f64) -> Result<HausdorffFit> {
    if !(alpha > 0.0) || !(c_tilde > 0.0) || !c_tilde.is_finite() {
        return Err(Error::EstimateFailed(format!("need α > 0 and c̃ > 0, got α={alpha}, c̃={c_tilde}")));
    }
    let rows: Vec<(f64, u64)> = (3..=10)
        .map(|j| {
            let delta = 2f64.powi(-j);
            (delta, (c_tilde / delta).powf(1.0 + alpha).ceil().max(1.0) as u64)
        })
        .collect();
    let lx: Vec<f64> = rows.iter().map(|r| (1.0 / r.0).ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| (r.1 as f64).ln()).collect();
    if ly.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::EstimateFailed("covering numbers do not vary with δ".into()));
    }
    let slope = ls_slope(&lx, &ly).ok_or_else(|| Error::EstimateFailed("degenerate regression".into()))?;
    Ok(HausdorffFit { rows, slope })
}

impl HausdorffFit {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("log_delta,log_n,slope\n");
        for (d, n) in &self.rows {
            s.push_str(&format!("{:e},{:e},{:e}\n", d.ln(), (*n as f64).ln(), self.slope));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalReport {
    /// Largest `|ẏ| − r^α |γ̇|_g` over all quadrature nodes.
    pub max_excess: f64,
    pub samples: usize,
    pub passed: bool,
}

/// `|ẏ| ≤ r^α |γ̇|_g + 10⁻⁶` along certificate paths in `(r, θ, y)`.
pub fn horizontal_distribution_check(cg: &ConeGrushinSpace, paths: &[Vec<[f64; 3]>]) -> HorizontalReport {
    let mut max_excess = f64::NEG_INFINITY;
    let mut samples = 0;
    for path in paths {
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (dr, dt, dy) = (b[0] - a[0], b[1] - a[1], b[2] - a[2]);
            for s in GL_S {
                let r = (1.0 - s) * a[0] + s * b[0];
                if r <= 0.0 {
                    continue;
                }
                let speed = (dr * dr + r * r * dt * dt + r.powf(-2.0 * cg.alpha) * dy * dy).sqrt();
                max_excess = max_excess.max(dy.abs() - r.powf(cg.alpha) * speed);
                samples += 1;
            }
        }
    }
    HorizontalReport {
        max_excess,
        samples,
        passed: max_excess <= 1e-6,
    }
}
