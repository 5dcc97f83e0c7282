//! Normal geodesics as projections of the flow of `H(λ, x) = ½ Σ_i ⟨λ, X_i(x)⟩²`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::curve::ControlCurve;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, min_norm_solve};
use crate::structure::SubRiemannianStructure;

/// Covector `λ` based at `point`.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector {
    pub point: Vec<f64>,
    pub components: Vec<f64>,
}

pub fn hamiltonian(s: &SubRiemannianStructure, x: &[f64], lam: &[f64]) -> f64 {
    let (n, m) = (s.dim(), s.num_generators());
    let mut cols = vec![0.0; n * m];
    s.frame().eval(x, &mut cols);
    0.5 * (0..m)
        .map(|i| {
            let h: f64 = (0..n).map(|j| lam[j] * cols[i * n + j]).sum();
            h * h
        })
        .sum::<f64>()
}

struct Ham<'a> {
    s: &'a SubRiemannianStructure,
    cols: Vec<f64>,
    jac: Vec<f64>,
    h: Vec<f64>,
}

impl<'a> Ham<'a> {
    fn new(s: &'a SubRiemannianStructure) -> Self {
        let (n, m) = (s.dim(), s.num_generators());
        Ham {
            s,
            cols: vec![0.0; n * m],
            jac: vec![0.0; n * n * m],
            h: vec![0.0; m],
        }
    }

    /// `z = (x, λ)`; writes `(ẋ, λ̇)` into `out`.
    fn rhs(&mut self, z: &[f64], out: &mut [f64]) {
        let (n, m) = (self.s.dim(), self.s.num_generators());
        let (x, lam) = z.split_at(n);
        let frame = self.s.frame();
        frame.eval(x, &mut self.cols);
        frame.jacobian(x, &mut self.jac);
        for i in 0..m {
            self.h[i] = (0..n).map(|j| lam[j] * self.cols[i * n + j]).sum();
        }
        for j in 0..n {
            out[j] = (0..m).map(|i| self.h[i] * self.cols[i * n + j]).sum();
        }
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..m {
                let mut inner = 0.0;
                for j in 0..n {
                    inner += lam[j] * self.jac[(i * n + j) * n + k];
                }
                acc += self.h[i] * inner;
            }
            out[n + k] = -acc;
        }
    }

    fn controls(&mut self, z: &[f64]) -> Vec<f64> {
        let n = self.s.dim();
        let (x, lam) = z.split_at(n);
        self.s.frame().eval(x, &mut self.cols);
        (0..self.s.num_generators())
            .map(|i| (0..n).map(|j| lam[j] * self.cols[i * n + j]).sum())
            .collect()
    }
}

/// Integrate Hamilton's equations with `steps` RK4 steps on `[0, t_end]`.
/// Returns the projected curve and the covector at every sample.
pub fn normal_flow(
    s: &SubRiemannianStructure,
    p0: &[f64],
    lam0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<(ControlCurve, Vec<Vec<f64>>)> {
    check_dim(s.dim(), p0.len())?;
    check_dim(s.dim(), lam0.len())?;
    if !(t_end > 0.0) || steps == 0 {
        return Err(Error::Argument("normal_flow needs T > 0 and at least one step".into()));
    }
    let h0 = hamiltonian(s, p0, lam0);
    let scale: f64 = lam0.iter().map(|v| v * v).sum();
    if !(h0 > 1e-14 * scale) || !h0.is_finite() {
        return Err(Error::DegenerateCovector);
    }
    let n = s.dim();
    let mut ham = Ham::new(s);
    let mut z: Vec<f64> = p0.iter().chain(lam0).cloned().collect();
    let mut k = [vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n], vec![0.0; 2 * n]];
    let mut y = vec![0.0; 2 * n];
    let dt = t_end / steps as f64;

    let mut times = vec![0.0];
    let mut states = vec![p0.to_vec()];
    let mut covectors = vec![lam0.to_vec()];
    let mut controls = vec![ham.controls(&z)];
    for step in 1..=steps {
        ham.rhs(&z, &mut k[0]);
        for st in 1..4 {
            let c = if st == 3 { dt } else { 0.5 * dt };
            for j in 0..2 * n {
                y[j] = z[j] + c * k[st - 1][j];
            }
            let (_, tail) = k.split_at_mut(st);
            ham.rhs(&y, &mut tail[0]);
        }
        for j in 0..2 * n {
            z[j] += dt / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
        }
        let t = step as f64 * dt;
        if z[..n].iter().any(|v| !(v.abs() <= s.bound())) || z[n..].iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainEscape { bound: s.bound(), time: t });
        }
        times.push(t);
        states.push(z[..n].to_vec());
        covectors.push(z[n..].to_vec());
        controls.push(ham.controls(&z));
    }
    let velocities: Vec<Vec<f64>> = states
        .iter()
        .zip(&controls)
        .map(|(x, u)| {
            let mut v = vec![0.0; n];
            s.frame().combine(x, u, &mut v);
            v
        })
        .collect();
    let speeds: Vec<f64> = controls.iter().map(|u| crate::linalg::norm(u)).collect();
    let length = speeds.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    Ok((
        ControlCurve {
            times,
            states,
            velocities,
            controls,
            length,
        },
        covectors,
    ))
}

/// Default step count: at least 1000 and at most 0.01 time units per step.
pub fn normal_geodesic(s: &SubRiemannianStructure, p0: &[f64], lam0: &[f64], t_end: f64) -> Result<ControlCurve> {
    let steps = ((t_end * 100.0).ceil() as usize).max(1000);
    normal_geodesic_steps(s, p0, lam0, t_end, steps)
}

pub fn normal_geodesic_steps(
    s: &SubRiemannianStructure,
    p0: &[f64],
    lam0: &[f64],
    t_end: f64,
    steps: usize,
) -> Result<ControlCurve> {
    normal_flow(s, p0, lam0, t_end, steps).map(|r| r.0)
}

#[derive(Clone, Debug)]
pub struct ShootingOptions {
    pub steps: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub guesses: usize,
    pub seed: u64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            steps: 400,
            max_iter: 60,
            tol: 1e-10,
            guesses: 8,
            seed: 0x5eed,
        }
    }
}

fn endpoint(s: &SubRiemannianStructure, p: &[f64], lam: &[f64], steps: usize) -> Option<Vec<f64>> {
    normal_flow(s, p, lam, 1.0, steps)
        .ok()
        .map(|(c, _)| c.endpoint().to_vec())
}

/// Damped Newton on `λ ↦ exp_p(λ)(1) − q` from one initial covector.
/// Returns the covector and the unit-time geodesic when the residual reaches `tol`.
pub fn shoot(
    s: &SubRiemannianStructure,
    p: &[f64],
    q: &[f64],
    guess: &[f64],
    opts: &ShootingOptions,
) -> Option<(Vec<f64>, ControlCurve)> {
    let n = s.dim();
    let mut lam = guess.to_vec();
    let mut end = endpoint(s, p, &lam, opts.steps)?;
    let mut res = dist(&end, q);
    for _ in 0..opts.max_iter {
        if res <= opts.tol {
            break;
        }
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let hstep = 1e-7 * lam[k].abs().max(1.0);
            let mut lp = lam.clone();
            lp[k] += hstep;
            let ep = endpoint(s, p, &lp, opts.steps)?;
            for j in 0..n {
                jac[(j, k)] = (ep[j] - end[j]) / hstep;
            }
        }
        let r = DVector::from_fn(n, |j, _| q[j] - end[j]);
        let (delta, _) = min_norm_solve(&jac, &r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = lam.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
            if let Some(e) = endpoint(s, p, &trial, opts.steps) {
                let r2 = dist(&e, q);
                if r2 < res {
                    lam = trial;
                    end = e;
                    res = r2;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res > opts.tol {
        return None;
    }
    let curve = normal_geodesic_steps(s, p, &lam, 1.0, opts.steps.max(1000)).ok()?;
    Some((lam, curve))
}

/// Shortest unit-time normal geodesic from `p` to `q` found from seeded random
/// initial covectors, if any converges.
pub fn shooting_geodesic(
    s: &SubRiemannianStructure,
    p: &[f64],
    q: &[f64],
    opts: &ShootingOptions,
) -> Option<(Vec<f64>, ControlCurve)> {
    let n = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let delta: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    let mut best: Option<(Vec<f64>, ControlCurve)> = None;
    for g in 0..opts.guesses {
        let scale = [0.5, 2.0, 8.0][g % 3];
        let guess: Vec<f64> = (0..n)
            .map(|j| if g == 0 { delta[j] } else { delta[j] + scale * (rng.gen::<f64>() * 2.0 - 1.0) })
            .collect();
        if let Some((lam, c)) = shoot(s, p, q, &guess, opts) {
            if best.as_ref().map_or(true, |b| c.length < b.1.length) {
                best = Some((lam, c));
            }
        }
    }
    best
}
