//! Direct method: minimize control energy over piecewise-constant controls
//! with a quadratic endpoint penalty, then enforce the endpoint exactly by
//! minimum-norm Gauss–Newton corrections.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::curve::{integrate_control, integrate_control_steps, ControlCurve, PiecewiseControl};
use super::hamiltonian::{shooting_geodesic, ShootingOptions};
use super::rk4::{backward, forward, Scratch};
use crate::error::{check_dim, Result};
use crate::linalg::{dist, min_norm_solve, norm};
use crate::optim::{minimize, LbfgsOptions};
use crate::structure::{projection_lower_bound, riemannian_lower_bound_metric, SubRiemannianStructure};

#[derive(Clone, Debug)]
pub struct DistanceOptions {
    /// Number of constant-control segments on `[0, 1]`.
    pub segments: usize,
    /// Random restarts in addition to the projection and shooting seeds.
    pub restarts: usize,
    pub seed: u64,
    /// Endpoint penalty weights, applied in order.
    pub penalties: Vec<f64>,
    /// RK4 steps per segment while optimizing.
    pub substeps: usize,
    pub max_iter: usize,
    /// Total RK4 steps of the certificate (and of the endpoint polish).
    pub certify_steps: usize,
    pub shooting_seed: bool,
    pub endpoint_tol: f64,
    pub lower_bound: bool,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            segments: 40,
            restarts: 16,
            seed: 20240917,
            penalties: vec![1e2, 1e4, 1e6],
            substeps: 4,
            max_iter: 300,
            certify_steps: 1000,
            shooting_seed: true,
            endpoint_tol: 1e-10,
            lower_bound: true,
        }
    }
}

/// Certified upper bound with its control, and the best available lower bound.
#[derive(Clone, Debug)]
pub struct DistanceEstimate {
    pub upper: f64,
    pub lower: f64,
    pub control: ControlCurve,
    /// False when no restart reached the endpoint within tolerance; `upper` is
    /// then the length of the best curve found, which ends near but not at `q`.
    pub converged: bool,
}

struct Problem<'a> {
    s: &'a SubRiemannianStructure,
    p: &'a [f64],
    q: &'a [f64],
    n: usize,
    m: usize,
    dts: Vec<f64>,
    ws: Scratch,
    states: Vec<f64>,
    energy_scale: f64,
    residual_scale: f64,
}

impl<'a> Problem<'a> {
    fn new(s: &'a SubRiemannianStructure, p: &'a [f64], q: &'a [f64], segments: usize) -> Self {
        let (n, m) = (s.dim(), s.num_generators());
        let sep = dist(p, q);
        Problem {
            s,
            p,
            q,
            n,
            m,
            dts: vec![1.0 / segments as f64; segments],
            ws: Scratch::new(n, m),
            states: Vec::new(),
            energy_scale: sep.max(1e-12),
            residual_scale: sep.max(1e-12).powi(2),
        }
    }

    fn objective(&mut self, u: &[f64], grad: &mut [f64], mu: f64, substeps: usize) -> f64 {
        let n = self.n;
        if forward(self.s.frame(), self.p, u, &self.dts, substeps, self.s.bound(), &mut self.states, &mut self.ws)
            .is_err()
        {
            return f64::INFINITY;
        }
        let end = &self.states[self.states.len() - n..];
        let dt = self.dts[0];
        let mut energy = 0.0;
        for (g, v) in grad.iter_mut().zip(u) {
            energy += v * v * dt;
            *g = 2.0 * v * dt / self.energy_scale;
        }
        let mut lam = vec![0.0; n];
        let mut pen = 0.0;
        for j in 0..n {
            let r = end[j] - self.q[j];
            pen += r * r;
            lam[j] = 2.0 * mu * r / self.residual_scale;
        }
        let mut gpen = vec![0.0; u.len()];
        backward(self.s.frame(), u, &self.dts, substeps, &self.states, &mut lam, &mut gpen, &mut self.ws);
        for (g, v) in grad.iter_mut().zip(&gpen) {
            *g += v;
        }
        energy / self.energy_scale + mu * pen / self.residual_scale
    }

    /// Endpoint and its Jacobian with respect to the control, `n × (N m)`.
    fn endpoint_jacobian(&mut self, u: &[f64], substeps: usize) -> Option<(Vec<f64>, DMatrix<f64>)> {
        let n = self.n;
        forward(self.s.frame(), self.p, u, &self.dts, substeps, self.s.bound(), &mut self.states, &mut self.ws).ok()?;
        let end = self.states[self.states.len() - n..].to_vec();
        let mut jac = DMatrix::zeros(n, u.len());
        for j in 0..n {
            let mut lam = vec![0.0; n];
            lam[j] = 1.0;
            let mut row = vec![0.0; u.len()];
            backward(self.s.frame(), u, &self.dts, substeps, &self.states, &mut lam, &mut row, &mut self.ws);
            for (k, v) in row.into_iter().enumerate() {
                jac[(j, k)] = v;
            }
        }
        Some((end, jac))
    }

    fn endpoint(&mut self, u: &[f64], substeps: usize) -> Option<Vec<f64>> {
        let n = self.n;
        forward(self.s.frame(), self.p, u, &self.dts, substeps, self.s.bound(), &mut self.states, &mut self.ws).ok()?;
        Some(self.states[self.states.len() - n..].to_vec())
    }

    /// Minimum-norm Gauss–Newton steps on the endpoint residual.
    fn polish(&mut self, u: &mut Vec<f64>, substeps: usize, tol: f64) -> f64 {
        let mut res = f64::INFINITY;
        for _ in 0..40 {
            let Some((end, jac)) = self.endpoint_jacobian(u, substeps) else {
                return f64::INFINITY;
            };
            res = dist(&end, self.q);
            if res <= tol {
                return res;
            }
            let r = DVector::from_fn(self.n, |j, _| self.q[j] - end[j]);
            let (delta, _) = min_norm_solve(&jac, &r);
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..25 {
                let trial: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
                if let Some(e) = self.endpoint(&trial, substeps) {
                    let r2 = dist(&e, self.q);
                    if r2 < res {
                        *u = trial;
                        res = r2;
                        improved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !improved {
                return res;
            }
        }
        res
    }

    fn length(&self, u: &[f64]) -> f64 {
        u.chunks(self.m).zip(&self.dts).map(|(c, dt)| norm(c) * dt).sum()
    }
}

fn random_seed_control(rng: &mut ChaCha8Rng, segments: usize, m: usize, sigma: f64) -> Vec<f64> {
    let mut coef = |scale: f64| -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        z * sigma * scale
    };
    let mut modes = Vec::with_capacity(m);
    for _ in 0..m {
        let a0 = coef(1.0);
        let harmonics: Vec<(f64, f64)> = (1..=3).map(|f| (coef(1.0 / f as f64), coef(1.0 / f as f64))).collect();
        modes.push((a0, harmonics));
    }
    let mut u = vec![0.0; segments * m];
    for k in 0..segments {
        let t = (k as f64 + 0.5) / segments as f64;
        for (i, (a0, harm)) in modes.iter().enumerate() {
            let mut v = *a0;
            for (f, (b, c)) in harm.iter().enumerate() {
                let w = 2.0 * std::f64::consts::PI * (f + 1) as f64 * t;
                v += b * w.sin() + c * w.cos();
            }
            u[k * m + i] = v;
        }
    }
    u
}

fn resample(curve: &ControlCurve, segments: usize, m: usize) -> Vec<f64> {
    let mut u = vec![0.0; segments * m];
    let mut counts = vec![0usize; segments];
    let total = curve.duration();
    for (t, c) in curve.times.iter().zip(&curve.controls) {
        let k = (((t / total) * segments as f64) as usize).min(segments - 1);
        counts[k] += 1;
        for i in 0..m {
            u[k * m + i] += c[i];
        }
    }
    for k in 0..segments {
        if counts[k] > 0 {
            for i in 0..m {
                u[k * m + i] /= counts[k] as f64;
            }
        }
    }
    u
}

struct Candidate {
    u: Vec<f64>,
    residual: f64,
    length: f64,
}

/// Carnot–Carathéodory distance estimate between `p` and `q`.
pub fn cc_distance(s: &SubRiemannianStructure, p: &[f64], q: &[f64], opts: &DistanceOptions) -> Result<DistanceEstimate> {
    check_dim(s.dim(), p.len())?;
    check_dim(s.dim(), q.len())?;
    let (n, m, nseg) = (s.dim(), s.num_generators(), opts.segments.max(1));
    let _ = n;
    if p == q {
        return Ok(DistanceEstimate {
            upper: 0.0,
            lower: 0.0,
            control: ControlCurve::constant(s, p, 1.0),
            converged: true,
        });
    }
    let sep = dist(p, q);

    let mut seeds: Vec<Vec<f64>> = Vec::new();
    // constant control reproducing the horizontal part of q - p at p
    let delta: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
    let (u0, _) = min_norm_solve(&s.frame_matrix(p), &DVector::from_column_slice(&delta));
    seeds.push((0..nseg).flat_map(|_| u0.iter().cloned()).collect());
    if opts.shooting_seed {
        let sopts = ShootingOptions {
            steps: 200,
            guesses: 6,
            seed: opts.seed,
            tol: 1e-8,
            ..Default::default()
        };
        if let Some((_, c)) = shooting_geodesic(s, p, q, &sopts) {
            seeds.push(resample(&c, nseg, m));
        }
    }
    let sigma = 1.5 * sep.max(0.05).sqrt();
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64));
        seeds.push(random_seed_control(&mut rng, nseg, m, sigma));
    }

    let fine = (opts.certify_steps as f64 / nseg as f64).ceil() as usize;
    let candidates: Vec<Candidate> = seeds
        .into_par_iter()
        .map(|mut u| {
            let mut prob = Problem::new(s, p, q, nseg);
            let lopts = LbfgsOptions {
                max_iter: opts.max_iter,
                ..Default::default()
            };
            for &mu in &opts.penalties {
                let res = minimize(|x, g| prob.objective(x, g, mu, opts.substeps), &u, &lopts);
                if res.f.is_finite() {
                    u = res.x;
                }
            }
            let residual = prob.polish(&mut u, fine, opts.endpoint_tol);
            let length = prob.length(&u);
            Candidate { u, residual, length }
        })
        .collect();

    let feasible = |c: &&Candidate| c.residual <= opts.endpoint_tol.max(1e-9 * sep);
    let (best, converged) = match candidates.iter().filter(feasible).min_by(|a, b| a.length.total_cmp(&b.length)) {
        Some(c) => (c, true),
        None => (
            candidates
                .iter()
                .min_by(|a, b| a.residual.total_cmp(&b.residual))
                .expect("at least one seed"),
            false,
        ),
    };
    let values: Vec<Vec<f64>> = best.u.chunks(m).map(|c| c.to_vec()).collect();
    let control = integrate_control_steps(s, p, &PiecewiseControl::uniform(1.0, values)?, opts.certify_steps)?;

    let mut lower = 0.0;
    if opts.lower_bound {
        lower = projection_lower_bound(s, p, q);
        if let Ok(g) = riemannian_lower_bound_metric(s, p) {
            if let Some(b) = g.distance_lower_bound(p, q) {
                lower = f64::max(lower, b);
            }
        }
    }
    Ok(DistanceEstimate {
        upper: control.length,
        lower,
        control,
        converged,
    })
}

/// Minimizing certificate of [`cc_distance`] reparametrized to constant speed on `[0, 1]`.
pub fn geodesic_between(s: &SubRiemannianStructure, p: &[f64], q: &[f64], opts: &DistanceOptions) -> Result<ControlCurve> {
    constant_speed(s, p, &cc_distance(s, p, q, opts)?)
}

/// The certificate of `est` (a distance estimate starting at `p`) at constant speed on `[0, 1]`.
pub fn constant_speed(s: &SubRiemannianStructure, p: &[f64], est: &DistanceEstimate) -> Result<ControlCurve> {
    let total = est.upper;
    if total == 0.0 {
        return Ok(ControlCurve::constant(s, p, 1.0));
    }
    let base = est.control.sampled_control();
    // merge the certificate's sample intervals back into control segments
    let mut durations = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for (d, v) in base.durations.iter().zip(&base.values) {
        match values.last() {
            Some(last) if last == v => *durations.last_mut().unwrap() += d,
            _ => {
                durations.push(*d);
                values.push(v.clone());
            }
        }
    }
    let mut new_d = Vec::new();
    let mut new_v = Vec::new();
    for (d, v) in durations.iter().zip(&values) {
        let speed = norm(v);
        if speed * d <= 1e-15 * total {
            continue;
        }
        new_d.push(speed * d / total);
        new_v.push(v.iter().map(|x| x * total / speed).collect());
    }
    integrate_control(s, p, &PiecewiseControl::new(new_d, new_v)?)
}
