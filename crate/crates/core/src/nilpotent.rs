//! Dilations, nilpotent approximation, rescaled distances and blow-ups of curves.

use num_traits::Zero;

use crate::error::{check_dim, Error, Result};
use crate::geodesy::{
    cc_distance, integrate_control_steps, normal_geodesic_steps, ControlCurve, DistanceOptions, PiecewiseControl,
};
use crate::structure::{flag_at, minimal_control, projection_lower_bound, SubRiemannianStructure, DEFAULT_MAX_DEPTH};
use crate::symfield::{Rational, WeightVector};

/// `δ_λ(x) = (λ^{ω_1} x_1, …, λ^{ω_n} x_n)`.
pub fn dilate(w: &WeightVector, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(w.dim(), x.len())?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Argument(format!("dilation factor must be positive, got {lambda}")));
    }
    Ok(x.iter()
        .zip(w.as_slice())
        .map(|(v, &wj)| v * lambda.powi(wj as i32))
        .collect())
}

/// `‖x‖ = Σ |x_j|^{1/ω_j}`, homogeneous of degree one under `δ_λ`.
pub fn pseudo_norm(w: &WeightVector, x: &[f64]) -> f64 {
    x.iter()
        .zip(w.as_slice())
        .map(|(v, &wj)| v.abs().powf(1.0 / wj as f64))
        .sum()
}

/// Degree −1 truncation `{X̂_i}` of the generators, given privileged coordinates at 0.
pub fn nilpotent_approximation(s: &SubRiemannianStructure, w: &WeightVector) -> Result<SubRiemannianStructure> {
    check_dim(s.dim(), w.dim())?;
    let origin = vec![Rational::zero(); s.dim()];
    let mut hats = Vec::with_capacity(s.num_generators());
    for (i, g) in s.generators().iter().enumerate() {
        let (hat, rem) = g.weighted_split(w)?;
        if rem.evaluate_exact(&origin)?.iter().any(|c| !c.is_zero()) {
            return Err(Error::BadCentering { generator: i });
        }
        hats.push(hat);
    }
    let approx = SubRiemannianStructure::new(format!("{}^", s.label()), hats)?.with_bound(s.bound());
    flag_at(&approx, &vec![0.0; s.dim()], DEFAULT_MAX_DEPTH)?;
    Ok(approx)
}

/// `d_λ(x, y) = λ d(δ_{1/λ} x, δ_{1/λ} y)` from the certified upper bound.
pub fn rescaled_distance(
    s: &SubRiemannianStructure,
    w: &WeightVector,
    lambda: f64,
    x: &[f64],
    y: &[f64],
    opts: &DistanceOptions,
) -> Result<f64> {
    let xs = dilate(w, 1.0 / lambda, x)?;
    let ys = dilate(w, 1.0 / lambda, y)?;
    Ok(lambda * cc_distance(s, &xs, &ys, opts)?.upper)
}

/// The line `t ↦ e^{t v̂}(0)` on `[0, t_end]` in the nilpotent approximation,
/// where `v̂ = Σ v*_i X̂_i` and `v*` is the minimal control of `v` at 0.
pub fn blow_up_normal(s: &SubRiemannianStructure, w: &WeightVector, v: &[f64], t_end: f64) -> Result<ControlCurve> {
    let hat = nilpotent_approximation(s, w)?;
    let zero = vec![0.0; s.dim()];
    let u = minimal_control(s, &zero, v)?.u;
    integrate_control_steps(&hat, &zero, &PiecewiseControl::constant(t_end, u)?, 1000)
}

/// Curve whose blow-up is examined.
#[derive(Clone, Debug)]
pub enum BlowUpSource {
    /// A sampled curve with `γ(0) = 0`; rescaling uses its Hermite interpolant.
    Sampled(ControlCurve),
    /// The normal geodesic from 0 with this initial covector, re-integrated on
    /// `[0, T/λ]` for every `λ`.
    Normal(Vec<f64>),
    /// The constant curve at 0.
    Constant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowUpReport {
    pub schedule: Vec<f64>,
    /// Sup over the window of the pseudo-norm deviation, one per `λ`.
    pub deviations: Vec<f64>,
    pub tolerance: f64,
    pub converged: bool,
}

impl BlowUpReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,sup_deviation,verdict\n");
        let last = self.schedule.len().saturating_sub(1);
        for (i, (l, d)) in self.schedule.iter().zip(&self.deviations).enumerate() {
            let verdict = if i < last {
                "pending"
            } else if self.converged {
                "converged"
            } else {
                "not_converged"
            };
            s.push_str(&format!("{l:e},{d:e},{verdict}\n"));
        }
        s
    }
}

const WINDOW_SAMPLES: usize = 200;

/// Rescalings `γ^λ(t) = δ_λ(γ(t/λ))` on `[0, window]`, measured against
/// `candidate` when given, otherwise against the previous `λ` in the schedule.
pub fn blow_up_convergence(
    s: &SubRiemannianStructure,
    w: &WeightVector,
    source: &BlowUpSource,
    schedule: &[f64],
    window: f64,
    candidate: Option<&ControlCurve>,
    tolerance: f64,
) -> Result<BlowUpReport> {
    check_dim(s.dim(), w.dim())?;
    if schedule.is_empty() || schedule.windows(2).any(|p| !(p[1] > p[0])) || schedule[0] <= 0.0 {
        return Err(Error::Argument("λ schedule must be positive and strictly increasing".into()));
    }
    if !(window > 0.0) {
        return Err(Error::Argument("window must be positive".into()));
    }
    if let BlowUpSource::Sampled(c) = source {
        if crate::linalg::norm(c.start()) > 1e-12 {
            return Err(Error::Argument("curve must start at the origin".into()));
        }
        let needed = window / schedule[0];
        if needed > c.duration() * (1.0 + 1e-12) {
            return Err(Error::Window {
                window: needed,
                available: c.duration(),
            });
        }
    }
    if let Some(c) = candidate {
        if c.duration() < window * (1.0 - 1e-12) {
            return Err(Error::Window {
                window,
                available: c.duration(),
            });
        }
    }
    let n = s.dim();
    let grid: Vec<f64> = (0..=WINDOW_SAMPLES).map(|k| window * k as f64 / WINDOW_SAMPLES as f64).collect();
    let rescaled = |lambda: f64| -> Result<Vec<Vec<f64>>> {
        match source {
            BlowUpSource::Constant => Ok(vec![vec![0.0; n]; grid.len()]),
            BlowUpSource::Sampled(c) => grid.iter().map(|&t| dilate(w, lambda, &c.state_at(t / lambda))).collect(),
            BlowUpSource::Normal(cov) => {
                let c = normal_geodesic_steps(s, &vec![0.0; n], cov, window / lambda, 4 * WINDOW_SAMPLES)?;
                // samples land exactly on the grid: every fourth step
                (0..=WINDOW_SAMPLES)
                    .map(|k| dilate(w, lambda, &c.states[4 * k]))
                    .collect()
            }
        }
    };
    let reference: Option<Vec<Vec<f64>>> = candidate.map(|c| grid.iter().map(|&t| c.state_at(t)).collect());
    let sup_dev = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
                pseudo_norm(w, &d)
            })
            .fold(0.0, f64::max)
    };
    let mut deviations = Vec::with_capacity(schedule.len());
    let mut prev: Option<Vec<Vec<f64>>> = None;
    for &lambda in schedule {
        let cur = rescaled(lambda)?;
        let dev = match (&reference, &prev) {
            (Some(r), _) => sup_dev(&cur, r),
            (None, Some(p)) => sup_dev(&cur, p),
            (None, None) => f64::NAN,
        };
        deviations.push(dev);
        prev = Some(cur);
    }
    let last = *deviations.last().unwrap();
    Ok(BlowUpReport {
        schedule: schedule.to_vec(),
        deviations,
        tolerance,
        converged: last <= tolerance,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineIdentityReport {
    pub times: Vec<f64>,
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub passed: bool,
}

/// Compare `e^{t v̂}(0)` with `δ_t(e^{v̂}(0))` by two independent RK4 flows.
pub fn dilation_line_identity_check(
    s_hat: &SubRiemannianStructure,
    w: &WeightVector,
    v: &[f64],
) -> Result<LineIdentityReport> {
    let n = s_hat.dim();
    let zero = vec![0.0; n];
    let u = minimal_control(s_hat, &zero, v)?.u;
    let unit = integrate_control_steps(s_hat, &zero, &PiecewiseControl::constant(1.0, u.clone())?, 1000)?;
    let times = vec![0.25, 0.5, 1.0, 2.0, 4.0];
    let mut errors = Vec::with_capacity(times.len());
    for &t in &times {
        let flow = integrate_control_steps(s_hat, &zero, &PiecewiseControl::constant(t, u.clone())?, 1000)?;
        let dil = dilate(w, t, unit.endpoint())?;
        errors.push(crate::linalg::dist(flow.endpoint(), &dil));
    }
    let max_error = errors.iter().cloned().fold(0.0, f64::max);
    Ok(LineIdentityReport {
        times,
        errors,
        max_error,
        passed: max_error <= 1e-8,
    })
}

/// One row of the angle estimate: the certified lower bound on
/// `d̂(γ̂_1(±t), γ̂_2(t))` and the claimed bound `|t| √(2 ∓ 2 cos θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleRow {
    pub t: f64,
    pub sign: f64,
    pub lower: f64,
    pub claimed: f64,
}

/// Lines through 0 in the directions of unit `v1, v2 ∈ D_0`, compared through
/// lower bounds only.
pub fn angle_estimate_check(
    s_hat: &SubRiemannianStructure,
    v1: &[f64],
    v2: &[f64],
    ts: &[f64],
) -> Result<Vec<AngleRow>> {
    let n = s_hat.dim();
    let zero = vec![0.0; n];
    let u1 = minimal_control(s_hat, &zero, v1)?;
    let u2 = minimal_control(s_hat, &zero, v2)?;
    let cos = u1.u.iter().zip(&u2.u).map(|(a, b)| a * b).sum::<f64>() / (u1.norm() * u2.norm());
    let flow = |u: &[f64], t: f64| -> Result<Vec<f64>> {
        if t == 0.0 {
            return Ok(zero.clone());
        }
        let (dir, dur): (Vec<f64>, f64) = if t > 0.0 {
            (u.to_vec(), t)
        } else {
            (u.iter().map(|x| -x).collect(), -t)
        };
        Ok(integrate_control_steps(s_hat, &zero, &PiecewiseControl::constant(dur, dir)?, 1000)?
            .endpoint()
            .to_vec())
    };
    let mut rows = Vec::new();
    for &t in ts {
        for sign in [1.0, -1.0] {
            let a = flow(&u1.u, sign * t)?;
            let b = flow(&u2.u, t)?;
            let lower = projection_lower_bound(s_hat, &a, &b);
            rows.push(AngleRow {
                t,
                sign,
                lower,
                claimed: t.abs() * (2.0 - 2.0 * sign * cos).max(0.0).sqrt(),
            });
        }
    }
    Ok(rows)
}
