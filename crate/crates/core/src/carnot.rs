//! The Heisenberg group as the Carnot lift of the Grushin plane `{∂x, x∂y}`.
//!
//! `(a, b, c)` are exponential coordinates of `exp(a X̂₁ + b X̂₂ + c Ŷ)` with
//! `Ŷ = [X̂₁, X̂₂] = ∂y`. An element acts on the plane as the time-one flow of
//! its generator, `(x, y) ↦ (x + a, y + b x + ab/2 + c)`, and `π(g) = g⁻¹(0)`.
//! With `ξ_i(g) = d/dt g ∘ exp(−t X̂_i)` one gets
//! `ξ₁ = (−1, 0, −b/2)`, `ξ₂ = (0, −1, a/2)` and `π_* ξ_i = X̂_i`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesy::{integrate_control_steps, ControlCurve, PiecewiseControl};
use crate::linalg::dist;
use crate::structure::library::grushin;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeisenbergElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HeisenbergElement {
    pub const IDENTITY: HeisenbergElement = HeisenbergElement { a: 0.0, b: 0.0, c: 0.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        HeisenbergElement { a, b, c }
    }

    pub fn inverse(&self) -> Self {
        HeisenbergElement::new(-self.a, -self.b, -self.c)
    }

    /// `δ̂_λ(a, b, c) = (λa, λb, λ²c)`.
    pub fn dilate(&self, lambda: f64) -> Self {
        HeisenbergElement::new(lambda * self.a, lambda * self.b, lambda * lambda * self.c)
    }

    /// The diffeomorphism `exp(U)` of the plane applied to `p`.
    pub fn act(&self, p: [f64; 2]) -> [f64; 2] {
        [p[0] + self.a, p[1] + self.b * p[0] + 0.5 * self.a * self.b + self.c]
    }

    /// `(ξ₁(g), ξ₂(g))` in coordinates.
    pub fn xi(&self) -> [[f64; 3]; 2] {
        [[-1.0, 0.0, -0.5 * self.b], [0.0, -1.0, 0.5 * self.a]]
    }

    fn as_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }
}

/// `exp(U) exp(V) = exp(U + V + ½[U, V])`.
pub fn group_multiply(g: &HeisenbergElement, h: &HeisenbergElement) -> HeisenbergElement {
    HeisenbergElement::new(g.a + h.a, g.b + h.b, g.c + h.c + 0.5 * (g.a * h.b - g.b * h.a))
}

/// `π(g) = g⁻¹(0) = (−a, ab/2 − c)`, evaluated through the action of `g⁻¹`.
pub fn project(g: &HeisenbergElement) -> [f64; 2] {
    g.inverse().act([0.0, 0.0])
}

/// The preimage with `b = 0`.
pub fn preimage(x: [f64; 2]) -> HeisenbergElement {
    HeisenbergElement::new(-x[0], 0.0, -x[1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(max_deviation: f64, tolerance: f64) -> Self {
        CheckReport {
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }
}

const FD_STEP: f64 = 1e-6;

/// Central-difference `dπ(g) ξ_i(g)` against `X̂_i(π(g))` for both `i`.
pub fn pushforward_check(samples: &[HeisenbergElement]) -> CheckReport {
    let dev = samples
        .par_iter()
        .map(|g| {
            let p = project(g);
            let targets = [[1.0, 0.0], [0.0, p[0]]];
            let base = g.as_array();
            g.xi()
                .iter()
                .zip(targets)
                .map(|(xi, target)| {
                    let shifted = |s: f64| {
                        let v: Vec<f64> = base.iter().zip(xi).map(|(x, d)| x + s * d).collect();
                        project(&HeisenbergElement::new(v[0], v[1], v[2]))
                    };
                    let (fp, fm) = (shifted(FD_STEP), shifted(-FD_STEP));
                    let d = [(fp[0] - fm[0]) / (2.0 * FD_STEP), (fp[1] - fm[1]) / (2.0 * FD_STEP)];
                    dist(&d, &target)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    CheckReport::new(dev, 1e-6)
}

/// `max |δ_λ(π(g)) − π(δ̂_λ(g))|` over all samples and factors.
pub fn dilation_commute_check(samples: &[HeisenbergElement], lambdas: &[f64]) -> Result<CheckReport> {
    if lambdas.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Argument("dilation factors must be positive".into()));
    }
    let dev = samples
        .par_iter()
        .map(|g| {
            lambdas
                .iter()
                .map(|&l| {
                    let p = project(g);
                    let lhs = [l * p[0], l * l * p[1]];
                    dist(&lhs, &project(&g.dilate(l)))
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(CheckReport::new(dev, 1e-10))
}

/// Horizontal curve in the Heisenberg group driven by a plane control.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedCurve {
    pub times: Vec<f64>,
    pub elements: Vec<HeisenbergElement>,
    /// Same layout as [`ControlCurve::controls`].
    pub controls: Vec<Vec<f64>>,
    pub length: f64,
}

impl LiftedCurve {
    pub fn projection(&self) -> Vec<[f64; 2]> {
        self.elements.iter().map(project).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,a,b,c,u1,u2\n");
        for ((t, g), u) in self.times.iter().zip(&self.elements).zip(&self.controls) {
            s.push_str(&format!("{t:e},{:e},{:e},{:e},{:e},{:e}\n", g.a, g.b, g.c, u[0], u[1]));
        }
        s
    }
}

fn lift_rhs(g: [f64; 3], u: &[f64]) -> [f64; 3] {
    [-u[0], -u[1], 0.5 * (u[1] * g[0] - u[0] * g[1])]
}

/// Integrate `ġ = Σ u_i ξ_i(g)` with the base curve's piecewise-constant control.
pub fn horizontal_lift(gamma: &ControlCurve, g0: &HeisenbergElement) -> Result<LiftedCurve> {
    if gamma.start().len() != 2 || gamma.controls.iter().any(|u| u.len() != 2) {
        return Err(Error::Dimension {
            expected: 2,
            got: gamma.start().len(),
        });
    }
    let mismatch = dist(&project(g0), gamma.start());
    if mismatch > 1e-8 {
        return Err(Error::LiftBase(mismatch));
    }
    let mut g = g0.as_array();
    let mut elements = vec![*g0];
    for (k, w) in gamma.times.windows(2).enumerate() {
        let (h, u) = (w[1] - w[0], &gamma.controls[k]);
        let k1 = lift_rhs(g, u);
        let k2 = lift_rhs(std::array::from_fn(|j| g[j] + 0.5 * h * k1[j]), u);
        let k3 = lift_rhs(std::array::from_fn(|j| g[j] + 0.5 * h * k2[j]), u);
        let k4 = lift_rhs(std::array::from_fn(|j| g[j] + h * k3[j]), u);
        for j in 0..3 {
            g[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        elements.push(HeisenbergElement::new(g[0], g[1], g[2]));
    }
    let length = gamma.sampled_control().length();
    Ok(LiftedCurve {
        times: gamma.times.clone(),
        elements,
        controls: gamma.controls.clone(),
        length,
    })
}

/// Project a lift with constant control and return the plane curve of that
/// control, after checking it reproduces the projection.
pub fn constant_control_descent(lift: &LiftedCurve) -> Result<ControlCurve> {
    let u = lift.controls[0].clone();
    let spread = lift.controls.iter().map(|v| dist(v, &u)).fold(0.0, f64::max);
    if spread > 1e-10 {
        return Err(Error::Argument(format!("control is not constant (spread {spread:e})")));
    }
    let t0 = lift.times[0];
    let duration = lift.times.last().unwrap() - t0;
    let start = project(&lift.elements[0]);
    let curve = integrate_control_steps(&grushin(), &start, &PiecewiseControl::constant(duration, u)?, 1000)?;
    let dev = lift
        .times
        .iter()
        .zip(lift.projection())
        .map(|(t, p)| dist(&p, &curve.state_at(t - t0)))
        .fold(0.0, f64::max);
    if dev > 1e-8 {
        return Err(Error::EstimateFailed(format!(
            "projected lift departs from the constant-control flow by {dev:e}"
        )));
    }
    Ok(curve)
}
