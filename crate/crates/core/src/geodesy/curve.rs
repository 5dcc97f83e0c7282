use super::rk4::{self, Scratch};
use crate::error::{check_dim, Error, Result};
use crate::linalg::norm;
use crate::structure::SubRiemannianStructure;

/// Control that is constant on consecutive segments.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseControl {
    pub durations: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PiecewiseControl {
    pub fn new(durations: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if durations.len() != values.len() || durations.is_empty() {
            return Err(Error::Argument("control needs one value per segment".into()));
        }
        if durations.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Argument("segment durations must be positive".into()));
        }
        if values.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Argument("control values must be finite".into()));
        }
        Ok(PiecewiseControl { durations, values })
    }

    /// `segments` equal pieces on `[0, total]`.
    pub fn uniform(total: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len().max(1);
        Self::new(vec![total / n as f64; values.len()], values)
    }

    pub fn constant(total: f64, value: Vec<f64>) -> Result<Self> {
        Self::new(vec![total], vec![value])
    }

    pub fn duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// `∫ |u| dt`.
    pub fn length(&self) -> f64 {
        self.durations.iter().zip(&self.values).map(|(d, v)| d * norm(v)).sum()
    }

    pub fn energy(&self) -> f64 {
        self.durations
            .iter()
            .zip(&self.values)
            .map(|(d, v)| d * v.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }
}

/// Sampled admissible curve with its control.
///
/// `controls[k]` is the control in force on `[times[k], times[k+1])`; the last
/// entry repeats the final value. `velocities[k] = Σ u_i X_i(states[k])`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlCurve {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
    pub length: f64,
}

impl ControlCurve {
    /// The constant curve at `p` on `[0, duration]`.
    pub fn constant(s: &SubRiemannianStructure, p: &[f64], duration: f64) -> Self {
        let zero_u = vec![0.0; s.num_generators()];
        let zero_v = vec![0.0; s.dim()];
        ControlCurve {
            times: vec![0.0, duration],
            states: vec![p.to_vec(), p.to_vec()],
            velocities: vec![zero_v.clone(), zero_v],
            controls: vec![zero_u.clone(), zero_u],
            length: 0.0,
        }
    }

    pub fn start(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn endpoint(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        self.times.last().unwrap() - self.times[0]
    }

    /// Cubic Hermite interpolation of the state at time `t`, clamped to the domain.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let t0 = self.times[0];
        let t1 = *self.times.last().unwrap();
        let t = t.clamp(t0, t1);
        let k = match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(k) => return self.states[k].clone(),
            Err(k) => k.max(1) - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (h00, h10, h01, h11) = (
            2.0 * s.powi(3) - 3.0 * s * s + 1.0,
            s.powi(3) - 2.0 * s * s + s,
            -2.0 * s.powi(3) + 3.0 * s * s,
            s.powi(3) - s * s,
        );
        // exact for smooth controls; a control switch is smoothed over one step
        (0..self.states[k].len())
            .map(|j| {
                h00 * self.states[k][j]
                    + h10 * h * self.velocities[k][j]
                    + h01 * self.states[k + 1][j]
                    + h11 * h * self.velocities[k + 1][j]
            })
            .collect()
    }

    /// Piecewise-constant control taking `controls[k]` on each sample interval.
    pub fn sampled_control(&self) -> PiecewiseControl {
        let k = self.times.len() - 1;
        PiecewiseControl {
            durations: self.times.windows(2).map(|w| w[1] - w[0]).collect(),
            values: self.controls[..k].to_vec(),
        }
    }
}

/// RK4 integration with at least 1000 steps over the whole control.
pub fn integrate_control(s: &SubRiemannianStructure, p0: &[f64], u: &PiecewiseControl) -> Result<ControlCurve> {
    integrate_control_steps(s, p0, u, 1000)
}

/// RK4 integration with at least `min_steps` steps; each segment gets a share
/// proportional to its duration and at least one step.
pub fn integrate_control_steps(
    s: &SubRiemannianStructure,
    p0: &[f64],
    u: &PiecewiseControl,
    min_steps: usize,
) -> Result<ControlCurve> {
    check_dim(s.dim(), p0.len())?;
    for v in &u.values {
        check_dim(s.num_generators(), v.len())?;
    }
    let total = u.duration();
    let frame = s.frame();
    let (n, m) = (s.dim(), s.num_generators());
    let mut ws = Scratch::new(n, m);
    let mut x = p0.to_vec();
    let mut seg_start = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let mut controls = Vec::new();
    for (dur, val) in u.durations.iter().zip(&u.values) {
        let steps = ((min_steps as f64 * dur / total).ceil() as usize).max(1);
        let h = dur / steps as f64;
        for i in 0..steps {
            rk4::step(frame, &mut x, val, h, &mut ws);
            let t = if i + 1 == steps { seg_start + dur } else { seg_start + (i + 1) as f64 * h };
            if rk4::escaped(&x, s.bound()) {
                return Err(Error::DomainEscape { bound: s.bound(), time: t });
            }
            controls.push(val.clone());
            times.push(t);
            states.push(x.clone());
        }
        seg_start += dur;
    }
    controls.push(u.values.last().unwrap().clone());
    let velocities = states
        .iter()
        .zip(&controls)
        .map(|(x, c)| {
            let mut v = vec![0.0; n];
            frame.combine(x, c, &mut v);
            v
        })
        .collect();
    Ok(ControlCurve {
        times,
        states,
        velocities,
        controls,
        length: u.length(),
    })
}
