use nalgebra::DVector;

use super::SubRiemannianStructure;
use crate::error::{check_dim, Error, Result};
use crate::linalg::min_norm_solve;

/// Least-norm control representing a horizontal vector.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalControl {
    pub u: Vec<f64>,
    pub residual: f64,
}

impl MinimalControl {
    /// `|v|_p = |u|`.
    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.u)
    }
}

/// Absolute part of the horizontality tolerance; it is scaled by `max(1, |v|)`.
pub const HORIZONTAL_TOL: f64 = 1e-10;

pub fn minimal_control(s: &SubRiemannianStructure, p: &[f64], v: &[f64]) -> Result<MinimalControl> {
    check_dim(s.dim(), p.len())?;
    check_dim(s.dim(), v.len())?;
    let a = s.frame_matrix(p);
    let b = DVector::from_column_slice(v);
    let (u, residual) = min_norm_solve(&a, &b);
    if residual > HORIZONTAL_TOL * b.norm().max(1.0) {
        return Err(Error::NotHorizontal { residual, time: None });
    }
    Ok(MinimalControl {
        u: u.iter().cloned().collect(),
        residual,
    })
}

/// A point of a sampled curve together with its velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub t: f64,
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// `∫ |γ̇|_γ dt` by the trapezoid rule on the samples.
pub fn curve_length(s: &SubRiemannianStructure, samples: &[CurveSample]) -> Result<f64> {
    if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Argument("sample times must be strictly increasing".into()));
    }
    let speeds = samples
        .iter()
        .map(|smp| {
            minimal_control(s, &smp.point, &smp.velocity)
                .map(|c| c.norm())
                .map_err(|e| match e {
                    Error::NotHorizontal { residual, .. } => Error::NotHorizontal {
                        residual,
                        time: Some(smp.t),
                    },
                    other => other,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(samples
        .windows(2)
        .zip(speeds.windows(2))
        .map(|(w, sp)| 0.5 * (w[1].t - w[0].t) * (sp[0] + sp[1]))
        .sum())
}
