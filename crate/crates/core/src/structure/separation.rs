use super::{minimal_control, SubRiemannianStructure};
use crate::error::{Error, Result};
use crate::geodesy::{cc_distance, ControlCurve, DistanceOptions};
use crate::linalg::dist;

/// Ratios `d_F(α(t), β(t)) / t` on a shrinking grid against `|α̇(0) − β̇(0)|_p`.
#[derive(Clone, Debug)]
pub struct SeparationReport {
    pub target: f64,
    /// `(t, distance upper bound, ratio)` with `t` decreasing.
    pub rows: Vec<(f64, f64, f64)>,
    pub passed: bool,
}

pub fn first_order_separation_check(
    s: &SubRiemannianStructure,
    alpha: &ControlCurve,
    beta: &ControlCurve,
    ts: &[f64],
    tol: f64,
    opts: &DistanceOptions,
) -> Result<SeparationReport> {
    let p = alpha.start();
    if dist(p, beta.start()) > 1e-12 {
        return Err(Error::Argument("curves must start at the same point".into()));
    }
    let dv: Vec<f64> = alpha.velocities[0]
        .iter()
        .zip(&beta.velocities[0])
        .map(|(a, b)| a - b)
        .collect();
    let target = minimal_control(s, p, &dv)?.norm();
    let mut grid = ts.to_vec();
    grid.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(grid.len());
    for &t in &grid {
        let d = cc_distance(s, &alpha.state_at(t), &beta.state_at(t), opts)?.upper;
        rows.push((t, d, d / t));
    }
    let last = rows.last().map_or(f64::NAN, |r| r.2);
    Ok(SeparationReport {
        target,
        rows,
        passed: last >= target - tol,
    })
}
